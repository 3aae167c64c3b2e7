"""Pure and approximate equilibria of the delegation game.

Utilities are multilinear in the agents' rows, so an agent's best value
against fixed opponents is always attained by a pure choice. Everything below
leans on that: best responses, restricted best responses and certificates are
computed from the vector of pure deviation values.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .core import (
    ABSTAIN,
    DomainError,
    GameInstance,
    PureProfile,
    ValidationError,
    check_size,
)
from .evaluation import EXACT_LIMIT, MixedProfile, PathEvaluator, resolve_gurus_batch
from .optimization import assign_leaves

PURE_NASH_LIMIT = 8
TIE_TOL = 1e-12
_ENUM_CHUNK = 1 << 16


@dataclass(frozen=True)
class EquilibriumReport:
    best_values: np.ndarray
    utilities: np.ndarray
    agent_epsilons: np.ndarray
    epsilon: float
    social_welfare: float
    opt: Optional[float] = None
    welfare_ratio: Optional[float] = None

    def to_dict(self) -> dict:
        return {
            "epsilon": self.epsilon,
            "social_welfare": self.social_welfare,
            "opt": self.opt,
            "welfare_ratio": self.welfare_ratio,
            "agents": [
                {"agent": i + 1, "utility": float(u), "best_deviation": float(v),
                 "epsilon": float(e)}
                for i, (u, v, e) in enumerate(
                    zip(self.utilities, self.best_values, self.agent_epsilons))
            ],
        }


@dataclass(frozen=True)
class SolverConfig:
    epsilon: float
    max_iterations: int = 10000
    tolerance: float = 1e-9
    damping: float = 1.0
    mode: str = "plain"
    tie_break: str = "lowest-index"
    limit: int = EXACT_LIMIT

    def __post_init__(self):
        if not 0.0 <= self.epsilon <= 1.0:
            raise DomainError(f"epsilon must lie in [0, 1], got {self.epsilon}")
        if not 0.0 < self.damping <= 1.0:
            raise DomainError(f"damping must lie in (0, 1], got {self.damping}")
        if self.mode not in ("plain", "averaged"):
            raise DomainError(f"unknown solver mode {self.mode!r}")
        if self.tie_break != "lowest-index":
            raise DomainError(f"unsupported tie_break {self.tie_break!r}")
        if self.max_iterations < 1:
            raise DomainError("max_iterations must be positive")


@dataclass(frozen=True)
class SolverOutcome:
    profile: MixedProfile
    converged: bool
    iterations: int
    report: EquilibriumReport
    guru_set_used: tuple
    gap: float = field(default=math.inf)


def _report(ev: PathEvaluator, opt: Optional[float]) -> EquilibriumReport:
    n = ev.n
    best = np.empty(n)
    util = ev.expected_utilities()
    for i in range(n):
        best[i] = max(0.0, float(ev.deviation_values(i).max()))
    with np.errstate(divide="ignore", invalid="ignore"):
        eps = np.where(best > 0, 1.0 - util / np.where(best > 0, best, 1.0), 0.0)
    eps = np.clip(eps, 0.0, 1.0)
    sw = float(ev.instance.weights @ util)
    ratio = sw / opt if opt is not None and opt > 0 else None
    return EquilibriumReport(best, util, eps, float(eps.max()), sw, opt, ratio)


def certify_epsilon(instance: GameInstance, mixed: MixedProfile, opt: Optional[float] = None,
                    limit: int = EXACT_LIMIT) -> EquilibriumReport:
    """Smallest epsilon for which ``mixed`` is an epsilon-Nash equilibrium, per agent and overall."""
    return _report(PathEvaluator(instance, mixed, limit), opt)


def _argmax_choice(q: np.ndarray, i: int) -> int:
    """Pure best choice from deviation values: self on ties, then lowest index."""
    n = q.size - 1
    top = q[:n].max()
    if q[i] >= top - TIE_TOL:
        return i
    return int(np.flatnonzero(q[:n] >= top - TIE_TOL)[0])


def _restricted_row(q: np.ndarray, i: int, eps: float) -> np.ndarray:
    row = np.zeros(q.size)
    j = _argmax_choice(q, i)
    if j == i:
        row[i] = 1.0
    else:
        row[i] = eps
        row[j] = 1.0 - eps
    return row


def best_response(instance: GameInstance, mixed: MixedProfile, i: int,
                  limit: int = EXACT_LIMIT) -> int:
    """Index of i's best pure choice; abstaining is never returned (it is weakly dominated)."""
    return _argmax_choice(PathEvaluator(instance, mixed, limit).deviation_values(i), i)


def restricted_best_response(instance: GameInstance, mixed: MixedProfile, i: int, eps: float,
                             limit: int = EXACT_LIMIT) -> np.ndarray:
    """Best row for ``i`` among those voting with probability at least ``eps``."""
    if not 0.0 <= eps <= 1.0:
        raise DomainError(f"epsilon must lie in [0, 1], got {eps}")
    q = PathEvaluator(instance, mixed, limit).deviation_values(i)
    return _restricted_row(q, i, eps)


def _fixed_point_gap(ev: PathEvaluator, gurus: set, eps: float):
    """Per-agent shortfall of the current row against its (restricted) best response."""
    util = ev.expected_utilities()
    shortfall = np.empty(ev.n)
    best = np.empty(ev.n)
    for i in range(ev.n):
        q = ev.deviation_values(i)
        if i in gurus:
            target = float(_restricted_row(q, i, eps) @ q)
        else:
            target = float(q[:-1].max())
        best[i] = max(0.0, float(q.max()))
        shortfall[i] = max(0.0, target - util[i])
    return shortfall, best


def fixed_point_solve(instance: GameInstance, guru_set, config: SolverConfig,
                      opt: Optional[float] = None) -> SolverOutcome:
    """Round-robin restricted best-response dynamics.

    Agents in ``guru_set`` respond within the rows voting with probability at
    least ``config.epsilon``; all others respond freely. The run counts as
    converged once every agent's row is within a relative ``tolerance`` of its
    best-response value. A sweep that moves the profile by less than
    ``tolerance`` without meeting that test, or a repeated profile in plain
    undamped mode, ends the run early as non-converged; the best-certified
    profile seen is then returned.
    """
    gurus = set(int(g) for g in guru_set)
    n = instance.n
    if not gurus:
        raise ValidationError("guru set must be non-empty")
    if any(not 0 <= g < n for g in gurus):
        raise ValidationError("guru set contains an invalid agent index")
    check_size(n, config.limit, "fixed_point_solve")
    eps = config.epsilon

    x = np.zeros((n, n + 1))
    for i in gurus:
        x[i, i] = 1.0
    for i, j in assign_leaves(instance, gurus).items():
        x[i, j] = 1.0
    counts = np.ones(n)
    seen = set()
    best_seen = None
    converged = False
    gap = math.inf
    it = 0
    detect_cycles = config.mode == "plain" and config.damping == 1.0

    while it < config.max_iterations:
        it += 1
        prev = x.copy()
        for i in range(n):
            q = PathEvaluator(instance, MixedProfile(x), config.limit).deviation_values(i)
            if i in gurus:
                new = _restricted_row(q, i, eps)
            else:
                new = np.zeros(n + 1)
                new[_argmax_choice(q, i)] = 1.0
            if config.mode == "averaged":
                counts[i] += 1
                new = x[i] + (new - x[i]) / counts[i]
            if config.damping < 1.0:
                new = config.damping * new + (1.0 - config.damping) * x[i]
            x[i] = new / new.sum()

        mixed = MixedProfile(x)
        ev = PathEvaluator(instance, mixed, config.limit)
        shortfall, best = _fixed_point_gap(ev, gurus, eps)
        rel = np.where(best > 0, shortfall / np.where(best > 0, best, 1.0), 0.0)
        gap = float(rel.max())
        if gap <= config.tolerance:
            converged = True
            break
        cert = _report(ev, opt)
        if best_seen is None or cert.epsilon < best_seen[0].epsilon:
            best_seen = (cert, mixed)
        if float(np.abs(x - prev).max()) < config.tolerance:
            break
        if detect_cycles:
            key = x.tobytes()
            if key in seen:
                break
            seen.add(key)

    if converged:
        final = MixedProfile(x)
    else:
        final = best_seen[1]
    report = certify_epsilon(instance, final, opt, config.limit)
    return SolverOutcome(final, converged, it, report, tuple(sorted(gurus)), gap)


def narcissist_probability(eps: float) -> float:
    """Voting probability that makes the narcissistic-avaricious profile an eps-Nash equilibrium."""
    if not 0.75 <= eps <= 1.0:
        raise DomainError(
            f"the narcissistic-avaricious profile only certifies epsilon in [3/4, 1], got {eps}"
        )
    return 0.5 * (1.0 + math.sqrt(max(0.0, 1.0 - 4.0 * (1.0 - eps))))


def narcissistic_avaricious(instance: GameInstance, eps: float, opt: Optional[float] = None,
                            limit: int = EXACT_LIMIT):
    """Every agent votes with probability ``p`` and otherwise delegates to its favourite agent.

    Returns ``(profile, report)``; the report is computed exactly, so it
    needs ``n`` within the exact-evaluation limit.
    """
    p = narcissist_probability(eps)
    n = instance.n
    x = np.zeros((n, n + 1))
    favourite = np.argmax(instance.utilities, axis=1)
    for i, star in enumerate(favourite):
        if star == i:
            x[i, i] = 1.0
        else:
            x[i, i] = p
            x[i, star] += 1.0 - p
    mixed = MixedProfile(x)
    return mixed, certify_epsilon(instance, mixed, opt, limit)


def _decode(idx: np.ndarray, n: int) -> np.ndarray:
    out = np.empty((idx.size, n), dtype=np.intp)
    rest = idx.copy()
    for k in range(n):
        out[:, k] = rest % (n + 1)
        rest //= n + 1
    return out


def pure_nash_mask(instance: GameInstance, choices: np.ndarray, tol: float = TIE_TOL) -> np.ndarray:
    """Which rows of ``choices`` (values ``0..n``, ``n`` = abstain) are pure Nash equilibria.

    When ``i`` redirects its arc to ``k``, it inherits ``k``'s guru unless the
    walk from ``k`` runs through ``i``, in which case the new arc closes a cycle.
    """
    c, n = choices.shape
    u_ext = np.hstack([instance.utilities, np.zeros((n, 1))])
    gurus = resolve_gurus_batch(choices)
    g = np.where(gurus < 0, n, gurus)
    agents = np.arange(n)
    current = u_ext[agents[None, :], g]

    succ = np.empty((c, n + 1), dtype=np.intp)
    succ[:, :n] = choices
    succ[:, n] = n
    hits = np.zeros((c, n, n + 1), dtype=bool)
    rows = np.arange(c)[:, None]
    pos = np.broadcast_to(agents, (c, n)).copy()
    for _ in range(n + 1):
        hits[rows, agents[None, :], pos] = True
        pos = np.take_along_axis(succ, pos, axis=1)
    through = hits[:, :, :n].transpose(0, 2, 1)  # [c, i, k]: walk from k meets i

    dev = u_ext[agents[None, :, None], g[:, None, :]]
    dev = np.where(through, 0.0, dev)
    dev[:, agents, agents] = np.diag(instance.utilities)
    best = np.maximum(dev.max(axis=2), 0.0)
    return np.all(best <= current + tol, axis=1)


def enumerate_pure_nash(instance: GameInstance, limit: int = PURE_NASH_LIMIT) -> list:
    """All pure profiles, abstentions included, without a strictly improving deviation."""
    n = instance.n
    check_size(n, limit, "enumerate_pure_nash")
    total = (n + 1) ** n
    found = []
    for start in range(0, total, _ENUM_CHUNK):
        idx = np.arange(start, min(total, start + _ENUM_CHUNK), dtype=np.int64)
        choices = _decode(idx, n)
        for row in choices[pure_nash_mask(instance, choices)]:
            found.append(PureProfile(tuple(ABSTAIN if c == n else int(c) for c in row)))
    return found
