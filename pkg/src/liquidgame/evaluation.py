"""Expected utilities and guru distributions under mixed strategy profiles.

The exact routines sum, over every simple path from an agent to a prospective
guru, the product of arc probabilities. That sum is evaluated by a memoized
walk over ``(vertex, visited-set)`` states, so the cost is bounded by
``n * 2**n`` states rather than the number of paths.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import (
    ABSTAIN,
    GameInstance,
    PureProfile,
    ValidationError,
    check_size,
)

EXACT_LIMIT = 20
ROW_TOL = 1e-9
PRUNE_BELOW = 1e-15
MC_CHUNK = 8192


@dataclass(frozen=True, eq=False)
class MixedProfile:
    """Row ``i`` holds ``x[i, j]`` for each agent ``j`` followed by the abstain mass."""

    rows: np.ndarray

    def __post_init__(self):
        x = np.array(self.rows, dtype=float, copy=True)
        if x.ndim != 2 or x.shape[1] != x.shape[0] + 1:
            raise ValidationError(f"mixed profile must have shape (n, n+1), got {x.shape}")
        if not np.all(np.isfinite(x)) or np.any(x < 0):
            raise ValidationError("mixed profile entries must be finite and non-negative")
        sums = x.sum(axis=1)
        bad = np.flatnonzero(np.abs(sums - 1.0) > ROW_TOL)
        if bad.size:
            i = bad[0]
            raise ValidationError(f"row {i + 1} sums to {sums[i]!r}, expected 1")
        x[x < PRUNE_BELOW] = 0.0
        x /= x.sum(axis=1, keepdims=True)
        x.setflags(write=False)
        object.__setattr__(self, "rows", x)

    @property
    def n(self) -> int:
        return self.rows.shape[0]

    @property
    def delegation(self) -> np.ndarray:
        """The n x n block without the abstain column."""
        return self.rows[:, :-1]

    @property
    def abstain(self) -> np.ndarray:
        return self.rows[:, -1]

    @classmethod
    def from_pure(cls, profile: PureProfile) -> "MixedProfile":
        n = profile.n
        x = np.zeros((n, n + 1))
        for i, c in enumerate(profile.choices):
            x[i, n if c == ABSTAIN else c] = 1.0
        return cls(x)

    @classmethod
    def from_delegation(cls, x) -> "MixedProfile":
        """Build from an n x n matrix; any missing row mass becomes abstention."""
        x = np.asarray(x, dtype=float)
        rest = 1.0 - x.sum(axis=1, keepdims=True)
        rest[np.abs(rest) < 1e-12] = 0.0
        return cls(np.hstack([x, rest]))

    def with_row(self, i: int, row) -> "MixedProfile":
        x = self.rows.copy()
        x[i] = row
        return MixedProfile(x)

    def is_restricted_feasible(self, i: int, eps: float, tol: float = 1e-12) -> bool:
        return bool(self.rows[i, i] >= eps - tol)

    def is_pure(self) -> bool:
        return bool(np.all((self.rows == 0) | (self.rows == 1)))


@dataclass(frozen=True)
class GuruDistribution:
    masses: np.ndarray
    no_guru: float

    def total(self) -> float:
        return float(self.masses.sum() + self.no_guru)


@dataclass(frozen=True)
class EvalEstimate:
    value: float
    std_error: float
    samples: int
    seed: Optional[int]


class PathEvaluator:
    """Shared memo for all exact quantities of one (instance, profile) pair.

    ``walk(v, mask)`` is the vector of probabilities that a walk currently at
    ``v``, having already visited the vertex set ``mask``, terminates at each
    guru. Revisiting a vertex closes a delegation cycle and yields no guru.
    """

    def __init__(self, instance: GameInstance, mixed: MixedProfile, limit: int = EXACT_LIMIT):
        if mixed.n != instance.n:
            raise ValidationError(f"profile has {mixed.n} agents, instance has {instance.n}")
        check_size(instance.n, limit, "exact evaluation")
        self.instance = instance
        self.mixed = mixed
        self.n = instance.n
        x = mixed.delegation
        self._x = x
        self._targets = [
            [(int(w), float(x[v, w])) for w in np.flatnonzero(x[v]) if w != v]
            for v in range(self.n)
        ]
        self._memo: dict = {}

    def walk(self, v: int, mask: int) -> np.ndarray:
        key = (v, mask)
        hit = self._memo.get(key)
        if hit is not None:
            return hit
        out = np.zeros(self.n)
        out[v] = self._x[v, v]
        seen = mask | (1 << v)
        for w, p in self._targets[v]:
            if seen >> w & 1:
                continue
            out += p * self.walk(w, seen)
        self._memo[key] = out
        return out

    def guru_distribution(self, i: int) -> GuruDistribution:
        masses = self.walk(i, 0).copy()
        no_guru = max(0.0, 1.0 - float(masses.sum()))
        return GuruDistribution(masses, no_guru)

    def expected_utility(self, i: int) -> float:
        return float(self.walk(i, 0) @ self.instance.utilities[i])

    def expected_utilities(self) -> np.ndarray:
        return np.array([self.expected_utility(i) for i in range(self.n)])

    def deviation_values(self, i: int) -> np.ndarray:
        """Value to ``i`` of each pure choice against the others' mixed rows.

        Index ``j < n`` is "delegate to j" (``j == i`` is voting), index ``n``
        is abstaining, which is always worth zero.
        """
        u = self.instance.utilities[i]
        q = np.zeros(self.n + 1)
        start = 1 << i
        for j in range(self.n):
            q[j] = u[i] if j == i else float(self.walk(j, start) @ u)
        return q

    def social_welfare(self) -> float:
        return float(self.instance.weights @ self.expected_utilities())


def exact_guru_distribution(instance, mixed, i, limit=EXACT_LIMIT) -> GuruDistribution:
    return PathEvaluator(instance, mixed, limit).guru_distribution(i)


def exact_expected_utility(instance, mixed, i, limit=EXACT_LIMIT) -> float:
    return PathEvaluator(instance, mixed, limit).expected_utility(i)


def exact_expected_utilities(instance, mixed, limit=EXACT_LIMIT) -> np.ndarray:
    return PathEvaluator(instance, mixed, limit).expected_utilities()


def deviation_values(instance, mixed, i, limit=EXACT_LIMIT) -> np.ndarray:
    return PathEvaluator(instance, mixed, limit).deviation_values(i)


def exact_social_welfare(instance, mixed, limit=EXACT_LIMIT) -> float:
    return PathEvaluator(instance, mixed, limit).social_welfare()


def _sampling_cdf(rows: np.ndarray) -> np.ndarray:
    cdf = np.cumsum(rows, axis=1)
    for i, row in enumerate(rows):
        last = np.flatnonzero(row)[-1]
        cdf[i, last:] = 1.0
    return cdf


def sample_choices(mixed: MixedProfile, samples: int, rng: np.random.Generator) -> np.ndarray:
    """Draw ``samples`` pure realizations; column ``n`` of a row means abstain."""
    n = mixed.n
    cdf = _sampling_cdf(mixed.rows)
    draws = rng.random((samples, n))
    out = np.empty((samples, n), dtype=np.intp)
    for i in range(n):
        out[:, i] = np.searchsorted(cdf[i], draws[:, i], side="right")
    return out


def resolve_gurus_batch(choices: np.ndarray) -> np.ndarray:
    """Guru of every agent in every realization, ``-1`` where there is none.

    ``choices`` has shape (S, n) with values in ``0..n`` (``n`` = abstain).
    After ``n`` successor steps every walk sits on its component's terminal
    cycle, which is a guru exactly when it is a self-loop.
    """
    s, n = choices.shape
    succ = np.empty((s, n + 1), dtype=np.intp)
    succ[:, :n] = choices
    succ[:, n] = n
    pos = np.broadcast_to(np.arange(n), (s, n)).copy()
    for _ in range(n):
        pos = np.take_along_axis(succ, pos, axis=1)
    looped = np.take_along_axis(succ, pos, axis=1) == pos
    return np.where(looped & (pos < n), pos, -1)


def monte_carlo_utilities(instance: GameInstance, mixed: MixedProfile, samples: int,
                          seed: Optional[int] = None) -> list:
    """Sampled per-agent expected utilities with standard errors.

    Samples are drawn in fixed-size chunks, each from its own spawned
    substream, so the result depends only on ``seed`` and ``samples``.
    """
    if samples < 1:
        raise ValidationError("samples must be at least 1")
    if mixed.n != instance.n:
        raise ValidationError(f"profile has {mixed.n} agents, instance has {instance.n}")
    n = instance.n
    u = np.hstack([instance.utilities, np.zeros((n, 1))])
    agents = np.arange(n)
    chunks = -(-samples // MC_CHUNK)
    streams = np.random.SeedSequence(seed).spawn(chunks)
    shift = None
    total = np.zeros(n)
    total_sq = np.zeros(n)
    for c, ss in enumerate(streams):
        size = min(MC_CHUNK, samples - c * MC_CHUNK)
        rng = np.random.Generator(np.random.PCG64(ss))
        gurus = resolve_gurus_batch(sample_choices(mixed, size, rng))
        vals = u[agents, np.where(gurus < 0, n, gurus)]
        if shift is None:
            # shifting by the first draw keeps constant outcomes exact
            shift = vals[0].copy()
        d = vals - shift
        total += d.sum(axis=0)
        total_sq += (d * d).sum(axis=0)
    mean = shift + total / samples
    if samples > 1:
        var = np.maximum(total_sq - total * total / samples, 0.0) / (samples - 1)
        se = np.sqrt(var / samples)
    else:
        se = np.zeros(n)
    return [EvalEstimate(float(mean[i]), float(se[i]), samples, seed) for i in range(n)]
