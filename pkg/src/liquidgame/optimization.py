"""Welfare-optimal delegation.

Some optimal delegation graph is a disjoint union of stars in which every leaf
gets positive utility from its centre. Optimizing over graphs therefore
reduces to choosing the set of centres ``D`` and maximizing the star welfare

    f(D) = sum_{j in D} w_j u_jj + sum_{i not in D} w_i max_{j in D} u_ij

over non-empty subsets, which is what :func:`opt_exact` enumerates.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .core import ABSTAIN, GameInstance, PureProfile, check_size

OPT_LIMIT = 24
_BLOCK_BITS = 16
_REL_TIE = 1e-12


@dataclass(frozen=True)
class OptSolution:
    gurus: tuple
    assignment: dict
    welfare: float
    exact: bool

    def leaves(self, j: int) -> list:
        return sorted(i for i, g in self.assignment.items() if g == j)

    def profile(self, n: int) -> PureProfile:
        choices = [ABSTAIN] * n
        for j in self.gurus:
            choices[j] = j
        for i, j in self.assignment.items():
            choices[i] = j
        return PureProfile(tuple(choices))


@dataclass
class StarCheck:
    ok: bool
    problems: list = field(default_factory=list)

    def __bool__(self):
        return self.ok


def star_welfare(instance: GameInstance, gurus: Iterable[int]) -> float:
    gurus = sorted(set(gurus))
    if not gurus:
        return 0.0
    u, w = instance.utilities, instance.weights
    inside = np.zeros(instance.n, dtype=bool)
    inside[gurus] = True
    vals = np.where(inside, np.diag(u), u[:, gurus].max(axis=1))
    return float(w @ vals)


def solution_welfare(instance: GameInstance, gurus, assignment: dict) -> float:
    u, w = instance.utilities, instance.weights
    total = sum(w[j] * u[j, j] for j in gurus)
    total += sum(w[i] * u[i, j] for i, j in assignment.items())
    return float(total)


def assign_leaves(instance: GameInstance, gurus) -> dict:
    gurus = sorted(gurus)
    u = instance.utilities
    g = np.array(gurus)
    return {i: int(g[np.argmax(u[i, g])]) for i in range(instance.n) if i not in set(gurus)}


def canonicalize(instance: GameInstance, gurus, assignment: dict, exact: bool) -> OptSolution:
    """Promote every unhappy leaf to a singleton guru."""
    u = instance.utilities
    gurus = set(gurus)
    assignment = dict(assignment)
    for i, j in list(assignment.items()):
        if u[i, j] <= 0:
            del assignment[i]
            gurus.add(i)
    gurus = tuple(sorted(gurus))
    return OptSolution(gurus, dict(sorted(assignment.items())),
                       solution_welfare(instance, gurus, assignment), exact)


def _block_values(u, w, diag_w, low_best, low_member, lo, high):
    """Star welfare of every subset whose high bits equal ``high``."""
    n = u.shape[0]
    hi_idx = [k for k in range(lo, n) if high >> (k - lo) & 1]
    total = np.zeros(1 << lo)
    for i in range(n):
        if i >= lo and high >> (i - lo) & 1:
            total += diag_w[i]
            continue
        best = low_best[i]
        if hi_idx:
            best = np.maximum(best, u[i, hi_idx].max())
        contrib = w[i] * best
        if i < lo:
            contrib = np.where(low_member[i], diag_w[i], contrib)
        total += contrib
    if high == 0:
        total[0] = -np.inf
    return total


def subset_welfare_table(instance: GameInstance, limit: int = OPT_LIMIT) -> np.ndarray:
    """``f`` for every bitmask (bit ``j`` set means agent ``j`` is a guru)."""
    check_size(instance.n, limit, "subset enumeration")
    ctx = _Context(instance)
    return np.concatenate([ctx.block(h) for h in range(ctx.blocks)])


class _Context:
    def __init__(self, instance: GameInstance):
        u, w = instance.utilities, instance.weights
        n = instance.n
        self.lo = lo = min(n, _BLOCK_BITS)
        self.blocks = 1 << (n - lo)
        masks = np.arange(1 << lo)
        self.low_member = [(masks >> i & 1).astype(bool) for i in range(lo)]
        self.low_best = []
        for i in range(n):
            # no guru in the low bits is worth 0
            best = np.zeros(1 << lo)
            for k in range(lo):
                best[1 << k: 2 << k] = np.maximum(best[: 1 << k], u[i, k])
            self.low_best.append(best)
        self.u, self.w, self.diag_w = u, w, w * np.diag(u)

    def block(self, high: int) -> np.ndarray:
        return _block_values(self.u, self.w, self.diag_w, self.low_best,
                             self.low_member, self.lo, high)


def opt_exact(instance: GameInstance, limit: int = OPT_LIMIT) -> OptSolution:
    """Maximize star welfare over all non-empty guru sets.

    Subsets are scanned in increasing bitmask order and the first one within a
    relative ``1e-12`` of the maximum wins.
    """
    check_size(instance.n, limit, "opt_exact")
    ctx = _Context(instance)
    block_max = np.array([ctx.block(h).max() for h in range(ctx.blocks)])
    best = block_max.max()
    thresh = best - _REL_TIE * abs(best)
    h = int(np.flatnonzero(block_max >= thresh)[0])
    vals = ctx.block(h)
    low = int(np.flatnonzero(vals >= thresh)[0])
    mask = (h << ctx.lo) | low
    gurus = [j for j in range(instance.n) if mask >> j & 1]
    return canonicalize(instance, gurus, assign_leaves(instance, gurus), exact=True)


def opt_greedy(instance: GameInstance, tol: float = 1e-12) -> OptSolution:
    """Greedy guru insertion followed by add/drop/swap local search."""
    n = instance.n
    current: set = set()
    value = 0.0
    while len(current) < n:
        gains = [(star_welfare(instance, current | {j}) - value, -j)
                 for j in range(n) if j not in current]
        gain, neg_j = max(gains)
        if current and gain <= tol:
            break
        current.add(-neg_j)
        value += gain
    value = star_welfare(instance, current)

    improved = True
    while improved:
        improved = False
        for cand in _neighbours(current, n):
            v = star_welfare(instance, cand)
            if v > value + tol:
                current, value, improved = cand, v, True
                break
    return canonicalize(instance, current, assign_leaves(instance, current), exact=False)


def _neighbours(current: set, n: int):
    outside = [j for j in range(n) if j not in current]
    for j in outside:
        yield current | {j}
    if len(current) > 1:
        for j in sorted(current):
            yield current - {j}
    for j in sorted(current):
        for k in outside:
            yield (current - {j}) | {k}


def sum_best_upper_bound(instance: GameInstance) -> float:
    """Each agent's best possible utility, summed with weights; never below OPT."""
    return float(instance.weights @ instance.utilities.max(axis=1))


def verify_star_structure(instance: GameInstance, solution: OptSolution,
                          tol: float = 1e-9) -> StarCheck:
    problems = []
    n = instance.n
    u = instance.utilities
    gurus = set(solution.gurus)
    if not gurus:
        problems.append("guru set is empty")
    for j in gurus:
        if not 0 <= j < n:
            problems.append(f"guru index {j} out of range")
    covered = gurus | set(solution.assignment)
    missing = set(range(n)) - covered
    if missing:
        problems.append(f"agents {sorted(i + 1 for i in missing)} have no role")
    for i, j in sorted(solution.assignment.items()):
        if i in gurus:
            problems.append(f"agent {i + 1} is both guru and leaf")
        if j not in gurus:
            problems.append(f"agent {i + 1} delegates to non-guru {j + 1}")
        elif not u[i, j] > 0:
            problems.append(f"leaf {i + 1} is unhappy with guru {j + 1}")
    if not problems:
        w = solution_welfare(instance, solution.gurus, solution.assignment)
        if abs(w - solution.welfare) > tol:
            problems.append(f"welfare field {solution.welfare} != recomputed {w}")
    return StarCheck(not problems, problems)
