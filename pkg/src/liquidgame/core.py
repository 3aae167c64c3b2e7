"""Game instances, pure strategy profiles and delegation-graph semantics.

Agents are indexed ``0..n-1`` everywhere inside the library. File formats and
the CLI use 1-based labels; conversion happens only at those boundaries.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

#: Choice value meaning "no outgoing arc".
ABSTAIN = -1

GURU = "guru"
CYCLE = "cycle"
SINK = "sink"


class LiquidGameError(Exception):
    """Base class for errors raised by this package."""


class ValidationError(LiquidGameError, ValueError):
    """An instance, profile or file violates its schema."""


class DomainError(LiquidGameError, ValueError):
    """A numeric parameter lies outside the range an operation supports."""


class SizeLimitError(LiquidGameError, ValueError):
    """The instance is too large for an exponential-time exact routine."""


def check_size(n: int, limit: int, what: str) -> None:
    if n > limit:
        raise SizeLimitError(
            f"{what} supports at most {limit} agents, got {n}; "
            "raise the limit explicitly or use an approximate method"
        )


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class GameInstance:
    """Utility matrix ``u[i, j]`` (utility to i when j is i's guru) plus voter weights.

    Entries must lie in [0, 1] unless ``relaxed`` is set, in which case only
    non-negativity is enforced.
    """

    utilities: np.ndarray
    weights: Optional[np.ndarray] = None
    names: Optional[tuple] = None
    relaxed: bool = False

    def __post_init__(self):
        u = np.asarray(self.utilities, dtype=float)
        if u.ndim != 2 or u.shape[0] != u.shape[1]:
            raise ValidationError(f"utilities must be a square matrix, got shape {u.shape}")
        n = u.shape[0]
        if n < 1:
            raise ValidationError("an instance needs at least one agent")
        if not np.all(np.isfinite(u)):
            raise ValidationError("utilities must be finite")
        if np.any(u < 0):
            i, j = np.argwhere(u < 0)[0]
            raise ValidationError(f"utility ({i + 1},{j + 1}) = {u[i, j]} is negative")
        if not self.relaxed and np.any(u > 1):
            i, j = np.argwhere(u > 1)[0]
            raise ValidationError(
                f"utility ({i + 1},{j + 1}) = {u[i, j]} is outside [0,1] (pass relaxed=True to allow)"
            )
        w = np.ones(n) if self.weights is None else np.asarray(self.weights, dtype=float)
        if w.shape != (n,):
            raise ValidationError(f"weights must have length {n}, got shape {w.shape}")
        if not np.all(np.isfinite(w)) or np.any(w < 0):
            raise ValidationError("weights must be finite and non-negative")
        names = self.names
        if names is not None:
            names = tuple(str(s) for s in names)
            if len(names) != n:
                raise ValidationError(f"names must have length {n}, got {len(names)}")
        object.__setattr__(self, "utilities", _frozen(u))
        object.__setattr__(self, "weights", _frozen(w))
        object.__setattr__(self, "names", names)

    @property
    def n(self) -> int:
        return self.utilities.shape[0]

    def with_weights(self, weights) -> "GameInstance":
        return GameInstance(self.utilities, weights, self.names, self.relaxed)


@dataclass(frozen=True)
class PureProfile:
    """One choice per agent: ``ABSTAIN``, ``i`` itself (vote), or a delegate index."""

    choices: tuple

    def __post_init__(self):
        choices = tuple(int(c) for c in self.choices)
        n = len(choices)
        for i, c in enumerate(choices):
            if c != ABSTAIN and not 0 <= c < n:
                raise ValidationError(f"agent {i + 1} delegates to invalid agent index {c + 1}")
        object.__setattr__(self, "choices", choices)

    @property
    def n(self) -> int:
        return len(self.choices)

    @classmethod
    def all_vote(cls, n: int) -> "PureProfile":
        return cls(tuple(range(n)))

    @classmethod
    def all_abstain(cls, n: int) -> "PureProfile":
        return cls((ABSTAIN,) * n)


@dataclass(frozen=True, eq=False)
class DelegationGraph:
    """The 1-forest induced by a pure profile.

    ``component[i]`` is a component id, ``kinds[c]`` is one of ``GURU``,
    ``CYCLE``, ``SINK`` and ``gurus[i]`` is i's guru or ``None``.
    """

    profile: PureProfile
    component: tuple = field(init=False)
    kinds: tuple = field(init=False)
    gurus: tuple = field(init=False)

    def __post_init__(self):
        succ = self.profile.choices
        n = len(succ)
        comp = [-1] * n
        guru = [None] * n
        kinds = []
        # 0 = unseen, 1 = on current walk, 2 = resolved
        state = [0] * n
        for start in range(n):
            if state[start]:
                continue
            path = []
            v = start
            while True:
                if v == ABSTAIN:
                    c, g = len(kinds), None
                    kinds.append(SINK)
                    break
                if state[v] == 2:
                    c, g = comp[v], guru[v]
                    break
                if state[v] == 1:
                    c = len(kinds)
                    if succ[v] == v:
                        kinds.append(GURU)
                        g = v
                    else:
                        kinds.append(CYCLE)
                        g = None
                    break
                state[v] = 1
                path.append(v)
                nxt = succ[v]
                if nxt == ABSTAIN:
                    # v is the sink of an arborescence
                    c, g = len(kinds), None
                    kinds.append(SINK)
                    break
                v = nxt
            for w in path:
                state[w] = 2
                comp[w] = c
                guru[w] = g
        object.__setattr__(self, "component", tuple(comp))
        object.__setattr__(self, "kinds", tuple(kinds))
        object.__setattr__(self, "gurus", tuple(guru))

    @property
    def n(self) -> int:
        return self.profile.n

    def arcs(self) -> list:
        return [(i, c) for i, c in enumerate(self.profile.choices) if c != ABSTAIN]

    def components(self) -> list:
        out = [[] for _ in self.kinds]
        for v, c in enumerate(self.component):
            out[c].append(v)
        return out


def delegation_graph(profile: PureProfile | Sequence[int]) -> DelegationGraph:
    if not isinstance(profile, PureProfile):
        profile = PureProfile(tuple(profile))
    return DelegationGraph(profile)


def resolve_guru(graph: DelegationGraph | PureProfile, i: int) -> Optional[int]:
    """Follow out-arcs from ``i``; return the self-looping vertex reached, if any."""
    succ = graph.profile.choices if isinstance(graph, DelegationGraph) else graph.choices
    seen = set()
    v = i
    while v not in seen:
        seen.add(v)
        nxt = succ[v]
        if nxt == ABSTAIN:
            return None
        if nxt == v:
            return v
        v = nxt
    return None


def _check_profile(instance: GameInstance, profile: PureProfile) -> None:
    if profile.n != instance.n:
        raise ValidationError(f"profile has {profile.n} agents, instance has {instance.n}")


def pure_utility(instance: GameInstance, profile: PureProfile, i: int) -> float:
    _check_profile(instance, profile)
    g = resolve_guru(profile, i)
    return 0.0 if g is None else float(instance.utilities[i, g])


def pure_utilities(instance: GameInstance, profile: PureProfile) -> np.ndarray:
    _check_profile(instance, profile)
    gurus = delegation_graph(profile).gurus
    u = instance.utilities
    return np.array([0.0 if g is None else u[i, g] for i, g in enumerate(gurus)])


def social_welfare(instance: GameInstance, profile: PureProfile) -> float:
    """Weighted sum of pure utilities; equals plain SW under unit weights."""
    return float(np.dot(instance.weights, pure_utilities(instance, profile)))
