"""Instance generators and JSON file formats.

Files use 1-based agent labels; everything returned from here is 0-based.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .core import ABSTAIN, DomainError, GameInstance, PureProfile, ValidationError
from .evaluation import MixedProfile


@dataclass(frozen=True)
class Digraph:
    m: int
    arcs: tuple

    def __post_init__(self):
        if self.m < 1:
            raise ValidationError("a digraph needs at least one vertex")
        arcs = tuple((int(a), int(b)) for a, b in self.arcs)
        for a, b in arcs:
            if not (0 <= a < self.m and 0 <= b < self.m):
                raise ValidationError(f"arc ({a + 1},{b + 1}) has an endpoint out of range")
        if len(set(arcs)) != len(arcs):
            raise ValidationError("digraph has duplicate arcs")
        object.__setattr__(self, "arcs", arcs)


def gen_lemma1() -> GameInstance:
    """Three agents with cyclic preferences and no pure Nash equilibrium."""
    return GameInstance(np.array([[0.5, 1.0, 0.0], [0.0, 0.5, 1.0], [1.0, 0.0, 0.5]]))


def _check_delta(delta: float) -> None:
    if not 0.0 < delta < 1.0:
        raise DomainError(f"delta must lie strictly between 0 and 1, got {delta}")


def gen_lemma2(delta: float) -> GameInstance:
    _check_delta(delta)
    d = float(delta)
    return GameInstance(np.array([[d, 1.0, 0.0], [0.0, d, 1.0], [1.0, 0.0, d]]))


def lemma2_equilibrium(delta: float) -> MixedProfile:
    """The unique mixed Nash equilibrium of :func:`gen_lemma2`."""
    _check_delta(delta)
    d = float(delta)
    return MixedProfile.from_delegation(
        [[d, 1.0 - d, 0.0], [0.0, d, 1.0 - d], [1.0 - d, 0.0, d]])


def gen_tight(n: int, delta: float) -> GameInstance:
    """``n + 2`` agents on which no epsilon-Nash profile beats ``eps * OPT`` by more than ``2(1-eps)delta``."""
    if n < 1:
        raise DomainError(f"n must be at least 1, got {n}")
    _check_delta(delta)
    u = np.zeros((n + 2, n + 2))
    u[:2, 0] = delta
    u[2:, 1] = 1.0
    return GameInstance(u)


def gen_from_dominating_set(g: Digraph) -> GameInstance:
    """Unit utility along every arc of ``g``, zero elsewhere (self-loops included)."""
    u = np.zeros((g.m, g.m))
    for a, b in g.arcs:
        u[a, b] = 1.0
    return GameInstance(u)


RANDOM_MODELS = ("uniform", "sparse", "diagonal-boost")


def gen_random(n: int, model: str = "uniform", seed=None, p: float = 0.5,
               beta: float = 1.0, weights=None) -> GameInstance:
    """Random utilities: i.i.d. uniform, sparsified off the diagonal, or with a scaled diagonal.

    ``diagonal-boost`` with ``beta > 1`` can exceed 1 and yields a relaxed instance.
    """
    if n < 1:
        raise DomainError(f"n must be at least 1, got {n}")
    if model not in RANDOM_MODELS:
        raise DomainError(f"unknown model {model!r}; choose from {', '.join(RANDOM_MODELS)}")
    rng = np.random.default_rng(seed)
    u = rng.random((n, n))
    relaxed = False
    if model == "sparse":
        if not 0.0 <= p <= 1.0:
            raise DomainError(f"sparse keep-probability must lie in [0, 1], got {p}")
        keep = rng.random((n, n)) < p
        np.fill_diagonal(keep, True)
        u = np.where(keep, u, 0.0)
    elif model == "diagonal-boost":
        if not (beta >= 0 and math.isfinite(beta)):
            raise DomainError(f"beta must be finite and non-negative, got {beta}")
        np.fill_diagonal(u, beta * rng.random(n))
        relaxed = beta > 1
    return GameInstance(u, weights, relaxed=relaxed)


# ---------------------------------------------------------------- file formats

def _load(text: str) -> dict:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    if not isinstance(data, dict):
        raise ValidationError("top-level JSON value must be an object")
    return data


def _number(v, where: str) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ValidationError(f"{where}: expected a number, got {v!r}")
    return float(v)


def _matrix(rows, n: int, cols: int, where: str) -> np.ndarray:
    if not isinstance(rows, list) or len(rows) != n:
        raise ValidationError(f"{where}: expected a list of {n} rows")
    out = np.empty((n, cols))
    for i, row in enumerate(rows):
        if not isinstance(row, list) or len(row) != cols:
            got = len(row) if isinstance(row, list) else type(row).__name__
            raise ValidationError(f"{where}[{i}]: expected {cols} entries, got {got}")
        for j, v in enumerate(row):
            out[i, j] = _number(v, f"{where}[{i}][{j}]")
    return out


def instance_from_dict(data: dict) -> GameInstance:
    unknown = set(data) - {"n", "utilities", "weights", "names", "relaxed"}
    if unknown:
        raise ValidationError(f"unknown instance fields: {sorted(unknown)}")
    n = data.get("n")
    if isinstance(n, bool) or not isinstance(n, int) or n < 1:
        raise ValidationError(f"n: expected a positive integer, got {n!r}")
    if "utilities" not in data:
        raise ValidationError("utilities: missing")
    u = _matrix(data["utilities"], n, n, "utilities")
    weights = None
    if "weights" in data:
        w = data["weights"]
        if not isinstance(w, list) or len(w) != n:
            raise ValidationError(f"weights: expected a list of {n} numbers")
        weights = [_number(v, f"weights[{i}]") for i, v in enumerate(w)]
    names = data.get("names")
    if names is not None and (not isinstance(names, list) or len(names) != n
                              or not all(isinstance(s, str) for s in names)):
        raise ValidationError(f"names: expected a list of {n} strings")
    relaxed = data.get("relaxed", False)
    if not isinstance(relaxed, bool):
        raise ValidationError("relaxed: expected true or false")
    return GameInstance(u, weights, tuple(names) if names else None, relaxed)


def parse_instance(text: str) -> GameInstance:
    return instance_from_dict(_load(text))


def instance_to_dict(instance: GameInstance) -> dict:
    data = {"n": instance.n, "utilities": instance.utilities.tolist()}
    if not np.all(instance.weights == 1.0):
        data["weights"] = instance.weights.tolist()
    if instance.names is not None:
        data["names"] = list(instance.names)
    if instance.relaxed:
        data["relaxed"] = True
    return data


def serialize_instance(instance: GameInstance) -> str:
    return json.dumps(instance_to_dict(instance), indent=2) + "\n"


def parse_profile(text: str, n: int | None = None):
    """Read a pure or mixed profile file; ``n`` optionally pins the agent count."""
    data = _load(text)
    kind = data.get("type")
    if kind == "pure":
        raw = data.get("choices")
        if not isinstance(raw, list):
            raise ValidationError("choices: expected a list")
        choices = []
        for i, c in enumerate(raw):
            if c == "abstain":
                choices.append(ABSTAIN)
            elif isinstance(c, int) and not isinstance(c, bool) and 1 <= c <= len(raw):
                choices.append(c - 1)
            else:
                raise ValidationError(f"choices[{i}]: expected an agent label 1..{len(raw)} or \"abstain\", got {c!r}")
        prof = PureProfile(tuple(choices))
    elif kind == "mixed":
        rows = data.get("rows")
        if not isinstance(rows, list):
            raise ValidationError("rows: expected a list")
        m = len(rows)
        prof = MixedProfile(_matrix(rows, m, m + 1, "rows"))
    else:
        raise ValidationError(f"type: expected \"pure\" or \"mixed\", got {kind!r}")
    if n is not None and prof.n != n:
        raise ValidationError(f"profile has {prof.n} agents, instance has {n}")
    return prof


def profile_to_dict(profile) -> dict:
    if isinstance(profile, PureProfile):
        return {"type": "pure",
                "choices": ["abstain" if c == ABSTAIN else c + 1 for c in profile.choices]}
    return {"type": "mixed", "rows": profile.rows.tolist()}


def serialize_profile(profile) -> str:
    return json.dumps(profile_to_dict(profile), indent=2) + "\n"


def parse_digraph(text: str) -> Digraph:
    data = _load(text)
    m = data.get("m")
    if isinstance(m, bool) or not isinstance(m, int) or m < 1:
        raise ValidationError(f"m: expected a positive integer, got {m!r}")
    arcs = data.get("arcs", [])
    if not isinstance(arcs, list):
        raise ValidationError("arcs: expected a list of [i, j] pairs")
    out = []
    for k, arc in enumerate(arcs):
        if (not isinstance(arc, list) or len(arc) != 2
                or not all(isinstance(v, int) and not isinstance(v, bool) for v in arc)):
            raise ValidationError(f"arcs[{k}]: expected a pair of integers")
        out.append((arc[0] - 1, arc[1] - 1))
    return Digraph(m, tuple(out))


def serialize_digraph(g: Digraph) -> str:
    return json.dumps({"m": g.m, "arcs": [[a + 1, b + 1] for a, b in g.arcs]}) + "\n"
