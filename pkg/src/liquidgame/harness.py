"""Price-of-stability sweeps and repeated-game batch runs."""
from __future__ import annotations

import argparse
import csv
import io
import json
import shlex
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional, Sequence

from .core import GameInstance, LiquidGameError
from .equilibrium import SolverConfig, certify_epsilon, fixed_point_solve, narcissistic_avaricious
from .evaluation import EXACT_LIMIT
from .instances import parse_instance
from .optimization import OPT_LIMIT, opt_exact, opt_greedy

CSV_COLUMNS = ("epsilon", "mode", "converged", "certified_epsilon", "sw", "opt", "ratio",
               "iterations", "seconds")


@dataclass
class SweepRow:
    epsilon: float
    mode: str
    converged: bool
    certified_epsilon: float
    sw: float
    opt: float
    ratio: Optional[float]
    iterations: int
    seconds: float


@dataclass
class SweepResult:
    rows: list = field(default_factory=list)
    opt_exact: bool = True

    @property
    def baseline(self) -> str:
        return "exact" if self.opt_exact else "heuristic-baseline"

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for row in self.rows:
            writer.writerow([_fmt(getattr(row, c)) for c in CSV_COLUMNS])
        return buf.getvalue()

    def to_json(self) -> str:
        return json.dumps({"baseline": self.baseline,
                           "rows": [asdict(r) for r in self.rows]}, indent=2) + "\n"


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return f"{v:.17g}"
    if v is None:
        return ""
    return str(v)


def reference_opt(instance: GameInstance, limit: int = OPT_LIMIT):
    """Exact OPT when affordable, else the greedy welfare flagged as heuristic."""
    if instance.n <= limit:
        return opt_exact(instance, limit), True
    return opt_greedy(instance), False


def parse_grid(spec: str) -> list:
    """``"a:b:s"`` (inclusive) or a comma-separated list."""
    if ":" in spec:
        start, stop, step = (float(v) for v in spec.split(":"))
        if step <= 0:
            raise ValueError("grid step must be positive")
        count = int(round((stop - start) / step)) + 1
        return [round(start + k * step, 12) for k in range(count)
                if start + k * step <= stop + 1e-12]
    return [float(v) for v in spec.split(",") if v.strip()]


def pos_sweep(instance: GameInstance, eps_grid: Sequence[float],
              modes: Sequence[str] = ("plain",), max_iterations: int = 10000,
              tolerance: float = 1e-9, damping: float = 1.0,
              limit: int = EXACT_LIMIT) -> SweepResult:
    """Fixed-point dynamics at each epsilon (gurus = optimal guru set), plus the
    narcissistic-avaricious profile wherever epsilon >= 3/4."""
    if instance.n > limit:
        raise LiquidGameError(f"pos_sweep needs exact evaluation; n={instance.n} > {limit}")
    sol, exact = reference_opt(instance)
    opt = sol.welfare
    result = SweepResult(opt_exact=exact)
    for eps in eps_grid:
        for mode in modes:
            cfg = SolverConfig(eps, max_iterations, tolerance, damping, mode, limit=limit)
            t0 = time.perf_counter()
            out = fixed_point_solve(instance, sol.gurus, cfg)
            secs = time.perf_counter() - t0
            rep = certify_epsilon(instance, out.profile, opt, limit)
            result.rows.append(SweepRow(float(eps), f"fixed-point-{mode}", out.converged,
                                        rep.epsilon, rep.social_welfare, opt,
                                        rep.welfare_ratio, out.iterations, secs))
        if eps >= 0.75:
            t0 = time.perf_counter()
            prof, _ = narcissistic_avaricious(instance, eps, limit=limit)
            secs = time.perf_counter() - t0
            rep = certify_epsilon(instance, prof, opt, limit)
            result.rows.append(SweepRow(float(eps), "na", True, rep.epsilon, rep.social_welfare,
                                        opt, rep.welfare_ratio, 1, secs))
    return result


# ------------------------------------------------------------------ batch runs

def _command_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="batch-cmd", add_help=False)
    sub = p.add_subparsers(dest="cmd", required=True)
    solve = sub.add_parser("solve", add_help=False)
    ssub = solve.add_subparsers(dest="algo", required=True)
    fp = ssub.add_parser("fixed-point", add_help=False)
    fp.add_argument("--epsilon", type=float, required=True)
    fp.add_argument("--mode", choices=("plain", "averaged"), default="plain")
    fp.add_argument("--max-iter", type=int, default=10000)
    fp.add_argument("--damping", type=float, default=1.0)
    na = ssub.add_parser("na", add_help=False)
    na.add_argument("--epsilon", type=float, required=True)
    sub.add_parser("opt", add_help=False).add_argument(
        "--method", choices=("exact", "greedy"), default="exact")
    return p


def run_single(instance: GameInstance, command: str) -> dict:
    """Run one single-instance command (``solve ...`` or ``opt ...``) and report its welfare."""
    try:
        args = _command_parser().parse_args(shlex.split(command))
    except SystemExit:
        raise LiquidGameError(f"cannot parse batch command {command!r}") from None
    sol, exact = reference_opt(instance)
    opt = sol.welfare
    if args.cmd == "opt":
        chosen = sol if args.method == "exact" and exact else opt_greedy(instance)
        return {"sw": chosen.welfare, "opt": opt, "certified_epsilon": None, "converged": True,
                "baseline": "exact" if exact else "heuristic-baseline"}
    if args.algo == "na":
        prof, _ = narcissistic_avaricious(instance, args.epsilon)
        converged = True
    else:
        cfg = SolverConfig(args.epsilon, args.max_iter, damping=args.damping, mode=args.mode)
        out = fixed_point_solve(instance, sol.gurus, cfg)
        prof, converged = out.profile, out.converged
    rep = certify_epsilon(instance, prof, opt)
    return {"sw": rep.social_welfare, "opt": opt, "certified_epsilon": rep.epsilon,
            "converged": converged, "baseline": "exact" if exact else "heuristic-baseline"}


def batch_run(instances: Sequence, command: str) -> dict:
    """Apply ``command`` to each round; report per-round and cumulative welfare ratios.

    ``instances`` may hold :class:`GameInstance` objects or file paths. A round
    that fails is recorded with its error and excluded from the totals.
    """
    rounds = []
    total_sw = total_opt = 0.0
    for k, item in enumerate(instances):
        entry = {"round": k + 1, "source": str(item) if not isinstance(item, GameInstance) else None}
        try:
            inst = item if isinstance(item, GameInstance) else parse_instance(Path(item).read_text())
            res = run_single(inst, command)
        except (OSError, LiquidGameError, ValueError) as exc:
            entry["error"] = str(exc)
            rounds.append(entry)
            continue
        total_sw += res["sw"]
        total_opt += res["opt"]
        entry.update(res)
        entry["ratio"] = res["sw"] / res["opt"] if res["opt"] > 0 else None
        entry["cumulative_sw"] = total_sw
        entry["cumulative_opt"] = total_opt
        entry["cumulative_ratio"] = total_sw / total_opt if total_opt > 0 else None
        rounds.append(entry)
    return {
        "command": command,
        "rounds": rounds,
        "cumulative_sw": total_sw,
        "cumulative_opt": total_opt,
        "cumulative_ratio": total_sw / total_opt if total_opt > 0 else None,
        "errors": sum(1 for r in rounds if "error" in r),
    }
