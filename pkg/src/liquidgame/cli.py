"""Command-line entry point: ``liquidgame <command> ...``.

Exit status is 0 on success, 1 on bad input and 2 when the fixed-point
dynamics did not converge (its output is still written).
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .core import LiquidGameError, PureProfile
from .equilibrium import (
    SolverConfig,
    certify_epsilon,
    enumerate_pure_nash,
    fixed_point_solve,
    narcissistic_avaricious,
)
from .evaluation import MixedProfile, PathEvaluator, monte_carlo_utilities
from .harness import batch_run, parse_grid, pos_sweep, reference_opt
from .instances import (
    gen_from_dominating_set,
    gen_lemma1,
    gen_lemma2,
    gen_random,
    gen_tight,
    parse_digraph,
    parse_instance,
    parse_profile,
    profile_to_dict,
    serialize_instance,
    serialize_profile,
)
from .optimization import opt_exact, opt_greedy

EXIT_OK, EXIT_INPUT, EXIT_NOT_CONVERGED = 0, 1, 2


def _emit(obj) -> None:
    json.dump(obj, sys.stdout, indent=2)
    sys.stdout.write("\n")


def _read(path: str) -> str:
    return Path(path).read_text()


def _instance(args):
    return parse_instance(_read(args.instance))


def _as_mixed(profile) -> MixedProfile:
    return MixedProfile.from_pure(profile) if isinstance(profile, PureProfile) else profile


def _solution_dict(sol) -> dict:
    return {
        "gurus": [j + 1 for j in sol.gurus],
        "assignment": {str(i + 1): j + 1 for i, j in sol.assignment.items()},
        "welfare": sol.welfare,
        "exact": sol.exact,
    }


def cmd_generate(args) -> int:
    if args.kind == "lemma1":
        inst = gen_lemma1()
    elif args.kind == "lemma2":
        inst = gen_lemma2(args.delta)
    elif args.kind == "tight":
        inst = gen_tight(args.n, args.delta)
    elif args.kind == "domset":
        inst = gen_from_dominating_set(parse_digraph(_read(args.graph)))
    else:
        inst = gen_random(args.n, args.model, args.seed, p=args.p, beta=args.beta)
    text = serialize_instance(inst)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_eval(args) -> int:
    inst = _instance(args)
    mixed = _as_mixed(parse_profile(_read(args.profile), inst.n))
    if args.mc:
        est = monte_carlo_utilities(inst, mixed, args.mc, args.seed)
        _emit({"method": "monte-carlo", "samples": args.mc, "seed": args.seed,
               "agents": [{"agent": i + 1, "utility": e.value, "std_error": e.std_error}
                          for i, e in enumerate(est)]})
        return EXIT_OK
    ev = PathEvaluator(inst, mixed)
    agents = range(inst.n) if args.agent is None else [args.agent - 1]
    out = []
    for i in agents:
        dist = ev.guru_distribution(i)
        out.append({"agent": i + 1, "utility": ev.expected_utility(i),
                    "guru_distribution": {str(j + 1): float(p) for j, p in enumerate(dist.masses)},
                    "no_guru": dist.no_guru,
                    "deviation_values": ev.deviation_values(i).tolist()})
    _emit({"method": "exact", "social_welfare": ev.social_welfare(), "agents": out})
    return EXIT_OK


def cmd_verify(args) -> int:
    inst = _instance(args)
    mixed = _as_mixed(parse_profile(_read(args.profile), inst.n))
    _emit(certify_epsilon(inst, mixed, args.opt).to_dict())
    return EXIT_OK


def _parse_gurus(spec: str, inst):
    if spec == "auto":
        sol, _ = reference_opt(inst)
        return sol.gurus, sol.welfare
    gurus = [int(v) - 1 for v in spec.split(",") if v.strip()]
    return gurus, None


def cmd_solve(args) -> int:
    inst = _instance(args)
    if args.algo == "na":
        sol, _ = reference_opt(inst)
        prof, rep = narcissistic_avaricious(inst, args.epsilon, opt=sol.welfare)
        result = {"algorithm": "narcissistic-avaricious", "converged": True,
                  "profile": profile_to_dict(prof), "report": rep.to_dict()}
        code = EXIT_OK
    else:
        gurus, opt = _parse_gurus(args.gurus, inst)
        if opt is None:
            opt = reference_opt(inst)[0].welfare
        cfg = SolverConfig(args.epsilon, args.max_iter, args.tolerance, args.damping, args.mode)
        out = fixed_point_solve(inst, gurus, cfg, opt=opt)
        prof = out.profile
        result = {"algorithm": f"fixed-point-{args.mode}", "converged": out.converged,
                  "iterations": out.iterations, "gurus": [g + 1 for g in out.guru_set_used],
                  "profile": profile_to_dict(prof), "report": out.report.to_dict()}
        code = EXIT_OK if out.converged else EXIT_NOT_CONVERGED
    if args.out:
        Path(args.out).write_text(serialize_profile(prof))
    _emit(result)
    return code


def cmd_pure_nash(args) -> int:
    inst = _instance(args)
    found = enumerate_pure_nash(inst)
    _emit({"checked": (inst.n + 1) ** inst.n, "count": len(found),
           "profiles": [profile_to_dict(p)["choices"] for p in found]})
    return EXIT_OK


def cmd_opt(args) -> int:
    inst = _instance(args)
    sol = opt_exact(inst) if args.method == "exact" else opt_greedy(inst)
    _emit(_solution_dict(sol))
    return EXIT_OK


def cmd_experiment(args) -> int:
    if args.kind == "pos-sweep":
        inst = _instance(args)
        res = pos_sweep(inst, parse_grid(args.eps), modes=args.mode, max_iterations=args.max_iter)
        if args.out_csv:
            Path(args.out_csv).write_text(res.to_csv())
        if args.out_json:
            Path(args.out_json).write_text(res.to_json())
        if not (args.out_csv or args.out_json):
            sys.stdout.write(res.to_csv())
        return EXIT_OK
    _emit(batch_run(args.instances, args.cmd))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="liquidgame",
                                description="Liquid democracy delegation games.")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write a game instance")
    g.add_argument("kind", choices=("lemma1", "lemma2", "tight", "domset", "random"))
    g.add_argument("--delta", type=float, default=0.1)
    g.add_argument("--n", type=int, default=5)
    g.add_argument("--graph")
    g.add_argument("--model", default="uniform")
    g.add_argument("--p", type=float, default=0.5, help="keep probability for the sparse model")
    g.add_argument("--beta", type=float, default=1.0, help="diagonal scale for diagonal-boost")
    g.add_argument("--seed", type=int)
    g.add_argument("--out")
    g.set_defaults(func=cmd_generate)

    e = sub.add_parser("eval", help="expected utilities and guru distributions")
    e.add_argument("--instance", required=True)
    e.add_argument("--profile", required=True)
    e.add_argument("--agent", type=int)
    e.add_argument("--mc", type=int, help="Monte Carlo sample count instead of exact evaluation")
    e.add_argument("--seed", type=int, default=0)
    e.set_defaults(func=cmd_eval)

    v = sub.add_parser("verify", help="certify the epsilon of a profile")
    v.add_argument("--instance", required=True)
    v.add_argument("--profile", required=True)
    v.add_argument("--opt", type=float)
    v.set_defaults(func=cmd_verify)

    s = sub.add_parser("solve", help="construct an approximate equilibrium")
    ssub = s.add_subparsers(dest="algo", required=True)
    fp = ssub.add_parser("fixed-point")
    fp.add_argument("--instance", required=True)
    fp.add_argument("--epsilon", type=float, required=True)
    fp.add_argument("--gurus", default="auto")
    fp.add_argument("--mode", choices=("plain", "averaged"), default="plain")
    fp.add_argument("--max-iter", type=int, default=10000)
    fp.add_argument("--tolerance", type=float, default=1e-9)
    fp.add_argument("--damping", type=float, default=1.0)
    fp.add_argument("--out")
    na = ssub.add_parser("na")
    na.add_argument("--instance", required=True)
    na.add_argument("--epsilon", type=float, required=True)
    na.add_argument("--out")
    s.set_defaults(func=cmd_solve)

    pn = sub.add_parser("pure-nash", help="enumerate pure Nash equilibria")
    pn.add_argument("--instance", required=True)
    pn.set_defaults(func=cmd_pure_nash)

    o = sub.add_parser("opt", help="welfare-optimal delegation")
    o.add_argument("--instance", required=True)
    o.add_argument("--method", choices=("exact", "greedy"), default="exact")
    o.set_defaults(func=cmd_opt)

    x = sub.add_parser("experiment", help="sweeps and batch runs")
    xsub = x.add_subparsers(dest="kind", required=True)
    ps = xsub.add_parser("pos-sweep")
    ps.add_argument("--instance", required=True)
    ps.add_argument("--eps", default="0.1:1.0:0.05")
    ps.add_argument("--mode", nargs="+", choices=("plain", "averaged"), default=["plain"])
    ps.add_argument("--max-iter", type=int, default=10000)
    ps.add_argument("--out-csv")
    ps.add_argument("--out-json")
    b = xsub.add_parser("batch")
    b.add_argument("--instances", nargs="+", required=True)
    b.add_argument("--cmd", required=True)
    x.set_defaults(func=cmd_experiment)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (LiquidGameError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
