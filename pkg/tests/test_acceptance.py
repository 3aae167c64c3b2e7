"""Exit criteria for the package, one test per criterion.

Run with ``pytest tests/test_acceptance.py`` (a PASS/FAIL line per criterion is
printed in the terminal summary) or directly with ``python tests/test_acceptance.py``.
"""
import sys

import numpy as np
import pytest

from liquidgame.core import DomainError, GameInstance
from liquidgame.equilibrium import (
    SolverConfig,
    best_response,
    certify_epsilon,
    enumerate_pure_nash,
    fixed_point_solve,
    narcissistic_avaricious,
    pure_nash_mask,
)
from liquidgame.evaluation import MixedProfile, PathEvaluator, monte_carlo_utilities
from liquidgame.instances import (
    Digraph,
    gen_from_dominating_set,
    gen_lemma1,
    gen_lemma2,
    gen_random,
    gen_tight,
    lemma2_equilibrium,
)
from liquidgame.optimization import opt_exact, sum_best_upper_bound, verify_star_structure

from oracles import all_choice_arrays, brute_force_opt, enumerated_guru_matrix, min_dominating_set, random_rows


def test_c01_lemma1_no_pure_nash(record_property):
    """Criterion 1: the cyclic 3-agent instance has no pure Nash equilibrium among its 64 profiles"""
    inst = gen_lemma1()
    choices = all_choice_arrays(3)
    assert choices.shape[0] == 64
    mask = pure_nash_mask(inst, choices)
    found = enumerate_pure_nash(inst)
    record_property("detail", f"checked {choices.shape[0]}, equilibria {len(found)}")
    assert not mask.any()
    assert found == []


@pytest.mark.parametrize("delta", [0.1, 0.01])
def test_c02_lemma2_regression(delta, record_property):
    """Criterion 2: OPT = 1+2d, mixed equilibrium certifies eps <= 1e-9, SW = 3d, ratio 3d/(1+2d)"""
    inst = gen_lemma2(delta)
    opt = opt_exact(inst).welfare
    rep = certify_epsilon(inst, lemma2_equilibrium(delta), opt=opt)
    record_property("detail", f"delta={delta} opt={opt!r} eps={rep.epsilon:.3g} "
                              f"sw={rep.social_welfare!r} ratio={rep.welfare_ratio!r}")
    assert opt == 1 + 2 * delta
    assert rep.epsilon <= 1e-9
    assert abs(rep.social_welfare - 3 * delta) <= 1e-12
    assert abs(rep.welfare_ratio - 3 * delta / (1 + 2 * delta)) <= 1e-9


def test_c03_exact_evaluator_vs_enumeration(record_property):
    """Criterion 3: exact guru distributions match full realization enumeration (200 pairs, n <= 5)"""
    rng = np.random.default_rng(20260301)
    worst = worst_mass = 0.0
    for k in range(200):
        n = int(rng.integers(1, 6))
        inst = GameInstance(rng.random((n, n)))
        x = MixedProfile(random_rows(rng, n, abstain=k % 3 != 0, sparsity=[0, 0.3, 0.6][k % 3]))
        P, none = enumerated_guru_matrix(x.rows)
        ev = PathEvaluator(inst, x)
        for i in range(n):
            d = ev.guru_distribution(i)
            worst = max(worst, float(np.abs(d.masses - P[i]).max()), abs(d.no_guru - none[i]))
            worst_mass = max(worst_mass, abs(d.total() - 1.0))
    record_property("detail", f"max abs diff {worst:.2e}, max mass error {worst_mass:.2e}")
    assert worst <= 1e-9
    assert worst_mass <= 1e-9


def test_c04_multilinearity(record_property):
    """Criterion 4: u_i(x) equals the row-weighted sum of pure deviation values (200 pairs, n <= 8)"""
    rng = np.random.default_rng(20260302)
    worst = 0.0
    for k in range(200):
        n = int(rng.integers(1, 9))
        inst = GameInstance(rng.random((n, n)))
        x = MixedProfile(random_rows(rng, n, sparsity=[0, 0.5][k % 2]))
        ev = PathEvaluator(inst, x)
        for i in range(n):
            worst = max(worst, abs(ev.expected_utility(i) - float(x.rows[i] @ ev.deviation_values(i))))
    record_property("detail", f"max abs diff {worst:.2e}")
    assert worst <= 1e-9


def test_c05_monte_carlo_consistency(record_property):
    """Criterion 5: 1e5-sample estimates lie within 4 standard errors for >= 99% of agents; seeded runs repeat"""
    rng = np.random.default_rng(20260303)
    within = total = 0
    for k in range(100):
        n = int(rng.integers(2, 11))
        inst = GameInstance(rng.random((n, n)))
        x = MixedProfile(random_rows(rng, n, sparsity=[0, 0.4][k % 2]))
        exact = PathEvaluator(inst, x).expected_utilities()
        est = monte_carlo_utilities(inst, x, 100_000, seed=k)
        for e, v in zip(est, exact):
            total += 1
            # 1e-12 absorbs float rounding when an outcome is deterministic (std error 0)
            within += abs(e.value - v) <= 4 * e.std_error + 1e-12
    inst = gen_lemma2(0.1)
    x = lemma2_equilibrium(0.1)
    same = monte_carlo_utilities(inst, x, 100_000, seed=5) == monte_carlo_utilities(inst, x, 100_000, seed=5)
    frac = within / total
    record_property("detail", f"{within}/{total} = {frac:.4f} within 4 SE, deterministic={same}")
    assert frac >= 0.99
    assert same


def test_c06_opt_correctness(record_property):
    """Criterion 6: subset-enumeration OPT equals brute force over all pure profiles (100 instances, n <= 7)"""
    rng = np.random.default_rng(20260304)
    worst = 0.0
    for k in range(100):
        n = int(rng.integers(1, 8))
        u = rng.random((n, n))
        if k % 4 == 1:
            u = u * (rng.random((n, n)) < 0.4)
        elif k % 4 == 2:
            u = np.round(u)
        inst = GameInstance(u)
        sol = opt_exact(inst)
        worst = max(worst, abs(sol.welfare - brute_force_opt(inst.utilities)))
        assert sol.welfare <= sum_best_upper_bound(inst) + 1e-12
        check = verify_star_structure(inst, sol)
        assert check, check.problems
    record_property("detail", f"max abs diff {worst:.2e}")
    assert worst <= 1e-9


def test_c07_narcissistic_avaricious(record_property):
    """Criterion 7: narcissistic-avaricious certifies eps and SW >= (1-eps) OPT; eps = 0.7 rejected"""
    rng = np.random.default_rng(20260305)
    instances = [gen_random(int(rng.integers(1, 9)), seed=int(rng.integers(2**31))) for _ in range(100)]
    opts = [opt_exact(inst).welfare for inst in instances]
    worst_eps = -np.inf
    worst_sw = np.inf
    for eps in (0.75, 0.8, 0.9, 1.0):
        for inst, opt in zip(instances, opts):
            _, rep = narcissistic_avaricious(inst, eps)
            worst_eps = max(worst_eps, rep.epsilon - eps)
            worst_sw = min(worst_sw, rep.social_welfare - (1 - eps) * opt)
    with pytest.raises(DomainError):
        narcissistic_avaricious(instances[0], 0.7)
    record_property("detail", f"max(cert - eps) {worst_eps:.3g}, min(SW - (1-eps)OPT) {worst_sw:.3g}")
    assert worst_eps <= 1e-9
    assert worst_sw >= -1e-9


def test_c08_bicriteria_fixed_points(record_property):
    """Criterion 8: converged fixed points satisfy cert eps <= eps + 1e-6 and SW >= eps OPT - 1e-6"""
    rng = np.random.default_rng(20260306)
    instances = [gen_lemma2(0.1)]
    instances += [gen_random(int(rng.integers(2, 7)), seed=int(rng.integers(2**31))) for _ in range(20)]
    runs = conv = 0
    for inst in instances:
        sol = opt_exact(inst)
        for eps in (0.3, 0.5, 0.7):
            for mode, iters in (("plain", 10000), ("averaged", 300)):
                out = fixed_point_solve(inst, sol.gurus, SolverConfig(eps, max_iterations=iters, mode=mode))
                fresh = certify_epsilon(inst, out.profile)
                runs += 1
                # every outcome is consistent with its own certificate
                assert fresh.epsilon == out.report.epsilon
                assert np.all(fresh.utilities >= (1 - fresh.agent_epsilons) * fresh.best_values - 1e-9)
                if out.converged:
                    conv += 1
                    assert out.report.epsilon <= eps + 1e-6
                    assert out.report.social_welfare >= eps * sol.welfare - 1e-6
    record_property("detail", f"converged {conv}/{runs} runs")


def test_c09_tightness(record_property):
    """Criterion 9: on the tight instance every profile certified at eps <= 0.5 has SW <= 0.5 OPT + 0.01"""
    inst = gen_tight(10, 0.01)
    n = inst.n
    opt = opt_exact(inst).welfare
    assert opt == pytest.approx(10.01, abs=1e-12)
    bound = 0.5 * opt + 2 * 0.5 * 0.01
    profiles = []
    for gurus in ([0, 1], [1], [0], list(range(n)), [0, 1, 2]):
        for mode, damping in (("plain", 1.0), ("plain", 0.5), ("averaged", 1.0)):
            cfg = SolverConfig(0.5, max_iterations=200, mode=mode, damping=damping)
            profiles.append(fixed_point_solve(inst, gurus, cfg).profile)
    for eps in (0.75, 0.9, 1.0):
        profiles.append(narcissistic_avaricious(inst, eps)[0])
    profiles.append(MixedProfile.from_pure(opt_exact(inst).profile(n)))
    rng = np.random.default_rng(20260307)
    for k in range(40):
        # perturbations of the solver's equilibrium plus sparse random profiles
        base = profiles[0].rows
        if k % 2:
            rows = random_rows(rng, n, sparsity=0.8)
        else:
            noise = random_rows(rng, n, sparsity=0.8)
            rows = (1 - 0.05 * rng.random()) * base + 0.05 * rng.random() * noise
            rows /= rows.sum(axis=1, keepdims=True)
        profiles.append(MixedProfile(rows))
    qualifying = 0
    worst = -np.inf
    for x in profiles:
        rep = certify_epsilon(inst, x)
        if rep.epsilon <= 0.5:
            qualifying += 1
            worst = max(worst, rep.social_welfare - bound)
    record_property("detail", f"{qualifying}/{len(profiles)} profiles certified <= 0.5, "
                              f"max(SW - bound) {worst:.3g}")
    assert qualifying >= 1
    assert worst <= 1e-9


def _all_loopless(m):
    pairs = [(a, b) for a in range(m) for b in range(m) if a != b]
    for bits in range(1 << len(pairs)):
        yield Digraph(m, tuple(p for k, p in enumerate(pairs) if bits >> k & 1))


def test_c10_hardness_reduction(record_property):
    """Criterion 10: OPT of the reduced game equals m - (minimum dominating set size)"""
    graphs = list(_all_loopless(3))
    rng = np.random.default_rng(20260308)
    for _ in range(200):
        m = int(rng.integers(1, 7))
        density = rng.random()
        arcs = tuple((a, b) for a in range(m) for b in range(m) if a != b and rng.random() < density)
        graphs.append(Digraph(m, arcs))
    bad = [g for g in graphs
           if opt_exact(gen_from_dominating_set(g)).welfare != g.m - min_dominating_set(g.m, g.arcs)]
    record_property("detail", f"{len(graphs) - len(bad)}/{len(graphs)} digraphs agree")
    assert not bad


def test_c11_weighted_doubling(record_property):
    """Criterion 11: doubling all weights doubles SW and OPT and leaves eps, best responses and D* unchanged"""
    rng = np.random.default_rng(20260309)
    for _ in range(50):
        n = int(rng.integers(1, 7))
        w = rng.random(n) * 3
        inst = GameInstance(rng.random((n, n)), weights=w)
        dbl = inst.with_weights(2 * w)
        a, b = opt_exact(inst), opt_exact(dbl)
        assert b.welfare == 2 * a.welfare
        assert set(a.gurus) == set(b.gurus)
        x = MixedProfile(random_rows(rng, n))
        for prof in (x, narcissistic_avaricious(inst, 0.8)[0]):
            ra, rb = certify_epsilon(inst, prof), certify_epsilon(dbl, prof)
            assert rb.social_welfare == 2 * ra.social_welfare
            assert np.array_equal(ra.agent_epsilons, rb.agent_epsilons)
            for i in range(n):
                assert best_response(inst, prof, i) == best_response(dbl, prof, i)
    record_property("detail", "50 instances")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q"]))
