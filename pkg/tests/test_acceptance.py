"""Acceptance criteria, one or more tests per criterion.

Every test carries a ``criterion`` marker; the terminal summary prints one
PASS/FAIL line per criterion.  Run just this module with
``pytest tests/test_acceptance.py -v``.
"""

import math

import numpy as np
import pytest

from corrbandit.analysis import (
    BoundParams,
    bound_competitive,
    bound_total,
    build_alternate,
    pushforward,
)
from corrbandit.cli import main
from corrbandit.errors import NoFeasibleEpsilon, NonUniqueOptimum
from corrbandit.model import build_discrete, optimal_arm
from corrbandit.policy import PolicyState, update
from corrbandit.pseudo import build_table, classify, expected_pseudo_matrix, pseudo_reward
from corrbandit.scenarios import continuous_case, example2, vector_case1, vector_case2
from corrbandit.sim import ExperimentConfig, run_experiment

from conftest import random_model_args

criterion = pytest.mark.criterion


@criterion(1)
def test_c1_golden_pseudo_reward():
    m = example2()
    table = build_table(m)
    assert pseudo_reward(table, 1, 0, 2.0) == 1.5
    assert pseudo_reward(table, 1, 0, 1.0) == 1.5
    s = PolicyState(2, m.reward_span)
    for r in [1.0] * 3 + [2.0] * 7:
        update(s, 0, r, table)
    assert s.mu_hat[0] == 1.7
    assert s.phi_hat[1, 0] == 1.5


@criterion(2)
@pytest.mark.parametrize("build", [vector_case1, vector_case2], ids=["case1", "case2"])
def test_c2_vector_gap(build):
    best = optimal_arm(build())
    assert best.k_star == 0
    assert abs(best.gaps[1] - 0.04) <= 1e-9


@criterion(3)
@pytest.mark.parametrize("grid", [500, 1000, 2000])
@pytest.mark.parametrize("case, k_star, competitive, non_competitive", [
    (1, 0, (), (1, 2)),
    (2, 0, (1,), (2,)),
    (3, 2, (0, 1), ()),
], ids=["beta44", "beta25", "beta15"])
def test_c3_continuous_classification(case, k_star, competitive, non_competitive, grid):
    m = continuous_case(case, grid)
    c = classify(m, build_table(m))
    got = (c.k_star, c.competitive, c.non_competitive)
    assert got == (k_star, competitive, non_competitive), (
        f"pseudo-gaps to best arm: {c.pseudo_gaps[:, c.k_star].round(4).tolist()}")


@pytest.fixture(scope="module")
def c0_traces():
    m = example2()
    c = classify(m, build_table(m))
    assert c.competitive == () and c.pseudo_gaps[1, 0] >= 0.1
    return run_experiment(m, ExperimentConfig(T=50_000, runs=100, base_seed=0))


@criterion(4)
@pytest.mark.slow
def test_c4_regret_ordering(c0_traces):
    cucb, ucb1 = c0_traces["cucb"], c0_traces["ucb1"]
    assert cucb.mean_regret[-1] < 0.5 * ucb1.mean_regret[-1]


@criterion(4)
@pytest.mark.slow
def test_c4_noncompetitive_pulls_flatten(c0_traces):
    tr = c0_traces["cucb"]
    growth = tr.mean_pulls[tr.at(50_000), 1] - tr.mean_pulls[tr.at(10_000), 1]
    assert growth <= 5


@criterion(5)
@pytest.mark.slow
def test_c5_regret_parity():
    m = continuous_case(3, 1000)
    c = classify(m, build_table(m))
    assert len(c.competitive) == 2
    tr = run_experiment(m, ExperimentConfig(T=50_000, runs=100, base_seed=0))
    a, b = tr["cucb"].mean_regret[-1], tr["ucb1"].mean_regret[-1]
    assert abs(a - b) <= 0.25 * b


def brute_pseudo(m, ell, k, r):
    return max(m.rewards[ell, j] for j in range(m.n_outcomes) if abs(m.rewards[k, j] - r) <= 1e-9)


@criterion(6)
def test_c6_oracle_equivalence():
    rng = np.random.default_rng(2024)
    for _ in range(200):
        pmf, g = random_model_args(rng, max_k=5, max_j=30)
        m = build_discrete(np.arange(g.shape[1], dtype=float)[:, None], pmf, g)
        table = build_table(m)
        K, J = m.n_arms, m.n_outcomes
        brute = np.empty((K, K, J))
        for ell in range(K):
            for k in range(K):
                for j in range(J):
                    r = g[k, j]
                    brute[ell, k, j] = brute_pseudo(m, ell, k, r)
                    assert abs(pseudo_reward(table, ell, k, r) - brute[ell, k, j]) <= 1e-12
        phi_brute = brute @ m.pmf
        phi = expected_pseudo_matrix(m, table)
        assert np.max(np.abs(phi - phi_brute)) <= 1e-12
        assert np.all(phi >= m.means[:, None] - 1e-12)
        try:
            c = classify(m, table)
        except NonUniqueOptimum:
            continue
        want = m.means[c.k_star] - phi_brute[:, c.k_star]
        want[c.k_star] = 0.0
        assert np.max(np.abs(c.pseudo_gaps[:, c.k_star] - want)) <= 1e-12


@criterion(7)
def test_c7_competitive_bound_value():
    p = BoundParams(1, 1, 1.0, np.array([1.0]), 1.0, np.array([0.0]))
    assert abs(bound_competitive(p, 0) - (1 + math.pi**2 / 3 + math.exp(-0.5))) <= 1e-9


@criterion(7)
def test_c7_total_constant_in_T_without_competitive_arms():
    m = example2()
    c = classify(m, build_table(m))
    assert c.competitive == ()
    p = BoundParams.from_classification(c, 10**5)
    diff = bound_total(c, p.with_T(10**6)) - bound_total(c, p)
    assert abs(diff) < 1e-6, f"difference {diff:.3e} with t0={p.t0:g}"


@criterion(8)
def test_c8_alternate_instance():
    rng = np.random.default_rng(77)
    built = 0
    for _ in range(300):
        pmf, g = random_model_args(rng)
        m = build_discrete(np.arange(g.shape[1], dtype=float)[:, None], pmf, g)
        table = build_table(m)
        try:
            c = classify(m, table)
        except NonUniqueOptimum:
            continue
        for k in c.competitive:
            if c.pseudo_gaps[k, c.k_star] == 0:
                # a zero pseudo-gap caps E_tilde[g_k] at mu_{k*}; no strict improvement exists
                with pytest.raises(NoFeasibleEpsilon):
                    build_alternate(m, table, k, classification=c)
                continue
            alt = build_alternate(m, table, k, classification=c)
            before = pushforward(m, m.pmf, c.k_star, table)
            after = pushforward(m, alt.pmf_tilde, c.k_star, table)
            assert np.max(np.abs(before - after)) <= 1e-12
            assert alt.mean_tilde > m.means[c.k_star]
            built += 1
    assert built > 50


@criterion(8)
def test_c8_invertible_best_arm():
    rng = np.random.default_rng(78)
    for _ in range(50):
        J, K = int(rng.integers(2, 10)), int(rng.integers(2, 5))
        g = rng.integers(0, 4, size=(K, J)) * 0.5
        g[0] = rng.permutation(J) + 10.0
        m = build_discrete(np.arange(J, dtype=float)[:, None], rng.random(J) + 0.01, g)
        table = build_table(m)
        for k in range(1, K):
            with pytest.raises(NoFeasibleEpsilon):
                build_alternate(m, table, k)


@criterion(9)
def test_c9_cli_byte_identical(tmp_path, capsys):
    outs = [tmp_path / "a.csv", tmp_path / "b.csv"]
    for out in outs:
        code = main(["simulate", "--scenario", "vector-case1", "--T", "3000", "--runs", "20",
                     "--seed", "7", "--out", str(out)])
        assert code == 0
    capsys.readouterr()
    assert outs[0].read_bytes() == outs[1].read_bytes()


@criterion(9)
def test_c9_common_outcomes():
    tr = run_experiment(vector_case1(), ExperimentConfig(T=3000, runs=20, base_seed=7),
                        keep_outcomes=True)
    assert np.array_equal(tr["ucb1"].consumed, tr["cucb"].consumed)
