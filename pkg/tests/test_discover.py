import math

import numpy as np
import pytest
from scipy import stats

from dofinetti.core import BIVARIATE_GRAPHS, ExchangeableDataset
from dofinetti.discover import (
    InsufficientData,
    ci_test,
    discover_bivariate,
    discover_bivariate_iid_baseline,
    discover_bivariate_report,
    g_test,
)
from dofinetti.simulate import BetaPrior, make_rng, sample_icm_bivariate

PRIOR = BetaPrior(1, 3)


class TestGTest:
    def test_matches_scipy_likelihood_ratio(self):
        rng = np.random.default_rng(0)
        a = rng.integers(0, 3, 400)
        b = (a + rng.integers(0, 2, 400)) % 3
        table = np.zeros((3, 3))
        np.add.at(table, (a, b), 1)
        ref_stat, ref_p, ref_dof, _ = stats.chi2_contingency(table, lambda_="log-likelihood", correction=False)
        r = g_test(a, b)
        assert abs(r.statistic - ref_stat) < 1e-9
        assert r.degrees_of_freedom == ref_dof == 4
        assert abs(r.p_value - ref_p) < 1e-12

    def test_conditional_dof(self):
        rng = np.random.default_rng(1)
        cols = rng.integers(0, 2, (4, 100))
        r = g_test(cols[0], cols[1], [cols[2], cols[3]])
        assert r.degrees_of_freedom == 4

    def test_null_calibration(self):
        # two independent fair coins per environment, 10^4 environments
        ps = []
        for s in range(200):
            coins = make_rng((2, s)).integers(0, 2, (10_000, 1, 2))
            ps.append(ci_test(ExchangeableDataset(coins, (2, 2)), (0, 0), (1, 0)).p_value)
        assert stats.kstest(ps, "uniform").pvalue > 0.001

    def test_strict_small_sample(self):
        with pytest.raises(InsufficientData):
            g_test(np.array([0, 1, 0]), np.array([1, 0, 0]), strict=True)


class TestIcmIndependencies:
    def test_one_sided_tests(self):
        # the true direction's independence holds, the reverse one is rejected
        accept = reject = 0
        seeds = range(60)
        for s in seeds:
            ds = sample_icm_bivariate("X->Y", PRIOR, 10_000, 2, seed=(3, s))
            accept += ci_test(ds, (1, 0), (0, 1), [(0, 0)]).p_value > 0.01
            reject += ci_test(ds, (0, 0), (1, 1), [(1, 0)]).p_value < 0.01
        assert accept >= 0.95 * len(seeds)
        assert reject >= 0.95 * len(seeds)

    def test_axes_must_differ(self):
        ds = sample_icm_bivariate("X->Y", PRIOR, 10, 2, seed=0)
        with pytest.raises(ValueError):
            ci_test(ds, (0, 0), (0, 0))


class TestBivariateDiscovery:
    @pytest.mark.parametrize("graph,floor", [("X->Y", 0.95), ("Y->X", 0.95), ("X|Y", 0.90)])
    def test_identification_rate(self, graph, floor):
        n = 60
        hits = sum(discover_bivariate(sample_icm_bivariate(graph, PRIOR, 5000, 2, seed=(4, s))) == BIVARIATE_GRAPHS[graph]
                   for s in range(n))
        assert hits / n >= floor

    def test_swap_equivariance(self):
        for s in range(10):
            ds = sample_icm_bivariate("X->Y", PRIOR, 2000, 2, seed=(5, s))
            a = discover_bivariate_report(ds)
            b = discover_bivariate_report(ds.swap_vars([1, 0]))
            assert a.p_independent == pytest.approx(b.p_independent, abs=1e-12)
            assert a.p_forward == pytest.approx(b.p_backward, abs=1e-12)
            if a.p_independent <= 0.05 and a.p_forward != a.p_backward:
                assert {str(a.graph), str(b.graph)} == {"X->Y", "Y->X"}

    @pytest.mark.parametrize("graph", list(BIVARIATE_GRAPHS))
    def test_consistency_as_environments_grow(self, graph):
        n = 40
        rates = []
        for E in (1_000, 10_000, 100_000):
            hits = sum(discover_bivariate(sample_icm_bivariate(graph, PRIOR, E, 2, seed=(6, E, s))) == BIVARIATE_GRAPHS[graph]
                       for s in range(n))
            rates.append(hits / n)
        for a, b in zip(rates, rates[1:]):
            # non-decreasing up to two Monte-Carlo standard errors of the difference
            mc = max(math.sqrt((a * (1 - a) + b * (1 - b)) / n), 1 / n)
            assert b >= a - 2 * mc

    def test_strict_mode_raises_on_tiny_data(self):
        ds = sample_icm_bivariate("X->Y", PRIOR, 8, 2, seed=7)
        with pytest.raises(InsufficientData):
            discover_bivariate_report(ds, strict=True)

    def test_needs_two_positions(self):
        with pytest.raises(ValueError):
            discover_bivariate(sample_icm_bivariate("X->Y", PRIOR, 10, 1, seed=0))

    def test_report_text(self):
        r = discover_bivariate_report(sample_icm_bivariate("X->Y", PRIOR, 500, 2, seed=8))
        lines = r.to_text().splitlines()
        assert lines[0] == f"graph = '{r.graph}'"
        assert [ln.split(" = ")[0] for ln in lines] == ["graph", "significance", "p_independent", "p_forward", "p_backward"]

    def test_tie_goes_forward(self):
        # X and Y copied from one bit: every test degenerates the same way
        bits = make_rng(9).integers(0, 2, (200, 2))
        values = np.stack([bits, bits], axis=-1)
        ds = ExchangeableDataset(values, (2, 2))
        r = discover_bivariate_report(ds)
        assert r.p_forward == r.p_backward
        assert str(r.graph) == "X->Y"


class TestIidBaseline:
    def test_orientation_is_a_coin_flip(self):
        n = 400
        oriented = correct = 0
        for s in range(n):
            graph = "X->Y" if s % 2 else "Y->X"
            g = discover_bivariate_iid_baseline(sample_icm_bivariate(graph, PRIOR, 500, 2, seed=(10, s)), seed=(11, s))
            if str(g) != "X|Y":
                oriented += 1
                correct += str(g) == graph
        assert oriented >= 0.9 * n
        assert abs(correct / oriented - 0.5) < 4 * 0.5 / np.sqrt(oriented)

    def test_deterministic(self):
        ds = sample_icm_bivariate("X->Y", PRIOR, 300, 2, seed=12)
        assert all(discover_bivariate_iid_baseline(ds, seed=5) == discover_bivariate_iid_baseline(ds, seed=5)
                   for _ in range(5))

    def test_independent_data(self):
        n = 400
        hits = sum(str(discover_bivariate_iid_baseline(sample_icm_bivariate("X|Y", PRIOR, 5000, 2, seed=(13, s)), seed=s)) == "X|Y"
                   for s in range(n))
        assert hits >= 0.90 * n
