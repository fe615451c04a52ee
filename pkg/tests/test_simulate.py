import csv
import itertools
import math

import numpy as np
import pytest
from scipy import stats

from dofinetti.core import Dag, marginalize
from dofinetti.discover import ci_test
from dofinetti.estimate import fit_joint
from dofinetti.oracle import dirichlet_block_table
from dofinetti.simulate import (
    BetaPrior,
    UrnState,
    make_rng,
    polya_joint_log_prob,
    polya_urn_run,
    polya_urn_sample,
    sample_icm_bivariate,
    sample_icm_general,
)

from oracles import urn_sequence_prob

PRIOR = BetaPrior(1, 3)


class TestBivariateSampler:
    def test_prior_mean_frequency(self):
        ds = sample_icm_bivariate("X->Y", PRIOR, 100_000, 1, seed=11)
        freq = ds.values[:, 0, 0].mean()
        assert abs(freq - 0.25) < 3 * math.sqrt(0.25 * 0.75 / 100_000)

    def test_golden_conditional(self):
        ds = sample_icm_bivariate("X->Y", PRIOR, 100_000, 2, seed=12)
        x1, y1, x2, y2 = ds.values[:, 0, 0], ds.values[:, 0, 1], ds.values[:, 1, 0], ds.values[:, 1, 1]
        sel = (x1 == 0) & (x2 == 0) & (y2 == 0)
        p = (y1[sel] == 0).mean()
        assert abs(p - 0.8) < 3 * math.sqrt(0.8 * 0.2 / sel.sum())

    def test_independent_graph_uncorrelated(self):
        n = 100_000
        ds = sample_icm_bivariate("X|Y", PRIOR, n, 1, seed=13)
        r = np.corrcoef(ds.values[:, 0, 0], ds.values[:, 0, 1])[0, 1]
        assert abs(r) < 3 / math.sqrt(n)

    @pytest.mark.parametrize("graph", ["X->Y", "Y->X", "X|Y"])
    def test_deterministic(self, graph):
        a = sample_icm_bivariate(graph, PRIOR, 50, 3, seed=(1, 2))
        b = sample_icm_bivariate(graph, PRIOR, 50, 3, seed=(1, 2))
        assert a == b
        assert a != sample_icm_bivariate(graph, PRIOR, 50, 3, seed=(1, 3))

    def test_rejects_non_bivariate(self):
        with pytest.raises(ValueError):
            sample_icm_bivariate(Dag(3, frozenset()), PRIOR, 10, 2, seed=0)

    def test_d_separation_pattern(self):
        ds = sample_icm_bivariate("X->Y", PRIOR, 10_000, 2, seed=14)
        assert ci_test(ds, (1, 0), (0, 1), [(0, 0)]).p_value > 0.01
        assert ci_test(ds, (0, 0), (1, 1), [(1, 0)]).p_value < 0.01

    def test_position_permutation_invariant_in_distribution(self):
        # histograms of the block under swapped positions come from the same distribution
        a = sample_icm_bivariate("X->Y", PRIOR, 10_000, 2, seed=15)
        b = sample_icm_bivariate("X->Y", PRIOR, 10_000, 2, seed=16).permute_positions([1, 0])
        ca = fit_joint(a).probs.ravel() * a.num_envs
        cb = fit_joint(b).probs.ravel() * b.num_envs
        keep = (ca + cb) > 0
        _, p, _, _ = stats.chi2_contingency(np.stack([ca[keep], cb[keep]]))
        assert p > 0.001


class TestGeneralSampler:
    def test_concentrated_prior_is_fair(self):
        ds = sample_icm_general(Dag(1), [2], 1e6, num_envs=5, num_positions=4000, seed=0)
        freqs = ds.values[:, :, 0].mean(axis=1)
        np.testing.assert_allclose(freqs, 0.5, atol=4 * 0.5 / math.sqrt(4000))

    def test_cross_position_dependence_detected(self):
        # symmetric Dirichlet rows average to uniform, so Y1 and X2 are exactly
        # independent; the shared mechanism shows up between Y1 and Y2 instead
        chain = Dag(2, frozenset({(0, 1)}))
        exact = marginalize(dirichlet_block_table(chain, [2, 2], 1.0, 2), [(1, 0), (0, 1)])
        np.testing.assert_allclose(exact.probs, 0.25, atol=1e-12)
        ds = sample_icm_general(chain, [2, 2], 1.0, num_envs=5000, num_positions=2, seed=1)
        assert ci_test(ds, (1, 0), (1, 1), [(0, 0), (0, 1)]).p_value < 0.01

    def test_matches_exact_table(self):
        chain = Dag(3, frozenset({(0, 1), (1, 2)}))
        ds = sample_icm_general(chain, [2, 3, 2], 0.7, num_envs=20_000, num_positions=2, seed=2)
        exact = dirichlet_block_table(chain, [2, 3, 2], 0.7, 2).probs.ravel()
        counts = fit_joint(ds).probs.ravel() * ds.num_envs
        keep = exact * ds.num_envs >= 5
        expected = exact[keep] * ds.num_envs
        rest_obs = ds.num_envs - counts[keep].sum()
        rest_exp = ds.num_envs - expected.sum()
        _, p = stats.chisquare(np.append(counts[keep], rest_obs), np.append(expected, rest_exp))
        assert p > 0.001

    def test_deterministic(self):
        g = Dag(3, frozenset({(0, 1), (1, 2)}))
        a = sample_icm_general(g, [2, 3, 2], 1.0, 100, 3, seed=7)
        b = sample_icm_general(g, [2, 3, 2], 1.0, 100, 3, seed=7)
        assert a == b
        assert a.values[:, :, 1].max() == 2

    def test_bad_cardinality(self):
        with pytest.raises(ValueError):
            sample_icm_general(Dag(2), [2, 1], 1.0, 10, 2, seed=0)


class TestUrn:
    def test_first_draw_symmetric(self):
        xs, _ = polya_urn_sample(BetaPrior(1, 1), 1, 100_000, seed=0)
        assert abs(xs.mean() - 0.5) < 3 * math.sqrt(0.25 / 100_000)

    def test_state_counts(self):
        prior = BetaPrior(2, 3)
        trace = polya_urn_run(prior, 25, {4: 1, 9: 0}, seed=3)
        for k, s in enumerate(trace.states):
            assert s.step == k
            assert s.left_total == s.right_total == 5 + k
        assert trace.xs[4] == 1 and trace.xs[9] == 0
        np.testing.assert_array_equal(trace.zs, (1 - trace.xs) * trace.ys + (1 - trace.ys) * trace.xs)

    def test_initial_state_convention(self):
        s = UrnState.initial(BetaPrior(2, 5))
        assert (s.left_black, s.left_white, s.right_black, s.right_white) == (2, 5, 2, 5)

    def test_non_integer_prior_rejected(self):
        with pytest.raises(ValueError):
            polya_urn_run(BetaPrior(1.5, 1), 3)

    def test_intervention_position_checked(self):
        with pytest.raises(ValueError):
            polya_urn_run(BetaPrior(1, 1), 3, {3: 0})

    def test_trace_csv(self, tmp_path):
        trace = polya_urn_run(BetaPrior(1, 1), 5, {2: 0}, seed=1)
        path = tmp_path / "trace.csv"
        trace.to_csv(path)
        rows = list(csv.DictReader(open(path)))
        assert list(rows[0]) == ["step", "x", "y", "z", "intervened",
                                 "left_black", "left_white", "right_black", "right_white"]
        assert [r["intervened"] for r in rows] == ["0", "0", "1", "0", "0"]
        assert rows[2]["x"] == "0"
        assert int(rows[-1]["left_black"]) + int(rows[-1]["left_white"]) == 2 + 5

    def test_single_run_matches_batch_distribution(self):
        # the traced single-run path and the batched path implement the same dynamics
        prior = BetaPrior(1, 2)
        runs = 4000
        counts = {}
        for s in range(runs):
            t = polya_urn_run(prior, 2, seed=(99, s))
            key = (tuple(t.xs), tuple(t.ys))
            counts[key] = counts.get(key, 0) + 1
        for key, c in counts.items():
            p = urn_sequence_prob(key[0], key[1], 1, 2)
            assert abs(c / runs - p) < 4 * math.sqrt(p * (1 - p) / runs)


class TestJointLogProb:
    def test_single_draw(self):
        # P(x=1) P(right ball says z=0) with one ball of each colour
        assert math.isclose(math.exp(polya_joint_log_prob([1], [1], BetaPrior(1, 1))), 0.25, abs_tol=1e-15)

    @pytest.mark.parametrize("a,b", [(1, 1), (1, 3), (2, 5)])
    def test_matches_step_through_oracle(self, a, b):
        for n in range(1, 5):
            for seq in itertools.product([(0, 0), (0, 1), (1, 0), (1, 1)], repeat=n):
                xs, ys = zip(*seq)
                got = math.exp(polya_joint_log_prob(xs, ys, BetaPrior(a, b)))
                assert math.isclose(got, urn_sequence_prob(xs, ys, a, b), rel_tol=1e-12)

    def test_normalized(self):
        for n in (1, 2, 3):
            total = sum(
                math.exp(polya_joint_log_prob(*zip(*seq), BetaPrior(1, 3)))
                for seq in itertools.product([(0, 0), (0, 1), (1, 0), (1, 1)], repeat=n)
            )
            assert abs(total - 1) < 1e-10

    def test_permutation_invariant(self):
        rng = np.random.default_rng(0)
        xs = rng.integers(0, 2, 30)
        ys = rng.integers(0, 2, 30)
        base = polya_joint_log_prob(xs, ys, BetaPrior(2, 3))
        for _ in range(20):
            perm = rng.permutation(30)
            assert abs(polya_joint_log_prob(xs[perm], ys[perm], BetaPrior(2, 3)) - base) < 1e-12

    def test_long_sequences_finite(self):
        xs = np.ones(10_000, dtype=int)
        assert np.isfinite(polya_joint_log_prob(xs, xs, BetaPrior(3, 4)))

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            polya_joint_log_prob([0, 1], [1], BetaPrior(1, 1))


def test_make_rng_named_streams():
    a = make_rng((5, 1, 2)).random(3)
    b = make_rng((5, 1, 2)).random(3)
    c = make_rng((5, 2, 1)).random(3)
    np.testing.assert_array_equal(a, b)
    assert not np.allclose(a, c)
