import json
import math

import numpy as np
import pytest

from crwpath import NotAProbabilityState, SimConfig, WalkerState, basis_state, homogeneous, step
from crwpath.model import CoinFamily, CoinParams, PathCRWModel
from crwpath.simulate import (
    empirical_distribution,
    evolve_dense,
    evolve_dense_marginals,
    final_states,
    histogram_csv,
    histogram_json,
    total_variation,
    walker_stream,
)
from crwpath.spectral import limiting_distribution


def stub_model(n, p_L, p_R):
    # bypasses validation so deterministic coins can be used
    coins = tuple(CoinParams(p_L, p_R) for _ in range(n + 1))
    return PathCRWModel(n=n, family=CoinFamily(coins=coins, nu2=p_L - p_R))


class TestStep:
    def test_always_left(self):
        m = stub_model(3, 1.0, 1.0)
        rng = np.random.default_rng(0)
        # new chirality L moves one vertex left, except at 0 where (0,L) is fixed
        assert step(m, WalkerState(2, "R"), rng) == WalkerState(1, "R")
        assert step(m, WalkerState(0, "L"), rng) == WalkerState(0, "L")

    def test_always_right(self):
        m = stub_model(3, 0.0, 0.0)
        rng = np.random.default_rng(0)
        assert step(m, WalkerState(1, "L"), rng) == WalkerState(2, "L")
        assert step(m, WalkerState(3, "R"), rng) == WalkerState(3, "R")

    def test_rejects_bad_vertex(self, fixture_n1):
        with pytest.raises(ValueError):
            step(fixture_n1, WalkerState(2, "L"), np.random.default_rng(0))

    @pytest.mark.parametrize("j, p", [("L", 0.7), ("R", 0.2)])
    def test_frequency(self, fixture_n2, j, p):
        # from (1, j) the walker reaches (0, R) when it draws L
        rng = np.random.default_rng(11)
        trials = 10**5
        hits = sum(step(fixture_n2, WalkerState(1, j), rng) == WalkerState(0, "R") for _ in range(trials))
        sigma = math.sqrt(trials * p * (1 - p))
        assert abs(hits - trials * p) <= 4 * sigma


class TestBatch:
    def test_t0_point_mass(self, fixture_n2):
        dist = empirical_distribution(fixture_n2, SimConfig(walkers=50, t=0, initial=(1, "R")))
        np.testing.assert_array_equal(dist, [0, 1, 0])

    def test_deterministic(self, fixture_n2):
        cfg = SimConfig(walkers=5000, t=40, seed=9)
        np.testing.assert_array_equal(final_states(fixture_n2, cfg), final_states(fixture_n2, cfg))

    def test_seed_matters(self, fixture_n2):
        a = final_states(fixture_n2, SimConfig(walkers=5000, t=40, seed=1))
        b = final_states(fixture_n2, SimConfig(walkers=5000, t=40, seed=2))
        assert np.any(a != b)

    def test_single_walker_matches_step(self, hetero_n2):
        t = 300
        got = final_states(hetero_n2, SimConfig(walkers=1, t=t, seed=5, initial=(2, "L")))[0]
        rng = walker_stream(5, 0)
        s = WalkerState(2, "L")
        for _ in range(t):
            s = step(hetero_n2, s, rng)
        assert got == s.flat

    def test_walker_count_does_not_change_trajectories(self, hetero_n2):
        few = final_states(hetero_n2, SimConfig(walkers=100, t=2500, seed=3))
        many = final_states(hetero_n2, SimConfig(walkers=5000, t=2500, seed=3))
        np.testing.assert_array_equal(few, many[:100])

    def test_sampled_initial_state(self, fixture_n1):
        phi = np.array([0.0, 0.0, 0.25, 0.75])
        s = final_states(fixture_n1, SimConfig(walkers=20000, t=0, initial=phi))
        assert set(np.unique(s)) <= {2, 3}
        assert abs(np.mean(s == 3) - 0.75) < 0.02

    def test_invalid_initial(self, fixture_n1):
        with pytest.raises(NotAProbabilityState):
            final_states(fixture_n1, SimConfig(walkers=2, t=1, initial=np.array([1.0, 1.0, 0, 0])))
        with pytest.raises(ValueError):
            SimConfig(walkers=0, t=1)

    def test_close_to_limit(self, fixture_n2):
        dist = empirical_distribution(fixture_n2, SimConfig(walkers=20000, t=200, seed=0))
        assert total_variation(dist, limiting_distribution(fixture_n2)) < 0.02


class TestDense:
    def test_long_run_matches_closed_form(self, fixture_n2):
        psi = evolve_dense(fixture_n2, basis_state(2, 0, "L"), 10**4)
        np.testing.assert_allclose(psi.reshape(-1, 2).sum(axis=1), np.array([4, 6, 9]) / 19, atol=1e-9)

    def test_marginal_history(self, fixture_n1):
        hist = evolve_dense_marginals(fixture_n1, basis_state(1, 0, "L"), 3)
        assert hist.shape == (4, 2)
        np.testing.assert_allclose(hist[0], [1, 0])
        # from (0,L): stay with 0.7, otherwise move to (1,L)
        np.testing.assert_allclose(hist[1], [0.7, 0.3])
        np.testing.assert_allclose(hist.sum(axis=1), 1, atol=1e-15)

    def test_requires_probability_state(self, fixture_n1):
        with pytest.raises(NotAProbabilityState):
            evolve_dense(fixture_n1, np.array([1.0, -1.0, 0.5, 0.5]), 3)


class TestOutput:
    def test_csv(self):
        assert histogram_csv([0.25, 0.75]) == "vertex,probability\n0,0.25\n1,0.75\n"

    def test_json(self):
        doc = json.loads(histogram_json(np.array([0.5, 0.5])))
        assert doc == {"vertex": [0, 1], "probability": [0.5, 0.5]}

    def test_tv(self):
        assert total_variation([1, 0], [0, 1]) == 1.0
