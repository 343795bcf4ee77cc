import numpy as np
import pytest

from crwpath import homogeneous
from crwpath.jacobi import eigs_B
from crwpath.spectral import check_assumption2
from crwpath.verify import check_model, propose_model, random_model, random_models, rejection_is_enforced, verify_models


class TestGenerator:
    @pytest.mark.parametrize("sign", [1, -1])
    @pytest.mark.parametrize("dimerized", [False, True])
    def test_proposals_valid(self, sign, dimerized):
        rng = np.random.default_rng(0)
        for _ in range(200):
            m = propose_model(rng, int(rng.integers(1, 9)), sign, dimerized)
            assert 0.05 <= sign * m.nu2 <= 0.95
            lo, hi = max(0.0, -m.nu2) + 0.02, min(1.0, 1.0 - m.nu2) - 0.02
            assert np.all((m.p_R >= lo) & (m.p_R <= hi))

    def test_negative_models_pass_condition(self):
        rng = np.random.default_rng(1)
        for n in (1, 4, 8):
            model, rejected = random_model(rng, n, -1)
            assert model is not None and model.nu2 < 0
            assert check_assumption2([e.lam for e in eigs_B(model)], model.nu2).passed
            assert all(rejection_is_enforced(r) for r in rejected)

    def test_gives_up(self):
        model, rejected = random_model(np.random.default_rng(2), 8, -1, max_retries=1)
        assert model is None and len(rejected) == 1

    def test_counts_and_reproducibility(self):
        a, _, skipped = random_models(3, n_max=4, seed=5)
        b, _, _ = random_models(3, n_max=4, seed=5)
        assert skipped == 0 and len(a) == 6
        assert [m.family for m in a] == [m.family for m in b]
        assert sum(m.nu2 > 0 for m in a) == 3


class TestSuite:
    def test_random_sweep(self, random_sweep):
        summary = verify_models(random_sweep)
        assert summary["failed_checks"] == []
        assert summary["passed"]

    def test_monte_carlo_check(self, fixture_n1):
        checks = {c.name: c for c in check_model(fixture_n1, monte_carlo=True, seed=3)}
        assert checks["monte_carlo_vs_dense_tv_t1e3"].passed
        assert all(c.passed for c in checks.values())

    def test_monotone_checks_only_for_positive_nu2(self, random_sweep):
        for m in random_sweep:
            names = {c.name for c in check_model(m, long_time=False)}
            assert ("monotone_mu_plus" in names) == (m.nu2 > 0)

    def test_rejection(self):
        assert rejection_is_enforced(homogeneous(1, 0.1, 0.35))
        assert not rejection_is_enforced(homogeneous(1, 0.7, 0.2))
