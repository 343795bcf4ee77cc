"""Acceptance criteria, one test each, each at its stated tolerance.

Run alone with ``pytest tests/test_acceptance.py``; a PASS/FAIL line per
criterion is printed in the terminal summary.
"""

import json
import math

import numpy as np
import pytest
from click.testing import CliRunner

from crwpath import basis_state, dense_U, homogeneous, marginal, validate_model
from crwpath.cli import main
from crwpath.jacobi import alternating_vector, build_B, build_J, eigs_B, eigs_symmetric_tridiagonal
from crwpath.model import model_to_dict
from crwpath.simulate import SimConfig, empirical_distribution, evolve_dense, total_variation
from crwpath.spectral import (
    build_Q,
    full_decomposition,
    limiting_distribution,
    make_ab,
    power_iteration_limit,
    stationary_weights,
)
from crwpath.verify import random_models, rejection_is_enforced

from conftest import mp_eigvals, record_criterion

pytestmark = pytest.mark.acceptance

SEED = 2024
MC_SEED = 12345


@pytest.fixture(scope="module")
def sweep():
    models, rejected, skipped = random_models(20, n_max=8, seed=SEED)
    return models, rejected, skipped


@pytest.fixture(scope="module")
def decomps(sweep):
    return [full_decomposition(m) for m in sweep[0]]


def fixtures():
    return {
        "n1 (0.7,0.2)": homogeneous(1, 0.7, 0.2),
        "n2 (0.7,0.2)": homogeneous(2, 0.7, 0.2),
        "n2 heterogeneous": validate_model([(0.7, 0.2), (0.6, 0.1), (0.8, 0.3)], 2),
    }


def test_c1_oracle_spectrum(sweep, decomps, tmp_path):
    models, rejected, skipped = sweep
    worst, min_gap, max_imag = 0.0, np.inf, 0.0
    for m, d in zip(models, decomps):
        brute = np.linalg.eigvals(dense_U(m))
        max_imag = max(max_imag, np.abs(brute.imag).max())
        worst = max(worst, np.abs(np.sort(d.mus) - np.sort(brute.real)).max())
        min_gap = min(min_gap, np.diff(np.sort(d.mus)).min())
    per_sign = (sum(m.nu2 > 0 for m in models), sum(m.nu2 < 0 for m in models))
    refused = all(rejection_is_enforced(r) for r in rejected)
    runner = CliRunner()
    codes = []
    for k, r in enumerate(rejected[:10]):
        path = tmp_path / f"rejected{k}.json"
        path.write_text(json.dumps(model_to_dict(r)))
        codes.append(runner.invoke(main, ["spectrum", str(path)]).exit_code)
    ok = (
        per_sign == (20, 20) and skipped == 0 and worst <= 1e-8 and max_imag <= 1e-8
        and min_gap > 1e-10 and refused and len(codes) > 0 and set(codes) == {4}
    )
    record_criterion(
        1, "oracle spectrum", ok,
        f"{per_sign[0]}+{per_sign[1]} models, max |dmu| {worst:.2e}, max imag {max_imag:.2e}, "
        f"min gap {min_gap:.2e}, {len(rejected)} proposals refused, CLI exit codes {sorted(set(codes))}",
    )
    assert ok


def test_c2_fixed_fixture():
    m = homogeneous(1, 0.7, 0.2)
    mus = np.sort(full_decomposition(m).mus)
    expected = np.sort([1.0, math.sqrt(0.5), 0.5, -math.sqrt(0.5)])
    brute = np.sort(np.linalg.eigvals(dense_U(m)).real)
    spec_err = max(np.abs(mus - expected).max(), np.abs(brute - expected).max())
    p_inf = limiting_distribution(m)
    iterated, _ = power_iteration_limit(m)
    lim_err = max(np.abs(p_inf - [0.4, 0.6]).max(), np.abs(iterated - [0.4, 0.6]).max())
    ok = spec_err <= 1e-10 and lim_err <= 1e-12
    record_criterion(2, "fixed fixture", ok, f"spectrum error {spec_err:.2e}, limit error {lim_err:.2e}")
    assert ok


def test_c3_isospectrality(sweep):
    worst_iso, worst_minus, worst_alt, min_gap, in_range = 0.0, 0.0, 0.0, np.inf, True
    for m in sweep[0]:
        B = build_B(m)
        lam_J, _ = eigs_symmetric_tridiagonal(build_J(B))
        worst_iso = max(worst_iso, np.abs(lam_J - mp_eigvals(B.dense())).max())
        lams = np.array([e.lam for e in eigs_B(m)])
        min_gap = min(min_gap, (-np.diff(lams)).min())
        in_range &= bool(lams.max() <= 1 and lams.min() >= -1 - 1e-10)
        worst_minus = max(worst_minus, abs(lams[-1] + 1))
        alt = alternating_vector(m.n + 1)
        worst_alt = max(worst_alt, np.abs(B.matvec(alt) + alt).max())
    ok = worst_iso <= 1e-9 and min_gap > 0 and in_range and worst_minus <= 1e-10 and worst_alt <= 1e-12
    record_criterion(
        3, "isospectrality and simplicity", ok,
        f"max |Spec B - Spec J| {worst_iso:.2e}, min gap {min_gap:.2e}, |lambda_min + 1| {worst_minus:.2e}, "
        f"alternating residual {worst_alt:.2e}",
    )
    assert ok


def test_c4_reconstruction(sweep, decomps):
    worst = max(np.abs(dense_U(m) - d.reconstruct()).max() for m, d in zip(sweep[0], decomps))
    ok = worst <= 1e-8
    record_criterion(4, "reconstruction", ok, f"max entry error {worst:.2e} over {len(decomps)} models")
    assert ok


def test_c5_limit_triple_agreement(sweep):
    dense_err, tvs = 0.0, []
    models = [*fixtures().values(), *sweep[0]]
    for m in models:
        p_inf = limiting_distribution(m)
        phi = basis_state(m.n, 0, "L")
        dense_err = max(dense_err, np.abs(marginal(evolve_dense(m, phi, 10**4)) - p_inf).max())
    for m in fixtures().values():
        p_inf = limiting_distribution(m)
        emp = empirical_distribution(m, SimConfig(walkers=10**5, t=10**3, seed=MC_SEED))
        tvs.append(total_variation(emp, p_inf))
    ok = dense_err <= 1e-8 and max(tvs) <= 0.015
    record_criterion(
        5, "limit triple agreement", ok,
        f"closed form vs dense t=1e4 {dense_err:.2e} over {len(models)} models, Monte Carlo TV {', '.join(f'{v:.2e}' for v in tvs)}",
    )
    assert ok


def test_c6_structural_identities(sweep, decomps):
    perm_ok, col_U, col_Q, balance, annihil, quad, roots = True, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0
    for m, d in zip(sweep[0], decomps):
        perm = m.shift_permutation
        perm_ok &= bool(np.array_equal(perm[perm], np.arange(m.dim)))
        col_U = max(col_U, np.abs(dense_U(m).sum(axis=0) - 1).max())
        Q = build_Q(m)
        col_Q = max(col_Q, np.abs(Q.sum(axis=0) - 1).max())
        v0 = stationary_weights(m)
        flux = Q * v0[None, :]
        balance = max(balance, np.abs(flux - flux.T).max())
        annihil = max(annihil, max(abs(p.u.sum()) for p in d.pairs if p.tag != "stationary"))
        lams = d.lambdas
        for p in d.pairs:
            if p.tag in ("plus", "minus"):
                lam = lams[abs(p.source_index) - 1]
                quad = max(quad, abs(p.mu**2 - (1 - m.nu2) * lam * p.mu - m.nu2))
        plus, minus = d.by_tag("plus"), d.by_tag("minus")
        for pp, pm in zip(plus, minus):
            lam = lams[pp.source_index - 1]
            roots = max(roots, abs(pp.mu + pm.mu - (1 - m.nu2) * lam), abs(pp.mu * pm.mu + m.nu2))
    ok = perm_ok and max(col_U, col_Q, balance, quad, roots) <= 1e-12 and annihil <= 1e-10
    record_criterion(
        6, "structural identities", ok,
        f"S^2 = I {perm_ok}, column sums U {col_U:.2e} Q {col_Q:.2e}, detailed balance {balance:.2e}, "
        f"annihilation {annihil:.2e}, quadratic {quad:.2e}, root relations {roots:.2e}",
    )
    assert ok


def test_c7_dependence_dichotomy(sweep):
    dep_min, indep_max, count = 1.0, 0.0, 0
    for m in sweep[0]:
        for e in eigs_B(m):
            ov = abs(make_ab(m, e).overlap)
            count += 1
            if abs(e.lam + 1) <= 1e-10:
                dep_min = min(dep_min, ov)
            else:
                indep_max = max(indep_max, ov)
    ok = dep_min >= 1 - 1e-10 and indep_max < 1 - 1e-6
    record_criterion(
        7, "a,b dependence dichotomy", ok,
        f"{count} eigenpairs, min |<a,b>| at -1 is 1 - {1 - dep_min:.2e}, max elsewhere {indep_max:.6f}",
    )
    assert ok


def test_c8_monotonicity(sweep, decomps):
    worst_step, checked = np.inf, 0
    for m, d in zip(sweep[0], decomps):
        if m.nu2 <= 0:
            continue
        for tag in ("plus", "minus"):
            pairs = sorted(d.by_tag(tag), key=lambda p: p.source_index if tag == "plus" else -p.source_index)
            mus = np.array([p.mu for p in pairs])
            if mus.size > 1:
                worst_step = min(worst_step, (-np.diff(mus)).min())
        checked += 1
    ok = checked == 20 and worst_step > 0
    record_criterion(8, "monotonicity", ok, f"{checked} models with nu2 > 0, smallest decrease {worst_step:.2e}")
    assert ok


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q"]))
