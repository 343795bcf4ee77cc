"""Invariant suite and random model generation.

:func:`check_model` runs every structural and spectral identity the package
relies on against a single model and returns itemized results; the CLI's
``verify`` command and the acceptance tests are thin loops over it.
Brute-force references (``numpy.linalg.eigvals`` of the dense operator,
dense iteration) are kept separate from the code paths they check.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from . import jacobi, spectral
from .errors import AssumptionViolated, CRWError
from .model import PathCRWModel, apply_U, basis_state, dense_U, marginal, validate_model
from .simulate import SimConfig, empirical_distribution, evolve_dense, total_variation

MAX_RETRIES = 2000


@dataclass
class CheckResult:
    name: str
    passed: bool
    value: float | None = None
    tol: float | None = None
    detail: str = ""

    def to_dict(self) -> dict:
        return asdict(self)


def propose_model(rng: np.random.Generator, n: int, sign: int, dimerized: bool = False) -> PathCRWModel:
    """Draw a strictly valid isospectral model.

    ``nu2`` is uniform on ``(0.05, 0.95)`` with the requested sign. Every
    ``p_R`` lies in ``(max(0, -nu2) + 0.02, min(1, 1 - nu2) - 0.02)`` and
    ``p_L = nu2 + p_R``. By default ``p_R`` is uniform on that interval;
    ``dimerized`` alternates draws from its top and bottom 15%.
    """
    nu2 = sign * rng.uniform(0.05, 0.95)
    lo = max(0.0, -nu2) + 0.02
    hi = min(1.0, 1.0 - nu2) - 0.02
    if dimerized:
        width = hi - lo
        top = (np.arange(n + 1) + rng.integers(2)) % 2 == 0
        p_R = np.where(
            top,
            rng.uniform(hi - 0.15 * width, hi, n + 1),
            rng.uniform(lo, lo + 0.15 * width, n + 1),
        )
    else:
        p_R = rng.uniform(lo, hi, n + 1)
    return validate_model(list(zip(nu2 + p_R, p_R)), n)


def random_model(rng: np.random.Generator, n: int, sign: int, max_retries: int = MAX_RETRIES):
    """A valid model whose spectrum is real.

    For ``sign < 0`` proposals are redrawn until the real-spectrum condition
    on the Jacobi eigenvalues holds; odd-numbered attempts use a dimerized
    coin profile, which satisfies it far more often than uniform draws.
    Returns ``(model, rejected)`` where ``rejected`` lists the models that
    failed, or ``(None, rejected)`` after ``max_retries`` attempts.
    """
    rejected = []
    for attempt in range(max_retries):
        model = propose_model(rng, n, sign, dimerized=sign < 0 and attempt % 2 == 1)
        if sign > 0:
            return model, rejected
        lams = [e.lam for e in jacobi.eigs_B(model)]
        if spectral.check_assumption2(lams, model.nu2).passed:
            return model, rejected
        rejected.append(model)
    return None, rejected


def random_models(count: int, n_max: int = 8, seed: int = 0):
    """``count`` models per sign of ``nu2`` with ``n`` uniform on ``1..n_max``.

    Returns ``(models, rejected, skipped)``: ``skipped`` counts requested
    models for which no admissible draw was found.
    """
    rng = np.random.default_rng(seed)
    models, rejected, skipped = [], [], 0
    for sign in (1, -1):
        for _ in range(count):
            n = int(rng.integers(1, n_max + 1))
            model, bad = random_model(rng, n, sign)
            rejected += bad
            if model is None:
                skipped += 1
            else:
                models.append(model)
    return models, rejected, skipped


class _Suite:
    def __init__(self):
        self.results: list[CheckResult] = []

    def bound(self, name, value, tol, detail=""):
        value = float(value)
        self.results.append(CheckResult(name, bool(value <= tol), value, tol, detail))

    def flag(self, name, ok, detail=""):
        self.results.append(CheckResult(name, bool(ok), detail=detail))


def check_model(
    model: PathCRWModel,
    B: jacobi.TridiagonalB | None = None,
    long_time: bool = True,
    monte_carlo: bool = False,
    seed: int = 0,
) -> list[CheckResult]:
    """Run the invariant suite on ``model``.

    Parameters
    ----------
    B : TridiagonalB, optional
        Use this matrix instead of the one built from the coins. Lets tests
        feed a corrupted ``B`` and watch the downstream checks fail.
    long_time : bool
        Include the ``t = 10**4`` dense-vs-spectral and ``t = 10**6`` limit checks.
    monte_carlo : bool
        Include the ``10**5``-walker simulation at ``t = 10**3``.
    """
    s = _Suite()
    n, nu2 = model.n, model.nu2
    dim = model.dim
    U = dense_U(model)
    eye = np.eye(dim)

    # operator structure
    perm = model.shift_permutation
    s.flag("shift_involution", np.array_equal(perm[perm], np.arange(dim)))
    s.bound("U_column_sums", np.abs(U.sum(axis=0) - 1.0).max(), 1e-12)
    s.flag("U_entries_in_unit_interval", U.min() >= 0.0 and U.max() <= 1.0)
    s.bound("apply_U_matches_dense", np.abs(apply_U(model, eye) - U).max(), 0.0)
    probe = np.random.default_rng(seed).uniform(-1, 1, dim)
    s.bound("U_preserves_entry_sum", abs(apply_U(model, probe).sum() - probe.sum()), 1e-12)

    # coins and Jacobi matrix
    data = jacobi.coin_spectral_data(model.family)
    mats = model.coin_matrices()
    s.bound("coin_q_difference", max(abs(d.q_L - d.q_R - math.sqrt(2)) for d in data), 1e-12)
    s.bound("coin_reconstruction", max(np.abs(d.reconstruct() - c).max() for d, c in zip(data, mats)), 1e-12)
    s.bound(
        "coin_biorthogonality",
        max(max(abs(d.q2 @ d.w2 - 1.0), abs(d.q2 @ d.w1)) for d in data),
        1e-12,
    )
    s.bound("coin_fixed_vector", max(np.abs(c @ d.w1 - d.w1).max() for d, c in zip(data, mats)), 1e-12)

    built = jacobi.build_B(model)
    Bt = B if B is not None else built
    Bm = Bt.dense()
    rows = Bm.sum(axis=1)[1:-1]
    s.bound("B_interior_row_sums", np.abs(rows - 1.0).max() if rows.size else 0.0, 1e-12)

    W = np.zeros((dim, n + 1))
    Qrows = np.zeros((n + 1, dim))
    for x, d in enumerate(data):
        W[2 * x : 2 * x + 2, x] = d.w2
        Qrows[x, 2 * x : 2 * x + 2] = -d.q2
    s.bound("B_inner_products", np.abs(Qrows @ U @ W - nu2 * Bm).max(), 1e-12)

    try:
        pi = jacobi.build_pi(Bt)
        D = np.sqrt(pi.pi)
        conj = Bm * D[None, :] / D[:, None]
        J = jacobi.build_J(Bt, pi)
        s.flag("pi_positive", bool(np.all(pi.pi > 0)) and abs(pi.pi.sum() - 1.0) <= 1e-12)
        s.bound("pi_symmetrizes_B", np.abs(conj - conj.T).max(), 1e-12)
        s.bound("J_equals_conjugation", np.abs(J.dense() - conj).max(), 1e-12)
        eigB = jacobi.eigs_B(model, B=Bt)
    except CRWError as exc:
        s.flag("jacobi_spectrum", False, f"{type(exc).__name__}: {exc}")
        return s.results

    lams = np.array([e.lam for e in eigB])
    brute = np.sort(np.linalg.eigvals(Bm).real)[::-1]
    s.bound("isospectral_B_J", np.abs(lams - brute).max(), 1e-9)
    s.bound("B_eigen_residuals", max(np.abs(Bm @ e.v - e.lam * e.v).max() for e in eigB), 1e-9 * (n + 1))
    gaps = -np.diff(lams)
    s.flag("B_simple", gaps.min() > 1e-10 if gaps.size else True, f"min gap {gaps.min() if gaps.size else 0:.3g}")
    s.flag("B_spectrum_in_unit_interval", lams.max() <= 1 + 1e-9 and lams.min() >= -1 - 1e-9)
    s.bound("B_min_eigenvalue_minus_one", abs(lams[-1] + 1.0), 1e-10)
    alt = jacobi.alternating_vector(n + 1)
    s.bound("B_alternating_eigenvector", np.abs(Bm @ alt + alt).max(), 1e-12)

    # two-dimensional invariant subspaces
    overlaps, dependent = [], []
    for e in eigB:
        ab = spectral.make_ab(model, e)
        overlaps.append(abs(ab.overlap))
        dependent.append(abs(e.lam + 1.0) <= spectral.LAMBDA_MINUS_ONE_TOL)
    overlaps = np.array(overlaps)
    dependent = np.array(dependent)
    s.flag(
        "ab_dependence_dichotomy",
        np.all(overlaps[dependent] >= 1 - 1e-10) and np.all(overlaps[~dependent] < 1 - 1e-6),
        f"max overlap off -1: {overlaps[~dependent].max() if (~dependent).any() else 0:.12f}",
    )
    inv_err = 0.0
    for e in eigB:
        if abs(e.lam + 1.0) <= spectral.LAMBDA_MINUS_ONE_TOL:
            continue
        ab = spectral.make_ab(model, e)
        inv_err = max(
            inv_err,
            np.abs(U @ ab.a - nu2 * ab.b).max(),
            np.abs(U @ ab.b - ab.a - (1 - nu2) * e.lam * ab.b).max(),
        )
    s.bound("ab_invariant_subspace", inv_err, 1e-10)

    report = spectral.check_assumption2(lams, nu2)
    s.flag("real_spectrum_condition", report.passed, "" if report.passed else f"offending {report.offending}")
    if not report.passed:
        return s.results

    # roots of the eigenvalue map
    quad, vieta = 0.0, 0.0
    mu_plus, mu_minus = [], []
    for lam in lams:
        mp, mm = spectral.mu_pair(lam, nu2)
        mu_plus.append(mp)
        mu_minus.append(mm)
        for mu in (mp, mm):
            quad = max(quad, abs(mu * mu - (1 - nu2) * lam * mu - nu2))
        vieta = max(vieta, abs(mp + mm - (1 - nu2) * lam), abs(mp * mm + nu2))
    s.bound("quadratic_identity", quad, 1e-12)
    s.bound("root_coefficient_relations", vieta, 1e-12)
    if nu2 > 0:
        mp, mm = np.array(mu_plus), np.array(mu_minus)
        s.flag("monotone_mu_plus", bool(np.all(np.diff(mp) < 0)))
        s.flag("monotone_mu_minus", bool(np.all(np.diff(mm) < 0)))
        inner = ~dependent
        s.flag(
            "mu_bands",
            bool(np.all((mp[inner] > -nu2) & (mp[inner] < 1) & (mm[inner] > -1) & (mm[inner] < nu2))),
        )

    # stationary part
    v0 = spectral.stationary_weights(model)
    st = spectral.stationary_pair(model)
    detailed = np.abs(v0[:-1] * (1 - model.p_L[:-1]) - v0[1:] * model.p_R[1:]).max()
    s.bound("detailed_balance", detailed, 1e-12)
    Q = spectral.build_Q(model)
    s.bound("Q_column_sums", np.abs(Q.sum(axis=0) - 1.0).max(), 1e-12)
    s.bound("Q_fixes_v0", np.abs(Q @ v0 - v0).max(), 1e-12)
    s.bound("stationary_residual", np.abs(U @ st.u - st.u).max(), 1e-12)
    s.bound("stationary_sum", abs(st.u.sum() - 1.0), 1e-12)

    # full decomposition
    try:
        decomp = spectral.full_decomposition(model, eigB=eigB, check=B is None)
    except CRWError as exc:
        s.flag("full_decomposition", False, f"{type(exc).__name__}: {exc}")
        s.flag("reconstruction", False, "decomposition unavailable")
        return s.results

    V, Lm, mus = decomp.right, decomp.left, decomp.mus
    s.flag("pair_count", len(decomp.pairs) == dim, f"{len(decomp.pairs)} pairs for dimension {dim}")
    s.bound("reconstruction", np.abs(U - decomp.reconstruct()).max(), 1e-8)
    res = max(np.abs(U @ p.u - p.mu * p.u).max() for p in decomp.pairs)
    s.bound("U_right_residuals", res, 1e-8)
    lres = max(np.abs(p.q @ U - p.mu * p.q).max() for p in decomp.pairs)
    s.bound("U_left_residuals", lres, 1e-8)
    if Lm.shape[0] == V.shape[1]:
        s.bound("biorthogonality", np.abs(Lm @ V - np.eye(V.shape[1])).max(), 1e-8)
    non_st = [p for p in decomp.pairs if p.tag != spectral.STATIONARY]
    s.bound("annihilation", max(abs(p.u.sum()) for p in non_st), 1e-10)
    from_B = [p.mu for p in decomp.pairs if p.tag in (spectral.PLUS, spectral.MINUS)]
    s.flag("mu_not_minus_one", min(abs(mu + 1) for mu in from_B) > 1e-10 if from_B else True)

    oracle = np.linalg.eigvals(U)
    s.bound("oracle_imaginary_parts", np.abs(oracle.imag).max(), 1e-8)
    if mus.size == oracle.size:
        s.bound("oracle_spectrum", np.abs(np.sort(mus) - np.sort(oracle.real)).max(), 1e-8)
    else:
        s.flag("oracle_spectrum", False, f"{mus.size} eigenvalues vs {oracle.size}")
    srt = np.sort(mus)
    s.flag("U_simple", bool(np.diff(srt).min() > 1e-10), f"min gap {np.diff(srt).min():.3g}")
    s.flag("mu_one_once", int(np.sum(np.abs(mus - 1.0) <= 1e-10)) == 1)
    s.flag("spectrum_in_unit_disc", bool(np.abs(mus).max() <= 1 + 1e-12))

    # time evolution and limit
    phi = basis_state(n, min(2, n), "L")
    alpha = spectral.expansion_coefficients(decomp, phi)
    s.bound("alpha0_is_one", abs(alpha[0] - 1.0), 1e-10)
    s.bound("evolve_t0", np.abs(spectral.evolve_spectral(decomp, phi, 0) - phi).max(), 1e-10)
    s.bound("evolve_t1", np.abs(spectral.evolve_spectral(decomp, phi, 1) - U @ phi).max(), 1e-9)
    s.bound(
        "evolve_t50",
        np.abs(spectral.evolve_spectral(decomp, phi, 50) - evolve_dense(model, phi, 50)).max(),
        1e-8,
    )
    p_inf = spectral.limiting_distribution(model, eigB=eigB)
    s.bound("limit_equals_stationary_marginal", np.abs(p_inf - marginal(st.u)).max(), 1e-12)
    if long_time:
        # the limit itself is compared at t = 10**6; at t = 10**4 slowly mixing
        # chains are still measurably away from it, so the two exact paths
        # are compared with each other instead
        dense_t = evolve_dense(model, phi, 10**4)
        spec_t = spectral.evolve_spectral(decomp, phi, 10**4)
        s.bound("dense_vs_spectral_t1e4", np.abs(dense_t - spec_t).max(), 1e-8)
        worst = 0.0
        for other in (basis_state(n, 0, "L"), basis_state(n, n, "R")):
            far = spectral.evolve_spectral(decomp, other, 10**6)
            worst = max(worst, np.abs(far.reshape(-1, 2).sum(axis=1) - p_inf).max())
        s.bound("limit_vs_spectral_t1e6", worst, 1e-9)
    if monte_carlo:
        start = basis_state(n, 0, "L")
        emp = empirical_distribution(model, SimConfig(walkers=10**5, t=10**3, seed=seed))
        exact = marginal(evolve_dense(model, start, 10**3))
        s.bound("monte_carlo_vs_dense_tv_t1e3", total_variation(emp, exact), 0.015)
    return s.results


def verify_models(models, **kwargs) -> dict:
    """Run :func:`check_model` on each model and summarize."""
    items = []
    for k, model in enumerate(models):
        results = check_model(model, **kwargs)
        items.append(
            {
                "index": k,
                "n": model.n,
                "nu2": model.nu2,
                "passed": all(r.passed for r in results),
                "checks": [r.to_dict() for r in results],
            }
        )
    failed = sorted({c["name"] for it in items for c in it["checks"] if not c["passed"]})
    return {"models": items, "passed": not failed, "failed_checks": failed}


def rejection_is_enforced(model: PathCRWModel) -> bool:
    """True when a model violating the real-spectrum condition is refused."""
    try:
        spectral.full_decomposition(model)
    except AssumptionViolated:
        return True
    return False
