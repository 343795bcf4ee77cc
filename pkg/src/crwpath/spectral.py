"""Complete eigendecomposition of the one-step operator ``U = S C``.

The ``2(n+1)`` eigenpairs come in three kinds:

* one stationary pair, ``mu = 1``, built from a birth-and-death chain
  that satisfies detailed balance;
* one alternating pair, ``mu = nu2``, coming from the Jacobi eigenvalue -1;
* ``2n`` pairs ``mu_{+m}, mu_{-m}``, the roots of
  ``mu**2 - (1 - nu2) * lam_m * mu - nu2 = 0`` for each other Jacobi
  eigenvalue ``lam_m``, with eigenvectors ``a_m + mu * b_m``.

When ``nu2 < 0`` the roots are real only if every ``|lam_m|`` exceeds
``sqrt(-4 nu2) / (1 - nu2)``. That condition is checked up front and its
failure is an error.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import (
    AssumptionViolated,
    ComplexRoots,
    DimensionMismatch,
    InconsistentLemma,
    NearDegenerate,
    NumericalError,
    Overflow,
)
from .jacobi import EigenPairB, alternating_vector, coin_spectral_data, eigs_B
from .model import STRUCTURE_TOL, PathCRWModel, apply_coin, apply_shift, dense_U, marginal

log = logging.getLogger(__name__)

SQRT2 = math.sqrt(2.0)

DEPENDENCE_TOL = 1e-10
LAMBDA_MINUS_ONE_TOL = 1e-10
SPECTRAL_TOL = 1e-8
MU_GAP = 1e-10

STATIONARY, PLUS, MINUS, ALTERNATING = "stationary", "plus", "minus", "alternating"


@dataclass(frozen=True)
class ABPair:
    a: np.ndarray
    b: np.ndarray
    lam: float

    @property
    def overlap(self) -> float:
        return float(self.a @ self.b)


@dataclass(frozen=True)
class EigenPairU:
    """Right eigenvector ``u`` of ``U`` for ``mu``.

    ``q`` is the matching row of the inverse eigenvector matrix, so that
    ``q @ u == 1``; it is ``None`` until the full basis is assembled.
    """

    mu: float
    u: np.ndarray
    tag: str
    source_index: int
    q: np.ndarray | None = None

    def with_q(self, q: np.ndarray) -> "EigenPairU":
        return EigenPairU(self.mu, self.u, self.tag, self.source_index, q)


@dataclass(frozen=True)
class AssumptionReport:
    nu2: float
    threshold: float | None
    lambdas: tuple[float, ...]
    passes: tuple[bool, ...]

    @property
    def vacuous(self) -> bool:
        return self.threshold is None

    @property
    def passed(self) -> bool:
        return all(self.passes)

    @property
    def offending(self) -> list[float]:
        return [lam for lam, ok in zip(self.lambdas, self.passes) if not ok]

    def to_dict(self) -> dict:
        return {
            "nu2": self.nu2,
            "threshold": self.threshold,
            "vacuous": self.vacuous,
            "passed": self.passed,
            "lambdas": [{"lambda": lam, "pass": ok} for lam, ok in zip(self.lambdas, self.passes)],
        }


@dataclass(frozen=True)
class SpectralDecomposition:
    pairs: tuple[EigenPairU, ...]
    nu2: float
    lambdas: tuple[float, ...] = field(default=())

    @cached_property
    def mus(self) -> np.ndarray:
        return np.array([p.mu for p in self.pairs])

    @cached_property
    def right(self) -> np.ndarray:
        """Eigenvectors as columns."""
        return np.column_stack([p.u for p in self.pairs])

    @cached_property
    def left(self) -> np.ndarray:
        """Left projections as rows."""
        return np.vstack([p.q for p in self.pairs])

    def reconstruct(self, t: int = 1) -> np.ndarray:
        """``sum_m mu_m**t |u_m><q_m|``."""
        return (self.right * self.mus**t) @ self.left

    def by_tag(self, tag: str) -> list[EigenPairU]:
        return [p for p in self.pairs if p.tag == tag]

    @property
    def stationary(self) -> EigenPairU:
        return self.by_tag(STATIONARY)[0]

    def to_dict(self) -> dict:
        return {
            "nu2": self.nu2,
            "pairs": [
                {
                    "mu": p.mu,
                    "tag": p.tag,
                    "source_index": p.source_index,
                    "u": p.u.tolist(),
                    "q": None if p.q is None else p.q.tolist(),
                }
                for p in self.pairs
            ],
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "SpectralDecomposition":
        pairs = tuple(
            EigenPairU(
                mu=float(p["mu"]),
                u=np.asarray(p["u"], dtype=float),
                tag=p["tag"],
                source_index=int(p["source_index"]),
                q=None if p.get("q") is None else np.asarray(p["q"], dtype=float),
            )
            for p in doc["pairs"]
        )
        return cls(pairs=pairs, nu2=float(doc["nu2"]))


def make_ab(model: PathCRWModel, eig: EigenPairB) -> ABPair:
    """``a = sum_x v(x) |x> (|L> - |R>)/sqrt2`` and ``b = S a``."""
    a = np.empty(model.dim)
    a[0::2] = eig.v / SQRT2
    a[1::2] = -eig.v / SQRT2
    return ABPair(a=a, b=apply_shift(model, a), lam=eig.lam)


def check_linear_dependence(ab: ABPair) -> bool:
    """Whether ``a`` and ``b`` are parallel.

    Decided by ``|<a, b>| >= 1 - 1e-10``; cross-checked against
    ``lam == -1``, and a disagreement raises :class:`InconsistentLemma`.
    """
    by_overlap = abs(ab.overlap) >= 1.0 - DEPENDENCE_TOL
    by_lambda = abs(ab.lam + 1.0) <= LAMBDA_MINUS_ONE_TOL
    if by_overlap != by_lambda:
        raise InconsistentLemma(
            f"<a,b> = {ab.overlap:.17g} but lambda = {ab.lam:.17g}; "
            "dependence should occur exactly at lambda = -1"
        )
    return by_overlap


def mu_pair(lam: float, nu2: float) -> tuple[float, float]:
    """Roots ``(mu_plus, mu_minus)`` of ``mu**2 - (1-nu2)*lam*mu - nu2``.

    The root of larger magnitude comes from the quadratic formula with the
    sign that avoids cancellation; the other from ``mu_plus * mu_minus = -nu2``.
    """
    b = (1.0 - nu2) * lam
    disc = b * b + 4.0 * nu2
    if disc <= 0.0:
        raise ComplexRoots(lam, nu2, disc)
    root = math.sqrt(disc)
    if b >= 0.0:
        mu_plus = 0.5 * (b + root)
        mu_minus = -nu2 / mu_plus
    else:
        mu_minus = 0.5 * (b - root)
        mu_plus = -nu2 / mu_minus
    return mu_plus, mu_minus


def assumption_threshold(nu2: float) -> float | None:
    if nu2 > 0:
        return None
    return math.sqrt(-4.0 * nu2) / (1.0 - nu2)


def check_assumption2(lambdas, nu2: float) -> AssumptionReport:
    """Report which Jacobi eigenvalues satisfy ``threshold < |lam| <= 1``.

    Only meaningful for ``nu2 < 0``; for ``nu2 > 0`` every entry passes.
    """
    lambdas = tuple(float(lam) for lam in lambdas)
    threshold = assumption_threshold(nu2)
    if threshold is None:
        passes = tuple(True for _ in lambdas)
    else:
        passes = tuple(threshold < abs(lam) <= 1.0 + 1e-9 for lam in lambdas)
    return AssumptionReport(nu2=float(nu2), threshold=threshold, lambdas=lambdas, passes=passes)


def _ratio_products(ratios: np.ndarray) -> np.ndarray:
    """Normalized running products ``1, r0, r0*r1, ...``; raises on overflow."""
    raw = np.empty(ratios.size + 1)
    raw[0] = 1.0
    for x in range(1, raw.size):
        raw[x] = raw[x - 1] * ratios[x - 1]
        if not np.isfinite(raw[x]) or raw[x] == 0.0:
            raise Overflow("product of ratios left the double range", vertex=x)
    total = raw.sum()
    if not np.isfinite(total):
        raise Overflow("normalizing sum is not finite")
    return raw / total


def stationary_weights(model: PathCRWModel) -> np.ndarray:
    """``v0`` from ``v0(x+1) = (1 - p_{x,L}) / p_{x+1,R} * v0(x)``, summing to 1."""
    return _ratio_products((1.0 - model.p_L[:-1]) / model.p_R[1:])


def stationary_pair(model: PathCRWModel) -> EigenPairU:
    """Eigenpair ``mu = 1`` with ``u0 = sum_x v0(x) |x> (x) w1_x``.

    ``u0`` is scaled so its entries sum to 1; the matching left vector is
    the all-ones row.
    """
    v0 = stationary_weights(model)
    w1 = np.stack([d.w1 for d in coin_spectral_data(model.family)])
    u0 = (v0[:, None] * w1).ravel()
    if np.abs(apply_coin(model, u0) - u0).max() > STRUCTURE_TOL:
        raise NumericalError("stationary vector is not fixed by the coin operator")
    if np.abs(apply_shift(model, u0) - u0).max() > STRUCTURE_TOL:
        raise NumericalError("stationary vector is not fixed by the shift operator")
    return EigenPairU(mu=1.0, u=u0, tag=STATIONARY, source_index=0, q=np.ones(model.dim))


def build_Q(model: PathCRWModel) -> np.ndarray:
    """Column-stochastic birth-and-death matrix whose stationary vector is ``v0``."""
    n = model.n
    pL, pR = model.p_L, model.p_R
    Q = np.zeros((n + 1, n + 1))
    Q[0, 0] = pR[0]
    Q[n, n] = 1.0 - pL[n]
    idx = np.arange(n)
    Q[idx, idx + 1] = pR[1:]
    Q[idx + 1, idx] = 1.0 - pL[:-1]
    return Q / (1.0 - model.nu2)


def alternating_pair(model: PathCRWModel) -> EigenPairU:
    v = alternating_vector(model.n + 1)
    u = np.empty(model.dim)
    u[0::2] = v / SQRT2
    u[1::2] = -v / SQRT2
    return EigenPairU(mu=model.nu2, u=u, tag=ALTERNATING, source_index=model.n + 1)


def _is_minus_one(lam: float) -> bool:
    return abs(lam + 1.0) <= LAMBDA_MINUS_ONE_TOL


def pairs_from_B(model: PathCRWModel, eigB, check: bool = True) -> list[EigenPairU]:
    """Two eigenpairs of ``U`` for every Jacobi eigenvalue other than -1.

    With ``check`` set, the two-dimensional invariance
    ``U a = nu2 b``, ``U b = a + (1-nu2) lam b`` and the eigen-residuals are
    verified and a failure raises :class:`NumericalError`.
    """
    nu2 = model.nu2
    out = []
    m = 0
    for eig in eigB:
        if _is_minus_one(eig.lam):
            continue
        m += 1
        ab = make_ab(model, eig)
        if check:
            check_linear_dependence(ab)
        mu_p, mu_m = mu_pair(eig.lam, nu2)
        if check:
            Ua, Ub = apply_shift(model, apply_coin(model, np.column_stack([ab.a, ab.b]))).T
            err = max(
                np.abs(Ua - nu2 * ab.b).max(),
                np.abs(Ub - ab.a - (1.0 - nu2) * eig.lam * ab.b).max(),
            )
            if err > 1e-10:
                raise NumericalError(f"span(a, b) is not invariant for lambda={eig.lam:.15g} ({err:.3g})")
        for mu, tag, sign in ((mu_p, PLUS, 1), (mu_m, MINUS, -1)):
            u = ab.a + mu * ab.b
            u /= np.linalg.norm(u)
            if check:
                res = np.abs(apply_shift(model, apply_coin(model, u)) - mu * u).max()
                if res > SPECTRAL_TOL:
                    raise NumericalError(f"residual {res:.3g} for mu={mu:.15g}")
            out.append(EigenPairU(mu=mu, u=u, tag=tag, source_index=sign * m))
    return out


def _left_projections(V: np.ndarray) -> np.ndarray:
    inv = np.linalg.solve(V, np.eye(V.shape[0]))
    err = np.abs(inv @ V - np.eye(V.shape[0])).max()
    log.debug("eigenvector matrix condition %.3g, inverse residual %.3g", np.linalg.cond(V), err)
    if err > SPECTRAL_TOL:
        raise NumericalError(f"eigenvector basis is ill-conditioned (inverse residual {err:.3g})")
    return inv


def full_decomposition(model: PathCRWModel, eigB=None, check: bool = True) -> SpectralDecomposition:
    """All ``2(n+1)`` eigenpairs of ``U``, each with its left projection.

    Pairs are ordered stationary, ``+1, -1, ..., +n, -n``, alternating.

    Raises
    ------
    AssumptionViolated
        ``nu2 < 0`` and some Jacobi eigenvalue is too small in magnitude.
    NearDegenerate
        Two eigenvalues of ``U`` are within ``1e-10``.
    """
    if eigB is None:
        eigB = eigs_B(model)
    lambdas = [e.lam for e in eigB]
    report = check_assumption2(lambdas, model.nu2)
    if not report.passed:
        raise AssumptionViolated(report)
    if check and not any(_is_minus_one(lam) for lam in lambdas):
        raise NumericalError(f"Jacobi spectrum lacks -1 (min {min(lambdas):.15g})")

    pairs = [stationary_pair(model)]
    pairs += pairs_from_B(model, eigB, check=check)
    pairs.append(alternating_pair(model))

    mus = np.sort([p.mu for p in pairs])
    gaps = np.diff(mus)
    if check and gaps.size and gaps.min() <= MU_GAP:
        k = int(np.argmin(gaps))
        raise NearDegenerate(f"eigenvalues {mus[k]:.15g} and {mus[k + 1]:.15g} of U coincide")

    V = np.column_stack([p.u for p in pairs])
    inv = _left_projections(V) if check else np.linalg.pinv(V)
    pairs = tuple(p.with_q(inv[k]) for k, p in enumerate(pairs))
    return SpectralDecomposition(pairs=pairs, nu2=model.nu2, lambdas=tuple(lambdas))


def evolve_spectral(decomp: SpectralDecomposition, phi, t: int) -> np.ndarray:
    """``U**t phi`` as ``sum_m mu_m**t (q_m . phi) u_m``."""
    phi = np.asarray(phi, dtype=float)
    if phi.shape != (decomp.right.shape[0],):
        raise DimensionMismatch(f"state has shape {phi.shape}, expected ({decomp.right.shape[0]},)")
    if t < 0 or int(t) != t:
        raise ValueError(f"t must be a nonnegative integer, got {t!r}")
    alpha = decomp.left @ phi
    return decomp.right @ (decomp.mus ** int(t) * alpha)


def expansion_coefficients(decomp: SpectralDecomposition, phi) -> np.ndarray:
    return decomp.left @ np.asarray(phi, dtype=float)


def limiting_distribution(model: PathCRWModel, eigB=None) -> np.ndarray:
    """Closed-form long-time vertex distribution.

    ``p(x) / p(x-1) = (1 - p_{x-1,L}) / p_{x,R}``, normalized to sum 1.
    Requires the real-spectrum condition when ``nu2 < 0``.
    """
    if model.nu2 < 0:
        if eigB is None:
            eigB = eigs_B(model)
        report = check_assumption2([e.lam for e in eigB], model.nu2)
        if not report.passed:
            raise AssumptionViolated(report)
    return stationary_weights(model)


def stationary_marginal(model: PathCRWModel) -> np.ndarray:
    return marginal(stationary_pair(model).u)


def power_iteration_limit(model: PathCRWModel, phi=None, tol: float = 1e-13, max_power: int = 2**40):
    """Iterate ``U`` from ``phi`` until the vertex marginal stops moving.

    Applies ``U, U**2, U**4, ...`` in turn (repeated squaring), so the total
    power reached grows geometrically. Returns the marginal and that power.
    """
    U = dense_U(model)
    if phi is None:
        psi = np.zeros(model.dim)
        psi[0] = 1.0
    else:
        psi = np.asarray(phi, dtype=float).copy()
    P, block, power = U, 1, 0
    prev = psi.reshape(-1, 2).sum(axis=1)
    while power <= max_power:
        psi = P @ psi
        power += block
        cur = psi.reshape(-1, 2).sum(axis=1)
        if 0.5 * np.abs(cur - prev).sum() < tol:
            return cur, power
        prev = cur
        P = P @ P
        block *= 2
    raise NumericalError("power iteration did not settle")
