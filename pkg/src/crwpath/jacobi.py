"""Jacobi matrices attached to an isospectral family of coins.

``B`` is the tridiagonal matrix assembled from the left eigenvectors of the
coins for their second eigenvalue ``nu2``. Conjugating by ``diag(sqrt(pi))``
makes it symmetric (``J``), whose spectrum is computed with an implicit QL
iteration and lifted back to eigenpairs of ``B``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceFailure, NearDegenerate, Overflow
from .model import CoinFamily, PathCRWModel

SQRT2 = math.sqrt(2.0)
W2 = np.array([1.0, -1.0]) / SQRT2

SIMPLE_GAP = 1e-10


@dataclass(frozen=True)
class CoinSpectralData:
    """Eigen-data of one coin ``C_x``.

    ``q_L, q_R`` are the entries of the left eigenvector for ``nu2``;
    ``w1`` is the right eigenvector for eigenvalue 1, scaled to sum to 1.
    The right eigenvector for ``nu2`` is always ``(1, -1)/sqrt(2)``.
    """

    q_L: float
    q_R: float
    w1: np.ndarray
    nu2: float

    @property
    def w2(self) -> np.ndarray:
        return W2

    @property
    def q2(self) -> np.ndarray:
        return np.array([self.q_L, self.q_R])

    def reconstruct(self) -> np.ndarray:
        """``(1 - nu2) |w2><-q2| + I``, which equals ``C_x``."""
        return (1.0 - self.nu2) * np.outer(W2, -self.q2) + np.eye(2)


@dataclass(frozen=True)
class TridiagonalB:
    """Band storage of ``B``.

    ``sub[k] = B[k+1, k] = q_{k+1}(L)/sqrt2`` and
    ``sup[k] = B[k, k+1] = -q_k(R)/sqrt2``. Only ``diag[0]`` and ``diag[n]``
    are nonzero.
    """

    diag: np.ndarray
    sub: np.ndarray
    sup: np.ndarray

    @property
    def size(self) -> int:
        return self.diag.size

    def dense(self) -> np.ndarray:
        return np.diag(self.diag) + np.diag(self.sub, -1) + np.diag(self.sup, 1)

    def matvec(self, v: np.ndarray) -> np.ndarray:
        out = self.diag * v
        out[1:] += self.sub * v[:-1]
        out[:-1] += self.sup * v[1:]
        return out


@dataclass(frozen=True)
class PiVector:
    pi: np.ndarray
    c_pi: float


@dataclass(frozen=True)
class SymTridiagonalJ:
    diag: np.ndarray
    offdiag: np.ndarray

    def dense(self) -> np.ndarray:
        return np.diag(self.diag) + np.diag(self.offdiag, -1) + np.diag(self.offdiag, 1)


@dataclass(frozen=True)
class EigenPairB:
    lam: float
    v: np.ndarray


def coin_spectral_data(family: CoinFamily) -> list[CoinSpectralData]:
    nu2 = family.nu2
    out = []
    for c in family.coins:
        denom = 1.0 - (c.p_L - c.p_R)
        out.append(
            CoinSpectralData(
                q_L=SQRT2 * (1.0 - c.p_L) / denom,
                q_R=-SQRT2 * c.p_R / denom,
                w1=np.array([c.p_R, 1.0 - c.p_L]) / denom,
                nu2=nu2,
            )
        )
    return out


def build_B(model: PathCRWModel) -> TridiagonalB:
    data = coin_spectral_data(model.family)
    qL = np.array([d.q_L for d in data])
    qR = np.array([d.q_R for d in data])
    n = model.n
    diag = np.zeros(n + 1)
    diag[0] = -qL[0] / SQRT2
    diag[n] = qR[n] / SQRT2
    return TridiagonalB(diag=diag, sub=qL[1:] / SQRT2, sup=-qR[:-1] / SQRT2)


def build_pi(B: TridiagonalB) -> PiVector:
    """Positive weights that symmetrize ``B``.

    Uses the running ratio ``pi[x]/pi[x-1] = B[x, x-1] / B[x-1, x]`` and
    normalizes the result to sum 1.
    """
    raw = np.empty(B.size)
    raw[0] = 1.0
    with np.errstate(over="ignore", under="ignore", divide="ignore"):
        ratios = B.sub / B.sup
        for x in range(1, B.size):
            raw[x] = raw[x - 1] * ratios[x - 1]
            if not np.isfinite(raw[x]) or raw[x] == 0.0:
                raise Overflow("product of ratios left the double range", vertex=x)
    total = raw.sum()
    if not np.isfinite(total):
        raise Overflow("normalizing sum is not finite")
    return PiVector(pi=raw / total, c_pi=1.0 / total)


def build_J(B: TridiagonalB, pi: PiVector | None = None) -> SymTridiagonalJ:
    """Symmetric conjugate ``diag(sqrt(pi))^-1 B diag(sqrt(pi))``.

    The off-diagonal ``sqrt(B[k+1,k] * B[k,k+1])`` does not depend on the
    scale of ``pi``; ``pi`` is accepted so callers can pass the one they hold.
    """
    return SymTridiagonalJ(diag=B.diag.copy(), offdiag=np.sqrt(B.sub * B.sup))


def eigs_symmetric_tridiagonal(J: SymTridiagonalJ, max_iter: int = 60):
    """All eigenpairs of a symmetric tridiagonal matrix by implicit QL.

    Parameters
    ----------
    J : SymTridiagonalJ
        Matrix with strictly positive off-diagonal, so every eigenvalue is simple.
    max_iter : int
        Cap on QL sweeps per eigenvalue.

    Returns
    -------
    lams : ndarray, shape (n+1,)
        Eigenvalues sorted in descending order.
    W : ndarray, shape (n+1, n+1)
        Orthonormal eigenvectors as columns, ``W[:, k]`` paired with ``lams[k]``.
    """
    d = np.array(J.diag, dtype=float)
    size = d.size
    e = np.zeros(size)
    e[: size - 1] = J.offdiag
    V = np.eye(size)
    eps = np.finfo(float).eps
    f = 0.0
    tst1 = 0.0
    for l in range(size):
        tst1 = max(tst1, abs(d[l]) + abs(e[l]))
        m = l
        while m < size - 1 and abs(e[m]) > eps * tst1:
            m += 1
        if m > l:
            it = 0
            while True:
                it += 1
                if it > max_iter:
                    raise ConvergenceFailure(f"QL iteration did not converge for eigenvalue {l}")
                # Wilkinson-type shift from the leading 2x2 block
                g = d[l]
                p = (d[l + 1] - g) / (2.0 * e[l])
                r = math.hypot(p, 1.0)
                if p < 0:
                    r = -r
                d[l] = e[l] / (p + r)
                d[l + 1] = e[l] * (p + r)
                dl1 = d[l + 1]
                h = g - d[l]
                d[l + 2 :] -= h
                f += h

                p = d[m]
                c = c2 = c3 = 1.0
                el1 = e[l + 1]
                s = s2 = 0.0
                for i in range(m - 1, l - 1, -1):
                    c3, c2, s2 = c2, c, s
                    g = c * e[i]
                    h = c * p
                    r = math.hypot(p, e[i])
                    e[i + 1] = s * r
                    s = e[i] / r
                    c = p / r
                    p = c * d[i] - s * g
                    d[i + 1] = h + s * (c * g + s * d[i])
                    vi = V[:, i].copy()
                    V[:, i] = c * vi - s * V[:, i + 1]
                    V[:, i + 1] = s * vi + c * V[:, i + 1]
                p = -s * s2 * c3 * el1 * e[l] / dl1
                e[l] = s * p
                d[l] = c * p
                if abs(e[l]) <= eps * tst1:
                    break
        d[l] += f
        e[l] = 0.0

    order = np.argsort(d)[::-1]
    return d[order], V[:, order]


def _check_simple(lams: np.ndarray):
    gaps = -np.diff(lams)
    if gaps.size and gaps.min() <= SIMPLE_GAP:
        k = int(np.argmin(gaps))
        raise NearDegenerate(
            f"eigenvalues {lams[k]:.15g} and {lams[k + 1]:.15g} are closer than {SIMPLE_GAP:g}"
        )


def eigs_B(model: PathCRWModel, B: TridiagonalB | None = None) -> list[EigenPairB]:
    """Eigenpairs of ``B`` sorted by descending eigenvalue.

    Eigenvectors are lifted from ``J`` as ``v = diag(sqrt(pi)) w``, scaled to
    unit Euclidean norm and signed so that ``v[0] > 0``. Passing ``B``
    overrides the matrix built from ``model``.
    """
    if B is None:
        B = build_B(model)
    pi = build_pi(B)
    lams, W = eigs_symmetric_tridiagonal(build_J(B, pi))
    _check_simple(lams)
    if lams.max() > 1.0 + 1e-9 or lams.min() < -1.0 - 1e-9:
        warnings.warn(
            f"Jacobi spectrum leaves [-1, 1]: [{lams.min():.15g}, {lams.max():.15g}]",
            RuntimeWarning,
            stacklevel=2,
        )
    root = np.sqrt(pi.pi)
    pairs = []
    for lam, w in zip(lams, W.T):
        v = root * w
        v /= np.linalg.norm(v)
        if v[0] < 0:
            v = -v
        pairs.append(EigenPairB(lam=float(lam), v=v))
    return pairs


def alternating_vector(size: int) -> np.ndarray:
    """``(-1)^x / sqrt(size)``, the eigenvector of ``B`` for eigenvalue -1."""
    return (-1.0) ** np.arange(size) / math.sqrt(size)
