"""scikit-learn style front end.

``CorrelatedWalkSpectrum`` is fitted on a coin table (one row
``(p_L, p_R)`` per vertex) and then transforms initial states into
vertex distributions at a fixed time::

    est = CorrelatedWalkSpectrum(t=100).fit([[0.7, 0.2], [0.7, 0.2]])
    est.transform(np.eye(4))        # one row per initial basis state
    est.limiting_distribution_      # array([0.4, 0.6])
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from . import jacobi, spectral
from .errors import DimensionMismatch
from .model import validate_model
from .simulate import SimConfig, empirical_distribution, evolve_dense


def check_coins(X) -> np.ndarray:
    X = check_array(X, dtype=np.float64, ensure_min_samples=2)
    if X.shape[1] != 2:
        raise ValueError(f"coin table must have 2 columns (p_L, p_R), got {X.shape[1]}")
    return X


class CorrelatedWalkSpectrum(TransformerMixin, BaseEstimator):
    """Spectral decomposition of a correlated walk, fitted from its coins.

    Parameters
    ----------
    t : int or None, default=None
        Time at which :meth:`transform` reports vertex distributions. ``None``
        means the long-time limit.
    method : {"spectral", "dense"}, default="spectral"
        How :meth:`transform` evolves states. ``"dense"`` iterates the
        one-step operator and also works when the spectrum is not real.
    require_real_spectrum : bool, default=True
        Raise :class:`~crwpath.errors.AssumptionViolated` in :meth:`fit`
        when ``nu2 < 0`` and the Jacobi spectrum is too close to zero.
        When False, such models fit without a decomposition and only
        ``method="dense"`` can transform.

    Attributes
    ----------
    model_ : PathCRWModel
    nu2_ : float
    jacobi_eigenvalues_ : ndarray of shape (n+1,)
        Descending.
    assumption_report_ : AssumptionReport
    decomposition_ : SpectralDecomposition or None
    eigenvalues_ : ndarray of shape (2(n+1),) or None
    limiting_distribution_ : ndarray of shape (n+1,) or None
    n_features_in_ : int
        Length of an input state, ``2(n+1)``.
    """

    def __init__(self, t=None, method="spectral", require_real_spectrum=True):
        self.t = t
        self.method = method
        self.require_real_spectrum = require_real_spectrum

    def fit(self, X, y=None):
        X = check_coins(X)
        if self.method not in ("spectral", "dense"):
            raise ValueError(f"method must be 'spectral' or 'dense', got {self.method!r}")
        n = X.shape[0] - 1
        self.model_ = validate_model([tuple(row) for row in X], n)
        self.nu2_ = self.model_.nu2
        eigB = jacobi.eigs_B(self.model_)
        self.jacobi_eigenvalues_ = np.array([e.lam for e in eigB])
        self.assumption_report_ = spectral.check_assumption2(self.jacobi_eigenvalues_, self.nu2_)
        if self.assumption_report_.passed or self.require_real_spectrum:
            self.decomposition_ = spectral.full_decomposition(self.model_, eigB=eigB)
            self.eigenvalues_ = self.decomposition_.mus
            self.limiting_distribution_ = spectral.limiting_distribution(self.model_, eigB=eigB)
        else:
            self.decomposition_ = None
            self.eigenvalues_ = None
            self.limiting_distribution_ = None
        self.n_features_in_ = self.model_.dim
        return self

    def _states(self, X) -> np.ndarray:
        X = check_array(X, dtype=np.float64)
        if X.shape[1] != self.n_features_in_:
            raise DimensionMismatch(f"states have {X.shape[1]} entries, expected {self.n_features_in_}")
        return X

    def evolve(self, X, t=None) -> np.ndarray:
        """Full states ``U**t phi`` for each row ``phi`` of ``X``."""
        check_is_fitted(self, "model_")
        X = self._states(X)
        t = self.t if t is None else t
        if t is None:
            raise ValueError("evolve needs a finite t")
        if self.method == "dense":
            return np.vstack([evolve_dense(self.model_, phi, t) for phi in X])
        if self.decomposition_ is None:
            raise ValueError("no spectral decomposition; refit with method='dense'")
        return np.vstack([spectral.evolve_spectral(self.decomposition_, phi, t) for phi in X])

    def transform(self, X):
        """Vertex distribution at time ``t`` for each initial state (row of ``X``)."""
        check_is_fitted(self, "model_")
        X = self._states(X)
        if self.t is None:
            if self.limiting_distribution_ is None:
                raise ValueError("the long-time limit needs a real spectrum")
            return np.tile(self.limiting_distribution_, (X.shape[0], 1))
        states = self.evolve(X, self.t)
        return states.reshape(X.shape[0], -1, 2).sum(axis=2)

    def expansion_coefficients(self, X) -> np.ndarray:
        """Coordinates of each state in the eigenbasis; column 0 is the stationary pair."""
        check_is_fitted(self, "decomposition_")
        return self._states(X) @ self.decomposition_.left.T


class CorrelatedWalkSampler(TransformerMixin, BaseEstimator):
    """Monte Carlo counterpart of :class:`CorrelatedWalkSpectrum`.

    ``transform`` takes rows ``(x, j)`` with ``j`` 0 for L and 1 for R and
    returns the empirical vertex histogram after ``t`` steps for each.
    """

    def __init__(self, t=1000, walkers=100_000, seed=0):
        self.t = t
        self.walkers = walkers
        self.seed = seed

    def fit(self, X, y=None):
        X = check_coins(X)
        self.model_ = validate_model([tuple(row) for row in X], X.shape[0] - 1)
        return self

    def transform(self, X):
        check_is_fitted(self, "model_")
        X = check_array(X, dtype=np.int64)
        out = []
        for x, j in X:
            cfg = SimConfig(walkers=self.walkers, t=self.t, seed=self.seed, initial=(int(x), "LR"[int(j)]))
            out.append(empirical_distribution(self.model_, cfg))
        return np.vstack(out)
