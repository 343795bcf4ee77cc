"""Correlated random walk on the path with vertices ``0..n``.

States live in a real vector space of dimension ``2(n+1)`` with basis
``|x, L>`` and ``|x, R>``. The layout is interleaved: the amplitude of
``(x, J)`` sits at index ``2x`` for ``J = L`` and ``2x + 1`` for ``J = R``.
Operators act on column vectors from the left, so ``dense_U(model) @ psi``
advances a distribution by one step.

Every function here is pure; models are frozen and safe to share.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import NamedTuple, Sequence

import numpy as np

from .errors import (
    DegenerateCoin,
    DimensionMismatch,
    NonIsospectral,
    NotAProbabilityState,
    OutOfRange,
    ParseError,
    ValidationError,
)

L, R = 0, 1
LABELS = ("L", "R")

STRUCTURE_TOL = 1e-12


class CoinParams(NamedTuple):
    """One 2x2 column-stochastic coin ``[[p_L, p_R], [1-p_L, 1-p_R]]``."""

    p_L: float
    p_R: float

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.p_L, self.p_R], [1.0 - self.p_L, 1.0 - self.p_R]])


@dataclass(frozen=True)
class CoinFamily:
    coins: tuple[CoinParams, ...]
    nu2: float

    def __len__(self):
        return len(self.coins)


@dataclass(frozen=True)
class PathCRWModel:
    """A walk on the path ``0..n`` with one coin per vertex.

    Construct through :func:`validate_model`; the constructor itself only
    checks that the number of coins matches ``n``.
    """

    n: int
    family: CoinFamily

    def __post_init__(self):
        if len(self.family.coins) != self.n + 1:
            raise ValidationError(
                f"expected {self.n + 1} coins for n={self.n}, got {len(self.family.coins)}"
            )

    @property
    def nu2(self) -> float:
        return self.family.nu2

    @property
    def dim(self) -> int:
        return 2 * (self.n + 1)

    @cached_property
    def p_L(self) -> np.ndarray:
        out = np.array([c.p_L for c in self.family.coins], dtype=float)
        out.flags.writeable = False
        return out

    @cached_property
    def p_R(self) -> np.ndarray:
        out = np.array([c.p_R for c in self.family.coins], dtype=float)
        out.flags.writeable = False
        return out

    @cached_property
    def shift_permutation(self) -> np.ndarray:
        """Index array ``perm`` with ``S e_i = e_perm[i]``; ``perm`` is an involution."""
        n = self.n
        perm = np.empty(self.dim, dtype=np.intp)
        for x in range(n + 1):
            perm[index(x, "R")] = index(x + 1, "L") if x != n else index(n, "R")
            perm[index(x, "L")] = index(x - 1, "R") if x != 0 else index(0, "L")
        perm.flags.writeable = False
        return perm

    def coin_matrices(self) -> np.ndarray:
        """Array of shape ``(n+1, 2, 2)`` holding every ``C_x``."""
        return np.stack([c.matrix for c in self.family.coins])

    def digest(self) -> dict:
        coins = [[float(c.p_L), float(c.p_R)] for c in self.family.coins]
        h = hashlib.sha256(json.dumps(coins).encode()).hexdigest()
        return {"n": self.n, "nu2": float(self.nu2), "coins_sha256": h}


def index(x: int, j) -> int:
    """Position of ``(x, j)`` in a state vector; ``j`` is ``"L"``/``"R"`` or 0/1."""
    if isinstance(j, str):
        j = LABELS.index(j.upper())
    return 2 * x + j


def basis_state(n: int, x: int, j) -> np.ndarray:
    if not 0 <= x <= n:
        raise DimensionMismatch(f"vertex {x} outside 0..{n}")
    e = np.zeros(2 * (n + 1))
    e[index(x, j)] = 1.0
    return e


def validate_model(raw_coins: Sequence, n: int) -> PathCRWModel:
    """Check coin parameters and build a :class:`PathCRWModel`.

    Parameters
    ----------
    raw_coins : sequence of (p_L, p_R)
        One pair per vertex ``0..n``.
    n : int
        Index of the last vertex; must be at least 1.

    Raises
    ------
    OutOfRange
        A probability is not strictly between 0 and 1.
    DegenerateCoin
        ``|p_L - p_R|`` is 0 or 1.
    NonIsospectral
        ``p_L - p_R`` differs between vertices.
    """
    if int(n) != n or n < 1:
        raise ValidationError(f"n must be an integer >= 1, got {n!r}")
    n = int(n)
    if len(raw_coins) != n + 1:
        raise ValidationError(f"expected {n + 1} coins for n={n}, got {len(raw_coins)}")

    coins = []
    for x, raw in enumerate(raw_coins):
        try:
            p_L, p_R = (float(v) for v in raw)
        except (TypeError, ValueError) as exc:
            raise ValidationError(f"coin must be a pair of numbers, got {raw!r}", vertex=x) from exc
        for name, p in (("p_L", p_L), ("p_R", p_R)):
            if not (np.isfinite(p) and 0.0 < p < 1.0):
                raise OutOfRange(f"{name}={p!r} must lie strictly inside (0, 1)", vertex=x)
        gap = abs(p_L - p_R)
        if gap <= STRUCTURE_TOL or gap >= 1.0 - STRUCTURE_TOL:
            raise DegenerateCoin(f"|p_L - p_R| = {gap!r} must lie strictly inside (0, 1)", vertex=x)
        coins.append(CoinParams(p_L, p_R))

    nu2 = coins[0].p_L - coins[0].p_R
    for x, c in enumerate(coins):
        d = c.p_L - c.p_R
        if abs(d - nu2) > STRUCTURE_TOL:
            raise NonIsospectral(
                f"p_L - p_R = {d!r} differs from the value {nu2!r} at vertex 0", vertex=x
            )
    return PathCRWModel(n=n, family=CoinFamily(coins=tuple(coins), nu2=nu2))


def homogeneous(n: int, p_L: float, p_R: float) -> PathCRWModel:
    return validate_model([(p_L, p_R)] * (n + 1), n)


def model_from_dict(doc: dict) -> PathCRWModel:
    """Build a model from the JSON config layout.

    Accepts ``{"n": .., "coins": [{"p_L": .., "p_R": ..}, ...]}`` or the
    homogeneous shorthand ``{"n": .., "coin": {"p_L": .., "p_R": ..}}``.
    """
    if not isinstance(doc, dict) or "n" not in doc:
        raise ParseError("config must be an object with an 'n' field")
    n = doc["n"]
    if not isinstance(n, int) or isinstance(n, bool):
        raise ValidationError(f"n must be an integer, got {n!r}")
    if "coins" in doc:
        raw = doc["coins"]
        if not isinstance(raw, list):
            raise ParseError("'coins' must be a list")
    elif "coin" in doc:
        if n < 1:
            raise ValidationError(f"n must be an integer >= 1, got {n!r}")
        raw = [doc["coin"]] * (n + 1)
    else:
        raise ParseError("config needs either 'coins' or 'coin'")

    pairs = []
    for x, c in enumerate(raw):
        if not isinstance(c, dict) or "p_L" not in c or "p_R" not in c:
            raise ParseError(f"vertex {x}: coin must be an object with p_L and p_R")
        pairs.append((c["p_L"], c["p_R"]))
    return validate_model(pairs, n)


def model_to_dict(model: PathCRWModel) -> dict:
    return {
        "n": model.n,
        "coins": [{"p_L": c.p_L, "p_R": c.p_R} for c in model.family.coins],
    }


def load_config(path) -> PathCRWModel:
    try:
        doc = json.loads(Path(path).read_text())
    except (OSError, UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ParseError(f"cannot read config {path}: {exc}") from exc
    return model_from_dict(doc)


def _check_dim(model: PathCRWModel, s: np.ndarray) -> np.ndarray:
    s = np.asarray(s, dtype=float)
    if s.ndim == 0 or s.shape[0] != model.dim:
        raise DimensionMismatch(f"state has leading size {s.shape[:1]}, expected {model.dim}")
    return s


def apply_coin(model: PathCRWModel, s) -> np.ndarray:
    """Apply ``C = sum_x |x><x| (x) C_x``.

    ``s`` may be a single state or a matrix whose columns are states.
    """
    s = _check_dim(model, s)
    blocks = s.reshape((model.n + 1, 2) + s.shape[1:])
    pl = model.p_L.reshape((-1,) + (1,) * (s.ndim - 1))
    pr = model.p_R.reshape((-1,) + (1,) * (s.ndim - 1))
    sl, sr = blocks[:, 0], blocks[:, 1]
    out = np.empty_like(blocks)
    out[:, 0] = pl * sl + pr * sr
    out[:, 1] = (1.0 - pl) * sl + (1.0 - pr) * sr
    return out.reshape(s.shape)


def apply_shift(model: PathCRWModel, s) -> np.ndarray:
    """Apply the shift permutation.

    ``(x,R) -> (x+1,L)`` and ``(x,L) -> (x-1,R)`` in the interior; ``(0,L)`` and
    ``(n,R)`` are fixed points.
    """
    s = _check_dim(model, s)
    # S is an involution, so gathering through perm equals scattering through it
    return s[model.shift_permutation].copy()


def apply_U(model: PathCRWModel, s) -> np.ndarray:
    return apply_shift(model, apply_coin(model, s))


def dense_U(model: PathCRWModel) -> np.ndarray:
    """Materialize the one-step operator; column ``j`` is the image of ``e_j``."""
    return apply_U(model, np.eye(model.dim))


def is_probability_state(s, tol: float = STRUCTURE_TOL) -> bool:
    s = np.asarray(s, dtype=float)
    return bool(np.all(np.isfinite(s)) and np.all(s >= -tol) and abs(s.sum() - 1.0) <= tol)


def marginal(s, tol: float = STRUCTURE_TOL) -> np.ndarray:
    """Vertex distribution ``P(X = x) = s[(x,L)] + s[(x,R)]``."""
    s = np.asarray(s, dtype=float)
    if s.ndim != 1 or s.size % 2:
        raise DimensionMismatch(f"state must be a vector of even length, got shape {s.shape}")
    if not is_probability_state(s, tol):
        raise NotAProbabilityState(
            f"entries must be nonnegative and sum to 1 (min {s.min():.3g}, sum {s.sum():.17g})"
        )
    return s.reshape(-1, 2).sum(axis=1)
