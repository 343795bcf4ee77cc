"""Monte Carlo trajectories and exact dense evolution.

A walker sits in a basis state ``(x, j)``. One step draws the new label
from column ``j`` of ``C_x`` (``L`` with probability ``p_{x,j}``) and then
moves it with the shift permutation.

Walker ``w`` draws its uniforms from a Philox generator keyed by
``(seed, w)``, so histograms do not depend on how walkers are batched or
scheduled.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .model import (
    LABELS,
    PathCRWModel,
    _check_dim,
    apply_U,
    index,
    is_probability_state,
    marginal,
)
from .errors import NotAProbabilityState

BATCH = 4096
STEP_CHUNK = 1024


class WalkerState(NamedTuple):
    x: int
    j: str

    @property
    def flat(self) -> int:
        return index(self.x, self.j)

    @classmethod
    def from_flat(cls, k: int) -> "WalkerState":
        return cls(int(k) // 2, LABELS[int(k) % 2])


@dataclass(frozen=True)
class SimConfig:
    walkers: int
    t: int
    seed: int = 0
    initial: tuple[int, str] | np.ndarray = (0, "L")

    def __post_init__(self):
        if self.walkers < 1:
            raise ValueError(f"walkers must be >= 1, got {self.walkers}")
        if self.t < 0:
            raise ValueError(f"t must be >= 0, got {self.t}")


def _transition_tables(model: PathCRWModel):
    """Per flat state: probability of drawing L, and the state reached after L or R."""
    p_to_L = np.empty(model.dim)
    p_to_L[0::2] = model.p_L
    p_to_L[1::2] = model.p_R
    perm = model.shift_permutation
    xs = np.arange(model.dim) // 2
    after_L = perm[2 * xs]
    after_R = perm[2 * xs + 1]
    return p_to_L, after_L, after_R


def step(model: PathCRWModel, state: WalkerState, rng: np.random.Generator) -> WalkerState:
    """Advance one walker by one step of ``U``."""
    x, j = state
    if not 0 <= x <= model.n:
        raise ValueError(f"vertex {x} outside 0..{model.n}")
    coin = model.family.coins[x]
    p = coin.p_L if j == "L" else coin.p_R
    new_j = "L" if rng.random() < p else "R"
    return WalkerState.from_flat(model.shift_permutation[index(x, new_j)])


def walker_stream(seed: int, walker: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=[seed & 0xFFFFFFFFFFFFFFFF, walker]))


def _initial_states(model: PathCRWModel, cfg: SimConfig, walkers: range) -> np.ndarray:
    init = cfg.initial
    if isinstance(init, tuple):
        x, j = init
        if not 0 <= x <= model.n:
            raise ValueError(f"initial vertex {x} outside 0..{model.n}")
        return np.full(len(walkers), index(x, j), dtype=np.intp)
    phi = np.asarray(init, dtype=float)
    _check_dim(model, phi)
    if not is_probability_state(phi):
        raise NotAProbabilityState("initial state to sample from must be a probability state")
    cdf = np.cumsum(phi)
    # the initial draw uses its own stream so trajectories keep their per-walker draws
    u = np.array([walker_stream(cfg.seed ^ 0x5DEECE66D, w).random() for w in walkers])
    return np.minimum(np.searchsorted(cdf, u * cdf[-1], side="right"), model.dim - 1)


def final_states(model: PathCRWModel, cfg: SimConfig) -> np.ndarray:
    """Flat basis index of every walker after ``cfg.t`` steps."""
    p_to_L, after_L, after_R = _transition_tables(model)
    out = np.empty(cfg.walkers, dtype=np.intp)
    for start in range(0, cfg.walkers, BATCH):
        walkers = range(start, min(start + BATCH, cfg.walkers))
        s = _initial_states(model, cfg, walkers)
        gens = [walker_stream(cfg.seed, w) for w in walkers]
        # chunked draws from the same generators give the same per-walker sequence
        for t0 in range(0, cfg.t, STEP_CHUNK):
            draws = np.stack([g.random(min(STEP_CHUNK, cfg.t - t0)) for g in gens])
            for k in range(draws.shape[1]):
                s = np.where(draws[:, k] < p_to_L[s], after_L[s], after_R[s])
        out[start : start + len(walkers)] = s
    return out


def empirical_distribution(model: PathCRWModel, cfg: SimConfig) -> np.ndarray:
    """Fraction of walkers at each vertex after ``cfg.t`` steps."""
    s = final_states(model, cfg)
    counts = np.bincount(s // 2, minlength=model.n + 1)
    return counts / cfg.walkers


def evolve_dense(model: PathCRWModel, phi, t: int) -> np.ndarray:
    """``U**t phi`` by ``t`` repeated applications of ``U``."""
    psi = _check_dim(model, phi).copy()
    if not is_probability_state(psi):
        raise NotAProbabilityState("evolve_dense expects a probability state")
    for _ in range(int(t)):
        psi = apply_U(model, psi)
    return psi


def evolve_dense_marginals(model: PathCRWModel, phi, t: int) -> np.ndarray:
    """Vertex marginal at every time ``0..t`` as an array of shape ``(t+1, n+1)``."""
    psi = _check_dim(model, phi).copy()
    out = np.empty((int(t) + 1, model.n + 1))
    out[0] = marginal(psi)
    for k in range(1, int(t) + 1):
        psi = apply_U(model, psi)
        out[k] = psi.reshape(-1, 2).sum(axis=1)
    return out


def total_variation(p, q) -> float:
    return 0.5 * float(np.abs(np.asarray(p) - np.asarray(q)).sum())


def histogram_csv(probs) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["vertex", "probability"])
    for x, p in enumerate(probs):
        w.writerow([x, f"{p:.15g}"])
    return buf.getvalue()


def histogram_json(probs) -> str:
    return json.dumps({"vertex": list(range(len(probs))), "probability": [float(p) for p in probs]})
