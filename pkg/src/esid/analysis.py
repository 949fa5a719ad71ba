"""Structural comparisons of the legitimate and eavesdropper channels.

``check_degraded`` decides stochastic degradedness with an exact linear
program (minimise the worst entrywise defect of ``W_Y @ V - W_Z`` over
row-stochastic ``V``).  ``check_more_capable`` searches the input simplex for
a distribution under which the eavesdropper learns more than the legitimate
receiver.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.optimize import linprog

from .errors import AlphabetTooLarge, DimensionMismatch, EsidError
from .optim import Slice, ascend, simplex_grid
from .probability import Channel, Distribution, channel

DEGRADED_TOL = 1e-7
MORE_CAPABLE_TOL = 1e-9
MAX_GRID_ALPHABET = 6
# Subdivisions per simplex edge by input alphabet size.
GRID_RESOLUTION = {1: 1, 2: 64, 3: 64, 4: 24, 5: 16, 6: 10}


@dataclass(frozen=True, eq=False)
class DegradednessVerdict:
    """Outcome of the degradedness test.

    ``status`` is ``"degraded"``, ``"not_degraded"`` or ``"inconclusive"``
    (the residual lies just above the tolerance, in ``(tol, 10 tol]``).
    """

    status: str
    witness: Optional[Channel]
    residual: float

    @property
    def degraded(self) -> bool:
        return self.status == "degraded"

    def to_dict(self) -> dict:
        return {
            "status": self.status,
            "degraded": self.degraded,
            "residual": self.residual,
            "witness": None if self.witness is None else self.witness.rows.tolist(),
        }


@dataclass(frozen=True, eq=False)
class MoreCapableVerdict:
    more_capable: bool
    min_gap: float
    certificate: Distribution

    def to_dict(self) -> dict:
        return {
            "more_capable": self.more_capable,
            "min_gap": self.min_gap,
            "certificate": self.certificate.mass.tolist(),
        }


def _shared_input(legit: Channel, eaves: Channel) -> None:
    if legit.input != eaves.input:
        raise DimensionMismatch("legitimate and eavesdropper channels need the same input alphabet")


def _witness_lp(wy: np.ndarray, wz: np.ndarray) -> np.ndarray:
    """Row-stochastic V minimising max |wy @ V - wz| (variables: V row-major, then t)."""
    nx, ny = wy.shape
    nz = wz.shape[1]
    nv = ny * nz
    # (wy @ V)[x, z] = sum_y wy[x, y] V[y, z]
    a = np.zeros((nx * nz, nv))
    for x in range(nx):
        for z in range(nz):
            a[x * nz + z, np.arange(ny) * nz + z] = wy[x]
    b = wz.ravel()
    ones = np.ones((nx * nz, 1))
    a_ub = np.vstack([np.hstack([a, -ones]), np.hstack([-a, -ones])])
    b_ub = np.concatenate([b, -b])
    a_eq = np.zeros((ny, nv + 1))
    for y in range(ny):
        a_eq[y, y * nz:(y + 1) * nz] = 1.0
    cost = np.zeros(nv + 1)
    cost[-1] = 1.0
    res = linprog(
        cost, A_ub=a_ub, b_ub=b_ub, A_eq=a_eq, b_eq=np.ones(ny),
        bounds=[(0, None)] * (nv + 1), method="highs",
    )
    if res.status != 0:
        raise EsidError(f"degradedness LP failed: {res.message}")
    v = np.clip(res.x[:nv].reshape(ny, nz), 0.0, None)
    return v / v.sum(axis=1, keepdims=True)


def check_degraded(legit: Channel, eaves: Channel, tol: float = DEGRADED_TOL) -> DegradednessVerdict:
    """Is ``eaves`` a stochastic degradation of ``legit``?  Returns the best witness W_{Z|Y}."""
    _shared_input(legit, eaves)
    wy, wz = np.asarray(legit.rows), np.asarray(eaves.rows)
    v = _witness_lp(wy, wz)
    residual = float(np.max(np.abs(wy @ v - wz)))
    witness = channel(v, legit.output, eaves.output)
    if residual <= tol:
        return DegradednessVerdict("degraded", witness, residual)
    if residual <= 10.0 * tol:
        return DegradednessVerdict("inconclusive", witness, residual)
    return DegradednessVerdict("not_degraded", witness, residual)


# --------------------------------------------------------------------------
# more capable


def _wlogw(w: np.ndarray) -> np.ndarray:
    out = np.zeros_like(w)
    s = w > 0
    out[s] = w[s] * np.log(w[s])
    return out.sum(axis=1)


def _mutual_information_rows(p: np.ndarray, w: np.ndarray, wlogw: np.ndarray) -> np.ndarray:
    """I(X;Y) in nats for every row of ``p`` at once."""
    out = p @ w
    h_out = np.where(out > 0, out * np.log(np.where(out > 0, out, 1.0)), 0.0).sum(axis=-1)
    return p @ wlogw - h_out


def _gap_and_gradient(p, wy, wz, ly, lz):
    def grad(w, lw):
        out = p @ w
        return lw - w @ np.log(np.where(out > 0, out, 1e-300))

    val = _mutual_information_rows(p, wy, ly) - _mutual_information_rows(p, wz, lz)
    return float(val), grad(wy, ly) - grad(wz, lz)


def default_grid_resolution(nx: int) -> int:
    if nx > MAX_GRID_ALPHABET:
        raise AlphabetTooLarge(f"grid search supports at most {MAX_GRID_ALPHABET} inputs, got {nx}")
    return GRID_RESOLUTION[nx]


def check_more_capable(
    legit: Channel,
    eaves: Channel,
    grid_resolution: Optional[int] = None,
    restarts: int = 8,
    tol: float = MORE_CAPABLE_TOL,
) -> MoreCapableVerdict:
    """Minimise I(X;Y) - I(X;Z) over input laws; more capable iff the minimum is >= -tol.

    The search is a full simplex grid followed by projected-gradient descent
    from the ``restarts`` best grid points.  The gap is reported in nats.
    """
    _shared_input(legit, eaves)
    nx = legit.input.size
    if nx > MAX_GRID_ALPHABET:
        raise AlphabetTooLarge(f"grid search supports at most {MAX_GRID_ALPHABET} inputs, got {nx}")
    resolution = grid_resolution or default_grid_resolution(nx)
    wy, wz = np.asarray(legit.rows), np.asarray(eaves.rows)
    ly, lz = _wlogw(wy), _wlogw(wz)

    grid = simplex_grid(nx, resolution)
    gaps = _mutual_information_rows(grid, wy, ly) - _mutual_information_rows(grid, wz, lz)
    order = np.lexsort((np.arange(len(gaps)), gaps))
    best_gap = float(gaps[order[0]])
    best_p = grid[order[0]]

    simplex = Slice.simplex(nx)

    def neg_gap(p):
        v, g = _gap_and_gradient(p, wy, wz, ly, lz)
        return -v, -g

    for i in order[: max(0, restarts)]:
        p, f = ascend(grid[i], neg_gap, simplex.project)
        value = -f
        if value < best_gap or (value == best_gap and tuple(p) < tuple(best_p)):
            best_gap, best_p = value, p
    best_p = np.clip(best_p, 0.0, None)
    best_p = best_p / best_p.sum()
    return MoreCapableVerdict(best_gap >= -tol, best_gap, Distribution(legit.input, best_p))
