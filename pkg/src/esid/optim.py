"""Projections and first-order ascent on products of probability simplices.

The feasible sets used throughout are slices

    S = { J >= 0 : sum_u J[u, :] @ M = q }

of a (joint) simplex.  With ``M`` the eavesdropper matrix this is the stealth
polytope lifted to P_{UX}; with ``M`` a column of ones it is the plain simplex.
Euclidean projection onto S is computed through its low-dimensional dual
(one multiplier per column of ``M``) by a damped semismooth Newton method.
"""
from __future__ import annotations

import itertools
import math
from typing import Callable, Optional, Tuple

import numpy as np
from scipy.optimize import linprog

from .errors import InfeasibleStealth

# Relative singular-value cutoff for the constraint span.
SVD_CUTOFF = 1e-10

ValueGrad = Callable[[np.ndarray], Tuple[float, np.ndarray]]


def project_simplex(v: np.ndarray) -> np.ndarray:
    """Euclidean projection of a vector onto the probability simplex."""
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    k = np.arange(1, v.size + 1)
    rho = np.nonzero(u - css / k > 0)[0][-1]
    return np.maximum(v - css[rho] / (rho + 1), 0.0)


def project_rows(c: np.ndarray) -> np.ndarray:
    """Project every row of ``c`` onto the simplex."""
    return np.vstack([project_simplex(r) for r in c])


class Slice:
    """The polytope {J >= 0 : J.sum(0) @ m = q} over matrices with ``m.shape[0]`` columns."""

    def __init__(self, m: np.ndarray, q: np.ndarray):
        self.m = np.asarray(m, dtype=float)
        self.q = np.asarray(q, dtype=float)
        # Newton runs on an orthonormal basis of the constraint span; nearly
        # dependent constraints would otherwise make its Hessian singular.
        u, sv, vt = np.linalg.svd(self.m, full_matrices=False)
        keep = sv > SVD_CUTOFF * sv[0]
        self._basis = u[:, keep]
        self._target = (self.q @ vt[keep].T) / sv[keep]
        # a dual direction that shifts every entry equally, when one exists
        shift, *_ = np.linalg.lstsq(self._basis, np.ones(self.m.shape[0]), rcond=None)
        fits = np.allclose(self._basis @ shift, 1.0, atol=1e-10)
        self._shift = shift if fits else None
        # dual of the previous projection; nearby inputs have nearby duals
        self._warm = np.zeros(self._basis.shape[1])

    @classmethod
    def simplex(cls, nx: int) -> "Slice":
        return cls(np.ones((nx, 1)), np.ones(1))

    def residual(self, j: np.ndarray) -> float:
        return float(np.max(np.abs(j.reshape(-1, self.m.shape[0]).sum(axis=0) @ self.m - self.q)))

    def project(self, c: np.ndarray, max_iter: int = 200) -> np.ndarray:
        shape = c.shape
        c2 = c.reshape(-1, self.m.shape[0])
        warm = self._warm if np.all(np.isfinite(self._warm)) else np.zeros_like(self._warm)
        try:
            lam, j = self._newton(c2, warm, max_iter)
        except InfeasibleStealth:
            if not np.any(warm):
                raise
            lam, j = self._newton(c2, np.zeros_like(warm), max_iter)
        self._warm = lam
        return j.reshape(shape)

    def _newton(self, c2: np.ndarray, lam: np.ndarray, max_iter: int):
        """Semismooth Newton on the dual with an exact line search."""
        m, q = self._basis, self._target
        r = m.shape[1]
        if self._shift is not None:
            # fix the total mass exactly first; Newton then only redistributes it
            total = float(q @ self._shift)
            lam = lam + self._shift * _mass_shift((c2 + m @ lam).ravel(), total)
        z = c2 + m @ lam
        # rounding in z = c + m @ lam limits the attainable residual
        floor = 1e-15 * (1.0 + float(np.max(np.abs(c2))))
        previous = math.inf
        for _ in range(max_iter):
            j = np.maximum(z, 0.0)
            g = j.sum(axis=0) @ m - q
            gnorm = float(np.max(np.abs(g)))
            if gnorm <= floor or (gnorm < 1e-12 and gnorm >= previous):
                break
            previous = gnorm
            active = (z > 0).sum(axis=0).astype(float)
            h = m.T @ (active[:, None] * m)
            tau = 1e-12 + 1e-3 * min(1.0, gnorm)
            d = np.linalg.solve(h + tau * np.eye(r), -g)
            a = np.broadcast_to(m @ d, z.shape)
            t = _exact_step(z.ravel(), a.ravel(), float(q @ d))
            lam = lam + t * d
            z = c2 + m @ lam
            if not np.all(np.isfinite(lam)) or np.max(np.abs(lam)) > 1e12:
                raise InfeasibleStealth("projection dual diverged; the slice is empty")
        j = np.maximum(z, 0.0)
        if self.residual(j) > 1e-9:
            raise InfeasibleStealth(f"could not reach the slice (residual {self.residual(j):.3g})")
        return lam, j


    @property
    def dual_size(self) -> int:
        return self._basis.shape[1]

    def project_batch(self, c: np.ndarray, lam0: Optional[np.ndarray] = None, max_iter: int = 200):
        """Project every ``c[b]`` (any shape with ``m.shape[0]`` trailing columns).

        Returns ``(J, lam, ok)``; ``lam`` are the duals (for warm starts) and
        ``ok[b]`` is false where the projection could not reach the slice.
        """
        nb = c.shape[0]
        c2 = c.reshape(nb, -1, self.m.shape[0])
        if lam0 is None:
            lam0 = np.zeros((nb, self.dual_size))
        lam0 = np.where(np.isfinite(lam0), lam0, 0.0)
        lam, j, ok = self._newton_batch(c2, lam0, max_iter)
        retry = np.flatnonzero(~ok & np.any(lam0 != 0, axis=1))
        if retry.size:
            lam_r, j_r, ok_r = self._newton_batch(c2[retry], np.zeros((retry.size, self.dual_size)), max_iter)
            lam[retry], j[retry], ok[retry] = lam_r, j_r, ok_r
        return j.reshape(c.shape), lam, ok

    def _newton_batch(self, c2: np.ndarray, lam: np.ndarray, max_iter: int):
        m, q = self._basis, self._target
        nb, r = lam.shape
        lam = lam.copy()
        if self._shift is not None:
            total = float(q @ self._shift)
            z = c2 + (lam @ m.T)[:, None, :]
            t = _mass_shift_batch(z.reshape(nb, -1), total)
            lam += t[:, None] * self._shift[None, :]
        floor = 1e-15 * (1.0 + np.max(np.abs(c2.reshape(nb, -1)), axis=1))
        previous = np.full(nb, np.inf)
        running = np.ones(nb, dtype=bool)
        failed = np.zeros(nb, dtype=bool)
        eye = np.eye(r)
        for _ in range(max_iter):
            idx = np.flatnonzero(running)
            if idx.size == 0:
                break
            z = c2[idx] + (lam[idx] @ m.T)[:, None, :]
            g = np.maximum(z, 0.0).sum(axis=1) @ m - q
            gnorm = np.max(np.abs(g), axis=1)
            stop = (gnorm <= floor[idx]) | ((gnorm < 1e-12) & (gnorm >= previous[idx]))
            previous[idx] = gnorm
            running[idx[stop]] = False
            go = ~stop
            idx, z, g, gnorm = idx[go], z[go], g[go], gnorm[go]
            if idx.size == 0:
                break
            active = (z > 0).sum(axis=1).astype(float)
            h = np.einsum("xr,bx,xs->brs", m, active, m)
            tau = 1e-12 + 1e-3 * np.minimum(1.0, gnorm)
            d = np.linalg.solve(h + tau[:, None, None] * eye, -g[:, :, None])[:, :, 0]
            a = np.broadcast_to((d @ m.T)[:, None, :], z.shape)
            t = _exact_step_batch(z.reshape(idx.size, -1), a.reshape(idx.size, -1), d @ q)
            bad = ~np.isfinite(t)
            lam[idx[~bad]] += t[~bad, None] * d[~bad]
            bad |= ~np.all(np.isfinite(lam[idx]), axis=1) | (np.max(np.abs(lam[idx]), axis=1) > 1e12)
            failed[idx[bad]] = True
            running[idx[bad]] = False
        j = np.maximum(c2 + (lam @ m.T)[:, None, :], 0.0)
        res = np.max(np.abs(j.sum(axis=1) @ self.m - self.q), axis=1)
        ok = ~failed & (res <= 1e-9)
        return lam, j, ok


def _exact_step(z: np.ndarray, a: np.ndarray, c0: float) -> float:
    """argmin over t >= 0 of 0.5 * sum(max(z + t a, 0)^2) - t c0.

    The derivative sum(a * max(z + t a, 0)) - c0 is non-decreasing and
    piecewise linear in t, so its root is found exactly between breakpoints.
    """
    with np.errstate(divide="ignore", invalid="ignore"):
        bp = np.where(a != 0, -z / a, np.inf)
    # entries active just after t = 0
    active = (z > 0) | ((z == 0) & (a > 0))
    lin = float(np.sum((a * z)[active]))  # sum a z over the active set
    quad = float(np.sum((a * a)[active]))  # sum a^2 over the active set
    events = np.flatnonzero((bp > 0) & np.isfinite(bp))
    events = events[np.argsort(bp[events], kind="stable")]
    t_lo = 0.0
    for i in events:
        t_hi = float(bp[i])
        if lin + t_hi * quad - c0 >= 0.0 and quad > 0:
            return max(t_lo, (c0 - lin) / quad)
        # crossing the breakpoint switches entry i on (a > 0) or off (a < 0)
        sign = 1.0 if a[i] > 0 else -1.0
        lin += sign * a[i] * z[i]
        quad += sign * a[i] * a[i]
        t_lo = t_hi
    if quad <= 0:
        raise InfeasibleStealth("projection dual is unbounded; the slice is empty")
    return max(t_lo, (c0 - lin) / quad)


def _mass_shift(z: np.ndarray, total: float) -> float:
    """The scalar t with sum(max(z + t, 0)) = total (``total`` > 0)."""
    u = np.sort(z)[::-1]
    css = np.cumsum(u) - total
    k = np.arange(1, z.size + 1)
    rho = np.nonzero(u - css / k > 0)[0][-1]
    return -css[rho] / (rho + 1)


def _exact_step_batch(z: np.ndarray, a: np.ndarray, c0: np.ndarray) -> np.ndarray:
    """Row-wise ``_exact_step``; NaN where the dual is unbounded along ``a``."""
    nb = z.shape[0]
    with np.errstate(divide="ignore", invalid="ignore"):
        bp = np.where(a != 0, -z / a, np.inf)
    bp = np.where(bp > 0, bp, np.inf)
    active = (z > 0) | ((z == 0) & (a > 0))
    lin0 = np.sum(np.where(active, a * z, 0.0), axis=1)
    quad0 = np.sum(np.where(active, a * a, 0.0), axis=1)
    order = np.argsort(bp, axis=1, kind="stable")
    bps = np.take_along_axis(bp, order, axis=1)
    sign = np.where(a > 0, 1.0, -1.0)
    finite = np.isfinite(bps)
    dl = np.where(finite, np.take_along_axis(sign * a * z, order, axis=1), 0.0)
    dq = np.where(finite, np.take_along_axis(sign * a * a, order, axis=1), 0.0)
    # sentinel column: the segment after the last breakpoint
    bps = np.hstack([bps, np.full((nb, 1), np.inf)])
    dl = np.hstack([dl, np.zeros((nb, 1))])
    dq = np.hstack([dq, np.zeros((nb, 1))])
    lin = lin0[:, None] + np.cumsum(dl, axis=1) - dl
    quad = quad0[:, None] + np.cumsum(dq, axis=1) - dq
    with np.errstate(invalid="ignore", over="ignore"):
        reach = np.where(np.isfinite(bps), lin + bps * quad - c0[:, None] >= 0.0, True)
    cond = (quad > 1e-300) & reach
    has = cond.any(axis=1)
    k = np.argmax(cond, axis=1)
    rows = np.arange(nb)
    t_lo = np.where(k > 0, bps[rows, np.maximum(k - 1, 0)], 0.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.maximum(t_lo, (c0 - lin[rows, k]) / quad[rows, k])
    return np.where(has, t, np.nan)


def _mass_shift_batch(z: np.ndarray, total: float) -> np.ndarray:
    u = -np.sort(-z, axis=1)
    css = np.cumsum(u, axis=1) - total
    k = np.arange(1, z.shape[1] + 1)
    cond = u - css / k > 0
    rho = z.shape[1] - 1 - np.argmax(cond[:, ::-1], axis=1)
    return -css[np.arange(z.shape[0]), rho] / (rho + 1)


def feasible_point(m: np.ndarray, q: np.ndarray, tol: float = 1e-9) -> Optional[np.ndarray]:
    """A distribution p with p @ m = q, or ``None`` if the LP says there is none."""
    nx = m.shape[0]
    res = linprog(
        np.zeros(nx),
        A_eq=np.vstack([m.T, np.ones((1, nx))]),
        b_eq=np.concatenate([q, [1.0]]),
        bounds=[(0, None)] * nx,
        method="highs",
    )
    if res.status != 0:
        return None
    p = np.clip(res.x, 0.0, None)
    p /= p.sum()
    if np.max(np.abs(p @ m - q)) > tol:
        return None
    return p


def simplex_grid(dim: int, resolution: int) -> np.ndarray:
    """All points of the simplex in R^dim with coordinates in (1/resolution) Z."""
    pts = []
    for bars in itertools.combinations(range(resolution + dim - 1), dim - 1):
        prev = -1
        counts = []
        for b in bars:
            counts.append(b - prev - 1)
            prev = b
        counts.append(resolution + dim - 2 - prev)
        pts.append(counts)
    return np.asarray(pts, dtype=float) / resolution


def grid_size(dim: int, resolution: int) -> int:
    return math.comb(resolution + dim - 1, dim - 1)


def ascend(
    x0: np.ndarray,
    fun: ValueGrad,
    project: Callable[[np.ndarray], np.ndarray],
    max_iters: int = 2000,
    tol: float = 1e-9,
    step: float = 0.1,
    stop: Optional[Callable[[np.ndarray, float], bool]] = None,
) -> Tuple[np.ndarray, float]:
    """Projected gradient ascent with Armijo backtracking (halving) and step growth.

    Terminates when a projected step moves less than ``tol`` (max-abs) or
    when ``stop(x, f)`` returns true.
    """
    x = x0
    f, g = fun(x)
    s = step
    for _ in range(max_iters):
        if stop is not None and stop(x, f):
            break
        while True:
            try:
                y = project(x + s * g)
            except InfeasibleStealth:
                # far-off points of ill-conditioned slices; a shorter step is closer
                if s < 1e-14:
                    return x, f
                s *= 0.5
                continue
            d = y - x
            fy, gy = fun(y)
            if fy >= f + 1e-4 * float(np.sum(g * d)) or s < 1e-14:
                break
            s *= 0.5
        moved = float(np.max(np.abs(d)))
        if fy >= f:
            x, f, g = y, fy, gy
        if moved < tol or s < 1e-14:
            break
        s = min(s * 2.0, 1e3)
    return x, f


BatchValueGrad = Callable[[np.ndarray, np.ndarray], Tuple[np.ndarray, np.ndarray]]


def ascend_batch(
    x0: np.ndarray,
    fun: BatchValueGrad,
    sl: Slice,
    max_iters: int = 2000,
    tol: float = 1e-9,
    step: float = 0.1,
    stop: Optional[Callable[[np.ndarray, np.ndarray, np.ndarray], np.ndarray]] = None,
) -> Tuple[np.ndarray, np.ndarray]:
    """``ascend`` run independently on every ``x0[b]``, vectorized across the batch.

    ``fun(x, idx)`` evaluates instances ``idx`` (rows of ``x``), returning
    values and gradients; ``stop(x, f, idx)`` returns a mask of instances to
    freeze.  Projections go onto ``sl`` with per-instance warm starts.
    """
    nb = x0.shape[0]
    x = x0.copy()
    every = np.arange(nb)
    f, g = fun(x, every)
    f, g = np.array(f, dtype=float), np.array(g, dtype=float)
    s = np.full(nb, float(step))
    iters = np.zeros(nb, dtype=int)
    lam = np.zeros((nb, sl.dual_size))
    done = np.zeros(nb, dtype=bool)
    if stop is not None:
        done |= stop(x, f, every)
    expand = (slice(None),) + (None,) * (x.ndim - 1)
    while True:
        idx = np.flatnonzero(~done)
        if idx.size == 0:
            break
        y, lam_y, ok = sl.project_batch(x[idx] + s[idx][expand] * g[idx], lam[idx])
        lam[idx[ok]] = lam_y[ok]
        fy, gy = fun(y, idx)
        d = y - x[idx]
        axes = tuple(range(1, x.ndim))
        tiny = s[idx] < 1e-14
        armijo = ok & ((fy >= f[idx] + 1e-4 * np.sum(g[idx] * d, axis=axes)) | tiny)
        # rejected steps shrink; a failed projection at a vanishing step ends the run
        rej = idx[~armijo]
        s[rej] *= 0.5
        done[idx[~armijo & ~ok & tiny]] = True
        acc = np.flatnonzero(armijo)
        if acc.size == 0:
            continue
        ia = idx[acc]
        moved = np.max(np.abs(d[acc]).reshape(acc.size, -1), axis=1)
        better = fy[acc] >= f[ia]
        ib = ia[better]
        x[ib], f[ib], g[ib] = y[acc][better], fy[acc][better], gy[acc][better]
        iters[ia] += 1
        finish = (moved < tol) | (s[ia] < 1e-14) | (iters[ia] >= max_iters)
        done[ia[finish]] = True
        s[ia] = np.minimum(s[ia] * 2.0, 1e3)
        if stop is not None and ib.size:
            done[ib[stop(x[ib], f[ib], ib)]] = True
    return x, f
