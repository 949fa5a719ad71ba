"""Numerical evaluation of the ESID capacity bounds.

Every bound is a maximization over the stealth polytope

    { P_{UX} : P_X W_{Z|X} = Q_Z }

of a mutual-information objective, optionally subject to the secrecy
condition I(U;Y) >= I(U;Z).  The auxiliary pair is optimized as a joint
matrix J = P_{UX} (rows u, columns x); Y and Z are always reached through
J @ W, so U - X - YZ holds by construction and the stealth constraint is
linear in J.

The search is multi-start projected gradient ascent, vectorized across
starts.  The non-convex secrecy condition is handled by an augmented
Lagrangian, followed by a short restoration ascent on the violation and a
feasibility filter.  Random starts are screened with a short solve and only
the most promising are polished.  Maximizers under-estimate a max-form bound,
so the lower bounds are best values found; the secrecy-constrained upper
bound reduces exactly to a concave program (see ``upper_bound_thm1``).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import List, Optional, Sequence, Union

import numpy as np

from .errors import DimensionMismatch, ValidationError
from .measures import BaseLike, LogBase, kl_nats
from .optim import Slice, ascend_batch, feasible_point, grid_size, simplex_grid
from .probability import Alphabet, Channel, Distribution, JointDistribution, WiretapChannel

TINY = 1e-300
FEASIBLE_GAP = -1e-9
FEASIBLE_STEALTH = 1e-7
AL_ROUNDS = 30
# Each augmented-Lagrangian subproblem is solved only approximately.
AL_INNER_ITERS = 300
# Random starts are first screened with a short solve; only the most
# promising ones are polished to full accuracy.
SCREEN_ROUNDS = 6
SCREEN_ITERS = 60
POLISH_FRACTION = 8
POLISH_MIN = 4


@dataclass(frozen=True)
class StealthConstraint:
    """Target output law ``q_z`` for the eavesdropper, exact or within a KL slack."""

    q_z: Distribution
    mode: str = "exact"
    slack: float = 0.0

    def __post_init__(self):
        if self.mode == "exact":
            if self.slack != 0:
                raise ValidationError("exact stealth constraints carry no slack")
        elif self.mode == "relaxed":
            if not self.slack > 0:
                raise ValidationError("relaxed stealth constraints need a positive slack")
        else:
            raise ValidationError(f"unknown stealth mode {self.mode!r}")

    @classmethod
    def relaxed(cls, q_z: Distribution, slack: float) -> "StealthConstraint":
        return cls(q_z, "relaxed", float(slack))


@dataclass(frozen=True)
class OptimizerConfig:
    restarts: int = 64
    max_iters: int = 2000
    step_init: float = 0.1
    tol: float = 1e-9
    seed: int = 0
    u_size: Optional[int] = None  # None means |X| + 2
    penalty_init: float = 1.0
    penalty_rounds: int = 3
    zero_tol: float = 1e-6

    def __post_init__(self):
        for name in ("restarts", "max_iters"):
            if getattr(self, name) < 1:
                raise ValidationError(f"{name} must be positive")
        if self.step_init <= 0 or self.tol <= 0:
            raise ValidationError("step_init and tol must be positive")
        if self.seed < 0:
            raise ValidationError("seed must be non-negative")
        if self.u_size is not None and self.u_size < 1:
            raise ValidationError("u_size must be positive")

    def aux_size(self, nx: int) -> int:
        return nx + 2 if self.u_size is None else self.u_size


@dataclass(frozen=True, eq=False)
class BoundResult:
    bound: str
    value: float
    argmax: Optional[Union[Distribution, JointDistribution]]
    stealth_residual: float
    secrecy_gap: float
    status: str  # "ok" | "infeasible" | "zero_capacity"
    base: LogBase = LogBase.NATURAL

    def to_dict(self) -> dict:
        return {
            "bound": self.bound,
            "value": self.value,
            "base": self.base.value,
            "argmax": _serialize_argmax(self.argmax),
            "stealth_residual": self.stealth_residual,
            "secrecy_gap": self.secrecy_gap,
            "status": self.status,
        }


def _serialize_argmax(a) -> Optional[dict]:
    if a is None:
        return None
    if isinstance(a, JointDistribution):
        return {"left": list(a.left.symbols), "right": list(a.right.symbols), "mass": a.mass.tolist()}
    return {"alphabet": list(a.alphabet.symbols), "mass": a.mass.tolist()}


# --------------------------------------------------------------------------
# mutual-information kernels (nats) on batches of joint matrices J = P_{UX}
# with shape (batch, |U|, |X|)


def _log(a: np.ndarray) -> np.ndarray:
    return np.log(np.maximum(a, TINY))


def _mi_u(j: np.ndarray, w: np.ndarray):
    """I(U;Y) for P_{UY} = J @ w, and its gradient in J (up to an additive constant)."""
    pu = j.sum(axis=2)
    puy = j @ w
    lr = _log(puy) - _log(puy.sum(axis=1))[:, None, :]
    lpu = _log(pu)[:, :, None]
    val = np.sum(puy * (lr - lpu), axis=(1, 2))
    return val, lr @ w.T - lpu


def _mi_x(j: np.ndarray, w: np.ndarray, wlogw: np.ndarray):
    """I(X;Y) for P_X = column sums of J, with its gradient broadcast over rows."""
    px = j.sum(axis=1)
    gx = wlogw[None, :] - _log(px @ w) @ w.T
    return np.sum(px * gx, axis=1), np.broadcast_to(gx[:, None, :], j.shape)


def _wlogw(w: np.ndarray) -> np.ndarray:
    return np.sum(np.where(w > 0, w * _log(w), 0.0), axis=1)


def _kl_rows(pz: np.ndarray, q: np.ndarray):
    """Row-wise D(pz || q) with its gradient in pz; +inf off the support of q."""
    d = np.sum(np.where(pz > 0, pz * (_log(pz) - _log(q)), 0.0), axis=1)
    d = np.where(np.any((pz > 0) & (q <= 0), axis=1), np.inf, d)
    return d, _log(pz) - _log(q)


class _Program:
    """One instance of  max f(J)  s.t.  J in slice,  [secrecy gap >= 0],  [KL stealth <= slack].

    Every method works on a batch of candidates at once.
    """

    def __init__(self, wy, wz, k, objective, secrecy, stealth: Optional[StealthConstraint]):
        self.wy, self.wz, self.k = wy, wz, k
        self.nx = wy.shape[0]
        self.objective, self.secrecy = objective, secrecy
        self.wlogw_y, self.wlogw_z = _wlogw(wy), _wlogw(wz)
        self.relaxed = None
        if stealth is None:
            self.slice = Slice.simplex(self.nx)
        elif stealth.mode == "exact":
            self.slice = Slice(wz, stealth.q_z.mass)
        else:
            self.slice = Slice.simplex(self.nx)
            self.relaxed = (stealth.q_z.mass, stealth.slack)
        self.ncons = (secrecy is not None) + (self.relaxed is not None)

    @property
    def constrained(self) -> bool:
        return self.ncons > 0

    def project(self, j: np.ndarray):
        """Project a batch; returns (J, ok)."""
        out, _, ok = self.slice.project_batch(j)
        return out, ok

    def _parts(self, j):
        """Objective and constraint values/gradients."""
        cache = {}

        def u(which):
            if which not in cache:
                cache[which] = _mi_u(j, self.wy if which == "y" else self.wz)
            return cache[which]

        def x(which):
            key = "x" + which
            if key not in cache:
                w, wl = (self.wy, self.wlogw_y) if which == "y" else (self.wz, self.wlogw_z)
                cache[key] = _mi_x(j, w, wl)
            return cache[key]

        if self.objective == "ixy":
            f, gf = x("y")
        elif self.objective == "iuy":
            f, gf = u("y")
        else:  # "gap"
            (a, ga), (b, gb) = u("y"), u("z")
            f, gf = a - b, ga - gb
        cons = []
        if self.secrecy == "x":
            (a, ga), (b, gb) = x("y"), x("z")
            cons.append((a - b, ga - gb))
        elif self.secrecy == "u":
            (a, ga), (b, gb) = u("y"), u("z")
            cons.append((a - b, ga - gb))
        if self.relaxed is not None:
            q, slack = self.relaxed
            d, dg = _kl_rows(j.sum(axis=1) @ self.wz, q)
            g = -(dg @ self.wz.T)
            c = np.where(np.isfinite(d), slack - d, -1e6)
            cons.append((c, np.broadcast_to(g[:, None, :], j.shape)))
        return f, gf, cons

    def penalized(self, rho: np.ndarray, mult: np.ndarray):
        """Augmented Lagrangian of the constraints c_i >= 0 (maximization form).

        ``rho`` and ``mult`` hold one penalty and multiplier row per instance;
        the returned ``fun(J, idx)`` evaluates instances ``idx``.
        """

        def fun(j, idx):
            f, gf, cons = self._parts(j)
            f = np.array(f, dtype=float)
            grad = np.array(gf, dtype=float)
            r = rho[idx]
            for i, (c, gc) in enumerate(cons):
                mu = mult[idx, i]
                t = np.maximum(0.0, mu - r * c)
                f -= (t * t - mu * mu) / (2.0 * r)
                grad += t[:, None, None] * gc
            return f, grad

        return fun

    def constraint_values(self, j) -> np.ndarray:
        cons = self._parts(j)[2]
        return np.stack([c for c, _ in cons], axis=1) if cons else np.zeros((j.shape[0], 0))

    def violation(self, margin: float = 1e-12):
        def fun(j, idx):
            _, _, cons = self._parts(j)
            v = np.zeros(j.shape[0])
            grad = np.zeros_like(j)
            for c, gc in cons:
                low = c < margin
                v += np.where(low, c - margin, 0.0)
                grad += low[:, None, None] * gc
            return v, grad

        return fun

    def assess(self, j):
        f, _, cons = self._parts(j)
        gap = cons[0][0] if self.secrecy else np.full(j.shape[0], math.inf)
        res = np.max(np.abs(j.sum(axis=1) @ self.slice.m - self.slice.q), axis=1)
        if self.relaxed is not None:
            q, slack = self.relaxed
            d, _ = _kl_rows(j.sum(axis=1) @ self.wz, q)
            res = np.maximum(res, np.maximum(0.0, d - slack))
        return f, gap, res


@dataclass
class _Candidate:
    f: float
    gap: float
    residual: float
    j: np.ndarray

    @property
    def feasible(self) -> bool:
        return self.gap >= FEASIBLE_GAP and self.residual <= FEASIBLE_STEALTH

    def key(self):
        # max by value; ties broken towards the lexicographically smallest argmax
        return (self.f, tuple(-self.j.ravel()))


def _candidates(prog: _Program, j: np.ndarray) -> List[_Candidate]:
    f, gap, res = prog.assess(j)
    return [_Candidate(float(f[i]), float(gap[i]), float(res[i]), j[i]) for i in range(j.shape[0])]


def _refine(
    prog: _Program,
    j: np.ndarray,
    cfg: OptimizerConfig,
    rounds: int = AL_ROUNDS,
    inner: int = AL_INNER_ITERS,
    restore: bool = True,
) -> np.ndarray:
    """Run the augmented-Lagrangian ascent on every candidate of the batch ``j``."""
    nb = j.shape[0]
    j = np.array(j, dtype=float)
    if not prog.constrained:
        fun = prog.penalized(np.ones(nb), np.zeros((nb, 0)))
        j, _ = ascend_batch(j, fun, prog.slice, cfg.max_iters, cfg.tol, cfg.step_init)
        return j
    rho = np.full(nb, cfg.penalty_init)
    rho_cap = cfg.penalty_init * 10.0 ** (cfg.penalty_rounds - 1) * 1e4
    mult = np.zeros((nb, prog.ncons))
    last_viol = np.full(nb, math.inf)
    running = np.ones(nb, dtype=bool)
    inner = max(1, min(cfg.max_iters, inner))
    for _ in range(rounds):
        idx = np.flatnonzero(running)
        if idx.size == 0:
            break
        pen = prog.penalized(rho, mult)
        j[idx], _ = ascend_batch(
            j[idx], lambda x, li, pen=pen, idx=idx: pen(x, idx[li]), prog.slice, inner, cfg.tol, cfg.step_init
        )
        cons = prog.constraint_values(j[idx])
        mult[idx] = np.maximum(0.0, mult[idx] - rho[idx, None] * cons)
        viol = np.maximum(0.0, -np.min(cons, axis=1))
        done = (viol <= 1e-12) & np.all((np.abs(cons) < 1e-9) | (mult[idx] == 0), axis=1)
        grow = ~done & (viol > 0.25 * last_viol[idx])
        rho[idx[grow]] = np.minimum(rho[idx[grow]] * 10.0, rho_cap)
        last_viol[idx] = viol
        running[idx[done]] = False
    if not restore:
        return j
    _, gap, res = prog.assess(j)
    bad = np.flatnonzero((gap < 0) | (res > 0))
    if bad.size:
        j[bad], _ = ascend_batch(
            j[bad], prog.violation(), prog.slice, cfg.max_iters, 1e-15, cfg.step_init * 1e-3,
            stop=lambda x, v, li: v >= 0,
        )
    return j


def _random_starts(prog: _Program, cfg: OptimizerConfig) -> np.ndarray:
    raw = np.stack(
        [
            np.random.default_rng(cfg.seed + r).dirichlet(np.ones(prog.k * prog.nx)).reshape(prog.k, prog.nx)
            for r in range(cfg.restarts)
        ]
    )
    j, ok = prog.project(raw)
    return j[ok]


def _solve(prog: _Program, cfg: OptimizerConfig, seeds: Sequence[np.ndarray] = ()) -> List[_Candidate]:
    cands: List[_Candidate] = []
    # structured seeds are kept both as given and refined
    if len(seeds):
        s = np.stack(seeds)
        cands += _candidates(prog, s)
        cands += _candidates(prog, _refine(prog, s, cfg))
    starts = _random_starts(prog, cfg)
    if starts.shape[0] == 0:
        return cands
    if not prog.constrained:
        return cands + _candidates(prog, _refine(prog, starts, cfg))
    screened = _refine(prog, starts, cfg, SCREEN_ROUNDS, SCREEN_ITERS, restore=False)
    f, gap, res = prog.assess(screened)
    merit = f - 100.0 * (np.maximum(0.0, -gap) + res)
    order = np.argsort(-merit, kind="stable")
    keep = max(POLISH_MIN, -(-len(order) // POLISH_FRACTION))
    return cands + _candidates(prog, _refine(prog, screened[order[:keep]], cfg))


def _best(cands: List[_Candidate]):
    feas = [c for c in cands if c.feasible]
    if feas:
        return max(feas, key=_Candidate.key), True
    # least violating point, reported for diagnostics only
    return min(cands, key=lambda c: (max(0.0, -c.gap) + c.residual, -c.f)), False


# --------------------------------------------------------------------------
# helpers on the public types


def _arrays(w: WiretapChannel, c: Optional[StealthConstraint]):
    if c is not None and c.q_z.alphabet != w.eaves.output:
        raise DimensionMismatch("Q_Z must live on the eavesdropper output alphabet")
    return np.asarray(w.legit.rows), np.asarray(w.eaves.rows)


def _aux_alphabet(k: int) -> Alphabet:
    return Alphabet(tuple(f"u{i}" for i in range(k)))


def _joint(w: WiretapChannel, j: np.ndarray) -> JointDistribution:
    j = np.clip(j, 0.0, None)
    return JointDistribution(_aux_alphabet(j.shape[0]), w.input, j / j.sum())


def _input_dist(w: WiretapChannel, p: np.ndarray) -> Distribution:
    p = np.clip(np.asarray(p).ravel(), 0.0, None)
    return Distribution(w.input, p / p.sum())


def stealth_polytope_membership(p_x: Distribution, w_z: Channel, c: StealthConstraint) -> float:
    """Defect of P_X W_{Z|X} against the constraint (0 means member)."""
    if p_x.alphabet != w_z.input or c.q_z.alphabet != w_z.output:
        raise DimensionMismatch("P_X, W_{Z|X} and Q_Z alphabets are incompatible")
    pz = p_x.mass @ w_z.rows
    if c.mode == "exact":
        return float(np.max(np.abs(pz - c.q_z.mass)))
    return max(0.0, kl_nats(pz, c.q_z.mass) - c.slack)


def _stealth_point(wz: np.ndarray, c: Optional[StealthConstraint], cfg: OptimizerConfig) -> Optional[np.ndarray]:
    """Some P_X satisfying the constraint, or None when the polytope is empty."""
    nx = wz.shape[0]
    if c is None:
        return np.full(nx, 1.0 / nx)
    if c.mode == "exact":
        return feasible_point(wz, c.q_z.mass)
    q = c.q_z.mass
    simplex = Slice.simplex(nx)

    def neg_kl(j, idx):
        d, dg = _kl_rows(j.sum(axis=1) @ wz, q)
        g = -(dg @ wz.T)
        return np.where(np.isfinite(d), -d, -1e6), np.broadcast_to(g[:, None, :], j.shape)

    starts = np.stack(
        [np.random.default_rng(cfg.seed + r).dirichlet(np.ones(nx))[None, :] for r in range(min(cfg.restarts, 8))]
    )
    j, v = ascend_batch(starts, neg_kl, simplex, cfg.max_iters, cfg.tol, cfg.step_init)
    best = int(np.argmax(v))
    if -v[best] <= c.slack:
        return j[best].ravel()
    return None


# Repeated sub-solves (all_bounds evaluates the same stealthy capacity and
# best secrecy gap several times) are memoized on their exact inputs.
_MEMO: "dict" = {}
_MEMO_SIZE = 64


def _memo_key(name, wy, wz, c, cfg):
    ckey = None if c is None else (c.mode, c.slack, np.asarray(c.q_z.mass).tobytes())
    return (name, wy.shape, wy.tobytes(), wz.shape, wz.tobytes(), ckey, cfg)


def _memoized(name, wy, wz, c, cfg, compute):
    key = _memo_key(name, wy, wz, c, cfg)
    if key not in _MEMO:
        if len(_MEMO) >= _MEMO_SIZE:
            _MEMO.pop(next(iter(_MEMO)))
        _MEMO[key] = compute()
    return _MEMO[key]


def _stealthy_capacity(wy, wz, c, cfg) -> Optional[_Candidate]:
    """max I(X;Y) over the stealth polytope (a concave problem); None if the polytope is empty."""

    def compute():
        start = _stealth_point(wz, c, cfg)
        if start is None:
            return None
        prog = _Program(wy, wz, 1, "ixy", None, c)
        seeds = [start[None, :]]
        if c is None:
            seeds.append(channel_capacity(wy)[1][None, :])
        j, ok = prog.project(np.stack(seeds))
        return _best(_solve(prog, replace(cfg, restarts=min(cfg.restarts, 8)), list(j[ok])))[0]

    return _memoized("capacity", wy, wz, c, cfg, compute)


def _grid_seeds(prog: _Program, cfg: OptimizerConfig, count: int = 4) -> List[np.ndarray]:
    nx = prog.nx
    if nx > 6:
        return []
    res = max(r for r in range(1, 65) if grid_size(nx, r) <= 4000)
    j, ok = prog.project(simplex_grid(nx, res)[:, None, :])
    j = j[ok]
    if j.shape[0] == 0:
        return []
    n = j.shape[0]
    f, _ = prog.penalized(np.full(n, cfg.penalty_init), np.zeros((n, prog.ncons)))(j, np.arange(n))
    order = sorted(range(n), key=lambda i: (-f[i], tuple(j[i].ravel())))
    seeds, seen = [], set()
    for i in order:
        rounded = tuple(np.round(j[i].ravel(), 9))
        if rounded not in seen:
            seen.add(rounded)
            seeds.append(j[i])
        if len(seeds) == count:
            break
    return seeds


def _finish(name, w, cand, ok, base, joint=True, value=None) -> BoundResult:
    base = LogBase.parse(base)
    argmax = _joint(w, cand.j) if joint else _input_dist(w, cand.j)
    v = cand.f if value is None else value
    return BoundResult(
        bound=name,
        value=max(v, 0.0) * base.per_nat if ok else 0.0,
        argmax=argmax,
        stealth_residual=cand.residual,
        secrecy_gap=(cand.gap if math.isfinite(cand.gap) else 0.0) * base.per_nat,
        status="ok" if ok else "infeasible",
        base=base,
    )


def _empty(name, base, status="infeasible") -> BoundResult:
    return BoundResult(name, 0.0, None, math.inf, 0.0, status, LogBase.parse(base))


def _relaxation_optimum(prog: _Program, cap: _Candidate) -> Optional[_Candidate]:
    """The stealthy-capacity maximizer embedded in ``prog`` if it meets the secrecy condition.

    The capacity upper-bounds both lower-bound programs, so a feasible
    embedding is a global optimum.
    """
    j = cap.j.reshape(1, -1) if prog.k == 1 else _embed(cap.j.ravel(), prog.k)
    if j is None:
        return None
    cand = _candidates(prog, j.reshape(1, prog.k, prog.nx))[0]
    if cand.gap >= 0.0 and cand.residual <= FEASIBLE_STEALTH:
        return cand
    return None


# --------------------------------------------------------------------------
# bounds


def lower_bound_prop1(
    w: WiretapChannel,
    c: StealthConstraint,
    cfg: OptimizerConfig = OptimizerConfig(),
    base: BaseLike = LogBase.NATURAL,
) -> BoundResult:
    """max I(X;Y) over stealthy P_X with I(X;Y) >= I(X;Z)."""
    wy, wz = _arrays(w, c)
    cap = _stealthy_capacity(wy, wz, c, cfg)
    if cap is None:
        return _empty("prop1", base)
    prog = _Program(wy, wz, 1, "ixy", "x", c)
    shortcut = _relaxation_optimum(prog, cap)
    if shortcut is not None:
        return _finish("prop1", w, shortcut, True, base, joint=False)
    cand, ok = _best(_solve(prog, cfg, _grid_seeds(prog, cfg)))
    return _finish("prop1", w, cand, ok, base, joint=False)


def _embed(p: np.ndarray, k: int) -> Optional[np.ndarray]:
    """U = X as a deterministic prefix: J[x, x] = p(x), padded with empty rows."""
    nx = p.size
    if k < nx:
        return None
    j = np.zeros((k, nx))
    j[np.arange(nx), np.arange(nx)] = p
    return j


def lower_bound_cor1(
    w: WiretapChannel,
    c: StealthConstraint,
    cfg: OptimizerConfig = OptimizerConfig(),
    base: BaseLike = LogBase.NATURAL,
) -> BoundResult:
    """max I(U;Y) over stealthy P_{UX} with I(U;Y) >= I(U;Z)."""
    wy, wz = _arrays(w, c)
    cap = _stealthy_capacity(wy, wz, c, cfg)
    if cap is None:
        return _empty("cor1", base)
    k = cfg.aux_size(wy.shape[0])
    prog = _Program(wy, wz, k, "iuy", "u", c)
    shortcut = _relaxation_optimum(prog, cap)
    if shortcut is not None:
        return _finish("cor1", w, shortcut, True, base)
    seeds = []
    p1 = lower_bound_prop1(w, c, cfg)
    if p1.status == "ok":
        e = _embed(p1.argmax.mass, k)
        if e is not None:
            seeds.append(e)
    cand, ok = _best(_solve(prog, cfg, seeds))
    return _finish("cor1", w, cand, ok, base)


def upper_bound_thm1(
    w: WiretapChannel,
    c: StealthConstraint,
    cfg: OptimizerConfig = OptimizerConfig(),
    base: BaseLike = LogBase.NATURAL,
) -> BoundResult:
    """max I(X;Y) over stealthy P_{UX} with I(U;Y) >= I(U;Z), |U| <= |X| + 2.

    An auxiliary independent of X meets the secrecy condition with equality
    and leaves I(X;Y) unchanged, so the maximum equals the stealthy capacity
    max I(X;Y) over the stealth polytope, a concave program.  The reported
    argmax is that independent auxiliary.
    """
    wy, wz = _arrays(w, c)
    verdict, cap = _zero_certificate(wy, wz, c, cfg)
    if cap is None:
        return _empty("thm1", base, "zero_capacity")
    k = cfg.aux_size(wy.shape[0])
    prog = _Program(wy, wz, k, "ixy", "u", c)
    cand = _candidates(prog, (np.tile(cap.j.reshape(1, -1), (k, 1)) / k)[None])[0]
    res = _finish("thm1", w, cand, True, base)
    if verdict == "zero":
        return replace(res, value=0.0, status="zero_capacity")
    return res


def est_upper_bound(
    w: WiretapChannel,
    c: StealthConstraint,
    cfg: OptimizerConfig = OptimizerConfig(),
    base: BaseLike = LogBase.NATURAL,
) -> BoundResult:
    """max I(U;Y) - I(U;Z) over stealthy P_{UX} (effectively secret transmission)."""
    wy, wz = _arrays(w, c)
    cand = _max_gap(wy, wz, c, cfg)
    if cand is None:
        return _empty("est", base)
    res = _finish("est", w, cand, True, base)
    return replace(res, secrecy_gap=res.value)


def _max_gap(wy, wz, c, cfg) -> Optional[_Candidate]:
    def compute():
        cap = _stealthy_capacity(wy, wz, c, cfg)
        if cap is None:
            return None
        k = cfg.aux_size(wy.shape[0])
        prog = _Program(wy, wz, k, "gap", None, c)
        seeds = [np.tile(cap.j.reshape(1, -1), (k, 1)) / k]
        e = _embed(cap.j.ravel(), k)
        if e is not None:
            seeds.append(e)
        return _best(_solve(prog, cfg, seeds))[0]

    return _memoized("gap", wy, wz, c, cfg, compute)


def _zero_certificate(wy, wz, c, cfg):
    """("zero", cap) when the polytope is empty or stealthy I(X;Y) vanishes, else ("open", cap)."""
    cap = _stealthy_capacity(wy, wz, c, cfg)
    if cap is None or cap.f <= cfg.zero_tol:
        return "zero", cap
    return "open", cap


def zero_capacity_check(
    w: WiretapChannel,
    c: Optional[StealthConstraint],
    cfg: OptimizerConfig = OptimizerConfig(),
) -> str:
    """Classify the ESID capacity as ``"zero"``, ``"positive"`` or ``"inconclusive"``.

    zero: the stealth polytope is empty, every stealthy input has I(X;Y) = 0
    (the upper bound vanishes), or the best secrecy gap is below ``-zero_tol``.
    positive: some stealthy P_{UX} with gap >= zero_tol (hence I(U;Y) > 0) is found.
    ``c=None`` drops the stealth constraint.
    """
    wy, wz = _arrays(w, c)
    verdict, _ = _zero_certificate(wy, wz, c, cfg)
    if verdict == "zero":
        return "zero"
    best = _max_gap(wy, wz, c, cfg)
    if best.f >= cfg.zero_tol:
        return "positive"
    if best.f < -cfg.zero_tol:
        return "zero"
    return "inconclusive"


def channel_capacity(w: np.ndarray, tol: float = 1e-12, max_iter: int = 100000):
    """Blahut-Arimoto; returns (capacity in nats, maximizing input law)."""
    nx = w.shape[0]
    p = np.full(nx, 1.0 / nx)
    wlogw = _wlogw(w)
    for _ in range(max_iter):
        d = wlogw - w @ _log(p @ w)  # D(W_x || pW)
        lower = float(p @ d)
        upper = float(np.max(d))
        if upper - lower < tol:
            break
        p = p * np.exp(d - upper)
        p /= p.sum()
    return max(lower, 0.0), p


def secret_id_rate(
    w: WiretapChannel,
    cfg: OptimizerConfig = OptimizerConfig(),
    base: BaseLike = LogBase.NATURAL,
) -> BoundResult:
    """ID rate under secrecy only: capacity of W_{Y|X} when some U has I(U;Y) > I(U;Z), else 0."""
    wy, wz = _arrays(w, None)
    base = LogBase.parse(base)
    verdict = zero_capacity_check(w, None, cfg)
    cap, p = channel_capacity(wy)
    mi_z = float(_mi_x(p[None, None, :], wz, _wlogw(wz))[0][0])
    if verdict != "positive":
        return BoundResult("secret_id", 0.0, _input_dist(w, p), 0.0, (cap - mi_z) * base.per_nat, "zero_capacity", base)
    return BoundResult("secret_id", cap * base.per_nat, _input_dist(w, p), 0.0, (cap - mi_z) * base.per_nat, "ok", base)


def all_bounds(
    w: WiretapChannel,
    c: StealthConstraint,
    cfg: OptimizerConfig = OptimizerConfig(),
    base: BaseLike = LogBase.NATURAL,
) -> dict:
    """Every bound plus the zero-capacity verdict, keyed by bound name."""
    return {
        "prop1": lower_bound_prop1(w, c, cfg, base),
        "cor1": lower_bound_cor1(w, c, cfg, base),
        "thm1": upper_bound_thm1(w, c, cfg, base),
        "est": est_upper_bound(w, c, cfg, base),
        "secret_id": secret_id_rate(w, cfg, base),
        "zero_capacity": zero_capacity_check(w, c, cfg),
    }
