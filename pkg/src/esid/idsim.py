"""Exact evaluation of small identification codes and of the one-shot converse.

Everything here enumerates: output laws are computed as ``E_m @ W^n`` over
the full n-fold alphabets, so blocklengths are tiny by design.  Decision sets
are index sets into the enumerated output alphabet and may overlap.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from .errors import (
    AlphabetTooLarge,
    AlphaOutOfRange,
    DimensionMismatch,
    InfeasibleStealth,
    OutOfRange,
    ValidationError,
)
from .measures import BaseLike, LogBase, d_alpha_atoms, kl_nats, mutual_information_nats
from .optim import Slice, ascend, feasible_point, grid_size, simplex_grid
from .probability import (
    EXTENSION_CAP,
    Alphabet,
    Channel,
    Distribution,
    WiretapChannel,
    extend,
    iid,
)

# Largest n-fold output alphabet for the D_alpha converse (the inner search is over P(Y^n)).
DALPHA_OUTPUT_CAP = 32
# Largest simplex grid the inner D_alpha search will enumerate.
DALPHA_GRID_CAP = 20000
SINGLE_LETTER_MAX_N = 6
SINGLE_LETTER_TOL = 1e-12
CHAIN_TOL = 1e-6


@dataclass(frozen=True, eq=False)
class IdCode:
    n: int
    channel_input: Alphabet
    encoders: Tuple[Distribution, ...]
    decision_sets: Tuple[Tuple[int, ...], ...]

    def __post_init__(self):
        if self.n < 1:
            raise OutOfRange("blocklength must be positive")
        encoders = tuple(self.encoders)
        sets = tuple(tuple(sorted({int(i) for i in d})) for d in self.decision_sets)
        if len(encoders) < 2:
            raise ValidationError("an identification code needs at least two messages")
        if len(sets) != len(encoders):
            raise DimensionMismatch(f"{len(encoders)} encoders but {len(sets)} decision sets")
        size = self.channel_input.size ** self.n
        for e in encoders:
            if e.alphabet.size != size:
                raise DimensionMismatch(f"encoder over {e.alphabet.size} symbols, expected {size}")
        for d in sets:
            if d and d[0] < 0:
                raise OutOfRange("decision set indices must be non-negative")
        object.__setattr__(self, "encoders", encoders)
        object.__setattr__(self, "decision_sets", sets)

    @property
    def m(self) -> int:
        return len(self.encoders)

    def encoder_matrix(self) -> np.ndarray:
        return np.vstack([e.mass for e in self.encoders])

    def masks(self, outputs: int) -> np.ndarray:
        masks = np.zeros((self.m, outputs), dtype=bool)
        for i, d in enumerate(self.decision_sets):
            if d and d[-1] >= outputs:
                raise OutOfRange(f"decision set {i} indexes output {d[-1]} of only {outputs}")
            masks[i, list(d)] = True
        return masks

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "input": list(self.channel_input.symbols),
            "encoders": [e.mass.tolist() for e in self.encoders],
            "decision_sets": [list(d) for d in self.decision_sets],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "IdCode":
        n = int(data["n"])
        alphabet = Alphabet(tuple(str(s) for s in data["input"]))
        big = alphabet.power(n)
        encoders = tuple(Distribution(big, np.asarray(e, dtype=float)) for e in data["encoders"])
        return cls(n, alphabet, encoders, tuple(tuple(d) for d in data["decision_sets"]))


@dataclass(frozen=True)
class IdCodeMetrics:
    lambda1: float
    lambda2: float
    stealth_delta: Optional[float]
    m: int
    n: int
    rate: float

    def to_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass(frozen=True)
class Lemma1Params:
    """Error levels of a code and the converse's free parameter eta; alpha = l1 + l2 + 2 eta."""

    lambda1: float
    lambda2: float
    eta: float = 0.01

    def __post_init__(self):
        if self.eta <= 0:
            raise OutOfRange("eta must be positive")
        for name in ("lambda1", "lambda2"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise OutOfRange(f"{name} must lie in [0, 1]")
        if not self.alpha < 1.0:
            raise AlphaOutOfRange(f"alpha = {self.alpha} must be below 1")

    @property
    def alpha(self) -> float:
        return self.lambda1 + self.lambda2 + 2.0 * self.eta

    @classmethod
    def for_metrics(cls, metrics: IdCodeMetrics, eta: float = 0.01) -> "Lemma1Params":
        return cls(metrics.lambda1, metrics.lambda2, eta)


# --------------------------------------------------------------------------
# code evaluation


def _extended(w: Channel, n: int, cap: int) -> np.ndarray:
    return np.asarray(extend(w, n, cap).rows)


def _check_input(code: IdCode, w: Channel) -> None:
    if code.channel_input != w.input:
        raise DimensionMismatch("code and channel input alphabets differ")


def _loglog(x: float, base: LogBase) -> float:
    return base.log(base.log(x))


def output_laws(code: IdCode, w: Channel, cap: int = EXTENSION_CAP) -> np.ndarray:
    """Row m is E_m W^n over the enumerated n-fold output alphabet."""
    _check_input(code, w)
    return code.encoder_matrix() @ _extended(w, code.n, cap)


def evaluate_id_code(
    code: IdCode, legit: Channel, base: BaseLike = LogBase.NATURAL, cap: int = EXTENSION_CAP
) -> IdCodeMetrics:
    b = LogBase.parse(base)
    laws = output_laws(code, legit, cap)
    hits = laws @ code.masks(laws.shape[1]).T.astype(float)  # hits[m, m'] = P_m(D_m')
    lambda1 = 1.0 - float(np.min(np.diag(hits)))
    off = hits[~np.eye(code.m, dtype=bool)]
    lambda2 = float(np.max(off))
    clip = lambda v: min(1.0, max(0.0, v))  # noqa: E731
    return IdCodeMetrics(
        lambda1=clip(lambda1),
        lambda2=clip(lambda2),
        stealth_delta=None,
        m=code.m,
        n=code.n,
        rate=_loglog(code.m, b) / code.n,
    )


def stealth_of_code(
    code: IdCode, eaves: Channel, q_z: Distribution, base: BaseLike = LogBase.NATURAL, cap: int = EXTENSION_CAP
) -> float:
    """max_m D(E_m W_Z^n || q_z^n)."""
    if q_z.alphabet != eaves.output:
        raise DimensionMismatch("q_z must live on the eavesdropper output alphabet")
    laws = output_laws(code, eaves, cap)
    ref = iid(q_z, code.n, cap).mass
    worst = max(kl_nats(p, ref) for p in laws)
    return worst * LogBase.parse(base).per_nat


# --------------------------------------------------------------------------
# one-shot converse


@dataclass(frozen=True)
class ConverseBound:
    """A converse value next to the code's loglog M.

    ``value`` is the bound (optimum plus epsilon), ``slack`` is
    ``value - loglog M`` and ``holds`` records whether it is non-negative.
    """

    value: float
    optimum: float
    epsilon: float
    loglog_m: float
    slack: float
    holds: bool
    weights: Tuple[float, ...]
    chain_value: Optional[float] = None
    chain_holds: Optional[bool] = None

    def to_dict(self) -> dict:
        d = dict(self.__dict__)
        d["weights"] = list(self.weights)
        return d


def converse_epsilon(input_size: int, eta: float, base: BaseLike = LogBase.NATURAL) -> float:
    """loglog|X| + 3 log(1/eta) + 2 in the given base."""
    b = LogBase.parse(base)
    if input_size < 2:
        raise OutOfRange("the slack needs at least two input symbols")
    return _loglog(input_size, b) + 3.0 * b.log(1.0 / eta) + 2.0


def _hull_mutinf(enc: np.ndarray, wn: np.ndarray, restarts: int = 4, seed: int = 0):
    """max over mixture weights v of I(v @ enc; wn) in nats (concave in v)."""
    m = enc.shape[0]
    simplex = Slice.simplex(m)
    wlogw = np.where(wn > 0, wn * np.log(np.where(wn > 0, wn, 1.0)), 0.0).sum(axis=1)

    def fun(v):
        p = np.clip(v @ enc, 0.0, None)
        out = p @ wn
        log_out = np.log(np.where(out > 0, out, 1e-300))
        val = float(p @ wlogw - out @ log_out)
        grad_p = wlogw - wn @ log_out
        return val, enc @ grad_p

    rng = np.random.default_rng(seed)
    starts = [np.full(m, 1.0 / m)] + [rng.dirichlet(np.ones(m)) for _ in range(restarts)]
    best_v, best_f = None, -math.inf
    for v0 in starts:
        v, f = ascend(v0, fun, simplex.project, max_iters=5000, tol=1e-12)
        if f > best_f:
            best_v, best_f = v, f
    return best_v, mutual_information_nats(np.clip(best_v @ enc, 0.0, None), wn)


def lemma1_mutinf_bound(
    code: IdCode,
    legit: Channel,
    params: Lemma1Params,
    base: BaseLike = LogBase.NATURAL,
    cap: int = EXTENSION_CAP,
) -> ConverseBound:
    """max over the encoders' convex hull of I(X;Y)/(1 - alpha), plus epsilon."""
    b = LogBase.parse(base)
    _check_input(code, legit)
    wn = _extended(legit, code.n, cap)
    enc = code.encoder_matrix()
    v, info = _hull_mutinf(enc, wn)
    optimum = info * b.per_nat / (1.0 - params.alpha)
    eps = converse_epsilon(enc.shape[1], params.eta, b)
    value = optimum + eps
    ll = _loglog(code.m, b)
    return ConverseBound(value, optimum, eps, ll, value - ll, value >= ll, tuple(float(x) for x in v))


def _dalpha_nats(p_x: np.ndarray, wn: np.ndarray, q: np.ndarray, alpha: float) -> float:
    """D_alpha(P_X W || P_X x Q) in nats; atoms where Q vanishes are +inf."""
    joint = p_x[:, None] * wn
    s = joint > 0
    with np.errstate(divide="ignore"):
        ratio = np.where(q[None, :] > 0, wn / np.where(q[None, :] > 0, q[None, :], 1.0), np.inf)
        values = np.log(ratio[s])
    return d_alpha_atoms(values, joint[s], alpha)


def _inner_min(p_x: np.ndarray, wn: np.ndarray, alpha: float, q_grid: int) -> Tuple[float, np.ndarray]:
    """min over Q of D_alpha: grid (when small enough), P_Y and uniform, then pattern search."""
    ny = wn.shape[1]
    cands = [p_x @ wn, np.full(ny, 1.0 / ny)]
    if grid_size(ny, q_grid) <= DALPHA_GRID_CAP:
        cands.extend(simplex_grid(ny, q_grid))
    best_val, best_q = math.inf, cands[0]
    for q in cands:
        val = _dalpha_nats(p_x, wn, q, alpha)
        if val < best_val:
            best_val, best_q = val, q
    # pattern search: move mass between pairs of coordinates with shrinking steps
    q = np.array(best_q, dtype=float)
    step = 1.0 / q_grid
    while step > 1e-9:
        improved = False
        for i in range(ny):
            for j in range(ny):
                if i == j or q[j] <= 0:
                    continue
                t = min(step, q[j])
                trial = q.copy()
                trial[i] += t
                trial[j] -= t
                val = _dalpha_nats(p_x, wn, trial, alpha)
                if val < best_val - 1e-15:
                    best_val, q, improved = val, trial, True
        if not improved:
            step *= 0.5
    return best_val, q


def lemma1_dalpha_bound(
    code: IdCode,
    legit: Channel,
    params: Lemma1Params,
    q_grid: int = 16,
    base: BaseLike = LogBase.NATURAL,
    restarts: int = 4,
    seed: int = 0,
    cap: int = EXTENSION_CAP,
) -> ConverseBound:
    """max over hull weights of min over Q of D_alpha(P_XY || P_X x Q), plus epsilon.

    The outer maximum is taken over the encoders themselves, the centroid and
    ``restarts`` random mixtures.  The result also reports whether it stays
    below :func:`lemma1_mutinf_bound` (``chain_holds``); it need not, because
    D_alpha can exceed D / (1 - alpha) when the log-ratio takes negative values.
    """
    b = LogBase.parse(base)
    _check_input(code, legit)
    ny = legit.output.size ** code.n
    if ny > DALPHA_OUTPUT_CAP:
        raise AlphabetTooLarge(f"{ny} output sequences exceed the cap of {DALPHA_OUTPUT_CAP}")
    wn = _extended(legit, code.n, cap)
    enc = code.encoder_matrix()
    m = enc.shape[0]
    rng = np.random.default_rng(seed)
    weights = [np.eye(m)[i] for i in range(m)] + [np.full(m, 1.0 / m)]
    weights += [rng.dirichlet(np.ones(m)) for _ in range(restarts)]
    best_val, best_w = -math.inf, weights[0]
    for v in weights:
        val, _ = _inner_min(v @ enc, wn, params.alpha, q_grid)
        if val > best_val:
            best_val, best_w = val, v
    optimum = best_val * b.per_nat
    eps = converse_epsilon(enc.shape[1], params.eta, b)
    value = optimum + eps
    ll = _loglog(code.m, b)
    chain = lemma1_mutinf_bound(code, legit, params, b, cap).value
    return ConverseBound(
        value, optimum, eps, ll, value - ll, value >= ll, tuple(float(x) for x in best_w),
        chain_value=chain, chain_holds=value <= chain + CHAIN_TOL,
    )


# --------------------------------------------------------------------------
# stealth single-letterization


@dataclass(frozen=True)
class SingleLetterCheck:
    lhs: float
    rhs: float
    holds: bool


def _infer_n(total: int, size: int) -> int:
    n = round(math.log(total) / math.log(size)) if size > 1 else 1
    if size ** n != total:
        raise DimensionMismatch(f"{total} is not a power of the letter alphabet size {size}")
    return n


def coordinate_marginals(p_zn: np.ndarray, size: int, n: int) -> np.ndarray:
    """Row i is the law of the i-th letter (first letter most significant)."""
    cube = p_zn.reshape((size,) * n)
    return np.vstack([cube.sum(axis=tuple(a for a in range(n) if a != i)) for i in range(n)])


def single_letter_stealth_check(
    p_zn: Distribution, q_z: Distribution, base: BaseLike = LogBase.NATURAL, cap: int = EXTENSION_CAP
) -> SingleLetterCheck:
    """D(P_{Z^n} || Q^n) against n D(P_{Z_T} || Q) with T uniform over positions."""
    b = LogBase.parse(base)
    size = q_z.alphabet.size
    n = _infer_n(p_zn.alphabet.size, size)
    if n > SINGLE_LETTER_MAX_N:
        raise AlphabetTooLarge(f"blocklength {n} exceeds {SINGLE_LETTER_MAX_N}")
    ref = iid(q_z, n, cap).mass
    lhs = kl_nats(p_zn.mass, ref) * b.per_nat
    averaged = coordinate_marginals(p_zn.mass, size, n).mean(axis=0)
    rhs = n * kl_nats(averaged, q_z.mass) * b.per_nat
    holds = lhs >= rhs - SINGLE_LETTER_TOL or (math.isinf(lhs))
    return SingleLetterCheck(lhs, rhs, holds)


# --------------------------------------------------------------------------
# toy code generator


def _stealthy_letter(slice_: Slice, nx: int, rng: np.random.Generator) -> np.ndarray:
    p = slice_.project(rng.dirichlet(np.full(nx, 0.3))[None, :])[0]
    p = np.clip(p, 0.0, None)
    return p / p.sum()


def _likelihood_sets(laws: np.ndarray) -> List[Tuple[int, ...]]:
    """D_m = outputs where encoder m is at least as likely as the average encoder."""
    avg = laws.mean(axis=0)
    return [tuple(int(i) for i in np.flatnonzero((row >= avg) & (row > 0))) for row in laws]


def build_toy_esid_code(
    w: WiretapChannel,
    q_z: Distribution,
    m: int,
    n: int,
    seed: int = 0,
    draws: int = 8,
    components: int = 2,
    cap: int = EXTENSION_CAP,
) -> IdCode:
    """A small code whose encoders are mixtures of i.i.d. stealthy input laws.

    Every mixture component has a single-letter law P with P W_Z = q_z, so each
    encoder simulates q_z^n exactly.  Of ``draws`` random candidates the one
    with the smallest lambda1 + lambda2 is returned.
    """
    if m < 2:
        raise ValidationError("an identification code needs at least two messages")
    if q_z.alphabet != w.eaves.output:
        raise DimensionMismatch("q_z must live on the eavesdropper output alphabet")
    nx = w.input.size
    wz = np.asarray(w.eaves.rows)
    if feasible_point(wz, q_z.mass) is None:
        raise InfeasibleStealth("no input law reproduces q_z at the eavesdropper")
    wn = _extended(w.legit, n, cap)
    if nx ** n > cap:
        raise AlphabetTooLarge(f"{nx}^{n} input sequences exceed cap {cap}")
    big = w.input.power(n)
    slice_ = Slice(wz, q_z.mass)
    rng = np.random.default_rng(seed)
    best, best_score = None, math.inf
    for _ in range(draws):
        encoders = []
        for _ in range(m):
            mix = rng.dirichlet(np.ones(components))
            mass = np.zeros(nx ** n)
            for weight in mix:
                mass += weight * iid(Distribution(w.input, _stealthy_letter(slice_, nx, rng)), n, cap).mass
            encoders.append(Distribution(big, mass / mass.sum()))
        laws = np.vstack([e.mass for e in encoders]) @ wn
        code = IdCode(n, w.input, tuple(encoders), tuple(_likelihood_sets(laws)))
        metrics = evaluate_id_code(code, w.legit, cap=cap)
        score = metrics.lambda1 + metrics.lambda2
        if score < best_score:
            best, best_score = code, score
    return best
