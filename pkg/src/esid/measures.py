"""Entropy, divergences, mutual information and the hypothesis-testing divergence.

All public measures take a ``base`` argument (:class:`LogBase` or one of the
strings ``"nats"``/``"bits"``) and default to natural logarithms.  The
``*_nats`` helpers work on raw arrays and are what the optimizers call.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import AlphaOutOfRange, DimensionMismatch, NoAdmissibleGamma, OutOfRange, SupportViolation
from .probability import Channel, Distribution, constant_channel

# Atoms closer than this are treated as one point of the log-likelihood-ratio law.
ATOM_TOL = 1e-13


class LogBase(enum.Enum):
    NATURAL = "nats"
    TWO = "bits"

    @classmethod
    def parse(cls, value: Union["LogBase", str]) -> "LogBase":
        if isinstance(value, LogBase):
            return value
        key = str(value).lower()
        if key in ("nats", "nat", "natural", "e", "ln"):
            return cls.NATURAL
        if key in ("bits", "bit", "two", "2", "log2"):
            return cls.TWO
        raise ValueError(f"unknown log base {value!r}")

    @property
    def per_nat(self) -> float:
        """Multiply a value in nats by this to express it in this base."""
        return 1.0 if self is LogBase.NATURAL else 1.0 / math.log(2.0)

    def log(self, x: float) -> float:
        return math.log(x) * self.per_nat


BaseLike = Union[LogBase, str]


@dataclass(frozen=True)
class DivergenceValue:
    value: float
    finite: bool

    def __float__(self) -> float:
        return float(self.value)


# --------------------------------------------------------------------------
# array kernels (nats)


def entropy_nats(p: np.ndarray) -> float:
    p = p[p > 0]
    return float(-np.sum(p * np.log(p))) + 0.0  # never -0.0


def kl_nats(p: np.ndarray, q: np.ndarray) -> float:
    """D(p||q) summed over supp(p); ``inf`` on absolute-continuity failure."""
    s = p > 0
    if np.any(q[s] <= 0):
        return math.inf
    return float(np.sum(p[s] * np.log(p[s] / q[s])))


def conditional_kl_nats(w: np.ndarray, v: np.ndarray, p: np.ndarray) -> float:
    total = 0.0
    for x in np.flatnonzero(p > 0):
        total += p[x] * kl_nats(w[x], v[x])
    return total


def mutual_information_nats(p: np.ndarray, w: np.ndarray) -> float:
    out = p @ w
    total = 0.0
    for x in np.flatnonzero(p > 0):
        row = w[x]
        s = row > 0
        total += p[x] * np.sum(row[s] * np.log(row[s] / out[s]))
    return max(float(total), 0.0)


def d_alpha_atoms(values: np.ndarray, masses: np.ndarray, alpha: float) -> float:
    """sup{g : P(L <= g) <= alpha} for a finite law with atoms ``values``.

    ``values`` may contain ``+inf``.  The result is the first atom at which the
    cumulative mass exceeds ``alpha``; equal atoms are merged first so the
    strict supremum is honoured at ties.
    """
    if alpha < 0:
        raise NoAdmissibleGamma("no threshold has lower-tail mass below a negative alpha")
    order = np.argsort(values, kind="stable")
    v = values[order]
    m = masses[order]
    cum = 0.0
    i = 0
    n = v.size
    while i < n:
        j = i
        block = 0.0
        while j < n and (v[j] == v[i] or abs(v[j] - v[i]) <= ATOM_TOL):
            block += m[j]
            j += 1
        cum += block
        if cum > alpha + 1e-12:
            return float(v[i])
        i = j
    # Only reachable when the masses sum to <= alpha.
    return math.inf


# --------------------------------------------------------------------------
# public API


def _same_alphabet(a, b, what: str) -> None:
    if a != b:
        raise DimensionMismatch(f"{what}: alphabets differ")


def entropy(p: Distribution, base: BaseLike = LogBase.NATURAL) -> float:
    return entropy_nats(p.mass) * LogBase.parse(base).per_nat


def binary_entropy(p: float, base: BaseLike = LogBase.NATURAL) -> float:
    p = float(p)
    if not 0.0 <= p <= 1.0:
        raise OutOfRange(f"p = {p} is outside [0, 1]")
    return entropy_nats(np.array([p, 1.0 - p])) * LogBase.parse(base).per_nat


def kl(p: Distribution, q: Distribution, base: BaseLike = LogBase.NATURAL) -> DivergenceValue:
    _same_alphabet(p.alphabet, q.alphabet, "kl")
    d = kl_nats(p.mass, q.mass)
    if math.isinf(d):
        return DivergenceValue(math.inf, False)
    return DivergenceValue(d * LogBase.parse(base).per_nat, True)


def conditional_kl(
    w: Channel,
    v: Union[Channel, Distribution],
    p: Distribution,
    base: BaseLike = LogBase.NATURAL,
) -> DivergenceValue:
    """E_P[ D(W(.|X) || V(.|X)) ]; a Distribution ``v`` acts as a constant channel."""
    if isinstance(v, Distribution):
        v = constant_channel(w.input, v)
    _same_alphabet(w.input, v.input, "conditional_kl inputs")
    _same_alphabet(w.output, v.output, "conditional_kl outputs")
    _same_alphabet(p.alphabet, w.input, "conditional_kl weights")
    d = conditional_kl_nats(w.rows, v.rows, p.mass)
    if math.isinf(d):
        return DivergenceValue(math.inf, False)
    return DivergenceValue(d * LogBase.parse(base).per_nat, True)


def mutual_information(p: Distribution, w: Channel, base: BaseLike = LogBase.NATURAL) -> float:
    _same_alphabet(p.alphabet, w.input, "mutual_information")
    return mutual_information_nats(p.mass, w.rows) * LogBase.parse(base).per_nat


def d_alpha(p: Distribution, q: Distribution, alpha: float, base: BaseLike = LogBase.NATURAL) -> float:
    """Hypothesis-testing divergence sup{g : P(log P/Q <= g) <= alpha}, exactly."""
    _same_alphabet(p.alphabet, q.alphabet, "d_alpha")
    if not 0.0 < alpha < 1.0:
        raise AlphaOutOfRange(f"alpha = {alpha} must lie in (0, 1)")
    s = p.mass > 0
    if np.any(q.mass[s] <= 0):
        raise SupportViolation("q vanishes on the support of p")
    values = np.log(p.mass[s] / q.mass[s])
    return d_alpha_atoms(values, p.mass[s], alpha) * LogBase.parse(base).per_nat
