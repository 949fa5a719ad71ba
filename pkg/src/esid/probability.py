"""Finite-alphabet distributions, channels and their algebra.

Every object here is immutable: the underlying arrays are copied on
construction and flagged read-only.  Row-sum violations are reported, never
silently renormalized.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import (
    CapExceeded,
    DimensionMismatch,
    NegativeMass,
    OutOfRange,
    ValidationError,
    ZeroMass,
)

SUM_TOL = 1e-9
EXTENSION_CAP = 10**6


def _frozen(a) -> np.ndarray:
    arr = np.array(a, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Alphabet:
    symbols: tuple

    def __post_init__(self):
        syms = tuple(str(s) for s in self.symbols)
        if not syms:
            raise ValidationError("alphabet must contain at least one symbol")
        if len(set(syms)) != len(syms):
            raise ValidationError(f"alphabet symbols are not distinct: {syms}")
        object.__setattr__(self, "symbols", syms)

    @property
    def size(self) -> int:
        return len(self.symbols)

    def __len__(self) -> int:
        return len(self.symbols)

    def index(self, symbol) -> int:
        return self.symbols.index(str(symbol))

    @classmethod
    def range(cls, k: int) -> "Alphabet":
        """Alphabet with labels ``"0" .. "k-1"``."""
        return cls(tuple(str(i) for i in range(k)))

    def product(self, other: "Alphabet") -> "Alphabet":
        """Lexicographically ordered product alphabet (self-major)."""
        return Alphabet(_join_labels([self.symbols, other.symbols]))

    def power(self, n: int) -> "Alphabet":
        return Alphabet(_join_labels([self.symbols] * n))


def _join_labels(factors: Sequence[Sequence[str]]) -> tuple:
    # Plain concatenation is only unambiguous for single-character labels.
    sep = "" if all(len(s) == 1 for f in factors for s in f) else ","
    return tuple(sep.join(t) for t in itertools.product(*factors))


BINARY = Alphabet(("0", "1"))


@dataclass(frozen=True, eq=False)
class Distribution:
    alphabet: Alphabet
    mass: np.ndarray

    def __post_init__(self):
        mass = _frozen(self.mass)
        if mass.shape != (self.alphabet.size,):
            raise DimensionMismatch(
                f"mass has shape {mass.shape}, alphabet has {self.alphabet.size} symbols"
            )
        if np.any(mass < 0):
            raise NegativeMass(f"negative probability mass: {mass}")
        if abs(mass.sum() - 1.0) > SUM_TOL:
            raise ValidationError(f"probabilities sum to {float(mass.sum())!r}, not 1")
        object.__setattr__(self, "mass", mass)

    def __len__(self) -> int:
        return self.alphabet.size

    def __getitem__(self, symbol) -> float:
        return float(self.mass[self.alphabet.index(symbol)])

    def support(self) -> np.ndarray:
        return self.mass > 0

    def allclose(self, other: "Distribution", atol: float = 1e-12) -> bool:
        return self.alphabet == other.alphabet and np.allclose(self.mass, other.mass, rtol=0, atol=atol)


@dataclass(frozen=True, eq=False)
class Channel:
    """Row-stochastic matrix; row ``x`` is the output law given input ``x``."""

    input: Alphabet
    output: Alphabet
    rows: np.ndarray

    def __post_init__(self):
        rows = _frozen(self.rows)
        if rows.shape != (self.input.size, self.output.size):
            raise DimensionMismatch(
                f"rows have shape {rows.shape}, expected ({self.input.size}, {self.output.size})"
            )
        if np.any(rows < 0):
            raise NegativeMass("channel has negative transition probabilities")
        sums = rows.sum(axis=1)
        bad = np.flatnonzero(np.abs(sums - 1.0) > SUM_TOL)
        if bad.size:
            raise ValidationError(
                f"channel row {int(bad[0])} sums to {float(sums[bad[0]])!r}, not 1"
            )
        object.__setattr__(self, "rows", rows)

    @property
    def shape(self) -> tuple:
        return self.rows.shape

    def row(self, x) -> Distribution:
        i = x if isinstance(x, (int, np.integer)) else self.input.index(x)
        return Distribution(self.output, self.rows[i])

    def allclose(self, other: "Channel", atol: float = 1e-12) -> bool:
        return (
            self.input == other.input
            and self.output == other.output
            and np.allclose(self.rows, other.rows, rtol=0, atol=atol)
        )


@dataclass(frozen=True, eq=False)
class JointDistribution:
    """PMF on ``left x right``; used for auxiliary/input pairs P_{UX}."""

    left: Alphabet
    right: Alphabet
    mass: np.ndarray

    def __post_init__(self):
        mass = _frozen(self.mass)
        if mass.shape != (self.left.size, self.right.size):
            raise DimensionMismatch(
                f"mass has shape {mass.shape}, expected ({self.left.size}, {self.right.size})"
            )
        if np.any(mass < 0):
            raise NegativeMass("joint distribution has negative mass")
        if abs(mass.sum() - 1.0) > SUM_TOL:
            raise ValidationError(f"joint mass sums to {float(mass.sum())!r}, not 1")
        object.__setattr__(self, "mass", mass)

    def conditional(self) -> Channel:
        """Channel P_{right|left}.

        Rows of zero-probability left symbols are undefined; they are filled
        with the right marginal so that the result is still a valid channel.
        """
        left = self.mass.sum(axis=1)
        right = self.mass.sum(axis=0)
        rows = np.empty_like(self.mass)
        pos = left > 0
        rows[pos] = self.mass[pos] / left[pos, None]
        rows[~pos] = right
        return Channel(self.left, self.right, rows)


@dataclass(frozen=True, eq=False)
class WiretapChannel:
    input: Alphabet
    legit: Channel
    eaves: Channel
    joint: Optional[Channel] = field(default=None)

    def __post_init__(self):
        if self.legit.input != self.input or self.eaves.input != self.input:
            raise DimensionMismatch("legit and eaves channels must share the wiretap input alphabet")
        if self.joint is not None:
            ny, nz = self.legit.output.size, self.eaves.output.size
            if self.joint.input != self.input or self.joint.output.size != ny * nz:
                raise DimensionMismatch("joint channel must map the input alphabet to Y x Z")
            cube = self.joint.rows.reshape(self.input.size, ny, nz)
            if not (
                np.allclose(cube.sum(axis=2), self.legit.rows, rtol=0, atol=SUM_TOL)
                and np.allclose(cube.sum(axis=1), self.eaves.rows, rtol=0, atol=SUM_TOL)
            ):
                raise ValidationError("joint channel marginals disagree with legit/eaves")

    @classmethod
    def from_channels(cls, legit: Channel, eaves: Channel) -> "WiretapChannel":
        return cls(legit.input, legit, eaves)


# --------------------------------------------------------------------------
# constructors


def make_distribution(weights: Iterable[float], alphabet: Optional[Alphabet] = None) -> Distribution:
    """Normalize non-negative weights into a PMF."""
    w = np.asarray(list(weights) if not isinstance(weights, np.ndarray) else weights, dtype=float)
    if alphabet is None:
        alphabet = Alphabet.range(w.size)
    if w.shape != (alphabet.size,):
        raise DimensionMismatch(f"{w.size} weights for an alphabet of size {alphabet.size}")
    if np.any(w < 0):
        raise NegativeMass(f"negative weight in {w.tolist()}")
    total = w.sum()
    if total == 0:
        raise ZeroMass("all weights are zero")
    return Distribution(alphabet, w / total)


def uniform(alphabet: Alphabet) -> Distribution:
    return Distribution(alphabet, np.full(alphabet.size, 1.0 / alphabet.size))


def point_mass(alphabet: Alphabet, symbol) -> Distribution:
    i = symbol if isinstance(symbol, (int, np.integer)) else alphabet.index(symbol)
    m = np.zeros(alphabet.size)
    m[i] = 1.0
    return Distribution(alphabet, m)


def channel(rows, input: Optional[Alphabet] = None, output: Optional[Alphabet] = None) -> Channel:
    """Build a channel from a nested list / array, labelling alphabets by index by default."""
    arr = np.asarray(rows, dtype=float)
    if arr.ndim != 2:
        raise DimensionMismatch("channel rows must form a matrix")
    return Channel(input or Alphabet.range(arr.shape[0]), output or Alphabet.range(arr.shape[1]), arr)


def identity_channel(alphabet: Alphabet) -> Channel:
    return Channel(alphabet, alphabet, np.eye(alphabet.size))


def constant_channel(input: Alphabet, dist: Distribution) -> Channel:
    """Channel whose every row is ``dist``."""
    return Channel(input, dist.alphabet, np.tile(dist.mass, (input.size, 1)))


def deterministic_channel(input: Alphabet, output: Alphabet, mapping) -> Channel:
    """Channel sending input ``x`` to output ``mapping(x)`` (symbols or indices)."""
    rows = np.zeros((input.size, output.size))
    for i, x in enumerate(input.symbols):
        y = mapping(x)
        rows[i, y if isinstance(y, (int, np.integer)) else output.index(y)] = 1.0
    return Channel(input, output, rows)


def _check_prob(name: str, value: float) -> float:
    value = float(value)
    if not 0.0 <= value <= 1.0:
        raise OutOfRange(f"{name} = {value} is outside [0, 1]")
    return value


def bec(eps: float) -> Channel:
    """Binary erasure channel with output alphabet ``{0, e, 1}``."""
    eps = _check_prob("eps", eps)
    rows = [[1 - eps, eps, 0.0], [0.0, eps, 1 - eps]]
    return Channel(BINARY, Alphabet(("0", "e", "1")), rows)


def bsc(q: float) -> Channel:
    q = _check_prob("q", q)
    return Channel(BINARY, BINARY, [[1 - q, q], [q, 1 - q]])


# --------------------------------------------------------------------------
# algebra


def _require_same(a: Alphabet, b: Alphabet, what: str) -> None:
    if a != b:
        raise DimensionMismatch(f"{what}: {a.symbols} != {b.symbols}")


def compose(prefix: Channel, w: Channel) -> Channel:
    """Cascade ``prefix`` then ``w``: row u is sum_x prefix(x|u) w(.|x)."""
    _require_same(prefix.output, w.input, "compose")
    return Channel(prefix.input, w.output, prefix.rows @ w.rows)


def product(w1: Channel, w2: Channel) -> Channel:
    """Parallel use of two channels on lexicographically ordered pair alphabets."""
    return Channel(w1.input.product(w2.input), w1.output.product(w2.output), np.kron(w1.rows, w2.rows))


def _power_size_check(base_in: int, base_out: int, n: int, cap: int) -> None:
    entries = (base_in * base_out) ** n
    if entries > cap:
        raise CapExceeded(
            f"extension to n={n} needs {base_in}^{n} x {base_out}^{n} = {entries} entries (cap {cap})"
        )


def extend(w: Channel, n: int, cap: int = EXTENSION_CAP) -> Channel:
    """Memoryless n-fold extension W^n."""
    if n < 1:
        raise OutOfRange("blocklength must be positive")
    _power_size_check(w.input.size, w.output.size, n, cap)
    rows = w.rows
    for _ in range(n - 1):
        rows = np.kron(rows, w.rows)
    return Channel(w.input.power(n), w.output.power(n), rows)


def product_distribution(p1: Distribution, p2: Distribution) -> Distribution:
    return Distribution(p1.alphabet.product(p2.alphabet), np.kron(p1.mass, p2.mass))


def iid(p: Distribution, n: int, cap: int = EXTENSION_CAP) -> Distribution:
    """Product distribution p^n."""
    if p.alphabet.size ** n > cap:
        raise CapExceeded(f"{p.alphabet.size}^{n} symbols exceeds cap {cap}")
    mass = p.mass
    for _ in range(n - 1):
        mass = np.kron(mass, p.mass)
    return Distribution(p.alphabet.power(n), mass)


def push_forward(p: Distribution, w: Channel) -> Distribution:
    """Output distribution pW."""
    _require_same(p.alphabet, w.input, "push_forward")
    out = p.mass @ w.rows
    # Floating-point drift in the sum is absorbed here; inputs were validated.
    return Distribution(w.output, np.clip(out, 0.0, None))


def marginalize_joint(j: JointDistribution, side: str) -> Distribution:
    if side == "left":
        return Distribution(j.left, j.mass.sum(axis=1))
    if side == "right":
        return Distribution(j.right, j.mass.sum(axis=0))
    raise ValueError(f"side must be 'left' or 'right', not {side!r}")


def joint_from_conditional(p_u: Distribution, p_x_given_u: Channel) -> JointDistribution:
    _require_same(p_u.alphabet, p_x_given_u.input, "joint_from_conditional")
    return JointDistribution(p_u.alphabet, p_x_given_u.output, p_u.mass[:, None] * p_x_given_u.rows)
