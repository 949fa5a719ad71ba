"""The reversely degraded two-bit broadcast example and its Fig. 2 style sweep.

The input is a pair ``X = (X1, X2)``.  The legitimate receiver sees both bits
through independent erasure channels; the eavesdropper sees ``X2`` exactly.
The auxiliary ``U = (X1, U2)`` reaches ``X2`` through a binary symmetric
channel, so the eavesdropper's view of ``U2`` is noisy.  All closed forms are
in bits.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import List, Sequence

import numpy as np

from .errors import OutOfRange
from .measures import LogBase, binary_entropy, mutual_information
from .probability import (
    BINARY,
    Channel,
    Distribution,
    WiretapChannel,
    bec,
    bsc,
    compose,
    deterministic_channel,
    identity_channel,
    product,
    product_distribution,
)


# Rounding slack when comparing the two closed forms at the critical point.
ADMISSIBLE_TOL = 1e-12


def _h2(p: float) -> float:
    return binary_entropy(min(1.0, max(0.0, p)), LogBase.TWO)


def critical_eps(q: float) -> float:
    """Largest erasure probability at which the uniform auxiliary still keeps I(U;Y) >= I(U;Z)."""
    return 1.0 / (2.0 - _h2(q))


def mix(p_u2: float, q: float) -> float:
    """P(X2 = 1) when U2 ~ Bernoulli(p_u2) passes through BSC(q)."""
    return p_u2 * (1.0 - q) + (1.0 - p_u2) * q


@dataclass(frozen=True)
class RevDegradedScenario:
    eps: float
    q: float
    p_x1: float = 0.5
    p_u2: float = 0.5

    def __post_init__(self):
        if not 0.5 < self.eps <= 1.0:
            raise OutOfRange(f"eps = {self.eps} must lie in (1/2, 1]")
        if not 0.0 <= self.q <= 0.5:
            raise OutOfRange(f"q = {self.q} must lie in [0, 1/2]")
        for name in ("p_x1", "p_u2"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise OutOfRange(f"{name} = {v} must lie in [0, 1]")

    @property
    def base(self) -> LogBase:
        return LogBase.TWO

    @property
    def p_x2(self) -> float:
        return mix(self.p_u2, self.q)

    @classmethod
    def at_critical(cls, q: float, p_x1: float = 0.5, p_u2: float = 0.5) -> "RevDegradedScenario":
        return cls(critical_eps(q), q, p_x1, p_u2)


@dataclass(frozen=True)
class ScenarioReport:
    i_xy: float
    i_xz: float
    i_uy: float
    i_uz: float
    eps_threshold: float
    gap: float
    est_bound: float
    secret_id: float
    cor1_lower: float
    thm1_upper: float

    def to_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass(frozen=True, eq=False)
class ScenarioChannels:
    wiretap: WiretapChannel
    prefix: Channel

    @property
    def legit(self) -> Channel:
        return self.wiretap.legit

    @property
    def eaves(self) -> Channel:
        return self.wiretap.eaves


def build_scenario(s: RevDegradedScenario) -> ScenarioChannels:
    """Channels of the example: product erasure legit, second-bit eavesdropper, U -> X prefix."""
    legit = product(bec(s.eps), bec(s.eps))
    eaves = deterministic_channel(legit.input, BINARY, lambda x: x[1])
    prefix = product(identity_channel(BINARY), bsc(s.q))
    return ScenarioChannels(WiretapChannel.from_channels(legit, eaves), prefix)


def analytic_report(s: RevDegradedScenario) -> ScenarioReport:
    e, q = s.eps, s.q
    h_x1, h_x2, h_q = _h2(s.p_x1), _h2(s.p_x2), _h2(q)
    i_xy = (1.0 - e) * (h_x1 + h_x2)
    i_xz = h_x2
    i_uy = (1.0 - e) * h_x1 + (1.0 - e) * (h_x2 - h_q)
    i_uz = h_x2 - h_q
    # Corollary-style rate: the auxiliary is admissible only while the
    # legitimate receiver learns at least as much about it; otherwise fall
    # back to sending on the first bit alone, which the eavesdropper never sees.
    cor1 = i_uy if i_uy >= i_uz - ADMISSIBLE_TOL else (1.0 - e) * h_x1
    return ScenarioReport(
        i_xy=i_xy,
        i_xz=i_xz,
        i_uy=i_uy,
        i_uz=i_uz,
        eps_threshold=critical_eps(q),
        gap=(1.0 - e) * h_q,
        est_bound=i_uy - i_uz,
        secret_id=2.0 * (1.0 - e),
        cor1_lower=cor1,
        thm1_upper=i_xy,
    )


def input_laws(s: RevDegradedScenario):
    """(P_U, P_X) as product distributions on the pair alphabets."""
    bern = lambda p: Distribution(BINARY, np.array([1.0 - p, p]))  # noqa: E731
    p_u = product_distribution(bern(s.p_x1), bern(s.p_u2))
    p_x = product_distribution(bern(s.p_x1), bern(s.p_x2))
    return p_u, p_x


def numeric_report(s: RevDegradedScenario) -> dict:
    """The four mutual informations evaluated on the constructed channels."""
    ch = build_scenario(s)
    p_u, p_x = input_laws(s)
    return {
        "i_xy": mutual_information(p_x, ch.legit, LogBase.TWO),
        "i_xz": mutual_information(p_x, ch.eaves, LogBase.TWO),
        "i_uy": mutual_information(p_u, compose(ch.prefix, ch.legit), LogBase.TWO),
        "i_uz": mutual_information(p_u, compose(ch.prefix, ch.eaves), LogBase.TWO),
    }


def numeric_cross_check(s: RevDegradedScenario, cfg=None) -> float:
    """Largest |analytic - numeric| over the four mutual informations.

    ``cfg`` is accepted for interface symmetry with the optimizers; the check
    itself is a direct evaluation.
    """
    analytic = analytic_report(s)
    numeric = numeric_report(s)
    return max(abs(getattr(analytic, k) - v) for k, v in numeric.items())


# --------------------------------------------------------------------------
# sweep

SWEEP_COLUMNS = ("p_u2", "i_xy", "i_xz", "i_uy", "i_uz")


@dataclass(frozen=True)
class SweepRow:
    p_u2: float
    i_xy: float
    i_xz: float
    i_uy: float
    i_uz: float

    def values(self) -> tuple:
        return (self.p_u2, self.i_xy, self.i_xz, self.i_uy, self.i_uz)


def fig2_sweep(q: float, eps: float, grid_points: int, p_x1: float = 0.5) -> List[SweepRow]:
    """The four curves over p in [0, 1].

    The I(X; .) curves treat the abscissa as P(X2 = 1) directly, while the
    I(U; .) curves treat it as P(U2 = 1) and push it through the crossover.
    """
    if grid_points < 2:
        raise OutOfRange("the sweep needs at least two grid points")
    RevDegradedScenario(eps, q, p_x1)  # validates the parameters
    h1, hq = _h2(p_x1), _h2(q)
    rows = []
    for p in np.linspace(0.0, 1.0, grid_points):
        p = float(p)
        hx = _h2(p)
        hu = _h2(mix(p, q))
        rows.append(
            SweepRow(
                p_u2=p,
                i_xy=(1.0 - eps) * (h1 + hx),
                i_xz=hx,
                i_uy=(1.0 - eps) * h1 + (1.0 - eps) * (hu - hq),
                i_uz=hu - hq,
            )
        )
    return rows


def sweep_csv(rows: Sequence[SweepRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SWEEP_COLUMNS)
    for r in rows:
        writer.writerow([repr(float(v)) for v in r.values()])
    return buf.getvalue()


def sweep_svg(rows: Sequence[SweepRow], width: int = 480, height: int = 320) -> str:
    """A bare SVG with one polyline per curve; no axes or labels beyond a legend."""
    colors = {"i_xy": "#1f77b4", "i_xz": "#ff7f0e", "i_uy": "#2ca02c", "i_uz": "#d62728"}
    pad = 30
    top = max(1.0, max(max(r.values()[1:]) for r in rows))

    def point(x, y):
        return f"{pad + x * (width - 2 * pad):.2f},{height - pad - y / top * (height - 2 * pad):.2f}"

    lines = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
    ]
    for i, (name, color) in enumerate(colors.items()):
        pts = " ".join(point(r.p_u2, getattr(r, name)) for r in rows)
        lines.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{pts}"/>')
        lines.append(
            f'<text x="{width - pad - 40}" y="{pad + 14 * i}" font-size="11" fill="{color}">{name}</text>'
        )
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def read_sweep_csv(text: str) -> List[SweepRow]:
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    if tuple(header) != SWEEP_COLUMNS:
        raise ValueError(f"unexpected sweep header {header}")
    return [SweepRow(*map(float, row)) for row in reader if row]


def fig2_scenario(exact: bool = False) -> RevDegradedScenario:
    """q = 1/8 with the rounded threshold 0.6866, or the exact critical value."""
    q = 1.0 / 8.0
    return RevDegradedScenario(critical_eps(q) if exact else 0.6866, q)


def uniform_bits() -> Distribution:
    return Distribution(BINARY, np.array([0.5, 0.5]))

