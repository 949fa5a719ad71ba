"""Randomized property suites behind ``esid check``.

Each suite draws its instances from ``numpy.random.default_rng(seed)`` and
returns a :class:`Tally` with one entry per property.  A property passes when
every instance passes; the worst observed defect is recorded next to the counts.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from . import bounds as B
from .analysis import check_degraded, check_more_capable
from .files import wiretap_from_dict
from .idsim import single_letter_stealth_check
from .measures import LogBase, conditional_kl, d_alpha, entropy, kl, mutual_information
from .probability import (
    Alphabet,
    Channel,
    Distribution,
    WiretapChannel,
    channel,
    compose,
    constant_channel,
    iid,
    make_distribution,
    push_forward,
)

SUITES = ("measures", "bounds", "stealth-chain")
DEFAULT_COUNTS = {"measures": 100, "bounds": 5, "stealth-chain": 200}

# (name, wiretap, q_z)
Fixture = Tuple[str, WiretapChannel, Distribution]


@dataclass
class PropertyTally:
    passed: int = 0
    failed: int = 0
    worst: float = 0.0

    def record(self, ok: bool, defect: float = 0.0) -> None:
        if ok:
            self.passed += 1
        else:
            self.failed += 1
        if np.isfinite(defect):
            self.worst = max(self.worst, float(defect))

    @property
    def ok(self) -> bool:
        return self.failed == 0


@dataclass
class Tally:
    suite: str
    seed: int
    count: int
    properties: Dict[str, PropertyTally] = field(default_factory=dict)

    def prop(self, name: str) -> PropertyTally:
        return self.properties.setdefault(name, PropertyTally())

    @property
    def ok(self) -> bool:
        return all(p.ok for p in self.properties.values())

    def to_dict(self) -> dict:
        return {
            "suite": self.suite,
            "seed": self.seed,
            "count": self.count,
            "passed": self.ok,
            "properties": {k: dict(v.__dict__, ok=v.ok) for k, v in self.properties.items()},
        }


# --------------------------------------------------------------------------
# random instances


def _alphabet(n: int, prefix: str = "") -> Alphabet:
    return Alphabet(tuple(f"{prefix}{i}" for i in range(n)))


def random_distribution(rng: np.random.Generator, a: Alphabet) -> Distribution:
    return make_distribution(rng.dirichlet(np.ones(a.size)), a)


def random_channel(rng: np.random.Generator, inp: Alphabet, out: Alphabet) -> Channel:
    return channel(rng.dirichlet(np.ones(out.size), size=inp.size), inp, out)


def random_feasible_instance(rng: np.random.Generator, max_size: int = 3) -> Tuple[WiretapChannel, Distribution]:
    """A random wiretap pair with Q_Z = P* W_Z for a random interior P*."""
    nx, ny, nz = rng.integers(2, max_size + 1, size=3)
    x, y, z = _alphabet(nx, "x"), _alphabet(ny, "y"), _alphabet(nz, "z")
    w = WiretapChannel.from_channels(random_channel(rng, x, y), random_channel(rng, x, z))
    return w, push_forward(random_distribution(rng, x), w.eaves)


def random_degraded_instance(rng: np.random.Generator, max_size: int = 4) -> Tuple[WiretapChannel, Distribution]:
    """eaves = legit followed by a random channel, with a feasible Q_Z."""
    nx, ny, nz = rng.integers(2, max_size + 1, size=3)
    x, y, z = _alphabet(nx, "x"), _alphabet(ny, "y"), _alphabet(nz, "z")
    legit = random_channel(rng, x, y)
    eaves = compose(legit, random_channel(rng, y, z))
    w = WiretapChannel.from_channels(legit, eaves)
    return w, push_forward(random_distribution(rng, x), eaves)


# --------------------------------------------------------------------------
# fixtures


FIXTURE_WIRETAPS = ("rev_degraded.json", "degraded_bsc.json", "constant_eaves.json")


def fixture_text(name: str) -> str:
    return resources.files("esid").joinpath("fixtures", name).read_text(encoding="utf-8")


def load_fixture_wiretap(name: str) -> Fixture:
    data = json.loads(fixture_text(name))
    w = wiretap_from_dict(data)
    return name, w, make_distribution(data["q_z"], w.eaves.output)


def fixture_wiretaps() -> List[Fixture]:
    return [load_fixture_wiretap(n) for n in FIXTURE_WIRETAPS]


# --------------------------------------------------------------------------
# suites


def check_measures(count: int, seed: int) -> Tally:
    rng = np.random.default_rng(seed)
    t = Tally("measures", seed, count)
    for _ in range(count):
        nx, ny = rng.integers(2, 7, size=2)
        x, y = _alphabet(nx), _alphabet(ny)
        p, w, q = random_distribution(rng, x), random_channel(rng, x, y), random_distribution(rng, y)
        lhs = float(conditional_kl(w, constant_channel(x, q), p))
        rhs = mutual_information(p, w) + float(kl(push_forward(p, w), q))
        t.prop("kl_identity").record(abs(lhs - rhs) <= 1e-12, abs(lhs - rhs))

        p2 = random_distribution(rng, x)
        lam = float(rng.uniform())
        mixed = make_distribution(lam * p.mass + (1 - lam) * p2.mass, x)
        defect = lam * mutual_information(p, w) + (1 - lam) * mutual_information(p2, w) - mutual_information(mixed, w)
        t.prop("mutual_information_concave").record(defect <= 1e-12, defect)

        conv = max(
            abs(entropy(p, LogBase.TWO) - entropy(p) / np.log(2)),
            abs(mutual_information(p, w, LogBase.TWO) - mutual_information(p, w) / np.log(2)),
            abs(float(kl(p, p2, LogBase.TWO)) - float(kl(p, p2)) / np.log(2)),
        )
        t.prop("base_conversion").record(conv <= 1e-12, conv)

        pa, qa = random_distribution(rng, y), random_distribution(rng, y)
        d = float(kl(pa, qa))
        for alpha in (0.1, 0.5, 0.9):
            excess = d_alpha(pa, qa, alpha) - d / (1 - alpha)
            t.prop("dalpha_markov_chain").record(excess <= 1e-12, excess)
    return t


def _ordering(t: Tally, w: WiretapChannel, q: Distribution, cfg: B.OptimizerConfig) -> None:
    c = B.StealthConstraint(q)
    res = B.all_bounds(w, c, cfg)
    p1, c1, t1, s = (res[k] for k in ("prop1", "cor1", "thm1", "secret_id"))
    if all(r.status == "ok" for r in (p1, c1, t1, s)):
        defect = max(p1.value - c1.value, c1.value - t1.value - 1e-6, c1.value - s.value - 1e-6)
        t.prop("ordering").record(defect <= 1e-12, max(defect, 0.0))
    for r in (p1, c1, t1, res["est"]):
        if r.status == "ok":
            t.prop("stealth_residual").record(r.stealth_residual <= 1e-7, r.stealth_residual)
            t.prop("secrecy_gap_feasible").record(r.secrecy_gap >= -1e-9, max(0.0, -r.secrecy_gap))
    if p1.status == "ok":
        k = cfg.aux_size(w.input.size)
        emb = B._embed(p1.argmax.mass, k)
        if emb is not None:
            prog = B._Program(np.asarray(w.legit.rows), np.asarray(w.eaves.rows), k, "iuy", "u", c)
            diff = abs(float(prog.assess(emb[None])[0][0]) - p1.value)
            t.prop("u_equals_x_embedding").record(diff <= 1e-9, diff)


def check_bounds(count: int, seed: int, cfg: Optional[B.OptimizerConfig] = None, fixtures: bool = True) -> Tally:
    cfg = cfg or B.OptimizerConfig(seed=seed)
    rng = np.random.default_rng(seed)
    t = Tally("bounds", seed, count)
    instances = [(w, q) for _, w, q in fixture_wiretaps()] if fixtures else []
    instances += [random_feasible_instance(rng) for _ in range(count)]
    for w, q in instances:
        _ordering(t, w, q, cfg)
    first = instances[0]
    again = B.lower_bound_cor1(first[0], B.StealthConstraint(first[1]), cfg).to_dict()
    B._MEMO.clear()
    fresh = B.lower_bound_cor1(first[0], B.StealthConstraint(first[1]), cfg).to_dict()
    t.prop("determinism").record(json.dumps(again) == json.dumps(fresh))
    for _ in range(count):
        w, q = random_degraded_instance(rng)
        c = B.StealthConstraint(q)
        gap = B.upper_bound_thm1(w, c, cfg).value - B.lower_bound_prop1(w, c, cfg).value
        t.prop("more_capable_equality").record(gap <= 1e-4, gap)
        verdict = check_degraded(w.legit, w.eaves)
        t.prop("degraded_witness").record(verdict.degraded, verdict.residual)
        if w.input.size <= 4:
            mc = check_more_capable(w.legit, w.eaves)
            t.prop("degraded_implies_more_capable").record(mc.more_capable, max(0.0, -mc.min_gap))
    return t


def check_stealth_chain(count: int, seed: int) -> Tally:
    rng = np.random.default_rng(seed)
    t = Tally("stealth-chain", seed, count)
    for i in range(count):
        n = int(rng.integers(2, 4))
        nz = int(rng.integers(2, 4))
        z = _alphabet(nz)
        q = random_distribution(rng, z)
        if i % 2:
            p_zn = iid(random_distribution(rng, z), n)
            r = single_letter_stealth_check(p_zn, q)
            t.prop("iid_equality").record(abs(r.lhs - r.rhs) <= 1e-12, abs(r.lhs - r.rhs))
        else:
            p_zn = make_distribution(rng.dirichlet(np.ones(nz ** n)), z.power(n))
            r = single_letter_stealth_check(p_zn, q)
        t.prop("single_letter_inequality").record(r.holds, max(0.0, r.rhs - r.lhs))
    return t


RUNNERS: Dict[str, Callable[..., Tally]] = {
    "measures": check_measures,
    "bounds": check_bounds,
    "stealth-chain": check_stealth_chain,
}


def run_suites(suite: str, count: Optional[int], seed: int) -> List[Tally]:
    names = SUITES if suite == "all" else (suite,)
    return [RUNNERS[n](DEFAULT_COUNTS[n] if count is None else count, seed) for n in names]
