"""Command-line interface: ``python -m esid <command> ...`` or ``esid <command> ...``.

Every command writes a JSON report that embeds a run manifest, either to
``--out`` (atomically) or to standard output.  Exit codes: 0 success,
1 numerical failure, 2 invalid input, 3 size cap exceeded.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np

from . import __version__
from . import bounds as B
from .analysis import check_degraded, check_more_capable
from .checks import SUITES, fixture_text, run_suites
from .errors import CapExceeded, EsidError, ValidationError
from .example import (
    RevDegradedScenario,
    analytic_report,
    critical_eps,
    fig2_sweep,
    numeric_cross_check,
    sweep_csv,
    sweep_svg,
)
from .files import (
    channel_from_dict,
    dumps,
    load_channel,
    parse_vector,
    read_json,
    wiretap_from_dict,
    write_atomic,
)
from .idsim import (
    IdCode,
    Lemma1Params,
    build_toy_esid_code,
    evaluate_id_code,
    lemma1_dalpha_bound,
    lemma1_mutinf_bound,
    stealth_of_code,
)
from .measures import LogBase, d_alpha
from .probability import Alphabet, Distribution, WiretapChannel, make_distribution

EXIT_OK = 0
EXIT_NUMERICAL = 1
EXIT_VALIDATION = 2
EXIT_CAP = 3

DEFAULT_GENERATE_CHANNEL = "constant_eaves.json"


class NumericalFailure(EsidError):
    """A result status the caller required to be ok was not."""


@dataclass
class RunManifest:
    command: str
    inputs: List[str]
    config: dict
    seed: int
    version: str = __version__
    duration: float = 0.0


@dataclass
class _Run:
    args: argparse.Namespace
    inputs: List[str] = field(default_factory=list)
    started: float = field(default_factory=time.perf_counter)

    def manifest(self) -> dict:
        config = {k: v for k, v in vars(self.args).items() if k not in ("func",)}
        return asdict(
            RunManifest(
                command=self.args.command if not getattr(self.args, "action", None)
                else f"{self.args.command} {self.args.action}",
                inputs=self.inputs,
                config=config,
                seed=self.args.seed,
                duration=time.perf_counter() - self.started,
            )
        )

    def emit(self, report: dict, path: Optional[str] = None) -> None:
        report = {"manifest": self.manifest(), **report}
        text = dumps(report)
        path = path or self.args.out
        if path:
            write_atomic(path, text)
        else:
            sys.stdout.write(text)


def _base(args) -> LogBase:
    return LogBase.parse(args.base)


def _cfg(args, **extra) -> B.OptimizerConfig:
    kwargs = {"seed": args.seed}
    if args.restarts is not None:
        kwargs["restarts"] = args.restarts
    if args.tol is not None:
        kwargs["tol"] = args.tol
    kwargs.update({k: v for k, v in extra.items() if v is not None})
    return B.OptimizerConfig(**kwargs)


def _load_wiretap(run: _Run, path: str):
    run.inputs.append(path)
    data = read_json(path)
    return wiretap_from_dict(data), data


def _distribution(text: str, alphabet: Alphabet, what: str) -> Distribution:
    v = parse_vector(text)
    if v.size != alphabet.size:
        raise ValidationError(f"{what} has {v.size} entries, expected {alphabet.size}")
    if abs(v.sum() - 1.0) > 1e-9:
        raise ValidationError(f"{what} sums to {v.sum():g}, not 1")
    return make_distribution(v, alphabet)


def _qz(args, w: WiretapChannel, data: dict) -> Distribution:
    if args.qz is not None:
        return _distribution(args.qz, w.eaves.output, "--qz")
    if "q_z" in data:
        return _distribution(",".join(map(repr, data["q_z"])), w.eaves.output, "q_z")
    raise ValidationError("no Q_Z given: pass --qz or add a 'q_z' entry to the channel file")


def _note(text: str) -> None:
    sys.stderr.write(text + "\n")


# --------------------------------------------------------------------------
# commands


def cmd_bounds(args) -> int:
    run = _Run(args)
    w, data = _load_wiretap(run, args.channel)
    q = _qz(args, w, data)
    c = B.StealthConstraint.relaxed(q, args.slack) if args.slack else B.StealthConstraint(q)
    cfg = _cfg(args, u_size=args.u_size, max_iters=args.max_iters)
    base = _base(args)
    results = B.all_bounds(w, c, cfg, base)
    verdict = results.pop("zero_capacity")
    names = ("prop1", "cor1", "thm1", "est", "secret_id")
    _note(f"{'bound':<10} {'value (' + base.value + ')':>18}  status")
    for n in names:
        r = results[n]
        _note(f"{n:<10} {r.value:>18.9f}  {r.status}")
    p1, c1, t1, s = (results[n] for n in ("prop1", "cor1", "thm1", "secret_id"))
    ordering = {
        "prop1<=cor1": p1.value <= c1.value + 1e-12,
        "cor1<=thm1": c1.value <= t1.value + 1e-6,
        "cor1<=secret_id": c1.value <= s.value + 1e-6,
    }
    _note(f"zero_capacity_check: {verdict}")
    _note("ordering: " + ", ".join(f"{k} {'ok' if v else 'VIOLATED'}" for k, v in ordering.items()))
    run.emit(
        {
            "base": base.value,
            "q_z": q.mass,
            "stealth_mode": c.mode,
            "results": {n: results[n].to_dict() for n in names},
            "zero_capacity": verdict,
            "ordering": ordering,
        }
    )
    if args.require_feasible and any(results[n].status != "ok" for n in names):
        raise NumericalFailure("some bound is not ok: " + ", ".join(f"{n}={results[n].status}" for n in names))
    return EXIT_OK


def cmd_example(args) -> int:
    run = _Run(args)
    eps = critical_eps(args.q) if args.eps is None else args.eps
    scenario = RevDegradedScenario(eps, args.q, args.p_x1)
    rows = fig2_sweep(args.q, eps, args.grid, args.p_x1)
    base = _base(args)
    scale = 1.0 if base is LogBase.TWO else math.log(2.0)
    if scale != 1.0:
        rows = [type(r)(r.p_u2, *(v * scale for v in r.values()[1:])) for r in rows]
    report = analytic_report(scenario).to_dict()
    for k in report:
        if k != "eps_threshold":
            report[k] *= scale
    summary = {
        "base": base.value,
        "scenario": {"q": args.q, "eps": eps, "p_x1": args.p_x1},
        "analytic": report,
        "numeric_cross_check": numeric_cross_check(scenario) * scale,
        "grid": args.grid,
    }
    csv_text = sweep_csv(rows)
    if args.svg:
        write_atomic(args.svg, sweep_svg(rows))
    if args.out:
        out = Path(args.out)
        write_atomic(out, csv_text)
        summary_path = out.with_name(out.stem + ".summary.json")
        summary["csv"] = str(out)
        run.emit(summary, str(summary_path))
    else:
        sys.stdout.write(csv_text)
        _note(dumps({"manifest": run.manifest(), **summary}).rstrip())
    return EXIT_OK


def _pair(run: _Run, args):
    if args.channel:
        w, _ = _load_wiretap(run, args.channel)
        return w.legit, w.eaves
    if not (args.legit and args.eaves):
        raise ValidationError("pass --channel WIRETAP or both --legit and --eaves")
    run.inputs += [args.legit, args.eaves]
    return load_channel(args.legit), load_channel(args.eaves)


def cmd_degraded(args) -> int:
    run = _Run(args)
    legit, eaves = _pair(run, args)
    verdict = check_degraded(legit, eaves, tol=args.tol if args.tol is not None else 1e-7)
    run.emit({"verdict": verdict.to_dict()})
    return EXIT_OK


def cmd_more_capable(args) -> int:
    run = _Run(args)
    legit, eaves = _pair(run, args)
    base = _base(args)
    verdict = check_more_capable(
        legit,
        eaves,
        grid_resolution=args.grid_resolution,
        restarts=args.restarts if args.restarts is not None else 8,
        tol=args.tol if args.tol is not None else 1e-9,
    )
    d = verdict.to_dict()
    d["min_gap"] = verdict.min_gap * base.per_nat
    run.emit({"base": base.value, "verdict": d})
    return EXIT_OK


def cmd_dalpha(args) -> int:
    run = _Run(args)
    p = parse_vector(args.p)
    q = parse_vector(args.q)
    if p.size != q.size:
        raise ValidationError("--p and --q need the same number of entries")
    a = Alphabet.range(p.size)
    base = _base(args)
    value = d_alpha(_distribution(args.p, a, "--p"), _distribution(args.q, a, "--q"), args.alpha, base)
    run.emit({"base": base.value, "alpha": args.alpha, "d_alpha": value})
    return EXIT_OK


def _load_code(run: _Run, path: str) -> IdCode:
    run.inputs.append(path)
    data = read_json(path)
    try:
        return IdCode.from_dict(data)
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"{path}: malformed code ({exc})") from None


def _load_legit(run: _Run, path: str):
    """A channel file, or a wiretap file (its legitimate channel is used)."""
    run.inputs.append(path)
    data = read_json(path)
    if isinstance(data, dict) and "legit" in data:
        return wiretap_from_dict(data).legit
    return channel_from_dict(data)


def cmd_idcode(args) -> int:
    run = _Run(args)
    base = _base(args)
    if args.action == "generate":
        if args.channel:
            w, data = _load_wiretap(run, args.channel)
        else:
            data = json.loads(fixture_text(DEFAULT_GENERATE_CHANNEL))
            w = wiretap_from_dict(data)
        q = _qz(args, w, data)
        code = build_toy_esid_code(w, q, args.m, args.n, seed=args.seed)
        metrics = evaluate_id_code(code, w.legit, base)
        stealth = stealth_of_code(code, w.eaves, q, base)
        if args.out:
            write_atomic(args.out, dumps(code.to_dict()))
            _note(dumps({"manifest": run.manifest(), "metrics": metrics.to_dict(), "stealth": stealth}).rstrip())
        else:
            sys.stdout.write(dumps(code.to_dict()))
        return EXIT_OK

    code = _load_code(run, args.code)
    if args.action == "eval":
        legit = _load_legit(run, args.channel)
        metrics = evaluate_id_code(code, legit, base).to_dict()
        if args.eaves:
            run.inputs.append(args.eaves)
            eaves = load_channel(args.eaves)
            if args.qz is None:
                raise ValidationError("--eaves needs --qz")
            metrics["stealth_delta"] = stealth_of_code(code, eaves, _distribution(args.qz, eaves.output, "--qz"), base)
        run.emit({"base": base.value, "metrics": metrics})
    elif args.action == "stealth":
        run.inputs.append(args.channel)
        data = read_json(args.channel)
        eaves = wiretap_from_dict(data).eaves if isinstance(data, dict) and "eaves" in data else channel_from_dict(data)
        if args.qz is None:
            raise ValidationError("stealth needs --qz")
        q = _distribution(args.qz, eaves.output, "--qz")
        run.emit({"base": base.value, "stealth_delta": stealth_of_code(code, eaves, q, base)})
    else:  # lemma1
        legit = _load_legit(run, args.channel)
        metrics = evaluate_id_code(code, legit)
        params = Lemma1Params.for_metrics(metrics, args.eta)
        mutinf = lemma1_mutinf_bound(code, legit, params, base)
        report = {"base": base.value, "alpha": params.alpha, "mutinf": mutinf.to_dict()}
        if not args.skip_dalpha:
            report["dalpha"] = lemma1_dalpha_bound(
                code, legit, params, q_grid=args.q_grid, base=base, seed=args.seed
            ).to_dict()
        run.emit(report)
    return EXIT_OK


def cmd_check(args) -> int:
    run = _Run(args)
    tallies = run_suites(args.suite, args.count, args.seed)
    ok = all(t.ok for t in tallies)
    for t in tallies:
        for name, p in t.properties.items():
            _note(f"{t.suite:<14} {name:<32} {'pass' if p.ok else 'FAIL'}  {p.passed}/{p.passed + p.failed}")
    run.emit({"passed": ok, "suites": [t.to_dict() for t in tallies]})
    return EXIT_OK if ok else EXIT_NUMERICAL


# --------------------------------------------------------------------------
# parser


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--base", choices=("bits", "nats"), default="bits", help="logarithm base of reported values")
    p.add_argument("--seed", type=int, default=0, help="random seed (default 0)")
    p.add_argument("--restarts", type=int, default=None, help="multistart count")
    p.add_argument("--tol", type=float, default=None, help="numerical tolerance")
    p.add_argument("--out", default=None, help="output file (written atomically)")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(prog="esid", description="Bounds and toy codes for stealthy secret identification.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bounds", parents=[common], help="evaluate every capacity bound")
    p.add_argument("--channel", required=True, help="wiretap JSON file")
    p.add_argument("--qz", default=None, help="target eavesdropper law, e.g. 0.5,0.5")
    p.add_argument("--slack", type=float, default=None, help="use a relaxed KL stealth constraint")
    p.add_argument("--u-size", type=int, default=None, help="auxiliary alphabet size (default |X|+2)")
    p.add_argument("--max-iters", type=int, default=None)
    p.add_argument("--require-feasible", action="store_true", help="exit 1 unless every status is ok")
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("example", parents=[common], help="the reversely degraded example and its sweep")
    p.add_argument("--q", type=float, default=0.125, help="crossover of the auxiliary prefix")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--eps", type=float, default=None, help="erasure probability")
    g.add_argument("--eps-critical", action="store_true", help="use the critical erasure probability (default)")
    p.add_argument("--p-x1", type=float, default=0.5)
    p.add_argument("--grid", type=int, default=101, help="number of sweep points")
    p.add_argument("--svg", default=None, help="also write an SVG plot")
    p.set_defaults(func=cmd_example)

    for name, func, helptext in (
        ("degraded", cmd_degraded, "is the eavesdropper a degraded version of the legitimate receiver"),
        ("more-capable", cmd_more_capable, "is the legitimate channel more capable"),
    ):
        p = sub.add_parser(name, parents=[common], help=helptext)
        p.add_argument("--channel", default=None, help="wiretap JSON file")
        p.add_argument("--legit", default=None, help="legitimate channel JSON file")
        p.add_argument("--eaves", default=None, help="eavesdropper channel JSON file")
        if name == "more-capable":
            p.add_argument("--grid-resolution", type=int, default=None)
        p.set_defaults(func=func)

    p = sub.add_parser("dalpha", parents=[common], help="hypothesis-testing divergence")
    p.add_argument("--p", required=True)
    p.add_argument("--q", required=True)
    p.add_argument("--alpha", type=float, required=True)
    p.set_defaults(func=cmd_dalpha)

    p = sub.add_parser("idcode", help="evaluate or generate identification codes")
    actions = p.add_subparsers(dest="action", required=True)
    for action in ("eval", "stealth", "lemma1"):
        a = actions.add_parser(action, parents=[common])
        a.add_argument("--code", required=True, help="code JSON file")
        a.add_argument("--channel", required=True, help="channel or wiretap JSON file")
        a.add_argument("--qz", default=None)
        if action == "eval":
            a.add_argument("--eaves", default=None, help="eavesdropper channel for the stealth delta")
        if action == "lemma1":
            a.add_argument("--eta", type=float, default=0.01)
            a.add_argument("--q-grid", type=int, default=16)
            a.add_argument("--skip-dalpha", action="store_true")
        a.set_defaults(func=cmd_idcode)
    a = actions.add_parser("generate", parents=[common])
    a.add_argument("--m", type=int, required=True)
    a.add_argument("--n", type=int, required=True)
    a.add_argument("--channel", default=None, help="wiretap JSON (default: BSC(0.1) with a constant eavesdropper)")
    a.add_argument("--qz", default=None)
    a.set_defaults(func=cmd_idcode)

    p = sub.add_parser("check", parents=[common], help="randomized property suites")
    p.add_argument("--suite", choices=("all",) + SUITES, default="all")
    p.add_argument("--count", type=int, default=None)
    p.set_defaults(func=cmd_check)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CapExceeded as exc:
        _note(f"error: {exc}")
        return EXIT_CAP
    except (ValidationError, FileNotFoundError, IsADirectoryError) as exc:
        _note(f"error: {exc}")
        return EXIT_VALIDATION
    except (EsidError, np.linalg.LinAlgError, FloatingPointError) as exc:
        _note(f"error: {exc}")
        return EXIT_NUMERICAL


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
