"""Command-line front end.

    collapse-lab electron --initial +z --interpretation both
    collapse-lab photons --n 4 --samples 100000 --seed 42 --output json
    collapse-lab retrodict --branch M++ --phase-grid 0:pi:16
    collapse-lab audit --initial=-z --trials 1000

Exit codes: 0 success, 1 runtime error, 2 usage error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import re
import sys
from dataclasses import dataclass, field

import numpy as np

from . import experiments as ex
from .dynamics import AuditReport

SEED_ENV = "COLLAPSE_LAB_SEED"
SIG_DIGITS = 15


@dataclass(frozen=True)
class RunConfig:
    experiment: str
    params: dict = field(default_factory=dict)
    interpretation: str = "both"
    samples: int = 0
    seed: int = ex.DEFAULT_SEED
    output_format: str = "json"
    output_path: str | None = None


def _count(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if value < 0:
        raise argparse.ArgumentTypeError(f"must be non-negative, got {value}")
    return value


def _positive(text: str) -> int:
    value = _count(text)
    if value == 0:
        raise argparse.ArgumentTypeError("must be positive")
    return value


_PI_RE = re.compile(r"^(?P<num>[-+]?(?:[\d.]+(?:e[-+]?\d+)?)?)\*?pi(?:/(?P<den>[\d.]+))?$")


def _angle(text: str) -> float:
    text = text.strip().lower()
    m = _PI_RE.match(text)
    if m:
        num = m.group("num")
        num = {"": 1.0, "+": 1.0, "-": -1.0}.get(num) or float(num)
        return num * math.pi / float(m.group("den") or 1.0)
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an angle: {text!r}") from None


def parse_phase_grid(text: str) -> list[float]:
    """``start:stop:count`` with both endpoints included; ``pi`` allowed."""
    parts = text.split(":")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("phase grid must be start:stop:count")
    start, stop = _angle(parts[0]), _angle(parts[1])
    count = _positive(parts[2])
    return np.linspace(start, stop, count).tolist()


def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return ex.DEFAULT_SEED
    try:
        return _count(raw)
    except argparse.ArgumentTypeError:
        raise SystemExit(f"invalid {SEED_ENV}={raw!r}")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=_count, default=None,
                        help=f"RNG seed (default: ${SEED_ENV} or {ex.DEFAULT_SEED})")
    common.add_argument("--output", choices=("json", "csv", "table"), default="json")
    common.add_argument("--output-path", default=None)

    parser = argparse.ArgumentParser(prog="collapse-lab", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="experiment", required=True)

    p = sub.add_parser("electron", parents=[common], help="measure-and-flip electron experiment")
    p.add_argument("--initial", choices=tuple(ex.sa.ELECTRON_STATES), default="+z")
    p.add_argument("--interpretation", choices=("everett", "copenhagen", "both"), default="both")
    p.add_argument("--j0", type=float, default=0.0)
    p.add_argument("--samples", type=_count, default=0)

    p = sub.add_parser("photons", parents=[common], help="N circularly polarized photons")
    p.add_argument("--n", type=_positive, required=True)
    p.add_argument("--interpretation", choices=("everett", "copenhagen", "both"), default="both")
    p.add_argument("--nb", type=float, default=0.0)
    p.add_argument("--samples", type=_count, default=0)

    p = sub.add_parser("retrodict", parents=[common], help="retrospective Born rule")
    p.add_argument("--branch", choices=("M++", "M+-", "M_++", "M_+-"), default="M++")
    p.add_argument("--phase-grid", type=parse_phase_grid, default=None)

    p = sub.add_parser("audit", parents=[common], help="total J_z conservation audit")
    p.add_argument("--initial", choices=tuple(ex.sa.ELECTRON_STATES), default="+z")
    p.add_argument("--j0", type=float, default=0.0)
    p.add_argument("--trials", type=_count, default=0)
    return parser


def parse_args(argv=None) -> RunConfig:
    ns = build_parser().parse_args(argv)
    seed = ns.seed if ns.seed is not None else _default_seed()
    if ns.experiment == "electron":
        params = {"initial": ns.initial, "j0": ns.j0}
    elif ns.experiment == "photons":
        params = {"n": ns.n, "nb": ns.nb}
    elif ns.experiment == "retrodict":
        params = {"branch": ns.branch, "phase_grid": ns.phase_grid}
    else:
        params = {"initial": ns.initial, "j0": ns.j0, "trials": ns.trials}
    return RunConfig(
        experiment=ns.experiment,
        params=params,
        interpretation=getattr(ns, "interpretation", "both"),
        samples=getattr(ns, "samples", 0),
        seed=seed,
        output_format=ns.output,
        output_path=ns.output_path,
    )


def run(config: RunConfig) -> ex.ExperimentReport:
    p = config.params
    if config.experiment == "electron":
        return ex.run_electron_experiment(p["initial"], config.interpretation, p["j0"],
                                          config.samples, config.seed)
    if config.experiment == "photons":
        return ex.run_photon_experiment(p["n"], config.interpretation, p["nb"], config.samples, config.seed)
    if config.experiment == "retrodict":
        if p.get("phase_grid"):
            report = ex.phase_sweep(p["phase_grid"])
            report.seed = config.seed
            return report
        return ex.run_retrodiction(p["branch"], seed=config.seed)
    if config.experiment == "audit":
        return ex.run_audit(p["initial"], p["j0"], p["trials"], config.seed)
    raise ValueError(f"unknown experiment {config.experiment!r}")


def _round(obj):
    """Floats to 15 significant digits, recursively."""
    if isinstance(obj, (float, np.floating)):
        value = float(f"{float(obj):.{SIG_DIGITS}g}")
        return 0.0 if value == 0.0 else value
    if isinstance(obj, dict):
        return {k: _round(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round(v) for v in obj]
    return obj


def report_dict(report: ex.ExperimentReport) -> dict:
    """JSON-ready view of a report. Wall-clock runtime is left out so equal
    configs serialize identically."""
    out = {
        "experiment": report.experiment,
        "inputs": report.inputs,
        "seed": report.seed,
        "expectations": report.expectations,
    }
    if report.delta is not None:
        out["delta"] = report.delta
    if report.distribution is not None:
        out["distribution"] = report.distribution
    out["findings"] = [f.as_dict() for f in report.findings]
    if report.audit is not None:
        out["audit"] = report.audit.as_dict() if isinstance(report.audit, AuditReport) else report.audit
    if report.table:
        out["table"] = report.table
    if report.sampled is not None:
        out["sampled"] = report.sampled
    if report.units:
        out["units"] = report.units
    return _round(out)


def _fmt(x) -> str:
    return f"{x:.{SIG_DIGITS}g}" if isinstance(x, float) else str(x)


def _rows(report: ex.ExperimentReport) -> list[tuple]:
    d = report_dict(report)
    rows = []
    for obs, vals in d.get("table", {}).items():
        for interp, v in vals.items():
            rows.append(("expectation", obs, interp, v))
    if "delta" in d:
        rows.append(("delta", report.primary_observable, "everett-copenhagen", d["delta"]))
    dist = d.get("distribution")
    if isinstance(dist, dict):
        rows += [("distribution", k, "", v) for k, v in dist.items()]
    elif isinstance(dist, list):
        rows += [("distribution", str(i), "", v) for i, v in enumerate(dist)]
    for f in d["findings"]:
        rows.append(("finding", f"{f['stage']} {f['state']}", f["rationale"], f["probability"]))
    return rows


def emit_report(report: ex.ExperimentReport, fmt: str = "json") -> str:
    if fmt == "json":
        return json.dumps(report_dict(report), separators=(",", ":"), ensure_ascii=False) + "\n"
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(("section", "key", "detail", "value"))
        for row in _rows(report):
            w.writerow(tuple(_fmt(x) for x in row))
        return buf.getvalue()
    if fmt == "table":
        lines = [f"experiment: {report.experiment}   inputs: {report_dict(report)['inputs']}",
                 f"seed: {report.seed}   runtime: {report.runtime:.3f} s"]
        if report.units:
            lines.append(f"units: {report.units}")
        lines.append(f"{'section':<12} {'key':<28} {'detail':<20} {'value':>20}")
        for sec, key, detail, val in _rows(report):
            lines.append(f"{sec:<12} {key:<28} {detail:<20} {_fmt(val):>20}")
        return "\n".join(lines) + "\n"
    raise ValueError(f"unknown output format {fmt!r}")


def main(argv=None) -> int:
    config = parse_args(argv)
    try:
        text = emit_report(run(config), config.output_format)
        if config.output_path:
            with open(config.output_path, "w", encoding="utf-8") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
    except (OSError, ValueError, ArithmeticError) as exc:
        print(f"collapse-lab: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
