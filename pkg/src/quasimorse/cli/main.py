"""Command-line entry point: ``quasimorse <subcommand> --config cfg.json``."""
from __future__ import annotations

import argparse
import hashlib
import platform
import sys
from pathlib import Path

import numpy as np
import scipy

from .. import __version__
from ..errors import ConfigError
from . import config as cfgmod
from .pipeline import STAGES, Pipeline, StageFailure, counterexample_report
from .report import dumps, write_json

SUBCOMMANDS = {
    "run": STAGES,
    "find-critical": ("find",),
    "index": ("index",),
    "certify": ("certify",),
    "flow": ("flow",),
    "homology": ("homology",),
    "diagnose-cerami": ("cerami",),
}


def _u64(text):
    v = int(text, 0)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def _band(text):
    try:
        a, b = (float(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError("band must look like a,b") from None
    if not b > a:
        raise argparse.ArgumentTypeError("band needs a < b")
    return [a, b]


def _pairs(text):
    if text == "all":
        return "all"
    try:
        return [[int(x) for x in item.split("-")] for item in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError("pairs must be 'all' or like 2-0,2-1") from None


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON experiment config")
    common.add_argument("--seed", type=_u64, help="override the config seed")
    common.add_argument("--out", help="output directory (default: config 'output' or ./out)")
    common.add_argument("--stage", help="comma-separated stage list (dependencies are added)")

    flow = argparse.ArgumentParser(add_help=False)
    flow.add_argument("--shoot", type=int, help="samples on a 2D unstable sphere")
    flow.add_argument("--pairs", type=_pairs, help="'all' or hi-lo pairs, e.g. 2-0,2-1")
    flow.add_argument("--sphere-radius", type=float)
    flow.add_argument("--band", type=_band, help="a,b: run the Gronwall containment check on f^-1([a,b])")
    flow.add_argument("--profile", choices=["smoothstep", "cinf"])

    ap = argparse.ArgumentParser(prog="quasimorse", description="Discrete Morse homology for quasilinear functionals.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in SUBCOMMANDS:
        parents = [common, flow] if name in ("run", "flow", "homology") else [common]
        sub.add_parser(name, parents=parents)
    cx = sub.add_parser("counterexample", parents=[common],
                        help="nearest nonzero critical points of the truncated sequence functional")
    cx.add_argument("--orders", default="5,10,20", help="comma-separated truncation orders")
    return ap


def _apply_flow_flags(raw, args):
    flow = dict(raw.get("flow", {}))
    for attr, key in (("shoot", "n_shoot"), ("pairs", "pairs"), ("sphere_radius", "sphere_radius"),
                      ("band", "band"), ("profile", "profile")):
        v = getattr(args, attr, None)
        if v is not None:
            flow[key] = v
    if flow:
        raw["flow"] = flow
    return raw


def _manifest(cfg_text, seed, timings, files):
    return {
        "version": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "seed": seed,
        "config_sha256": hashlib.sha256(cfg_text.encode()).hexdigest(),
        "wall_clock_seconds": timings,
        "files": files,
    }


def main(argv=None):
    args = build_parser().parse_args(argv)
    if args.command == "counterexample":
        try:
            orders = [int(x) for x in args.orders.split(",")]
        except ValueError:
            print("error: --orders must be a comma-separated list of integers", file=sys.stderr)
            return 2
        if any(n < 1 for n in orders):
            print("error: truncation orders must be >= 1", file=sys.stderr)
            return 2
        rep = counterexample_report(orders)
        out = Path(args.out or "out")
        out.mkdir(parents=True, exist_ok=True)
        write_json(rep, out / "report.json")
        print(dumps(rep["stages"]["counterexample"]))
        return 0 if rep["passed"] else 1

    if not args.config:
        print("error: --config is required", file=sys.stderr)
        return 2
    try:
        raw = _apply_flow_flags(cfgmod.expand_dotted(cfgmod.read_raw(args.config)), args)
        cfg = cfgmod.normalize(raw, args.seed, args.out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2

    stages = SUBCOMMANDS[args.command]
    if args.stage:
        stages = [s.strip() for s in args.stage.split(",") if s.strip()]
        bad = [s for s in stages if s not in STAGES]
        if bad:
            print(f"error: unknown stage(s) {bad}; expected {list(STAGES)}", file=sys.stderr)
            return 2
    out = Path(cfg["output"])
    out.mkdir(parents=True, exist_ok=True)
    pipe = Pipeline(cfg, out)
    code = 0
    try:
        report = pipe.run(stages)
    except StageFailure as exc:
        print(str(exc), file=sys.stderr)
        report = {**pipe.report(), "failed_stage": exc.stage, "error": str(exc), "passed": False}
        code = 1
    write_json(report, out / "report.json")
    cfg_text = dumps({k: v for k, v in cfg.items() if k != "output"})
    write_json(_manifest(cfg_text, cfg["seed"], pipe.timings, ["report.json"] + pipe.files), out / "manifest.json")
    if code == 0 and not report["passed"]:
        failed = [k for k, v in report["checks"].items() if not v]
        print("checks failed: " + ", ".join(failed), file=sys.stderr)
        code = 1
    if args.command != "run":
        key = {"find-critical": "find", "diagnose-cerami": "cerami"}.get(args.command, args.command)
        if key in report["stages"]:
            print(dumps(report["stages"][key]))
    else:
        print(dumps({"checks": report["checks"], "passed": report["passed"]}))
    return code


if __name__ == "__main__":
    sys.exit(main())
