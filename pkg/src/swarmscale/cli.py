"""Command line front end: run scenarios, sweep the 1D comparison, inspect snapshots.

Exit codes: 0 on success, 1 for usage or configuration errors, 2 when a
run starts but fails (CFL violation, non-finite fields, solver breakdown).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from datetime import datetime, timezone
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np

from . import __version__
from .backend import BACKEND
from .compare import run_comparison_grid, summarize_rows, write_comparison_csv
from .macro import SolverConfig, run_macro
from .metrics import pattern_metrics
from .micro import LEADERSHIP_RULES, MicroConfig, run_micro
from .params import CONFIG_KEYS, load_config
from .scenarios import SCENARIO_NAMES, build_scenario
from .snapshots import read_snapshot, write_snapshot

USAGE_ERROR = 1
RUNTIME_ERROR = 2

SCENARIO_OVERRIDE_KEYS = CONFIG_KEYS + ("dx", "dt", "T")


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad flags; the contract reserves 2 for
    # runtime failures, so usage problems are remapped to 1.
    def error(self, message: str) -> None:
        self.print_usage(sys.stderr)
        print("%s: error: %s" % (self.prog, message), file=sys.stderr)
        raise SystemExit(USAGE_ERROR)


class UsageError(Exception):
    pass


def _default_out() -> str:
    return os.environ.get("SWARM_OUT", "out")


def _build_parser() -> _Parser:
    parser = _Parser(prog="swarmscale", description=__doc__)
    parser.add_argument("--version", action="version", version="swarmscale %s" % __version__)
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one scenario and write snapshots")
    run.add_argument("--scenario", required=True)
    run.add_argument("--mode", choices=("micro", "macro"), default="macro")
    run.add_argument("--out", default=None, help="output directory (default $SWARM_OUT or ./out)")
    run.add_argument("--config", default=None, help="key = value file of parameter overrides")
    run.add_argument("--seed", type=int, default=0)
    run.add_argument("--N", type=int, default=100000, help="particle count (micro mode)")
    run.add_argument("--snapshots", type=int, default=10, help="interior snapshot count")
    run.add_argument("--rule", choices=LEADERSHIP_RULES, default="generalized")
    run.add_argument("--momentum", choices=("explicit", "implicit"), default=None)
    for key in SCENARIO_OVERRIDE_KEYS:
        run.add_argument("--%s" % key, type=float, default=None)

    comp = sub.add_parser("compare1d", help="particle/continuum agreement sweep")
    comp.add_argument("--R", default="0.02,0.01", help="comma list of interaction radii")
    comp.add_argument("--eps", default="1e-3,1e-4", help="comma list of scaling parameters")
    comp.add_argument("--N", type=int, default=100000)
    comp.add_argument("--seeds", default="1,2,3,4,5", help="comma list of seeds")
    comp.add_argument("--rule", choices=LEADERSHIP_RULES, default="binary")
    comp.add_argument("--out", default=None)
    comp.add_argument("--workers", type=int, default=None)

    met = sub.add_parser("metrics", help="pattern diagnostics for a snapshot file or directory")
    met.add_argument("--in", dest="inpath", required=True)
    met.add_argument("--out", default=None, help="write JSON here instead of stdout")
    return parser


def _parse_float_list(text: str, flag: str) -> List[float]:
    try:
        values = [float(tok) for tok in text.split(",") if tok.strip()]
    except ValueError:
        raise UsageError("%s: expected a comma-separated list of numbers, got %r" % (flag, text))
    if not values:
        raise UsageError("%s: empty list" % flag)
    return values


def _parse_int_list(text: str, flag: str) -> List[int]:
    return [int(v) for v in _parse_float_list(text, flag)]


def _resolve_overrides(args: argparse.Namespace) -> Dict[str, float]:
    """Defaults < config file < explicit flags."""
    overrides: Dict[str, float] = {}
    if args.config:
        path = Path(args.config)
        if not path.is_file():
            raise UsageError("config file not found: %s" % path)
        try:
            overrides.update(load_config(path, allowed=SCENARIO_OVERRIDE_KEYS))
        except (KeyError, ValueError) as exc:
            raise UsageError("bad config file %s: %s" % (path, exc))
    for key in SCENARIO_OVERRIDE_KEYS:
        value = getattr(args, key, None)
        if value is not None:
            overrides[key] = value
    return overrides


def _cmd_run(args: argparse.Namespace) -> int:
    overrides = _resolve_overrides(args)
    try:
        scenario = build_scenario(args.scenario, **overrides)
    except (ValueError, KeyError) as exc:
        raise UsageError(str(exc))
    if args.mode == "micro" and scenario.dim != 1:
        raise UsageError("micro mode supports 1D scenarios only; %r is %dD" % (args.scenario, scenario.dim))
    if args.N < 2:
        raise UsageError("--N must be at least 2")
    if args.snapshots < 0:
        raise UsageError("--snapshots must be >= 0")

    outdir = Path(args.out if args.out is not None else _default_out())
    outdir.mkdir(parents=True, exist_ok=True)

    if args.mode == "micro":
        config = MicroConfig(
            N=args.N,
            dt=scenario.dt,
            T=scenario.T,
            leadership_rule=args.rule,
            seed=args.seed,
            snapshots=args.snapshots,
        )
        series = run_micro(scenario, config)
    else:
        solver = SolverConfig(momentum_mode=args.momentum, snapshots=args.snapshots)
        series = run_macro(scenario, solver)

    paths = write_snapshot(series, outdir)

    manifest = {
        "command": "run",
        "scenario": scenario.name,
        "mode": args.mode,
        "seed": args.seed,
        "N": args.N,
        "snapshots": args.snapshots,
        "rule": args.rule,
        "momentum_mode": args.momentum if args.momentum else scenario.momentum_mode,
        "overrides": overrides,
        "params": scenario.params.as_dict(),
        "dt": scenario.dt,
        "T": scenario.T,
        "grid_shape": list(scenario.shape),
        "extents": [list(e) for e in scenario.extents],
        "backend": BACKEND,
        "out": str(outdir),
        "timestamp": datetime.now(timezone.utc).isoformat(),
    }
    with open(outdir / "manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")

    print(
        "wrote %d snapshots for %s (%s mode) to %s"
        % (len(paths), scenario.name, args.mode, outdir)
    )
    return 0


def _cmd_compare1d(args: argparse.Namespace) -> int:
    Rs = _parse_float_list(args.R, "--R")
    epsilons = _parse_float_list(args.eps, "--eps")
    seeds = _parse_int_list(args.seeds, "--seeds")
    if args.N < 2:
        raise UsageError("--N must be at least 2")
    outdir = Path(args.out if args.out is not None else _default_out())
    outdir.mkdir(parents=True, exist_ok=True)

    rows = run_comparison_grid(Rs, epsilons, args.N, seeds, rule=args.rule, max_workers=args.workers)
    path = write_comparison_csv(rows, outdir / "comparison.csv")
    summary = summarize_rows(rows)
    for (R, eps) in sorted(summary, key=lambda k: (-k[0], -k[1])):
        vals = summary[(R, eps)]
        print(
            "R=%g eps=%g  l2_rho=%.4g  l2_rhou=%.4g  l2_rhol=%.4g  (%d seeds)"
            % (R, eps, vals["l2_rho"], vals["l2_rhou"], vals["l2_rhol"], int(vals["count"]))
        )
    print("wrote %s" % path)
    return 0


def _cmd_metrics(args: argparse.Namespace) -> int:
    path = Path(args.inpath)
    if not path.exists():
        raise UsageError("no such snapshot file or directory: %s" % path)
    series = read_snapshot(path)
    state = series.states[-1]
    metrics = pattern_metrics(state, series.grid)
    payload = {
        "step": series.steps[-1],
        "time": series.times[-1],
        "support_diameter": metrics["support_diameter"],
        "local_max_count": metrics["local_max_count"],
        "centroid": np.asarray(metrics["centroid"]).tolist(),
        "radial_r": np.asarray(metrics["radial_r"]).tolist(),
        "radial_rho": np.asarray(metrics["radial_rho"]).tolist(),
        "radial_argmax_r": metrics["radial_argmax_r"],
    }
    text = json.dumps(payload, indent=2, sort_keys=True)
    if args.out:
        Path(args.out).write_text(text + "\n")
        print("wrote %s" % args.out)
    else:
        print(text)
    return 0


def main(argv: Optional[List[str]] = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "compare1d":
            return _cmd_compare1d(args)
        if args.command == "metrics":
            return _cmd_metrics(args)
        parser.error("unknown command %r" % args.command)
    except UsageError as exc:
        print("swarmscale: error: %s" % exc, file=sys.stderr)
        return USAGE_ERROR
    except Exception as exc:
        print("swarmscale: runtime failure: %s: %s" % (type(exc).__name__, exc), file=sys.stderr)
        return RUNTIME_ERROR
    return 0


def entry() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    entry()
