"""``skewflow <subcommand> --config <path> [--out <dir>] [--seed N]``.

Exit status: 0 when the checked property holds on the sample, 2 when the
evidence contradicts it, 1 for usage or configuration errors.
"""

import argparse
import csv
import json
import random
import sys
import warnings
from pathlib import Path

from . import __version__
from .analysis import (
    APConfiguration,
    RigidityGrid,
    orbit_density,
    proximal_trace,
    rigidity_profile,
    scan_strong_li_yorke,
    verify_ap_configuration,
)
from .config import ConfigError, ExperimentConfig, load_config, parse_config
from .errors import BudgetExceeded, ConfigurationBroken, PreconditionError
from .family import validate_family
from .flow import FlowPoint, write_trajectory
from .odometer import OdometerPoint

EXIT_OK, EXIT_CONFIG, EXIT_EVIDENCE = 0, 1, 2

# column layout of each plot CSV
CSV_COLUMNS = {
    "rigidity": ("k", "m_k", "sup_displacement"),
    "proximal": ("pair", "kappa", "time", "distance"),
    "density": ("k", "cells_hit", "cells_total", "coverage"),
}


def emit_plotdata(kind: str, rows, out_dir) -> Path:
    """Write ``<out_dir>/<kind>.csv``; big integers go out as decimal strings."""
    path = Path(out_dir) / f"{kind}.csv"
    try:
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(CSV_COLUMNS[kind])
            for row in rows:
                w.writerow([str(v) if isinstance(v, int) else repr(v) if isinstance(v, float) else v for v in row])
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc
    return path


def _pairs(cfg: ExperimentConfig):
    p = cfg.params
    if p.pairs is not None:
        return [tuple(x) for x in p.pairs]
    rng = random.Random(cfg.seed)
    return [(rng.random(), rng.random()) for _ in range(p.n_pairs)]


def _angle(value, cfg, salt):
    if value is not None:
        return value
    return random.Random(f"{cfg.seed}:{salt}").random()


# -- subcommands: each returns (passed, report dict, {csv kind: rows}) --


def cmd_validate(fam, cfg):
    p = cfg.params
    rep = validate_family(fam, levels=p.levels, samples=p.samples, tol=p.tol)
    return rep.ok, rep.to_dict(), {}


def cmd_rigidity(fam, cfg):
    p = cfg.params
    grid = RigidityGrid(fiber_points=p.fiber_points, random_bases=p.random_bases, seed=cfg.seed)
    prof = rigidity_profile(fam, p.k_max, grid, workers=p.workers)
    d = prof.to_dict()
    d["threshold"] = p.threshold
    rows = [(e.k, e.m_k, e.sup_displacement) for e in prof.entries]
    return prof.trend_ok(p.threshold), d, {"rigidity": rows}


def cmd_proximal(fam, cfg):
    p = cfg.params
    traces = [proximal_trace(fam, z1, z2, p.k_max) for z1, z2 in _pairs(cfg)]
    passed = all(t.distances[-1] < p.prox_threshold for t in traces)
    rows = [(i, e.kappa, e.time, e.distance) for i, t in enumerate(traces) for e in t.entries]
    report = {"prox_threshold": p.prox_threshold, "traces": [t.to_dict() for t in traces]}
    return passed, report, {"proximal": rows}


def cmd_aps(fam, cfg):
    p = cfg.params
    ap = APConfiguration(OdometerPoint.parse(p.base), _angle(p.anchor, cfg, "anchor"), fam.arcs)
    try:
        rep = verify_ap_configuration(fam, ap, p.horizon, p.k_max, tol=p.tol, strict=True)
    except ConfigurationBroken as exc:
        return False, {"config": ap.to_dict(), "broken_at": str(exc.time), "deviation": exc.deviation}, {}
    return True, rep.to_dict(), {}


def cmd_liyorke(fam, cfg):
    p = cfg.params
    zero = OdometerPoint.zero()
    evs = [scan_strong_li_yorke(fam, FlowPoint(zero, a), FlowPoint(zero, b), p.k_max, p.eps_prox, p.eps_rec)
           for a, b in _pairs(cfg)]
    return all(e.verdict for e in evs), {"pairs": [e.to_dict() for e in evs]}, {}


def cmd_density(fam, cfg):
    p = cfg.params
    start = FlowPoint(OdometerPoint.zero(), _angle(p.z0, cfg, "z0"))
    rep = orbit_density(fam, start, p.prefix_len, p.fiber_bins, p.density_k_max, sweep=p.sweep)
    rows = [(e.k, e.cells_hit, e.cells_total, e.coverage) for e in rep.entries]
    return rep.final_coverage == 1.0, rep.to_dict(), {"density": rows}


COMMANDS = {
    "validate": cmd_validate,
    "rigidity": cmd_rigidity,
    "proximal": cmd_proximal,
    "aps": cmd_aps,
    "liyorke": cmd_liyorke,
    "density": cmd_density,
}


def build_parser():
    ap = argparse.ArgumentParser(prog="skewflow", description="Odometer x circle skew-product experiments.")
    ap.add_argument("--version", action="version", version=f"skewflow {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in (*COMMANDS, "trajectory"):
        sp = sub.add_parser(name)
        sp.add_argument("--config", help="JSON experiment config (defaults apply when omitted)")
        sp.add_argument("--preset", help="use a shipped family instead of the config's")
        sp.add_argument("--out", help="output directory (overrides output.dir)")
        sp.add_argument("--seed", type=int, help="seed for sampled points (overrides seed)")
        sp.add_argument("--kmax", type=int, help="deepest level (overrides params.k_max)")
    return ap


def _resolve(args) -> ExperimentConfig:
    cfg = load_config(args.config) if args.config else ExperimentConfig()
    update = {}
    if args.preset is not None:
        update.update(preset=args.preset, family=None)
    if args.seed is not None:
        update["seed"] = args.seed
    if args.out is not None:
        update["output"] = {**cfg.output.model_dump(), "dir": args.out}
    if args.kmax is not None:
        update["params"] = {**cfg.params.model_dump(), "k_max": args.kmax, "density_k_max": args.kmax}
    if update:
        cfg = parse_config({**cfg.model_dump(), **update})
    return cfg


def _write_json(path, payload):
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def run(cfg: ExperimentConfig, command: str) -> int:
    out = Path(cfg.output.dir)
    out.mkdir(parents=True, exist_ok=True)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        fam = cfg.build_family()
    if command == "trajectory":
        start = FlowPoint(OdometerPoint.parse(cfg.params.base), _angle(cfg.params.z0, cfg, "z0"))
        with (out / "trajectory.csv").open("w", newline="") as fh:
            write_trajectory(fam, start, cfg.params.steps, fh)
        _write_json(out / "trajectory.json", {"schema_version": 1, "command": command, "config": cfg.echo(),
                                              "family": fam.to_dict(), "start": str(start)})
        return EXIT_OK
    passed, report, curves = COMMANDS[command](fam, cfg)
    _write_json(out / f"{command}.json", {"schema_version": 1, "command": command, "config": cfg.echo(),
                                          "family": fam.to_dict(), "passed": passed, "report": report})
    if cfg.output.csv:
        for kind, rows in curves.items():
            emit_plotdata(kind, rows, out)
    return EXIT_OK if passed else EXIT_EVIDENCE


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _resolve(args)
        status = run(cfg, args.command)
    except (ConfigError, PreconditionError, BudgetExceeded, ValueError, KeyError) as exc:
        print(f"skewflow: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"skewflow: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    print(f"skewflow {args.command}: {'pass' if status == EXIT_OK else 'FAIL'} -> {cfg.output.dir}")
    return status


if __name__ == "__main__":
    sys.exit(main())
