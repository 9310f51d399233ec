"""Command-line front end.

Exit codes: 0 success, 1 configuration or usage error, 2 numerical failure
inside an allocator (for example the active-set pivot guard).
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import harness
from .ams import moment_set, write_csv as write_ams_csv
from .config import ALGORITHMS, EXTRA_ALGORITHMS, ConfigError, bundled_configs, load_config, validate_config
from .core import AllocationError, EffectiveBounds

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2

__all__ = ["main", "validate_config", "build_parser"]


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="ctrlalloc",
        description="Constrained control allocation: run and compare allocators on a scenario.",
    )
    sub = p.add_subparsers(dest="command", required=True, metavar="SUBCOMMAND")
    helps = {
        "static": "one stationary demand, every algorithm once (stationary.csv)",
        "montecarlo": "gaussian demand samples (mc_raw.csv, mc_summary.csv)",
        "timesim": "time-varying limits and demands (timesim.csv)",
        "ams": "attainable moment set vertices and hull (vertices.csv, facets.csv)",
        "compare": "repeated stationary calls with wall-time percentiles (compare.csv)",
    }
    for name, text in helps.items():
        sp = sub.add_parser(name, help=text, description=text)
        sp.add_argument("--config", required=True,
                        help=f"scenario YAML path or bundled name ({', '.join(bundled_configs())})")
        sp.add_argument("--out", default="results", help="output directory (default: results)")
        sp.add_argument("--seed", type=int, default=None, help="override the sampler seed")
        sp.add_argument("--algorithms", default=None,
                        help="comma-separated subset, e.g. pica,qpca,idca")
        sp.add_argument("--quiet", action="store_true", help="do not print tables")
        if name == "montecarlo":
            sp.add_argument("--workers", type=int, default=1, help="threads for sample evaluation")
            sp.add_argument("--no-timing", action="store_true",
                            help="write time_s as nan so reruns are byte-identical")
        if name == "compare":
            sp.add_argument("--repeats", type=int, default=None, help="calls per algorithm")
        if name == "timesim":
            sp.add_argument("--no-audit", action="store_true", help="skip the post-hoc log audit")
    return p


def _algorithms(arg: str | None):
    if arg is None:
        return None
    names = [a.strip() for a in arg.split(",") if a.strip()]
    bad = [a for a in names if a not in ALGORITHMS + EXTRA_ALGORITHMS]
    if bad:
        raise ConfigError([f"--algorithms: unknown {', '.join(bad)}; "
                           f"expected from {', '.join(ALGORITHMS + EXTRA_ALGORITHMS)}"])
    return names


def _say(args, text: str):
    if not args.quiet:
        print(text)


def _static(cfg, out: Path, args):
    table = harness.run_stationary(cfg)
    path = table.write_csv(out / "stationary.csv")
    _say(args, table.format())
    _say(args, f"wrote {path}")


def _montecarlo(cfg, out: Path, args):
    if cfg.command.kind != "gaussian":
        raise ConfigError(["command.kind: montecarlo needs a gaussian command source"])
    mc = harness.run_monte_carlo(cfg, workers=max(1, args.workers), record_timing=not args.no_timing)
    raw, summ = mc.write_csv(out)
    _say(args, mc.format())
    _say(args, f"wrote {raw} and {summ}")


def _timesim(cfg, out: Path, args):
    if cfg.command.kind == "gaussian":
        raise ConfigError(["command.kind: timesim needs a constant or sinusoid command source"])
    logs = harness.run_timesim(cfg)
    for k, (name, log) in enumerate(logs.items()):
        path = log.write_csv(out / ("timesim.csv" if k == 0 else f"timesim_{name}.csv"))
        _say(args, f"{harness.DISPLAY_NAMES.get(name, name)}: wrote {path}")
        if not args.no_audit:
            _say(args, "  audit: " + harness.audit_timesim(log, cfg).format())


def _ams(cfg, out: Path, args):
    lim = cfg.limits_at(0.0)
    bounds = EffectiveBounds(lim.u_min, lim.u_max)
    ms = moment_set(cfg.B, bounds, hull=cfg.o == 3)
    vpath, fpath = write_ams_csv(ms, out)
    _say(args, f"{ms.vertices.shape[0]} vertices, "
               f"{0 if ms.hull_facets is None else len(ms.hull_facets)} facets")
    _say(args, "per-axis range: " + ", ".join(f"[{a:.1f}, {b:.1f}]" for a, b in zip(ms.lower, ms.upper)))
    _say(args, f"wrote {vpath} and {fpath}")


def _compare(cfg, out: Path, args):
    rows = harness.run_timing(cfg, repeats=args.repeats)
    path = harness.write_timing_csv(rows, out / "compare.csv")
    ref = next((r.median_s for r in rows if r.algorithm == "generic_qp"), np.nan)
    lines = [f"{'algorithm':<16}{'cost':>12}{'error':>14}{'median [s]':>13}{'p95 [s]':>12}{'ref/alg':>10}"]
    for r in rows:
        lines.append(f"{harness.DISPLAY_NAMES.get(r.algorithm, r.algorithm):<16}{r.cost:>12.4f}"
                     f"{r.error:>14.4e}{r.median_s:>13.3e}{r.p95_s:>12.3e}{ref / r.median_s:>10.1f}")
    _say(args, "\n".join(lines))
    _say(args, f"wrote {path}")


HANDLERS = {"static": _static, "montecarlo": _montecarlo, "timesim": _timesim,
            "ams": _ams, "compare": _compare}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    try:
        cfg = load_config(args.config)
        cfg = cfg.with_overrides(seed=args.seed, algorithms=_algorithms(args.algorithms))
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        HANDLERS[args.command](cfg, out, args)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (AllocationError, np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
