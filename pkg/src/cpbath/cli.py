"""Command-line entry point ``cpbath``."""
from __future__ import annotations

import argparse
import logging
import sys

from .config import bundled_scenarios, load_bundled, load_config
from .errors import ConfigParse, EmptySweep, InvalidSpec, PivotTooSmall, SingularDamping, StepSizeUnderflow
from .scenario import run_scenario

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SOLVER = 3


def _float_list(text: str):
    try:
        return tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="cpbath",
        description="Classical dynamics on CP^{N-1} with a harmonic bath: run configured scenarios.",
    )
    src = ap.add_mutually_exclusive_group()
    src.add_argument("--config", metavar="PATH", help="scenario config file")
    src.add_argument("--scenario", metavar="NAME", help="bundled scenario name")
    ap.add_argument("--list", action="store_true", help="list bundled scenarios and exit")
    ap.add_argument("--gamma", metavar="LIST", type=_float_list, help="damping values to sweep, e.g. 0,0.1,1")
    ap.add_argument("--t-final", type=float, metavar="X")
    ap.add_argument("--sample-dt", type=float, metavar="X")
    ap.add_argument("--oracle", action="store_true", help="also write the Schrodinger comparison for isolated runs")
    ap.add_argument("--explicit-bath", type=int, metavar="N_OSC", help="use an explicit bath with N_OSC oscillators per coordinate")
    ap.add_argument("--out", metavar="DIR", help="output directory")
    ap.add_argument("--plot-script", action="store_true", help="write a gnuplot script for the outputs")
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def _apply_overrides(cfg, args):
    kw = {}
    if args.gamma is not None:
        if not args.gamma:
            raise EmptySweep("--gamma needs at least one value")
        kw["sweep"] = args.gamma
        if cfg.bath == "none":
            kw["bath"] = "markovian"
    if args.t_final is not None:
        kw["t_final"] = args.t_final
    if args.sample_dt is not None:
        kw["sample_dt"] = args.sample_dt
    if args.oracle:
        kw["oracle"] = True
    if args.explicit_bath is not None:
        kw["bath"] = "explicit"
        kw["oscillators"] = args.explicit_bath
    if args.out is not None:
        kw["output_dir"] = args.out
    if args.plot_script:
        kw["plot_script"] = True
    return cfg.replace(**kw) if kw else cfg


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    if args.list:
        print("\n".join(bundled_scenarios()))
        return EXIT_OK
    try:
        if args.config:
            cfg = load_config(args.config)
        elif args.scenario:
            cfg = load_bundled(args.scenario)
        else:
            print("cpbath: one of --config or --scenario is required", file=sys.stderr)
            return EXIT_CONFIG
        cfg = _apply_overrides(cfg, args)
        results = run_scenario(cfg)
    except (ConfigParse, EmptySweep, InvalidSpec, PivotTooSmall) as exc:
        print(f"cpbath: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (StepSizeUnderflow, SingularDamping) as exc:
        print(f"cpbath: solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except OSError as exc:
        print(f"cpbath: i/o error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as exc:
        print(f"cpbath: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    for r in results:
        for p in r.paths:
            print(p)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
