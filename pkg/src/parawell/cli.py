"""Command-line entry point.

    parawell converge-iters|converge-order|noise-impact|solve --config FILE --out DIR
             [--seed S] [--samples M] [--threads P]

Exit codes: 0 success, 2 configuration error, 3 numerical failure,
4 I/O error.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from .config import ExperimentConfig
from .errors import ConfigError, ConvergenceError
from .experiments import run_converge_iters, run_converge_order, run_noise_impact, run_solve
from . import output

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4

log = logging.getLogger("parawell")


def _write(command: str, cfg: ExperimentConfig, table, out: Path) -> None:
    out.mkdir(parents=True, exist_ok=True)
    output.write_errors_csv(table, out / "errors.csv")
    output.write_timings_csv(table, out / "timing.csv")
    if command in ("converge-iters", "solve", "noise-impact"):
        output.line_chart(output.error_series(table), out / "errors.svg",
                          title=f"{cfg.name}: error vs iteration", xlabel="k", ylabel="error")
    if command == "converge-order":
        output.write_slopes_csv(table, out / "slopes.csv")
        ks = cfg.orders_k or tuple(range(cfg.K + 1))
        output.line_chart(output.order_series(table, ks), out / "order.svg",
                          title=f"{cfg.name}: error vs coarse step", xlabel="dT",
                          ylabel="error", xlog=True)
    if command == "noise-impact":
        output.write_snapshot_csv(table, out / "snapshot.csv")
        output.write_roughness_csv(table, out / "roughness.csv")
        lams = list(table.roughness)
        output.line_chart({"roughness": (lams, [table.roughness[v] for v in lams])},
                          out / "roughness.svg", title=f"{cfg.name}: roughness vs noise scale",
                          xlabel="lambda", ylabel="std(E_z - E_z[lambda=0])")
    if command == "solve":
        output.write_snapshot_csv(table, out / "snapshot.csv", components=None)


RUNNERS = {
    "converge-iters": run_converge_iters,
    "converge-order": run_converge_order,
    "noise-impact": run_noise_impact,
    "solve": run_solve,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="parawell", description=__doc__.split("\n\n")[0])
    parser.add_argument("command", choices=sorted(RUNNERS))
    parser.add_argument("--config", required=True, type=Path)
    parser.add_argument("--out", required=True, type=Path)
    parser.add_argument("--seed", type=int, help="override master_seed")
    parser.add_argument("--samples", type=int, help="override mc_samples")
    parser.add_argument("--threads", type=int, default=None,
                        help="worker threads (default: available CPUs)")
    parser.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = ExperimentConfig.load(args.config)
        threads = args.threads if args.threads is not None else (os.cpu_count() or 1)
        cfg = cfg.override(master_seed=args.seed, mc_samples=args.samples, threads=threads)
        table = RUNNERS[args.command](cfg)
        _write(args.command, cfg, table, args.out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ConvergenceError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
