"""Command-line front end for the experiment drivers.

Subcommands: ``rate-sweep``, ``music``, and ``optimize-once``.  Each reads
an optional flat key = value config file, applies command-line overrides,
runs the experiment, and writes CSV/JSON files into the output directory.
Exit status is 0 on success and 2 on validation or I/O failure.
"""

from __future__ import annotations

import argparse
import sys

from .harness import (config_from_file, emit_results, run_music_experiment,
                      run_optimize_once, run_rate_sweep)

_RUNNERS = {
    "rate-sweep": run_rate_sweep,
    "music": run_music_experiment,
    "optimize-once": run_optimize_once,
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fimsim",
        description="Doubly-dispersive MIMO simulation with morphable arrays")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
            ("rate-sweep", "achievable-rate sweep over SNR, waveforms, and array modes"),
            ("music", "bistatic 2D angle-estimation experiment"),
            ("optimize-once", "optimize the surfaces of a single realization")):
        cmd = sub.add_parser(name, help=help_text)
        cmd.add_argument("--config", default=None, help="flat key = value config file")
        cmd.add_argument("--seed", type=int, default=None, help="master seed")
        cmd.add_argument("--out", default=None,
                         help="output directory (default: the config's out_dir)")
        cmd.add_argument("--trials", type=int, default=None,
                         help="number of Monte Carlo trials")
        cmd.add_argument("--reuse-shapes", action="store_true", default=None,
                         help="optimize surfaces once and reuse them everywhere")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        config = config_from_file(args.config, seed=args.seed, trials=args.trials,
                                  reuse_shapes=args.reuse_shapes, out_dir=args.out)
        result = _RUNNERS[args.command](config)
        written = emit_results(result, config.out_dir)
    except (ValueError, OSError) as exc:
        print(f"fimsim: error: {exc}", file=sys.stderr)
        return 2
    for path in written:
        print(path)
    return 0


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
