"""Command line entry point.

    zosga-irs run --config toy --method zosga_aa --sims 10 --out toy.csv
    zosga-irs sweep --config toy --key rician.beta_ai,rician.beta_iu \
        --values "0 dB,20 dB" --methods zosga_aa,random_irs --out sweep.csv
    zosga-irs validate --config my.cfg

``--config`` takes a file path or the name of a built-in scenario. The
worker count comes from ``ZOSGA_WORKERS`` (default 1). Exit status is 0 on
success, 2 for a bad scenario or argument, 3 for a failure while running.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .errors import ConfigError, DimensionError, ParameterError
from .harness import SweepSpec, export_results, run_ensemble, run_sweep
from .scenario import METHODS, builtin_scenario, load_scenario

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise ConfigError(message)


def _scenario(config: str, iters: int | None):
    path = Path(config)
    scenario = load_scenario(path) if path.exists() or path.suffix else builtin_scenario(config)
    if iters is not None:
        scenario = scenario.with_overrides({"iterations": str(iters)})
    return scenario


def _methods(text: str) -> list[str]:
    methods = [m.strip() for m in text.split(",") if m.strip()]
    for m in methods:
        if m not in METHODS and not m.startswith("external:"):
            raise ConfigError(f"unknown method {m!r}; choose from {', '.join(METHODS)} or external:<csv>")
    if not methods:
        raise ConfigError("no method given")
    return methods


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="zosga-irs", description="Two-timescale IRS optimization experiments.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p):
        p.add_argument("--config", required=True, help="scenario file or built-in name (toy, two_irs, default)")
        p.add_argument("--sims", type=_positive, default=1)
        p.add_argument("--iters", type=_positive, default=None, help="override the scenario's iteration count")
        p.add_argument("--seed", type=int, default=0, help="master seed")
        p.add_argument("--out", required=True)
        p.add_argument("--format", choices=("csv", "json"), default=None,
                       help="defaults to the extension of --out, else csv")

    run = sub.add_parser("run", help="one ensemble for one method")
    common(run)
    run.add_argument("--method", required=True)

    sweep = sub.add_parser("sweep", help="ensembles over a list of values for one or more coupled keys")
    common(sweep)
    sweep.add_argument("--key", required=True, help="comma separated keys set to the same value")
    sweep.add_argument("--values", required=True, help="comma separated values, e.g. '0 dB,20 dB'")
    sweep.add_argument("--methods", default="zosga_aa,random_irs")

    validate = sub.add_parser("validate", help="check a scenario file and print its hash")
    validate.add_argument("--config", required=True)
    return parser


def _format(args) -> str:
    if args.format:
        return args.format
    return "json" if Path(args.out).suffix.lower() == ".json" else "csv"


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if args.command == "validate":
            scenario = _scenario(args.config, None)
            print(f"ok {scenario.hash} M={scenario.network.num_antennas} "
                  f"K={scenario.network.num_users} irs={list(scenario.network.irs_sizes)}")
            return EXIT_OK
        scenario = _scenario(args.config, args.iters)
        methods = _methods(args.method if args.command == "run" else args.methods)
        if args.command == "run":
            if len(methods) != 1:
                raise ConfigError("run takes exactly one method; use sweep for several")
        else:
            keys = tuple(k.strip() for k in args.key.split(",") if k.strip())
            values = tuple(v.strip() for v in args.values.split(",") if v.strip())
            spec = SweepSpec(keys, values, args.sims)
            for v in values:
                scenario.with_overrides({k: v for k in keys})
    except (ConfigError, ParameterError, DimensionError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SystemExit as exc:           # --help
        return EXIT_OK if not exc.code else EXIT_CONFIG
    try:
        if args.command == "run":
            records = [run_ensemble(scenario, methods[0], args.seed, args.sims)]
        else:
            records = run_sweep(scenario, spec, methods, args.seed)
        export_results(records, args.out, _format(args))
    except Exception as exc:            # noqa: BLE001
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    for rec in records:
        print(f"{rec.method} {rec.scenario_hash} n={rec.n_sims} final={rec.mean_final:.6g} "
              f"({rec.wall_clock:.1f}s)")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
