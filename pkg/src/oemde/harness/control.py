import argparse
import json
import logging
import sys
from functools import wraps
from pathlib import Path
from typing import List, NoReturn, Optional

import pandas as pd

from ..algorithms import expand_preset, run, variant_names
from ..benchmarks import REGISTRY, BenchmarkSpec, make_problem
from ..stats import DEFAULT_ALPHA
from ..utils import ConfigurationError, atomic_write_text
from .curves import emit_convergence_csv
from .loaders import load_cell_traces, load_errors
from .runner import (
    ExperimentConfig,
    run_experiment,
    tally_table,
    trace_csv,
    verdict_table,
)

logger = logging.getLogger(__name__)

HELP = "Opposition-based ensemble micro-DE experiments"

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_FAULT = 3

RUN_HELP = "Usage: oemde run --config experiment.json"
SOLVE_HELP = "Usage: oemde solve --variant OEMDE --function sphere --dim 10"
COMPARE_HELP = "Usage: oemde compare --dir results"
CURVES_HELP = "Usage: oemde curves --dir results --function sphere --dim 10"


class ControlExit(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def faults_to_exit_codes(func):
    """
    Decorator which turns library errors raised by a subcommand into
    the documented exit codes.
    """

    @wraps(func)
    def _wrapper(self, *args, **kwargs):
        try:
            return func(self, *args, **kwargs)
        except ConfigurationError as e:
            self.die(EXIT_CONFIG, f"configuration error: {e}")
        except Exception as e:
            # any other failure is a runtime fault, not a configuration one
            logger.debug(f"{func.__name__} failed", exc_info=True)
            self.die(EXIT_FAULT, f"{type(e).__name__}: {e}")

    return _wrapper


class OEMDEControl:
    def __init__(self, stdout=None, stderr=None):
        self.stdout = stdout or sys.stdout
        self.stderr = stderr or sys.stderr

    def out(self, text: str = "") -> None:
        print(text, file=self.stdout)

    def die(self, code: int, message: str) -> NoReturn:
        print(message, file=self.stderr)
        raise ControlExit(code, message)

    def _configure(self, parser: argparse.ArgumentParser) -> None:
        parser.add_argument(
            "-v",
            "--verbose",
            action="count",
            default=0,
            help="-v for progress, -vv for debug output",
        )
        sub = parser.add_subparsers(dest="command", metavar="command")
        sub.required = True

        run_ = sub.add_parser("run", help=RUN_HELP)
        run_.add_argument("--config", required=True, help="JSON config file")
        run_.add_argument(
            "--workers", type=int, help="override the config worker count"
        )
        run_.set_defaults(handler=self.run)

        solve = sub.add_parser("solve", help=SOLVE_HELP)
        solve.add_argument("--variant", required=True)
        solve.add_argument("--function", required=True)
        solve.add_argument("--dim", type=int, required=True)
        solve.add_argument("--seed", type=int, default=0)
        solve.add_argument("--shift-seed", type=int, default=0)
        solve.add_argument("--nfc-max", type=int)
        solve.add_argument("--cr", type=float)
        solve.add_argument("--np", type=int)
        solve.add_argument(
            "--trace", help="write the trace CSV here instead of stdout"
        )
        solve.set_defaults(handler=self.solve)

        compare = sub.add_parser("compare", help=COMPARE_HELP)
        compare.add_argument("--dir", required=True)
        compare.add_argument("--alpha", type=float, default=DEFAULT_ALPHA)
        compare.add_argument("--reference", default="OEMDE")
        compare.set_defaults(handler=self.compare)

        curves = sub.add_parser("curves", help=CURVES_HELP)
        curves.add_argument("--dir", required=True)
        curves.add_argument("--function", required=True)
        curves.add_argument("--dim", type=int, required=True)
        curves.add_argument("--points", type=int, default=100)
        curves.add_argument(
            "--out", help="output folder (default: <dir>/curves)"
        )
        curves.set_defaults(handler=self.curves)

        functions = sub.add_parser(
            "list-functions", help="bundled benchmark functions"
        )
        functions.set_defaults(handler=self.list_functions)
        variants = sub.add_parser("list-variants", help="named variants")
        variants.set_defaults(handler=self.list_variants)

    def invoke(self, argv: Optional[List[str]] = None) -> int:
        parser = argparse.ArgumentParser(prog="oemde", description=HELP)
        self._configure(parser)
        try:
            args = parser.parse_args(argv)
        except SystemExit as e:
            # argparse usage errors are configuration errors
            return EXIT_OK if e.code == 0 else EXIT_CONFIG
        configure_logging(args.verbose)
        try:
            args.handler(args)
        except ControlExit as e:
            return e.code
        return EXIT_OK

    @faults_to_exit_codes
    def run(self, args):
        config = ExperimentConfig.from_file(args.config)
        if args.workers is not None:
            config.workers = args.workers
            config.validate()
        out = run_experiment(config)
        self.out(f"results written to {out}")
        self.out(pd.read_csv(out / "summary.csv").to_string(index=False))

    @faults_to_exit_codes
    def solve(self, args):
        problem = make_problem(
            BenchmarkSpec(args.function, args.dim, args.shift_seed)
        )
        config = expand_preset(
            args.variant,
            args.dim,
            nfc_max=args.nfc_max,
            cr=args.cr,
            np=args.np,
        )
        result = run(problem, config, args.seed)
        document = {
            "variant": args.variant,
            "problem": problem.name,
            "strategy": config.describe(),
            "result": result.to_dict(),
        }
        self.out(json.dumps(document, indent=2))
        if args.trace:
            atomic_write_text(args.trace, trace_csv(result.trace))
        else:
            self.out(trace_csv(result.trace).rstrip("\n"))

    @faults_to_exit_codes
    def compare(self, args):
        errors = load_errors(args.dir)
        verdicts = verdict_table(errors, args.reference, args.alpha)
        if verdicts.empty:
            self.out(f"no cells to compare against {args.reference}")
            return
        matrix = verdicts.pivot_table(
            index=["function", "dimension"],
            columns="competitor",
            values="sign",
            aggfunc="first",
        )
        self.out(f"reference: {args.reference}  alpha: {args.alpha}")
        self.out(matrix.to_string())
        self.out()
        self.out(tally_table(verdicts).to_string(index=False))

    @faults_to_exit_codes
    def curves(self, args):
        traces = load_cell_traces(args.dir, args.function, args.dim)
        out = Path(args.out) if args.out else Path(args.dir) / "curves"
        for path in emit_convergence_csv(
            traces, args.function, args.dim, out, args.points
        ):
            self.out(str(path))

    def list_functions(self, args):
        for func in REGISTRY.values():
            self.out(
                f"{func.function_id:<24}{func.function_class.value:<32}"
                f"D>={func.min_dimension}"
            )

    def list_variants(self, args):
        for name in variant_names():
            strategy = expand_preset(name, 1).describe()
            flags = ", ".join(
                f"{k}={strategy[k]}"
                for k in ("scale_factor", "scheme_pool", "opposition")
            )
            self.out(f"{name:<8}{flags}")


def configure_logging(verbosity: int) -> None:
    level = {0: logging.WARNING, 1: logging.INFO}.get(verbosity, logging.DEBUG)
    logging.basicConfig(
        level=level, format="%(asctime)s %(name)s %(levelname)s: %(message)s"
    )
