import argparse
import json
import sys
import time
from datetime import datetime, timezone
from typing import Optional, Sequence

from cli.commands import COMMANDS
from cli.report import Report, emit_csv, emit_json
from cli.run_config import RunConfig, build_run_config
from config.config import config
from config.logger import set_log_level, setup_logger
from db.handler import ReportStore
from utils.errors import InvalidInputError, LabError, NumericalError

logger = setup_logger(__name__)

EXIT_OK = 0
EXIT_ASSERTION_FAILED = 1


def _common_options() -> argparse.ArgumentParser:
    parent = argparse.ArgumentParser(add_help=False)
    io = parent.add_argument_group("input / output")
    io.add_argument("--config", help="JSON run configuration")
    io.add_argument("--out", help="Write the JSON report here instead of stdout")
    io.add_argument("--csv", help="Write the report's table as CSV")
    io.add_argument("--db", help="Archive the report in this database (SQLAlchemy URL)")
    io.add_argument(
        "--log-level", choices=["DEBUG", "INFO", "WARNING", "ERROR"], help="Overrides LOG_LEVEL"
    )

    market = parent.add_argument_group("market parameters")
    market.add_argument("--r", type=float, help="Risk-free rate")
    market.add_argument("--sigma2", type=float, help="BS variance sigma²")
    market.add_argument("--lambda", dest="lam", type=float, help="MG lambda")
    market.add_argument("--mu", type=float, help="MG mu")
    market.add_argument("--zeta", type=float, help="MG zeta")
    market.add_argument("--alpha", type=float, help="MG alpha")
    market.add_argument("--rho", type=float, help="MG rho")
    market.add_argument("--mu2", type=float, help="Quartic coefficient of S²")
    market.add_argument("--lam4", type=float, help="Quartic coefficient of S⁴")

    grid = parent.add_argument_group("grid")
    grid.add_argument("--x-min", type=float)
    grid.add_argument("--x-max", type=float)
    grid.add_argument("--nx", type=int)
    grid.add_argument("--y-min", type=float)
    grid.add_argument("--y-max", type=float)
    grid.add_argument("--ny", type=int)

    evolution = parent.add_argument_group("evolution")
    evolution.add_argument("--maturity", type=float)
    evolution.add_argument("--steps", type=int)
    evolution.add_argument("--scheme", choices=["implicit-euler", "crank-nicolson"])
    evolution.add_argument("--rannacher-steps", type=int)

    analysis = parent.add_argument_group("analysis")
    analysis.add_argument("--y", type=float, help="Log-variance")
    analysis.add_argument("--ys", type=float, nargs="+", help="Log-variance sweep")
    analysis.add_argument("--bracket", type=float, nargs=2, metavar=("Y_LO", "Y_HI"))
    analysis.add_argument("--samples", type=int, help="Scan resolution")
    analysis.add_argument("--strike", type=float)
    analysis.add_argument("--spot", type=float)
    analysis.add_argument("--model", choices=["bs", "mg"])

    tolerances = parent.add_argument_group("tolerances")
    for key in (
        "stationarity",
        "residual",
        "commutator",
        "broken",
        "root",
        "price",
        "deviation",
        "manifold",
    ):
        tolerances.add_argument(f"--tol-{key}", type=float)
    return parent


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qlab", description="Martingale vacuum laboratory for BS and MG Hamiltonians"
    )
    subparsers = parser.add_subparsers(dest="command", required=True)
    parent = _common_options()
    for name in COMMANDS:
        subparsers.add_parser(name, parents=[parent])
    return parser


class LabRunner:
    """Runs one subcommand end to end: compute, emit, archive."""

    def __init__(self, cfg: RunConfig):
        self.cfg = cfg
        self.store: Optional[ReportStore] = None

    def run(self) -> int:
        """
        Executes the configured subcommand.

        Returns:
            int: 0 when every check passed, 1 otherwise.
        """
        try:
            started = time.perf_counter()
            logger.info("Running %s", self.cfg.command)
            report: Report = COMMANDS[self.cfg.command](self.cfg)
            report.meta = {
                "version": config.APP_VERSION,
                "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
                "duration_s": round(time.perf_counter() - started, 6),
            }

            emit_json(report, self.cfg.out)
            if self.cfg.csv:
                emit_csv(report.primary_table(), self.cfg.csv)
            if self.cfg.db:
                self._archive(report)

            logger.info("%s finished, passed=%s", self.cfg.command, report.passed)
            return EXIT_OK if report.passed else EXIT_ASSERTION_FAILED
        finally:
            self._cleanup()

    def _archive(self, report: Report):
        try:
            self.store = ReportStore(self.cfg.db)
            self.store.upsert(report.to_dict())
        except Exception as e:
            # The computation already succeeded; archiving is best effort.
            logger.error(f"Report archive failed: {e}")

    def _cleanup(self):
        """Clean up resources."""
        if self.store:
            self.store.close()


def _emit_error(error: LabError) -> int:
    sys.stdout.write(json.dumps({"error": error.to_dict()}, sort_keys=True) + "\n")
    sys.stdout.flush()
    return error.exit_code


def run(argv: Sequence[str]) -> int:
    """
    Parses argv, runs the subcommand and maps failures to exit codes:
    0 success, 1 failed check, 2 invalid input, 3 numerical failure.
    """
    args = vars(build_parser().parse_args(list(argv)))
    command = args.pop("command")
    config_path = args.pop("config")
    log_level = args.pop("log_level")
    if log_level:
        set_log_level(log_level)

    try:
        cfg = build_run_config(command, args, config_path)
        return LabRunner(cfg).run()
    except LabError as e:
        logger.error(f"{command} failed: {e}")
        return _emit_error(e)
    except ArithmeticError as e:
        logger.error(f"{command} failed numerically: {e}")
        return _emit_error(NumericalError(str(e)))
    except ValueError as e:
        logger.error(f"{command} rejected its inputs: {e}")
        return _emit_error(InvalidInputError(str(e)))
