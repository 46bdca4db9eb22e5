"""
NemacolRunner: batch command-line surface of the nematic colloid solver.

Subcommands:
    simulate   --scenario <file> --out <dir>
    verify     transform | operators | grid [--grids a,b,c] [--out <dir>]
    fit-decay  --series <csv> --column <name> [--tail 0.5]
    validate   --scenario <file>

Exit codes: 0 success, 1 validation failure, 2 runtime abort.
"""

import argparse
import logging
import os
import sys
from pathlib import Path

import orjson
import scipy.fft

from nemacol.diagnostics.decay import fit_series
from nemacol.nemacol_defs import ExitCode, InitialDataError, SimulationAbort, SimulationConstants
from nemacol.oracle.pullback import grid_suite, operator_suite, orders_within, transform_check
from nemacol.solver.scenario_builder import parse_scenario, write_resolved
from nemacol.solver.simulation_runner import run
from nemacol.solver.validation import validate_initial
from nemacol.tools.data_logger import write_convergence


# ==== CONFIG ====

logging.basicConfig(
    level=logging.WARNING,  # Set default level
    format="%(name)s - %(levelname)s - %(message)s",
    handlers=[logging.StreamHandler()],  # Output to console
)

debug_logger = logging.getLogger(__name__)
debug_logger.setLevel(logging.INFO)

logging.getLogger("nemacol.solver.simulation_runner").setLevel(logging.INFO)
logging.getLogger("nemacol.solver.scenario_builder").setLevel(logging.INFO)
logging.getLogger("nemacol.solver.coupled_system").setLevel(logging.WARNING)
logging.getLogger("nemacol.solver.projection").setLevel(logging.WARNING)
logging.getLogger("nemacol.transform.flow_map").setLevel(logging.WARNING)
logging.getLogger("nemacol.diagnostics.evaluation_engine").setLevel(logging.WARNING)
logging.getLogger("nemacol.tools.data_logger").setLevel(logging.WARNING)

# Transform invariants checked by `verify transform`
TRANSFORM_LIMITS = {"volume": 1e-6, "inversion": 1e-8, "metric": 1e-8}
ORDER_WINDOW = (1.7, 2.3)


def parse_grids(text):
    """'32,64,128' (N_theta = 2 N_r) or '32x64,64x128' -> [(N_r, N_theta), ...]."""
    grids = []
    for item in text.split(","):
        item = item.strip().lower()
        if "x" in item:
            n_r, n_theta = item.split("x", 1)
            grids.append((int(n_r), int(n_theta)))
        else:
            grids.append((int(item), 2 * int(item)))
    if len(grids) < 2:
        raise argparse.ArgumentTypeError("--grids needs at least two resolutions")
    return grids


def parse_args(argv=None):
    """Parse command-line arguments for runner options."""

    parser = argparse.ArgumentParser(prog="nemacol", description="Nematic colloid simulation runner")
    sub = parser.add_subparsers(dest="command", required=True)

    simulate = sub.add_parser("simulate", help="Run a scenario to T_end")
    simulate.add_argument("--scenario", required=True, type=Path, help="Scenario JSON file")
    simulate.add_argument("--out", required=True, type=Path, help="Output directory")

    verify = sub.add_parser("verify", help="Operator and transform verification")
    verify.add_argument("target", choices=["transform", "operators", "grid"])
    verify.add_argument("--grids", type=parse_grids, default=None, help="Resolutions, e.g. 32,64,128 or 32x64,64x128")
    verify.add_argument("--out", type=Path, default=Path("."), help="Directory for the CSV tables")

    fit = sub.add_parser("fit-decay", help="Fit C exp(-eta t) to a time series column")
    fit.add_argument("--series", required=True, type=Path, help="timeseries.csv of a run")
    fit.add_argument("--column", required=True, help="Column name, or 'decay' for ||v|| + |l| + |omega|")
    fit.add_argument("--tail", type=float, default=SimulationConstants.DEFAULT_TAIL_FRACTION)

    validate = sub.add_parser("validate", help="Check the initial data of a scenario")
    validate.add_argument("--scenario", required=True, type=Path, help="Scenario JSON file")
    return parser.parse_args(argv)


def fft_workers():
    """Worker count from NEMACOL_THREADS; 0 or unset means all cores."""
    raw = os.environ.get(SimulationConstants.THREADS_ENV_VAR, "0")
    try:
        workers = int(raw)
    except ValueError:
        debug_logger.warning(f"Ignoring {SimulationConstants.THREADS_ENV_VAR}={raw!r}: not an integer")
        return -1
    return -1 if workers <= 0 else workers


# ==== CONFIG END ====


class NemacolRunner:
    """Dispatches one subcommand and maps its outcome to an exit code."""

    def __init__(self, args):
        self.args = args

    def execute(self):
        command_map = {
            "simulate": self.simulate,
            "verify": self.verify,
            "fit-decay": self.fit_decay,
            "validate": self.validate,
        }
        with scipy.fft.set_workers(fft_workers()):
            return command_map[self.args.command]()

    def simulate(self):
        out_dir = self.args.out
        out_dir.mkdir(parents=True, exist_ok=True)
        handler = logging.FileHandler(out_dir / SimulationConstants.RUN_LOG_FILE, mode="w")
        handler.setFormatter(logging.Formatter("%(asctime)s - %(name)s - %(levelname)s - %(message)s"))
        logging.getLogger().addHandler(handler)
        try:
            try:
                scenario = parse_scenario(self.args.scenario)
            except (ValueError, OSError) as e:
                debug_logger.error(f"Scenario rejected: {e}")
                return ExitCode.VALIDATION_FAILURE
            write_resolved(scenario, out_dir)
            try:
                result = run(scenario, out_dir=out_dir)
            except (InitialDataError, ValueError, OSError) as e:
                debug_logger.error(f"Initial data rejected: {e}")
                return ExitCode.VALIDATION_FAILURE
            except SimulationAbort as e:
                debug_logger.error(f"Simulation aborted ({type(e).__name__}): {e}")
                return ExitCode.RUNTIME_ABORT
            debug_logger.info(f"Completed {result.final_state.step_index} steps; outputs in {out_dir}")
            return ExitCode.OK
        finally:
            logging.getLogger().removeHandler(handler)
            handler.close()

    def verify(self):
        target, out_dir = self.args.target, self.args.out
        out_dir.mkdir(parents=True, exist_ok=True)
        kwargs = {"grids": self.args.grids} if self.args.grids else {}

        if target == "transform":
            if self.args.grids:
                kwargs = {"grid_size": self.args.grids[-1]}
            frame, summary = transform_check(**kwargs)
            path = out_dir / "transform_violations.csv"
            frame.to_csv(path, index=False, float_format="%.17g")
            debug_logger.info(f"Transform invariants: {summary} (per-node table in {path})")
            failed = [k for k, limit in TRANSFORM_LIMITS.items() if summary[k] > limit]
            if failed:
                debug_logger.error(f"Transform invariants violated: {', '.join(failed)}")
                return ExitCode.VALIDATION_FAILURE
            return ExitCode.OK

        table = operator_suite(**kwargs) if target == "operators" else grid_suite(**kwargs)
        path = write_convergence(table.to_dict("records"), out_dir / f"convergence_{target}.csv")
        print(table.to_string(index=False))
        if target == "operators" and not orders_within(table, *ORDER_WINDOW):
            debug_logger.error(f"Observed orders outside {list(ORDER_WINDOW)}; see {path}")
            return ExitCode.VALIDATION_FAILURE
        return ExitCode.OK

    def fit_decay(self):
        try:
            fit = fit_series(self.args.series, self.args.column, self.args.tail)
        except (ValueError, OSError) as e:
            debug_logger.error(f"Decay fit failed: {e}")
            return ExitCode.VALIDATION_FAILURE
        sys.stdout.write(orjson.dumps(fit.to_dict(), option=orjson.OPT_INDENT_2).decode() + "\n")
        if fit.truncated:
            debug_logger.warning("Decay window truncated at the first non-positive sample")
        return ExitCode.OK

    def validate(self):
        try:
            scenario = parse_scenario(self.args.scenario)
            report = validate_initial(scenario)
        except (ValueError, OSError) as e:
            debug_logger.error(f"Scenario rejected: {e}")
            return ExitCode.VALIDATION_FAILURE
        sys.stdout.write(orjson.dumps(report.to_dict(), option=orjson.OPT_INDENT_2).decode() + "\n")
        if not report.passed:
            debug_logger.error(f"Initial data violates: {', '.join(report.violations)}")
            return ExitCode.VALIDATION_FAILURE
        debug_logger.info("Initial data satisfies all compatibility conditions")
        return ExitCode.OK


def main(argv=None):
    try:
        args = parse_args(argv)
    except SystemExit as e:
        return ExitCode.OK if e.code == 0 else ExitCode.VALIDATION_FAILURE
    return NemacolRunner(args).execute()


if __name__ == "__main__":
    sys.exit(main())
