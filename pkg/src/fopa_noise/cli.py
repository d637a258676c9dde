"""
Command-line front end.

    python -m fopa_noise sweep --model four --xi-start 0 --xi-stop 5 --xi-count 51 --modes 1,2,3,4
    python -m fopa_noise validate --model custom:toy.json
    python -m fopa_noise oracle --model two --xi 0.3 --alpha 0.8 --alpha 0.4
    python -m fopa_noise preset fig4 --output-dir results/

Exit codes: 0 success, 1 usage error, 2 validation failure, 3 oracle non-convergence.
"""

import argparse
import cmath
import logging
import math
import sys
from pathlib import Path
from typing import List, Optional, Sequence

from pydantic import ValidationError

from fopa_noise import assumptions
from fopa_noise.core.mode_algebra import validate_symplectic
from fopa_noise.core.models import ModelId, NonlinearPhase, build_model
from fopa_noise.errors import (
    FopaError,
    OracleConsistencyError,
    OracleConvergenceError,
    RowConditionError,
)
from fopa_noise.oracle.fock import FockConfig, compare_with_oracle
from fopa_noise.processing.config import SweepConfig, load_config
from fopa_noise.processing.export import summarize, write_results
from fopa_noise.processing.presets import PRESETS, run_preset
from fopa_noise.processing.sweep import ResultRow, evaluate_sweep

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_VALIDATION = 2
EXIT_NONCONVERGENCE = 3


class _Parser(argparse.ArgumentParser):
    """Usage errors exit with 1, not argparse's default 2 (reserved for validation failures)."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"[ERROR] {message}\n")


def configure_logging(verbose: bool = False, quiet: bool = False) -> None:
    level = logging.DEBUG if verbose else logging.WARNING if quiet else logging.INFO
    logging.basicConfig(format="[%(levelname)s] %(message)s", level=level, force=True)


def parse_amplitude(text: str) -> complex:
    """Either a Python complex literal ("0.4+0.2j") or polar "r@phase" with the phase in units of pi."""
    text = text.strip()
    try:
        if "@" in text:
            radius, phase = text.split("@", 1)
            return cmath.rect(float(radius), assumptions.theta_from_pi_units(float(phase)))
        return complex(text.replace(" ", ""))
    except ValueError:
        raise argparse.ArgumentTypeError(f"Invalid amplitude {text!r}") from None


def parse_modes(text: str) -> List[int]:
    try:
        return [int(j) for j in text.split(",") if j.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"Modes must be a comma-separated list of integers, got {text!r}") from None


def _resolve_xi(args) -> float:
    if args.gamma is not None or args.power is not None or args.length is not None:
        if None in (args.gamma, args.power, args.length):
            raise ValueError("--gamma, --power and --length must be given together")
        return NonlinearPhase.from_physical(args.gamma, args.power, args.length).xi
    return NonlinearPhase(args.xi).xi


def _add_physical(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("physical parameters (replace --xi)")
    group.add_argument("--gamma", type=float, help="Fiber nonlinear coefficient (1/(W km))")
    group.add_argument("--power", type=float, help="Power of each pump (W)")
    group.add_argument("--length", type=float, help="Fiber length (km)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="fopa_noise", description="Gains and noise figures of multi-mode fiber parametric amplifiers")
    parser.add_argument("-v", "--verbose", action="store_true", help="Debug logging")
    parser.add_argument("-q", "--quiet", action="store_true", help="Warnings and errors only")
    sub = parser.add_subparsers(dest="command", required=True)

    # sweep: every default is None so that config-file values survive unless overridden
    sw = sub.add_parser("sweep", help="Sweep xi and Theta, write a CSV or JSON result file")
    sw.add_argument("--config", type=str, help="JSON config file (flags override its values)")
    sw.add_argument("--model", type=str, help="two, four or custom:<path> (default: two)")
    sw.add_argument("--xi", type=float, help="Single nonlinear phase xi = gamma*P*z")
    sw.add_argument("--xi-start", type=float)
    sw.add_argument("--xi-stop", type=float)
    sw.add_argument("--xi-count", type=int)
    sw.add_argument("--xi-spacing", choices=["linear", "log"])
    _add_physical(sw)
    sw.add_argument("--theta", type=float, help="Single composite phase Theta")
    sw.add_argument("--theta-start", type=float)
    sw.add_argument("--theta-stop", type=float)
    sw.add_argument("--theta-count", type=int)
    sw.add_argument("--theta-spacing", choices=["linear", "log"])
    sw.add_argument("--theta-pi", action="store_true", default=None, help="Theta values are in units of pi")
    sw.add_argument("--regime", choices=["PIA", "PSA"], type=str.upper)
    sw.add_argument("--injected", type=str, help="Number p of injected leading modes, or flags such as 1100")
    sw.add_argument("--alpha-sq", type=float, help=f"Input photons per injected mode (default {assumptions.LARGE_SIGNAL_PHOTONS:g})")
    sw.add_argument("--modes", type=parse_modes, help="Comma-separated output modes to report (default: 1)")
    sw.add_argument("--nf-method", choices=["closed-form", "exact"])
    sw.add_argument("--pair-weight", choices=["row", "printed"])
    sw.add_argument("--output", type=str, help="Result file (default: sweep.<format>)")
    sw.add_argument("--format", choices=["csv", "json"])
    sw.add_argument("--workers", type=int)

    va = sub.add_parser("validate", help="Check the commutator conditions of a transfer matrix")
    va.add_argument("--model", type=str, default=assumptions.DEFAULT_MODEL)
    va.add_argument("--xi", type=float, default=0.0)
    _add_physical(va)
    va.add_argument("--tol", type=float, help="Residual tolerance (default 1e-12 built-in, 1e-9 custom)")

    orc = sub.add_parser("oracle", help="Compare closed-form moments with the truncated Fock-space oracle")
    orc.add_argument("--model", type=str, default=assumptions.DEFAULT_MODEL)
    orc.add_argument("--xi", type=float, default=0.0)
    _add_physical(orc)
    orc.add_argument("--alpha", type=parse_amplitude, action="append", required=True,
                     help="Input amplitude per mode, repeated in mode order (0.8, 0.4+0.2j or 0.4@0.333)")
    orc.add_argument("--cutoff", type=int, default=assumptions.DEFAULT_CUTOFF, help="Starting Fock cutoff D")
    orc.add_argument("--tol", type=float, default=assumptions.ORACLE_AGREEMENT_TOL)

    pr = sub.add_parser("preset", help="Regenerate a figure dataset")
    pr.add_argument("name", choices=sorted(PRESETS))
    pr.add_argument("--output-dir", type=str, default=".")
    pr.add_argument("--format", choices=["csv", "json"], default="csv")
    pr.add_argument("--workers", type=int, default=assumptions.DEFAULT_WORKERS)
    return parser


# -----------------------------------------------------------------------------
# Console reports
# -----------------------------------------------------------------------------

def print_summary_report(rows: Sequence[ResultRow], title: str) -> None:
    print("\n" + "=" * 80)
    print(title)
    print("=" * 80)
    summary = summarize(rows)
    if summary.empty:
        print("  (no rows)")
    for rec in summary.to_dict(orient="records"):
        print(f"  Mode {rec['mode']}: gain {_fmt_db(rec['gain_db_min'])} .. {_fmt_db(rec['gain_db_max'])}, "
              f"NF {_fmt_db(rec['nf_db_min'])} .. {_fmt_db(rec['nf_db_max'])} over {rec['points']} points")
    print("=" * 80 + "\n")


def _fmt_db(value) -> str:
    return "n/a" if value is None or math.isnan(value) else f"{value:.3f} dB"


# -----------------------------------------------------------------------------
# Subcommands
# -----------------------------------------------------------------------------

def cmd_sweep(args) -> int:
    config = load_config(args.config) if args.config else SweepConfig()
    overrides = {k: v for k, v in vars(args).items() if k not in ("config", "command", "verbose", "quiet")}
    config = config.merged(overrides)
    spec = config.to_spec()
    rows = evaluate_sweep(spec, workers=config.workers)
    output = Path(config.output or f"sweep.{config.format}")
    write_results(rows, output, config.format)
    print(f"[INFO] Wrote {len(rows)} rows to {output}")
    print_summary_report(rows, f"SWEEP {spec.model} {spec.regime.value} ({spec.nf_method.value})")
    return EXIT_OK


def cmd_validate(args) -> int:
    model = ModelId.parse(args.model)
    builtin = model.kind != "custom"
    tol = args.tol if args.tol is not None else (
        assumptions.BUILTIN_MATRIX_TOL if builtin else assumptions.USER_MATRIX_TOL
    )
    try:
        matrix = build_model(model, _resolve_xi(args), tol)
    except RowConditionError as exc:
        for j, r in zip(exc.rows, exc.residuals):
            print(f"[ERROR] Row {j}: residual {r:.3e} > {tol:g}")
        print("FAIL")
        return EXIT_VALIDATION

    report = validate_symplectic(matrix, tol)
    print(f"Matrix: {matrix.label} (signature {matrix.signature})")
    for j, r in enumerate(report.row_residuals, start=1):
        status = "ok" if r <= tol else "FAIL"
        print(f"  row {j}: residual {r:.3e} {status}")
    for (j, l), r in sorted(report.pair_residuals.items()):
        status = "ok" if r <= tol else "FAIL"
        print(f"  pair ({j},{l}): residual {r:.3e} {status}")
    print("PASS" if report.passed else "FAIL")
    return EXIT_OK if report.passed else EXIT_VALIDATION


def cmd_oracle(args) -> int:
    matrix = build_model(ModelId.parse(args.model), _resolve_xi(args))
    result = compare_with_oracle(matrix, args.alpha, FockConfig(cutoff=args.cutoff), args.tol)
    print(f"Matrix: {matrix.label}, oracle cutoff D={result.oracle.cutoff}, "
          f"truncation {result.oracle.truncation:.2e}")
    print(f"{'mode':>4} {'mean (closed)':>18} {'mean (oracle)':>18} {'var (closed)':>18} {'var (oracle)':>18}")
    for rec in result.as_records():
        print(f"{rec['mode']:>4} {rec['mean_closed']:>18.12g} {rec['mean_oracle']:>18.12g} "
              f"{rec['var_closed']:>18.12g} {rec['var_oracle']:>18.12g}")
    print(f"Max relative deviation: {result.deviation:.3e} (tol {result.tol:g})")
    print("PASS" if result.passed else "FAIL")
    return EXIT_OK if result.passed else EXIT_VALIDATION


def cmd_preset(args) -> int:
    written = run_preset(args.name, args.output_dir, args.format, args.workers)
    for path, rows in written:
        print(f"[INFO] Wrote {len(rows)} rows to {path}")
        print_summary_report(rows, f"PRESET {path.stem}")
    return EXIT_OK


COMMANDS = {"sweep": cmd_sweep, "validate": cmd_validate, "oracle": cmd_oracle, "preset": cmd_preset}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    configure_logging(args.verbose, args.quiet)

    try:
        return COMMANDS[args.command](args)
    except OracleConvergenceError as exc:
        print(f"[ERROR] {exc}", file=sys.stderr)
        return EXIT_NONCONVERGENCE
    except (RowConditionError, OracleConsistencyError) as exc:
        print(f"[ERROR] {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (FopaError, ValidationError, ValueError) as exc:
        print(f"[ERROR] {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
