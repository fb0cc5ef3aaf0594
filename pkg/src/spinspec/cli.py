"""Command-line front end: analyze | spectrum | verify | count.

Exit codes: 0 success, 2 problem-file validation failure, 3 spin-structure
mismatch, 4 ellipticity failure, 5 truncation too small, 6 verify-suite
failure.  SPINSPEC_THREADS caps the BLAS/OpenMP thread pools (it must be
honored before numpy loads, hence the lazy imports below).
"""

from __future__ import annotations

import argparse
import os
import sys

EXIT_VALIDATION = 2
EXIT_SPIN_STRUCTURE = 3
EXIT_ELLIPTICITY = 4
EXIT_TRUNCATION = 5
EXIT_SUITE = 6


def _apply_thread_cap() -> None:
    cap = os.environ.get("SPINSPEC_THREADS")
    if not cap:
        return
    for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS",
                "NUMEXPR_NUM_THREADS"):
        os.environ.setdefault(var, cap)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spinspec",
        description="Geometric invariants and spectra of 2x2 first-order "
        "elliptic systems on the flat 3-torus.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, needs_spec=True):
        if needs_spec:
            p.add_argument("spec", help="problem description (JSON)")
        p.add_argument("--out", default="spinspec_out", help="output directory")
        p.add_argument("--grid", type=int, default=None, help="override the grid size")
        p.add_argument("--no-plots", action="store_true", help="skip figure rendering")

    p = sub.add_parser("analyze", help="metric, charge, spinor, action and coefficients")
    common(p)

    p = sub.add_parser("spectrum", help="Galerkin eigenvalues and counting function")
    common(p)
    p.add_argument("--M", type=int, default=None, help="plane-wave cutoff")
    p.add_argument("--lambda-max", type=float, default=None, help="counting range")

    p = sub.add_parser("verify", help="randomized invariance suites")
    common(p)
    p.add_argument("--suite", default="all",
                   choices=["conformal", "su2", "rigid", "torsion", "subprincipal", "all"])
    p.add_argument("--seed", type=int, default=42)

    p = sub.add_parser("count", help="exact counting table of the solvable operator")
    common(p, needs_spec=False)
    p.add_argument("--lambda-max", type=float, default=100.0)
    p.add_argument("--a", type=float, default=None, help="cubic coefficient (default 4 pi / 3)")
    p.add_argument("--b", type=float, default=None, help="quadratic coefficient (default -4 pi)")
    return parser


def main(argv=None) -> int:
    _apply_thread_cap()
    args = build_parser().parse_args(argv)

    import numpy as np

    from .errors import (
        EllipticityError,
        SpinStructureMismatch,
        TruncationTooSmall,
        ValidationError,
    )
    from . import report
    from .pipeline import analyze_with_obstruction, count_problem, spectrum_problem
    from .problem import ProblemSpec

    from pathlib import Path

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    def load_spec() -> "ProblemSpec":
        spec = ProblemSpec.load(args.spec)
        if args.grid is not None:
            spec.grid = args.grid
        return spec

    try:
        if args.command == "analyze":
            spec = load_spec()
            result = analyze_with_obstruction(spec)
            payload = result.to_report()
            report.write_json(out / "analyze_report.json", payload)
            if not args.no_plots:
                report.render_analysis_figure(out / "analyze_fields.png", result)
            if not result.same_spin_structure:
                print("spin-structure mismatch around cycle(s): %s"
                      % ", ".join(result.obstruction_cycles), file=sys.stderr)
                return EXIT_SPIN_STRUCTURE
            print("charge %+d  S = %.12g  a = %.12g  b = %.12g (torsion route %.12g)"
                  % (result.charge, result.action, result.coeff_a,
                     result.coeff_b_action, result.coeff_b_torsion))
            return 0

        if args.command == "spectrum":
            spec = load_spec()
            m_cut = spec.truncation_m if args.M is None else args.M
            dim = 2 * (2 * m_cut + 1) ** 3
            if dim > 30000:
                print("cutoff M=%d gives dimension %d > 30000 budget" % (m_cut, dim),
                      file=sys.stderr)
                return EXIT_VALIDATION
            result = spectrum_problem(spec, M=args.M, lam_max=args.lambda_max)
            report.write_eigenvalue_csv(out / "eigenvalues.csv", result.spectrum)
            report.write_counting_csv(out / "counting.csv", result.counting)
            payload = {
                "M": result.spectrum.M,
                "dimension": len(result.spectrum.eigenvalues),
                "trust_radius": result.spectrum.trust_radius,
                "weighted_reduction": result.weighted,
                "operator_truncation_error": result.operator.trunc_error,
                "asymptotics": report.comparison_summary(result.comparison),
            }
            report.write_json(out / "spectrum_report.json", payload)
            if not args.no_plots:
                report.render_spectrum_figure(out / "spectrum.png", result.spectrum,
                                              result.counting, result.comparison)
            print("M = %d  dim = %d  trust radius = %.4g"
                  % (result.spectrum.M, len(result.spectrum.eigenvalues),
                     result.spectrum.trust_radius))
            return 0

        if args.command == "verify":
            spec = load_spec()
            from .verify import run_suites

            results = run_suites(spec, args.suite, seed=args.seed)
            payload = {"seed": args.seed, "suites": [r.to_report() for r in results]}
            report.write_json(out / "verify_report.json", payload)
            failed = [r for r in results if not r.passed]
            for r in results:
                print("%-13s %-4s worst residual %.3e (tol %.1e)"
                      % (r.name, "PASS" if r.passed else "FAIL", r.worst, r.tolerance))
            if failed:
                worst = max(failed, key=lambda r: r.worst / max(r.tolerance, 1e-300))
                print("suite '%s' failed: worst residual %.3e exceeds %.1e"
                      % (worst.name, worst.worst, worst.tolerance), file=sys.stderr)
                return EXIT_SUITE
            return 0

        if args.command == "count":
            a = args.a if args.a is not None else 4.0 * np.pi / 3.0
            b = args.b if args.b is not None else -4.0 * np.pi
            if args.lambda_max > 500.0:
                print("lambda-max capped at 500", file=sys.stderr)
                return EXIT_VALIDATION
            table, comparison = count_problem(args.lambda_max, a, b)
            report.write_counting_csv(out / "counting.csv", table)
            report.write_residual_csv(out / "counting_residuals.csv", comparison)
            report.write_json(out / "counting_report.json",
                              {"asymptotics": report.comparison_summary(comparison)})
            if not args.no_plots:
                report.render_counting_figure(out / "counting.png", table, comparison)
            print("rows = %d  window mean = %.6g  growth exponent = %.4g"
                  % (len(table.lam), comparison["window_mean"],
                     comparison["growth_exponent"]))
            return 0
    except ValidationError as exc:
        print("validation error: %s" % exc, file=sys.stderr)
        return EXIT_VALIDATION
    except SpinStructureMismatch as exc:
        print("spin-structure mismatch: %s" % exc, file=sys.stderr)
        return EXIT_SPIN_STRUCTURE
    except EllipticityError as exc:
        print("ellipticity failure: %s" % exc, file=sys.stderr)
        return EXIT_ELLIPTICITY
    except TruncationTooSmall as exc:
        print("truncation too small: %s" % exc, file=sys.stderr)
        return EXIT_TRUNCATION

    raise AssertionError("unreachable")


if __name__ == "__main__":
    sys.exit(main())
