"""Command-line interface.

Subcommands:

    solve <problem> --order 2R [--T N | --u-zero] [--backend NAME]
    certify <problem> <certificate> [--samples N --steps K --seed S]
    grid <certificate> --res R --out FILE
    sweep <problem> --orders 4,6,8 [--out-dir DIR]
    bench [--out-dir DIR]

`bench` runs the five bundled two- and three-dimensional fixtures at their
file-declared order with the occupation-mass horizon, writing one report per
fixture.  Errors are emitted as one machine-readable JSON record on stderr
with a nonzero exit status.  The environment variable REACH_SOS_THREADS caps
internal linear-algebra parallelism.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from dataclasses import replace
from pathlib import Path


def _apply_thread_cap() -> None:
    cap = os.environ.get("REACH_SOS_THREADS")
    if cap:
        for var in (
            "OMP_NUM_THREADS",
            "OPENBLAS_NUM_THREADS",
            "MKL_NUM_THREADS",
            "NUMEXPR_NUM_THREADS",
        ):
            os.environ.setdefault(var, cap)


_apply_thread_cap()  # must run before numpy initializes its thread pools


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="reachsos",
        description=(
            "Certified polynomial outer approximations of reachable sets for "
            "discrete-time polynomial systems."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_solve = sub.add_parser("solve", help="solve one relaxation order and write a certificate")
    p_solve.add_argument("problem", help="problem file path")
    p_solve.add_argument("--order", type=int, help="relaxation degree 2r (even)")
    p_solve.add_argument("--T", type=int, default=None, help="occupation-mass horizon")
    p_solve.add_argument("--u-zero", action="store_true", help="pin the mass multiplier u to zero")
    p_solve.add_argument("--backend", default=None, help="solver backend name")
    p_solve.add_argument("--out", default=None, help="certificate output path")
    p_solve.add_argument("--report", default=None, help="also write a validation report here")
    p_solve.add_argument("--seed", type=int, default=None, help="override the fixture seed")
    p_solve.add_argument("--verbose", action="store_true")

    p_cert = sub.add_parser("certify", help="validate a stored certificate against simulations")
    p_cert.add_argument("problem")
    p_cert.add_argument("certificate")
    p_cert.add_argument("--samples", type=int, default=1000)
    p_cert.add_argument("--steps", type=int, default=7)
    p_cert.add_argument("--volume-samples", type=int, default=100000)
    p_cert.add_argument("--seed", type=int, default=None)
    p_cert.add_argument("--out", default=None, help="report output path")

    p_grid = sub.add_parser("grid", help="tabulate certificate level sets on a grid")
    p_grid.add_argument("certificate")
    p_grid.add_argument("--res", type=int, required=True, help="points per axis")
    p_grid.add_argument("--out", required=True)

    p_sweep = sub.add_parser("sweep", help="solve a sequence of orders and report each")
    p_sweep.add_argument("problem")
    p_sweep.add_argument("--orders", required=True, help="comma-separated 2r values, ascending")
    p_sweep.add_argument("--out-dir", default=".")
    p_sweep.add_argument("--res", type=int, default=100, help="grid resolution per order")
    p_sweep.add_argument("--seed", type=int, default=None)

    p_bench = sub.add_parser("bench", help="run the five bundled benchmark fixtures")
    p_bench.add_argument("--out-dir", default=".")
    p_bench.add_argument("--order", type=int, default=None, help="override the fixture order")
    p_bench.add_argument("--seed", type=int, default=None)
    return parser


BENCHMARKS = ("toy", "cathala", "fitzhugh", "julia", "phytoplankton")


def bundled_problem_path(name: str) -> str:
    from importlib import resources

    ref = resources.files("reachsos").joinpath("problems", f"{name}.problem")
    return str(ref)


def _solve_bundle(bundle, order, horizon, u_zero, backend, seed, verbose=0):
    from .assembly import solve_dual

    problem = bundle.problem
    if u_zero:
        problem = replace(problem, u_zero=True)
    elif horizon is not None:
        problem = replace(problem, horizon=horizon, u_zero=False)
    if seed is not None:
        bundle.seed = seed
    t0 = time.perf_counter()
    outcome = solve_dual(
        problem,
        order or bundle.order,
        backend=backend or bundle.solver.backend,
        feastol=bundle.solver.feastol,
        gaptol=bundle.solver.gaptol,
        max_iter=bundle.solver.max_iter,
        verbose=verbose,
    )
    return problem, outcome, time.perf_counter() - t0


def _write_outputs(bundle, problem, outcome, cert_path, report_path, runtime, seed):
    from . import io as rio
    from .harness import certify

    cert_file = rio.certificate_to_file(
        outcome.certificate,
        bundle.variables,
        problem.name,
        bundle.problem_hash,
        problem.state_geometry.bounding_box(),
    )
    rio.save_certificate(cert_file, cert_path)
    report = certify(problem, outcome, seed=seed, runtime=runtime)
    if report_path:
        rio.save_report(report, report_path)
    return report


def cmd_solve(args) -> int:
    from . import io as rio

    bundle = rio.load_bundle(args.problem)
    problem, outcome, runtime = _solve_bundle(
        bundle, args.order, args.T, args.u_zero, args.backend, args.seed,
        verbose=1 if args.verbose else 0,
    )
    stem = Path(args.problem).stem
    order = args.order or bundle.order
    cert_path = args.out or f"{stem}_order{order}.certificate.json"
    report_path = args.report or f"{stem}_order{order}.report.json"
    seed = args.seed if args.seed is not None else bundle.seed
    report = _write_outputs(bundle, problem, outcome, cert_path, report_path, runtime, seed)
    print(
        f"{problem.name}: order 2r={order} status={outcome.solution.status} "
        f"objective={outcome.objective:.6f} u={outcome.certificate.u:.3e} "
        f"violations={report.violations} ({runtime:.1f}s)"
    )
    print(f"certificate -> {cert_path}")
    print(f"report -> {report_path}")
    return 0


def cmd_certify(args) -> int:
    from . import io as rio
    from .harness import check_containment, mc_volume, sample_set, simulate
    from .sets import DEFAULT_SEED

    bundle = rio.load_bundle(args.problem)
    cert = rio.load_certificate(args.certificate)
    if cert.problem_hash and cert.problem_hash != bundle.problem_hash:
        print(
            json.dumps(
                {
                    "warning": "certificate was produced for a different problem",
                    "certificate_hash": cert.problem_hash,
                    "problem_hash": bundle.problem_hash,
                }
            ),
            file=sys.stderr,
        )
    problem = bundle.problem
    seed = args.seed if args.seed is not None else (bundle.seed or DEFAULT_SEED)
    points = sample_set(problem.init, problem.init_geometry, args.samples, seed)
    batch = simulate(problem, points, args.steps, seed)
    violations, worst = check_containment(cert, batch)
    vol, ci = mc_volume(cert, problem.state_geometry, args.volume_samples, seed)
    result = {
        "problem": problem.name,
        "order": cert.order,
        "violations": violations,
        "worst_margin": worst,
        "volume_estimate": vol,
        "volume_ci95": ci,
        "escaped_state_set": batch.escaped_state_set,
    }
    print(json.dumps(result, indent=1))
    if args.out:
        with open(args.out, "w") as handle:
            json.dump(result, handle, indent=1)
            handle.write("\n")
    return 0 if violations == 0 else 1


def cmd_grid(args) -> int:
    from . import io as rio

    cert = rio.load_certificate(args.certificate)
    n_rows = rio.write_grid(cert, args.res, args.out)
    print(f"wrote {n_rows} rows to {args.out}")
    return 0


def cmd_sweep(args) -> int:
    from . import io as rio
    from .harness import run_order_sweep

    orders = [int(tok) for tok in args.orders.split(",") if tok]
    bundle = rio.load_bundle(args.problem)
    seed = args.seed if args.seed is not None else bundle.seed
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    result = run_order_sweep(
        bundle.problem,
        orders,
        seed=seed,
        backend=bundle.solver.backend,
        feastol=bundle.solver.feastol,
        gaptol=bundle.solver.gaptol,
        max_iter=bundle.solver.max_iter,
    )
    for report, outcome in zip(result.reports, [o for o in result.outcomes if o]):
        stem = f"{bundle.problem.name}_order{report.order}"
        rio.save_report(report, str(out_dir / f"{stem}.report.json"))
        cert_file = rio.certificate_to_file(
            outcome.certificate,
            bundle.variables,
            bundle.problem.name,
            bundle.problem_hash,
            bundle.problem.state_geometry.bounding_box(),
        )
        cert_path = out_dir / f"{stem}.certificate.json"
        rio.save_certificate(cert_file, str(cert_path))
        rio.write_grid(rio.load_certificate(str(cert_path)), args.res, str(out_dir / f"{stem}.grid.txt"))
        print(
            f"2r={report.order}: objective={report.objective:.6f} u={report.u:.3e} "
            f"violations={report.violations} volume={report.volume_estimate:.4f}"
        )
    for order, message in result.failures:
        print(f"2r={order}: FAILED ({message})", file=sys.stderr)
    if not result.objectives_non_increasing:
        print("warning: objectives are not non-increasing across orders", file=sys.stderr)
    return 0 if not result.failures else 1


def cmd_bench(args) -> int:
    from . import io as rio

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    failures = 0
    for name in BENCHMARKS:
        bundle = rio.load_bundle(bundled_problem_path(name))
        problem, outcome, runtime = _solve_bundle(
            bundle, args.order, None, False, None, args.seed
        )
        order = args.order or bundle.order
        cert_path = out_dir / f"{name}_order{order}.certificate.json"
        report_path = out_dir / f"{name}_order{order}.report.json"
        seed = args.seed if args.seed is not None else bundle.seed
        report = _write_outputs(
            bundle, problem, outcome, str(cert_path), str(report_path), runtime, seed
        )
        ok = report.u_validated and report.containment_ok
        failures += 0 if ok else 1
        print(
            f"{name:14s} 2r={order} status={outcome.solution.status:12s} "
            f"objective={outcome.objective:9.5f} u={report.u:9.2e} "
            f"violations={report.violations} {'ok' if ok else 'FAIL'} ({runtime:.1f}s)"
        )
    return 0 if failures == 0 else 1


_COMMANDS = {
    "solve": cmd_solve,
    "certify": cmd_certify,
    "grid": cmd_grid,
    "sweep": cmd_sweep,
    "bench": cmd_bench,
}


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except Exception as exc:  # one machine-readable record on stderr
        record = {"error": type(exc).__name__, "message": str(exc)}
        detail = getattr(exc, "errors", None) or getattr(exc, "diagnostics", None)
        if detail:
            record["detail"] = detail
        print(json.dumps(record), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
