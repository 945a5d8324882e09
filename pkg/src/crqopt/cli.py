"""Command-line frontend.

Subcommands:

    solve     problem files (manifest) -> solution vector + history CSV
    gen       instance spec -> problem files + ground truth
    bench     instance spec -> error/bound CSV against the exact reference
    segment   PGM image + labels -> mask, heat map, stats
    validate  dense problem -> reference validator report

Exit codes: 0 success, 2 not converged, 3 infeasible, 1 usage/IO or
failed validation.  All numeric output is deterministic for a fixed
``--seed``; ``CRQOPT_THREADS`` caps bench parallelism.
"""

import argparse
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import io as cio
from .analysis import BoundInputs, history_table
from .driver import LGOPT, QEPMIN, SolveOptions, solve
from .errors import CrqError, InfeasibleError, NotConvergedError
from .instances import InstanceSpec, generate, reference_solution, verify_roundtrip
from .problem import classify
from .reference import build_reduction, direct_solve, dual_check, equivalence_maps, hard_case_predicate

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NOT_CONVERGED = 2
EXIT_INFEASIBLE = 3


def _add_solver_flags(parser, tol=1e-15, maxit=200, minit=1, checkstep=1):
    parser.add_argument("--method", choices=[LGOPT, QEPMIN], default=LGOPT)
    parser.add_argument("--tol", type=float, default=tol)
    parser.add_argument("--maxit", type=int, default=maxit)
    parser.add_argument("--minit", type=int, default=minit)
    parser.add_argument("--checkstep", type=int, default=checkstep)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--no-detect-hard", action="store_true",
                        help="skip the degenerate-case diagnostic after convergence")


def _options(args, return_basis=False):
    return SolveOptions(
        method=args.method, tol=args.tol, maxit=args.maxit, minit=args.minit,
        checkstep=args.checkstep, rng_seed=args.seed,
        detect_hard=not args.no_detect_hard, return_basis=return_basis,
    )


def _gen_spec(args):
    return InstanceSpec(
        n=args.n, m=args.m, alpha=args.alpha, beta=args.beta, zeta=args.zeta,
        g0_kind=args.g0_kind, eta=args.eta, spectrum_kind=args.spectrum,
        iso_value=args.iso, rng_seed=args.seed,
    )


def _write_solution(outdir, sol):
    os.makedirs(outdir, exist_ok=True)
    cio.write_vector(os.path.join(outdir, "solution.txt"), sol.v)
    cio.write_keyvalues(
        os.path.join(outdir, "summary.txt"),
        {
            "mu": float(sol.mu), "k": sol.k, "objective": float(sol.objective),
            "case": sol.case, "converged": sol.converged,
        },
    )
    cio.history_csv(os.path.join(outdir, "history.csv"), sol)


def cmd_solve(args):
    problem = cio.load_problem(args.manifest)
    try:
        sol = solve(problem, _options(args))
    except NotConvergedError as err:
        _write_solution(args.out, err.solution)
        print(f"not converged after {err.solution.k} steps", file=sys.stderr)
        return EXIT_NOT_CONVERGED
    _write_solution(args.out, sol)
    print(f"case={sol.case} k={sol.k} mu={sol.mu!r} objective={sol.objective!r}")
    return EXIT_OK


def cmd_gen(args):
    spec = _gen_spec(args)
    problem, truth = generate(spec)
    verify_roundtrip(problem, truth)
    os.makedirs(args.out, exist_ok=True)
    A_dense = problem.A.apply(np.eye(problem.n))
    cio.write_problem(args.out, A_dense, problem.C, problem.b)
    cio.write_instance_spec(os.path.join(args.out, "instance.spec"), spec)
    cio.write_keyvalues(
        os.path.join(args.out, "truth.txt"),
        {
            "lambda_star": truth.lambda_star, "kappa": truth.kappa,
            "kappa_plus": truth.kappa_plus, "gamma": truth.gamma,
            "theta_min": float(truth.theta[0]), "theta_2": float(truth.theta[1]),
            "theta_max": float(truth.theta[-1]),
            "norm_g0": float(np.linalg.norm(truth.g0)),
            "case": truth.case_tag, "zeta": truth.zeta,
        },
    )
    print(f"lambda_star={truth.lambda_star!r} kappa={truth.kappa!r}")
    return EXIT_OK


def _bench_one(spec, args, outdir):
    problem, truth = generate(spec)
    ref = reference_solution(problem, truth)
    opts = _options(args, return_basis=True)
    failure = None
    try:
        sol = solve(problem, opts)
    except NotConvergedError as err:
        failure = err
        sol = err.solution
    inp = BoundInputs.from_truth(truth, ref_objective=ref.objective, ref_v=ref.v)
    rows = history_table(sol, ref, inp)
    os.makedirs(outdir, exist_ok=True)
    cio.bench_csv(os.path.join(outdir, f"bench_seed{spec.rng_seed}.csv"), rows)
    cio.history_csv(os.path.join(outdir, f"history_seed{spec.rng_seed}.csv"), sol)
    last = rows[-1]
    print(
        f"seed={spec.rng_seed} k={sol.k} mu={float(sol.mu)!r} "
        f"err1={float(last['err1'])!r} err2={float(last['err2'])!r} "
        f"err3={float(last['err3'])!r}"
    )
    return failure


def cmd_bench(args):
    if args.spec:
        base = cio.read_instance_spec(args.spec)
    else:
        base = _gen_spec(args)
    seeds = [int(s) for s in args.seeds.split(",")] if args.seeds else [base.rng_seed]
    specs = []
    for seed in seeds:
        spec = InstanceSpec(
            n=base.n, m=base.m, alpha=base.alpha, beta=base.beta, zeta=base.zeta,
            g0_kind=base.g0_kind, eta=base.eta, spectrum_kind=base.spectrum_kind,
            iso_value=base.iso_value, rng_seed=seed,
        )
        specs.append(spec)
    workers = int(os.environ.get("CRQOPT_THREADS", "1"))
    failures = []
    if workers > 1 and len(specs) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            failures = [f for f in pool.map(lambda s: _bench_one(s, args, args.out), specs)]
    else:
        failures = [_bench_one(spec, args, args.out) for spec in specs]
    return EXIT_NOT_CONVERGED if any(f is not None for f in failures) else EXIT_OK


def cmd_segment(args):
    from .clustering import LabelSet, default_segment_options, segment

    image, _maxval = cio.read_pgm(args.image)
    fg, bg = cio.read_labels(args.labels)
    labels = LabelSet.from_pixels(image.shape, fg, bg)
    opts = default_segment_options()
    opts.tol = args.tol
    opts.maxit = args.maxit
    opts.minit = min(args.minit, args.maxit)
    opts.checkstep = args.checkstep
    opts.method = args.method
    opts.rng_seed = args.seed
    os.makedirs(args.out, exist_ok=True)
    code = EXIT_OK
    try:
        mask, heat, stats = segment(image, labels, delta=args.delta, r=args.r, opts=opts)
    except NotConvergedError as err:
        mask, heat, stats = err.partial
        print("segmentation solve did not converge; writing partial maps", file=sys.stderr)
        code = EXIT_NOT_CONVERGED
    cio.mask_to_pgm(os.path.join(args.out, "mask.pgm"), mask)
    cio.heat_to_pgm(os.path.join(args.out, "heat.pgm"), heat)
    cio.write_keyvalues(os.path.join(args.out, "stats.txt"), stats)
    print(f"ncut={stats['ncut']!r} steps={stats['steps']} runtime_s={stats['runtime_s']:.3f}")
    return code


def cmd_validate(args):
    problem = cio.load_problem(args.manifest)
    feas = classify(problem)
    checks = []

    ref = direct_solve(problem)
    if feas.tag == "interior":
        red = build_reduction(problem)
        lag = np.linalg.norm(
            problem.projected_operator().apply_P(problem.A.matvec(ref.v - feas.n0))
            - ref.mu * (ref.v - feas.n0) + feas.b0
        )
        scale = (problem.norm_a + abs(ref.mu)) * feas.gamma + np.linalg.norm(feas.b0)
        checks.append(("multiplier_equations", lag / scale, lag / scale <= 1e-8))
        eq = equivalence_maps(red, feas.gamma)
        checks.append(("route_value_gap", eq["lambda_gap"], eq["lambda_gap"] <= 1e-8 * (1 + abs(ref.mu))))
        checks.append(("forward_map_residual", eq["forward_residual"], eq["forward_residual"] <= 1e-8))
        checks.append(("backward_map_residual", eq["backward_residual"], eq["backward_residual"] <= 1e-8))
        checks.append(("degenerate", float(hard_case_predicate(red, feas.gamma)), True))
        if problem.n <= args.dual_cap and np.linalg.norm(problem.b) > 0:
            _, f_star, gap = dual_check(problem)
            checks.append(
                ("dual_value_gap", gap, gap <= 1e-6 * (1.0 + abs(ref.objective)))
            )
    feasibility = np.linalg.norm(problem.C.T @ ref.v - problem.b)
    checks.append(("constraint_residual", feasibility, feasibility <= 1e-8))
    norm_gap = abs(np.linalg.norm(ref.v) - 1.0)
    checks.append(("unit_norm_gap", norm_gap, norm_gap <= 1e-8))

    ok = True
    for name, value, passed in checks:
        ok &= bool(passed)
        print(f"{'PASS' if passed else 'FAIL'} {name}: {float(value)!r}")
    return EXIT_OK if ok else EXIT_USAGE


def build_parser():
    parser = argparse.ArgumentParser(prog="crqopt", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_solve = sub.add_parser("solve", help="solve a problem given by a manifest")
    p_solve.add_argument("--manifest", required=True)
    p_solve.add_argument("--out", required=True)
    _add_solver_flags(p_solve)
    p_solve.set_defaults(func=cmd_solve)

    p_gen = sub.add_parser("gen", help="generate a synthetic benchmark instance")
    for name, required, default in (
        ("--n", True, None), ("--m", True, None),
    ):
        p_gen.add_argument(name, type=int, required=required, default=default)
    p_gen.add_argument("--alpha", type=float, required=True)
    p_gen.add_argument("--beta", type=float, required=True)
    p_gen.add_argument("--zeta", type=float, required=True)
    p_gen.add_argument("--g0-kind", choices=["ones", "geometric"], default="ones")
    p_gen.add_argument("--eta", type=float, default=-5e-3)
    p_gen.add_argument("--spectrum", choices=["chebyshev_extreme", "chebyshev_plus_isolated"],
                       default="chebyshev_extreme")
    p_gen.add_argument("--iso", type=float, default=1.0)
    p_gen.add_argument("--seed", type=int, default=0)
    p_gen.add_argument("--out", required=True)
    p_gen.set_defaults(func=cmd_gen)

    p_bench = sub.add_parser("bench", help="error/bound history against the exact reference")
    p_bench.add_argument("--spec", help="instance spec file (overrides gen flags)")
    p_bench.add_argument("--n", type=int, default=1100)
    p_bench.add_argument("--m", type=int, default=100)
    p_bench.add_argument("--alpha", type=float, default=1.0)
    p_bench.add_argument("--beta", type=float, default=100.0)
    p_bench.add_argument("--zeta", type=float, default=0.9)
    p_bench.add_argument("--g0-kind", dest="g0_kind", choices=["ones", "geometric"], default="ones")
    p_bench.add_argument("--eta", type=float, default=-5e-3)
    p_bench.add_argument("--spectrum", choices=["chebyshev_extreme", "chebyshev_plus_isolated"],
                         default="chebyshev_extreme")
    p_bench.add_argument("--iso", type=float, default=1.0)
    p_bench.add_argument("--seeds", help="comma-separated seed list (parallel under CRQOPT_THREADS)")
    p_bench.add_argument("--out", required=True)
    _add_solver_flags(p_bench)
    p_bench.set_defaults(func=cmd_bench)

    p_seg = sub.add_parser("segment", help="constrained normalized-cut segmentation")
    p_seg.add_argument("--image", required=True, help="grayscale PGM (P2 or P5)")
    p_seg.add_argument("--labels", required=True, help="label file: 'row col {+|-}' lines")
    p_seg.add_argument("--delta", type=float, default=0.1)
    p_seg.add_argument("--r", type=float, default=5)
    p_seg.add_argument("--out", required=True)
    _add_solver_flags(p_seg, tol=8e-5, maxit=300, minit=120, checkstep=5)
    p_seg.set_defaults(func=cmd_segment, method=QEPMIN)

    p_val = sub.add_parser("validate", help="run the dense reference validators")
    p_val.add_argument("--manifest", required=True)
    p_val.add_argument("--dual-cap", type=int, default=200)
    p_val.set_defaults(func=cmd_validate)

    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as err:
        return EXIT_USAGE if err.code not in (0, None) else 0
    try:
        return args.func(args)
    except InfeasibleError as err:
        print(f"infeasible: {err}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except NotConvergedError as err:
        print(f"not converged: {err}", file=sys.stderr)
        return EXIT_NOT_CONVERGED
    except (CrqError, OSError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
