"""Main Lanczos driver: iterate, check, recover, diagnose.

One solve classifies the instance, handles the boundary cases, then runs
the projected Lanczos process started at b0.  At selected steps the
reduced problem is solved by either route (secular equation or reduced
QEP); the loop stops when the normalized residual bound drops below the
tolerance, on breakdown (which makes the reduced solve exact), or at the
iteration cap.  The minimizer is recovered as v = n0 + Q_k x.

Degenerate instances - where the optimal multiplier coincides with the
bottom of the projected spectrum and the Krylov space is blind to the
relevant eigenvector - are detected after the loop by an independent
projected eigensolve with a random start, and repaired by padding the
minimum-norm solution with that eigenvector.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import InfeasibleError, NotConvergedError
from .lanczos import BROKE_DOWN, lanczos_init, lanczos_step, smallest_eigenpair
from .problem import INFEASIBLE, UNIQUE_POINT, classify, resolve_b0_zero
from .qepmin import qep_residual_bound, reduced_qep_to_rlgopt, solve_reduced_qep
from .secular import solve_rlgopt

EASY = "easy"
HARD = "hard_detected"
B0_ZERO = "b0_zero"
UNIQUE = "unique_point"

LGOPT = "lgopt"
QEPMIN = "qepmin"


@dataclass
class SolveOptions:
    method: str = LGOPT
    tol: float = 1e-15
    maxit: int = 200
    minit: int = 1
    checkstep: int = 1
    detect_hard: bool = True
    return_basis: bool = False
    rng_seed: int = 0
    eig_tol: float = 1e-8
    eig_maxit: int = 500

    def __post_init__(self):
        if self.method not in (LGOPT, QEPMIN):
            raise ValueError(f"method must be '{LGOPT}' or '{QEPMIN}'")
        if self.maxit < 1:
            raise ValueError("maxit must be >= 1")
        if self.minit > self.maxit:
            raise ValueError("minit must not exceed maxit")
        if self.checkstep < 1:
            raise ValueError("checkstep must be >= 1")


@dataclass
class CheckRecord:
    k: int
    mu: float
    delta: float
    nres: float
    objective: float
    x: np.ndarray


@dataclass
class CrqSolution:
    v: np.ndarray
    mu: float
    k: int
    history: list
    case: str
    objective: float
    n0: np.ndarray = None
    gamma: float = None
    hard_gap: float = None
    basis: np.ndarray = None
    converged: bool = True
    extras: dict = field(default_factory=dict)


@dataclass
class HardCaseReport:
    is_hard: bool
    lambda_min: float
    gap: float
    eig_converged: bool
    v: np.ndarray = None


def _reduced_solve(state, method, beta1, gamma, norm_a):
    """Solve the reduced problem at the current step; returns (mu, x, delta, nres)."""
    a, b = state.tridiagonal()
    k = state.k
    if method == LGOPT:
        red = solve_rlgopt(a, b, beta1, gamma)
        mu, x = red.mu, red.x
        beta_next = state.beta[k]
        delta = abs(beta_next) * abs(x[-1]) / (
            (norm_a + abs(mu)) * np.linalg.norm(x) + beta1
        )
        nres = delta
    else:
        qsol = solve_reduced_qep(a, b, beta1, gamma)
        mu = qsol.mu
        x = reduced_qep_to_rlgopt(qsol, beta1, gamma)
        nres, delta = qep_residual_bound(state, qsol, norm_a, gamma, beta1)
    return mu, x, delta, nres


def detect_hard_case(problem, state, reduced_mu, rng=None, eig_tol=1e-8,
                     eig_maxit=500, eps_hard=None):
    """Degenerate-case test: compare the reduced multiplier with the
    bottom of the projected spectrum.

    A second Lanczos eigensolve of P A P with a random projected start
    computes the smallest projected eigenvalue and its eigenvector.  The
    instance is degenerate when the converged reduced multiplier is not
    strictly below that eigenvalue; the repaired minimizer pads the
    least-squares Krylov solution back to the radius gamma with the
    computed eigenvector.
    """
    rng = np.random.default_rng(rng)
    op = problem.projected_operator()
    start = op.apply_P(rng.standard_normal(problem.n))
    lam_min, z, info = smallest_eigenpair(
        op, start, tol=eig_tol, maxit=eig_maxit,
        norm_scale=problem.norm_a, require_converged=False,
    )
    if eps_hard is None:
        eps_hard = 1e-8 * (1.0 + abs(lam_min))
    gap = lam_min - reduced_mu
    if reduced_mu < lam_min - eps_hard:
        return HardCaseReport(False, lam_min, gap, info["converged"])

    k = state.k
    a, b = state.tridiagonal()
    beta1 = state.beta[0]
    aug = np.zeros((k + 1, k))
    aug[:k, :] = state.tridiagonal_matrix() - lam_min * np.eye(k)
    aug[k, k - 1] = state.beta[k]
    rhs = np.zeros(k + 1)
    rhs[0] = -beta1
    y_tilde, *_ = np.linalg.lstsq(aug, rhs, rcond=None)
    x_tilde = state.basis(k) @ y_tilde
    return HardCaseReport(True, lam_min, gap, info["converged"], v=(x_tilde, z))


def solve(problem, opts=None):
    """Solve the constrained Rayleigh-quotient problem.

    Raises ``InfeasibleError`` when no feasible point exists and
    ``NotConvergedError`` (carrying the best iterate) when the residual
    tolerance is not met within ``opts.maxit`` Lanczos steps.
    """
    if opts is None:
        opts = SolveOptions()
    feas = classify(problem)
    if feas.tag == INFEASIBLE:
        raise InfeasibleError(
            f"||n0|| = {np.linalg.norm(feas.n0):.6g} > 1: no feasible point"
        )
    if feas.tag == UNIQUE_POINT:
        v = feas.n0
        return CrqSolution(
            v=v, mu=float("nan"), k=0, history=[], case=UNIQUE,
            objective=float(v @ problem.A.matvec(v)), n0=feas.n0, gamma=0.0,
        )

    rng = np.random.default_rng(opts.rng_seed)
    shortcut = resolve_b0_zero(
        problem, feas, rng=rng, eig_tol=opts.eig_tol, eig_maxit=opts.eig_maxit
    )
    if shortcut is not None:
        return shortcut

    gamma = feas.gamma
    norm_a = problem.norm_a
    op = problem.projected_operator()
    state = lanczos_init(op, feas.b0, norm_scale=norm_a)
    beta1 = state.beta[0]
    n0An0 = problem.n0_quadratic()

    history = []
    delta = np.inf
    broke = False
    while state.k < opts.maxit:
        outcome = lanczos_step(state)
        k = state.k
        broke = outcome == BROKE_DOWN
        due = k >= opts.minit and (k - opts.minit) % opts.checkstep == 0
        if not (due or broke or k == opts.maxit):
            continue
        mu, x, delta, nres = _reduced_solve(state, opts.method, beta1, gamma, norm_a)
        # cheap exact identity: h(v) = gamma^2 mu + ||b0|| x_1 + n0'An0
        objective = float(gamma**2 * mu + beta1 * x[0] + n0An0)
        history.append(CheckRecord(k, float(mu), float(delta), float(nres),
                                   objective, x.copy()))
        if delta <= opts.tol or broke:
            break

    last = history[-1]
    converged = broke or last.delta <= opts.tol
    u = state.basis(last.k) @ last.x
    v = feas.n0 + u
    solution = CrqSolution(
        v=v,
        mu=last.mu,
        k=last.k,
        history=history,
        case=EASY,
        objective=float(v @ problem.A.matvec(v)),
        n0=feas.n0,
        gamma=gamma,
        basis=state.basis(last.k).copy() if opts.return_basis else None,
        converged=converged,
    )

    if opts.detect_hard:
        report = detect_hard_case(
            problem, state, last.mu, rng=rng,
            eig_tol=opts.eig_tol, eig_maxit=opts.eig_maxit,
        )
        solution.hard_gap = report.gap
        solution.extras["lambda_min_projected"] = report.lambda_min
        if report.is_hard:
            x_tilde, z = report.v
            radicand = max(gamma**2 - float(x_tilde @ x_tilde), 0.0)
            v = feas.n0 + x_tilde + np.sqrt(radicand) * z / np.linalg.norm(z)
            solution.v = v
            solution.mu = report.lambda_min
            solution.case = HARD
            solution.objective = float(v @ problem.A.matvec(v))
            solution.converged = True
            return solution

    if not converged:
        raise NotConvergedError(
            f"residual bound {last.delta:.3e} above tol {opts.tol:.3e} "
            f"after {last.k} Lanczos steps",
            solution=solution,
        )
    return solution


def finite_step_check(problem, opts=None, match_tol=1e-10):
    """Run a solve to breakdown and verify the exact-termination property.

    On instances whose Krylov subspace closes at dimension d < n - m the
    process must break down at step d with the recovered pair satisfying
    the full-space multiplier equations to roundoff, and agreeing with
    the dense direct solver.  Returns a report dict (no exception on a
    failed property; callers assert on ``report["passed"]``).
    """
    from .reference import direct_solve

    if opts is None:
        opts = SolveOptions(tol=0.0, maxit=min(problem.n, 400), detect_hard=False)
    sol = None
    try:
        sol = solve(problem, opts)
    except NotConvergedError as err:
        sol = err.solution
    feas = classify(problem)
    op = problem.projected_operator()
    u = sol.v - feas.n0
    residual = np.linalg.norm(
        op.apply_P(problem.A.matvec(u)) - sol.mu * u + feas.b0
    )
    scale = (problem.norm_a + abs(sol.mu)) * feas.gamma + np.linalg.norm(feas.b0)
    ref = direct_solve(problem)
    # sign-fix not needed: the easy case has a unique minimizer
    report = {
        "k_breakdown": sol.k,
        "residual": float(residual / scale),
        "norm_gap": float(abs(np.linalg.norm(u) - feas.gamma)),
        "constraint_gap": float(
            np.linalg.norm(problem.C.T @ sol.v - problem.b)
        ),
        "match_v": float(np.linalg.norm(sol.v - ref.v)),
        "match_mu": float(abs(sol.mu - ref.mu)),
    }
    report["passed"] = (
        report["residual"] <= match_tol
        and report["norm_gap"] <= match_tol
        and report["constraint_gap"] <= match_tol * (1.0 + np.linalg.norm(problem.b))
        and report["match_v"] <= 1e-6
    )
    return report
