"""Dense direct solver and theory validators.

This module does with explicit factorizations what the Lanczos driver
does matrix-free: split R^n into null(C') and range(C) with a full
orthogonal factorization, reduce A to H = S1' A S1 and b0 to
g0 = S1' b0, and solve the reduced multiplier problem through its full
eigen-decomposition and case analysis (secular root strictly below the
spectrum in the generic case, boundary multiplier with optional
eigenvector padding in the degenerate ones).

Everything here is O(n^3) and capped; the point is exactness, not
scale.  The rest of the package is tested against these routines.
"""

from typing import NamedTuple

import numpy as np
import scipy.linalg as sla

from .errors import BracketFailureError, InfeasibleError, TooLargeError
from .problem import INFEASIBLE, INTERIOR, classify, compute_n0
from .qepmin import solve_qep_linearization

DENSE_CAP = 5000
ORTHO_TOL = 1e-10
PINV_TRUNC = 1e-12

EASY_TAG = "easy"
HARD_EXACT_TAG = "hard_boundary_exact"
HARD_PADDED_TAG = "hard_boundary_padded"


class DenseReduction(NamedTuple):
    """Explicit split of the problem over [null(C') | range(C)]."""

    S1: np.ndarray       # n x (n-m), orthonormal basis of null(C')
    S2: np.ndarray       # n x m, orthonormal basis of range(C)
    H: np.ndarray        # (n-m) x (n-m) symmetric reduced operator
    g0: np.ndarray       # length n-m reduced shifted gradient
    theta: np.ndarray    # ascending eigenvalues of H
    Y: np.ndarray        # eigenvectors of H, columns match theta


def dense_matrix(problem):
    """Materialize the operator A as a dense array (small problems only)."""
    return problem.A.apply(np.eye(problem.n))


def build_reduction(problem, cap=DENSE_CAP):
    """Factor C fully and form the reduced pair (H, g0) with its spectrum."""
    n, m = problem.n, problem.m
    if n > cap:
        raise TooLargeError(f"n = {n} exceeds the dense cap {cap}")
    Q, _ = sla.qr(problem.C)
    S2, S1 = Q[:, :m], Q[:, m:]
    H = S1.T @ problem.A.apply(S1)
    H = 0.5 * (H + H.T)
    n0 = compute_n0(problem)
    op = problem.projected_operator()
    b0 = op.apply_P(problem.A.matvec(n0))
    g0 = S1.T @ b0
    theta, Y = sla.eigh(H)
    return DenseReduction(S1, S2, H, g0, theta, Y)


def _bottom_cluster(theta):
    """Indices of eigenvalues tied with the smallest one."""
    tol = 1e-9 * max(1.0, float(np.max(np.abs(theta))))
    return np.flatnonzero(theta <= theta[0] + tol)


def solve_plgopt_spectral(theta, xi, gamma, ortho_tol=ORTHO_TOL):
    """Reduced multiplier problem in eigen-coordinates.

    ``theta`` ascending eigenvalues, ``xi`` the coordinates of the
    reduced gradient in the same eigenbasis.  Returns
    ``(lambda_star, y_hat, tag)`` with ``y_hat`` in eigen-coordinates.

    Case tree: weight on the bottom eigenspace forces a secular root
    strictly below theta_1; otherwise the minimum-norm stationary point
    w = -(H - theta_1)^+ g0 decides between a secular root (||w|| >
    gamma), the exact boundary solution (||w|| = gamma) and boundary
    plus eigenvector padding (||w|| < gamma).
    """
    from .secular import make_spec, smallest_root

    theta = np.asarray(theta, dtype=float)
    xi = np.asarray(xi, dtype=float)
    cluster = _bottom_cluster(theta)
    norm_g = np.linalg.norm(xi)
    weight_bottom = np.linalg.norm(xi[cluster])

    if weight_bottom > ortho_tol * norm_g and norm_g > 0.0:
        lam, _ = smallest_root(make_spec(theta, xi, gamma))
        y_hat = -xi / (theta - lam)
        return float(lam), y_hat, EASY_TAG

    # bottom weight (numerically) zero: drop it and examine the boundary
    xi_masked = xi.copy()
    xi_masked[cluster] = 0.0
    w_hat = np.zeros_like(xi)
    outside = np.ones(theta.size, dtype=bool)
    outside[cluster] = False
    w_hat[outside] = -xi_masked[outside] / (theta[outside] - theta[0])
    nw = np.linalg.norm(w_hat)

    if nw > gamma * (1.0 + 1e-12):
        lam, _ = smallest_root(make_spec(theta, xi_masked, gamma))
        y_hat = np.zeros_like(xi)
        y_hat[outside] = -xi_masked[outside] / (theta[outside] - lam)
        return float(lam), y_hat, EASY_TAG
    if abs(nw - gamma) <= 1e-12 * gamma:
        return float(theta[0]), w_hat, HARD_EXACT_TAG
    pad = np.sqrt(max(gamma**2 - nw**2, 0.0))
    y_hat = w_hat.copy()
    y_hat[cluster[0]] += pad
    return float(theta[0]), y_hat, HARD_PADDED_TAG


def solve_plgopt_dense(red, gamma, ortho_tol=ORTHO_TOL):
    """Reduced multiplier problem for a DenseReduction.

    Returns ``(lambda_star, y_star, tag)`` with ``y_star`` expressed in
    null-space coordinates (length n - m).
    """
    xi = red.Y.T @ red.g0
    lam, y_hat, tag = solve_plgopt_spectral(red.theta, xi, gamma, ortho_tol=ortho_tol)
    return lam, red.Y @ y_hat, tag


def direct_solve(problem, cap=DENSE_CAP):
    """Reference solution by full reduction; exact up to dense eigensolves."""
    from .driver import CrqSolution, EASY, HARD, UNIQUE

    feas = classify(problem)
    if feas.tag == INFEASIBLE:
        raise InfeasibleError("no feasible point")
    if feas.tag != INTERIOR:
        v = feas.n0
        return CrqSolution(
            v=v, mu=float("nan"), k=0, history=[], case=UNIQUE,
            objective=float(v @ problem.A.matvec(v)), n0=feas.n0, gamma=0.0,
        )
    red = build_reduction(problem, cap=cap)
    lam, y, tag = solve_plgopt_dense(red, feas.gamma)
    v = feas.n0 + red.S1 @ y
    return CrqSolution(
        v=v, mu=float(lam), k=0, history=[],
        case=EASY if tag == EASY_TAG else HARD,
        objective=float(v @ problem.A.matvec(v)),
        n0=feas.n0, gamma=feas.gamma,
        extras={"case_tag": tag},
    )


def pinv_shift_apply(red, lam, vec, trunc=PINV_TRUNC):
    """(H - lam I)^+ vec in the stored eigenbasis, truncating tiny shifts."""
    xi = red.Y.T @ vec
    shifts = red.theta - lam
    scale = max(np.max(np.abs(shifts)), 1.0)
    inv = np.where(np.abs(shifts) > trunc * scale, 1.0 / np.where(shifts == 0, 1.0, shifts), 0.0)
    return red.Y @ (inv * xi)


def hard_case_predicate(red, gamma, ortho_tol=ORTHO_TOL):
    """True iff the instance is degenerate: the reduced gradient is
    orthogonal to the bottom eigenspace of H and the minimum-norm
    stationary point fits within the radius gamma."""
    xi = red.Y.T @ red.g0
    cluster = _bottom_cluster(red.theta)
    norm_g = np.linalg.norm(red.g0)
    if norm_g == 0.0:
        return True
    if np.linalg.norm(xi[cluster]) > ortho_tol * norm_g:
        return False
    w = pinv_shift_apply(red, red.theta[0], -red.g0)
    return np.linalg.norm(w) <= gamma * (1.0 + 1e-10)


def solve_pqepmin_dense(red, gamma, real_tol=1e-8):
    """Dense quadratic-eigenvalue route: leftmost real eigenpair of
    (H - lam)^2 w = gamma^{-2} g0 g0' w.  Returns (mu, y, w, spectrum)."""
    coupling = -np.outer(red.g0, red.g0) / gamma**2
    return solve_qep_linearization(red.H, coupling, real_tol=real_tol)


def equivalence_maps(red, gamma):
    """Cross-check both reduced routes and the maps between their minimizers.

    Solves the multiplier problem and the quadratic-eigenvalue problem
    independently, pushes each minimizer through the constructive map to
    the other formulation, and reports the optimal-value gap plus the
    worst constraint residuals of the mapped points.
    """
    theta = red.theta
    lam_lg, y_lg, tag = solve_plgopt_dense(red, gamma)
    mu_qep, _, w_qep, spectrum = solve_pqepmin_dense(red, gamma)
    scale = max(1.0, float(np.max(np.abs(theta)))) ** 2 + np.linalg.norm(red.g0) ** 2 / gamma**2

    # multiplier -> QEP map
    if lam_lg < theta[0] - 1e-12 * max(1.0, abs(theta[0])):
        w_map = sla.solve(red.H - lam_lg * np.eye(theta.size), y_lg, assume_a="sym")
    else:
        w_map = red.Y[:, 0]
    resid_fwd = np.linalg.norm(
        (red.H - lam_lg * np.eye(theta.size)) @ ((red.H - lam_lg * np.eye(theta.size)) @ w_map)
        - (red.g0 @ w_map) / gamma**2 * red.g0
    ) / (scale * np.linalg.norm(w_map))

    # QEP -> multiplier map, including the orthogonal-gradient branch
    g0w = float(red.g0 @ w_qep)
    if abs(g0w) > 1e-12 * np.linalg.norm(red.g0) * np.linalg.norm(w_qep):
        y_map = -(gamma**2 / g0w) * (red.H - mu_qep * np.eye(theta.size)) @ w_qep
        branch = "gradient_coupled"
    else:
        x_star = pinv_shift_apply(red, mu_qep, -red.g0)
        pad = np.sqrt(max(gamma**2 - float(x_star @ x_star), 0.0))
        y_map = x_star + pad * w_qep / np.linalg.norm(w_qep)
        branch = "gradient_orthogonal"
    resid_bwd = np.linalg.norm(
        (red.H - mu_qep * np.eye(theta.size)) @ y_map + red.g0
    ) / (max(1.0, float(np.max(np.abs(theta)))) * gamma + np.linalg.norm(red.g0))
    norm_gap = abs(np.linalg.norm(y_map) - gamma)

    return {
        "lambda_multiplier": float(lam_lg),
        "lambda_qep": float(mu_qep),
        "lambda_gap": float(abs(lam_lg - mu_qep)),
        "forward_residual": float(resid_fwd),
        "backward_residual": float(resid_bwd),
        "backward_norm_gap": float(norm_gap),
        "multiplier_tag": tag,
        "backward_branch": branch,
        "qep_spectrum": spectrum,
    }


def _dual_matrices(problem):
    n, m = problem.n, problem.m
    A = dense_matrix(problem)
    red = build_reduction(problem)
    U = red.S1
    u = np.sqrt(n) * compute_n0(problem)
    N = np.zeros((n + 1, n - m + 1))
    N[:n, : n - m] = U
    N[:n, n - m] = u
    N[n, n - m] = 1.0
    Ahat = np.zeros((n + 1, n + 1))
    Ahat[:n, :n] = A
    Ehat = np.zeros((n + 1, n + 1))
    Ehat[:n, :n] = -np.eye(n) / (n + 1)
    Ehat[n, n] = 1.0 - 1.0 / (n + 1)
    Bhat = np.zeros((n + 1, n + 1))
    Bhat[:n, :n] = np.eye(n)
    L = N.T @ Ahat @ N
    E = N.T @ Ehat @ N
    M = N.T @ Bhat @ N
    return L, E, M


def dual_check(problem, t_tol=1e-8, expansion_budget=60, grid_points=10_000):
    """Eigenvalue-optimization cross-check of the optimal value.

    Builds the pencil (L + t E, M) of the dual formulation, verifies M is
    positive definite, maximizes f(t) = lambda_min(L + tE, M) by bracket
    expansion plus golden-section refinement (dense-grid fallback), and
    returns ``(t_star, f(t_star), gap)`` where ``gap`` compares the dual
    optimum with the primal optimal value from the direct solver.
    """
    L, E, M = _dual_matrices(problem)
    lam_min_M = float(sla.eigvalsh(M)[0])
    if lam_min_M <= 0.0:
        raise BracketFailureError(f"mass matrix not positive definite ({lam_min_M:.3e})")
    K = sla.cholesky(M, lower=True)
    Lt = sla.solve_triangular(K, sla.solve_triangular(K, L, lower=True).T, lower=True)
    Et = sla.solve_triangular(K, sla.solve_triangular(K, E, lower=True).T, lower=True)
    Lt = 0.5 * (Lt + Lt.T)
    Et = 0.5 * (Et + Et.T)

    def f(t):
        return float(sla.eigvalsh(Lt + t * Et, subset_by_index=(0, 0))[0])

    a, b, c = -1.0, 0.0, 1.0
    fa, fb, fc = f(a), f(b), f(c)
    budget = expansion_budget
    while not (fb >= fa and fb >= fc):
        if budget == 0:
            # oscillating bracket: brute-force scan before giving up
            ts = np.linspace(a, c, grid_points)
            vals = [f(t) for t in ts]
            j = int(np.argmax(vals))
            if j in (0, len(ts) - 1):
                raise BracketFailureError("no interior dual maximizer found")
            a, b, c = ts[j - 1], ts[j], ts[j + 1]
            fb = vals[j]
            break
        width = c - a
        if fa > fb:
            a, b, c = a - 2.0 * width, a, b
            fa, fb, fc = f(a), fa, fb
        else:
            a, b, c = b, c, c + 2.0 * width
            fa, fb, fc = fb, fc, f(c)
        budget -= 1

    invphi = (np.sqrt(5.0) - 1.0) / 2.0
    lo, hi = a, c
    x1 = hi - invphi * (hi - lo)
    x2 = lo + invphi * (hi - lo)
    f1, f2 = f(x1), f(x2)
    while hi - lo > t_tol * (1.0 + abs(lo) + abs(hi)):
        if f1 >= f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - invphi * (hi - lo)
            f1 = f(x1)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + invphi * (hi - lo)
            f2 = f(x2)
    t_star = 0.5 * (lo + hi)
    f_star = f(t_star)
    primal = direct_solve(problem).objective
    return float(t_star), float(f_star), float(abs(f_star - primal))
