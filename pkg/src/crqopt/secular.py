"""Secular-equation root finder and the reduced Lagrange-multiplier solve.

The secular function attached to poles ``theta_1 <= ... <= theta_l`` with
weights ``xi`` and a radius ``gamma > 0`` is

    chi(lam) = sum_i xi_i^2 / (lam - theta_i)^2 - gamma^2.

chi is strictly increasing left of the spectrum and tends to -gamma^2 at
-infinity, so it has at most one root in (-inf, theta_1); that root is
the optimal multiplier of the reduced problem

    min lam  s.t.  (T_k - lam I) x = -||b0|| e_1,  ||x|| = gamma.

The iteration fits the rational model  g(lam) = -b + a/(lam - pole)^2
to chi and chi' at the current point (a two-point Pade-type step that
converges much faster than Newton on functions with double poles), and
falls back to bisection whenever the model is unusable or steps out of
the current root bracket.
"""

import warnings
from typing import NamedTuple

import numpy as np
import scipy.linalg as sla

from .errors import MaxIterError, NoRootError

TINY_LEADING_WEIGHT = 1e-10


class SecularSpec(NamedTuple):
    """Poles (ascending), weights and the radius gamma of a secular function."""

    theta: np.ndarray
    xi: np.ndarray
    gamma: float


def make_spec(theta, xi, gamma):
    theta = np.asarray(theta, dtype=float)
    xi = np.asarray(xi, dtype=float)
    if theta.shape != xi.shape or theta.ndim != 1:
        raise ValueError("theta and xi must be 1-D arrays of equal length")
    if np.any(np.diff(theta) < 0):
        raise ValueError("theta must be ascending")
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    return SecularSpec(theta, xi, float(gamma))


def secular_value(spec, lam):
    return float(np.sum(spec.xi**2 / (lam - spec.theta) ** 2) - spec.gamma**2)


def secular_derivative(spec, lam):
    return float(-2.0 * np.sum(spec.xi**2 / (lam - spec.theta) ** 3))


def smallest_root(spec, eps=None, maxit=200):
    """Unique root of the secular function left of its smallest pole.

    Returns ``(lambda_star, iterations)``.  Requires either a pole at
    theta_1 carrying weight, or a positive left limit of chi at theta_1;
    otherwise there is no root below the spectrum and ``NoRootError`` is
    raised (the caller falls back to the boundary case analysis).
    """
    theta, xi, gamma = spec
    nz = np.flatnonzero(xi)
    if nz.size == 0:
        raise NoRootError("all secular weights vanish")
    j0 = nz[0]
    t1 = theta[0]
    tj = theta[j0]
    delta0 = float(np.sqrt(np.sum(xi**2)) / gamma)
    if eps is None:
        eps = 1e-14 * (1.0 + abs(t1) + delta0)

    if tj > t1:
        # no pole at theta_1: a root below the spectrum needs chi(theta_1-) > 0
        # (zero-weight poles at theta_1 do not contribute to the limit)
        limit = np.sum(xi[nz] ** 2 / (t1 - theta[nz]) ** 2) - gamma**2
        if limit <= 0.0:
            raise NoRootError("secular function has no root left of theta_1")

    lo, hi = t1 - delta0, t1

    # initial guess: solve the one-pole model with the tail frozen at lo
    mask = np.arange(theta.size) > j0
    tail = np.sum(xi[mask] ** 2 / ((tj - delta0) - theta[mask]) ** 2)
    eta = gamma**2 - tail
    if eta > 0.0:
        lam = tj - abs(xi[j0]) / np.sqrt(eta)
    else:
        lam = tj - delta0 / 2.0
    # the lower bracket end can be the root itself (single-pole bound is
    # tight), so acceptance is closed on the left
    if not (lo <= lam < hi):
        lam = 0.5 * (lo + hi)

    for it in range(1, maxit + 1):
        chi = secular_value(spec, lam)
        if chi > 0.0:
            hi = lam
        else:
            lo = lam
        s3 = float(np.sum(xi**2 / (lam - theta) ** 3))
        a = (lam - tj) ** 3 * s3
        b = (lam - tj) * s3 - chi
        if b > 0.0:
            cand = tj - np.sqrt(a / b)
            if not (lo <= cand < hi):
                cand = 0.5 * (lo + hi)
        else:
            cand = 0.5 * (lo + hi)
        step = abs(cand - lam)
        lam = cand
        if step < eps:
            return float(lam), it
    raise MaxIterError(f"secular iteration did not settle within {maxit} steps")


class ReducedLgSolution(NamedTuple):
    mu: float
    x: np.ndarray
    iterations: int


def solve_rlgopt(alpha, beta, beta1, gamma, eps=None):
    """Solve the k-dimensional reduced Lagrange-multiplier problem.

    ``alpha``/``beta`` are the diagonal and off-diagonal of the (assumed
    irreducible) tridiagonal T_k, ``beta1 = ||b0||`` the start norm.  The
    optimal multiplier is the smallest secular root built from the
    eigen-decomposition of T_k with weights ``beta1 * (first eigenvector
    components)``; the minimizer solves the shifted tridiagonal system

        (T_k - mu I) x = -beta1 e_1,

    which is positive definite because mu lies strictly left of the
    spectrum of an irreducible T_k.
    """
    alpha = np.asarray(alpha, dtype=float)
    beta = np.asarray(beta, dtype=float)
    k = alpha.size
    if k == 0:
        raise ValueError("empty tridiagonal")
    if beta.size != k - 1:
        raise ValueError("off-diagonal must have length k-1")
    theta, Y = sla.eigh_tridiagonal(alpha, beta)
    zeta = beta1 * Y[0, :]
    degenerate = abs(zeta[0]) < TINY_LEADING_WEIGHT * abs(beta1)
    if degenerate:
        warnings.warn(
            "nearly degenerate reduced problem: leading secular weight "
            f"{zeta[0]:.3e} is tiny relative to ||b0||",
            RuntimeWarning,
            stacklevel=2,
        )
    try:
        mu, iters = smallest_root(make_spec(theta, zeta, gamma), eps=eps)
    except NoRootError:
        mu, iters = None, 0

    if mu is not None and mu < theta[0]:
        rhs = np.zeros(k)
        rhs[0] = -beta1
        if k == 1:
            x = rhs / (alpha[0] - mu)
        else:
            ab = np.zeros((2, k))
            ab[0, 1:] = beta
            ab[1, :] = alpha - mu
            try:
                x = sla.solveh_banded(ab, rhs, lower=False)
            except np.linalg.LinAlgError:
                x = None
        if x is not None:
            return ReducedLgSolution(float(mu), x, iters)

    # the multiplier reached the reduced spectrum: this only happens when
    # roundoff seeds the basis with a ghost direction of near-zero weight
    # (degenerate full-space instances); fall back to the boundary-aware
    # case analysis in the eigenbasis, which stays finite
    from .reference import solve_plgopt_spectral

    lam, y_hat, _ = solve_plgopt_spectral(theta, zeta, gamma)
    return ReducedLgSolution(float(lam), Y @ y_hat, iters)
