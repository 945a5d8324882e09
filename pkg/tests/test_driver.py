import numpy as np
import pytest

from conftest import random_interior_problem
from oracles import dense_projector, krylov_slice_minimum

import crqopt
from crqopt import (CrqProblem, SolveOptions, classify, direct_solve,
                    finite_step_check, solve)
from crqopt.errors import InfeasibleError, NotConvergedError


def test_options_validated():
    with pytest.raises(ValueError):
        SolveOptions(method="newton")
    with pytest.raises(ValueError):
        SolveOptions(minit=10, maxit=5)
    with pytest.raises(ValueError):
        SolveOptions(checkstep=0)
    with pytest.raises(ValueError):
        SolveOptions(maxit=0)


def test_unique_point_short_circuit():
    p = CrqProblem(np.diag([3.0, 1.0]), np.array([[1.0], [0.0]]), [1.0])
    sol = solve(p)
    assert sol.case == crqopt.UNIQUE and sol.k == 0
    assert np.allclose(sol.v, [1.0, 0.0])
    assert sol.objective == pytest.approx(3.0)


def test_infeasible_raises():
    p = CrqProblem(np.eye(2), np.array([[1.0], [0.0]]), [2.0])
    with pytest.raises(InfeasibleError):
        solve(p)


def test_small_example_multiplier(small_example):
    for method in (crqopt.LGOPT, crqopt.QEPMIN):
        sol = solve(small_example, SolveOptions(method=method, tol=1e-15, maxit=20))
        assert sol.mu == pytest.approx(0.8333, abs=5e-4)
        assert sol.case == crqopt.EASY
        ref = direct_solve(small_example)
        assert np.linalg.norm(sol.v - ref.v) <= 1e-10
        assert sol.objective == pytest.approx(ref.objective, abs=1e-12)


def test_matches_direct_on_random_instances():
    rng = np.random.default_rng(21)
    for _ in range(6):
        n = int(rng.integers(15, 50))
        m = int(rng.integers(1, 6))
        p = random_interior_problem(rng, n, m)
        sol = solve(p, SolveOptions(tol=1e-15, maxit=n))
        ref = direct_solve(p)
        assert np.linalg.norm(sol.v - ref.v) <= 1e-8
        assert abs(sol.mu - ref.mu) <= 1e-10 * (1.0 + abs(ref.mu))


def test_objective_history_nonincreasing():
    rng = np.random.default_rng(22)
    for _ in range(4):
        p = random_interior_problem(rng, 30, 3)
        sol = solve(p, SolveOptions(tol=1e-15, maxit=27, checkstep=1, detect_hard=False))
        objs = [rec.objective for rec in sol.history]
        slack = 1e-12 * p.norm_a
        assert all(b <= a + slack for a, b in zip(objs, objs[1:]))


def test_iterate_is_krylov_slice_minimizer(small_example):
    feas = classify(small_example)
    A = np.diag([1.0, 2, 3, 4, 5])
    P = dense_projector(small_example.C)
    try:
        sol = solve(small_example, SolveOptions(tol=0.0, maxit=3, checkstep=1,
                                                detect_hard=False, return_basis=True))
    except NotConvergedError as err:
        sol = err.solution
    for rec in sol.history:
        v_k = feas.n0 + sol.basis[:, : rec.k] @ rec.x
        h_k = float(v_k @ A @ v_k)
        oracle = krylov_slice_minimum(A, P, feas.n0, feas.b0, feas.gamma, rec.k)
        assert h_k <= oracle + 1e-8
        assert h_k == pytest.approx(oracle, abs=1e-8)


def test_final_multiplier_residual_scaled():
    rng = np.random.default_rng(23)
    p = random_interior_problem(rng, 40, 4)
    tol = 1e-12
    sol = solve(p, SolveOptions(tol=tol, maxit=40))
    feas = classify(p)
    op = p.projected_operator()
    u = sol.v - feas.n0
    resid = np.linalg.norm(op.apply_P(p.A.matvec(u)) - sol.mu * u + feas.b0)
    scale = (p.norm_a + abs(sol.mu)) * feas.gamma + np.linalg.norm(feas.b0)
    assert resid <= tol * scale


def test_not_converged_payload():
    rng = np.random.default_rng(24)
    p = random_interior_problem(rng, 60, 3)
    with pytest.raises(NotConvergedError) as err:
        solve(p, SolveOptions(tol=1e-16, maxit=3, detect_hard=False))
    best = err.value.solution
    assert best is not None and best.k == 3 and not best.converged


def _clustered_instance(values, repeats, m, seed, g0_scale=None):
    h = np.repeat(np.asarray(values, dtype=float), repeats)
    g0 = np.ones(h.size) if g0_scale is None else g0_scale
    rng = np.random.default_rng(seed)
    return crqopt.embed(h, g0, 0.8, m, rng)


def test_finite_step_two_distinct_eigenvalues():
    # two distinct reduced eigenvalues -> Krylov dimension 2
    prob, truth = _clustered_instance([1.0, 2.0], [6, 5], 3, seed=31)
    report = finite_step_check(prob)
    assert report["k_breakdown"] == 2
    assert report["passed"], report


def test_finite_step_identity_breaks_at_one():
    rng = np.random.default_rng(32)
    C = rng.standard_normal((8, 2))
    p = CrqProblem(np.eye(8) * 2.0, C, 0.2 * np.ones(2))
    feas = classify(p)
    sol = solve(p, SolveOptions(tol=0.0, maxit=8, detect_hard=False))
    assert sol.k == 1
    # v = n0 + gamma * q1 up to the sign fixed by the reduced solve
    assert abs(np.linalg.norm(sol.v - feas.n0) - feas.gamma) <= 1e-12


@pytest.mark.parametrize("seed", [33, 34, 35])
def test_finite_step_clustered_random(seed):
    rng = np.random.default_rng(seed)
    d = int(rng.integers(3, 9))
    values = np.sort(rng.uniform(0.5, 6.0, d))
    repeats = rng.integers(2, 5, d)
    prob, truth = _clustered_instance(values, repeats, 3, seed=seed + 100)
    nm = prob.n - prob.m
    report = finite_step_check(prob)
    assert report["k_breakdown"] == d < nm
    assert report["passed"], report


def _hard_instance(seed, fill=0.5, nm=24, m=3, zeta=0.9):
    """Reduced gradient orthogonal to the isolated bottom eigenvector,
    with the stationary point strictly inside the radius."""
    rng = np.random.default_rng(seed)
    h = np.concatenate([[1.0], np.linspace(3.0, 10.0, nm - 1)])
    gamma = np.sqrt(1.0 - zeta**2)
    g_tail = rng.uniform(0.5, 1.5, nm - 1)
    w_norm = np.sqrt(np.sum((g_tail / (h[1:] - 1.0)) ** 2))
    g0 = np.concatenate([[0.0], g_tail * (fill * gamma / w_norm)])
    return crqopt.embed(h, g0, zeta, m, rng)


@pytest.mark.filterwarnings("ignore:nearly degenerate reduced problem")
def test_hard_case_detected_and_repaired():
    prob, truth = _hard_instance(41)
    assert truth.case_tag == "hard_boundary_padded"
    sol = solve(prob, SolveOptions(tol=1e-14, maxit=prob.n, rng_seed=5))
    assert sol.case == crqopt.HARD
    assert sol.mu == pytest.approx(1.0, abs=1e-6)
    ref = direct_solve(prob)
    assert sol.objective == pytest.approx(ref.objective, abs=1e-6)
    assert abs(np.linalg.norm(sol.v) - 1.0) <= 1e-8
    assert np.linalg.norm(prob.C.T @ sol.v - prob.b) <= 1e-8


@pytest.mark.filterwarnings("ignore:nearly degenerate reduced problem")
def test_near_degenerate_reports_gap_but_stays_easy():
    # tiny but nonzero weight on the bottom eigenvector: genuinely easy,
    # with the multiplier close below the spectrum
    rng = np.random.default_rng(42)
    nm, m = 24, 3
    h = np.concatenate([[1.0], np.linspace(3.0, 10.0, nm - 1)])
    g0 = np.concatenate([[1e-5], rng.uniform(0.5, 1.5, nm - 1)])
    prob, truth = crqopt.embed(h, g0, 0.9, m, rng)
    sol = solve(prob, SolveOptions(tol=1e-13, maxit=prob.n, rng_seed=1))
    assert sol.case == crqopt.EASY
    assert sol.hard_gap is not None
    assert sol.hard_gap == pytest.approx(1.0 - truth.lambda_star, abs=1e-5)


def test_detect_hard_easy_instance_reports_large_gap():
    spec = crqopt.InstanceSpec(n=120, m=10, alpha=1.0, beta=100.0, zeta=0.9, rng_seed=44)
    prob, truth = crqopt.generate(spec)
    sol = solve(prob, SolveOptions(tol=1e-14, maxit=110))
    assert sol.case == crqopt.EASY
    # multiplier far below the projected spectrum bottom (easy case)
    assert sol.hard_gap > 1.0
    assert sol.mu == pytest.approx(truth.lambda_star, abs=1e-9 * (1 + abs(truth.lambda_star)))
