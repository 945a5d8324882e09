"""Walk through one small constrained Rayleigh-quotient problem.

We minimize v'Av over the unit sphere subject to a single linear
constraint, with a 5x5 diagonal A.  The feasible set is a 3-sphere
sitting inside the unit sphere; the minimizer is recovered three ways:

  1. the Lanczos driver via the secular-equation route,
  2. the Lanczos driver via the quadratic-eigenvalue route,
  3. the dense reference solver (full reduction + case analysis),

and the reference validators cross-check the equivalent formulations.
"""

import numpy as np

import crqopt

A = np.diag([1.0, 2.0, 3.0, 4.0, 5.0])
C = np.array([0.65, 1.0, 0.68, 1.13, -0.23]).reshape(-1, 1)
b = np.array([1.0])

problem = crqopt.CrqProblem(A, C, b)
feas = crqopt.classify(problem)
print(f"feasibility: {feas.tag}, ||n0|| = {np.linalg.norm(feas.n0):.6f}, "
      f"gamma = {feas.gamma:.6f}")

for method in (crqopt.LGOPT, crqopt.QEPMIN):
    sol = crqopt.solve(problem, crqopt.SolveOptions(method=method, tol=1e-15, maxit=20))
    print(f"{method:>7s}: mu = {sol.mu:.10f}  objective = {sol.objective:.10f}  "
          f"steps = {sol.k}")

ref = crqopt.direct_solve(problem)
print(f" direct: mu = {ref.mu:.10f}  objective = {ref.objective:.10f}")

# the two reduced formulations agree, and so does the dual formulation
red = crqopt.build_reduction(problem)
report = crqopt.equivalence_maps(red, feas.gamma)
print(f"route value gap     : {report['lambda_gap']:.2e}")
t_star, f_star, gap = crqopt.dual_check(problem)
print(f"dual maximizer      : t* = {t_star:.6f}, value gap = {gap:.2e}")
print(f"constraint residual : {np.linalg.norm(C.T @ ref.v - b):.2e}")
