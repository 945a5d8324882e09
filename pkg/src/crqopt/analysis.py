"""Convergence envelopes and error histories.

The Krylov iterates admit Chebyshev-type a priori bounds governed by the
condition-like ratio of the shifted reduced spectrum,

    kappa = (theta_max - lambda*) / (theta_min - lambda*),

through the growth factor Gamma = (sqrt(kappa)+1)/(sqrt(kappa)-1): the
objective gap decays like [Gamma^k + Gamma^-k]^-2 and the iterate error
like [Gamma^k + Gamma^-k]^-1.  When the multiplier sits close to the
bottom of the spectrum but the second eigenvalue is well separated, the
same construction with the bottom eigenvalue deflated gives envelopes in

    kappa_plus = (theta_max - lambda*) / (theta_2 - lambda*)

with exponent k-1 and the prefactor (theta_max-theta_min)/(theta_min-
lambda*); these can be far sharper in near-degenerate instances.
"""

from dataclasses import dataclass

import numpy as np

KAPPA_DEGENERATE = 1.0 + 1e-14


@dataclass
class BoundInputs:
    theta_min: float
    theta_2: float
    theta_max: float
    lambda_star: float
    gamma: float
    norm_b0: float
    ref_objective: float = None
    ref_v: np.ndarray = None

    @property
    def norm_h_shift(self):
        return max(
            abs(self.theta_min - self.lambda_star),
            abs(self.theta_max - self.lambda_star),
        )

    @property
    def kappa(self):
        return (self.theta_max - self.lambda_star) / (self.theta_min - self.lambda_star)

    @property
    def kappa_plus(self):
        return (self.theta_max - self.lambda_star) / (self.theta_2 - self.lambda_star)

    @classmethod
    def from_truth(cls, truth, ref_objective=None, ref_v=None):
        """Bound inputs from a generated instance's ground truth."""
        return cls(
            theta_min=float(truth.theta[0]),
            theta_2=float(truth.theta[1]) if truth.theta.size > 1 else float(truth.theta[0]),
            theta_max=float(truth.theta[-1]),
            lambda_star=truth.lambda_star,
            gamma=truth.gamma,
            norm_b0=float(np.linalg.norm(truth.g0)),
            ref_objective=ref_objective,
            ref_v=ref_v,
        )


def inv_cosh_power(log_gamma, k):
    """[Gamma^k + Gamma^-k]^{-1} evaluated in the log domain (no overflow)."""
    e = np.exp(-k * log_gamma)
    return e / (1.0 + e * e)


def convergence_bounds(inp, k):
    """Chebyshev envelopes (objective gap, iterate error, multiplier error).

    All three are absolute bounds.  A spectrum collapsed to one point
    (kappa ~ 1) makes the growth factor degenerate; the Krylov space
    then closes in one step, and zero bounds are returned.
    """
    kappa = inp.kappa
    if kappa <= KAPPA_DEGENERATE:
        return 0.0, 0.0, 0.0
    log_gamma = np.log((np.sqrt(kappa) + 1.0) / (np.sqrt(kappa) - 1.0))
    t = inv_cosh_power(log_gamma, k)
    nh = inp.norm_h_shift
    b1 = 16.0 * inp.gamma**2 * nh * t * t
    b2 = 4.0 * inp.gamma * np.sqrt(kappa) * t
    b3 = 16.0 * nh * t * t + 4.0 / inp.gamma * inp.norm_b0 * np.sqrt(kappa) * t
    return float(b1), float(b2), float(b3)


def refined_convergence_bounds(inp, k):
    """Deflated-bottom envelopes: exponent k-1 in kappa_plus, with the
    prefactor (theta_max - theta_min)/(theta_min - lambda*)."""
    kappa_plus = inp.kappa_plus
    if kappa_plus <= KAPPA_DEGENERATE:
        return 0.0, 0.0, 0.0
    kappa = inp.kappa
    rho = (inp.theta_max - inp.theta_min) / (inp.theta_min - inp.lambda_star)
    log_gamma = np.log((np.sqrt(kappa_plus) + 1.0) / (np.sqrt(kappa_plus) - 1.0))
    t = inv_cosh_power(log_gamma, k - 1)
    nh = inp.norm_h_shift
    b1 = 16.0 * inp.gamma**2 * nh * rho * t * t
    b2 = 4.0 * inp.gamma * np.sqrt(kappa) * rho * t
    b3 = rho * (16.0 * nh * t * t + 4.0 / inp.gamma * inp.norm_b0 * np.sqrt(kappa) * t)
    return float(b1), float(b2), float(b3)


def error_history(solution, ref):
    """Per-check relative errors against a reference solution.

    Needs ``solution.basis`` (run the solve with ``return_basis=True``)
    to rebuild the iterate at each check.  Rows carry
    ``err1 = |h(v_k) - h(v*)| / |h(v*)|``, ``err2 = ||v_k - v*||`` and
    ``err3 = |mu_k - lambda*| / |lambda*|``.
    """
    if solution.basis is None:
        raise ValueError("error_history needs a solution with return_basis=True")
    h_ref = ref.objective
    mu_ref = ref.mu
    rows = []
    for rec in solution.history:
        v_k = solution.n0 + solution.basis[:, : rec.k] @ rec.x
        rows.append(
            {
                "k": rec.k,
                "err1": abs(rec.objective - h_ref) / abs(h_ref),
                "err2": float(np.linalg.norm(v_k - ref.v)),
                "err3": abs(rec.mu - mu_ref) / abs(mu_ref),
            }
        )
    return rows


def history_table(solution, ref, inp=None):
    """Error history joined with both bound families (CSV-ready rows)."""
    rows = error_history(solution, ref)
    for row in rows:
        if inp is None:
            row.update(
                {key: float("nan") for key in ("b1", "b2", "b3", "b1p", "b2p", "b3p")}
            )
            continue
        b1, b2, b3 = convergence_bounds(inp, row["k"])
        b1p, b2p, b3p = refined_convergence_bounds(inp, row["k"])
        row.update({"b1": b1, "b2": b2, "b3": b3, "b1p": b1p, "b2p": b2p, "b3p": b3p})
    return rows
