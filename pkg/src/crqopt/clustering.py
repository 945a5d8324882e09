"""Constrained normalized-cut pipeline for grayscale rasters.

Pixels become graph nodes; in-radius pairs are weighted by a Gaussian of
the intensity difference.  Must-link labels (a few foreground and
background pixels) enter as linear equality constraints on the relaxed
indicator vector, which together with the degree-weighted normalization
turns the relaxed two-way normalized cut into exactly the constrained
Rayleigh-quotient problem solved by the driver:

    x' (D - W) x  ->  v' A v   with  v = D^{1/2} x,
                                     A = D^{-1/2} (D - W) D^{-1/2},

and each linear condition g'x = c becoming (D^{-1/2} g)' v = c, so the
labeled entries and the volume-balance row transfer exactly.
"""

import time
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .driver import QEPMIN, SolveOptions, solve
from .errors import EmptySideError, IsolatedPixelError, NotConvergedError
from .operators import SymmetricOperator
from .problem import CrqProblem


@dataclass
class ImageGraph:
    width: int
    height: int
    W: sp.csr_matrix
    degrees: np.ndarray
    delta: float
    radius: float

    @property
    def n(self):
        return self.width * self.height


@dataclass
class LabelSet:
    foreground: np.ndarray
    background: np.ndarray

    def __post_init__(self):
        self.foreground = np.asarray(self.foreground, dtype=int)
        self.background = np.asarray(self.background, dtype=int)
        if self.foreground.size == 0 or self.background.size == 0:
            raise EmptySideError("both label sides must be nonempty")
        if np.intersect1d(self.foreground, self.background).size:
            raise EmptySideError("a pixel cannot carry both labels")

    @classmethod
    def from_pixels(cls, shape, foreground_rc, background_rc):
        """Build from (row, col) pairs for an image of the given shape."""
        height, width = shape
        for r, c in list(foreground_rc) + list(background_rc):
            if not (0 <= r < height and 0 <= c < width):
                raise ValueError(f"label ({r}, {c}) outside a {height}x{width} image")
        fg = [r * width + c for r, c in foreground_rc]
        bg = [r * width + c for r, c in background_rc]
        return cls(np.array(fg), np.array(bg))


def build_graph(image, delta, r):
    """Affinity graph of a grayscale raster.

    Pixels i, j are connected when ||X(i) - X(j)||_inf < r, with weight
    exp(-(F(i) - F(j))^2 / delta_F) where delta_F is ``delta`` times the
    squared global intensity range.  A constant image gets unit weights
    on all in-radius pairs.
    """
    image = np.asarray(image, dtype=float)
    if image.ndim != 2:
        raise ValueError("expected a 2-D grayscale raster")
    if r < 1:
        raise ValueError("radius must be >= 1")
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must be in (0, 1)")
    height, width = image.shape
    n = height * width
    frange = float(image.max() - image.min())
    delta_f = delta * frange**2
    flat = image.reshape(-1)
    reach = int(np.ceil(r)) - 1 if float(r).is_integer() else int(np.floor(r))

    rows, cols, vals = [], [], []
    idx = np.arange(n).reshape(height, width)
    for dy in range(0, reach + 1):
        for dx in range(-reach, reach + 1):
            if dy == 0 and dx <= 0:
                continue
            ysl = slice(0, height - dy)
            ysl2 = slice(dy, height)
            if dx >= 0:
                xsl, xsl2 = slice(0, width - dx), slice(dx, width)
            else:
                xsl, xsl2 = slice(-dx, width), slice(0, width + dx)
            i_idx = idx[ysl, xsl].reshape(-1)
            j_idx = idx[ysl2, xsl2].reshape(-1)
            if delta_f == 0.0:
                w = np.ones(i_idx.size)
            else:
                diff = flat[i_idx] - flat[j_idx]
                w = np.exp(-(diff * diff) / delta_f)
            rows.append(i_idx)
            cols.append(j_idx)
            vals.append(w)
    if rows:
        rows = np.concatenate(rows)
        cols = np.concatenate(cols)
        vals = np.concatenate(vals)
    else:
        rows = cols = np.empty(0, dtype=int)
        vals = np.empty(0)
    W = sp.coo_matrix((vals, (rows, cols)), shape=(n, n))
    W = (W + W.T).tocsr()
    degrees = np.asarray(W.sum(axis=1)).reshape(-1)
    if np.any(degrees <= 0.0):
        raise IsolatedPixelError("graph has an isolated pixel (zero degree)")
    return ImageGraph(width, height, W, degrees, delta, r)


@dataclass
class ConstraintSystem:
    labels: LabelSet
    balance_column: np.ndarray    # the degree vector d, encoding (Dx)'1 = 0
    rhs: np.ndarray
    c_hat: tuple

    @property
    def m(self):
        return self.labels.foreground.size + self.labels.background.size + 1

    def matrix(self, n):
        """The constraint matrix N with N'x = rhs (x-space form)."""
        cols = []
        for i in np.concatenate([self.labels.foreground, self.labels.background]):
            col = sp.coo_matrix(([1.0], ([i], [0])), shape=(n, 1))
            cols.append(col)
        cols.append(sp.coo_matrix(self.balance_column.reshape(-1, 1)))
        return sp.hstack(cols).tocsc()


def encode_constraints(graph, labels):
    """Label equalities plus the volume-balance row as N'x = rhs.

    The target values come from the volume estimates
    c+ = sqrt(vol(J) / (vol(I) vol(V))) and
    c- = -sqrt(vol(I) / (vol(J) vol(V))) computed from the labeled sets.
    """
    d = graph.degrees
    vol_i = float(d[labels.foreground].sum())
    vol_j = float(d[labels.background].sum())
    vol_v = float(d.sum())
    c_plus = np.sqrt(vol_j / (vol_i * vol_v))
    c_minus = -np.sqrt(vol_i / (vol_j * vol_v))
    rhs = np.concatenate(
        [
            np.full(labels.foreground.size, c_plus),
            np.full(labels.background.size, c_minus),
            [0.0],
        ]
    )
    return ConstraintSystem(labels, d.copy(), rhs, (float(c_plus), float(c_minus)))


class NormalizedLaplacianOperator(SymmetricOperator):
    """v -> D^{-1/2} (D - W) D^{-1/2} v, kept sparse throughout."""

    def __init__(self, W, degrees):
        super().__init__(W.shape[0])
        self.W = W
        self.dinv_sqrt = 1.0 / np.sqrt(degrees)

    def matvec(self, x):
        y = self.dinv_sqrt * x
        return x - self.dinv_sqrt * (self.W @ y)

    def matmat(self, X):
        Y = self.dinv_sqrt[:, None] * X
        return X - self.dinv_sqrt[:, None] * (self.W @ Y)


def to_crqopt(graph, constraints):
    """Assemble the degree-normalized problem solved by the driver.

    The constraint columns are rescaled by D^{-1/2} so that C'v = b is
    exactly equivalent to N'x = rhs under v = D^{1/2} x (the labeled
    rows read off x_i directly, the balance column becomes sqrt(d)).
    """
    d = graph.degrees
    dsqrt = np.sqrt(d)
    n = graph.n
    m = constraints.m
    C = np.zeros((n, m))
    j = 0
    for i in constraints.labels.foreground:
        C[i, j] = 1.0 / dsqrt[i]
        j += 1
    for i in constraints.labels.background:
        C[i, j] = 1.0 / dsqrt[i]
        j += 1
    C[:, m - 1] = dsqrt
    A = NormalizedLaplacianOperator(graph.W, d)
    return CrqProblem(A, C, constraints.rhs.copy())


def ncut_value(graph, mask):
    """Normalized cut of the bipartition given by a boolean mask."""
    mask = np.asarray(mask, dtype=bool).reshape(-1)
    if mask.all() or not mask.any():
        return float("inf")
    ind_a = mask.astype(float)
    ind_b = 1.0 - ind_a
    cut = float(ind_a @ (graph.W @ ind_b))
    vol_a = float(graph.degrees[mask].sum())
    vol_b = float(graph.degrees[~mask].sum())
    return cut / vol_a + cut / vol_b


def default_segment_options():
    """Solver settings used for image runs: residual bound below 8e-5,
    stopping conditions checked every 5 steps after a warm-up of 120."""
    return SolveOptions(
        method=QEPMIN, tol=8e-5, maxit=300, minit=120, checkstep=5,
        detect_hard=False,
    )


def segment(image, labels, delta=0.1, r=5, opts=None):
    """Full pipeline: graph, constraints, solve, threshold.

    Returns ``(mask, heat, stats)`` with the binary mask from the sign
    of the relaxed indicator, the indicator rescaled to [0, 1] as a heat
    map, and run statistics.  A non-converged solve raises
    ``NotConvergedError`` with the partial outputs attached as
    ``err.partial``.
    """
    t0 = time.perf_counter()
    graph = build_graph(image, delta, r)
    constraints = encode_constraints(graph, labels)
    problem = to_crqopt(graph, constraints)
    if opts is None:
        opts = default_segment_options()
    failure = None
    try:
        sol = solve(problem, opts)
    except NotConvergedError as err:
        failure = err
        sol = err.solution

    dinv_sqrt = 1.0 / np.sqrt(graph.degrees)
    x = dinv_sqrt * sol.v
    mask = (x > 0.0).reshape(image.shape)
    span = x.max() - x.min()
    heat = ((x - x.min()) / span if span > 0 else np.zeros_like(x)).reshape(image.shape)
    stats = {
        "steps": sol.k,
        "runtime_s": time.perf_counter() - t0,
        "ncut": ncut_value(graph, mask),
        "objective": sol.objective,
        "constraint_residual": float(np.linalg.norm(problem.C.T @ sol.v - problem.b)),
        "c_plus": constraints.c_hat[0],
        "c_minus": constraints.c_hat[1],
        "converged": failure is None,
    }
    if failure is not None:
        failure.partial = (mask, heat, stats)
        raise failure
    return mask, heat, stats
