import numpy as np
import pytest
import scipy.sparse as sp
import scipy.sparse.linalg as spla

import crqopt
from crqopt.clustering import (LabelSet, build_graph, encode_constraints,
                               ncut_value, segment, to_crqopt)
from crqopt.errors import EmptySideError


def two_block_image(size=8, low=0.0, high=1.0):
    img = np.full((size, size), low)
    img[:, size // 2 :] = high
    return img


def test_constant_image_unit_weights():
    graph = build_graph(np.full((5, 5), 7.0), delta=0.1, r=2)
    W = graph.W.tocoo()
    assert W.nnz > 0
    assert np.allclose(W.data, 1.0)


def test_beyond_radius_zero_weight():
    graph = build_graph(np.zeros((6, 6)), delta=0.1, r=2)
    W = graph.W.tocsr()
    # pixels (0,0) and (0,3): chebyshev distance 3 >= r=2 -> no edge
    assert W[0, 3] == 0.0
    # distance exactly r is outside the strict inequality
    assert W[0, 2] == 0.0
    assert W[0, 1] != 0.0


def test_two_block_weights_hand_computed():
    img = two_block_image(8)
    graph = build_graph(img, delta=0.1, r=2)
    W = graph.W.tocsr()
    # delta_F = 0.1 * (1-0)^2; cross-block in-radius weight e^{-1/0.1}
    i = 3 * 8 + 3  # (3,3) value 0
    j = 3 * 8 + 4  # (3,4) value 1
    assert W[i, j] == pytest.approx(np.exp(-10.0), rel=1e-12)
    assert W[i, i - 1] == pytest.approx(1.0)


def test_balanced_labels_symmetric_targets():
    img = two_block_image(8)
    graph = build_graph(img, delta=0.1, r=2)
    # one label per block, mirrored positions: equal label volumes
    labels = LabelSet.from_pixels(img.shape, [(4, 1)], [(4, 6)])
    cons = encode_constraints(graph, labels)
    c_plus, c_minus = cons.c_hat
    assert c_plus == pytest.approx(-c_minus, rel=1e-12)
    assert c_plus == pytest.approx(1.0 / np.sqrt(graph.degrees.sum()), rel=1e-12)
    assert c_plus > 0 > c_minus


def test_constraint_matrix_full_rank():
    img = two_block_image(8)
    graph = build_graph(img, delta=0.1, r=2)
    labels = LabelSet.from_pixels(img.shape, [(4, 1), (2, 2)], [(4, 6)])
    cons = encode_constraints(graph, labels)
    N = cons.matrix(graph.n).toarray()
    assert N.shape == (64, 4)
    assert np.linalg.matrix_rank(N) == 4


def test_empty_side_rejected():
    with pytest.raises(EmptySideError):
        LabelSet(np.array([1]), np.array([], dtype=int))


def test_normalized_laplacian_annihilates_sqrt_degrees():
    img = two_block_image(8)
    graph = build_graph(img, delta=0.1, r=2)
    labels = LabelSet.from_pixels(img.shape, [(4, 1)], [(4, 6)])
    problem = to_crqopt(graph, encode_constraints(graph, labels))
    null_vec = np.sqrt(graph.degrees)
    assert np.linalg.norm(problem.A.matvec(null_vec)) <= 1e-10 * np.linalg.norm(null_vec)


def test_normalized_laplacian_positive_semidefinite():
    img = two_block_image(8)
    graph = build_graph(img, delta=0.1, r=2)
    labels = LabelSet.from_pixels(img.shape, [(4, 1)], [(4, 6)])
    problem = to_crqopt(graph, encode_constraints(graph, labels))
    rng = np.random.default_rng(0)
    for _ in range(100):
        x = rng.standard_normal(graph.n)
        assert x @ problem.A.matvec(x) >= -1e-10 * (x @ x)


def test_pipeline_feasibility_and_normalization():
    img = two_block_image(8)
    graph = build_graph(img, delta=0.1, r=2)
    labels = LabelSet.from_pixels(img.shape, [(4, 1)], [(4, 6)])
    cons = encode_constraints(graph, labels)
    problem = to_crqopt(graph, cons)
    opts = crqopt.SolveOptions(tol=1e-12, maxit=60, detect_hard=False)
    sol = crqopt.solve(problem, opts)
    assert np.linalg.norm(problem.C.T @ sol.v - problem.b) <= 1e-8
    x = sol.v / np.sqrt(graph.degrees)
    # labeled entries hit their targets, balance row is satisfied
    c_plus, c_minus = cons.c_hat
    assert abs(x[labels.foreground[0]] - c_plus) <= 1e-6 * (abs(c_plus) + abs(c_minus))
    assert abs(x[labels.background[0]] - c_minus) <= 1e-6 * (abs(c_plus) + abs(c_minus))
    assert abs(graph.degrees @ x) <= 1e-6 * np.sqrt(graph.degrees.sum())
    assert x @ (graph.degrees * x) == pytest.approx(1.0, abs=1e-8)


def test_two_block_segmentation_exact_and_ncut_optimal():
    img = two_block_image(8)
    labels = LabelSet.from_pixels(img.shape, [(4, 1)], [(4, 6)])
    opts = crqopt.SolveOptions(method=crqopt.QEPMIN, tol=1e-10, maxit=60,
                               minit=1, checkstep=1, detect_hard=False)
    mask, heat, stats = segment(img, labels, delta=0.1, r=2, opts=opts)
    # the produced cut separates the two blocks exactly, with the
    # foreground label on the positive side
    assert mask[4, 1] and not mask[4, 6]
    assert np.array_equal(mask, img < 0.5)
    # sampled-oracle optimality: block cut plus 1000 random bipartitions
    graph = build_graph(img, delta=0.1, r=2)
    rng = np.random.default_rng(1)
    candidates = [ncut_value(graph, (img > 0.5).reshape(-1))]
    for _ in range(1000):
        cut = rng.random(64) > 0.5
        if cut.any() and not cut.all():
            candidates.append(ncut_value(graph, cut))
    assert stats["ncut"] <= min(candidates) + 1e-12


def test_labeled_pixels_respected_on_constant_image():
    img = np.full((8, 8), 3.0)
    labels = LabelSet.from_pixels(img.shape, [(1, 1)], [(6, 6)])
    opts = crqopt.SolveOptions(tol=1e-10, maxit=60, minit=1, checkstep=1, detect_hard=False)
    mask, heat, stats = segment(img, labels, delta=0.1, r=2, opts=opts)
    assert mask[1, 1]
    assert not mask[6, 6]
    assert 0.0 <= heat.min() and heat.max() <= 1.0


def test_gradient_split_beats_unconstrained_threshold_baseline():
    size = 64
    img = np.zeros((size, size))
    ramp = np.linspace(0.0, 0.35, size // 2)
    img[:, : size // 2] = ramp
    img[:, size // 2 :] = 0.65 + ramp
    labels = LabelSet.from_pixels(img.shape, [(32, 5)], [(32, 60)])
    opts = crqopt.SolveOptions(method=crqopt.QEPMIN, tol=8e-5, maxit=150,
                               minit=20, checkstep=5, detect_hard=False)
    mask, _, stats = segment(img, labels, delta=0.1, r=3, opts=opts)
    assert mask[32, 5] and not mask[32, 60]

    # unconstrained relaxation baseline: second-smallest generalized
    # eigenvector of (D - W, D), thresholded at zero
    graph = build_graph(img, delta=0.1, r=3)
    D = sp.diags(graph.degrees)
    L = D - graph.W
    vals, vecs = spla.eigsh(L.tocsc(), k=2, M=D.tocsc(), sigma=-1e-6, which="LM")
    fiedler = vecs[:, np.argsort(vals)[1]]
    baseline = fiedler > 0.0
    assert stats["ncut"] <= ncut_value(graph, baseline) + 1e-12


def test_labels_out_of_range_rejected():
    with pytest.raises(ValueError):
        LabelSet.from_pixels((8, 8), [(8, 0)], [(0, 0)])
