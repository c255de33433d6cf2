import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from targetdiff.errors import DegeneratePartitionError
from targetdiff.graph import TargetSet
from targetdiff.objective import (ObjectiveWeights, evaluate, grad_lambda1_s, grad_phi_s,
                                  grad_sigma_s)

from oracles import (connected_subset, lambda1_block, max_relative_error, ncut_direct,
                     random_connected, sigma_dense, symmetric_fd)

K3 = np.ones((3, 3)) - np.eye(3)
STAR4 = nx.to_numpy_array(nx.star_graph(3))


def assert_clean(grad):
    assert np.array_equal(grad, grad.T)
    assert not np.any(np.diag(grad))


# -- lambda_1 of the target block ---------------------------------------------

def test_lambda1_k3():
    res = grad_lambda1_s(K3, TargetSet.of(3, range(3)))
    assert res.value == pytest.approx(2.0)
    off = ~np.eye(3, dtype=bool)
    np.testing.assert_allclose(res.gradient[off], 1 / 3, atol=1e-10)
    assert_clean(res.gradient)


def test_lambda1_single_edge_block():
    a = nx.to_numpy_array(nx.path_graph(4))
    res = grad_lambda1_s(a, TargetSet.of(4, [1, 2]))
    assert res.value == pytest.approx(1.0)
    assert res.gradient[1, 2] == pytest.approx(0.5) and res.gradient[2, 1] == pytest.approx(0.5)
    assert np.count_nonzero(res.gradient) == 2


def test_lambda1_edgeless_block_warns():
    a = nx.to_numpy_array(nx.path_graph(3))
    res = grad_lambda1_s(a, TargetSet.of(3, [0, 2]))
    assert res.value == 0.0 and not res.gradient.any() and res.warning


def test_lambda1_random_six_node_fd():
    rng = np.random.default_rng(6)
    a = random_connected(rng, 6)
    s = connected_subset(rng, a, low=3)
    res = grad_lambda1_s(a, TargetSet.of(6, s))
    num = symmetric_fd(lambda b: lambda1_block(b, s), a)
    assert max_relative_error(res.gradient, num) < 1e-4
    mask = np.zeros(6, dtype=bool)
    mask[s] = True
    assert not res.gradient[~np.outer(mask, mask)].any()


# -- eigenvector centrality of S ----------------------------------------------

def test_sigma_k3_whole_set():
    res = grad_sigma_s(K3, TargetSet.of(3, range(3)))
    assert res.value == pytest.approx(np.sqrt(3), abs=1e-10)
    off = res.gradient[~np.eye(3, dtype=bool)]
    np.testing.assert_allclose(off, off[0], atol=1e-10)
    num = symmetric_fd(lambda b: sigma_dense(b, range(3)), K3)
    np.testing.assert_allclose(res.gradient, num, atol=1e-6)


def test_sigma_star_centre():
    res = grad_sigma_s(STAR4, TargetSet.of(4, [0]))
    assert res.value == pytest.approx(1 / np.sqrt(2), abs=1e-8)
    assert sigma_dense(STAR4, [0]) == pytest.approx(1 / np.sqrt(2), abs=1e-12)


def test_sigma_random_eight_node_fd():
    rng = np.random.default_rng(8)
    a = random_connected(rng, 8)
    s = connected_subset(rng, a)
    res = grad_sigma_s(a, TargetSet.of(8, s))
    assert res.value == pytest.approx(sigma_dense(a, s), abs=1e-8)
    num = symmetric_fd(lambda b: sigma_dense(b, s), a)
    assert max_relative_error(res.gradient, num) < 1e-3
    assert_clean(res.gradient)


def test_sigma_disconnected_warns():
    a = np.zeros((5, 5))
    a[:3, :3] = K3
    a[3, 4] = a[4, 3] = 1
    res = grad_sigma_s(a, TargetSet.of(5, [0, 3]))
    assert res.warning and np.all(np.isfinite(res.gradient))


# -- normalized cut -----------------------------------------------------------

def test_phi_k22():
    a = nx.to_numpy_array(nx.complete_bipartite_graph(2, 2))
    assert grad_phi_s(a, TargetSet.of(4, [0, 1])).value == pytest.approx(2.0)


def test_phi_disjoint_cliques_gradient_on_cross_entries():
    a = np.zeros((6, 6))
    a[:3, :3] = a[3:, 3:] = K3
    res = grad_phi_s(a, TargetSet.of(6, [0, 1, 2]))
    assert res.value == 0.0
    cross = np.zeros((6, 6), dtype=bool)
    cross[:3, 3:] = cross[3:, :3] = True
    assert np.all(res.gradient[cross] > 0)
    assert not res.gradient[~cross].any()


def test_sigma_truncation_on_path():
    # A 7-node path has lambda_2 / lambda_1 ~ 0.77 and a symmetric spectrum; fifty
    # steps leave a visible truncation error that a longer run removes.
    a = nx.to_numpy_array(nx.path_graph(7))
    s = TargetSet.of(7, [1, 2, 3])
    num = symmetric_fd(lambda b: sigma_dense(b, s.members), a)
    short = max_relative_error(grad_sigma_s(a, s).gradient, num)
    long = max_relative_error(grad_sigma_s(a, s, k=400, tol=1e-14).gradient, num)
    assert long < 1e-6 < short


def test_phi_random_six_node_fd():
    rng = np.random.default_rng(66)
    a = random_connected(rng, 6) * rng.uniform(0.5, 2.0, (6, 6))
    a = np.triu(a, 1) + np.triu(a, 1).T
    s = [0, 2, 5]
    res = grad_phi_s(a, TargetSet.of(6, s))
    assert res.value == pytest.approx(ncut_direct(a, s), rel=1e-12)
    num = symmetric_fd(lambda b: ncut_direct(b, s), a)
    assert max_relative_error(res.gradient, num) < 1e-6


def test_phi_degenerate():
    a = np.zeros((3, 3))
    a[0, 1] = a[1, 0] = 1
    with pytest.raises(DegeneratePartitionError):
        grad_phi_s(a, TargetSet.of(3, [2]))


# -- combined objective -------------------------------------------------------

@pytest.fixture
def instance():
    rng = np.random.default_rng(3)
    a = random_connected(rng, 9)
    return a, TargetSet.of(9, connected_subset(rng, a, low=3))


def test_single_term_reductions(instance):
    a, s = instance
    r1 = evaluate(a, s, ObjectiveWeights(1, 0, 0))
    assert r1.total == r1.lambda1S
    np.testing.assert_array_equal(r1.gradient, grad_lambda1_s(a, s).gradient)
    assert np.isnan(r1.sigmaS) and np.isnan(r1.phiS)
    r3 = evaluate(a, s, ObjectiveWeights(0, 0, 1))
    assert r3.total == pytest.approx(ncut_direct(a, s.members))


def test_default_weights_give_mean(instance):
    a, s = instance
    r = evaluate(a, s, ObjectiveWeights())
    assert r.total == pytest.approx((r.lambda1S + r.sigmaS + r.phiS) / 3, rel=1e-12)
    assert_clean(r.gradient)


def test_weights_not_normalized(instance):
    a, s = instance
    r = evaluate(a, s, ObjectiveWeights(2, 2, 2))
    assert r.total == pytest.approx(2 * (r.lambda1S + r.sigmaS + r.phiS))


def test_weights_validation():
    with pytest.raises(ValueError):
        ObjectiveWeights(-1, 1, 1)
    with pytest.raises(ValueError):
        ObjectiveWeights(0, 0, 0)


def test_scaling(instance):
    a, s = instance
    base = evaluate(a, s, ObjectiveWeights(1, 0, 1))
    scaled = grad_lambda1_s(2.5 * a, s).value
    assert scaled == pytest.approx(2.5 * base.lambda1S, rel=1e-9)
    assert grad_phi_s(2.5 * a, s).value == pytest.approx(base.phiS, rel=1e-12)


@settings(max_examples=15, deadline=None)
@given(st.integers(5, 10), st.integers(0, 2**31 - 1))
def test_gradients_match_finite_differences(n, seed):
    # Generous K so that truncation of the iteration does not mask adjoint errors
    # on small-gap graphs such as long paths.
    rng = np.random.default_rng(seed)
    a = random_connected(rng, n)
    members = connected_subset(rng, a)
    s = TargetSet.of(n, members)
    for res, f, tol in (
        (grad_lambda1_s(a, s, k=1000, tol=1e-14), lambda b: lambda1_block(b, members), 1e-4),
        (grad_sigma_s(a, s, k=1000, tol=1e-14), lambda b: sigma_dense(b, members), 1e-3),
        (grad_phi_s(a, s), lambda b: ncut_direct(b, members), 1e-4),
    ):
        assert_clean(res.gradient)
        assert max_relative_error(res.gradient, symmetric_fd(f, a)) < tol
