import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from phaseflow.graph import (Graph, GraphError, complete_graph, cut_weight, cycle_graph, degree,
                             dirichlet_energy, edge_inner, format_edge_list, gradient, indicator,
                             laplacian, parse_edge_list, path_graph, random_graph, star_graph,
                             sup_norm, total_variation, two_cluster_graph, vertex_inner)

from conftest import small_graphs


# -- construction ------------------------------------------------------------

def test_rejects_asymmetric():
    with pytest.raises(GraphError, match="symmetric"):
        Graph(np.array([[0, 1.0], [2.0, 0]]))


def test_rejects_self_loop():
    with pytest.raises(GraphError, match="self-loops"):
        Graph(np.array([[1.0, 1.0], [1.0, 0]]))


def test_rejects_disconnected():
    w = np.zeros((4, 4))
    w[0, 1] = w[1, 0] = 1
    w[2, 3] = w[3, 2] = 1
    with pytest.raises(GraphError, match="not connected"):
        Graph(w)


def test_rejects_isolated_vertex():
    w = np.zeros((3, 3))
    w[0, 1] = w[1, 0] = 1
    with pytest.raises(GraphError, match="isolated"):
        Graph(w)


def test_rejects_negative_weight_and_bad_r():
    with pytest.raises(GraphError):
        Graph(np.array([[0, -1.0], [-1.0, 0]]))
    with pytest.raises(GraphError):
        Graph(np.array([[0, 1.0], [1.0, 0]]), r=1.5)


def test_graph_is_immutable():
    g = path_graph(3)
    with pytest.raises(ValueError):
        g.weights[0, 1] = 5.0


# -- worked values -----------------------------------------------------------

def test_degrees():
    assert degree(complete_graph(2), 0) == 1
    assert degree(path_graph(3), 1) == 2
    assert degree(star_graph(4), 0) == 3
    with pytest.raises(IndexError):
        degree(path_graph(3), 3)


def test_vertex_inner_values():
    g = cycle_graph(5)
    assert vertex_inner(g, np.ones(5), np.ones(5)) == 5
    assert vertex_inner(complete_graph(2, r=1), [1, 0], [1, 0]) == 1
    assert vertex_inner(g, np.zeros(5), np.ones(5)) == 0
    with pytest.raises(ValueError):
        vertex_inner(g, np.ones(4), np.ones(5))


def test_vertex_inner_uses_degree_weights():
    g = star_graph(4, r=1)
    # centre has degree 3, leaves degree 1
    assert vertex_inner(g, [1, 1, 0, 0], [1, 1, 0, 0]) == 4


def test_edge_inner_values():
    k2 = complete_graph(2)
    phi = gradient(k2, [1, 0])
    assert edge_inner(k2, phi, phi) == 1
    p3 = path_graph(3)
    phi = gradient(p3, [1, 0, 0])
    assert edge_inner(p3, phi, phi) == 1
    assert edge_inner(p3, np.zeros((3, 3)), np.zeros((3, 3))) == 0


def test_gradient_values():
    g = complete_graph(2)
    grad = gradient(g, [1, 0])
    assert grad[0, 1] == -1 and grad[1, 0] == 1
    grad = gradient(path_graph(3), [0, 1, 0])
    assert grad[0, 1] == 1 and grad[1, 2] == -1 and grad[0, 2] == 0
    assert not np.any(gradient(cycle_graph(4), np.full(4, 0.3)))


def test_laplacian_values():
    np.testing.assert_array_equal(laplacian(complete_graph(2), [1, 0]), [1, -1])
    np.testing.assert_array_equal(laplacian(cycle_graph(5), np.ones(5)), np.zeros(5))
    # random-walk normalisation: centre (3 - 0)/3 = 1, each leaf (0 - 1)/1 = -1
    np.testing.assert_allclose(laplacian(star_graph(4, r=1), [1, 0, 0, 0]), [1, -1, -1, -1])


def test_laplacian_matches_matrix():
    g = random_graph(6, seed=1, r=0.5)
    u = np.linspace(0, 1, 6)
    np.testing.assert_allclose(laplacian(g, u), g.laplacian_matrix() @ u)


def test_dirichlet_energy_values():
    # half the squared edge norm: a single unit cut contributes 1/2
    assert dirichlet_energy(complete_graph(2), [1, 0]) == 0.5
    assert dirichlet_energy(path_graph(3), [1, 0, 0]) == 0.5
    assert dirichlet_energy(cycle_graph(4), np.full(4, 0.7)) == 0


def test_total_variation_values():
    assert total_variation(complete_graph(2), [1, 0]) == 1
    assert total_variation(star_graph(4), [1, 0, 0, 0]) == 3
    assert total_variation(cycle_graph(6), np.full(6, 0.2)) == 0


def test_sup_norm_values():
    assert sup_norm(np.zeros(3)) == 0
    assert sup_norm([1, -2]) == 2
    assert sup_norm([0.3, 0.7]) == 0.7


# -- properties --------------------------------------------------------------

@pytest.mark.parametrize("r", [0.0, 0.5, 1.0])
def test_summation_by_parts(r, rng):
    for g in small_graphs(r):
        for _ in range(20):
            u, v = rng.standard_normal((2, g.n_vertices))
            lhs = vertex_inner(g, laplacian(g, u), v)
            rhs = edge_inner(g, gradient(g, u), gradient(g, v))
            assert abs(lhs - rhs) <= 1e-10 * max(1.0, abs(lhs))


@pytest.mark.parametrize("r", [0.0, 1.0])
def test_laplacian_psd_and_dirichlet_identity(r, rng):
    for g in small_graphs(r):
        for _ in range(20):
            u = rng.standard_normal(g.n_vertices)
            q = vertex_inner(g, u, laplacian(g, u))
            assert q >= -1e-12
            assert abs(0.5 * q - dirichlet_energy(g, u)) <= 1e-10 * max(1, q)
        c = np.full(g.n_vertices, 0.37)
        assert abs(vertex_inner(g, c, laplacian(g, c))) <= 1e-14


@given(st.lists(st.floats(-5, 5), min_size=5, max_size=5))
@settings(max_examples=50, deadline=None)
def test_gradient_antisymmetric(vals):
    g = cycle_graph(5)
    grad = gradient(g, vals)
    assert np.array_equal(grad, -grad.T)


@pytest.mark.parametrize("g", [path_graph(6), cycle_graph(7), star_graph(8),
                               random_graph(10, seed=5), two_cluster_graph(8)], ids=repr)
def test_tv_of_indicator_is_cut_weight(g):
    n = g.n_vertices
    for mask in itertools.product([False, True], repeat=n):
        mask = np.array(mask)
        chi = indicator(n, mask)
        expected = float(g.weights[np.ix_(mask, ~mask)].sum())
        assert total_variation(g, chi) == pytest.approx(expected, abs=1e-12)
        assert cut_weight(g, mask) == pytest.approx(expected, abs=1e-12)


def test_tv_zero_iff_constant(rng):
    g = random_graph(6, seed=2)
    assert total_variation(g, np.full(6, 0.4)) == 0
    assert total_variation(g, rng.random(6)) > 0


# -- generators and edge lists ----------------------------------------------

def test_generators_shapes():
    assert sum(1 for _ in cycle_graph(4).edges()) == 4
    assert sum(1 for _ in star_graph(6).edges()) == 5
    assert sum(1 for _ in complete_graph(5).edges()) == 10
    g = two_cluster_graph(8, inter=0.05)
    assert g.weights[0, 1] == 1.0 and g.weights[0, 7] == 0.05
    assert np.array_equal(random_graph(8, seed=4).weights, random_graph(8, seed=4).weights)


def test_edge_list_roundtrip():
    g = random_graph(7, seed=11, r=1.0)
    h = parse_edge_list(format_edge_list(g, header="test"), r=1.0)
    assert np.array_equal(g.weights, h.weights)


def test_edge_list_parsing_rules():
    g = parse_edge_list("# a path\n0 1 1.5\n\n1 2 2  # trailing comment\n")
    assert g.weights[1, 0] == 1.5 and g.weights[2, 1] == 2
    with pytest.raises(GraphError, match="duplicate"):
        parse_edge_list("0 1 1\n1 0 2\n")
    with pytest.raises(GraphError, match="expected"):
        parse_edge_list("0 1\n")
    with pytest.raises(GraphError, match="non-positive"):
        parse_edge_list("0 1 0\n")
    with pytest.raises(GraphError, match="self-loop"):
        parse_edge_list("0 0 1\n0 1 1\n")
