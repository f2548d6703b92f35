import math

import numpy as np
import pytest

from phaseflow.graph import complete_graph, cycle_graph, indicator, path_graph, random_graph, star_graph, vertex_inner
from phaseflow.lab import (beta_consistency_experiment, cesaro_identity_check, convergence_order_experiment,
                           cp1_experiment, cp1_sample, cp1_subsolution, cp2_experiment, empirical_pinning_tau,
                           fitted_slope, gamma_convergence_experiment, gl_on_grid, lyapunov_square_sum,
                           mcf_agreement_experiment, parallel_map, pinning_map, positive_part_gap,
                           positive_part_inequality, unit_grid)
from phaseflow.functionals import ginzburg_landau
from phaseflow.allen_cahn import interior_closed_form
from phaseflow.semidiscrete import SchemeParams, pinning_bounds, pinning_guaranteed
from phaseflow.spectral import decompose

from conftest import small_graphs


def _square(x):
    return x * x


# -- identities --------------------------------------------------------------

def test_positive_part_values():
    k2 = complete_graph(2)
    assert positive_part_gap(k2, [1, -1]) == pytest.approx(1.0)
    assert positive_part_gap(cycle_graph(5), np.linspace(0.1, 1, 5)) == pytest.approx(0, abs=1e-15)


@pytest.mark.parametrize("r", [0.0, 1.0])
def test_positive_part_inequality_random(r, rng):
    for g in small_graphs(r):
        for _ in range(300):
            assert positive_part_inequality(g, 2 * rng.standard_normal(g.n_vertices))


def test_cesaro_identity(rng):
    v = rng.standard_normal(4)
    assert cesaro_identity_check([v, v, v])
    e1, e2 = np.eye(2)
    assert cesaro_identity_check([e1, e2])
    for _ in range(20):
        assert cesaro_identity_check(list(rng.standard_normal((rng.integers(1, 8), 5))))
    g = star_graph(4, r=1)
    assert cesaro_identity_check(list(rng.random((5, 4))), inner=lambda a, b: vertex_inner(g, a, b))
    # the identity holds for every bilinear form; an affine offset breaks it
    assert not cesaro_identity_check(list(rng.random((5, 4))), inner=lambda a, b: float(np.dot(a, b)) + 0.1)


# -- comparison principles ---------------------------------------------------

def test_cp2_examples(rng):
    g = cycle_graph(6)
    dec = decompose(g)
    u0 = rng.random(6)
    same = cp2_experiment(g, dec, 0.5, u0, u0, T=0.5)
    assert same["passed"] and same["max_excess"] == 0
    assert cp2_experiment(g, dec, 0.5, u0, np.clip(u0 - 0.1, 0, 1), T=0.5)["passed"]
    assert cp2_experiment(g, dec, 0.5, u0, np.zeros(6), T=0.5)["passed"]
    with pytest.raises(ValueError):
        cp2_experiment(g, dec, 0.5, u0, u0 + 0.01)


def test_cp2_negative_control(rng):
    g = cycle_graph(6)
    dec = decompose(g)
    u0 = rng.random(6)
    res = cp2_experiment(g, dec, 0.5, u0, np.clip(u0 + 0.1, 0, 1), T=0.5, require_order=False)
    assert not res["passed"]


def test_cp1_subsolution_is_exact():
    # zero forcing: the subsolution solves the interior equation exactly
    g = cycle_graph(5)
    dec = decompose(g)
    eps, tau = 0.8, 0.01
    w0 = 0.5 + 0.03 * np.cos(np.arange(5))
    w = cp1_subsolution(g, dec, eps, w0, np.zeros((50, 5)), tau)
    for k in (0, 10, 50):
        np.testing.assert_allclose(w[k], interior_closed_form(g, dec, eps, w0, k * tau), atol=1e-13)
    # constant forcing c shifts the fixed point: eps w' = w - 1/2 - c on constants
    c = 0.2
    w = cp1_subsolution(g, dec, eps, np.full(5, 0.7), np.full((10, 5), c), tau)
    exact = 0.5 + c + (0.7 - 0.5 - c) * math.exp(10 * tau / eps)
    np.testing.assert_allclose(w[-1], exact, atol=1e-13)


def test_cp1_equality_case():
    g = cycle_graph(5)
    dec = decompose(g)
    u0 = 0.5 + 0.03 * np.cos(np.arange(5))
    res = cp1_sample(g, dec, 0.5, u0, 0.3, seed=1, w0=u0, forcing_scale=0.0, scheme="splitting")
    assert res["passed"] and abs(res["max_excess"]) <= 1e-10


def test_cp1_examples_and_negative_control():
    k2 = complete_graph(2)
    dec = decompose(k2)
    u0 = np.array([0.7, 0.4])
    res = cp1_sample(k2, dec, 0.5, u0, 0.5, seed=3, w0=u0 - 0.05)
    assert res["discarded"] or res["passed"]
    bad = cp1_sample(k2, dec, 0.5, u0, 0.5, seed=3, w0=u0 + np.array([0.0, 0.05]), forcing_scale=0.0)
    assert bad["passed"] is False
    g = cycle_graph(5)
    out = cp1_experiment(g, decompose(g), 0.5, np.linspace(0.2, 0.8, 5), T=0.5, n_samples=15, seed=4)
    assert out["passed"] and out["accepted"] == 15
    assert 0 <= out["discard_rate"] < 1


# -- convergence -------------------------------------------------------------

def test_fitted_slope():
    xs = np.array([1.0, 0.5, 0.25])
    assert fitted_slope(xs, 3 * xs) == pytest.approx(1.0)
    assert fitted_slope(xs, xs ** 2) == pytest.approx(2.0)
    assert math.isnan(fitted_slope(xs, [0.0, 1.0, 1.0]))


def test_convergence_interior_order():
    g = cycle_graph(6)
    dec = decompose(g)
    eps = 1.0
    u0 = 0.5 + 0.05 * np.array([1, -1, 1, -1, 1, -1.0])
    res = convergence_order_experiment(g, dec, eps, u0, 0.4, [0.2, 0.1, 0.05, 0.025])
    assert 0.8 <= res["slope"] <= 1.2
    assert res["monotone"]


def test_convergence_pinned_is_exact():
    g = star_graph(5)
    dec = decompose(g)
    chi = indicator(5, [1, 2, 3, 4])
    res = convergence_order_experiment(g, dec, 0.1, chi, 0.4, [0.02, 0.01])
    assert all(r["error"] == 0 for r in res["rows"])


def test_convergence_freezing_monotone():
    g = complete_graph(2)
    res = convergence_order_experiment(g, decompose(g), 0.5, [0.25, 0.25], 0.5, [0.1, 0.05, 0.025])
    assert res["monotone"]


def test_beta_consistency_tables():
    g = cycle_graph(4)
    dec = decompose(g)
    interior = beta_consistency_experiment(g, dec, 1.0, np.full(4, 0.5) + [0.01, -0.01, 0.01, -0.01], 0.2,
                                           [0.1, 0.05])
    assert all(r["beta_error"] == 0 and r["mean_beta_error"] == 0 for r in interior)
    frozen = beta_consistency_experiment(g, dec, 0.5, np.zeros(4), 0.3, [0.1, 0.05])
    assert all(r["beta_error"] <= 1e-12 for r in frozen)


# -- energy limits -----------------------------------------------------------

def test_gl_on_grid_matches_functional(rng):
    g = random_graph(4, seed=2, r=1)
    pts = unit_grid(4, 4)
    vals = gl_on_grid(g, 0.3, pts)
    for k in rng.integers(0, len(pts), 20):
        assert vals[k] == pytest.approx(ginzburg_landau(g, 0.3, pts[k]), abs=1e-12)
    with pytest.raises(ValueError):
        unit_grid(8, 20)


@pytest.mark.parametrize("g", [complete_graph(2), path_graph(3), complete_graph(3)], ids=repr)
def test_gamma_experiment(g):
    res = gamma_convergence_experiment(g, [1, 0.5, 0.25, 0.125], K=20)
    assert res["nonincreasing"] and res["final_within_grid"] and res["bound_holds"]
    n = g.n_vertices
    assert sorted(map(tuple, res["f0_minimizers"])) == [(0.0,) * n, (1.0,) * n]
    assert all(r["bound_ratio"] <= 1 for r in res["rows"])


# -- pinning and set schemes -------------------------------------------------

def test_pinning_map_consistent_with_bounds():
    g = star_graph(5)
    dec = decompose(g)
    rows = pinning_map(g, [0.25, 0.5, 1.0], dec=dec)
    assert len(rows) == 15
    for row in rows:
        S = [int(x) for x in row["set"].split()]
        b = pinning_bounds(g, dec, S, row["lambda"])
        assert (row["bound1"], row["bound2"]) == b
        # the scan stops at the first failure, which the guarantee must not cover
        if row["empirical"] < 10:
            scan = np.geomspace(1e-6, 10, 400)
            fail = scan[np.searchsorted(scan, row["empirical"], side="right")]
            assert not pinning_guaranteed(fail, b, row["lambda"])


def test_empirical_pinning_star_centre():
    g = star_graph(4)
    dec = decompose(g)
    # centre of S4: pinned exactly while 1/2 of the leaf mass stays below threshold
    tau = empirical_pinning_tau(g, dec, [0], 0.5)
    assert tau >= pinning_bounds(g, dec, [0], 0.5)[1]


def test_mcf_agreement_rows():
    g = cycle_graph(6)
    rows = mcf_agreement_experiment(g, [0.05, 0.5], n_sets=4, n_steps=4, seed=1)
    assert [r["tau"] for r in rows] == [0.05, 0.5]
    assert all(0 <= r["agreement"] <= 1 and r["steps"] >= 4 for r in rows)
    assert rows == mcf_agreement_experiment(g, [0.05, 0.5], n_sets=4, n_steps=4, seed=1)


def test_lyapunov_square_sum(rng):
    g = cycle_graph(6)
    dec = decompose(g)
    total, bound = lyapunov_square_sum(g, dec, SchemeParams(1.0, 0.3), rng.random(6), 100)
    assert total <= bound


def test_parallel_map_matches_serial():
    assert parallel_map(_square, range(6), jobs=2) == [x * x for x in range(6)]
    assert parallel_map(_square, [3], jobs=4) == [9]
