"""Diffusion-reaction splitting with an exactly solved obstacle reaction.

Each step diffuses for time ``tau`` and then runs the reaction
``eps u' = u - 1/2`` (the obstacle gradient flow of the potential alone) for
the same time.  Away from the obstacles the reaction is ``1/2 + e^lam (v - 1/2)``;
a component that reaches 0 or 1 within the step stays there.
"""

from __future__ import annotations

import numpy as np

from .graph import Graph, _check_vertex, sup_norm
from .semidiscrete import SchemeParams, rho_lambda
from .spectral import SpectralDecomposition, heat_apply, heat_matrix


def heaviside(x) -> np.ndarray:
    """Step function with the value 1 at 0, matching the MBO ``>= 1/2`` rule."""
    return np.where(np.asarray(x, dtype=float) >= 0, 1.0, 0.0)


def reaction_exact(eps: float, tau: float, v) -> np.ndarray:
    lam = tau / eps
    v = np.asarray(v, dtype=float)
    grown = np.exp(lam) * (v - 0.5)
    return np.where(np.abs(grown) < 0.5, 0.5 + grown, heaviside(v - 0.5))


def ts_step(g: Graph, dec: SpectralDecomposition, params: SchemeParams, u) -> np.ndarray:
    v = heat_apply(dec, params.tau, _check_vertex(g, u))
    return reaction_exact(params.epsilon, params.tau, v)


def ts_iterate(g, dec, params: SchemeParams, u0, n_steps: int) -> np.ndarray:
    """Iterates ``u_0 .. u_n`` as an ``(n+1, |V|)`` array."""
    heat = heat_matrix(dec, params.tau)
    u = _check_vertex(g, u0).copy()
    out = np.empty((n_steps + 1, u.size))
    out[0] = u
    for k in range(n_steps):
        u = reaction_exact(params.epsilon, params.tau, heat @ u)
        out[k + 1] = u
    return out


def ts_continuous(g, dec, params: SchemeParams, u0, times) -> np.ndarray:
    """Piecewise-continuous interpolant of the splitting scheme.

    On ``(n tau, (n+1) tau]`` it equals ``1/2 + e^{(t - n tau)/eps}(e^{-tau Lap} u_n - 1/2)``,
    the reaction started from the diffused state.  Only meaningful while the
    states stay strictly inside ``(0, 1)``.
    """
    times = np.asarray(times, dtype=float)
    tau, eps = params.tau, params.epsilon
    steps = np.maximum(np.ceil(times / tau - 1e-9).astype(int) - 1, 0)
    iterates = ts_iterate(g, dec, params, u0, int(steps.max()) + 1 if times.size else 0)
    out = np.empty((times.size, g.n_vertices))
    for k, (t, n) in enumerate(zip(times, steps)):
        if t == 0:
            out[k] = iterates[0]
            continue
        v = heat_apply(dec, tau, iterates[n])
        out[k] = 0.5 + np.exp((t - n * tau) / eps) * (v - 0.5)
    return out


def wells_proximity_compare(params: SchemeParams, v, tol: float = 0.0) -> bool:
    """Check ``|ts(v) - 1/2| <= |sd(v) - 1/2|`` componentwise for ``lam`` in ``[0, 1]``.

    ``ts`` is the exact reaction, ``sd`` the obstacle threshold ``rho_lam``
    (MBO thresholding at ``lam = 1``).
    """
    lam = params.lam
    if not 0.0 <= lam <= 1.0:
        raise ValueError("wells comparison needs lam in [0, 1]")
    v = np.asarray(v, dtype=float)
    ts = reaction_exact(params.epsilon, params.tau, v) if lam > 0 else v
    sd = heaviside(v - 0.5) if lam == 1.0 else rho_lambda(lam, v)
    return bool(np.all(np.abs(ts - 0.5) <= np.abs(sd - 0.5) + tol))


def ts_vs_ac_wells(g, dec, eps: float, tau: float, u0, t_grid, tol: float = 1e-10) -> bool:
    """Check ``||u_AC(t) - 1/2||_inf >= ||U(t) - 1/2||_inf`` on ``t_grid``.

    ``U`` is the continuous splitting interpolant and ``u_AC`` the closed-form
    interior solution; the caller must make sure the trajectory stays interior.
    """
    from .allen_cahn import interior_closed_form

    params = SchemeParams(eps, tau)
    split = ts_continuous(g, dec, params, u0, t_grid)
    for t, U in zip(t_grid, split):
        ac = interior_closed_form(g, dec, eps, u0, t)
        if sup_norm(ac - 0.5) < sup_norm(U - 0.5) - tol:
            return False
    return True
