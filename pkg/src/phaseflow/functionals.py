"""Energies for phase fields on graphs.

Infinite values are returned as ``math.inf``; the domain is checked before any
arithmetic so that infinities never leak into finite sums.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass

import numpy as np

from .graph import Graph, _check_vertex, dirichlet_energy, total_variation, vertex_inner
from .spectral import SpectralDecomposition, heat_apply

BINARY_TOL = 1e-12


def double_obstacle_W(x):
    """``x(1-x)/2`` on ``[0, 1]`` and ``+inf`` outside; works on scalars and arrays."""
    arr = np.asarray(x, dtype=float)
    out = np.where((arr >= 0) & (arr <= 1), 0.5 * arr * (1.0 - arr), np.inf)
    return float(out) if out.ndim == 0 else out


def in_unit_box(u) -> bool:
    u = np.asarray(u, dtype=float)
    return bool(np.all((u >= 0) & (u <= 1)))


def ginzburg_landau(g: Graph, eps: float, u) -> float:
    if eps <= 0:
        raise ValueError("eps must be positive")
    u = _check_vertex(g, u)
    if not in_unit_box(u):
        return math.inf
    potential = float(np.sum(g.vertex_weights * 0.5 * u * (1.0 - u)))
    return dirichlet_energy(g, u) + potential / eps


def mbo_lyapunov_J(g: Graph, dec: SpectralDecomposition, tau: float, u) -> float:
    """``<1 - u, e^{-tau Lap} u>_V``."""
    u = _check_vertex(g, u)
    return vertex_inner(g, 1.0 - u, heat_apply(dec, tau, u))


def _lam(eps, tau):
    return 0.0 if math.isinf(eps) else tau / eps


def lyapunov_H(g: Graph, dec: SpectralDecomposition, eps: float, tau: float, u) -> float:
    """``lam <u, 1-u>_V + <u, (I - e^{-tau Lap}) u>_V`` with ``lam = tau/eps``.

    ``eps = inf`` is accepted and means ``lam = 0``.
    """
    u = _check_vertex(g, u)
    lam = _lam(eps, tau)
    return lam * vertex_inner(g, u, 1.0 - u) + vertex_inner(g, u, u - heat_apply(dec, tau, u))


def scaled_lyapunov(g: Graph, dec: SpectralDecomposition, eps: float, tau: float, u) -> float:
    """``H / (2 tau)``, which approaches Ginzburg-Landau as ``tau -> 0``."""
    return lyapunov_H(g, dec, eps, tau, u) / (2.0 * tau)


def scaled_lyapunov_bound(dec: SpectralDecomposition, tau: float, u) -> float:
    """Upper bound ``(tau/4) ||Lap||^2 ||u||_V^2`` on ``|H/(2 tau) - GL|``."""
    g = dec.graph
    return 0.25 * tau * dec.norm ** 2 * vertex_inner(g, u, u)


def is_binary(u, tol: float = BINARY_TOL) -> bool:
    u = np.asarray(u, dtype=float)
    return bool(np.all((np.abs(u) <= tol) | (np.abs(u - 1.0) <= tol)))


def limit_functional_f0(g: Graph, u) -> float:
    """Half the total variation on binary states, ``+inf`` on other states.

    Values within ``1e-12`` of 0 or 1 are rounded before the binary test.
    """
    u = _check_vertex(g, u)
    if not is_binary(u):
        return math.inf
    return 0.5 * total_variation(g, np.round(u))


def lyapunov_gradient(g: Graph, dec: SpectralDecomposition, eps: float, tau: float, u) -> np.ndarray:
    u = _check_vertex(g, u)
    lam = _lam(eps, tau)
    return lam - 2.0 * heat_apply(dec, tau, u) + 2.0 * (1.0 - lam) * u


def stationary_set_check(g, dec, eps, tau, u, tol: float = 1e-10) -> bool:
    """True when the gradient of H vanishes at ``u``.

    For interior ``u`` this happens exactly on the affine set ``1/2 + E`` with
    ``E`` the eigenspace of ``e^{-tau Lap}`` for eigenvalue ``1 - lam``.
    """
    grad = lyapunov_gradient(g, dec, eps, tau, u)
    return bool(np.max(np.abs(grad)) <= tol)


def in_half_plus_eigenspace(dec: SpectralDecomposition, eps, tau, u, tol: float = 1e-10) -> bool:
    """Independent route for the stationarity test: project ``u - 1/2`` on the spectrum."""
    lam = _lam(eps, tau)
    c = dec.forward(np.asarray(u, dtype=float) - 0.5)
    on = np.abs(np.exp(-tau * dec.eigenvalues) - (1.0 - lam)) <= tol
    return bool(np.all(np.abs(c[~on]) <= tol))


def half_one_global_max_condition(g, dec: SpectralDecomposition, eps: float, tau: float) -> bool:
    """Whether ``1/2`` maximises H on ``[0,1]^V``; holds iff ``tau <= eps <= tau/(1-e^{-tau ||Lap||})``."""
    lam = _lam(eps, tau)
    if lam > 1.0:
        return False
    return bool(np.all(np.exp(-tau * dec.eigenvalues) - (1.0 - lam) >= -1e-15))


@dataclass(frozen=True)
class EnergyReport:
    gl: float
    h: float
    j: float
    tv: float
    dirichlet: float

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        # JSON has no infinity literal; emit null for it
        return json.dumps({k: (None if math.isinf(v) else v) for k, v in asdict(self).items()})


def energy_report(g: Graph, dec: SpectralDecomposition, eps: float, tau: float, u) -> EnergyReport:
    u = _check_vertex(g, u)
    gl = ginzburg_landau(g, eps, u) if not math.isinf(eps) else dirichlet_energy(g, u)
    return EnergyReport(
        gl=gl,
        h=lyapunov_H(g, dec, eps, tau, u),
        j=mbo_lyapunov_J(g, dec, tau, u),
        tv=total_variation(g, u),
        dirichlet=dirichlet_energy(g, u),
    )
