"""Semi-discrete obstacle scheme and the MBO threshold scheme.

One step diffuses for time ``tau`` and then solves the obstacle problem

    minimise  lam <u, 1-u>_V + ||u - v||_V^2   over u in [0,1]^V,

with ``v = e^{-tau Lap} u_n`` and ``lam = tau/eps``.  For ``0 <= lam < 1``
the problem is strictly convex and separable, giving the piecewise linear
threshold ``rho_lam``.  At ``lam = 1`` it reduces to MBO thresholding.  The
accompanying obstacle term ``beta`` satisfies

    (1 - lam) u_{n+1} - v + (lam/2) 1 = lam beta_{n+1}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .functionals import ginzburg_landau, lyapunov_H, mbo_lyapunov_J
from .graph import Graph, _check_vertex, indicator, laplacian, sup_norm, vertex_inner
from .spectral import SpectralDecomposition, heat_apply
from .trajectory import Trajectory

TIE_TOL = 1e-12


@dataclass(frozen=True)
class SchemeParams:
    """Interface width ``epsilon`` and time step ``tau``; ``lam = tau/epsilon``.

    ``epsilon = inf`` encodes ``lam = 0`` (pure diffusion).  A negative
    ``epsilon`` gives the negative-``lam`` regime.
    """

    epsilon: float
    tau: float

    def __post_init__(self):
        if not self.tau > 0 or math.isnan(self.tau):
            raise ValueError(f"tau must be positive, got {self.tau}")
        if self.epsilon == 0 or math.isnan(self.epsilon):
            raise ValueError("epsilon must be nonzero")

    @classmethod
    def from_lambda(cls, tau: float, lam: float) -> "SchemeParams":
        return cls(math.inf if lam == 0 else tau / lam, tau)

    @property
    def lam(self) -> float:
        return 0.0 if math.isinf(self.epsilon) else self.tau / self.epsilon

    @property
    def regime(self) -> str:
        lam = self.lam
        if lam < 0:
            return "negative"
        if lam < 1:
            return "sub-unit"
        if lam == 1:
            return "mbo"
        return "super-unit"


@dataclass(frozen=True)
class SchemeState:
    u: np.ndarray
    beta: np.ndarray | None = None


def rho_lambda(lam: float, v) -> np.ndarray:
    """Minimiser of ``lam x(1-x) + (x - v)^2`` over ``[0, 1]``, componentwise."""
    if not 0.0 <= lam < 1.0:
        raise ValueError(f"rho_lambda needs lam in [0, 1), got {lam}")
    v = np.asarray(v, dtype=float)
    lin = 0.5 + (v - 0.5) / (1.0 - lam)
    out = np.where(v < 0.5 * lam, 0.0, np.where(v >= 1.0 - 0.5 * lam, 1.0, lin))
    return np.clip(out, 0.0, 1.0)


def beta_from_diffused(lam: float, v) -> np.ndarray:
    if not 0.0 < lam < 1.0:
        raise ValueError(f"beta_from_diffused needs lam in (0, 1), got {lam}")
    v = np.asarray(v, dtype=float)
    low = 0.5 - v / lam
    high = -0.5 + (1.0 - v) / lam
    return np.where(v < 0.5 * lam, low, np.where(v >= 1.0 - 0.5 * lam, high, 0.0))


def _endpoint_argmin(v: np.ndarray) -> np.ndarray:
    """Pick the cheaper endpoint of ``||u - v||^2`` over ``{0, 1}``; ties go to 1.

    This is the minimiser of the concave per-vertex objective for ``lam >= 1``.
    """
    cost0 = v * v
    cost1 = (1.0 - v) * (1.0 - v)
    return np.where(cost1 <= cost0, 1.0, 0.0)


def mbo_step(g: Graph, dec: SpectralDecomposition, tau: float, u) -> np.ndarray:
    """Diffuse the indicator and keep ``{i : v_i >= 1/2}``."""
    v = heat_apply(dec, tau, _check_vertex(g, u))
    return (v >= 0.5).astype(float)


def sd_step(g: Graph, dec: SpectralDecomposition, params: SchemeParams, u) -> SchemeState:
    lam = params.lam
    if not 0.0 <= lam <= 1.0:
        raise ValueError(f"sd_step needs lam in [0, 1], got {lam}; use scheme_step")
    v = heat_apply(dec, params.tau, _check_vertex(g, u))
    if lam == 1.0:
        return SchemeState(_endpoint_argmin(v), 0.5 - v)
    new = rho_lambda(lam, v)
    if lam == 0.0:
        return SchemeState(new, np.zeros_like(v))
    return SchemeState(new, beta_from_diffused(lam, v))


def step_lambda_gt1(g: Graph, dec: SpectralDecomposition, params: SchemeParams, u) -> np.ndarray:
    """Variational update for ``lam > 1``; equals the MBO threshold."""
    if not params.lam > 1.0:
        raise ValueError("step_lambda_gt1 needs lam > 1")
    return _endpoint_argmin(heat_apply(dec, params.tau, _check_vertex(g, u)))


def step_lambda_neg(g: Graph, dec: SpectralDecomposition, params: SchemeParams, u) -> SchemeState:
    lam = params.lam
    if not lam < 0:
        raise ValueError("step_lambda_neg needs lam < 0")
    v = heat_apply(dec, params.tau, _check_vertex(g, u))
    return SchemeState((v - 0.5 * lam) / (1.0 - lam), np.zeros_like(v))


def scheme_step(g: Graph, dec: SpectralDecomposition, params: SchemeParams, u) -> SchemeState:
    """One step in any regime of ``lam``."""
    lam = params.lam
    if lam < 0:
        return step_lambda_neg(g, dec, params, u)
    if lam <= 1:
        return sd_step(g, dec, params, u)
    v = heat_apply(dec, params.tau, _check_vertex(g, u))
    new = _endpoint_argmin(v)
    return SchemeState(new, ((1.0 - lam) * new - v + 0.5 * lam) / lam)


def defining_relation_residual(dec, params: SchemeParams, u_prev, state: SchemeState) -> float:
    """Sup-norm of ``(1-lam) u - e^{-tau Lap} u_prev + lam/2 - lam beta``."""
    lam = params.lam
    v = heat_apply(dec, params.tau, u_prev)
    return sup_norm((1.0 - lam) * state.u - v + 0.5 * lam - lam * state.beta)


def obstacle_sign_ok(u, beta, tol: float = 0.0) -> bool:
    """``beta`` lies in the obstacle cone of ``u``: zero inside, ``>= 0`` at 0, ``<= 0`` at 1."""
    u = np.asarray(u)
    beta = np.asarray(beta)
    at0 = u == 0.0
    at1 = u == 1.0
    inner = ~(at0 | at1)
    return bool(np.all(np.abs(beta[inner]) <= tol) and np.all(beta[at0] >= -tol)
                and np.all(beta[at1] <= tol))


def _energy_row(g, dec, params, u):
    eps = params.epsilon
    gl = ginzburg_landau(g, eps, u) if 0 < eps < math.inf else math.nan
    return {
        "H": lyapunov_H(g, dec, eps, params.tau, u),
        "GL": gl,
        "J": mbo_lyapunov_J(g, dec, params.tau, u),
    }


def sd_run(g: Graph, dec: SpectralDecomposition, params: SchemeParams, u0, n_steps: int,
           stop_at_fixed_point: bool = True, fixed_point_tol: float = 0.0,
           energies: bool = True, scheme_tag: str = "semi-discrete") -> Trajectory:
    """Iterate the scheme, stopping early once a step reproduces its input.

    A fixed point is declared when ``max|u_{n+1} - u_n| <= fixed_point_tol``
    (exact equality by default, which thresholded states reach exactly).
    """
    u = _check_vertex(g, u0).copy()
    n = g.n_vertices
    states, betas = [u], [np.full(n, np.nan)]
    rows = [_energy_row(g, dec, params, u)] if energies else None
    fixed = False
    for _ in range(int(n_steps)):
        st = scheme_step(g, dec, params, u)
        if stop_at_fixed_point and np.max(np.abs(st.u - u)) <= fixed_point_tol:
            fixed = True
            # keep the obstacle term that certifies the fixed point
            if np.all(np.isnan(betas[-1])):
                betas[-1] = st.beta
            break
        u = st.u
        states.append(u)
        betas.append(st.beta)
        if energies:
            rows.append(_energy_row(g, dec, params, u))
    times = params.tau * np.arange(len(states))
    return Trajectory(times, np.array(states), np.array(betas), scheme_tag, rows, fixed,
                      {"epsilon": params.epsilon, "tau": params.tau, "lambda": params.lam})


def sd_iterate(g, dec, params: SchemeParams, u0, n_steps: int) -> np.ndarray:
    """All ``n_steps + 1`` iterates without early stopping, as a ``(n_steps+1, n)`` array."""
    u = _check_vertex(g, u0).copy()
    out = [u]
    for _ in range(int(n_steps)):
        u = scheme_step(g, dec, params, u).u
        out.append(u)
    return np.array(out)


def pinning_bounds(g: Graph, dec: SpectralDecomposition, S, lam: float) -> tuple[float, float]:
    """Two sufficient step-size bounds under which one step fixes ``chi_S``.

    ``S`` is a list of vertices or a boolean mask.  Infinite bounds mean the
    indicator is fixed for every ``tau``.
    """
    chi = indicator(g.n_vertices, S)
    mass = vertex_inner(g, chi, np.ones_like(chi))
    if mass == 0:
        b1 = math.inf
    else:
        b1 = math.log1p(0.5 * lam * math.sqrt(float(np.min(g.vertex_weights)) / mass)) / dec.norm
    lap_sup = sup_norm(laplacian(g, chi))
    b2 = math.inf if lap_sup == 0 else lam / (2.0 * lap_sup)
    return b1, b2


def pinning_guaranteed(tau: float, bounds: tuple[float, float], lam: float) -> bool:
    """Apply the bounds, with the first one strict when ``lam = 1``."""
    b1, b2 = bounds
    ok1 = tau < b1 if lam >= 1.0 else tau <= b1
    return ok1 or tau <= b2


def sd_lipschitz_check(g, dec, params: SchemeParams, u0, v0, n: int, rel: float = 1e-10) -> bool:
    lam = params.lam
    if not 0.0 <= lam < 1.0:
        raise ValueError("the iteration bound needs lam in [0, 1)")
    us = sd_iterate(g, dec, params, u0, n)
    vs = sd_iterate(g, dec, params, v0, n)
    d0 = math.sqrt(vertex_inner(g, us[0] - vs[0], us[0] - vs[0]))
    for k in range(n + 1):
        dk = math.sqrt(vertex_inner(g, us[k] - vs[k], us[k] - vs[k]))
        if dk > (1.0 - lam) ** (-k) * d0 * (1.0 + rel):
            return False
    return True


def variational_objective(g, lam: float, u, v) -> float:
    u = np.asarray(u, dtype=float)
    return lam * vertex_inner(g, u, 1.0 - u) + vertex_inner(g, u - v, u - v)
