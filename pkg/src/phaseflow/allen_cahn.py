"""Double-obstacle Allen-Cahn flow on a graph.

The flow is the differential inclusion

    eps u' = -eps Lap u + u - 1/2 + beta,   beta in B(u),

where ``B(u)`` is the obstacle cone: ``beta_i = 0`` when ``0 < u_i < 1``,
``beta_i >= 0`` at ``u_i = 0`` and ``beta_i <= 0`` at ``u_i = 1``.  No exact
solver exists in general, so reference trajectories come from the
semi-discrete scheme with a small step (``eps/1024`` by default).  A smooth
regularisation of the obstacle potential solved with RK4 provides an
independent route.
"""

from __future__ import annotations

import math

import numpy as np

from .functionals import ginzburg_landau
from .graph import Graph, _check_vertex, edge_inner, gradient, laplacian, vertex_inner, vertex_norm
from .semidiscrete import beta_from_diffused
from .spectral import SpectralDecomposition, heat_matrix, phi1, phi2, semigroup_with_drift
from .trajectory import Trajectory

SNAP_TOL = 1e-9
REF_DIVISOR = 1024


class StepRejected(RuntimeError):
    """The regularised integrator left its admissible band; reduce ``dt``."""


# ---------------------------------------------------------------------------
# obstacle term
# ---------------------------------------------------------------------------

def beta_explicit(g: Graph, eps: float, u, snap: float = SNAP_TOL) -> np.ndarray:
    """Obstacle term of an AC state, read off from the state alone.

    Vertices within ``snap`` of 0 get ``1/2 + eps (Lap u)_i``, those within
    ``snap`` of 1 get ``-1/2 + eps (Lap u)_i``, interior vertices get 0.
    """
    u = _check_vertex(g, u)
    lap = eps * laplacian(g, u)
    return np.where(u <= snap, 0.5 + lap, np.where(u >= 1.0 - snap, -0.5 + lap, 0.0))


# ---------------------------------------------------------------------------
# smooth approximation of the obstacle potential
# ---------------------------------------------------------------------------

def w_nu(nu: float, x):
    x = np.asarray(x, dtype=float)
    out = np.where(x < 0, x * x / (4 * nu) + 0.5 * x,
                   np.where(x > 1, (x - 1) ** 2 / (4 * nu) - 0.5 * (x - 1), 0.5 * x * (1 - x)))
    return float(out) if out.ndim == 0 else out


def w_nu_prime(nu: float, x):
    """Derivative of the quadratic-extension potential; wells at ``-nu`` and ``1 + nu``."""
    if not nu > 0:
        raise ValueError("nu must be positive")
    x = np.asarray(x, dtype=float)
    out = np.where(x < 0, x / (2 * nu) + 0.5, np.where(x > 1, (x - 1) / (2 * nu) - 0.5, 0.5 - x))
    return float(out) if out.ndim == 0 else out


def regularized_rhs(g: Graph, eps: float, nu: float, u) -> np.ndarray:
    return -laplacian(g, u) - w_nu_prime(nu, u) / eps


def default_regularized_dt(dec: SpectralDecomposition, eps: float, nu: float) -> float:
    return min(0.1 * eps * nu, 0.01 / dec.norm)


def _uniform_grid(t_end: float, per_unit: int = 200) -> np.ndarray:
    n = max(1, int(math.ceil(t_end * per_unit)))
    return np.linspace(0.0, t_end, n + 1)


def regularized_flow(g: Graph, dec: SpectralDecomposition, eps: float, nu: float, u0,
                     t_end: float | None = None, dt: float | None = None, t_grid=None) -> Trajectory:
    """Classical RK4 for ``u' = -Lap u - W_nu'(u)/eps``.

    Output is sampled on ``t_grid`` (default: 200 samples per unit time up to
    ``t_end``); each gap is covered by equal substeps no longer than ``dt``.
    The obstacle term reported is ``1/2 - u - W_nu'(u)``, the forcing that
    replaces ``beta`` in the regularised equation.

    Raises
    ------
    StepRejected
        If a state leaves ``[-nu - 1e-6, 1 + nu + 1e-6]``.
    """
    u = _check_vertex(g, u0).copy()
    if not 0 < nu <= 1:
        raise ValueError("nu must lie in (0, 1]")
    if t_grid is None:
        if t_end is None:
            raise ValueError("give t_end or t_grid")
        t_grid = _uniform_grid(t_end)
    t_grid = np.asarray(t_grid, dtype=float)
    if dt is None:
        dt = default_regularized_dt(dec, eps, nu)
    lo, hi = -nu - 1e-6, 1.0 + nu + 1e-6
    lap = g.laplacian_matrix()

    def rhs(x):
        return -(lap @ x) - w_nu_prime(nu, x) / eps

    states = np.empty((t_grid.size, u.size))
    t = 0.0
    if t_grid[0] != 0.0:
        raise ValueError("t_grid must start at 0")
    states[0] = u
    for k in range(1, t_grid.size):
        gap = t_grid[k] - t
        m = max(1, int(math.ceil(gap / dt - 1e-9)))
        h = gap / m
        for _ in range(m):
            k1 = rhs(u)
            k2 = rhs(u + 0.5 * h * k1)
            k3 = rhs(u + 0.5 * h * k2)
            k4 = rhs(u + h * k3)
            u = u + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
            if np.any(u < lo) or np.any(u > hi) or not np.all(np.isfinite(u)):
                raise StepRejected(f"state left [-nu, 1+nu] near t={t:.6g}; dt={dt:.3g} is too large")
        t = t_grid[k]
        states[k] = u
    betas = 0.5 - states - w_nu_prime(nu, states)
    return Trajectory(t_grid, states, betas, "regularized",
                      meta={"epsilon": eps, "nu": nu, "dt": dt})


def regularized_closed_form_from_zero(eps: float, nu: float, t):
    """Spatially constant value of the regularised flow started from 0."""
    return -nu * (1.0 - np.exp(-np.asarray(t, dtype=float) / (2 * eps * nu)))


# ---------------------------------------------------------------------------
# reference solutions
# ---------------------------------------------------------------------------

def _step_counts(t_grid, tau):
    return np.ceil(np.asarray(t_grid, dtype=float) / tau - 1e-9).astype(int)


def _reference_sweep(heat, lam, U, counts, scheme):
    """Advance the columns of ``U`` and record states and diffused values at ``counts``.

    Returns ``(states, diffused)`` of shape ``(len(counts), n, B)``; ``diffused``
    holds the pre-threshold value of the step that produced each sample (NaN
    for samples taken before any step).
    """
    states = np.empty((len(counts),) + U.shape)
    diffused = np.full_like(states, np.nan)
    lo, hi = 0.5 * lam, 1.0 - 0.5 * lam
    slope = 1.0 / (1.0 - lam)
    growth = math.exp(lam)
    v = None
    done = 0
    for k, m in enumerate(counts):
        while done < m:
            v = heat @ U
            if scheme == "semi-discrete":
                U = np.where(v < lo, 0.0, np.where(v >= hi, 1.0, np.clip(0.5 + (v - 0.5) * slope, 0.0, 1.0)))
            else:
                grown = growth * (v - 0.5)
                U = np.where(np.abs(grown) < 0.5, 0.5 + grown, np.where(v >= 0.5, 1.0, 0.0))
            done += 1
        states[k] = U
        if m > 0:
            diffused[k] = v
    return states, diffused


def ac_reference_batch(g: Graph, dec: SpectralDecomposition, eps: float, U0, t_grid,
                       tau_ref: float | None = None, scheme: str = "semi-discrete") -> np.ndarray:
    """States of several reference runs at once; ``U0`` is ``(B, n)``, result ``(len(t_grid), B, n)``."""
    if tau_ref is None:
        tau_ref = eps / REF_DIVISOR
    lam = tau_ref / eps
    if not 0 < lam < 1:
        raise ValueError("tau_ref must be smaller than eps")
    U0 = np.atleast_2d(np.asarray(U0, dtype=float))
    states, _ = _reference_sweep(heat_matrix(dec, tau_ref), lam, U0.T.copy(),
                                 _step_counts(t_grid, tau_ref), scheme)
    return states.transpose(0, 2, 1)


def ac_reference(g: Graph, dec: SpectralDecomposition, eps: float, u0, t_grid,
                 tau_ref: float | None = None, scheme: str = "semi-discrete") -> Trajectory:
    """Fine-step approximation of the AC flow sampled at ``t_grid``.

    The sample at time ``t`` is iterate ``ceil(t / tau_ref)``.  ``scheme`` is
    ``"semi-discrete"`` (default) or ``"splitting"``; the latter is exact while
    the state stays interior.  The obstacle term at ``t = 0`` comes from
    ``beta_explicit``; later ones from the step that produced the sample.
    """
    if tau_ref is None:
        tau_ref = eps / REF_DIVISOR
    lam = tau_ref / eps
    if not 0 < lam < 1:
        raise ValueError("tau_ref must be smaller than eps")
    if scheme not in ("semi-discrete", "splitting"):
        raise ValueError(f"unknown reference scheme {scheme!r}")
    u = _check_vertex(g, u0).copy()
    t_grid = np.asarray(t_grid, dtype=float)
    counts = _step_counts(t_grid, tau_ref)
    states, diffused = _reference_sweep(heat_matrix(dec, tau_ref), lam, u[:, None], counts, scheme)
    states, diffused = states[:, :, 0], diffused[:, :, 0]
    betas = np.empty_like(states)
    for k, m in enumerate(counts):
        if m == 0:
            betas[k] = beta_explicit(g, eps, states[k])
        elif scheme == "semi-discrete":
            betas[k] = beta_from_diffused(lam, diffused[k])
        else:
            betas[k] = beta_explicit(g, eps, states[k])
    return Trajectory(t_grid, states, betas, f"reference/{scheme}",
                      meta={"epsilon": eps, "tau_ref": tau_ref})


def interior_closed_form(g: Graph, dec: SpectralDecomposition, eps: float, u0, t: float) -> np.ndarray:
    """``1/2 + e^{t/eps} e^{-t Lap}(u0 - 1/2)``, the flow while no vertex touches an obstacle."""
    u0 = _check_vertex(g, u0)
    return 0.5 + semigroup_with_drift(dec, eps, t, u0 - 0.5)


def first_obstacle_time(g, dec, eps, u0, t_max: float, n_samples: int = 4000) -> float:
    """First sample time at which the interior closed form leaves ``[0, 1]`` (``inf`` if never up to ``t_max``)."""
    for t in np.linspace(0.0, t_max, n_samples + 1):
        u = interior_closed_form(g, dec, eps, u0, t)
        if np.any(u < 0) or np.any(u > 1):
            return float(t)
    return math.inf


def freeze_time_alpha(eps: float, alpha: float) -> float:
    """Time at which the constant state ``alpha`` (``0 < alpha < 1/2``) reaches 0."""
    if not 0 < alpha < 0.5:
        raise ValueError("alpha must lie in (0, 1/2)")
    return -eps * math.log1p(-2.0 * alpha)


def obstacle_hit_time(traj: Trajectory, snap: float = 0.0) -> float:
    """First sample time at which some vertex sits at 0 or 1."""
    hit = np.any((traj.states <= snap) | (traj.states >= 1.0 - snap), axis=1)
    idx = np.flatnonzero(hit)
    return float(traj.times[idx[0]]) if idx.size else math.inf


def lipschitz_in_time_constant(g: Graph, eps: float) -> float:
    """Global Lipschitz constant of AC trajectories over gaps shorter than 1."""
    norm1 = math.sqrt(float(np.sum(g.vertex_weights)))
    e = math.exp(1.0 / eps)
    return 0.5 * norm1 * (e - 1.0 + e / eps)


# ---------------------------------------------------------------------------
# residual checks
# ---------------------------------------------------------------------------

def integral_form_residual(g: Graph, dec: SpectralDecomposition, eps: float, traj: Trajectory) -> float:
    """Largest V-norm mismatch with the variation-of-constants formula.

    The convolution with ``beta`` is evaluated by the product trapezoidal
    rule: ``beta`` is interpolated linearly between samples and the
    exponential factor is integrated exactly, so constant ``beta`` incurs no
    quadrature error.
    """
    times, states, betas = traj.times, traj.states, traj.betas
    if np.any(np.isnan(betas)):
        raise ValueError("trajectory has missing obstacle terms")
    a = 1.0 / eps - dec.eigenvalues  # spectrum of I/eps - Lap
    u0 = states[0]
    conv = np.zeros_like(u0)  # spectral coefficients of the running integral
    worst = 0.0
    for k in range(1, times.size):
        h = times[k] - times[k - 1]
        z = h * a
        b0 = dec.forward(betas[k - 1])
        b1 = dec.forward(betas[k])
        conv = np.exp(z) * conv + h * (phi1(z) - phi2(z)) * b0 + h * phi2(z) * b1
        pred = 0.5 + semigroup_with_drift(dec, eps, times[k] - times[0], u0 - 0.5) + dec.backward(conv) / eps
        worst = max(worst, vertex_norm(g, states[k] - pred))
    return worst


def weak_form_values(g: Graph, eps: float, u, udot, etas) -> np.ndarray:
    """``<eps u' - u + 1/2, eta - u>_V + eps <grad u, grad eta - grad u>_E`` for each ``eta``."""
    gu = gradient(g, u)
    lead = eps * udot - u + 0.5
    out = []
    for eta in etas:
        diff = eta - u
        out.append(vertex_inner(g, lead, diff) + eps * edge_inner(g, gu, gradient(g, eta) - gu))
    return np.array(out)


def weak_form_residual(g: Graph, eps: float, traj: Trajectory, eta_samples=None, seed=0,
                       n_random: int = 32) -> float:
    """Minimum of the variational inequality over samples and test functions.

    Time derivatives are centred differences at interior samples.  Test
    functions are the supplied ones or, by default, random points of
    ``[0,1]^V`` together with the two constant corners.  A solution gives a
    value ``>= -tol``; it equals 0 for ``eta = u``.
    """
    rng = np.random.default_rng(seed)
    n = g.n_vertices
    if eta_samples is None:
        eta_samples = [np.zeros(n), np.ones(n)] + list(rng.random((n_random, n)))
    times, states = traj.times, traj.states
    worst = math.inf
    for k in range(1, times.size - 1):
        udot = (states[k + 1] - states[k - 1]) / (times[k + 1] - times[k - 1])
        vals = weak_form_values(g, eps, states[k], udot, eta_samples)
        worst = min(worst, float(vals.min()))
    return worst


def gl_decrease_violations(g: Graph, traj: Trajectory, eps: float, tol: float = 1e-8) -> int:
    """Count sample pairs ``s < t`` with ``GL(s) - GL(t) < ||u(s)-u(t)||^2 / (2(t-s)) - tol``."""
    gl = np.array([ginzburg_landau(g, eps, u) for u in traj.states])
    w = g.vertex_weights
    count = 0
    for a in range(len(traj) - 1):
        diff = traj.states[a + 1:] - traj.states[a]
        dist2 = np.sum(diff * diff * w, axis=1)
        gap = traj.times[a + 1:] - traj.times[a]
        count += int(np.sum(gl[a] - gl[a + 1:] < dist2 / (2 * gap) - tol))
    return count


def gl_decrease_check(g: Graph, traj: Trajectory, eps: float, tol: float = 1e-8) -> bool:
    return gl_decrease_violations(g, traj, eps, tol) == 0


def holder_half_violations(g: Graph, traj: Trajectory, eps: float, tol: float = 1e-8) -> int:
    """Count pairs violating ``||u(s)-u(t)|| <= sqrt(|t-s|) sqrt(2 GL(u(0)))``."""
    c = math.sqrt(2.0 * ginzburg_landau(g, eps, traj.states[0]))
    w = g.vertex_weights
    count = 0
    for a in range(len(traj) - 1):
        diff = traj.states[a + 1:] - traj.states[a]
        dist = np.sqrt(np.sum(diff * diff * w, axis=1))
        gap = traj.times[a + 1:] - traj.times[a]
        count += int(np.sum(dist > np.sqrt(gap) * c + tol))
    return count


def holder_half_check(g: Graph, traj: Trajectory, eps: float, tol: float = 1e-8) -> bool:
    return holder_half_violations(g, traj, eps, tol) == 0


def wellposed_ratios(g, dec, eps, u0, v0, t_grid, tau_ref=None, scheme="semi-discrete") -> np.ndarray:
    """``||u(t) - v(t)|| / (e^{t/eps} ||u0 - v0||)`` along the reference trajectories."""
    both = ac_reference_batch(g, dec, eps, [u0, v0], t_grid, tau_ref, scheme)
    d0 = vertex_norm(g, np.asarray(u0, float) - np.asarray(v0, float))
    if d0 == 0:
        return np.zeros(len(t_grid))
    dist = np.array([vertex_norm(g, s[0] - s[1]) for s in both])
    return dist / (np.exp(np.asarray(t_grid) / eps) * d0)


def wellposed_bound_check(g, dec, eps, u0, v0, t_grid, tau_ref=None, rel: float = 1e-8,
                          scheme="semi-discrete") -> bool:
    if np.array_equal(np.asarray(u0, float), np.asarray(v0, float)):
        return True
    return bool(np.all(wellposed_ratios(g, dec, eps, u0, v0, t_grid, tau_ref, scheme) <= 1.0 + rel))
