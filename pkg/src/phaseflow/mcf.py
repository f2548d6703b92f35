"""Mean curvature flow on graphs: two set-minimisation schemes and a curvature ODE.

The set schemes minimise ``TV(chi_S') + penalty(S', S)`` over all subsets by
exhaustive enumeration, which is exact but limited to small graphs.
"""

from __future__ import annotations

import math
import warnings
from collections import deque

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra

from .graph import Graph, _check_vertex, gradient, indicator, total_variation
from .spectral import SpectralDecomposition, heat_matrix
from .trajectory import Trajectory

EXHAUSTIVE_LIMIT = 20
_CHUNK = 1 << 15
_TIE_RTOL = 1e-12


def as_mask(n: int, S) -> np.ndarray:
    """Boolean membership vector from indices, a mask or an indicator."""
    S = np.asarray(S)
    if S.dtype == bool:
        if S.shape != (n,):
            raise ValueError("membership mask has the wrong length")
        return S.copy()
    if S.shape == (n,) and S.dtype.kind == "f" and np.all((S == 0) | (S == 1)):
        return S.astype(bool)
    return indicator(n, S).astype(bool)


def boundary_set(g: Graph, S) -> np.ndarray:
    """Vertices with at least one neighbour on the other side of ``S``."""
    m = as_mask(g.n_vertices, S)
    cut = g.adjacency & (m[:, None] != m[None, :])
    return cut.any(axis=1)


def graph_distance_to(g: Graph, sigma, weighted: bool = False) -> np.ndarray:
    """Shortest-path distance from each vertex to the set ``sigma``.

    Hop counts by default; with ``weighted=True`` an edge of weight ``w`` has
    length ``1/w``.  The distance to an empty set is ``inf``.
    """
    n = g.n_vertices
    m = as_mask(n, sigma)
    if not m.any():
        return np.full(n, math.inf)
    if weighted:
        lengths = np.where(g.adjacency, 1.0 / np.where(g.adjacency, g.weights, 1.0), 0.0)
        dist = dijkstra(csr_matrix(lengths), directed=False, indices=np.flatnonzero(m))
        return dist.min(axis=0)
    dist = np.full(n, math.inf)
    queue = deque(np.flatnonzero(m).tolist())
    dist[m] = 0.0
    while queue:
        i = queue.popleft()
        for j in np.flatnonzero(g.adjacency[i]):
            if dist[j] == math.inf:
                dist[j] = dist[i] + 1.0
                queue.append(j)
    return dist


def augment_complete(g: Graph, eps: float) -> Graph:
    """Complete graph keeping the weights of ``g`` and giving every non-edge weight ``eps``."""
    if eps < 0:
        raise ValueError("augmentation weight must be nonnegative")
    if eps == 0:
        warnings.warn("augmentation weight 0 leaves the graph unchanged", stacklevel=2)
        return g
    w = np.where(g.adjacency, g.weights, eps)
    np.fill_diagonal(w, 0.0)
    return Graph(w, g.r)


# ---------------------------------------------------------------------------
# exhaustive subset search
# ---------------------------------------------------------------------------

def _subset_block(n: int, start: int, stop: int) -> np.ndarray:
    idx = np.arange(start, stop, dtype=np.int64)
    return ((idx[:, None] >> np.arange(n)) & 1).astype(float)


def _lex_key(row: np.ndarray) -> tuple:
    return tuple(int(x) for x in row)


def subset_argmin(n: int, objective, current: np.ndarray, limit: int = EXHAUSTIVE_LIMIT) -> np.ndarray:
    """Minimise ``objective`` over all ``2**n`` membership vectors.

    ``objective`` maps an ``(m, n)`` 0/1 float array to ``m`` values.  Ties
    (relative ``1e-12``) go to the smallest symmetric difference from
    ``current``, then to the lexicographically smallest membership vector.
    """
    if n > limit:
        raise ValueError(f"exhaustive search limited to {limit} vertices, got {n}")
    cur = current.astype(float)
    best_val = math.inf
    cands = []
    for start in range(0, 1 << n, _CHUNK):
        X = _subset_block(n, start, min(1 << n, start + _CHUNK))
        vals = objective(X)
        lo = float(vals.min())
        tol = _TIE_RTOL * max(1.0, abs(lo), abs(best_val) if best_val < math.inf else 0.0)
        if lo < best_val - tol:
            best_val = lo
            cands = []
        if lo <= best_val + tol:
            best_val = min(best_val, lo)
            cands.extend(X[vals <= best_val + tol])
    tol = _TIE_RTOL * max(1.0, abs(best_val))
    cands = [c for c in cands if objective(c[None, :])[0] <= best_val + tol]
    cands.sort(key=lambda c: (int(np.sum(c != cur)), _lex_key(c)))
    return cands[0].astype(bool)


def _binary_tv(g: Graph, X: np.ndarray) -> np.ndarray:
    # TV of an indicator equals chi^T (D - W) chi, the cut weight
    return np.einsum("ij,ij->i", X @ (np.diag(g.degrees) - g.weights), X)


def vggob_objective(g: Graph, S, dt: float, weighted_distance: bool = False):
    """Vectorised objective of the distance-weighted scheme, for reuse in tests."""
    cur = as_mask(g.n_vertices, S).astype(float)
    dist = graph_distance_to(g, boundary_set(g, cur), weighted=weighted_distance)
    pen = np.where(np.isinf(dist), 0.0, dist) * g.vertex_weights / dt

    def objective(X):
        D = X - cur
        return _binary_tv(g, X) + (D * D) @ pen

    return objective


def vggob_mcf_step(g: Graph, S, dt: float, weighted_distance: bool = False,
                   limit: int = EXHAUSTIVE_LIMIT) -> np.ndarray:
    """One step of the scheme penalising moves by their distance to the current boundary.

    A set without boundary (empty or everything) is returned unchanged.
    """
    cur = as_mask(g.n_vertices, S)
    if not boundary_set(g, cur).any():
        return cur
    return subset_argmin(g.n_vertices, vggob_objective(g, cur, dt, weighted_distance), cur, limit)


def new_mcf_objective(g: Graph, dec: SpectralDecomposition, S, tau: float):
    cur = as_mask(g.n_vertices, S).astype(float)
    quad = g.vertex_weights[:, None] * heat_matrix(dec, tau)
    quad = 0.5 * (quad + quad.T)

    def objective(X):
        D = X - cur
        return _binary_tv(g, X) + np.einsum("ij,ij->i", D @ quad, D) / tau

    return objective


def new_mcf_step(g: Graph, dec: SpectralDecomposition, S, tau: float,
                 limit: int = EXHAUSTIVE_LIMIT) -> np.ndarray:
    """Minimise ``TV(chi_S') + ||e^{-tau Lap/2}(chi_S' - chi_S)||_V^2 / tau``."""
    cur = as_mask(g.n_vertices, S)
    return subset_argmin(g.n_vertices, new_mcf_objective(g, dec, cur, tau), cur, limit)


def set_run(step, S0, n_steps: int) -> list:
    """Iterate a set map, stopping when the set repeats its predecessor."""
    sets = [np.asarray(S0, dtype=bool)]
    for _ in range(n_steps):
        nxt = step(sets[-1])
        if np.array_equal(nxt, sets[-1]):
            break
        sets.append(nxt)
    return sets


def mbo_residual_ratio(g: Graph, dec: SpectralDecomposition, S, tau: float) -> float:
    """``|J(chi_S) - tau TV(chi_S)| / tau``, the gap between the MBO energy and TV."""
    from .functionals import mbo_lyapunov_J

    chi = as_mask(g.n_vertices, S).astype(float)
    return abs(mbo_lyapunov_J(g, dec, tau, chi) - tau * total_variation(g, chi)) / tau


# ---------------------------------------------------------------------------
# curvature ODE
# ---------------------------------------------------------------------------

def curvature_K(g: Graph, u) -> np.ndarray:
    """``K_i = sum_j (w_ij / d_i) sgn(u_j - u_i)`` with ``sgn(0) = 0``."""
    return np.sum(g.weights * np.sign(gradient(g, u)), axis=1) / g.degrees


def _wind_norms(g: Graph, u, p: float):
    grad = gradient(g, u)
    plus = np.maximum(grad, 0.0)
    minus = np.maximum(-grad, 0.0)
    if math.isinf(p):
        return np.max(g.weights * plus, axis=1), np.max(g.weights * minus, axis=1)
    if p < 1:
        raise ValueError("p must be at least 1")
    return (np.sum(g.weights * plus ** p, axis=1) ** (1.0 / p),
            np.sum(g.weights * minus ** p, axis=1) ** (1.0 / p))


def updownwind_norms(g: Graph, u, i: int, p: float) -> tuple[float, float]:
    """Upwind and downwind ``p``-norms of the gradient at vertex ``i``."""
    u = _check_vertex(g, u)
    plus, minus = _wind_norms(g, u, p)
    return float(plus[i]), float(minus[i])


def elmo_velocity(g: Graph, u, p: float) -> np.ndarray:
    K = curvature_K(g, u)
    plus, minus = _wind_norms(g, u, p)
    return np.maximum(K, 0.0) * plus - np.maximum(-K, 0.0) * minus


def crossing_time(g: Graph, u, vel) -> float:
    """Time until the first pair of neighbours would swap order under constant velocity."""
    du = u[None, :] - u[:, None]
    dv = vel[None, :] - vel[:, None]
    closing = g.adjacency & (du * dv < 0)
    if not closing.any():
        return math.inf
    return float(np.min(-du[closing] / dv[closing]))


def elmo_mcf_flow(g: Graph, u0, p: float, dt: float, n_steps: int, adaptive: bool = True) -> Trajectory:
    """Explicit Euler for the curvature ODE.

    With ``adaptive`` each step is shortened to half the neighbour crossing
    time when that is smaller than ``dt``; the steps used are stored in
    ``meta["dt_used"]`` and their maximum in ``meta["dt_max"]``.
    """
    u = _check_vertex(g, u0).copy()
    states, times, used = [u], [0.0], []
    t = 0.0
    for _ in range(n_steps):
        vel = elmo_velocity(g, u, p)
        h = dt
        if adaptive:
            h = min(dt, 0.5 * crossing_time(g, u, vel))
        if not h > 0 or t + h == t:
            break
        u = u + h * vel
        t += h
        used.append(h)
        states.append(u)
        times.append(t)
    states = np.array(states)
    return Trajectory(times, states, np.full_like(states, np.nan), "elmo-mcf",
                      meta={"p": p, "dt": dt, "dt_used": used,
                            "dt_max": max(used) if used else 0.0})


def tv_first_variation_check(g: Graph, u, n_directions: int = 8, h: float = 1e-7, seed=0) -> float:
    """Largest mismatch between ``<-K(u), v>_V`` and a centred difference of TV along ``v``.

    Needs ``r = 1`` and no two neighbours with equal values.
    """
    if g.r != 1.0:
        raise ValueError("the curvature is the TV first variation only for r = 1")
    u = _check_vertex(g, u)
    gap = np.abs(gradient(g, u))[g.adjacency]
    if gap.size and gap.min() == 0:
        raise ValueError("neighbouring values must differ")
    rng = np.random.default_rng(seed)
    K = curvature_K(g, u)
    worst = 0.0
    for _ in range(n_directions):
        v = rng.standard_normal(g.n_vertices)
        fd = (total_variation(g, u + h * v) - total_variation(g, u - h * v)) / (2 * h)
        ana = -float(np.sum(K * v * g.vertex_weights))
        worst = max(worst, abs(ana - fd))
    return worst
