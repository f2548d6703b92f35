"""Weighted graphs and the discrete vector calculus on them.

Vertex functions are plain 1-d numpy arrays of length ``n``; edge functions
are antisymmetric ``(n, n)`` arrays.  The degree exponent ``r`` selects the
vertex inner product ``<u, v>_V = sum_i u_i v_i d_i**r`` and with it the
Laplacian ``(Lap u)_i = d_i**-r sum_j w_ij (u_i - u_j)``: ``r = 0`` gives the
unnormalised Laplacian ``D - A``, ``r = 1`` the random-walk Laplacian.
"""

from __future__ import annotations

import hashlib
import io
import os
from collections import deque
from dataclasses import dataclass, field

import numpy as np


class GraphError(ValueError):
    """Raised for weight matrices that do not describe a valid graph."""


@dataclass(frozen=True, eq=False)
class Graph:
    """Finite, undirected, weighted, simple and connected graph.

    Parameters
    ----------
    weights : array_like, shape (n, n)
        Symmetric nonnegative weight matrix with zero diagonal.
    r : float
        Degree exponent in ``[0, 1]``.
    """

    weights: np.ndarray
    r: float = 0.0
    degrees: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        w = np.array(self.weights, dtype=float)
        if w.ndim != 2 or w.shape[0] != w.shape[1] or w.shape[0] == 0:
            raise GraphError(f"weights must be a nonempty square matrix, got shape {w.shape}")
        if not np.all(np.isfinite(w)):
            raise GraphError("weights must be finite")
        if np.any(w < 0):
            raise GraphError("weights must be nonnegative")
        if np.any(np.diag(w) != 0):
            raise GraphError("self-loops are not allowed (nonzero diagonal)")
        if not np.array_equal(w, w.T):
            raise GraphError("weights must be symmetric")
        if not 0.0 <= self.r <= 1.0:
            raise GraphError(f"degree exponent r must lie in [0, 1], got {self.r}")
        d = w.sum(axis=1)
        if np.any(d <= 0):
            raise GraphError(f"isolated vertices: {np.flatnonzero(d <= 0).tolist()}")
        if not _is_connected(w):
            raise GraphError("graph is not connected")
        w.setflags(write=False)
        d.setflags(write=False)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "r", float(self.r))
        object.__setattr__(self, "degrees", d)

    @property
    def n_vertices(self) -> int:
        return self.weights.shape[0]

    @property
    def vertex_weights(self) -> np.ndarray:
        """``d_i**r``, the measure of the vertex inner product."""
        return self.degrees ** self.r

    @property
    def adjacency(self) -> np.ndarray:
        return self.weights > 0

    def laplacian_matrix(self) -> np.ndarray:
        """Dense matrix of the Laplacian (not symmetric unless ``r = 0``)."""
        lap = np.diag(self.degrees) - self.weights
        return lap / self.vertex_weights[:, None]

    def edges(self):
        """Yield ``(i, j, w)`` for ``i < j`` with ``w > 0``."""
        iu, ju = np.nonzero(np.triu(self.weights))
        for i, j in zip(iu, ju):
            yield int(i), int(j), float(self.weights[i, j])

    def with_r(self, r: float) -> "Graph":
        return Graph(self.weights, r)

    def fingerprint(self) -> str:
        """Stable hash of the weights and ``r``, used for provenance records."""
        h = hashlib.sha256()
        h.update(np.ascontiguousarray(self.weights, dtype="<f8").tobytes())
        h.update(repr(self.r).encode())
        return h.hexdigest()[:16]

    def __repr__(self):
        return f"Graph(n_vertices={self.n_vertices}, n_edges={sum(1 for _ in self.edges())}, r={self.r})"


def _is_connected(w: np.ndarray) -> bool:
    n = w.shape[0]
    adj = w > 0
    seen = np.zeros(n, dtype=bool)
    seen[0] = True
    queue = deque([0])
    while queue:
        i = queue.popleft()
        for j in np.flatnonzero(adj[i] & ~seen):
            seen[j] = True
            queue.append(j)
    return bool(seen.all())


def _check_vertex(g: Graph, u) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    if u.shape != (g.n_vertices,):
        raise ValueError(f"vertex function must have shape ({g.n_vertices},), got {u.shape}")
    return u


def _check_edge(g: Graph, phi) -> np.ndarray:
    phi = np.asarray(phi, dtype=float)
    n = g.n_vertices
    if phi.shape != (n, n):
        raise ValueError(f"edge function must have shape ({n}, {n}), got {phi.shape}")
    return phi


# ---------------------------------------------------------------------------
# calculus
# ---------------------------------------------------------------------------

def degree(g: Graph, i: int) -> float:
    if not 0 <= i < g.n_vertices:
        raise IndexError(f"vertex {i} out of range for {g.n_vertices} vertices")
    return float(g.degrees[i])


def vertex_inner(g: Graph, u, v) -> float:
    u = _check_vertex(g, u)
    v = _check_vertex(g, v)
    return float(np.sum(u * v * g.vertex_weights))


def vertex_norm(g: Graph, u) -> float:
    return float(np.sqrt(max(vertex_inner(g, u, u), 0.0)))


def edge_inner(g: Graph, phi, psi) -> float:
    phi = _check_edge(g, phi)
    psi = _check_edge(g, psi)
    return float(0.5 * np.sum(phi * psi * g.weights))


def gradient(g: Graph, u) -> np.ndarray:
    """``(grad u)_ij = u_j - u_i`` on edges, zero elsewhere."""
    u = _check_vertex(g, u)
    diff = u[None, :] - u[:, None]
    return np.where(g.adjacency, diff, 0.0)


def laplacian(g: Graph, u) -> np.ndarray:
    u = _check_vertex(g, u)
    return (g.degrees * u - g.weights @ u) / g.vertex_weights


def dirichlet_energy(g: Graph, u) -> float:
    """``0.5 * ||grad u||_E**2``, the first term of Ginzburg-Landau."""
    u = _check_vertex(g, u)
    diff = u[None, :] - u[:, None]
    return float(0.25 * np.sum(g.weights * diff * diff))


def total_variation(g: Graph, u) -> float:
    u = _check_vertex(g, u)
    return float(0.5 * np.sum(g.weights * np.abs(u[None, :] - u[:, None])))


def sup_norm(u) -> float:
    u = np.asarray(u, dtype=float)
    return float(np.max(np.abs(u))) if u.size else 0.0


def indicator(n: int, members) -> np.ndarray:
    """Characteristic function of a vertex set given as indices or a boolean mask."""
    members = np.asarray(members)
    chi = np.zeros(n)
    if members.dtype == bool:
        if members.shape != (n,):
            raise ValueError("boolean membership mask has the wrong length")
        chi[members] = 1.0
    else:
        chi[members.astype(int)] = 1.0
    return chi


def cut_weight(g: Graph, members) -> float:
    """Total weight of edges leaving the vertex set."""
    mask = indicator(g.n_vertices, members).astype(bool)
    return float(g.weights[np.ix_(mask, ~mask)].sum())


# ---------------------------------------------------------------------------
# generators
# ---------------------------------------------------------------------------

def from_edges(n: int, edges, r: float = 0.0) -> Graph:
    """Build a graph from ``(i, j, w)`` triples; duplicates are rejected."""
    w = np.zeros((n, n))
    for i, j, wij in edges:
        i, j, wij = int(i), int(j), float(wij)
        if not (0 <= i < n and 0 <= j < n):
            raise GraphError(f"edge ({i}, {j}) out of range for {n} vertices")
        if i == j:
            raise GraphError(f"self-loop at vertex {i}")
        if not wij > 0:
            raise GraphError(f"edge ({i}, {j}) has non-positive weight {wij}")
        if w[i, j] != 0:
            raise GraphError(f"duplicate edge ({i}, {j})")
        w[i, j] = w[j, i] = wij
    return Graph(w, r)


def path_graph(n: int, weight: float = 1.0, r: float = 0.0) -> Graph:
    if n < 2:
        raise GraphError("a path needs at least 2 vertices")
    return from_edges(n, [(i, i + 1, weight) for i in range(n - 1)], r)


def cycle_graph(n: int, weight: float = 1.0, r: float = 0.0) -> Graph:
    if n < 3:
        raise GraphError("a cycle needs at least 3 vertices")
    return from_edges(n, [(i, (i + 1) % n, weight) for i in range(n)], r)


def complete_graph(n: int, weight: float = 1.0, r: float = 0.0) -> Graph:
    if n < 2:
        raise GraphError("a complete graph needs at least 2 vertices")
    w = np.full((n, n), float(weight))
    np.fill_diagonal(w, 0.0)
    return Graph(w, r)


def star_graph(n: int, weight: float = 1.0, r: float = 0.0) -> Graph:
    """Vertex 0 is the centre, vertices ``1..n-1`` the leaves."""
    if n < 2:
        raise GraphError("a star needs at least 2 vertices")
    return from_edges(n, [(0, i, weight) for i in range(1, n)], r)


def two_cluster_graph(n: int, inter: float = 0.05, weight: float = 1.0, r: float = 0.0) -> Graph:
    """Two complete clusters of sizes ``ceil(n/2)``, ``floor(n/2)``; every cross pair has weight ``inter``."""
    if n < 2:
        raise GraphError("two clusters need at least 2 vertices")
    if not inter > 0:
        raise GraphError("inter-cluster weight must be positive")
    half = (n + 1) // 2
    label = np.arange(n) >= half
    w = np.where(label[:, None] == label[None, :], float(weight), float(inter))
    np.fill_diagonal(w, 0.0)
    return Graph(w, r)


def random_graph(n: int, p: float = 0.4, seed=None, r: float = 0.0,
                 weight_range=(0.2, 2.0), max_tries: int = 1000) -> Graph:
    """Erdos-Renyi graph with uniform random weights, resampled until connected."""
    if n < 2:
        raise GraphError("need at least 2 vertices")
    rng = np.random.default_rng(seed)
    lo, hi = weight_range
    for _ in range(max_tries):
        mask = np.triu(rng.random((n, n)) < p, k=1)
        w = np.where(mask, rng.uniform(lo, hi, size=(n, n)), 0.0)
        w = w + w.T
        if np.all(w.sum(axis=1) > 0) and _is_connected(w):
            return Graph(w, r)
    raise GraphError(f"no connected sample after {max_tries} tries (n={n}, p={p})")


GENERATORS = {
    "path": path_graph,
    "cycle": cycle_graph,
    "complete": complete_graph,
    "star": star_graph,
    "two-cluster": two_cluster_graph,
    "random": random_graph,
}


# ---------------------------------------------------------------------------
# edge-list format: "i j w" per line, 0-based, '#' starts a comment
# ---------------------------------------------------------------------------

def parse_edge_list(text: str, r: float = 0.0, n_vertices: int | None = None) -> Graph:
    edges = []
    seen = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 3:
            raise GraphError(f"line {lineno}: expected 'i j w', got {raw!r}")
        try:
            i, j, w = int(parts[0]), int(parts[1]), float(parts[2])
        except ValueError as exc:
            raise GraphError(f"line {lineno}: {exc}") from None
        key = (min(i, j), max(i, j))
        if key in seen:
            raise GraphError(f"line {lineno}: duplicate edge {key}")
        seen.add(key)
        edges.append((i, j, w))
    if not edges:
        raise GraphError("edge list is empty")
    n = max(max(i, j) for i, j, _ in edges) + 1
    if n_vertices is not None:
        if n_vertices < n:
            raise GraphError(f"edge list mentions vertex {n - 1} but n_vertices={n_vertices}")
        n = n_vertices
    return from_edges(n, edges, r)


def read_edge_list(path, r: float = 0.0) -> Graph:
    with open(os.fspath(path)) as fh:
        return parse_edge_list(fh.read(), r=r)


def format_edge_list(g: Graph, header: str | None = None) -> str:
    buf = io.StringIO()
    if header:
        for line in header.splitlines():
            buf.write(f"# {line}\n")
    for i, j, w in g.edges():
        buf.write(f"{i} {j} {w!r}\n")
    return buf.getvalue()


def write_edge_list(g: Graph, path, header: str | None = None) -> None:
    with open(os.fspath(path), "w") as fh:
        fh.write(format_edge_list(g, header))
