"""Exact heat semigroup through an eigendecomposition of the Laplacian.

The Laplacian is self-adjoint for the ``d**r``-weighted inner product but not
symmetric as a matrix when ``r > 0``.  Conjugating by ``D**(r/2)`` gives the
symmetric matrix ``D**(-r/2) (D - W) D**(-r/2)`` which ``numpy.linalg.eigh``
handles with an orthogonal eigenbasis.  The columns of ``basis`` are then
orthonormal for the weighted inner product, and ``e^{-t Lap}`` is diagonal in
that basis.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import Graph, _check_vertex


@dataclass(frozen=True, eq=False)
class SpectralDecomposition:
    """Eigenpairs of the graph Laplacian.

    Attributes
    ----------
    graph : Graph
    eigenvalues : ndarray
        Ascending, with ``eigenvalues[0] == 0`` exactly.
    basis : ndarray
        Columns are eigenvectors, orthonormal in the weighted inner product.
    """

    graph: Graph
    eigenvalues: np.ndarray
    basis: np.ndarray
    _sym_vectors: np.ndarray
    _half_weights: np.ndarray

    def forward(self, u) -> np.ndarray:
        """Spectral coefficients ``c_k = <u, phi_k>_V``."""
        u = _check_vertex(self.graph, u)
        return self._sym_vectors.T @ (self._half_weights * u)

    def backward(self, c) -> np.ndarray:
        return self.basis @ np.asarray(c, dtype=float)

    def apply_function(self, f, u) -> np.ndarray:
        """``f(Lap) u`` for a vectorised scalar function ``f``."""
        return self.backward(f(self.eigenvalues) * self.forward(u))

    @property
    def norm(self) -> float:
        return float(self.eigenvalues[-1])


class SpectralError(RuntimeError):
    """Eigensolver failure."""


def decompose(g: Graph) -> SpectralDecomposition:
    half = g.vertex_weights ** 0.5
    sym = (np.diag(g.degrees) - g.weights) / np.outer(half, half)
    sym = 0.5 * (sym + sym.T)
    try:
        lam, q = np.linalg.eigh(sym)
    except np.linalg.LinAlgError as exc:
        raise SpectralError(str(exc)) from exc
    if not np.all(np.isfinite(lam)):
        raise SpectralError("non-finite eigenvalues")
    # the kernel is spanned by constants; pin its eigenvalue and vector exactly
    lam = np.clip(lam, 0.0, None)
    lam[0] = 0.0
    const = half / np.linalg.norm(half)
    q = q.copy()
    q[:, 0] = const
    # re-orthogonalise the remaining columns against the exact kernel vector
    q[:, 1:] -= np.outer(const, const @ q[:, 1:])
    q[:, 1:], _ = np.linalg.qr(q[:, 1:])
    basis = q / half[:, None]
    for arr in (lam, q, basis, half):
        arr.setflags(write=False)
    return SpectralDecomposition(g, lam, basis, q, half)


def heat_apply(dec: SpectralDecomposition, t: float, u) -> np.ndarray:
    """``e^{-t Lap} u``."""
    if t < 0:
        raise ValueError(f"diffusion time must be nonnegative, got {t}")
    u = _check_vertex(dec.graph, u)
    if t == 0:
        return u.copy()
    return dec.apply_function(lambda lam: np.exp(-t * lam), u)


def operator_norm(dec: SpectralDecomposition) -> float:
    """Largest eigenvalue of the Laplacian (its norm in the weighted inner product)."""
    return dec.norm


def semigroup_with_drift(dec: SpectralDecomposition, eps: float, t: float, u) -> np.ndarray:
    """``e^{t/eps} e^{-t Lap} u``, the semigroup generated by ``I/eps - Lap``."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    return np.exp(t / eps) * heat_apply(dec, t, u)


def heat_matrix(dec: SpectralDecomposition, t: float) -> np.ndarray:
    """Dense matrix of ``e^{-t Lap}``, for loops that apply the same step many times."""
    if t < 0:
        raise ValueError(f"diffusion time must be nonnegative, got {t}")
    q = dec._sym_vectors
    return dec.basis @ (np.exp(-t * dec.eigenvalues)[:, None] * (q.T * dec._half_weights))


def phi1(z):
    """``(e^z - 1)/z`` with the removable singularity filled in."""
    z = np.asarray(z, dtype=float)
    small = np.abs(z) < 1e-8
    safe = np.where(small, 1.0, z)
    return np.where(small, 1.0 + 0.5 * z, np.expm1(safe) / safe)


def phi2(z):
    """``(e^z - 1 - z)/z**2``; a short series is used near zero to avoid cancellation."""
    z = np.asarray(z, dtype=float)
    small = np.abs(z) < 1e-3
    safe = np.where(small, 1.0, z)
    series = 0.5 + z / 6.0 + z * z / 24.0 + z ** 3 / 120.0
    return np.where(small, series, (np.expm1(safe) - safe) / (safe * safe))
