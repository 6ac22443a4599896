"""Subspaces of C^n and the Friedrichs angle between them."""

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch
from .linalg import DEFAULT_TOL, as_matrix, image_basis, kernel_basis


@dataclass(frozen=True, eq=False)
class Subspace:
    """Subspace of ``C^n`` stored as an ``n x k`` matrix with orthonormal columns."""

    ambient_dim: int
    basis: np.ndarray

    def __post_init__(self):
        B = np.asarray(self.basis, dtype=np.complex128).reshape(self.ambient_dim, -1)
        if B.shape[1] > self.ambient_dim:
            raise ValueError("more basis vectors than the ambient dimension")
        object.__setattr__(self, "basis", B)

    @classmethod
    def trivial(cls, n):
        return cls(n, np.zeros((n, 0), dtype=np.complex128))

    @classmethod
    def full(cls, n):
        return cls(n, np.eye(n, dtype=np.complex128))

    @classmethod
    def span(cls, vectors, tol=DEFAULT_TOL):
        """Subspace spanned by the columns of ``vectors``."""
        V = as_matrix(vectors)
        return from_image(V, tol)

    @property
    def dim(self):
        return self.basis.shape[1]

    def projector(self):
        return self.basis @ self.basis.conj().T

    def complement(self, tol=DEFAULT_TOL):
        if self.dim == 0:
            return Subspace.full(self.ambient_dim)
        return Subspace(self.ambient_dim, kernel_basis(self.basis.conj().T, tol))


def from_image(M, tol=DEFAULT_TOL):
    A = as_matrix(M)
    return Subspace(A.shape[0], image_basis(A, tol))


def from_kernel(M, tol=DEFAULT_TOL):
    A = as_matrix(M)
    return Subspace(A.shape[1], kernel_basis(A, tol))


def _same_ambient(U, V):
    if U.ambient_dim != V.ambient_dim:
        raise DimensionMismatch(f"ambient dimensions {U.ambient_dim} and {V.ambient_dim} differ")


def intersect(U, V, tol=DEFAULT_TOL):
    """``U ∩ V`` from principal vectors whose cosine is within ``rank_tol`` of 1."""
    _same_ambient(U, V)
    n = U.ambient_dim
    if U.dim == 0 or V.dim == 0:
        return Subspace.trivial(n)
    Y, s, _ = np.linalg.svd(U.basis.conj().T @ V.basis)
    hit = int(np.count_nonzero(s >= 1.0 - tol.rank_tol))
    if hit == 0:
        return Subspace.trivial(n)
    Q, _ = np.linalg.qr(U.basis @ Y[:, :hit])
    return Subspace(n, Q)


def _strip(U, W):
    """``U ∩ W^⊥`` for ``W ⊆ U``."""
    if W.dim == 0:
        return U
    R = U.basis - W.basis @ (W.basis.conj().T @ U.basis)
    Q, s, _ = np.linalg.svd(R, full_matrices=False)
    return Subspace(U.ambient_dim, Q[:, : U.dim - W.dim])


def _reduced_pair(M, N, tol):
    """The restricted pair ``(M', N')``, or ``None`` under a zero-cosine convention."""
    _same_ambient(M, N)
    if M.dim == 0 or N.dim == 0:
        return None
    W = intersect(M, N, tol)
    if W.dim >= M.dim or W.dim >= N.dim:
        return None
    return _strip(M, W), _strip(N, W)


def friedrichs_cos(M, N, tol=DEFAULT_TOL):
    pair = _reduced_pair(M, N, tol)
    if pair is None:
        return 0.0
    Mr, Nr = pair
    s = np.linalg.svd(Mr.basis.conj().T @ Nr.basis, compute_uv=False)
    return float(np.clip(s[0], 0.0, 1.0))


def friedrichs_sin(M, N, tol=DEFAULT_TOL):
    """Sine of the Friedrichs angle, ``sqrt(1 - cos^2)``.

    Computed as the smallest singular value of ``(I - P_N') M'`` which equals
    ``sqrt(1 - cos^2)`` but keeps full relative accuracy for small angles.
    """
    pair = _reduced_pair(M, N, tol)
    if pair is None:
        return 1.0
    Mr, Nr = pair
    R = Mr.basis - Nr.basis @ (Nr.basis.conj().T @ Mr.basis)
    s = np.linalg.svd(R, compute_uv=False)
    return float(np.clip(s[Mr.dim - 1], 0.0, 1.0))
