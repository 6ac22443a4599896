"""Dense complex linear algebra used throughout the package.

Matrices are plain ``numpy`` arrays of dtype ``complex128``.  Every rank
decision goes through one relative cutoff, ``rank_tol * max(1, s_max)``,
where ``s_max`` is the largest singular value (or largest eigenvalue
modulus for Hermitian input).
"""

from dataclasses import dataclass

import numpy as np

from .errors import NonFiniteEntry, NotHermitian, NotPSD, NotSquare, ZeroMatrix


@dataclass(frozen=True)
class ToleranceConfig:
    rank_tol: float = 1e-8
    reconstruction_tol: float = 1e-10
    positivity_tol: float = 1e-10

    def __post_init__(self):
        for name in ("rank_tol", "reconstruction_tol", "positivity_tol"):
            value = getattr(self, name)
            if not 0.0 < value < 1.0:
                raise ValueError(f"{name} must lie in (0, 1), got {value!r}")


DEFAULT_TOL = ToleranceConfig()


@dataclass(frozen=True)
class HermitianSpectrum:
    """Ascending eigenvalues, paired unitary eigenvectors and numerical rank."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    rank: int


def as_matrix(M):
    """Coerce ``M`` to a finite 2-D complex array (a 1-D input is a row)."""
    A = np.array(M, dtype=np.complex128)
    if A.ndim == 1:
        A = A[None, :]
    if A.ndim != 2 or A.shape[0] < 1 or A.shape[1] < 1:
        raise ValueError(f"expected a non-empty matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise NonFiniteEntry("matrix contains NaN or Inf entries")
    return A


def rank_cutoff(scale, tol=DEFAULT_TOL):
    return tol.rank_tol * max(1.0, float(scale))


def _check_hermitian(M, tol):
    if M.shape[0] != M.shape[1]:
        raise NotSquare(f"expected a square matrix, got shape {M.shape}")
    norm = np.linalg.norm(M, 2)
    asym = np.linalg.norm(M - M.conj().T, 2)
    if asym > tol.reconstruction_tol * max(1.0, norm):
        raise NotHermitian(f"asymmetry {asym:.3e} exceeds tolerance")
    return 0.5 * (M + M.conj().T)


def hermitian_eig(M, tol=DEFAULT_TOL):
    """Eigendecomposition of a Hermitian matrix.

    The input is symmetrized before decomposition, so round-off asymmetry
    below ``reconstruction_tol`` never reaches LAPACK.
    """
    H = _check_hermitian(as_matrix(M), tol)
    w, V = np.linalg.eigh(H)
    order = np.argsort(w, kind="stable")
    w, V = w[order], V[:, order]
    scale = np.max(np.abs(w)) if w.size else 0.0
    rank = int(np.count_nonzero(np.abs(w) > rank_cutoff(scale, tol)))
    return HermitianSpectrum(w, V, rank)


def _psd_spectrum(M, tol):
    spec = hermitian_eig(M, tol)
    w = spec.eigenvalues
    scale = max(1.0, float(np.max(np.abs(w))))
    if w[0] < -tol.positivity_tol * scale:
        raise NotPSD(f"smallest eigenvalue {w[0]:.3e} is negative")
    return np.clip(w, 0.0, None), spec


def lambda_minus(M, tol=DEFAULT_TOL):
    """Smallest eigenvalue above the rank cutoff of a Hermitian PSD matrix."""
    w, _ = _psd_spectrum(M, tol)
    nonzero = w[w > rank_cutoff(w[-1], tol)]
    if nonzero.size == 0:
        raise ZeroMatrix("matrix has no nonzero eigenvalue")
    return float(nonzero[0])


def singular_values(M):
    return np.linalg.svd(as_matrix(M), compute_uv=False)


def numerical_rank(M, tol=DEFAULT_TOL):
    s = singular_values(M)
    return int(np.count_nonzero(s > rank_cutoff(s[0], tol)))


def sigma_min_nonzero(M, tol=DEFAULT_TOL):
    """Smallest singular value above the rank cutoff."""
    s = singular_values(M)
    nonzero = s[s > rank_cutoff(s[0], tol)]
    if nonzero.size == 0:
        raise ZeroMatrix("matrix has no nonzero singular value")
    return float(nonzero[-1])


def _svd_split(M, tol):
    U, s, Vh = np.linalg.svd(M, full_matrices=True)
    r = int(np.count_nonzero(s > rank_cutoff(s[0] if s.size else 0.0, tol)))
    return U, s, Vh, r


def pinv(M, tol=DEFAULT_TOL):
    """Moore-Penrose pseudoinverse with sub-threshold singular values zeroed."""
    A = as_matrix(M)
    U, s, Vh, r = _svd_split(A, tol)
    return (Vh[:r].conj().T / s[:r]) @ U[:, :r].conj().T


def projector_image(M, tol=DEFAULT_TOL):
    """Orthogonal projector onto the numerical column space of ``M``."""
    A = as_matrix(M)
    U, _, _, r = _svd_split(A, tol)
    Ur = U[:, :r]
    return Ur @ Ur.conj().T


def projector_kernel(M, tol=DEFAULT_TOL):
    """Orthogonal projector onto the numerical null space of ``M``.

    Equal to ``I - pinv(M) @ M``; built from the null right singular
    vectors so the result is exactly Hermitian.
    """
    A = as_matrix(M)
    _, _, Vh, r = _svd_split(A, tol)
    N = Vh[r:].conj().T
    return N @ N.conj().T


def image_basis(M, tol=DEFAULT_TOL):
    A = as_matrix(M)
    U, _, _, r = _svd_split(A, tol)
    return U[:, :r]


def kernel_basis(M, tol=DEFAULT_TOL):
    A = as_matrix(M)
    _, _, Vh, r = _svd_split(A, tol)
    return Vh[r:].conj().T


def op_norm(M):
    return float(np.linalg.norm(M, 2))


# Stacked (batched) variants used by grid sweeps.  They assume well-formed
# Hermitian stacks and skip per-matrix validation.


def stacked_eigh(G, tol=DEFAULT_TOL):
    """Eigendecomposition of a stack ``(n, m, m)`` of Hermitian matrices.

    Returns ascending eigenvalues ``(n, m)``, eigenvectors ``(n, m, m)`` and
    per-matrix numerical ranks ``(n,)``.
    """
    H = 0.5 * (G + np.conj(np.swapaxes(G, -1, -2)))
    w, V = np.linalg.eigh(H)
    scale = np.maximum(1.0, np.max(np.abs(w), axis=-1))
    ranks = np.count_nonzero(np.abs(w) > tol.rank_tol * scale[:, None], axis=-1)
    return w, V, ranks


def stacked_pinv(G, tol=DEFAULT_TOL):
    U, s, Vh = np.linalg.svd(G)
    cutoff = tol.rank_tol * np.maximum(1.0, s[:, :1])
    keep = s > cutoff
    inv = np.where(keep, 1.0 / np.where(keep, s, 1.0), 0.0)
    return np.conj(np.swapaxes(Vh, -1, -2)) @ (inv[:, :, None] * np.conj(np.swapaxes(U, -1, -2)))
