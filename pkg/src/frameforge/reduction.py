"""When does ``Psi = A Phi`` stay a set of frame generators?

Two independent certificates are provided.  The geometric one checks that
``A`` keeps every fiber rank (membership in R) and that the Friedrichs sine
between ``Ker(A)`` and ``Im(G(omega))`` stays away from zero.  The analytic
one bounds ``||(I - A^+ A) G G^+||`` away from one.  On the same grid both
must agree; disagreement is reported, never hidden.
"""

from dataclasses import dataclass, field as dc_field
import logging

import numpy as np

from .classify import FRAME, FRAME_VERDICTS, ONB, RIESZ, classify
from .errors import BadShape, NotAFrame, RankDrop, UnsupportedInputClass, ZeroMatrix
from .linalg import (
    DEFAULT_TOL,
    as_matrix,
    hermitian_eig,
    kernel_basis,
    lambda_minus,
    numerical_rank,
    op_norm,
    pinv,
    sigma_min_nonzero,
)
from .subspace import Subspace, friedrichs_sin, from_image, from_kernel
from .sweep import grid_data, map_chunks, map_ordered, refine_extremum
from .torus import conjugate, reduce_point

log = logging.getLogger(__name__)

DELTA_MIN = 1e-4
GAMMA_MARGIN = 1e-6
PINV_COND_LIMIT = 1e8

ACCEPT, REJECT = "accept", "reject"


def _omega(w):
    return [float(x) for x in np.atleast_1d(reduce_point(np.asarray(w, dtype=float)))]


@dataclass
class ReductionCertificate:
    in_R: bool
    in_R_witness: list = None
    delta_hat: float = None
    gamma_hat: float = None
    geometric_verdict: str = None
    analytic_verdict: str = None
    argmin_omega: list = None
    argmax_omega: list = None
    derived_bounds: dict = None
    grid_resolution: int = None
    reasons: list = dc_field(default_factory=list)
    rank_paths_agree: bool = True

    @property
    def verdicts(self):
        return [v for v in (self.geometric_verdict, self.analytic_verdict) if v is not None]

    @property
    def accepted(self):
        return bool(self.verdicts) and all(v == ACCEPT for v in self.verdicts)

    @property
    def methods_agree(self):
        if self.geometric_verdict is None or self.analytic_verdict is None:
            return None
        return self.geometric_verdict == self.analytic_verdict

    def merge(self, other):
        """Combine a geometric and an analytic certificate computed on the same grid."""
        out = ReductionCertificate(**{k: getattr(self, k) for k in self.__dataclass_fields__})
        for name in ("delta_hat", "gamma_hat", "geometric_verdict", "analytic_verdict",
                     "argmin_omega", "argmax_omega", "derived_bounds"):
            if getattr(out, name) is None:
                setattr(out, name, getattr(other, name))
        out.reasons = list(self.reasons) + [r for r in other.reasons if r not in self.reasons]
        return out

    def to_dict(self):
        return {
            "inR": self.in_R,
            "inRWitness": self.in_R_witness,
            "deltaHat": self.delta_hat,
            "gammaHat": self.gamma_hat,
            "geometricVerdict": self.geometric_verdict,
            "analyticVerdict": self.analytic_verdict,
            "methodsAgree": self.methods_agree,
            "argminOmega": self.argmin_omega,
            "argmaxOmega": self.argmax_omega,
            "derivedBounds": self.derived_bounds,
            "grid": self.grid_resolution,
            "rankPathsAgree": self.rank_paths_agree,
            "reasons": self.reasons,
        }


@dataclass
class GenericityReport:
    trials: int
    in_R_count: int
    frame_preserving_count: int
    seed: int

    def to_dict(self):
        return {
            "trials": self.trials,
            "inRCount": self.in_R_count,
            "framePreservingCount": self.frame_preserving_count,
            "seed": self.seed,
        }


# --- per-point kernels ---------------------------------------------------------


def _check_shape(A, field, grid, tol):
    A = as_matrix(A)
    m = field.size
    if A.shape[1] != m:
        raise BadShape(f"A has {A.shape[1]} columns, the field has {m} generators")
    length = int(grid_data(field, grid, tol).ranks.max())
    if not length <= A.shape[0] <= m:
        raise BadShape(f"A has {A.shape[0]} rows; need length {length} <= rows <= {m}")
    return A


def _top_vectors(V, ranks, idx, r):
    m = V.shape[-1]
    return V[idx][:, :, m - r:]


def _largest_sv(C):
    if 1 in C.shape[1:]:
        return np.linalg.norm(C.reshape(C.shape[0], -1), axis=1)
    return np.linalg.svd(C, compute_uv=False)[:, 0]


def _sines_and_hits(K, data, tol, sl=slice(None)):
    """Friedrichs sine of ``(Ker A, Im G)`` and intersection flags on a grid slice."""
    ranks = data.ranks[sl]
    V = data.eigenvectors[sl]
    n, m = ranks.shape[0], V.shape[-1]
    k = K.shape[1]
    sines = np.ones(n)
    hits = np.zeros(n, dtype=bool)
    if k == 0:
        return sines, hits
    for r in np.unique(ranks):
        r = int(r)
        if r == 0:
            continue
        idx = np.flatnonzero(ranks == r)
        U = _top_vectors(V, ranks, idx, r)
        C = K.conj().T[None] @ U
        R = K[None] - U @ np.conj(np.swapaxes(C, -1, -2))
        cos = _largest_sv(C)
        hit = cos >= 1.0 - tol.rank_tol
        s = np.linalg.norm(R[:, :, 0], axis=1) if k == 1 else np.linalg.svd(R, compute_uv=False)[:, k - 1]
        sines[idx] = np.clip(s, 0.0, 1.0)
        hits[idx] = hit
        for j in idx[hit]:
            # intersection present: restrict both subspaces per the definition
            sines[j] = friedrichs_sin(Subspace(m, K), Subspace(m, _top_vectors(V, ranks, [j], r)[0]), tol)
    return sines, hits


def _conjugated_ranks(A, data, tol, sl=slice(None)):
    # membership in R is invariant under scaling A; normalizing keeps the
    # absolute rank floor from flagging small matrices
    norm = op_norm(A)
    if norm > 0:
        A = A / norm
    G = data.gramians[sl]
    H = A[None] @ G @ A.conj().T[None]
    H = 0.5 * (H + np.conj(np.swapaxes(H, -1, -2)))
    w = np.linalg.eigvalsh(H)
    scale = np.maximum(1.0, np.abs(w).max(axis=1))
    return np.count_nonzero(np.abs(w) > tol.rank_tol * scale[:, None], axis=1)


def _membership(A, field, grid, tol):
    data = grid_data(field, grid, tol)
    K = kernel_basis(A, tol)

    def work(sl):
        sines, hits = _sines_and_hits(K, data, tol, sl)
        return sines, hits, _conjugated_ranks(A, data, tol, sl)

    sines, hits, conj_ranks = map_chunks(work, data.size)
    drop = conj_ranks != data.ranks
    agree = bool(np.array_equal(drop, hits))
    if not agree:
        log.warning("rank-equality and intersection tests disagree at %d grid points",
                    int(np.count_nonzero(drop != hits)))
    bad = np.flatnonzero(drop | hits)
    witness = _omega(data.points[bad[0]]) if bad.size else None
    return data, K, sines, bad.size == 0, witness, agree


def in_R(A, field, grid, tol=DEFAULT_TOL):
    """Whether ``A`` keeps every fiber rank on the grid, with the first failing point.

    Both the rank equality ``rk(A G A^*) = rk(G)`` and the trivial
    intersection ``Ker(A) ∩ Im(G) = {0}`` are checked; a point failing either
    counts as a failure.
    """
    A = _check_shape(A, field, grid, tol)
    _, _, _, ok, witness, _ = _membership(A, field, grid, tol)
    return ok, witness


def angle_profile(A, field, grid, tol=DEFAULT_TOL):
    """Yield ``(omega, sine)`` over the grid in lexicographic order."""
    A = _check_shape(A, field, grid, tol)
    data, _, sines, _, _, _ = _membership(A, field, grid, tol)
    for w, s in zip(data.points, sines):
        yield tuple(float(x) for x in w), float(s)


def _require_frame(field, grid, tol):
    report = classify(field, grid, tol)
    if not report.is_frame:
        raise NotAFrame(f"E(Phi) classifies as {report.verdict}; a frame is required")
    return report


def _gramian_at(field, w):
    G = field.evaluate(np.asarray(w, dtype=float)[None, :])[0]
    return 0.5 * (G + G.conj().T)


def _top_image(G, r):
    _, V = np.linalg.eigh(G)
    return V[:, V.shape[1] - r:]


def _sine_objective(field, K, r):
    # generic branch: image of fixed rank r, no intersection handling, so the
    # objective is continuous inside a smooth cell
    def f(w):
        if r == 0 or K.shape[1] == 0:
            return 1.0
        U = _top_image(_gramian_at(field, w), r)
        R = K - U @ (U.conj().T @ K)
        return float(np.linalg.svd(R, compute_uv=False)[K.shape[1] - 1])
    return f


def _gamma_objective(field, Q, r):
    def f(w):
        if r == 0:
            return 0.0
        U = _top_image(_gramian_at(field, w), r)
        return op_norm(Q @ U)
    return f


def check_sandwich(A, G, tol=DEFAULT_TOL):
    """``(lower, mid, upper)`` of the eigenvalue sandwich for ``A G A^*``.

    lower = sigma(A)^2 lambda_-(G) F^2, mid = lambda_-(A G A^*),
    upper = ||A||^2 ||G|| F, with F the Friedrichs sine of (Ker A, Im G).
    """
    A, G = as_matrix(A), as_matrix(G)
    lam_g = lambda_minus(G, tol)  # raises NotPSD / ZeroMatrix
    H = A @ G @ A.conj().T
    r_g, r_h = hermitian_eig(G, tol).rank, hermitian_eig(0.5 * (H + H.conj().T), tol).rank
    if r_g != r_h:
        raise RankDrop(f"rank(A G A*) = {r_h} differs from rank(G) = {r_g}")
    F = friedrichs_sin(from_kernel(A, tol), from_image(G, tol), tol)
    lower = sigma_min_nonzero(A, tol) ** 2 * lam_g * F ** 2
    mid = lambda_minus(0.5 * (H + H.conj().T), tol)
    upper = op_norm(A) ** 2 * op_norm(G) * F
    return float(lower), float(mid), float(upper)


def certify_geometric(A, field, grid, tol=DEFAULT_TOL, delta_min=DELTA_MIN, refine=True,
                      early_exit=False):
    """Membership in R plus a uniform lower bound on the Friedrichs sine.

    ``early_exit`` stops refining once the sine falls below ``delta_min``; the
    verdict is unchanged but ``delta_hat`` is then only an upper estimate.
    """
    _require_frame(field, grid, tol)
    A = _check_shape(A, field, grid, tol)
    data, K, sines, ok, witness, agree = _membership(A, field, grid, tol)
    cert = ReductionCertificate(in_R=ok, in_R_witness=witness, grid_resolution=grid.points_per_axis,
                                rank_paths_agree=agree)
    i_min = int(np.argmin(sines))
    delta, at = float(sines[i_min]), _omega(data.points[i_min])
    if ok and refine:
        delta, at = refine_extremum(
            lambda i: _sine_objective(field, K, int(data.ranks[i])),
            field, grid, data.points, sines, stop_at=delta_min if early_exit else None,
        )
        at = _omega(at)
    cert.delta_hat, cert.argmin_omega = delta, at
    try:
        lower, mid, upper = check_sandwich(A, _gramian_at(field, at), tol)
        cert.derived_bounds = {"lower": lower, "mid": mid, "upper": upper,
                               "holds": bool(lower <= mid * (1 + 1e-9) + 1e-12
                                             and mid <= upper * (1 + 1e-9) + 1e-12)}
    except (RankDrop, ZeroMatrix) as exc:
        cert.reasons.append(f"sandwich bounds unavailable at argmin: {exc}")
    if not ok:
        cert.geometric_verdict = REJECT
        cert.reasons.append(f"A is not in R: Ker(A) meets Im(G) at omega={witness}")
    elif delta < delta_min:
        cert.geometric_verdict = REJECT
        cert.reasons.append(f"Friedrichs sine {delta:.3e} < deltaMin {delta_min:g} at omega={at}")
    else:
        cert.geometric_verdict = ACCEPT
    return cert


def _right_inverse(A, tol):
    AAh = A @ A.conj().T
    if np.linalg.cond(AAh) < PINV_COND_LIMIT:
        return A.conj().T @ np.linalg.inv(AAh)
    return pinv(A, tol)


def certify_analytic(A, field, grid, tol=DEFAULT_TOL, gamma_margin=GAMMA_MARGIN, refine=True):
    """Sup over the grid of ``||(I - A^*(A A^*)^{-1} A) G G^+||`` against 1."""
    report = _require_frame(field, grid, tol)
    A = _check_shape(A, field, grid, tol)
    if A.shape[0] != report.length_hat:
        raise BadShape(f"the analytic criterion needs rows(A) = length = {report.length_hat}")
    cert = ReductionCertificate(in_R=None, grid_resolution=grid.points_per_axis)
    AAh = A @ A.conj().T
    if numerical_rank(AAh, tol) < A.shape[0]:
        cert.analytic_verdict = REJECT
        cert.reasons.append("A A* is singular (A is not of full row rank)")
        return cert
    m = A.shape[1]
    Q = np.eye(m) - _right_inverse(A, tol) @ A
    data = grid_data(field, grid, tol)

    def work(sl):
        # ||Q G G^+|| = ||Q U|| with U an orthonormal basis of Im(G)
        ranks, V = data.ranks[sl], data.eigenvectors[sl]
        out = np.zeros(ranks.shape[0])
        for r in np.unique(ranks):
            if r == 0:
                continue
            idx = np.flatnonzero(ranks == r)
            out[idx] = _largest_sv(Q[None] @ _top_vectors(V, ranks, idx, int(r)))
        return out

    gammas = map_chunks(work, data.size)
    i_max = int(np.argmax(gammas))
    gamma, at = float(gammas[i_max]), _omega(data.points[i_max])
    if refine:
        gamma, at = refine_extremum(
            lambda i: _gamma_objective(field, Q, int(data.ranks[i])),
            field, grid, data.points, gammas, largest=True,
        )
        at = _omega(at)
    cert.gamma_hat, cert.argmax_omega = gamma, at
    if gamma <= 1.0 - gamma_margin:
        cert.analytic_verdict = ACCEPT
    else:
        cert.analytic_verdict = REJECT
        cert.reasons.append(f"projector product norm {gamma:.12f} > 1 - {gamma_margin:g} at omega={at}")
    return cert


def certify(A, field, grid, tol=DEFAULT_TOL, method="both", delta_min=DELTA_MIN,
            gamma_margin=GAMMA_MARGIN):
    """Run one or both certificates; ``method`` is geometric, analytic or both."""
    if method not in ("geometric", "analytic", "both"):
        raise ValueError(f"unknown method {method!r}")
    geo = ana = None
    if method in ("geometric", "both"):
        geo = certify_geometric(A, field, grid, tol, delta_min)
    if method in ("analytic", "both"):
        ana = certify_analytic(A, field, grid, tol, gamma_margin)
    if geo is None:
        return ana
    if ana is None:
        return geo
    cert = geo.merge(ana)
    if cert.methods_agree is False:
        cert.reasons.append("geometric and analytic certificates disagree on this grid")
    return cert


def kernel_shortcut(A, field, grid, tol=DEFAULT_TOL):
    """``Ker(A) = Ker(G(omega))`` at every grid point and ``dim Ker(A) = m - rows(A)``."""
    _require_frame(field, grid, tol)
    A = _check_shape(A, field, grid, tol)
    K = kernel_basis(A, tol)
    m = A.shape[1]
    if K.shape[1] != m - A.shape[0]:
        return False
    data = grid_data(field, grid, tol)
    if np.any(m - data.ranks != K.shape[1]):
        return False
    if K.shape[1] == 0:
        return True
    N = data.eigenvectors[:, :, : K.shape[1]]
    R = K[None] - N @ (np.conj(np.swapaxes(N, -1, -2)) @ K[None])
    return bool(np.linalg.norm(R, 2, axis=(1, 2)).max() <= tol.rank_tol)


@dataclass
class SquareCaseResult:
    input_class: str
    verdict: str  # class preserved by A, or "reject"
    invertible: bool
    unitary: bool
    cross_check: str
    agree: bool

    def to_dict(self):
        return {
            "inputClass": self.input_class,
            "verdict": self.verdict,
            "invertible": self.invertible,
            "unitary": self.unitary,
            "crossCheck": self.cross_check,
            "agree": self.agree,
        }


def square_case(A, field, grid, tol=DEFAULT_TOL, unitary_tol=1e-10):
    """Decide preservation by a square ``A`` from the matrix alone, then cross-check."""
    A = as_matrix(A)
    m = field.size
    if A.shape != (m, m):
        raise BadShape(f"A must be {m}x{m}, got {A.shape[0]}x{A.shape[1]}")
    report = classify(field, grid, tol)
    if report.verdict == ONB:
        input_class = ONB
    elif report.verdict == RIESZ:
        input_class = RIESZ
    elif report.verdict == FRAME and report.length_hat == m:
        input_class = FRAME
    else:
        raise UnsupportedInputClass(
            f"field is {report.verdict} with length {report.length_hat}; need a Riesz basis, "
            f"an orthonormal basis or a frame with length {m}"
        )
    s = np.linalg.svd(A, compute_uv=False)
    invertible = bool(s[-1] > tol.rank_tol * max(1.0, s[0]))
    unitary = bool(op_norm(A @ A.conj().T - np.eye(m)) <= unitary_tol)
    if not invertible:
        verdict = "reject"
    elif input_class == ONB:
        verdict = ONB if unitary else RIESZ
    else:
        verdict = input_class
    after = classify(conjugate(field, A), grid, tol)
    if verdict == "reject":
        expected_bad = after.verdict not in FRAME_VERDICTS or after.length_hat < m
        agree = expected_bad if input_class == FRAME else after.verdict not in (RIESZ, ONB)
    elif verdict == FRAME:
        agree = after.verdict in FRAME_VERDICTS and after.length_hat == m
    else:
        agree = after.verdict == verdict
    return SquareCaseResult(input_class, verdict, invertible, unitary, after.verdict, bool(agree))


def random_matrix(rng, rows, cols):
    """Standard complex Gaussian matrix."""
    return (rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))) / np.sqrt(2.0)


def scan_generic(field, ell, trials, seed, grid, tol=DEFAULT_TOL, delta_min=DELTA_MIN):
    """Count random ``ell x m`` matrices in R and those certified frame-preserving.

    Each trial draws from its own child of ``SeedSequence(seed)``, so counts
    do not depend on how trials are scheduled.
    """
    m = field.size
    length = int(grid_data(field, grid, tol).ranks.max())
    if not length <= ell <= m:
        raise BadShape(f"ell={ell} outside [length={length}, m={m}]")
    if trials == 0:
        return GenericityReport(0, 0, 0, seed)
    is_frame = classify(field, grid, tol).is_frame
    children = np.random.SeedSequence(seed).spawn(trials)

    def trial(child):
        A = random_matrix(np.random.default_rng(child), ell, m)
        if not is_frame:
            return in_R(A, field, grid, tol)[0], False
        cert = certify_geometric(A, field, grid, tol, delta_min, early_exit=True)
        return cert.in_R, cert.geometric_verdict == ACCEPT

    results = map_ordered(trial, children)
    return GenericityReport(
        trials=trials,
        in_R_count=sum(1 for r, _ in results if r),
        frame_preserving_count=sum(1 for _, p in results if p),
        seed=seed,
    )
