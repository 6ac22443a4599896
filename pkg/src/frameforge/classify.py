"""Bessel / frame / Riesz / orthonormal classification of a system of translates.

Essential extrema over the torus are approximated by grid extrema, each
refined locally inside the smooth cell of the field that contains it.
"""

from dataclasses import dataclass, field as dc_field

import numpy as np

from .errors import NotAFrame
from .linalg import DEFAULT_TOL
from .sweep import grid_data, refine_extremum
from .torus import reduce_point

NOT_BESSEL = "NotBessel-unsupported"  # reserved: bounded closed-form fields are always Bessel
BESSEL_ONLY = "BesselOnly"
FRAME = "Frame"
RIESZ = "RieszBasis"
ONB = "OrthonormalBasis"

VERDICT_ORDER = (NOT_BESSEL, BESSEL_ONLY, FRAME, RIESZ, ONB)
FRAME_VERDICTS = (FRAME, RIESZ, ONB)

FRAME_THRESHOLD = 1e-6
ONB_TOL = 1e-8


def _omega(w):
    return [float(x) for x in np.atleast_1d(reduce_point(np.asarray(w, dtype=float)))]


@dataclass
class FrameReport:
    verdict: str
    alpha_hat: float
    beta_hat: float
    length_hat: int
    grid_resolution: int
    witnesses: list = dc_field(default_factory=list)

    @property
    def is_frame(self):
        return self.verdict in FRAME_VERDICTS

    def to_dict(self):
        return {
            "verdict": self.verdict,
            "alpha": self.alpha_hat,
            "beta": self.beta_hat,
            "length": self.length_hat,
            "grid": self.grid_resolution,
            "witnesses": [{"omega": list(w), "reason": r} for w, r in self.witnesses],
        }


def _eigvals_at(field, w):
    G = field.evaluate(np.asarray(w, dtype=float)[None, :])[0]
    return np.linalg.eigvalsh(0.5 * (G + G.conj().T))


def classify(field, grid, tol=DEFAULT_TOL, refine=True, frame_threshold=FRAME_THRESHOLD):
    """Classify ``E(Phi)`` from the spectra of the Gramian field on ``grid``.

    With ``refine=False`` the raw grid extrema are reported.
    """
    key = ("classify", grid, tol, refine, frame_threshold)
    cached = field._memo.get(key)
    if cached is not None:
        return cached

    data = grid_data(field, grid, tol)
    m = field.size
    w, ranks, pts = data.eigenvalues, data.ranks, data.points
    length = int(ranks.max())
    witnesses = []

    lam_max = w[:, -1]
    beta = float(lam_max.max())
    if refine:
        beta, _ = refine_extremum(
            lambda i: (lambda x: float(_eigvals_at(field, x)[-1])),
            field, grid, pts, lam_max, largest=True,
        )

    if length == 0:
        report = FrameReport(BESSEL_ONLY, 0.0, max(beta, 0.0), 0, grid.points_per_axis,
                             [(_omega(pts[0]), "Gramian vanishes at every grid point")])
        field._memo[key] = report
        return report

    active = ranks > 0
    idx = np.where(active, m - ranks, 0)
    lam_minus = np.where(active, np.take_along_axis(w, idx[:, None], axis=1)[:, 0], np.inf)
    i_min = int(np.argmin(lam_minus))
    alpha, alpha_at = float(lam_minus[i_min]), _omega(pts[i_min])
    if refine:
        # follow the eigenvalue branch that is the smallest nonzero one at the start point
        alpha, alpha_at = refine_extremum(
            lambda i: (lambda x, k=int(idx[i]): float(_eigvals_at(field, x)[k])),
            field, grid, pts, lam_minus,
        )
        alpha, alpha_at = max(alpha, 0.0), _omega(alpha_at)

    threshold = frame_threshold * beta
    if not alpha > threshold:
        verdict = BESSEL_ONLY
        witnesses.append((alpha_at, f"smallest nonzero eigenvalue {alpha:.6e} is below "
                                    f"the frame threshold {threshold:.6e}"))
    else:
        verdict = FRAME
        low = np.flatnonzero(ranks < m)
        if low.size == 0:
            verdict = RIESZ
            dev = np.abs(w - 1.0).max(axis=1)
            if dev.max() <= ONB_TOL and abs(alpha - 1.0) <= ONB_TOL and abs(beta - 1.0) <= ONB_TOL:
                verdict = ONB
        elif length == m:
            witnesses.append((_omega(pts[low[0]]), f"rank {int(ranks[low[0]])} < {m}: not a Riesz basis"))

    report = FrameReport(verdict, alpha, beta, length, grid.points_per_axis, witnesses)
    field._memo[key] = report
    return report


def length_of(field, grid, tol=DEFAULT_TOL):
    """Maximal numerical rank of the Gramian over the grid."""
    return int(grid_data(field, grid, tol).ranks.max())


def frame_bounds(field, grid, tol=DEFAULT_TOL):
    report = classify(field, grid, tol)
    if not report.is_frame:
        raise NotAFrame(f"system is {report.verdict}, not a frame")
    return report.alpha_hat, report.beta_hat
