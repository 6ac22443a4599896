"""Grid sweeps: chunked evaluation, worker pool and local refinement.

Chunk boundaries do not depend on the worker count, so results are
bit-identical for any ``FRAMEFORGE_THREADS`` setting.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
import os
import threading

import numpy as np
from scipy import optimize

from .errors import DimensionMismatch, EmptyGrid
from .linalg import DEFAULT_TOL, stacked_eigh

CHUNK = 4096
THREADS_ENV = "FRAMEFORGE_THREADS"


def worker_count():
    raw = os.environ.get(THREADS_ENV, "")
    try:
        n = int(raw)
    except ValueError:
        n = os.cpu_count() or 1
    return max(1, n)


_local = threading.local()


def _run_as_worker(fn, x):
    _local.inside = True
    try:
        return fn(x)
    finally:
        _local.inside = False


def map_ordered(fn, items):
    """``[fn(x) for x in items]`` on the worker pool, results in input order.

    Calls made from inside a worker run serially; pools never nest.
    """
    items = list(items)
    workers = min(worker_count(), len(items))
    if workers <= 1 or getattr(_local, "inside", False):
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda x: _run_as_worker(fn, x), items))


def map_chunks(fn, n):
    """Apply ``fn(slice)`` to fixed-size chunks of ``range(n)`` and concatenate."""
    slices = [slice(s, min(s + CHUNK, n)) for s in range(0, n, CHUNK)]
    parts = map_ordered(fn, slices)
    if isinstance(parts[0], tuple):
        return tuple(np.concatenate(p, axis=0) for p in zip(*parts))
    return np.concatenate(parts, axis=0)


@dataclass(frozen=True, eq=False)
class GridData:
    """Gramians and their spectra at every grid point."""

    points: np.ndarray  # (n, d)
    gramians: np.ndarray  # (n, m, m)
    eigenvalues: np.ndarray  # (n, m) ascending
    eigenvectors: np.ndarray  # (n, m, m)
    ranks: np.ndarray  # (n,)

    @property
    def size(self):
        return self.points.shape[0]

    def image_bases(self, index):
        """Orthonormal image bases (top-``r`` eigenvectors) for the selected points."""
        r = self.ranks[index]
        V = self.eigenvectors[index]
        m = V.shape[-1]
        return [V[i, :, m - r[i]:] for i in range(len(r))]


def grid_data(field, grid, tol=DEFAULT_TOL):
    """Evaluate and decompose the field on the grid, memoized per field."""
    if grid.dimension != field.dimension:
        raise DimensionMismatch(f"grid dimension {grid.dimension} != field dimension {field.dimension}")
    if grid.size == 0:
        raise EmptyGrid("grid has no points")
    key = ("grid", grid, tol)
    cached = field._memo.get(key)
    if cached is not None:
        return cached
    pts = grid.points()

    def work(sl):
        G = field.evaluate(pts[sl])
        w, V, r = stacked_eigh(G, tol)
        return G, w, V, r

    G, w, V, r = map_chunks(work, pts.shape[0])
    data = GridData(pts, G, w, V, r)
    field._memo[key] = data
    return data


class _Reached(Exception):
    pass


def polish(objective, start, bounds, maximize=False, stop_at=None):
    """Refine a grid extremum of ``objective`` inside ``bounds``.

    Returns ``(value, point)`` for the best point seen, including the start.
    Deterministic: Brent's method in one dimension, bounded Powell otherwise.
    With ``stop_at`` the search ends once the objective passes that value.
    """
    sign = -1.0 if maximize else 1.0
    start = np.asarray(start, dtype=float)
    best = [sign * objective(start), start]
    target = None if stop_at is None else sign * stop_at

    def f(x):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        v = sign * objective(x)
        if v < best[0]:
            best[0], best[1] = v, x.copy()
        if target is not None and v < target:
            raise _Reached
        return v

    if target is not None and best[0] < target:
        return sign * best[0], tuple(float(x) for x in best[1])

    lo = np.array([b[0] for b in bounds])
    hi = np.array([b[1] for b in bounds])
    try:
        _optimize(f, start, lo, hi)
    except _Reached:
        pass
    return sign * best[0], tuple(float(x) for x in best[1])


def _optimize(f, start, lo, hi):
    if start.size == 1:
        optimize.minimize_scalar(
            lambda t: f([t]), bounds=(lo[0], hi[0]), method="bounded",
            options={"xatol": 1e-13, "maxiter": 200},
        )
    else:
        # Powell rather than Nelder-Mead: a bounded simplex can collapse onto
        # the window edge next to a sharp minimum
        optimize.minimize(
            f, start, method="Powell", bounds=list(zip(lo, hi)),
            options={"xtol": 1e-10, "ftol": 1e-14, "maxfev": 1000 * start.size},
        )


def polish_bounds(field, grid, omega, cells=1.0):
    """Window of ``cells`` grid cells around ``omega``, clipped to its smooth cell."""
    half = cells * grid.cell
    out = []
    for (lo, hi), w in zip(field.cell_bounds(omega), omega):
        # stay strictly inside the half-open smooth cell
        eps = 1e-12
        out.append((max(lo + eps, w - half), min(hi - eps, w + half)))
    return out


def candidate_indices(values, count=3, largest=False):
    """Indices of the ``count`` best grid values, ties broken by grid order."""
    v = -values if largest else values
    order = np.argsort(v, kind="stable")
    return [int(i) for i in order[:count]]


def refine_extremum(objective_for, field, grid, points, values, largest=False, count=3,
                    stop_at=None):
    """Grid extremum followed by local refinement from the best ``count`` points.

    ``objective_for(i)`` returns the objective to refine from grid point ``i``
    (it may depend on data at that point, e.g. its rank).  Returns
    ``(value, omega)`` and is never worse than the raw grid extremum.
    ``stop_at`` ends the search as soon as a value beyond it is found.
    """
    i0 = candidate_indices(values, 1, largest)[0]
    best_val, best_pt = float(values[i0]), tuple(float(x) for x in points[i0])
    if field.piecewise_constant:
        # the objective is constant on each smooth cell: nothing to refine
        return best_val, best_pt
    for i in candidate_indices(values, count, largest):
        start = points[i]
        v, w = polish(objective_for(i), start, polish_bounds(field, grid, start),
                      maximize=largest, stop_at=stop_at)
        if v > best_val if largest else v < best_val:
            best_val, best_pt = v, w
        if stop_at is not None and (best_val > stop_at if largest else best_val < stop_at):
            break
    return float(best_val), best_pt
