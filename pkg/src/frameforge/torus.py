"""Closed-form generators, fibers and Gramian fields on the torus.

A generator is described on the Fourier side as a finite list of pieces,
each a half-open box carrying a trigonometric polynomial.  Bounded support
makes the Gramian a finite sum over integer shifts, evaluated exactly.

Points on the torus are reduced into ``[-1/2, 1/2)^d`` before evaluation.
"""

from dataclasses import dataclass, field as dc_field
import itertools
import math

import numpy as np

from .errors import DimensionMismatch, NotPSDAtPoint
from .linalg import DEFAULT_TOL, as_matrix

TWO_PI = 2.0 * np.pi


def reduce_point(omega):
    """Reduce points modulo 1 into ``[-1/2, 1/2)`` componentwise."""
    w = np.asarray(omega, dtype=float)
    r = w - np.floor(w + 0.5)
    # floor(x + 0.5) can round up for x just below 1/2
    return np.where(r >= 0.5, r - 1.0, r)


@dataclass(frozen=True, eq=False)
class TrigPoly:
    """``sum_j coeffs[j] * exp(2 pi i <freqs[j], omega>)``."""

    freqs: np.ndarray
    coeffs: np.ndarray

    def __post_init__(self):
        freqs = np.asarray(self.freqs, dtype=np.int64)
        coeffs = np.asarray(self.coeffs, dtype=np.complex128).reshape(-1)
        if freqs.ndim != 2 or freqs.shape[0] != coeffs.shape[0]:
            raise ValueError("freqs must be (terms, d) and match coeffs")
        if len({tuple(f) for f in freqs.tolist()}) != freqs.shape[0]:
            raise ValueError("trigonometric polynomial has repeated frequencies")
        if not np.all(np.isfinite(coeffs)):
            raise ValueError("non-finite coefficient")
        object.__setattr__(self, "freqs", freqs)
        object.__setattr__(self, "coeffs", coeffs)

    @classmethod
    def from_terms(cls, terms, dimension):
        """Build from ``[(freq_tuple, coeff), ...]``."""
        if not terms:
            return cls(np.zeros((0, dimension), dtype=np.int64), np.zeros(0))
        freqs = [tuple(int(n) for n in f) for f, _ in terms]
        if any(len(f) != dimension for f in freqs):
            raise DimensionMismatch("frequency vector length differs from dimension")
        return cls(np.array(freqs, dtype=np.int64), np.array([c for _, c in terms]))

    @classmethod
    def constant(cls, value, dimension):
        return cls.from_terms([((0,) * dimension, value)], dimension)

    @property
    def dimension(self):
        return self.freqs.shape[1]

    def terms(self):
        return [(tuple(int(n) for n in f), complex(c)) for f, c in zip(self.freqs, self.coeffs)]

    def __call__(self, points):
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if self.freqs.shape[0] == 0:
            return np.zeros(pts.shape[0], dtype=np.complex128)
        phase = pts @ self.freqs.T.astype(float)
        # zero frequencies must give exactly 1 so constant pieces stay exact
        waves = np.where(np.all(self.freqs == 0, axis=1), 1.0 + 0.0j, np.exp(1j * TWO_PI * phase))
        return waves @ self.coeffs


@dataclass(frozen=True, eq=False)
class Piece:
    box: tuple
    poly: TrigPoly

    def __post_init__(self):
        box = tuple((float(lo), float(hi)) for lo, hi in self.box)
        if any(not (math.isfinite(lo) and math.isfinite(hi) and lo < hi) for lo, hi in box):
            raise ValueError(f"invalid box {self.box!r}")
        if len(box) != self.poly.dimension:
            raise DimensionMismatch("box and polynomial dimensions differ")
        object.__setattr__(self, "box", box)

    @property
    def dimension(self):
        return len(self.box)

    def contains(self, points):
        pts = np.atleast_2d(points)
        lo = np.array([b[0] for b in self.box])
        hi = np.array([b[1] for b in self.box])
        return np.all((pts >= lo) & (pts < hi), axis=1)

    def evaluate(self, points):
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        inside = self.contains(pts)
        out = np.zeros(pts.shape[0], dtype=np.complex128)
        if np.any(inside):
            out[inside] = self.poly(pts[inside])
        return out


def _boxes_overlap(a, b):
    return all(min(ah, bh) > max(al, bl) for (al, ah), (bl, bh) in zip(a, b))


@dataclass(frozen=True, eq=False)
class GeneratorSpec:
    """Fourier transform of one generator as disjoint half-open pieces."""

    dimension: int
    pieces: tuple

    def __post_init__(self):
        pieces = tuple(self.pieces)
        for p in pieces:
            if p.dimension != self.dimension:
                raise DimensionMismatch("piece dimension differs from generator dimension")
        for a, b in itertools.combinations(pieces, 2):
            if _boxes_overlap(a.box, b.box):
                raise ValueError(f"generator pieces overlap: {a.box} and {b.box}")
        object.__setattr__(self, "pieces", pieces)

    def __call__(self, points):
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        out = np.zeros(pts.shape[0], dtype=np.complex128)
        for p in self.pieces:
            out += p.evaluate(pts)
        return out

    def shift_range(self):
        """Per-axis integer shifts ``k`` for which ``omega + k`` may hit a box."""
        ranges = []
        for axis in range(self.dimension):
            if not self.pieces:
                ranges.append(range(0))
                continue
            lo = min(p.box[axis][0] for p in self.pieces)
            hi = max(p.box[axis][1] for p in self.pieces)
            ranges.append(range(math.ceil(lo - 0.5), math.floor(hi + 0.5) + 1))
        return ranges


@dataclass(frozen=True)
class Fiber:
    base_frequency: tuple
    samples: tuple  # ((k, value), ...)

    def as_dict(self):
        return dict(self.samples)

    def norm(self):
        return math.sqrt(sum(abs(v) ** 2 for _, v in self.samples))


def fiber(g, omega):
    """Nonzero samples ``(k, g_hat(omega + k))`` of a generator's fiber."""
    w = np.asarray(omega, dtype=float).reshape(-1)
    if w.shape[0] != g.dimension:
        raise DimensionMismatch(f"point has dimension {w.shape[0]}, generator {g.dimension}")
    w = reduce_point(w)
    samples = []
    for k in itertools.product(*g.shift_range()):
        value = complex(g(w + np.array(k, dtype=float))[0])
        if value != 0:
            samples.append((tuple(k), value))
    return Fiber(tuple(float(x) for x in w), tuple(samples))


def _piece_breakpoints(pieces, axis):
    out = set()
    for p in pieces:
        for edge in p.box[axis]:
            out.add(float(reduce_point(edge)))
    return out


@dataclass(frozen=True, eq=False)
class GramianField:
    """The map ``omega -> G(omega)``, from generators or from closed-form entries.

    ``transform`` holds an accumulated conjugation ``T`` so that the field
    evaluates to ``T G_base(omega) T^*``.
    """

    dimension: int
    generators: tuple = None
    entries: tuple = None
    transform: np.ndarray = None
    _memo: dict = dc_field(default_factory=dict, repr=False)

    def __post_init__(self):
        if (self.generators is None) == (self.entries is None):
            raise ValueError("exactly one of generators / entries must be given")
        if self.generators is not None:
            gens = tuple(self.generators)
            if not gens:
                raise ValueError("need at least one generator")
            for g in gens:
                if g.dimension != self.dimension:
                    raise DimensionMismatch("generator dimension differs from field dimension")
            object.__setattr__(self, "generators", gens)
        else:
            rows = tuple(tuple(tuple(cell) for cell in row) for row in self.entries)
            m = len(rows)
            if m == 0 or any(len(r) != m for r in rows):
                raise ValueError("gramian entries must form a non-empty square grid")
            for row in rows:
                for cell in row:
                    for p in cell:
                        if p.dimension != self.dimension:
                            raise DimensionMismatch("entry piece dimension differs")
            object.__setattr__(self, "entries", rows)
        if self.transform is not None:
            T = as_matrix(self.transform)
            if T.shape[1] != self.base_size:
                raise DimensionMismatch("transform columns differ from base size")
            T.setflags(write=False)
            object.__setattr__(self, "transform", T)

    @classmethod
    def from_generators(cls, generators):
        gens = tuple(generators)
        return cls(dimension=gens[0].dimension, generators=gens)

    @classmethod
    def from_entries(cls, dimension, entries):
        return cls(dimension=dimension, entries=entries)

    @property
    def base_size(self):
        if self.generators is not None:
            return len(self.generators)
        return len(self.entries)

    @property
    def size(self):
        return self.base_size if self.transform is None else self.transform.shape[0]

    @property
    def piecewise_constant(self):
        """True when every piece carries a constant polynomial."""
        if self.generators is not None:
            pieces = [p for g in self.generators for p in g.pieces]
        else:
            pieces = [p for row in self.entries for cell in row for p in cell]
        return all(not np.any(p.poly.freqs) for p in pieces)

    @property
    def source(self):
        return "generators" if self.generators is not None else "entries"

    def _compiled(self):
        """Per-piece arrays for fast single-point evaluation."""
        c = self._memo.get("compiled")
        if c is None:
            c = []
            for j, g in enumerate(self.generators):
                for p in g.pieces:
                    lo = np.array([b[0] for b in p.box])
                    hi = np.array([b[1] for b in p.box])
                    zero = np.all(p.poly.freqs == 0, axis=1)
                    c.append((j, lo, hi, p.poly.freqs.astype(float), p.poly.coeffs, zero))
            self._memo["compiled"] = c
        return c

    def _fiber_matrix(self, w):
        """Fiber values ``{k: [g_1(w+k), ..., g_m(w+k)]}`` at one reduced point."""
        m = len(self.generators)
        rows = {}
        for j, lo, hi, freqs, coeffs, zero in self._compiled():
            spans = [range(math.ceil(a - x), math.ceil(b - x)) for a, b, x in zip(lo, hi, w)]
            for k in itertools.product(*spans):
                shifted = w + np.array(k, dtype=float)
                if not (np.all(shifted >= lo) and np.all(shifted < hi)):
                    continue
                waves = np.where(zero, 1.0 + 0.0j, np.exp(1j * TWO_PI * (freqs @ shifted)))
                row = rows.setdefault(k, np.zeros(m, dtype=np.complex128))
                row[j] += waves @ coeffs
        return rows

    def _base(self, pts):
        n, m = pts.shape[0], self.base_size
        G = np.zeros((n, m, m), dtype=np.complex128)
        if self.generators is not None and n == 1:
            for v in self._fiber_matrix(pts[0]).values():
                G[0] += np.outer(v, v.conj())
        elif self.generators is not None:
            ranges = [
                sorted(set().union(*(set(g.shift_range()[a]) for g in self.generators)))
                for a in range(self.dimension)
            ]
            for k in itertools.product(*ranges):
                shifted = pts + np.array(k, dtype=float)
                V = np.stack([g(shifted) for g in self.generators], axis=1)
                if np.any(V):
                    G += V[:, :, None] * np.conj(V[:, None, :])
        else:
            for i, row in enumerate(self.entries):
                for j, cell in enumerate(row):
                    for p in cell:
                        G[:, i, j] += p.evaluate(pts)
        return G

    def evaluate(self, points):
        """Gramian stack ``(n, size, size)`` at the given points (no PSD check)."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if pts.shape[1] != self.dimension:
            raise DimensionMismatch(f"points have dimension {pts.shape[1]}, field {self.dimension}")
        G = self._base(reduce_point(pts))
        if self.transform is not None:
            T = self.transform
            G = T @ G @ T.conj().T
        return G

    def breakpoints(self):
        """Per-axis reduced coordinates where some piece starts or ends."""
        if self.generators is not None:
            pieces = [p for g in self.generators for p in g.pieces]
        else:
            pieces = [p for row in self.entries for cell in row for p in cell]
        return [np.array(sorted(_piece_breakpoints(pieces, a))) for a in range(self.dimension)]

    def cell_bounds(self, omega):
        """Bounds of the smooth cell containing ``omega``, one ``(lo, hi)`` per axis.

        Inside a cell every entry is a trigonometric polynomial, so the field
        is analytic there.  The returned interval may extend past 1/2; the
        field is periodic.
        """
        out = []
        for a, b in enumerate(self.breakpoints()):
            w = float(omega[a])
            if b.size == 0:
                out.append((w - 1.0, w + 1.0))
                continue
            ext = np.concatenate([b - 1.0, b, b + 1.0, b + 2.0, b - 2.0])
            ext.sort()
            lo = ext[ext <= w].max()
            hi = ext[ext > w].min()
            out.append((float(lo), float(hi)))
        return out


def gramian_at(field, omega, tol=DEFAULT_TOL):
    """Evaluate the field at one point as a Hermitian PSD matrix."""
    w = np.asarray(omega, dtype=float).reshape(-1)
    G = field.evaluate(w[None, :])[0]
    scale = max(1.0, float(np.linalg.norm(G, 2)))
    asym = float(np.linalg.norm(G - G.conj().T, 2))
    lam_min = float(np.linalg.eigvalsh(0.5 * (G + G.conj().T))[0])
    if asym > tol.reconstruction_tol * scale or lam_min < -tol.positivity_tol * scale:
        raise NotPSDAtPoint(reduce_point(w), lam_min)
    return G


def conjugate(field, A):
    """Field whose value at every point is ``A G(omega) A^*``."""
    A = as_matrix(A)
    if A.shape[1] != field.size:
        raise DimensionMismatch(f"A has {A.shape[1]} columns, field size is {field.size}")
    T = A if field.transform is None else A @ field.transform
    return GramianField(
        dimension=field.dimension, generators=field.generators, entries=field.entries, transform=T
    )


SQRT2_MINUS_1 = math.sqrt(2.0) - 1.0


@dataclass(frozen=True)
class SamplingGrid:
    """``N^d`` points ``-1/2 + offset + j/N`` per axis, first axis slowest."""

    dimension: int
    points_per_axis: int = 256
    offset: float = None

    def __post_init__(self):
        if self.dimension < 1:
            raise ValueError("dimension must be positive")
        if self.points_per_axis < 2:
            raise ValueError("need at least 2 points per axis")
        if self.offset is None:
            object.__setattr__(self, "offset", SQRT2_MINUS_1 / self.points_per_axis)
        if not 0.0 < self.offset < 1.0 / self.points_per_axis:
            raise ValueError(f"offset must lie in (0, 1/N), got {self.offset}")

    @property
    def cell(self):
        return 1.0 / self.points_per_axis

    @property
    def size(self):
        return self.points_per_axis ** self.dimension

    def axis(self):
        N = self.points_per_axis
        return -0.5 + self.offset + np.arange(N) / N

    def points(self):
        axes = [self.axis()] * self.dimension
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([m.reshape(-1) for m in mesh], axis=1)


def sample(field, grid):
    """Yield ``(omega, G(omega))`` over the grid in lexicographic order."""
    if grid.dimension != field.dimension:
        raise DimensionMismatch("grid and field dimensions differ")
    pts = grid.points()
    chunk = 4096
    for start in range(0, pts.shape[0], chunk):
        block = pts[start:start + chunk]
        G = field.evaluate(block)
        for w, g in zip(block, G):
            yield tuple(float(x) for x in w), g
