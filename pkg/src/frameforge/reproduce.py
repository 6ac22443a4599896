"""Acceptance checks, one function per criterion.

Each check returns a ``Criterion`` with a one-line detail.  Checks never
loosen their stated tolerances; a failing check reports what it saw.
"""

from dataclasses import dataclass
import contextlib
import io
import math
import os
import tempfile

import numpy as np

from .classify import BESSEL_ONLY, FRAME, FRAME_VERDICTS, ONB, RIESZ, classify, length_of
from .errors import NotAFrame, RankDrop
from .linalg import DEFAULT_TOL, hermitian_eig, projector_kernel, op_norm
from .reduction import (
    ACCEPT,
    REJECT,
    angle_profile,
    certify,
    check_sandwich,
    in_R,
    random_matrix,
    scan_generic,
    square_case,
)
from .scenarios import BUILTIN_NAMES, builtin, identity_field
from .subspace import Subspace, from_image, from_kernel, friedrichs_sin, intersect
from .sweep import THREADS_ENV
from .torus import GeneratorSpec, GramianField, Piece, SamplingGrid, TrigPoly, conjugate, gramian_at

EXAMPLE1_GRAMIAN = np.array([[80, -8, 4], [-8, 17, 32], [4, 32, 65]], dtype=float)
EXAMPLE1_KERNEL = np.array([1.0, 8.0, -4.0])


@dataclass
class Criterion:
    id: str
    title: str
    passed: bool
    detail: str

    def line(self):
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.id} {self.title}: {self.detail}"

    def to_dict(self):
        return {"id": self.id, "title": self.title, "passed": self.passed, "detail": self.detail}


def _grid(field, n):
    return SamplingGrid(field.dimension, n)


def example1_matrix(a, b, c, d):
    """2x3 matrix with kernel spanned by (1, 8, -4)."""
    return np.array([[4 * b - 8 * a, a, b], [4 * d - 8 * c, c, d]], dtype=np.complex128)


def example2_matrix(theta, beta, beta_p):
    return np.array([[math.cos(theta) * np.exp(2j * np.pi * beta),
                      math.sin(theta) * np.exp(2j * np.pi * beta_p)]])


def example2_zeros(theta, beta, beta_p):
    """The four zeros per period of ``A G A^*`` for the matrix above."""
    t, z = theta / (2 * np.pi), beta - beta_p
    pts = [(t, z), (t + 0.5, z), (-t, z + 0.5), (0.5 - t, z + 0.5)]
    return [tuple(float(v) for v in np.asarray(p) - np.floor(np.asarray(p) + 0.5)) for p in pts]


def torus_distance(p, q):
    diff = np.asarray(p, dtype=float) - np.asarray(q, dtype=float)
    diff -= np.round(diff)
    return float(np.max(np.abs(diff)))


def riesz_field():
    """Three generators whose fibers are triangular with unit diagonal: a Riesz basis."""
    chi = lambda lo, hi, v=1.0: Piece(((lo, hi),), TrigPoly.constant(v, 1))
    bumpy = TrigPoly.from_terms([((0,), 1.0), ((1,), 0.5)], 1)
    return GramianField.from_generators([
        GeneratorSpec(1, (chi(-0.5, 0.5),)),
        GeneratorSpec(1, (chi(-0.5, 0.5, 2.0), chi(0.5, 1.5))),
        GeneratorSpec(1, (Piece(((0.5, 1.5),), bumpy), chi(1.5, 2.5))),
    ])


def random_unitary(rng, m):
    Q, R = np.linalg.qr(random_matrix(rng, m, m))
    return Q * (np.diag(R) / np.abs(np.diag(R)))


# --- criteria -------------------------------------------------------------------


def check_1():
    field = builtin("example1").field
    rng = np.random.default_rng(101)
    err = max(np.abs(gramian_at(field, [w]) - EXAMPLE1_GRAMIAN).max()
              for w in rng.uniform(-0.5, 0.5, 100))
    G = gramian_at(field, [0.1])
    sq = np.abs(G @ G - 81 * G).max()
    ker = np.abs(G @ EXAMPLE1_KERNEL).max()
    ok = err <= 1e-12 and sq <= 1e-10 and ker <= 1e-10
    return Criterion("1", "Example 1 Gramian exactness", ok,
                     f"max entry error {err:.1e}, |G^2-81G| {sq:.1e}, |G k| {ker:.1e}")


def check_2():
    field = builtin("example1").field
    r = classify(field, _grid(field, 64))
    ok = (r.verdict == FRAME and abs(r.alpha_hat - 81) <= 1e-9 and abs(r.beta_hat - 81) <= 1e-9
          and r.length_hat == 2)
    return Criterion("2", "Example 1 classification", ok,
                     f"{r.verdict}, alpha {r.alpha_hat!r}, beta {r.beta_hat!r}, length {r.length_hat}")


def check_3():
    field = builtin("example1").field
    grid = _grid(field, 256)
    rng = np.random.default_rng(103)
    G = EXAMPLE1_GRAMIAN
    accepted, worst = 0, 0.0
    n = 0
    while n < 50:
        a, b, c, d = rng.standard_normal(4)
        if abs(a * d - b * c) <= 0.1:
            continue
        n += 1
        A = example1_matrix(a, b, c, d)
        cert = certify(A, field, grid, method="both")
        accepted += cert.accepted
        det = np.linalg.det(A @ G @ A.conj().T).real
        expected = 81.0 ** 3 * (a * d - b * c) ** 2
        worst = max(worst, abs(det - expected) / expected)
    singular = example1_matrix(0.7, -1.3, 1.4, -2.6)  # second row = 2 * first
    dep_ok, _ = in_R(singular, field, grid)
    ok = accepted == 50 and worst <= 1e-9 and not dep_ok
    return Criterion("3", "Example 1 reduction", ok,
                     f"{accepted}/50 accepted by both, det rel error {worst:.1e}, "
                     f"ad-bc=0 in_R={dep_ok}")


def _example2_samples(count=20, seed=104):
    rng = np.random.default_rng(seed)
    return [(rng.uniform(0, np.pi / 2), rng.uniform(0, 1), rng.uniform(0, 1)) for _ in range(count)]


def _example2_runs():
    field = builtin("example2").field
    grid = _grid(field, 256)
    out = []
    for theta, beta, beta_p in _example2_samples():
        A = example2_matrix(theta, beta, beta_p)
        cert = certify(A, field, grid, method="both")
        profile_min = min(s for _, s in angle_profile(A, field, grid))
        out.append(((theta, beta, beta_p), cert, profile_min))
    return field, grid, out


_cache = {}


def _example2_cached():
    if "ex2" not in _cache:
        _cache["ex2"] = _example2_runs()
    return _cache["ex2"]


def check_4():
    field, grid, runs = _example2_cached()
    r = classify(field, grid)
    cls_ok = (r.verdict == FRAME and abs(r.alpha_hat - 1) <= 1e-9 and abs(r.beta_hat - 1) <= 1e-9
              and r.length_hat == 1)
    rejects = sum(c.geometric_verdict == REJECT and c.analytic_verdict == REJECT for _, c, _ in runs)
    pmin = max(p for _, _, p in runs)
    gmin = min(c.gamma_hat for _, c, _ in runs)
    ok = cls_ok and rejects == 20 and pmin <= 0.1 and gmin >= 0.99
    return Criterion("4", "Example 2 impossibility", ok,
                     f"{r.verdict} alpha {r.alpha_hat:.12f} beta {r.beta_hat:.12f} length {r.length_hat}; "
                     f"{rejects}/20 rejected by both; worst profile min {pmin:.2e}; "
                     f"smallest gammaHat {gmin:.9f}")


def check_4b():
    """Witness location, tested literally against (theta/2pi, beta' - beta)."""
    _, grid, runs = _example2_cached()
    tol = 2 * grid.cell
    near = 0
    for (theta, beta, beta_p), cert, _ in runs:
        target = (theta / (2 * np.pi), beta_p - beta)
        near += torus_distance(cert.argmin_omega, target) <= tol
    return Criterion("4b", "Example 2 witness at (theta/2pi, beta'-beta)", near == 20,
                     f"{near}/20 witnesses within 2 cells of the stated point")


def check_5():
    field = builtin("paley-split").field
    grid = _grid(field, 256)
    length = length_of(field, grid)
    cert = certify(np.array([[1.0, 1.0]]), field, grid, method="both")
    ok_in, witness = in_R(np.array([[1.0, 0.0]]), field, grid)
    delta_ok = cert.delta_hat is not None and abs(cert.delta_hat - 1 / math.sqrt(2)) <= 1e-9
    witness_ok = witness is not None and -0.5 <= witness[0] < 0.0
    ok = length == 1 and cert.accepted and delta_ok and not ok_in and witness_ok
    return Criterion("5", "Paley-Wiener split", ok,
                     f"length {length}; (1,1) accepted={cert.accepted} deltaHat {cert.delta_hat!r}; "
                     f"(1,0) in_R={ok_in} witness {witness}")


def check_6(trials=1000):
    out = []
    for name, ell in (("example1", 2), ("example2", 1)):
        field = builtin(name).field
        out.append((name, scan_generic(field, ell, trials, 7, _grid(field, 256))))
    (_, r1), (_, r2) = out
    ok = (r1.in_R_count == trials and r1.frame_preserving_count == trials
          and r2.in_R_count == trials and r2.frame_preserving_count == 0)
    return Criterion("6", "Genericity scans", ok,
                     f"example1 inR {r1.in_R_count} preserving {r1.frame_preserving_count}; "
                     f"example2 inR {r2.in_R_count} preserving {r2.frame_preserving_count} "
                     f"(of {trials})")


# --- property suite -------------------------------------------------------------


def _random_psd(rng, m, r):
    B = random_matrix(rng, m, r)
    return B @ B.conj().T


def _random_instance(rng):
    """Random PSD ``G`` and ``A`` with rank(G) <= rows(A) <= m; half meet Im(G)."""
    m = int(rng.integers(2, 9))
    r = int(rng.integers(1, m + 1))
    G = _random_psd(rng, m, r)
    rows = int(rng.integers(r, m + 1))
    A = random_matrix(rng, rows, m)
    if rows < m and rng.random() < 0.5:
        u = G @ random_matrix(rng, m, 1)
        u /= np.linalg.norm(u)
        A = A - (A @ u) @ u.conj().T  # now u in Ker(A) ∩ Im(G)
    return G, A


def _rank_paths(A, G, tol):
    H = A @ G @ A.conj().T
    rank_eq = hermitian_eig(0.5 * (H + H.conj().T), tol).rank == hermitian_eig(G, tol).rank
    trivial = intersect(from_kernel(A, tol), from_image(G, tol), tol).dim == 0
    return rank_eq, trivial


def _random_subspace(rng, n):
    k = int(rng.integers(0, n + 1))
    if k == 0:
        return Subspace.trivial(n)
    Q, _ = np.linalg.qr(random_matrix(rng, n, k))
    return Subspace(n, Q)


def property_suite(count=500, seed=107, tol=DEFAULT_TOL):
    """Failure counts per property; every count must be zero."""
    rng = np.random.default_rng(seed)
    fails = {"sandwich": 0, "rank-equivalence": 0, "kernel-equality": 0, "friedrichs-symmetry": 0,
             "friedrichs-complement": 0, "conjugation": 0, "certificate-agreement": 0}
    sandwich_runs = 0
    for _ in range(count):
        G, A = _random_instance(rng)
        rank_eq, trivial = _rank_paths(A, G, tol)
        fails["rank-equivalence"] += rank_eq != trivial
        if rank_eq:
            sandwich_runs += 1
            lo, mid, hi = check_sandwich(A, G, tol)
            fails["sandwich"] += not (lo <= mid + 1e-9 * max(1.0, mid) and mid <= hi + 1e-9 * max(1.0, hi))
            diff = op_norm(projector_kernel(A @ G, tol) - projector_kernel(G, tol))
            fails["kernel-equality"] += diff > 1e-6
        else:
            try:
                check_sandwich(A, G, tol)
                fails["sandwich"] += 1  # the precondition must be enforced
            except RankDrop:
                pass
    for _ in range(count):
        n = int(rng.integers(1, 9))
        M, N = _random_subspace(rng, n), _random_subspace(rng, n)
        s = friedrichs_sin(M, N, tol)
        fails["friedrichs-symmetry"] += abs(s - friedrichs_sin(N, M, tol)) > 1e-9
        fails["friedrichs-complement"] += abs(s - friedrichs_sin(M.complement(tol), N.complement(tol), tol)) > 1e-9
    fields = [builtin(name).field for name in BUILTIN_NAMES]
    for _ in range(count):
        field = fields[int(rng.integers(len(fields)))]
        m = field.size
        A = random_matrix(rng, int(rng.integers(1, m + 1)), m)
        w = rng.uniform(-0.5, 0.5, field.dimension)
        lhs = gramian_at(conjugate(field, A), w)
        rhs = A @ gramian_at(field, w) @ A.conj().T
        fails["conjugation"] += np.abs(lhs - rhs).max() > 1e-10
    agreement_runs = 0
    for name in BUILTIN_NAMES:
        field = builtin(name).field
        grid = _grid(field, 256)
        length = length_of(field, grid)
        for _ in range(20):
            A = random_matrix(rng, length, field.size)
            agreement_runs += 1
            try:
                cert = certify(A, field, grid, method="both")
            except NotAFrame:
                continue  # both certificates refuse a non-frame input
            fails["certificate-agreement"] += cert.methods_agree is not True
    return fails, {"sandwich": sandwich_runs, "agreement": agreement_runs}


def check_7():
    fails, runs = property_suite()
    ok = not any(fails.values())
    detail = ", ".join(f"{k} {v}" for k, v in fails.items())
    return Criterion("7", "Property suite", ok,
                     f"failures: {detail} (sandwich on {runs['sandwich']} rank-preserving cases)")


def check_8():
    field = builtin("bessel-not-frame").field
    grid = _grid(field, 256)
    r = classify(field, grid)
    rng = np.random.default_rng(108)
    frames = sum(classify(conjugate(field, random_matrix(rng, 1, 1)), grid).verdict in FRAME_VERDICTS
                 for _ in range(100))
    ok = r.verdict == BESSEL_ONLY and 3.9 <= r.beta_hat <= 4.0 and frames == 0
    return Criterion("8", "Bessel degradation", ok,
                     f"{r.verdict} beta {r.beta_hat:.12f}; {frames}/100 conjugates classify as frames")


def check_9():
    rng = np.random.default_rng(109)
    riesz = riesz_field()
    ident = identity_field(3)
    grid = _grid(riesz, 256)
    kept_riesz = sum(
        (lambda s: s.verdict == RIESZ and s.agree)(square_case(random_matrix(rng, 3, 3), riesz, grid))
        for _ in range(100)
    )
    kept_onb = sum(
        (lambda s: s.verdict == ONB and s.agree)(square_case(random_unitary(rng, 3), ident, grid))
        for _ in range(100)
    )
    singular_rejected = 0
    for field in (riesz, ident):
        for _ in range(10):
            S = random_matrix(rng, 3, 2) @ random_matrix(rng, 2, 3)
            res = square_case(S, field, grid)
            singular_rejected += res.verdict == "reject" and res.agree
    ok = kept_riesz == 100 and kept_onb == 100 and singular_rejected == 20
    return Criterion("9", "Square cases", ok,
                     f"Riesz kept {kept_riesz}/100, ONB kept {kept_onb}/100, "
                     f"singular rejected {singular_rejected}/20")


def _cli_outputs(threads, tmp):
    from .cli import main

    commands = [["classify", name] for name in BUILTIN_NAMES]
    commands += [
        ["classify", "example1", "--grid", "64"],
        ["certify", "example1", "--matrix", "[[-7, 1, 2], [1, 3, 1]]"],
        ["certify", "example2", "--matrix", "[[[0.6,0],[0.8,0]]]", "--method", "both"],
        ["certify", "paley-split", "--matrix", "[[1, 1]]"],
        ["scan", "example1", "--ell", "2", "--trials", "50", "--seed", "7"],
        ["scan", "example2", "--ell", "1", "--trials", "50", "--seed", "7"],
        ["profile", "example2", "--grid", "64", "--matrix", "[[[0.6,0],[0.8,0]]]",
         "--csv", os.path.join(tmp, f"profile-{threads}.csv")],
    ]
    saved = os.environ.get(THREADS_ENV)
    os.environ[THREADS_ENV] = str(threads)
    try:
        outs = []
        for argv in commands:
            buf = io.StringIO()
            with contextlib.redirect_stderr(io.StringIO()):
                code = main(argv, out=buf)
            text = buf.getvalue().replace(f"profile-{threads}.csv", "profile.csv")
            outs.append((code, text))
        with open(os.path.join(tmp, f"profile-{threads}.csv"), "rb") as fh:
            outs.append((0, fh.read()))
        return outs
    finally:
        if saved is None:
            os.environ.pop(THREADS_ENV, None)
        else:
            os.environ[THREADS_ENV] = saved


def check_10():
    with tempfile.TemporaryDirectory() as tmp:
        one = _cli_outputs(1, tmp)
        eight = _cli_outputs(8, tmp)
    same = sum(a == b for a, b in zip(one, eight))
    return Criterion("10", "Determinism across thread counts", same == len(one),
                     f"{same}/{len(one)} outputs byte-identical with 1 and 8 threads")


CRITERIA = {
    "1": check_1, "2": check_2, "3": check_3, "4": check_4, "4b": check_4b, "5": check_5,
    "6": check_6, "7": check_7, "8": check_8, "9": check_9, "10": check_10,
}


def run(name="all"):
    if name == "all":
        return [fn() for fn in CRITERIA.values()]
    if name not in CRITERIA:
        from .errors import UnknownScenario

        raise UnknownScenario(f"unknown criterion {name!r}; known: {', '.join(CRITERIA)}")
    return [CRITERIA[name]()]
