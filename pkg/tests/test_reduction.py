import numpy as np
import pytest
from hypothesis import given, settings

from frameforge.classify import FRAME, ONB, RIESZ, classify
from frameforge.errors import BadShape, NotAFrame, RankDrop, UnsupportedInputClass
from frameforge.linalg import DEFAULT_TOL, hermitian_eig, op_norm, projector_kernel, sigma_min_nonzero
from frameforge.reduction import (
    ACCEPT,
    REJECT,
    _sines_and_hits,
    angle_profile,
    certify,
    certify_analytic,
    certify_geometric,
    check_sandwich,
    in_R,
    kernel_shortcut,
    scan_generic,
    square_case,
)
from frameforge.reproduce import (
    example1_matrix,
    example2_matrix,
    example2_zeros,
    random_unitary,
    riesz_field,
    torus_distance,
)
from frameforge.scenarios import builtin, identity_field
from frameforge.subspace import Subspace, friedrichs_sin, from_image, from_kernel, intersect
from frameforge.sweep import grid_data
from frameforge.torus import SamplingGrid, conjugate

from conftest import EX1, cgauss, dims, random_psd, seeds


@pytest.fixture(scope="module")
def ex1():
    f = builtin("example1").field
    return f, SamplingGrid(1, 256)


@pytest.fixture(scope="module")
def ex2():
    f = builtin("example2").field
    return f, SamplingGrid(2, 256)


@pytest.fixture(scope="module")
def paley():
    f = builtin("paley-split").field
    return f, SamplingGrid(1, 256)


# --- Example 1 -----------------------------------------------------------------


def test_example1_kernel_parametrization(ex1):
    f, g = ex1
    A = example1_matrix(1.0, 0.0, 0.0, 1.0)
    cert = certify(A, f, g)
    assert cert.accepted and cert.methods_agree
    assert cert.delta_hat == pytest.approx(1.0)
    assert cert.gamma_hat <= 1e-12
    assert kernel_shortcut(A, f, g)


def test_example1_determinant_real(ex1):
    rng = np.random.default_rng(5)
    for _ in range(20):
        a, b, c, d = rng.standard_normal(4)
        A = example1_matrix(a, b, c, d)
        det = np.linalg.det(A @ EX1 @ A.conj().T).real
        assert det == pytest.approx(81 ** 3 * (a * d - b * c) ** 2, rel=1e-9)


def test_example1_determinant_complex_uses_modulus():
    rng = np.random.default_rng(6)
    for _ in range(20):
        a, b, c, d = rng.standard_normal(4) + 1j * rng.standard_normal(4)
        A = example1_matrix(a, b, c, d)
        det = np.linalg.det(A @ EX1 @ A.conj().T)
        assert abs(det.imag) <= 1e-9 * abs(det)
        assert det.real == pytest.approx(81 ** 3 * abs(a * d - b * c) ** 2, rel=1e-9)


def test_example1_dependent_rows(ex1):
    f, g = ex1
    ok, witness = in_R(example1_matrix(1.0, 2.0, 3.0, 6.0), f, g)
    assert not ok
    assert witness == [float(g.points()[0, 0])]


def test_identity_on_example1(ex1):
    f, g = ex1
    cert = certify_geometric(np.eye(3), f, g)
    assert cert.geometric_verdict == ACCEPT
    assert cert.delta_hat == 1.0


def test_zero_matrix_not_in_R(ex1):
    f, g = ex1
    ok, witness = in_R(np.zeros((2, 3)), f, g)
    assert not ok and witness == [float(g.points()[0, 0])]


def test_shape_errors(ex1):
    f, g = ex1
    with pytest.raises(BadShape):
        in_R(np.ones((1, 3)), f, g)  # fewer rows than the length
    with pytest.raises(BadShape):
        in_R(np.ones((2, 2)), f, g)
    with pytest.raises(BadShape):
        certify_analytic(np.eye(3), f, g)  # analytic criterion needs rows = length


def test_analytic_singular_AAstar(ex1):
    f, g = ex1
    A = np.array([[1.0, 2.0, 3.0], [2.0, 4.0, 6.0]])
    cert = certify_analytic(A, f, g)
    assert cert.analytic_verdict == REJECT
    assert "singular" in cert.reasons[0]


# --- Example 2 -----------------------------------------------------------------


def test_example2_rejected_near_an_analytic_zero(ex2):
    f, g = ex2
    rng = np.random.default_rng(8)
    for _ in range(5):
        theta, beta, beta_p = rng.uniform(0, np.pi / 2), rng.uniform(), rng.uniform()
        A = example2_matrix(theta, beta, beta_p)
        ok, _ = in_R(A, f, g)
        assert ok
        cert = certify(A, f, g)
        assert cert.geometric_verdict == REJECT and cert.analytic_verdict == REJECT
        assert cert.gamma_hat >= 0.99
        zeros = example2_zeros(theta, beta, beta_p)
        assert min(torus_distance(cert.argmin_omega, z) for z in zeros) <= 2 * g.cell


def test_example2_zero_set_has_four_points():
    f = builtin("example2").field
    theta, beta, beta_p = 0.4, 0.15, 0.6
    g = conjugate(f, example2_matrix(theta, beta, beta_p))
    for z in example2_zeros(theta, beta, beta_p):
        assert abs(g.evaluate(np.array([z]))[0, 0, 0]) <= 1e-14


def test_example2_profile_dips_at_witness(ex2):
    f, g = ex2
    theta = np.arctan2(0.8, 0.6)
    A = np.array([[np.cos(theta), np.sin(theta)]])
    prof = list(angle_profile(A, f, g))
    assert len(prof) == g.size
    w, s = min(prof, key=lambda p: p[1])
    assert s <= 0.1
    assert min(torus_distance(w, z) for z in example2_zeros(theta, 0, 0)) <= 2 * g.cell


def test_example2_kernel_shortcut_false(ex2):
    f, g = ex2
    assert not kernel_shortcut(np.array([[0.6, 0.8]]), f, g)


# --- Paley-Wiener split --------------------------------------------------------


def test_paley_split(paley):
    f, g = paley
    cert = certify(np.array([[1.0, 1.0]]), f, g)
    assert cert.accepted
    assert cert.delta_hat == pytest.approx(1 / np.sqrt(2), abs=1e-9)
    assert cert.gamma_hat == pytest.approx(1 / np.sqrt(2), abs=1e-9)
    assert all(s == pytest.approx(1 / np.sqrt(2)) for _, s in angle_profile(np.array([[1.0, 1.0]]), f, g))
    ok, witness = in_R(np.array([[1.0, 0.0]]), f, g)
    assert not ok and -0.5 <= witness[0] < 0


def test_not_a_frame_rejected():
    f = builtin("bessel-not-frame").field
    g = SamplingGrid(1, 64)
    with pytest.raises(NotAFrame):
        certify_geometric(np.array([[1.0]]), f, g)
    with pytest.raises(NotAFrame):
        certify_analytic(np.array([[1.0]]), f, g)


def test_bessel_degradation():
    f = builtin("bessel-not-frame").field
    g = SamplingGrid(1, 128)
    rng = np.random.default_rng(9)
    for _ in range(10):
        assert classify(conjugate(f, cgauss(rng, 1, 1)), g).verdict not in (FRAME, RIESZ, ONB)


# --- pointwise identities ----------------------------------------------------


def _instance(rng, m):
    r = int(rng.integers(1, m + 1))
    G = random_psd(rng, m, r)
    A = cgauss(rng, int(rng.integers(r, m + 1)), m)
    if A.shape[0] < m and rng.random() < 0.5:
        u = G @ cgauss(rng, m, 1)
        u /= np.linalg.norm(u)
        A = A - (A @ u) @ u.conj().T
    return G, A


@settings(max_examples=150, deadline=None)
@given(seeds, dims)
def test_rank_equality_iff_trivial_intersection(seed, m):
    G, A = _instance(np.random.default_rng(seed), max(m, 2))
    H = A @ G @ A.conj().T
    rank_eq = hermitian_eig(H).rank == hermitian_eig(G).rank
    trivial = intersect(from_kernel(A), from_image(G)).dim == 0
    assert rank_eq == trivial


@settings(max_examples=150, deadline=None)
@given(seeds, dims)
def test_sandwich_and_kernel_equality(seed, m):
    G, A = _instance(np.random.default_rng(seed), max(m, 2))
    H = A @ G @ A.conj().T
    if hermitian_eig(H).rank != hermitian_eig(G).rank:
        with pytest.raises(RankDrop):
            check_sandwich(A, G)
        return
    lo, mid, hi = check_sandwich(A, G)
    assert lo <= mid + 1e-9 * max(1, mid)
    assert mid <= hi + 1e-9 * max(1, hi)
    assert op_norm(projector_kernel(A @ G) - projector_kernel(G)) <= 1e-6


def test_sandwich_lower_bound_formula():
    # orthonormal A with Ker(A) orthogonal to Im(G): all three quantities agree
    G = np.diag([2.0, 3.0, 0.0])
    A = np.array([[1.0, 0, 0], [0, 1.0, 0]])
    assert check_sandwich(A, G) == pytest.approx((2.0, 2.0, 3.0))


def test_batched_sines_match_scalar(ex2):
    f, g = ex2
    data = grid_data(f, SamplingGrid(2, 16))
    rng = np.random.default_rng(10)
    for _ in range(5):
        A = cgauss(rng, 1, 2)
        K = from_kernel(A).basis
        sines, hits = _sines_and_hits(K, data, DEFAULT_TOL)
        for i in range(data.size):
            U = data.image_bases([i])[0]
            assert sines[i] == pytest.approx(friedrichs_sin(Subspace(2, K), Subspace(2, U)), abs=1e-12)


def test_membership_scale_invariant(ex2):
    f, g = ex2
    A = np.array([[0.6, 0.8j]])
    assert in_R(A, f, g) == in_R(1e-6 * A, f, g) == in_R(1e6 * A, f, g)


# --- frame-bound inheritance ---------------------------------------------------


@pytest.mark.parametrize("name,rows", [("example1", 2), ("example1", 3), ("paley-split", 1), ("paley-split", 2)])
def test_bound_inheritance(name, rows):
    f = builtin(name).field
    g = SamplingGrid(1, 128)
    base = classify(f, g)
    rng = np.random.default_rng(11)
    for _ in range(5):
        A = cgauss(rng, rows, f.size)
        cert = certify_geometric(A, f, g)
        if cert.geometric_verdict != ACCEPT:
            continue
        after = classify(conjugate(f, A), g)
        assert after.is_frame
        assert after.alpha_hat >= sigma_min_nonzero(A) ** 2 * base.alpha_hat * cert.delta_hat ** 2 - 1e-9
        assert after.beta_hat <= op_norm(A) ** 2 * base.beta_hat + 1e-9


# --- square cases --------------------------------------------------------------


def test_square_riesz_and_onb():
    rng = np.random.default_rng(12)
    riesz, ident = riesz_field(), identity_field(3)
    g = SamplingGrid(1, 64)
    for _ in range(5):
        r = square_case(cgauss(rng, 3, 3), riesz, g)
        assert r.verdict == RIESZ and r.agree and r.invertible
        u = square_case(random_unitary(rng, 3), ident, g)
        assert u.verdict == ONB and u.agree and u.unitary
    nonunitary = square_case(np.diag([1.0, 2.0, 1.0]), ident, g)
    assert nonunitary.verdict == RIESZ and nonunitary.agree


def test_square_singular_rejected():
    g = SamplingGrid(1, 64)
    S = np.array([[1.0, 0, 0], [0, 1.0, 0], [1.0, 1.0, 0]])
    for field in (riesz_field(), identity_field(3)):
        r = square_case(S, field, g)
        assert r.verdict == "reject" and not r.invertible and r.agree


def test_square_unsupported_input():
    with pytest.raises(UnsupportedInputClass):
        square_case(np.eye(3), builtin("example1").field, SamplingGrid(1, 32))
    with pytest.raises(BadShape):
        square_case(np.eye(2), identity_field(3), SamplingGrid(1, 32))


def test_square_invertible_on_riesz_gamma_zero():
    f, g = riesz_field(), SamplingGrid(1, 64)
    cert = certify_analytic(cgauss(np.random.default_rng(13), 3, 3), f, g)
    assert cert.gamma_hat <= 1e-9 and cert.analytic_verdict == ACCEPT


# --- genericity ----------------------------------------------------------------


def test_scan_small(ex1, ex2):
    r1 = scan_generic(ex1[0], 2, 40, 7, ex1[1])
    assert (r1.in_R_count, r1.frame_preserving_count) == (40, 40)
    r2 = scan_generic(ex2[0], 1, 20, 7, ex2[1])
    assert (r2.in_R_count, r2.frame_preserving_count) == (20, 0)
    assert r2.to_dict() == {"trials": 20, "inRCount": 20, "framePreservingCount": 0, "seed": 7}


def test_scan_empty_and_shape(ex1):
    f, g = ex1
    assert scan_generic(f, 2, 0, 1, g).to_dict()["inRCount"] == 0
    with pytest.raises(BadShape):
        scan_generic(f, 1, 5, 1, g)


def test_scan_deterministic(ex2):
    f, g = ex2
    a = scan_generic(f, 1, 8, 3, g)
    b = scan_generic(builtin("example2").field, 1, 8, 3, g)
    assert a == b


def test_certificate_json_keys(paley):
    f, g = paley
    d = certify(np.array([[1.0, 1.0]]), f, g).to_dict()
    for key in ("inR", "deltaHat", "gammaHat", "geometricVerdict", "analyticVerdict",
                "argminOmega", "derivedBounds"):
        assert key in d
    assert d["derivedBounds"]["holds"]
