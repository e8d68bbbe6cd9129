import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import sph_harm_y
from scipy.spatial.transform import Rotation

from specnorm.errors import ConfigError, InvalidSpec, QuadratureFailure, ResolutionTooLow
from specnorm.sphere import harmonics as hm
from specnorm.sphere import rotations as rt
from specnorm.sphere import zonal as zn
from specnorm.sphere.report import verify_sphere_theorem

ROT = rt.default_rotation_set()


def unit(rng, k):
    x = rng.normal(size=(k, 3))
    return x / np.linalg.norm(x, axis=1, keepdims=True)


# -- Legendre and zonal ------------------------------------------------------


def test_legendre_low_degrees():
    x = np.linspace(-1, 1, 11)
    np.testing.assert_allclose(hm.legendre(0, x), 1.0)
    np.testing.assert_allclose(hm.legendre(1, x), x)


@pytest.mark.parametrize("s", [0, 5, 200])
def test_zonal_at_zero(s):
    assert hm.zonal(s, 0.0)[0] == pytest.approx((2 * s + 1) / (4 * math.pi))


@pytest.mark.parametrize("s", [50, 100, 200, 400])
def test_zonal_decay_bound(s):
    assert zn.zonal_bound_constant(s) <= 1.0


@pytest.mark.parametrize("s", [3, 40, 150])
def test_zonal_l2_identity(s):
    assert zn.zonal_l2_identity_gap(s) <= 1e-9


# -- harmonics and quadrature ------------------------------------------------


def test_harmonics_match_scipy():
    rng = np.random.default_rng(0)
    pts = unit(rng, 20)
    theta, phi = hm.to_angles(pts)
    for s in (0, 1, 4, 13):
        Y = hm.sph_harm_matrix(s, pts)
        ref = np.stack([sph_harm_y(s, m, theta, phi) for m in range(-s, s + 1)], axis=1)
        np.testing.assert_allclose(Y, ref, atol=1e-12)


def test_grid_weights_total():
    for nt, nph in [(3, 5), (40, 81), (101, 300)]:
        assert hm.SphereGrid(nt, nph).weights().sum() == pytest.approx(4 * math.pi, abs=1e-10)


def test_quadrature_orthonormality():
    grid = hm.SphereGrid.exact_for(120)
    pts, w = grid.points(), grid.weights().ravel()
    degrees = [0, 1, 7, 30, 59, 60]
    Ys = {s: hm.sph_harm_matrix(s, pts) for s in degrees}
    for s in degrees:
        for t in degrees:
            G = (Ys[s].conj().T * w) @ Ys[t]
            expect = np.eye(2 * s + 1) if s == t else 0.0
            assert np.max(np.abs(G - expect)) <= 1e-10


def test_quadrature_exact_degree():
    grid = hm.SphereGrid(10, 20)
    assert grid.exact_degree == 19
    pts, w = grid.points(), grid.weights().ravel()
    # product of two degree-9 harmonics integrates exactly; its square (degree 36) does not need to
    Y = hm.sph_harm_matrix(9, pts)
    np.testing.assert_allclose((Y.conj().T * w) @ Y, np.eye(19), atol=1e-12)


def test_real_basis_transform_unitary():
    U = hm.real_basis_transform(4)
    np.testing.assert_allclose(U @ U.conj().T, np.eye(9), atol=1e-14)
    rng = np.random.default_rng(2)
    real_vals = hm.sph_harm_matrix(4, unit(rng, 7)) @ U.T
    assert np.max(np.abs(real_vals.imag)) < 1e-13


# -- L^p norms ---------------------------------------------------------------


@pytest.mark.parametrize("p", [3, 7.5, 10, math.inf])
def test_constant_norm(p):
    expect = (4 * math.pi) ** ((0 if math.isinf(p) else 1 / p) - 0.5)
    assert hm.lp_norm_sphere([1.0], p) == pytest.approx(expect, rel=1e-10)


@settings(max_examples=15, deadline=None)
@given(s=st.integers(0, 25), seed=st.integers(0, 2**32))
def test_unit_vectors_have_unit_l2(s, seed):
    rng = np.random.default_rng(seed)
    c = rng.normal(size=2 * s + 1) + 1j * rng.normal(size=2 * s + 1)
    c /= np.linalg.norm(c)
    assert hm.lp_norm_sphere(c, 2) == pytest.approx(1.0, abs=1e-9)


@pytest.mark.parametrize("s", [1, 10, 60])
def test_zonal_sup_ratio(s):
    e0 = np.zeros(2 * s + 1)
    e0[s] = 1.0
    assert hm.lp_norm_sphere(e0, math.inf) == pytest.approx(math.sqrt((2 * s + 1) / (4 * math.pi)), rel=1e-9)


def test_even_p_matches_1d_quadrature():
    s, p = 20, 10
    e0 = np.zeros(2 * s + 1)
    e0[s] = 1.0
    radial = zn.radial_norm(lambda t: hm.zonal(s, t), p, zn._breaks(s), rtol=1e-12)
    assert hm.lp_norm_sphere(e0, p) == pytest.approx(radial / math.sqrt((2 * s + 1) / (4 * math.pi)), rel=1e-9)


def test_sup_polish_never_lowers():
    rng = np.random.default_rng(3)
    c = rng.normal(size=21)
    c /= np.linalg.norm(c)
    raw = hm.lp_norm_sphere(c, math.inf, refine=False)
    assert hm.lp_norm_sphere(c, math.inf) >= raw
    dense = np.abs(hm.grid_values(10, c, hm.SphereGrid(400, 800))).max()
    assert hm.lp_norm_sphere(c, math.inf) >= dense - 1e-9


def test_resolution_too_low():
    c = np.zeros(21)
    c[10] = 1
    with pytest.raises(ResolutionTooLow):
        hm.lp_norm_sphere(c, 10, grid=hm.SphereGrid(20, 60))


def test_many_matches_single():
    rng = np.random.default_rng(4)
    V = rng.normal(size=(15, 4)) + 1j * rng.normal(size=(15, 4))
    V /= np.linalg.norm(V, axis=0)
    many = hm.lp_norms_many(V, 12)
    for k in range(4):
        assert many[k] == pytest.approx(hm.lp_norm_sphere(V[:, k], 12), rel=1e-12)


# -- reproducing kernel ------------------------------------------------------


def test_reproduce_constant():
    assert hm.reproduce_check(0) <= 1e-14


@pytest.mark.parametrize("s", [1, 10, 50])
def test_reproduce(s):
    assert hm.reproduce_check(s) <= 1e-8
    assert hm.reproduce_check(s, s_prime=s - 1) <= 1e-8
    assert hm.reproduce_check(s, s_prime=s + 3) <= 1e-8


def test_reproduce_needs_exact_grid():
    with pytest.raises(ResolutionTooLow):
        hm.reproduce_check(10, grid=hm.SphereGrid(5, 11))


# -- Wigner D ----------------------------------------------------------------


def _fact_formula(j, mp, m, beta):
    total = 0.0
    f = math.factorial
    c, s = math.cos(beta / 2), math.sin(beta / 2)
    for k in range(max(0, m - mp), min(j + m, j - mp) + 1):
        num = (-1) ** (k - m + mp) * math.sqrt(f(j + m) * f(j - m) * f(j + mp) * f(j - mp))
        den = f(j + m - k) * f(k) * f(j - k - mp) * f(k - m + mp)
        total += num / den * c ** (2 * j - 2 * k + m - mp) * s ** (2 * k - m + mp)
    return total


@pytest.mark.parametrize("j", [1, 2, 5])
@pytest.mark.parametrize("beta", [0.3, 1.7, 3.0])
def test_small_d_factorial_oracle(j, beta):
    d = rt.wigner_small_d(j, beta)
    for mp in range(-j, j + 1):
        for m in range(-j, j + 1):
            assert d[mp + j, m + j] == pytest.approx(_fact_formula(j, mp, m, beta), abs=1e-12)


def test_wigner_identity_and_z_rotation():
    np.testing.assert_allclose(rt.wigner_D(6, np.eye(3)), np.eye(13), atol=1e-13)
    phi = 0.77
    D = rt.wigner_D(3, rt.rot_z(phi))
    np.testing.assert_allclose(D, np.diag(np.exp(-1j * np.arange(-3, 4) * phi)), atol=1e-13)


def test_wigner_s1_cartesian_oracle():
    # Y_1^m(x) = c u_m . x, so D = U^{-1} R U with U = [u_{-1}, u_0, u_1]
    r2 = 1 / math.sqrt(2)
    U = np.array([[r2, 0, -r2], [-1j * r2, 0, -1j * r2], [0, 1, 0]])
    R = rt.exact_to_float(ROT.generators[1])  # x-axis rotation with cos = 3/5
    np.testing.assert_allclose(rt.wigner_D(1, R), np.linalg.inv(U) @ R @ U, atol=1e-13)


def test_wigner_action_on_functions():
    rng = np.random.default_rng(5)
    x = unit(rng, 25)
    for s in (2, 9):
        R = Rotation.random(random_state=s).as_matrix()
        lhs = hm.sph_harm_matrix(s, x @ R)  # rows R^{-1} x
        np.testing.assert_allclose(lhs, hm.sph_harm_matrix(s, x) @ rt.wigner_D(s, R), atol=1e-12)


@pytest.mark.parametrize("R", [rt.rot_y(math.pi), rt.rot_z(0.4) @ rt.rot_y(math.pi) @ rt.rot_z(1.0),
                               rt.rot_z(2.0), rt.rot_y(1e-14)])
def test_wigner_gimbal_cases(R):
    rng = np.random.default_rng(6)
    x = unit(rng, 10)
    lhs = hm.sph_harm_matrix(4, x @ R)
    np.testing.assert_allclose(lhs, hm.sph_harm_matrix(4, x) @ rt.wigner_D(4, R), atol=1e-11)


def test_euler_round_trip():
    for seed in range(10):
        R = Rotation.random(random_state=seed).as_matrix()
        a, b, c = rt.euler_zyz(R)
        np.testing.assert_allclose(rt.rot_z(a) @ rt.rot_y(b) @ rt.rot_z(c), R, atol=1e-13)


@pytest.mark.parametrize("s", [10, 60, 100])
def test_wigner_representation(s):
    rng = np.random.default_rng(s)
    words = rt.enumerate_words(ROT, 3)
    for _ in range(50 if s < 100 else 10):
        a, b = (words[k].matrix() for k in rng.integers(len(words), size=2))
        Da, Db = rt.wigner_D(s, a), rt.wigner_D(s, b)
        assert np.max(np.abs(rt.wigner_D(s, a @ b) - Da @ Db)) <= 1e-8
        assert np.max(np.abs(Da @ Da.conj().T - np.eye(2 * s + 1))) <= 1e-10


# -- rotation sets and averaging ---------------------------------------------


def test_default_set():
    assert ROT.M == 2 and ROT.q == 3
    assert ROT.generators[0][0] == Fraction(3, 5)


def test_invalid_rotation_sets():
    with pytest.raises(InvalidSpec):
        rt.rotation_set_from_strings([["1", "1", "0", "0", "1", "0", "0", "0", "1"]])
    with pytest.raises(InvalidSpec):  # reflection
        rt.rotation_set_from_strings([["-1", "0", "0", "0", "1", "0", "0", "0", "1"]])
    with pytest.raises(InvalidSpec):  # g and g^{-1} coincide
        rt.rotation_set_from_strings([["1", "0", "0", "0", "-1", "0", "0", "0", "-1"]])
    with pytest.raises(ConfigError):
        rt.rotation_set_from_strings([["1/0"] * 9])


def test_load_rotation_set(tmp_path):
    path = tmp_path / "rot.toml"
    path.write_text(
        'label = "pair"\n'
        '[[rotation]]\nmatrix = ["3/5", "-4/5", "0", "4/5", "3/5", "0", "0", "0", "1"]\n'
        '[[rotation]]\nmatrix = [["1", "0", "0"], ["0", "3/5", "-4/5"], ["0", "4/5", "3/5"]]\n'
    )
    rot = rt.load_rotation_set(path)
    assert rot.generators == ROT.generators and rot.label == "pair"
    bad = tmp_path / "bad.toml"
    bad.write_text("label = 'x'\n")
    with pytest.raises(ConfigError):
        rt.load_rotation_set(bad)


def test_averaging_s0():
    space = rt.build_averaging(0, ROT)
    assert space.averaging.shape == (1, 1)
    assert space.averaging[0, 0].real == pytest.approx(4 / math.sqrt(3))
    basis = rt.joint_eigenbasis(space)
    assert basis.eigenvalues[0] == pytest.approx(4 / math.sqrt(3))


@pytest.mark.parametrize("s", [1, 5, 30])
def test_averaging_hermitian_and_bounded(s):
    space = rt.build_averaging(s, ROT)
    A = space.averaging
    assert np.max(np.abs(A - A.conj().T)) <= 1e-10
    lam = np.linalg.eigvalsh(A)
    assert np.max(np.abs(lam)) <= 4 / math.sqrt(3) + 1e-8
    basis = rt.joint_eigenbasis(space)
    assert basis.residual <= 1e-9
    V = basis.vectors
    np.testing.assert_allclose(V.conj().T @ V, np.eye(2 * s + 1), atol=1e-10)


def test_averaging_conjugation_oracle():
    c, s = Fraction(5, 13), Fraction(12, 13)
    R = (c, 0, s, 0, 1, 0, -s, 0, c)
    conj = tuple(rt.exact_matmul(rt.exact_matmul(R, g), rt.exact_transpose(R)) for g in ROT.generators)
    rot2 = rt.RotationSet(conj)
    for deg in (3, 12):
        A = rt.build_averaging(deg, ROT).averaging
        B = rt.build_averaging(deg, rot2).averaging
        D = rt.wigner_D(deg, rt.exact_to_float(R))
        np.testing.assert_allclose(B, D @ A @ D.conj().T, atol=1e-10)
        np.testing.assert_allclose(np.linalg.eigvalsh(A), np.linalg.eigvalsh(B), atol=1e-8)


def test_real_basis_diagonalization_s2():
    A = rt.build_averaging(2, ROT).averaging
    U = hm.real_basis_transform(2)
    Ar = U @ A @ U.conj().T
    assert np.max(np.abs(Ar.imag)) < 1e-12
    np.testing.assert_allclose(np.linalg.eigvalsh(Ar.real), np.linalg.eigvalsh(A), atol=1e-12)


# -- words and separation ----------------------------------------------------


@pytest.mark.parametrize("n,count", [(0, 1), (1, 4), (2, 12), (3, 36), (6, 972)])
def test_word_counts(n, count):
    assert len(rt.enumerate_words(ROT, n)) == count == (1 if n == 0 else 4 * 3 ** (n - 1))


def test_words_distinct_and_reduced():
    for n in range(1, 9):
        words = rt.enumerate_words(ROT, n)
        assert len({(w.numerators, w.denominator) for w in words}) == len(words)
        for w in words:
            assert all(a.swapcase() != b for a, b in zip(w.label, w.label[1:]))


def test_word_matrices_exact():
    w = next(w for w in rt.enumerate_words(ROT, 3) if w.label == "abA")
    g, h = ROT.generators
    expect = rt.exact_matmul(rt.exact_matmul(g, h), rt.exact_transpose(g))
    assert w.exact() == expect


def test_pole_fixed_by_z_powers():
    pole = [0.0, 0.0, 1.0]
    for n in range(1, 7):
        fixed = [w.label for w in rt.enumerate_words(ROT, n) if rt.fixes_point(w, pole)]
        assert sorted(fixed) == sorted(["a" * n, "A" * n])


def test_generator_power_angles():
    base = math.acos(3 / 5)
    for n in range(1, 9):
        w = next(w for w in rt.enumerate_words(ROT, n) if w.label == "a" * n)
        ang = (n * base) % (2 * math.pi)
        assert rt.rotation_angle(w) == pytest.approx(min(ang, 2 * math.pi - ang), abs=1e-12)


def test_separation_generic_points():
    rng = np.random.default_rng(7)
    st_ = rt.separation_stats(ROT, 6, rng.normal(size=(100, 3)), [1e-3])
    assert st_.ok and st_.max_close_words <= 2
    assert st_.num_words == 972
    assert st_.sorted_distances.shape == (100, 972)
    assert st_.fit_constant > 1


def test_separation_at_pole():
    st_ = rt.separation_stats(ROT, 5, [[0, 0, 1]], [1e-6])
    assert st_.close_counts == [2]


def test_primitive_root_and_inverse():
    assert rt.primitive_root("abab") == "ab"
    assert rt.primitive_root("aba") == "aba"
    assert rt.inverse_label("aB") == "bA"


def test_exact_axis_half_turn():
    half = rt.Word("h", (1, 0, 0, 0, -1, 0, 0, 0, -1), 1)
    v = rt.exact_axis(half)
    assert rt.fixes_exactly(half, v) and v[1] == v[2] == 0


def test_stabilizers_cyclic_default():
    rows = rt.stabilizer_probe(ROT, axis_length=3, n=6)
    assert rows and all(r.ok for r in rows)
    assert rows[0].fixers == sorted(["a" * k for k in range(1, 7)] + ["A" * k for k in range(1, 7)])


def test_stabilizer_probe_detects_shared_axis():
    # two z-rotations: b fixes the axis of a, so the stabilizer is not generated by a
    shared = rt.rotation_set_from_strings([
        ["3/5", "-4/5", "0", "4/5", "3/5", "0", "0", "0", "1"],
        ["5/13", "-12/13", "0", "12/13", "5/13", "0", "0", "0", "1"],
    ])
    rows = rt.stabilizer_probe(shared, axis_length=1, n=3)
    assert not rows[0].ok and "b" in rows[0].fixers


# -- zonal kernel splitting --------------------------------------------------


def test_window_partition():
    s = 100
    t = np.linspace(0, math.pi, 5001)
    z1, z2, z3, z = zn.zonal_pieces(s, t)
    np.testing.assert_allclose(z1 + z2 + z3, z, atol=1e-12)
    a, b = zn.window_scales(s)
    assert np.all(z1[t <= a] == z[t <= a])
    assert np.all(z1[t >= b] == 0)


def test_window_shape():
    w = zn.smoothstep_window(np.array([0.0, 0.1, 0.15, 0.2, 0.3]), 0.1, 0.2)
    np.testing.assert_allclose(w, [1.0, 1.0, 0.5, 0.0, 0.0], atol=1e-15)


def test_adaptive_integrate_known():
    val = zn.adaptive_integrate(lambda t: np.sin(50 * t) ** 2, [0, math.pi], rtol=1e-10)
    assert val == pytest.approx(math.pi / 2, rel=1e-10)


def test_adaptive_integrate_failure():
    with pytest.raises(QuadratureFailure):
        zn.adaptive_integrate(lambda t: np.abs(np.sin(1e4 * t)), [0, 1], rtol=1e-14, max_rounds=2)


def test_split_norms_order():
    r = zn.kernel_split_norms(60, 10)
    assert r.full > 0 and r.near <= r.full * 1.5
    assert r.tail <= r.tail_near <= r.full
    with pytest.raises(ValueError):
        zn.kernel_split_norms(60, 4)


def test_averaged_probe_degenerates_at_n0():
    rep = zn.averaged_kernel_probe(ROT, 40, 0, 10, [[0.3, 0.2, 0.9]], copy_mass=False)
    row = rep.rows[0]
    assert rep.num_words == 1
    assert row.full == pytest.approx(rep.split.full, rel=1e-3)
    assert row.near == pytest.approx(rep.split.near, rel=1e-3)
    assert row.middle == pytest.approx(rep.split.middle, rel=1e-3)


def test_averaged_probe_copy_mass():
    rep = zn.averaged_kernel_probe(ROT, 30, 2, 10, [[0.1, -0.5, 0.8]])
    row = rep.rows[0]
    # each of the (q+1) q^{n-1} words contributes one full copy of ||Z_s||_1
    assert row.copy_mass == pytest.approx(rep.mass_prediction_words, rel=1e-3)
    assert row.copy_mass > rep.mass_prediction_plain * 1.2
    assert row.row_l1 <= row.copy_mass * (1 + 1e-9)


def test_averaged_probe_near_piece():
    rng = np.random.default_rng(8)
    rep = zn.averaged_kernel_probe(ROT, 200, 2, 10, unit(rng, 1), copy_mass=False)
    ratio = rep.rows[0].near_ratio
    assert 0.25 <= ratio <= 4.0


# -- theorem report ----------------------------------------------------------


def test_verify_sphere_small():
    rep = verify_sphere_theorem(None, [6, 12, 24], [2, 10, math.inf])
    by = {(r["s"], r["p"]): r for r in rep.table()}
    for s in (6, 12, 24):
        assert by[(s, 2.0)]["max_joint_norm"] == pytest.approx(1.0, abs=1e-9)
        assert by[(s, 2.0)]["joint_ratio"] == pytest.approx(math.sqrt(s), rel=1e-9)
        z = by[(s, math.inf)]["zonal_ratio"]
        assert z == pytest.approx(math.sqrt((2 * s + 1) / (4 * math.pi * s)), rel=1e-9)
        assert by[(s, 10.0)]["below_zonal"] and by[(s, math.inf)]["below_zonal"]
    for info in rep.spaces:
        assert info.eigen_residual <= 1e-9 and info.hermitian_gap <= 1e-10
