import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hamoeba import mat2

from conftest import random_hermitian


def test_det_identity():
    assert mat2.det(np.eye(2, dtype=complex)) == 1.0


def test_det_direct_expansion():
    a = np.array([[2, 1], [1, 1]], dtype=complex)
    assert mat2.det(a) == 1.0


def test_det_multiplicative_on_random_pairs(rng):
    a = rng.standard_normal((2000, 2, 2)) + 1j * rng.standard_normal((2000, 2, 2))
    b = rng.standard_normal((2000, 2, 2)) + 1j * rng.standard_normal((2000, 2, 2))
    lhs = mat2.det(a @ b)
    rhs = mat2.det(a) * mat2.det(b)
    assert np.all(np.abs(lhs - rhs) <= 1e-12 * np.maximum(np.abs(rhs), 1.0))


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_det_multiplicative_property(seed):
    g = np.random.default_rng(seed)
    a = g.standard_normal((2, 2)) + 1j * g.standard_normal((2, 2))
    b = g.standard_normal((2, 2)) + 1j * g.standard_normal((2, 2))
    assert abs(mat2.det(a @ b) - mat2.det(a) * mat2.det(b)) <= 1e-12 * max(
        1.0, abs(mat2.det(a) * mat2.det(b))
    )


def test_adjugate_inverts_det1(rng):
    a = mat2.random_sl2(rng, 100)
    prod = mat2.adjugate(a) @ a
    assert np.abs(prod - np.eye(2)).max() < 1e-10


class TestHermEigen:
    def test_diagonal_case(self):
        lam_hi, lam_lo, u = mat2.herm_eigen(np.diag([4.0, 0.25]).astype(complex))
        assert lam_hi == 4.0 and lam_lo == 0.25
        assert np.allclose(u, [1, 0])

    def test_characteristic_polynomial_example(self):
        # lambda^2 - 4 lambda + 3 = 0 for [[2, i], [-i, 2]]
        h = np.array([[2, 1j], [-1j, 2]])
        lam_hi, lam_lo, u = mat2.herm_eigen(h)
        assert lam_hi == pytest.approx(3.0, abs=1e-14)
        assert lam_lo == pytest.approx(1.0, abs=1e-14)
        assert np.linalg.norm(h @ u - lam_hi * u) <= 1e-10

    def test_residual_on_random_hermitian(self, rng):
        h = random_hermitian(rng, 5000)
        lam_hi, lam_lo, u = mat2.herm_eigen(h)
        resid = np.abs(np.einsum("nij,nj->ni", h, u) - lam_hi[:, None] * u).max()
        assert resid <= 1e-10

    def test_trace_and_det_identities(self, rng):
        h = random_hermitian(rng, 5000)
        lam_hi, lam_lo, _ = mat2.herm_eigen(h)
        tr = h[:, 0, 0].real + h[:, 1, 1].real
        assert np.abs(lam_hi + lam_lo - tr).max() <= 1e-10 * np.abs(tr).max()
        dets = mat2.det(h).real
        assert np.abs(lam_hi * lam_lo - dets).max() <= 1e-9 * np.abs(dets).max()

    def test_matches_lapack(self, rng):
        h = random_hermitian(rng, 2000)
        lam_hi, lam_lo, _ = mat2.herm_eigen(h)
        ev = np.linalg.eigvalsh(h)
        assert np.abs(lam_hi - ev[:, 1]).max() <= 1e-12 * (1 + np.abs(ev).max())
        assert np.abs(lam_lo - ev[:, 0]).max() <= 1e-12 * (1 + np.abs(ev).max())

    def test_extreme_conditioning(self):
        # the small eigenvalue must survive condition numbers ~1e70
        p = np.diag([np.exp(80.0), np.exp(-80.0)]).astype(complex)
        lam_hi, lam_lo, _ = mat2.herm_eigen(p)
        assert lam_hi == pytest.approx(np.exp(80.0), rel=1e-14)
        assert lam_lo == pytest.approx(np.exp(-80.0), rel=1e-12)

    def test_degenerate_gap_convention(self):
        _, _, u = mat2.herm_eigen(np.eye(2, dtype=complex))
        assert np.array_equal(u, [1.0 + 0j, 0.0 + 0j])

    def test_rejects_non_hermitian(self):
        with pytest.raises(ValueError):
            mat2.herm_eigen(np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex))


class TestSpdPower:
    def test_diagonal_square_root(self):
        p = np.diag([np.e**2, np.e**-2]).astype(complex)
        q = mat2.spd_power(p, 0.5)
        assert np.abs(np.diag(q).real - [np.e, 1 / np.e]).max() < 1e-14

    def test_identity_fixed_for_any_power(self, rng):
        for t in rng.uniform(-3, 3, 5):
            assert np.abs(mat2.spd_power(np.eye(2, dtype=complex), t) - np.eye(2)).max() < 1e-14

    def test_power_one_and_zero(self, rng):
        from conftest import random_spd_det1

        p = random_spd_det1(rng, 50)
        assert np.abs(mat2.spd_power(p, 1.0) - p).max() < 1e-10
        assert np.abs(mat2.spd_power(p, 0.0) - np.eye(2)).max() < 1e-12

    def test_semigroup_law(self, rng):
        from conftest import random_spd_det1

        p = random_spd_det1(rng, 200)
        s, t = 0.7, -1.3
        lhs = mat2.spd_power(mat2.spd_power(p, s), t)
        rhs = mat2.spd_power(p, s * t)
        assert np.abs(lhs - rhs).max() <= 1e-10

    def test_inverse_law(self, rng):
        from conftest import random_spd_det1

        p = random_spd_det1(rng, 200)
        prod = mat2.spd_power(p, -1.0) @ p
        assert np.abs(prod - np.eye(2)).max() <= 1e-10

    @settings(max_examples=100, deadline=None)
    @given(st.floats(0.1, 3.0), st.floats(-2.0, 2.0), st.floats(-2.0, 2.0))
    def test_semigroup_property(self, r, s, t):
        p = np.diag([np.exp(r), np.exp(-r)]).astype(complex)
        lhs = mat2.spd_power(mat2.spd_power(p, s), t)
        rhs = mat2.spd_power(p, s * t)
        assert np.abs(lhs - rhs).max() <= 1e-10 * max(1.0, np.abs(rhs).max())

    def test_rejects_non_spd(self):
        with pytest.raises(ValueError):
            mat2.spd_power(np.diag([1.0, -1.0]).astype(complex), 0.5)


class TestSvd2:
    def test_diagonal_case(self):
        s1, s2, u = mat2.svd2(np.diag([3.0, 1 / 3.0]).astype(complex))
        assert s1 == pytest.approx(3.0, rel=1e-14)
        assert s2 == pytest.approx(1 / 3.0, rel=1e-14)
        assert np.allclose(u, [1, 0])

    def test_unitary_case(self, rng):
        u = mat2.haar_su2(rng, 100)
        s1, s2, _ = mat2.svd2(u)
        assert np.abs(s1 - 1).max() < 1e-12 and np.abs(s2 - 1).max() < 1e-12

    def test_det1_product_identity(self, rng):
        a = mat2.random_sl2(rng, 2000)
        s1, s2, _ = mat2.svd2(a)
        assert np.abs(s1 * s2 - 1.0).max() <= 1e-10

    def test_matches_lapack(self, rng):
        a = rng.standard_normal((2000, 2, 2)) + 1j * rng.standard_normal((2000, 2, 2))
        s1, s2, _ = mat2.svd2(a)
        ref = np.linalg.svd(a, compute_uv=False)
        assert np.abs(s1 - ref[:, 0]).max() <= 1e-10 * ref[:, 0].max()

    def test_dominates_spectral_radius(self, rng):
        a = rng.standard_normal((100000, 2, 2)) + 1j * rng.standard_normal((100000, 2, 2))
        s1, _, _ = mat2.svd2(a)
        rho = np.abs(np.linalg.eigvals(a)).max(axis=1)
        assert np.all(s1 >= rho - 1e-10 * np.maximum(rho, 1.0))

    def test_rejects_zero_matrix(self):
        with pytest.raises(ValueError):
            mat2.svd2(np.zeros((2, 2), dtype=complex))


class TestHaar:
    def test_unitary_and_unimodular(self, rng):
        u = mat2.haar_su2(rng, 1000)
        gram = u @ np.conj(np.swapaxes(u, -1, -2))
        assert np.abs(gram - np.eye(2)).max() <= 1e-12
        assert np.abs(mat2.det(u) - 1.0).max() <= 1e-12

    def test_trace_moment(self, stream):
        # E |tr U|^2 / 4 = 1/4 under the Haar measure
        u = mat2.haar_su2(stream.generator("haar-moment"), 100000)
        tr = u[:, 0, 0] + u[:, 1, 1]
        assert np.abs(tr) .mean() is not None
        moment = float((np.abs(tr) ** 2 / 4.0).mean())
        assert abs(moment - 0.25) < 0.01

    def test_bit_identical_streams(self):
        from hamoeba.rng import SampleStream

        a = mat2.haar_su2(SampleStream(99).generator("x"), 64)
        b = mat2.haar_su2(SampleStream(99).generator("x"), 64)
        assert np.array_equal(a, b)
        c = mat2.haar_su2(SampleStream(100).generator("x"), 64)
        assert not np.array_equal(a, c)

    def test_unit_vectors(self, rng):
        v = mat2.haar_unit_vector(rng, 1000)
        assert np.abs(np.sum(np.abs(v) ** 2, axis=-1) - 1.0).max() <= 1e-12


class TestProjector2:
    def test_from_angle(self):
        pr = mat2.Projector2.from_angle(0.3)
        m = pr.matrix()
        assert np.abs(m @ m - m).max() < 1e-14
        assert pr.a + pr.c == pytest.approx(1.0)

    @settings(max_examples=100, deadline=None)
    @given(st.floats(0, np.pi))
    def test_idempotent_for_any_angle(self, theta):
        pr = mat2.Projector2.from_angle(theta)
        m = pr.matrix()
        assert np.abs(m @ m - m).max() < 1e-12
        assert np.abs(pr.matrix() + pr.complement() - np.eye(2)).max() < 1e-12

    def test_rejects_invalid(self):
        with pytest.raises(ValueError):
            mat2.Projector2(a=0.5, b=0.5, c=0.6)
        with pytest.raises(ValueError):
            mat2.Projector2(a=0.9, b=0.0, c=0.1)


def test_perp_orthogonality_residual(rng):
    u = mat2.haar_unit_vector(rng, 1000)
    w = mat2.perp(u)
    inner = np.conj(u[:, 0]) * w[:, 0] + np.conj(u[:, 1]) * w[:, 1]
    assert np.abs(inner).max() <= 4e-16


def test_symplectic_pairing_cancels(rng):
    u = rng.standard_normal((1000, 2)) + 1j * rng.standard_normal((1000, 2))
    ju = mat2.symplectic(u)
    pairing = ju[:, 0] * u[:, 0] + ju[:, 1] * u[:, 1]
    assert np.abs(pairing).max() <= 1e-14 * (np.abs(u).max() ** 2)
