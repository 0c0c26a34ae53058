import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hamoeba import hmodel, mat2
from hamoeba.hmodel import Horosphere, LemmaConfig

from conftest import random_spd_det1


class TestDistance:
    def test_eigenvalue_convention(self):
        p = np.diag([np.e**2, np.e**-2]).astype(complex)
        assert hmodel.distance(hmodel.ORIGIN, p) == pytest.approx(2.0, abs=1e-12)

    def test_frozen_example(self):
        # eigenvalues solve lam + 1/lam = tr = 3
        q = np.array([[2, 1j], [-1j, 1]])
        assert hmodel.distance(hmodel.ORIGIN, q) == pytest.approx(
            0.9624236501192069, abs=1e-12
        )

    def test_similarity_invariance(self, rng):
        p = random_spd_det1(rng, 2000)
        q = random_spd_det1(rng, 2000)
        g = mat2.random_sl2(rng, 2000)
        gh = np.conj(np.swapaxes(g, -1, -2))
        d0 = hmodel.distance(p, q)
        d1 = hmodel.distance(g @ p @ gh, g @ q @ gh)
        assert np.abs(d0 - d1).max() <= 1e-10 * (1 + d0.max())

    def test_metric_axioms_bulk(self, rng):
        # 1e5 random triples: symmetry, identity, triangle inequality
        p = random_spd_det1(rng, 100000)
        q = random_spd_det1(rng, 100000)
        r = random_spd_det1(rng, 100000)
        dpq = hmodel.distance(p, q)
        dqp = hmodel.distance(q, p)
        assert np.abs(dpq - dqp).max() <= 1e-10
        assert np.all(hmodel.distance(p, p) == 0.0)
        dpr = hmodel.distance(p, r)
        dqr = hmodel.distance(q, r)
        assert np.all(dpr <= dpq + dqr + 1e-9)

    def test_coincident_points_are_zero(self, rng):
        p = random_spd_det1(rng, 100)
        assert np.all(hmodel.distance(p, p) == 0.0)

    def test_log_domain_fallback(self):
        # entries ~1e150: tau overflows the arccosh argument comfort zone
        big = np.diag([1e160, 1e-160]).astype(complex)
        d = hmodel.distance(hmodel.ORIGIN, big)
        assert d == pytest.approx(np.log(1e160), rel=1e-12)

    def test_pairwise_matches_scalar(self, rng):
        p = random_spd_det1(rng, 40)
        q = random_spd_det1(rng, 30)
        mat = hmodel.pairwise_distance(hmodel.pack(p), hmodel.pack(q))
        for i in [0, 7, 39]:
            for j in [0, 11, 29]:
                assert mat[i, j] == hmodel.distance(p[i], q[j])


class TestGeodesic:
    def test_diagonal_case(self):
        e1 = np.array([1, 0], dtype=complex)
        p = hmodel.geodesic_from_origin(e1, 1.7)
        assert np.abs(p - np.diag([np.exp(1.7), np.exp(-1.7)])).max() < 1e-14

    def test_zero_time_is_origin(self, rng):
        u = mat2.haar_unit_vector(rng, 10)
        p = hmodel.geodesic_from_origin(u, np.zeros(10))
        assert np.abs(p - np.eye(2)).max() < 1e-14

    def test_unit_speed_and_additivity(self, rng):
        u = mat2.haar_unit_vector(rng, 500)
        s = rng.uniform(-3, 3, 500)
        t = rng.uniform(-3, 3, 500)
        ps = hmodel.geodesic_from_origin(u, s)
        pt = hmodel.geodesic_from_origin(u, t)
        assert np.abs(hmodel.distance(hmodel.ORIGIN, pt) - np.abs(t)).max() <= 1e-10
        assert np.abs(hmodel.distance(ps, pt) - np.abs(s - t)).max() <= 1e-10

    def test_packed_rows_agree(self, rng):
        u = mat2.haar_unit_vector(rng, 200)
        t = rng.uniform(0, 3, 200)
        rows = hmodel.geodesic_rows(u, t)
        assert np.abs(rows - hmodel.pack(hmodel.geodesic_from_origin(u, t))).max() < 1e-14


class TestRescale:
    def test_diagonal_case(self):
        p = np.diag([np.e**2, np.e**-2]).astype(complex)
        q = hmodel.rescale(p, 2.0)
        assert np.abs(q - np.diag([np.e, 1 / np.e])).max() < 1e-12

    def test_identity_factor(self, rng):
        p = random_spd_det1(rng, 20)
        assert np.array_equal(hmodel.rescale(p, 1.0), p)

    def test_distance_scaling(self, rng):
        p = random_spd_det1(rng, 2000)
        s = float(rng.uniform(1.0, 20.0))
        d0 = hmodel.distance_to_origin(p)
        d1 = hmodel.distance_to_origin(hmodel.rescale(p, s))
        assert np.abs(d1 - d0 / s).max() <= 1e-10

    def test_fixes_direction(self, rng):
        p = random_spd_det1(rng, 2000)
        _, _, u0 = mat2.herm_eigen(p, check=False)
        _, _, u1 = mat2.herm_eigen(hmodel.rescale(p, 3.0), check=False)
        overlap = np.abs(np.sum(np.conj(u0) * u1, axis=-1))
        assert np.abs(overlap - 1.0).max() <= 1e-10

    def test_output_determinant_exact(self, rng):
        p = random_spd_det1(rng, 2000, log_radius=(-40.0, 40.0))
        q = hmodel.rescale(p, 7.0)
        scale = 1.0 + np.sum(np.abs(q) ** 2, axis=(-2, -1))
        assert np.abs(mat2.det(q).real - 1.0).max() <= (1e-14 * scale).max()

    def test_rejects_nonpositive_factor(self):
        with pytest.raises(ValueError):
            hmodel.rescale(hmodel.origin(), 0.0)


class TestBusemann:
    def test_diagonal_value(self):
        w = np.array([0, 1], dtype=complex)
        for r in [0.5, 2.0]:
            p = np.diag([np.exp(r), np.exp(-r)]).astype(complex)
            assert hmodel.busemann(w, p) == pytest.approx(-r, abs=1e-12)

    def test_limit_definition_oracle(self, rng):
        # B(P) = lim_t d(P, gamma(t)) - t along the ray toward the center
        w = mat2.haar_unit_vector(rng)
        p = random_spd_det1(rng, 32)
        u = mat2.perp(w)
        t = 30.0
        far = hmodel.geodesic_from_origin(u, t)
        approx = hmodel.distance(p, far) - t
        assert np.abs(approx - hmodel.busemann(w, p)).max() <= 1e-8

    def test_vanishes_at_origin(self, rng):
        w = mat2.haar_unit_vector(rng, 100)
        assert np.abs(hmodel.busemann(w, hmodel.ORIGIN)).max() <= 1e-14

    def test_lipschitz_bulk(self, rng):
        w = mat2.haar_unit_vector(rng)
        p = random_spd_det1(rng, 100000)
        q = random_spd_det1(rng, 100000)
        gap = np.abs(hmodel.busemann(w, p) - hmodel.busemann(w, q))
        assert np.all(gap <= hmodel.distance(p, q) + 1e-9)

    def test_unit_speed_along_center_ray(self, rng):
        w = mat2.haar_unit_vector(rng)
        t = rng.uniform(-4, 4, 100)
        gamma = hmodel.geodesic_from_origin(mat2.perp(w), t)
        assert np.abs(hmodel.busemann(w, gamma) + t).max() <= 1e-10


class TestSphereSample:
    def test_radius_exact_at_origin(self, stream):
        sample = hmodel.sphere_sample(hmodel.origin(), 1.0, 1000, stream.generator("s"))
        assert np.abs(sample.distances_to_center() - 1.0).max() <= 1e-12

    def test_axis_direction_hits_diagonal(self):
        e1 = np.array([1, 0], dtype=complex)
        p = hmodel.geodesic_from_origin(e1, 0.8)
        # sphere construction at center O reduces to the geodesic formula
        assert np.abs(p - np.diag([np.exp(0.8), np.exp(-0.8)])).max() < 1e-14

    def test_offcenter_radius(self, stream):
        center = np.diag([np.e, 1 / np.e]).astype(complex)
        sample = hmodel.sphere_sample(center, 0.75, 2000, stream.generator("s2"))
        assert np.abs(sample.distances_to_center() - 0.75).max() <= 1e-9

    def test_rejects_bad_args(self, stream):
        with pytest.raises(ValueError):
            hmodel.sphere_sample(hmodel.origin(), -1.0, 10, stream.generator("x"))
        with pytest.raises(ValueError):
            hmodel.sphere_sample(hmodel.origin(), 1.0, 0, stream.generator("x"))


class TestCharts:
    def test_origin_and_diagonal(self):
        z, h = hmodel.to_uhs(hmodel.ORIGIN)
        assert z == 0 and h == 1
        z, h = hmodel.to_uhs(np.diag([np.e, 1 / np.e]).astype(complex))
        assert z == 0 and h == pytest.approx(np.e, rel=1e-14)

    def test_chart_isometry_bulk(self, rng):
        p = random_spd_det1(rng, 100000)
        q = random_spd_det1(rng, 100000)
        zp, hp = hmodel.to_uhs(p)
        zq, hq = hmodel.to_uhs(q)
        pulled = hmodel.uhs_distance(zp, hp, zq, hq)
        assert np.abs(pulled - hmodel.distance(p, q)).max() <= 1e-9

    def test_round_trip(self, rng):
        p = random_spd_det1(rng, 5000)
        z, h = hmodel.to_uhs(p)
        back = hmodel.from_uhs(z, h)
        assert np.abs(back - p).max() <= 1e-12
        assert np.abs(hmodel.distance(back, p)).max() <= 1e-9

    def test_from_uhs_rejects_nonpositive_height(self):
        with pytest.raises(ValueError):
            hmodel.from_uhs(0.0 + 0.0j, -1.0)


class TestUhpPoint:
    def test_identity(self):
        re, im = hmodel.uhp_point(np.eye(2))
        assert re == 0.0 and im == 1.0

    def test_diagonal_doubling(self):
        for r in [0.3, 1.1]:
            re, im = hmodel.uhp_point(np.diag([np.exp(r), np.exp(-r)]))
            assert re == pytest.approx(0.0, abs=1e-14)
            assert im == pytest.approx(np.exp(2 * r), rel=1e-13)

    def test_matches_literal_moebius(self, rng):
        # (A i + B) / (B i + C) evaluated in complex arithmetic
        theta = rng.uniform(0, np.pi, 3000)
        r = rng.uniform(0.05, 1.2, 3000)
        a = np.cos(theta) ** 2
        c = np.sin(theta) ** 2
        b = np.cos(theta) * np.sin(theta)
        m = np.empty((3000, 2, 2))
        m[:, 0, 0] = np.exp(r) * a + np.exp(-r) * c
        m[:, 0, 1] = m[:, 1, 0] = (np.exp(r) - np.exp(-r)) * b
        m[:, 1, 1] = np.exp(r) * c + np.exp(-r) * a
        re, im = hmodel.uhp_point(m)
        lit = (m[:, 0, 0] * 1j + m[:, 0, 1]) / (m[:, 0, 1] * 1j + m[:, 1, 1])
        assert np.abs(re - lit.real).max() <= 1e-13 * np.maximum(1, np.abs(lit.real)).max()
        assert np.abs(im - lit.imag).max() <= 1e-13 * np.abs(lit.imag).max()

    def test_rejects_complex_input(self):
        with pytest.raises(ValueError):
            hmodel.uhp_point(np.array([[2, 1j], [-1j, 1]]))


class TestClosedFormIm:
    def test_axis_endpoints(self):
        # a=0: the point below the axis, floor attained; a=1: escapes upward
        away = mat2.Projector2(a=0.0, b=0.0, c=1.0)
        toward = mat2.Projector2(a=1.0, b=0.0, c=0.0)
        assert hmodel.closed_form_im(away, 1.3, 4.0) == pytest.approx(
            np.exp(-2 * 1.3 * 4.0), rel=1e-14
        )
        assert hmodel.closed_form_im(toward, 1.3, 4.0) == pytest.approx(
            np.exp(+2 * 1.3 * 4.0), rel=1e-14
        )

    def test_matches_powered_moebius_oracle(self, rng):
        theta = rng.uniform(0, np.pi, 2000)
        r = rng.uniform(0.1, 2.5, 2000)
        s = rng.uniform(0.0, 40.0, 2000)
        for th, rr, ss in zip(theta[:200], r[:200], s[:200]):
            pr = mat2.Projector2.from_angle(th)
            m = (np.exp(rr) * pr.matrix() + np.exp(-rr) * pr.complement()).astype(complex)
            _, im = hmodel.uhp_point(mat2.spd_power(m, ss).real, check=False)
            val = hmodel.closed_form_im(pr, rr, ss)
            assert abs(val - im) <= 1e-12 * abs(im)

    def test_uniform_floor(self, rng):
        theta = rng.uniform(0, np.pi, 5000)
        r = rng.uniform(0.05, 3.0, 5000)
        s = rng.uniform(0.0, 30.0, 5000)
        vals = np.array(
            [
                hmodel.closed_form_im(mat2.Projector2.from_angle(th), rr, ss)
                for th, rr, ss in zip(theta, r, s)
            ]
        )
        assert np.all(vals >= np.exp(-2.0 * r * s) * (1.0 - 5e-13))

    @settings(max_examples=150, deadline=None)
    @given(st.floats(0, np.pi), st.floats(0.05, 3.0), st.floats(0.0, 30.0))
    def test_floor_property(self, theta, r, s):
        # the floor is attained at a = 0, so equality holds there up to the
        # projector-entry rounding; elsewhere the margin is strict
        val = hmodel.closed_form_im(mat2.Projector2.from_angle(theta), r, s)
        assert val >= np.exp(-2.0 * r * s) * (1.0 - 5e-13)


class TestTypeAB:
    def test_ray_from_origin(self):
        u = np.array([1, 0], dtype=complex)
        pts = hmodel.type_ab_sample(u, 0.0, 2.0, "A", 11)
        d = hmodel.distance_to_origin(pts)
        assert d[0] == 0.0 and d[-1] == pytest.approx(2.0, abs=1e-12)

    def test_ray_direction_and_range(self, rng):
        u = mat2.haar_unit_vector(rng)
        pts = hmodel.type_ab_sample(u, 0.5, 3.0, "A", 64)
        d = hmodel.distance_to_origin(pts)
        assert np.all((d >= 0.5 - 1e-12) & (d <= 3.0 + 1e-12))
        _, _, tops = mat2.herm_eigen(pts, check=False)
        overlap = np.abs(np.sum(np.conj(tops) * u, axis=-1))
        assert np.abs(overlap - 1.0).max() <= 1e-10

    def test_type_b_sphere_radius(self, rng):
        u = mat2.haar_unit_vector(rng)
        pts = hmodel.type_ab_sample(u, 1.25, 3.0, "B", 50)
        d = hmodel.distance_to_origin(pts)
        sphere = d[50:]
        assert np.abs(sphere - 1.25).max() <= 1e-9

    def test_rejects_bad_range(self):
        with pytest.raises(ValueError):
            hmodel.type_ab_sample(np.array([1, 0], dtype=complex), 2.0, 1.0, "A", 5)


class TestHorosphere:
    def test_contains_origin_iff_unit_level(self, rng):
        w = mat2.haar_unit_vector(rng)
        h = Horosphere(w=w, c=1.0)
        assert h.level_value(hmodel.ORIGIN) == pytest.approx(1.0, abs=1e-12)

    def test_contraction_is_busemann_linear(self, rng):
        w = mat2.haar_unit_vector(rng)
        h = Horosphere(w=w, c=0.7)
        for t in [1.0, 2.5]:
            assert h.contracted(t).c == pytest.approx(0.7 * np.exp(-2 * (t - 1)))

    def test_center_direction_orthogonal(self, rng):
        w = mat2.haar_unit_vector(rng)
        h = Horosphere(w=w, c=2.0)
        inner = np.vdot(w, h.center_direction())
        assert abs(inner) <= 1e-14

    def test_rejects_bad_values(self):
        with pytest.raises(ValueError):
            Horosphere(w=np.array([1.0, 1.0]), c=1.0)
        with pytest.raises(ValueError):
            Horosphere(w=np.array([1.0, 0.0]), c=-1.0)


def test_lemma_config_validation():
    LemmaConfig(d=1.0, epsilon=0.5, rho=1.2)
    with pytest.raises(ValueError):
        LemmaConfig(d=1.0, epsilon=0.3, rho=0.5)
    with pytest.raises(ValueError):
        LemmaConfig(d=-1.0, epsilon=1.0, rho=1.0)


def test_renormalize_fixes_moderate_drift(rng):
    p = random_spd_det1(rng, 100)
    drifted = p * 1.001
    fixed = hmodel.renormalize(drifted)
    assert np.abs(mat2.det(fixed).real - 1.0).max() <= 1e-12


def test_renormalize_leaves_noise_dets_alone():
    big = np.diag([1e40, 1e-40]).astype(complex)
    big[0, 1] = big[1, 0] = 1e39
    out = hmodel.renormalize(big)
    assert np.array_equal(out, big)


def test_pack_unpack_round_trip(rng):
    p = random_spd_det1(rng, 500)
    # points carry off-real dust ~1e-16 from vectorized complex products;
    # packing projects it out, after which the cycle is exact
    assert np.abs(hmodel.unpack(hmodel.pack(p)) - p).max() <= 1e-15
    rows = hmodel.pack(p)
    assert np.array_equal(hmodel.pack(hmodel.unpack(rows)), rows)


def test_hopf_phase_invariance(rng):
    u = mat2.haar_unit_vector(rng, 200)
    phase = np.exp(1j * rng.uniform(0, 2 * np.pi, 200))
    n0 = hmodel.hopf_direction(u)
    n1 = hmodel.hopf_direction(phase[:, None] * u)
    assert np.abs(n0 - n1).max() <= 1e-12


def test_direction_to_unit_section(rng):
    n = hmodel.fibonacci_directions(128)
    u = hmodel.direction_to_unit(n)
    assert np.abs(hmodel.hopf_direction(u) - n).max() <= 1e-12


def test_circle_sample_h2_real_and_on_circle():
    center = hmodel.geodesic_from_origin(np.array([1, 0], dtype=complex), 1.0)
    pts = hmodel.circle_sample_h2(center, 0.5, 64)
    assert np.abs(pts.imag).max() <= 1e-12
    assert np.abs(hmodel.distance(center, pts) - 0.5).max() <= 1e-9
