import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from whdbar.errors import (
    DimensionUnknown,
    MixedDegree,
    ZeroCoordinate,
    ZeroPolynomial,
)
from whdbar.variety import (
    WeightVector,
    WPolynomial,
    WeightedVariety,
    chart_volume_density,
    check_weighted_homogeneous,
    cone_chart,
    is_regular_point,
    membership,
    scale_action,
    slice_variety,
)

cnum = st.complex_numbers(min_magnitude=0, max_magnitude=3, allow_nan=False,
                          allow_infinity=False)


class TestScaleAction:
    def test_identity(self):
        z = np.array([1.2, -0.5j, 3.0])
        assert np.allclose(scale_action(1.0, z, (2, 1, 5)), z)

    def test_origin(self):
        z = np.array([1.0, 2.0])
        assert np.allclose(scale_action(0.0, z, (3, 2)), 0)

    def test_direct(self):
        out = scale_action(2.0, np.array([1.0, 1.0]), (3, 2))
        assert np.allclose(out, [8.0, 4.0])

    def test_vectorized_s(self):
        s = np.array([1.0, 2.0, 1j])
        out = scale_action(s, np.array([1.0, 1.0]), (3, 2))
        assert out.shape == (3, 2)
        assert np.allclose(out[1], [8, 4])
        assert np.allclose(out[2], [-1j, -1])

    @given(s=cnum, t=cnum, a=cnum, b=cnum)
    @settings(max_examples=60, deadline=None)
    def test_group_law(self, s, t, a, b):
        z = np.array([a, b])
        beta = (3, 2)
        lhs = scale_action(s * t, z, beta)
        rhs = scale_action(s, scale_action(t, z, beta), beta)
        assert np.allclose(lhs, rhs, rtol=1e-12, atol=1e-12)


class TestWeightedHomogeneity:
    def test_cusp_degree(self, cusp):
        assert check_weighted_homogeneous(cusp.generators[0], cusp.weights) == 6

    def test_quadric_degree(self, cone):
        assert check_weighted_homogeneous(cone.generators[0], cone.weights) == 2

    def test_mixed_degree(self):
        # z1 + z2^2 with beta = (1, 1): degrees 1 != 2
        Q = WPolynomial([((1, 0), 1.0), ((0, 2), 1.0)], 2, 1)
        with pytest.raises(MixedDegree):
            check_weighted_homogeneous(Q, WeightVector((1, 1)))

    def test_zero_polynomial(self):
        beta = WeightVector((1, 1))
        with pytest.raises(ZeroPolynomial):
            WPolynomial.from_terms([], 2, beta)


class TestMembership:
    def test_cusp_points(self, cusp, rng):
        assert membership(cusp, np.array([1.0, 1.0]))
        for _ in range(5):
            t = rng.standard_normal() + 1j * rng.standard_normal()
            assert membership(cusp, np.array([t**3, t**2]))
        assert not membership(cusp, np.array([1.0, 2.0]))

    def test_invariance_under_action(self, brieskorn, rng):
        # membership is preserved along the orbit s^beta * z
        for _ in range(20):
            t = rng.standard_normal() + 1j * rng.standard_normal()
            z = np.array([t**3, t**2, t**2])  # on z1^2 = z2^2 z3
            assert membership(brieskorn, z, 1e-8)
            s = rng.standard_normal() + 1j * rng.standard_normal()
            assert membership(brieskorn, scale_action(s, z, brieskorn.weights), 1e-8)


class TestRegularity:
    def test_cusp(self, cusp):
        assert is_regular_point(cusp, np.array([1.0, 1.0]))
        assert not is_regular_point(cusp, np.array([0.0, 0.0]))

    def test_cone_axis_point(self, cone):
        # Jacobian (z2, z1, -2 z3) = (0, 1, 0): rank 1 = n - d
        assert is_regular_point(cone, np.array([1.0, 0.0, 0.0]))
        assert not is_regular_point(cone, np.array([0.0, 0.0, 0.0]))

    def test_dimension_unknown(self):
        beta = WeightVector((1, 1))
        Q = WPolynomial.from_terms([((0, 1), 1.0)], 2, beta)
        V = WeightedVariety(beta, (Q,), 2, pure_dim_hint=None)
        with pytest.raises(DimensionUnknown):
            is_regular_point(V, np.array([1.0, 0.0]))


class TestSlice:
    def test_cusp_slice(self, cusp):
        sl = slice_variety(cusp, np.array([1.0, 1.0]), coord=0)
        # Q(1, y) = 1 - y^3
        assert sl.evaluate(np.array([1.0]))[0] == pytest.approx(0)
        assert sl.evaluate(np.array([0.0]))[0] == pytest.approx(1)
        assert sl.evaluate(np.array([2.0]))[0] == pytest.approx(-7)

    def test_cone_slice(self, cone):
        sl = slice_variety(cone, np.array([1.0, 1.0, 1.0]), coord=0)
        # y2 - y3^2
        assert sl.evaluate(np.array([4.0, 2.0]))[0] == pytest.approx(0)

    def test_relabeling(self, cone):
        xi = np.array([0.0, 1.0, 0.0])
        sl = slice_variety(cone, xi)
        assert sl.order[0] == 1
        # slice polynomial in (y1, y3): y1 - y3^2
        assert sl.evaluate(np.array([9.0, 3.0]))[0] == pytest.approx(0)

    def test_zero_coordinate(self, cone):
        with pytest.raises(ZeroCoordinate):
            slice_variety(cone, np.zeros(3))

    def test_slice_identity(self, brieskorn, rng):
        # Q_k(eta(s, yhat)) = (s/xi_1)^{d_k} Q_k(xi_1, yhat)
        xi = np.array([1.0, 1.0, 1.0])
        sl = slice_variety(brieskorn, xi, coord=0)
        d = brieskorn.generators[0].declared_degree
        for _ in range(100):
            s = rng.standard_normal() + 1j * rng.standard_normal()
            yhat = rng.standard_normal(2) + 1j * rng.standard_normal(2)
            lhs = brieskorn.evaluate(sl.eta(s, yhat))[0]
            rhs = (s / sl.xi1) ** d * sl.evaluate(yhat)[0]
            assert abs(lhs - rhs) <= 1e-9 * (1 + abs(s) ** d) * (1 + abs(rhs))


class TestChart:
    def test_cusp_chart_is_power_map(self, cusp, rng):
        chart = cone_chart(cusp, np.array([1.0, 1.0]))
        for _ in range(10):
            s = rng.standard_normal() + 1j * rng.standard_normal()
            p = chart.point(s)
            assert np.allclose(p, [s**3, s**2], rtol=1e-12, atol=1e-12)

    def test_base_point(self, cone):
        chart = cone_chart(cone, np.array([1.0, 1.0, 1.0]))
        s0, x0 = chart.base_params
        assert np.allclose(chart.point(s0, x0), [1, 1, 1], atol=1e-12)

    def test_membership_along_chart(self, cone, rng):
        chart = cone_chart(cone, np.array([1.0, 1.0, 1.0]))
        for _ in range(10):
            s = 0.5 + rng.random() + 0.3j * rng.standard_normal()
            x = chart.base_graph + 0.3 * (rng.standard_normal() + 1j * rng.standard_normal())
            p = chart.point(s, x)
            assert membership(cone, p, 1e-9)

    def test_brieskorn_chart(self, brieskorn, rng):
        chart = cone_chart(brieskorn, np.array([1.0, 1.0, 1.0]))
        for _ in range(10):
            s = 0.6 + rng.random() + 0.3j * rng.standard_normal()
            x = chart.base_graph + 0.2 * (rng.standard_normal() + 1j * rng.standard_normal())
            assert membership(brieskorn, chart.point(s, x), 1e-8)

    def test_jacobian_matches_fd(self, cone):
        chart = cone_chart(cone, np.array([1.0, 1.0, 1.0]))
        s, x = 1.3 + 0.2j, chart.base_graph + 0.1
        J = chart.jacobian(s, x)
        h = 1e-6
        fd_s = (chart.point(s + h, x) - chart.point(s - h, x)) / (2 * h)
        assert np.allclose(J[:, 0], fd_s, rtol=1e-6, atol=1e-8)
        fd_x = (chart.point(s, x + h) - chart.point(s, x - h)) / (2 * h)
        assert np.allclose(J[:, 1], fd_x, rtol=1e-6, atol=1e-8)

    def test_invert(self, cone, rng):
        chart = cone_chart(cone, np.array([1.0, 1.0, 1.0]))
        for _ in range(5):
            s = 0.7 + 0.5 * rng.random() + 0.2j * rng.standard_normal()
            x = chart.base_graph + 0.2 * (rng.standard_normal() + 1j * rng.standard_normal())
            z = chart.point(s, x)
            s2, x2 = chart.invert(z)
            assert np.allclose(chart.point(s2, x2), z, atol=1e-9)

    def test_invert_weighted_branches(self, cusp, rng):
        chart = cone_chart(cusp, np.array([1.0, 1.0]))
        for _ in range(5):
            s = 0.6 + rng.random() + 0.4j * rng.standard_normal()
            z = chart.point(s)
            s2, _ = chart.invert(z)
            assert np.allclose(chart.point(s2), z, atol=1e-9)


class TestVolumeDensity:
    def test_line_density_is_one(self, line):
        chart = cone_chart(line, np.array([1.0, 0.0]))
        for s in [0.5, 1.0 + 1j, -2.0]:
            assert chart_volume_density(chart, s) == pytest.approx(1.0)

    def test_cusp_density_formula(self, cusp):
        chart = cone_chart(cusp, np.array([1.0, 1.0]))
        for s in [0.5, 1.1 - 0.3j, 2.0j]:
            expected = 9 * abs(s) ** 4 + 4 * abs(s) ** 2
            assert chart_volume_density(chart, s) == pytest.approx(expected, rel=1e-12)

    def test_cone_power_law(self, cone):
        chart = cone_chart(cone, np.array([1.0, 1.0, 1.0]))
        x = chart.base_graph + 0.15j
        d1 = chart_volume_density(chart, 1.0, x)
        d2 = chart_volume_density(chart, 2.0, x)
        assert d2 / d1 == pytest.approx(4.0, rel=1e-10)  # |2|^{2d-2}, d = 2

    def test_theta_independent_of_s(self, cone, rng):
        chart = cone_chart(cone, np.array([1.0, 1.0, 1.0]))
        d = cone.pure_dim_hint
        x = chart.base_graph + 0.2 * (rng.standard_normal() + 1j * rng.standard_normal())
        thetas = []
        for _ in range(6):
            s = 0.3 + 1.5 * rng.random() + 1j * rng.standard_normal()
            thetas.append(chart_volume_density(chart, s, x) / abs(s) ** (2 * d - 2))
        thetas = np.array(thetas)
        assert np.max(np.abs(thetas - thetas[0])) <= 1e-8 * abs(thetas[0])
