import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from whdbar.errors import ExprError
from whdbar.expr import CoeffExpr, bump_dvalue, bump_value, parse_expr


def pt(*vals):
    return np.asarray(vals, dtype=complex)


class TestParseEval:
    def test_polynomial(self):
        f = parse_expr("z1^2 - z2^3")
        assert f(pt(2, 1)) == pytest.approx(3)
        assert f(pt(1j, 1)) == pytest.approx(-2)

    def test_conj_and_i(self):
        f = parse_expr("i * conj(z1)")
        assert f(pt(2 + 3j, 0)) == pytest.approx(1j * (2 - 3j))

    def test_precedence_and_unary(self):
        f = parse_expr("-z1 + 2*z2^2")
        assert f(pt(3, 2)) == pytest.approx(5)

    def test_division_and_parens(self):
        f = parse_expr("(z1 + z2) / (1 + z1*z2)")
        assert f(pt(1, 2)) == pytest.approx(1.0)

    def test_exp_re_im_abs(self):
        f = parse_expr("exp(re(z1)) + im(z2) + abs(z1)")
        val = f(pt(1j, 2 + 5j))
        assert val == pytest.approx(np.exp(0) + 5 + 1)

    def test_normz(self):
        f = parse_expr("normz^2")
        assert f(pt(3, 4j)) == pytest.approx(25)

    def test_noninteger_power(self):
        f = parse_expr("z1^0.5")
        assert f(pt(4, 0)) == pytest.approx(2)

    def test_vectorized(self):
        f = parse_expr("z1 * conj(z2)")
        z = np.array([[1, 2], [3, 4j]], dtype=complex)
        out = f(z)
        assert out.shape == (2,)
        assert out[1] == pytest.approx(3 * (-4j))

    def test_constant_broadcast(self):
        f = parse_expr("2.5")
        z = np.zeros((7, 3), dtype=complex)
        assert f(z).shape == (7,)

    def test_errors(self):
        with pytest.raises(ExprError):
            parse_expr("z1 +")
        with pytest.raises(ExprError):
            parse_expr("foo(z1)")
        with pytest.raises(ExprError):
            parse_expr("z1 ^ z2")  # exponent must be constant
        with pytest.raises(ExprError):
            parse_expr("bump(1, 0.5, z1)")
        with pytest.raises(ExprError):
            parse_expr("z1 @ z2")


class TestBump:
    def test_plateau_and_tail(self):
        assert bump_value(1.0, 2.0, 0.3) == 1.0
        assert bump_value(1.0, 2.0, 1.0) == 1.0
        assert bump_value(1.0, 2.0, 2.0) == 0.0
        assert bump_value(1.0, 2.0, 5.0) == 0.0
        mid = bump_value(1.0, 2.0, 1.5)
        assert 0.0 < mid < 1.0

    def test_monotone(self):
        r = np.linspace(0.9, 2.1, 200)
        v = bump_value(1.0, 2.0, r)
        assert np.all(np.diff(v) <= 1e-12)

    def test_derivative_matches_fd(self):
        for r in [1.2, 1.5, 1.9]:
            h = 1e-6
            fd = (bump_value(1.0, 2.0, r + h) - bump_value(1.0, 2.0, r - h)) / (2 * h)
            assert bump_dvalue(1.0, 2.0, r) == pytest.approx(fd, rel=1e-6, abs=1e-9)

    def test_derivative_zero_outside(self):
        assert bump_dvalue(1.0, 2.0, 0.5) == 0.0
        assert bump_dvalue(1.0, 2.0, 2.5) == 0.0


class TestWirtinger:
    def test_conj_var(self):
        f = parse_expr("conj(z1)")
        assert f.dbar(1)(pt(1.3, 0)) == pytest.approx(1)
        assert f.dbar(2)(pt(1.3, 0)) == pytest.approx(0)
        assert f.dz(1)(pt(1.3, 0)) == pytest.approx(0)

    def test_holomorphic_killed(self):
        f = parse_expr("exp(z1) * z2^3 + 4")
        z = pt(0.3 + 0.1j, -0.2j)
        assert f.dbar(1)(z) == pytest.approx(0)
        assert f.dbar(2)(z) == pytest.approx(0)

    def test_abs_squared(self):
        f = parse_expr("z1 * conj(z1)")
        z = pt(0.7 - 0.2j, 0)
        assert f.dbar(1)(z) == pytest.approx(0.7 - 0.2j)
        assert f.dz(1)(z) == pytest.approx(0.7 + 0.2j)

    def test_normz(self):
        f = parse_expr("normz")
        z = pt(3.0, 4.0j)
        # d normz / d conj(z_k) = z_k / (2 normz)
        assert f.dbar(1)(z) == pytest.approx(3 / 10)
        assert f.dbar(2)(z) == pytest.approx(4j / 10)

    @pytest.mark.parametrize("text", [
        "bump(0.5, 1.5, normz) * conj(z1)",
        "exp(-z1*conj(z1)) * z2",
        "(conj(z2) + z1^2) / (2 + normz^2)",
    ])
    def test_against_central_differences(self, text):
        f = parse_expr(text)
        z0 = pt(0.4 + 0.3j, -0.6 + 0.2j)
        h = 1e-5
        for k in (1, 2):
            e = np.zeros(2, dtype=complex)
            e[k - 1] = 1.0
            fx = (f(z0 + h * e) - f(z0 - h * e)) / (2 * h)
            fy = (f(z0 + 1j * h * e) - f(z0 - 1j * h * e)) / (2 * h)
            dbar_fd = 0.5 * (fx + 1j * fy)
            dz_fd = 0.5 * (fx - 1j * fy)
            assert f.dbar(k)(z0) == pytest.approx(dbar_fd, rel=2e-6, abs=1e-8)
            assert f.dz(k)(z0) == pytest.approx(dz_fd, rel=2e-6, abs=1e-8)

    def test_derivative_is_vectorized(self):
        f = parse_expr("bump(0.5, 1.5, normz) * conj(z1)^2")
        g = f.dbar(1)
        z = np.array([[0.3, 0.1], [0.9, 0.2], [2.0, 0.0]], dtype=complex)
        out = g(z)
        assert out.shape == (3,)
        assert out[2] == 0  # outside the support


class TestRoundtrip:
    def test_pickle(self):
        import pickle

        f = parse_expr("bump(0.5, 1.5, normz) * conj(z2)")
        g = pickle.loads(pickle.dumps(f))
        z = pt(0.2, 0.3 + 0.4j)
        assert g(z) == f(z)

    @given(st.integers(min_value=-3, max_value=3),
           st.integers(min_value=-3, max_value=3))
    @settings(max_examples=25, deadline=None)
    def test_eval_deterministic(self, a, b):
        f = CoeffExpr.parse("z1^2 + conj(z2)")
        z = pt(a + 1j * b, b)
        assert f(z) == f(z)
