import cmath
import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hktunnel import ModelParams
from hktunnel.errors import AiryRangeError, NoConvergenceError, QuadratureError
from hktunnel.folding import derived_scales, phi_tau_prime, phi_tau_second
from hktunnel.numerics import (
    AIRY_X_MAX,
    QuadratureSpec,
    airy_ai,
    airy_ai_prime,
    gamma_three_quarters,
    integrate_1d,
    integrate_2d,
    polish_root,
)
from oracles import airy


class TestAiry:
    def test_value_at_origin(self):
        assert airy_ai(0.0) == pytest.approx(0.355028053887817, abs=1e-15)
        assert airy_ai(0.0) == pytest.approx(3 ** (-2 / 3) / math.gamma(2 / 3), abs=1e-15)

    @pytest.mark.parametrize("x", np.linspace(-10, 10, 81))
    def test_matches_mpmath_on_core_range(self, x):
        assert abs(airy_ai(x) - airy(x)) < 1e-12

    @given(st.floats(min_value=-10, max_value=10))
    def test_matches_mpmath_random(self, x):
        assert abs(airy_ai(x) - airy(x)) < 1e-12

    @given(st.floats(min_value=10, max_value=AIRY_X_MAX))
    def test_decaying_side_relative(self, x):
        assert airy_ai(x) == pytest.approx(airy(x), rel=1e-10)

    @given(st.floats(min_value=-AIRY_X_MAX, max_value=-10))
    def test_oscillating_side_relative_to_envelope(self, x):
        with mp.workdps(30):
            env = float(mp.sqrt(mp.airyai(x) ** 2 + mp.airybi(x) ** 2))
        assert abs(airy_ai(x) - airy(x)) < 1e-10 * env

    @pytest.mark.parametrize("x", [-8.0, -5.0, 3.5, 5.5, 7.0])
    def test_continuous_across_method_switches(self, x):
        left, right = airy_ai(np.nextafter(x, -np.inf)), airy_ai(np.nextafter(x, np.inf))
        assert abs(left - right) < 1e-13

    def test_derivative_matches_mpmath(self):
        xs = np.linspace(-12, 12, 97)
        with mp.workdps(30):
            ref = np.array([float(mp.airyai(x, derivative=1)) for x in xs])
        assert np.max(np.abs(airy_ai_prime(xs) - ref)) < 1e-11

    def test_ode_residual_five_point(self):
        h = 1e-3
        xs = np.linspace(-10, 10, 2001)
        f = lambda x: airy_ai(x)
        d2 = (-f(xs + 2 * h) + 16 * f(xs + h) - 30 * f(xs) + 16 * f(xs - h) - f(xs - 2 * h)) / (12 * h * h)
        assert np.max(np.abs(d2 - xs * f(xs))) < 1e-6

    def test_ode_residual_at_one(self):
        h = 1e-3
        f = airy_ai
        d2 = (-f(1 + 2 * h) + 16 * f(1 + h) - 30 * f(1.0) + 16 * f(1 - h) - f(1 - 2 * h)) / (12 * h * h)
        assert abs(d2 - f(1.0)) < 1e-6

    def test_oscillatory_asymptotics_at_minus_four(self):
        # leading cos form, with its first correction as the error estimate
        x = 4.0
        z = 2 / 3 * x**1.5
        lead = math.cos(z - math.pi / 4) / (math.sqrt(math.pi) * x**0.25)
        est = (5 / 72) / z / (math.sqrt(math.pi) * x**0.25)
        assert abs(airy_ai(-4.0) - lead) < 1.5 * est

    def test_array_shape_preserved(self):
        x = np.linspace(-3, 3, 12).reshape(3, 4)
        assert airy_ai(x).shape == (3, 4)
        assert isinstance(airy_ai(1.0), float)

    @pytest.mark.parametrize("x", [31.0, -40.0, np.nan, np.inf])
    def test_out_of_range_raises(self, x):
        with pytest.raises(AiryRangeError):
            airy_ai(x)


class TestGammaThreeQuarters:
    def test_value(self):
        assert gamma_three_quarters() == pytest.approx(1.225416702465178, abs=1e-15)

    def test_reflection(self):
        assert gamma_three_quarters() * math.gamma(0.25) == pytest.approx(math.pi * math.sqrt(2), abs=1e-12)

    def test_recurrence(self):
        assert math.gamma(1.75) == pytest.approx(0.75 * gamma_three_quarters(), abs=1e-12)


class TestQuadratureSpec:
    @pytest.mark.parametrize("kw", [{"abs_tol": 0}, {"rel_tol": -1}, {"truncation_threshold": 0}, {"max_evals": 10}])
    def test_rejects_invalid(self, kw):
        with pytest.raises(ValueError):
            QuadratureSpec(**kw)

    def test_tail_log(self):
        assert QuadratureSpec().tail_log == pytest.approx(16 * math.log(10))


class TestIntegrate1D:
    def test_gaussian(self):
        assert integrate_1d(lambda x: np.exp(-(x**2)), -10, 10) == pytest.approx(math.sqrt(math.pi), abs=1e-12)

    def test_arctangent(self):
        assert integrate_1d(lambda x: 4 / (1 + x**2), 0, 1) == pytest.approx(math.pi, abs=1e-12)

    def test_fresnel_with_tail_correction(self):
        # both tails equal int_X^inf e^{i x^2} dx ~ -e^{i X^2}/(2iX) (1 + 1/(2i X^2) - 3/(4 X^4))
        X = 30.0
        core = integrate_1d(lambda x: np.exp(1j * x * x), -X, X, panels=200)
        tail = -cmath.exp(1j * X * X) / (2j * X) * (1 + 1 / (2j * X * X) - 3 / (4 * X**4))
        assert abs(core + 2 * tail - math.sqrt(math.pi) * cmath.exp(1j * math.pi / 4)) < 1e-6

    @given(st.floats(min_value=0.2, max_value=5), st.floats(min_value=-3, max_value=3))
    def test_conjugate_symmetric_integrand_is_real(self, a, b):
        spec = QuadratureSpec()
        f = lambda x: np.exp(-a * x * x + 1j * b * x**3)
        assert abs(integrate_1d(f, -8, 8, spec).imag) < spec.abs_tol

    def test_full_output(self):
        val, err, n = integrate_1d(np.cos, 0, 1, full_output=True)
        assert val == pytest.approx(math.sin(1), abs=1e-14)
        assert err <= 1e-12 and n > 0

    def test_reversed_limits_rejected(self):
        with pytest.raises(ValueError):
            integrate_1d(np.cos, 1, 0)

    def test_budget_exhaustion_carries_estimate(self):
        spec = QuadratureSpec(abs_tol=1e-15, rel_tol=1e-15, max_evals=200)
        with pytest.raises(QuadratureError) as info:
            integrate_1d(lambda x: np.sin(200 * x), 0, 10, spec)
        assert info.value.estimate is not None and info.value.nevals > 200

    def test_nonfinite_integrand_rejected(self):
        with pytest.raises(ArithmeticError), np.errstate(all="ignore"):
            integrate_1d(lambda x: 1 / x, -1, 1, panels=2)


class TestIntegrate2D:
    def test_gaussian(self):
        v = integrate_2d(lambda x, y: np.exp(-(x**2) - y**2), (-9, 9, -9, 9))
        assert v == pytest.approx(math.pi, abs=1e-10)

    def test_odd_integrand_vanishes(self):
        spec = QuadratureSpec()
        v = integrate_2d(lambda x, y: x * np.exp(-(x**2) - y**2), (-9, 9, -9, 9), spec)
        assert abs(v) < spec.abs_tol

    @given(st.floats(min_value=0.3, max_value=3), st.floats(min_value=-2, max_value=2))
    def test_separable_equals_product(self, a, k):
        g = lambda x: np.exp(-a * x * x + 1j * k * x)
        h = lambda y: 1 / (1 + y * y)
        v = integrate_2d(lambda x, y: g(x) * h(y), (-8, 8, -1, 2))
        ref = integrate_1d(g, -8, 8) * integrate_1d(h, -1, 2)
        assert abs(v - ref) <= 1e-10 * abs(ref)


class TestPolishRoot:
    def test_square_root_of_minus_one(self):
        r = polish_root(lambda p: p * p + 1, lambda p: 2 * p, 0.1 + 0.9j)
        assert abs(r - 1j) < 1e-14

    def test_cube_root_of_unity(self):
        w = cmath.exp(2j * math.pi / 3)
        r = polish_root(lambda p: p**3 - 1, lambda p: 3 * p * p, 0.95 * w)
        assert abs(r - w) < 1e-14

    def test_branch_point_of_reduced_exponent(self, unit_params):
        q = 0.4
        p_I = derived_scales(unit_params).p_I
        f = lambda p: phi_tau_prime(p, q, unit_params)
        df = lambda p: phi_tau_second(p, q, unit_params)
        r = polish_root(f, df, 0.9 * p_I)
        assert abs(r - p_I) < 1e-13

    @given(st.complex_numbers(min_magnitude=0.2, max_magnitude=3, allow_nan=False, allow_infinity=False))
    def test_idempotent(self, guess):
        f = lambda p: p**3 - 2 * p + 2
        df = lambda p: 3 * p * p - 2
        try:
            r = polish_root(f, df, guess)
        except NoConvergenceError:
            return
        assert abs(polish_root(f, df, r) - r) < 1e-13

    def test_reports_failure(self):
        with pytest.raises(NoConvergenceError):
            polish_root(lambda p: p * p + 1, lambda p: 2 * p, 0.0)
