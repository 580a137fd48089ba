"""Regularized incomplete beta: exact points, invariants, oracle agreement."""

import math

import numpy as np
import pytest

from adaptaug import DEFAULT_IBF, IbfParams, betainc_reg, regularized_ibf

from oracles import ibf_quad


class TestExactPoints:
    def test_endpoints(self):
        """I_0 = 0 and I_1 = 1 exactly, for assorted shapes."""
        for alpha, beta in [(1.0, 1.0), (2.0, 3.0), (0.3, 9.7), (15.0, 0.2)]:
            assert betainc_reg(0.0, alpha, beta) == 0.0
            assert betainc_reg(1.0, alpha, beta) == 1.0

    def test_identity_shape_returns_x(self):
        """alpha = beta = 1 makes the CDF the identity, bit-exactly."""
        rng = np.random.default_rng(2024)
        for x in rng.uniform(0.0, 1.0, 200):
            assert betainc_reg(float(x), 1.0, 1.0) == float(x)
        assert regularized_ibf(0.37, IbfParams(s=2.0, a=0.5)) == 0.37

    def test_symmetric_shapes_fix_midpoint(self):
        """a = 0.5 gives alpha = beta, and I_0.5(c, c) = 0.5 for any c."""
        for s in (0.5, 2.0, 3.7, 16.0):
            assert regularized_ibf(0.5, IbfParams(s=s, a=0.5)) == pytest.approx(0.5, abs=1e-12)

    def test_integer_shape_closed_form(self):
        """I_x(2,3) expands to 6x^2 - 8x^3 + 3x^4; check at x = 0.3.

        The polynomial comes from integrating t(1-t)^2 termwise and
        dividing by B(2,3) = 1/12; at 0.3 it equals 0.3483 exactly.
        """
        x = 0.3
        closed = 6 * x**2 - 8 * x**3 + 3 * x**4
        assert closed == pytest.approx(0.3483, abs=1e-15)
        assert betainc_reg(0.3, 2.0, 3.0) == pytest.approx(closed, abs=1e-13)
        assert ibf_quad(0.3, 2.0, 3.0) == pytest.approx(closed, abs=1e-10)

    def test_oracle_endpoints(self):
        assert ibf_quad(0.0, 3.3, 0.7) == 0.0
        assert ibf_quad(1.0, 3.3, 0.7) == 1.0


class TestDomain:
    def test_x_outside_unit_interval_rejected(self):
        for bad in (-0.01, 1.01, float("nan"), float("inf")):
            with pytest.raises(ValueError):
                betainc_reg(bad, 2.0, 3.0)

    def test_invalid_shapes_rejected(self):
        for alpha, beta in [(0.0, 1.0), (1.0, 0.0), (-2.0, 3.0), (1.0, float("nan"))]:
            with pytest.raises(ValueError):
                betainc_reg(0.5, alpha, beta)

    def test_extreme_shapes_rejected(self):
        with pytest.raises(ValueError):
            betainc_reg(0.5, 1e4 + 1, 2.0)
        with pytest.raises(ValueError):
            IbfParams(s=3e4, a=0.5)

    def test_params_validation(self):
        for s, a in [(0.0, 0.5), (-1.0, 0.5), (2.0, 0.0), (2.0, 1.0), (2.0, -0.2)]:
            with pytest.raises(ValueError):
                IbfParams(s=s, a=a)

    def test_params_shape_arithmetic(self):
        p = IbfParams(s=3.0, a=0.25)
        assert p.alpha == pytest.approx(2.25)
        assert p.beta == pytest.approx(0.75)
        assert p.alpha + p.beta == pytest.approx(p.s, abs=1e-12)
        assert DEFAULT_IBF.alpha == 1.0 and DEFAULT_IBF.beta == 1.0


class TestInvariants:
    def test_identity_grid(self):
        """|I_x(1,1) - x| <= 1e-10 on the full millesimal grid."""
        params = IbfParams(s=2.0, a=0.5)
        for i in range(1001):
            x = i / 1000.0
            assert abs(regularized_ibf(x, params) - x) <= 1e-10

    def test_symmetry(self):
        """I_x(a,b) + I_{1-x}(b,a) = 1 to 1e-10 over random draws."""
        rng = np.random.default_rng(7)
        for _ in range(500):
            alpha = float(rng.uniform(0.1, 20.0))
            beta = float(rng.uniform(0.1, 20.0))
            x = float(rng.uniform(0.0, 1.0))
            total = betainc_reg(x, alpha, beta) + betainc_reg(1.0 - x, beta, alpha)
            assert abs(total - 1.0) <= 1e-10

    def test_monotone_in_x(self):
        rng = np.random.default_rng(99)
        for _ in range(1000):
            params = IbfParams(s=float(rng.uniform(0.2, 40.0)),
                               a=float(rng.uniform(0.05, 0.95)))
            x1, x2 = sorted(rng.uniform(0.0, 1.0, 2))
            assert regularized_ibf(float(x1), params) <= regularized_ibf(float(x2), params)

    def test_strictly_increasing_on_interior(self):
        params = IbfParams(s=5.0, a=0.3)
        grid = [i / 200 for i in range(201)]
        vals = [regularized_ibf(x, params) for x in grid]
        for lo, hi in zip(vals, vals[1:]):
            assert hi > lo

    def test_range(self):
        rng = np.random.default_rng(5)
        for _ in range(300):
            v = betainc_reg(float(rng.uniform(0, 1)),
                            float(rng.uniform(0.1, 50)),
                            float(rng.uniform(0.1, 50)))
            assert 0.0 <= v <= 1.0


class TestOracleAgreement:
    def test_quadrature_oracle_close(self):
        """Module tolerance: 1e-10 against the pure-quadrature oracle."""
        rng = np.random.default_rng(31337)
        for _ in range(300):
            alpha = float(rng.uniform(0.1, 20.0))
            beta = float(rng.uniform(0.1, 20.0))
            x = float(rng.uniform(0.0, 1.0))
            assert betainc_reg(x, alpha, beta) == pytest.approx(
                ibf_quad(x, alpha, beta), abs=1e-10)

    def test_lopsided_shapes(self):
        """Both symmetry-switch branches get exercised near the endpoints."""
        for x, alpha, beta in [(0.02, 0.2, 18.0), (0.98, 18.0, 0.2),
                               (0.6, 1.5, 1.5), (0.999, 3.0, 3.0)]:
            assert betainc_reg(x, alpha, beta) == pytest.approx(
                ibf_quad(x, alpha, beta), abs=1e-10)

    def test_default_params_object(self):
        assert regularized_ibf(0.25) == pytest.approx(0.25, abs=1e-12)
        assert math.isclose(regularized_ibf(0.8, IbfParams(s=5.0, a=0.4)),
                            ibf_quad(0.8, 3.0, 2.0), abs_tol=1e-10)
