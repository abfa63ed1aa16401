import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import f_cdf_quadrature, t_cdf_quadrature

from markovorder import f_cdf, reg_inc_beta, t_cdf
from markovorder.errors import DomainError, InvalidDfError, InvalidInputError


class TestRegIncBeta:
    def test_boundaries(self):
        assert reg_inc_beta(0.0, 2.5, 3.5) == 0.0
        assert reg_inc_beta(1.0, 2.5, 3.5) == 1.0

    def test_uniform(self):
        assert reg_inc_beta(0.5, 1.0, 1.0) == pytest.approx(0.5, abs=1e-14)

    @settings(max_examples=100, deadline=None)
    @given(st.floats(0.001, 0.999), st.floats(0.5, 25.0))
    def test_closed_form_a_equals_one(self, x, b):
        expected = 1.0 - (1.0 - x) ** b
        assert reg_inc_beta(x, 1.0, b) == pytest.approx(expected, abs=1e-12)

    @settings(max_examples=100, deadline=None)
    @given(st.floats(0.001, 0.999), st.floats(0.5, 40.0), st.floats(0.5, 40.0))
    def test_complement_symmetry(self, x, a, b):
        assert reg_inc_beta(x, a, b) + reg_inc_beta(1.0 - x, b, a) == pytest.approx(1.0, abs=1e-12)

    def test_domain_errors(self):
        with pytest.raises(DomainError):
            reg_inc_beta(-0.1, 1.0, 1.0)
        with pytest.raises(DomainError):
            reg_inc_beta(1.1, 1.0, 1.0)
        with pytest.raises(DomainError):
            reg_inc_beta(0.5, 0.0, 1.0)


class TestTCdf:
    def test_zero_is_half(self):
        for df in (1, 2, 10, 153):
            assert t_cdf(0.0, df) == 0.5

    def test_reference_quantile(self):
        # 95th percentile of t with 10 degrees of freedom is 1.8125
        assert t_cdf(1.8125, 10) == pytest.approx(0.95, abs=1e-4)

    @settings(max_examples=80, deadline=None)
    @given(st.floats(-30.0, 30.0), st.integers(1, 300))
    def test_symmetry(self, x, df):
        assert t_cdf(-x, df) + t_cdf(x, df) == pytest.approx(1.0, abs=1e-12)

    @pytest.mark.parametrize("df", [1, 3, 12, 120])
    def test_quadrature_oracle(self, df):
        for x in np.linspace(-5, 5, 9):
            assert t_cdf(float(x), df) == pytest.approx(
                t_cdf_quadrature(float(x), df), abs=1e-10)

    def test_monotone_in_x(self):
        grid = np.linspace(-8, 8, 100)
        vals = [t_cdf(float(x), 7) for x in grid]
        assert all(b >= a for a, b in zip(vals, vals[1:]))
        assert all(0.0 <= v <= 1.0 for v in vals)

    def test_invalid_df(self):
        with pytest.raises(InvalidDfError):
            t_cdf(1.0, 0)


class TestFCdf:
    @pytest.mark.parametrize("d", [1, 4, 20, 133])
    def test_unit_point_symmetry(self, d):
        assert f_cdf(1.0, d, d) == pytest.approx(0.5, abs=1e-12)

    @settings(max_examples=80, deadline=None)
    @given(st.floats(0.05, 20.0), st.integers(1, 200), st.integers(1, 200))
    def test_reciprocal_identity(self, x, d1, d2):
        assert f_cdf(x, d1, d2) == pytest.approx(1.0 - f_cdf(1.0 / x, d2, d1), abs=1e-12)

    @pytest.mark.parametrize("d1,d2", [(2, 9), (5, 7), (30, 30), (133, 20)])
    def test_quadrature_oracle(self, d1, d2):
        for x in np.linspace(0.2, 6.0, 8):
            assert f_cdf(float(x), d1, d2) == pytest.approx(
                f_cdf_quadrature(float(x), d1, d2), abs=1e-10)

    def test_monotone_in_x(self):
        grid = np.linspace(0.01, 12, 100)
        vals = [f_cdf(float(x), 6, 11) for x in grid]
        assert all(b >= a for a, b in zip(vals, vals[1:]))
        assert all(0.0 <= v <= 1.0 for v in vals)

    def test_invalid_inputs(self):
        with pytest.raises(InvalidInputError):
            f_cdf(0.0, 3, 3)
        with pytest.raises(InvalidInputError):
            f_cdf(1.0, 0, 3)
