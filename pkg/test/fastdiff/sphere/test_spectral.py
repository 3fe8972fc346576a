###
# Copyright 2024 the fastdiff developers.
# This file is part of fastdiff.
#
# fastdiff is free software: you can redistribute it and/or modify
# it under the terms of the GNU General Public License as published by
# the Free Software Foundation, either version 3 of the License, or
# (at your option) any later version.
#
# fastdiff is distributed in the hope that it will be useful,
# but WITHOUT ANY WARRANTY; without even the implied warranty of
# MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.  See the
# GNU General Public License for more details.
#
# You should have received a copy of the GNU General Public License
# along with fastdiff.  If not, see <http://www.gnu.org/licenses/>.
###

import numpy as np
import pytest
from numpy.testing import assert_allclose

from fastdiff.params import BOUNDED_DOMAIN, make_params
from fastdiff.sphere.bubble import SphereBubble
from fastdiff.sphere.spectral import WEIGHT_U, ZonalBasis, ZonalField, \
    alpha, alpha_ratio, apply_As, bubble_field, bubble_hs_norm_sq, \
    bubble_level, hs_inner, hs_norm, J_bubble, J_functional, \
    J_prime_residual, linearized_form, multiplicity, spectrum_closed_form, \
    taylor_remainder, weighted_l2
from fastdiff.util import ParameterError, SolverError
from test.tools import assert_almost_equal, assert_relative


class TestClosedFormSpectrum(object):

    def test_half_laplacian_in_three_dimensions(self):
        params = make_params(3, 0.5)
        report = spectrum_closed_form(params, 8)
        assert_allclose(report.asdict()['nu'], np.arange(9) - 1.0,
                        atol=1e-12)
        assert report.unstable == pytest.approx(-1.0)
        assert report.gap == pytest.approx(1.0)
        assert report.gap_degree == 2
        assert report.nu(1) == 0.0
        assert report.kappa(2) == pytest.approx(0.5)

    def test_laplacian_in_three_dimensions(self):
        params = make_params(3, 1)
        assert params.p == pytest.approx(5.0)
        report = spectrum_closed_form(params, 4)
        assert report.unstable == pytest.approx(-4.0)
        assert report.nu(1) == 0.0
        assert report.gap == pytest.approx(20.0 / 3)

    def test_mu_is_nu_plus_p(self):
        params = make_params(4, 0.7)
        report = spectrum_closed_form(params, 6)
        for entry in report.entries:
            assert_almost_equal(entry.mu, entry.nu + params.p, 12)
            assert_relative(entry.mu, entry.alpha / alpha(0, params), 1e-12)

    def test_kernel_is_degree_one(self):
        for N, s in ((2, 0.3), (3, 0.25), (5, 0.9)):
            report = spectrum_closed_form(make_params(N, s), 5)
            assert report.nu(1) == 0.0
            assert report.unstable < 0
            assert report.gap_degree == 2

    def test_ratio_matches_gamma_quotient(self):
        params = make_params(3, 0.3)
        for l in range(10):
            assert_relative(alpha_ratio(l, params),
                            alpha(l, params) / alpha(0, params), 1e-12)

    def test_multiplicity(self):
        assert [multiplicity(l, 2) for l in range(5)] == [1, 3, 5, 7, 9]
        assert [multiplicity(l, 3) for l in range(4)] == [1, 4, 9, 16]

    def test_rejects_bounded_domain(self):
        with pytest.raises(ParameterError):
            spectrum_closed_form(make_params(1, 0.5, BOUNDED_DOMAIN, 2), 8)

    def test_rejects_short_cutoff(self):
        with pytest.raises(ParameterError):
            spectrum_closed_form(make_params(3, 0.5), 1)


class TestZonalBasis(object):

    def setup_method(self):
        self.params = make_params(3, 0.5)
        self.basis = ZonalBasis(self.params, 16, 40)

    def test_orthonormal(self):
        Y, w = self.basis.Y, self.basis.weights
        assert_allclose(np.dot(Y.T, w[:, None] * Y), np.eye(17), atol=1e-12)

    def test_area(self):
        assert_almost_equal(self.basis.area, 2 * np.pi ** 2, 11)

    def test_grid_too_coarse(self):
        with pytest.raises(ParameterError):
            ZonalBasis(self.params, 16, 33)

    def test_mode_norms(self):
        assert_almost_equal(hs_norm(self.basis.mode(2)), 1.0, 12)
        assert_almost_equal(self.basis.mode(3, False).l2_norm(), 1.0, 12)
        with pytest.raises(ParameterError):
            self.basis.mode(17)

    def test_grid_coefficient_round_trip_of_band_limited_field(self):
        coeffs = 1.0 / (1.0 + np.arange(17)) ** 2
        field = ZonalField.from_coeffs(self.basis, coeffs)
        again = ZonalField.from_grid(self.basis, field.grid)
        assert_allclose(again.coeffs, coeffs, atol=1e-13)

    def test_fields_are_immutable(self):
        field = self.basis.constant(1.0)
        with pytest.raises(ValueError):
            field.grid[0] = 2.0

    def test_shape_errors(self):
        with pytest.raises(ParameterError):
            ZonalField.from_coeffs(self.basis, np.zeros(3))
        with pytest.raises(ParameterError):
            ZonalField(self.basis)

    def test_incompatible_bases(self):
        other = ZonalBasis(self.params, 8, 20)
        with pytest.raises(ParameterError):
            self.basis.constant(1.0) + other.constant(1.0)

    def test_arithmetic(self):
        a = self.basis.mode(2)
        b = self.basis.mode(4)
        combined = 2.0 * a - b
        assert_almost_equal(hs_inner(combined, a), 2.0, 12)
        assert_almost_equal(hs_inner(combined, b), -1.0, 12)


class TestBubbleSolvesEquation(object):

    def setup_method(self):
        self.params = make_params(3, 0.5)
        self.basis = ZonalBasis(self.params, 64, 160)

    def test_constant_bubble(self):
        U = bubble_field(self.basis)
        lhs = apply_As(U).grid
        assert_allclose(lhs, U.grid ** self.params.p, rtol=1e-12)
        assert J_prime_residual(U).weighted_norm < 1e-10

    @pytest.mark.parametrize('lam', [0.5, 1.0, 2.0])
    def test_scaled_bubbles(self, lam):
        field = SphereBubble(lam, self.params).field(self.basis)
        residual = apply_As(field).grid - field.grid ** self.params.p
        assert np.max(np.abs(residual)) < 1e-8
        assert J_prime_residual(field).weighted_norm < 1e-8

    @pytest.mark.parametrize('c', [0.5, 0.9, 0.999, 1.001, 1.2])
    def test_bubble_maximises_energy_along_its_ray(self, c):
        level = bubble_level(self.params)
        J_star = J_functional(self.basis.constant(level))
        assert J_functional(self.basis.constant(c * level)) < J_star

    def test_energy_of_bubble(self):
        U = bubble_field(self.basis)
        p = self.params.p
        assert_relative(hs_norm(U) ** 2, bubble_hs_norm_sq(self.basis), 1e-12)
        assert_relative(J_functional(U), J_bubble(self.basis), 1e-12)
        assert_relative(J_bubble(self.basis),
                        (0.5 - 1.0 / (p + 1)) * hs_norm(U) ** 2, 1e-12)

    def test_bubble_level(self):
        v = bubble_level(self.params)
        assert_relative(v ** (self.params.p - 1), alpha(0, self.params),
                        1e-12)

    def test_residual_needs_positive_field(self):
        field = self.basis.constant(-1.0)
        with pytest.raises(SolverError):
            J_prime_residual(field)


class TestLinearization(object):

    def setup_method(self):
        self.params = make_params(3, 0.5)
        self.basis = ZonalBasis(self.params, 16, 40)

    def test_form_on_modes_gives_nu(self):
        report = spectrum_closed_form(self.params, 16)
        for l in (0, 1, 2, 5):
            e = self.basis.mode(l, hs_normalized=False)
            weight = weighted_l2(e, weight=WEIGHT_U)
            assert_almost_equal(linearized_form(e) / weight, report.nu(l), 10)

    def test_mode_relations(self):
        report = spectrum_closed_form(self.params, 16)
        modes = [self.basis.mode(l) for l in range(7)]
        for i, ei in enumerate(modes):
            for j, ej in enumerate(modes):
                delta = 1.0 if i == j else 0.0
                mu = report.nu(j) + self.params.p
                assert abs(hs_inner(ei, ej) - delta) < 1e-9
                assert abs(weighted_l2(ei, ej, WEIGHT_U) - delta / mu) < 1e-9
                assert abs(linearized_form(ei, ej) -
                           delta * report.nu(j) / mu) < 1e-9

    def test_taylor_remainder_is_cubic(self):
        e = self.basis.mode(2)
        r1 = taylor_remainder(self.basis, e, 1e-2)
        r2 = taylor_remainder(self.basis, e, 5e-3)
        assert_relative(r1 / r2, 8.0, 0.01)

    def test_weighted_product_unknown_weight(self):
        e = self.basis.mode(0)
        with pytest.raises(ParameterError):
            weighted_l2(e, weight='nonsense')

    def test_u_weight_scales_by_alpha0(self):
        e = self.basis.mode(3)
        assert_relative(weighted_l2(e, weight=WEIGHT_U),
                        alpha(0, self.params) * weighted_l2(e), 1e-14)
