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

from math import pi

import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy import special as sf
from scipy.integrate import quad

from fastdiff.special import LEGENDRE, ZONAL, gamma_ratio, gegenbauer, \
    gegenbauer_at_one, gegenbauer_table, log_gamma, quad_rule, sphere_area, \
    sphere_rule
from fastdiff.util import ParameterError
from test.tools import assert_almost_equal


class TestGamma(object):

    def test_log_gamma(self):
        assert_almost_equal(log_gamma(5.0), np.log(24.0), 12)
        assert_allclose(log_gamma([1.0, 2.0, 0.5]),
                        [0.0, 0.0, 0.5 * np.log(pi)], atol=1e-14)

    def test_log_gamma_rejects_nonpositive(self):
        with pytest.raises(ParameterError):
            log_gamma(0.0)

    def test_gamma_ratio(self):
        assert_almost_equal(gamma_ratio(2.5, 0.5), 0.75, 13)
        assert_allclose(gamma_ratio(np.array([3.0, 4.0]), 1.0), [2.0, 6.0],
                        rtol=1e-13)

    def test_sphere_area(self):
        assert sphere_area(0) == 2.0
        assert_almost_equal(sphere_area(1), 2 * pi, 13)
        assert_almost_equal(sphere_area(2), 4 * pi, 13)
        assert_almost_equal(sphere_area(3), 2 * pi ** 2, 12)
        with pytest.raises(ParameterError):
            sphere_area(-1)


class TestGegenbauer(object):

    @pytest.mark.parametrize('a', [0.5, 1.0, 1.5, 2.5])
    def test_against_scipy(self, a):
        t = np.linspace(-1, 1, 41)
        table = gegenbauer_table(12, a, t)
        for l in range(13):
            assert_allclose(table[:, l], sf.eval_gegenbauer(l, a, t),
                            rtol=1e-11, atol=1e-11)

    def test_single_degree(self):
        assert_allclose(gegenbauer(3, 1.0, 0.3), sf.eval_gegenbauer(3, 1.0,
                                                                    0.3))

    def test_value_at_one(self):
        for a in (0.5, 1.0, 2.0):
            for l in range(8):
                assert_allclose(gegenbauer(l, a, 1.0),
                                gegenbauer_at_one(l, a), rtol=1e-12)

    def test_invalid(self):
        with pytest.raises(ParameterError):
            gegenbauer_table(-1, 1.0, 0.0)
        with pytest.raises(ParameterError):
            gegenbauer_table(3, 0.0, 0.0)
        with pytest.raises(ParameterError):
            gegenbauer_table(3, 1.0, 1.5)


class TestQuadRule(object):

    def test_legendre_matches_numpy(self):
        rule = quad_rule(LEGENDRE, 20)
        x, w = np.polynomial.legendre.leggauss(20)
        assert_allclose(rule.nodes, x, atol=1e-14)
        assert_allclose(rule.weights, w, atol=1e-14)

    def test_legendre_exactness(self):
        rule = quad_rule(LEGENDRE, 10)
        for k in range(20):
            exact = 0.0 if k % 2 else 2.0 / (k + 1)
            assert_almost_equal(rule.integrate(rule.nodes ** k), exact, 13)

    def test_zonal_weight_odd_N(self):
        # N = 3: weight (1 - t^2)^{1/2}
        rule = quad_rule(ZONAL, 12, 3)
        assert_almost_equal(np.sum(rule.weights), pi / 2, 13)
        assert_almost_equal(rule.integrate(rule.nodes ** 2), pi / 8, 13)

    def test_zonal_exactness_against_quad(self):
        N = 5
        rule = quad_rule(ZONAL, 8, N)
        for k in (0, 2, 7, 10, 15):
            exact = quad(lambda t: t ** k * (1 - t * t) ** ((N - 2) / 2.0),
                         -1, 1, epsabs=1e-14)[0]
            assert_almost_equal(rule.integrate(rule.nodes ** k), exact, 12)

    def test_zonal_N2_is_legendre(self):
        assert_allclose(quad_rule(ZONAL, 9, 2).nodes,
                        quad_rule(LEGENDRE, 9).nodes)

    def test_invalid(self):
        with pytest.raises(ParameterError):
            quad_rule(LEGENDRE, 1)
        with pytest.raises(ParameterError):
            quad_rule(ZONAL, 8)
        with pytest.raises(ParameterError):
            quad_rule('Hermite', 8)

    def test_nodes_are_read_only(self):
        rule = quad_rule(LEGENDRE, 4)
        with pytest.raises(ValueError):
            rule.nodes[0] = 0.0


class TestSphereRule(object):

    def test_S2(self):
        points, weights = sphere_rule(2, 8)
        assert points.shape == (16 * 8, 3)
        assert_allclose(np.sum(points ** 2, axis=1), 1.0, rtol=1e-14)
        assert_almost_equal(np.sum(weights), 4 * pi, 12)
        assert_almost_equal(np.dot(weights, points[:, 2] ** 2), 4 * pi / 3,
                            12)
        assert_almost_equal(np.dot(weights, points[:, 0] ** 2), 4 * pi / 3,
                            12)

    def test_S3_monomials(self):
        points, weights = sphere_rule(3, 6)
        assert_almost_equal(np.sum(weights), 2 * pi ** 2, 11)
        # int x_i^2 = |S^3|/4, int x_1^2 x_4^2 = |S^3|/24
        area = 2 * pi ** 2
        for i in range(4):
            assert_almost_equal(np.dot(weights, points[:, i] ** 2),
                                area / 4, 11)
        assert_almost_equal(np.dot(weights, points[:, 0] ** 2 *
                                   points[:, 3] ** 2), area / 24, 11)

    def test_odd_moments_vanish(self):
        points, weights = sphere_rule(2, 5)
        assert abs(np.dot(weights, points[:, 1] ** 3)) < 1e-13
