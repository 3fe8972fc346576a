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

from math import log

import pytest

from fastdiff.params import BOUNDED_DOMAIN, WHOLE_SPACE, make_params, \
    sharp_exponents, t_of_tau, tau_of_t, time_map, u_time_exponent
from fastdiff.util import ParameterError
from test.tools import assert_almost_equal


class TestMakeParams(object):

    def test_whole_space_uses_critical_exponent(self):
        params = make_params(3, 0.5)
        assert params.p == 2.0
        assert params.m == 0.5
        assert params.regime == WHOLE_SPACE
        assert_almost_equal(params.beta, 1.0)

    def test_whole_space_s_one(self):
        params = make_params(3, 1.0)
        assert_almost_equal(params.p, 5.0, 12)

    def test_whole_space_ignores_p(self):
        assert make_params(3, 0.5, p_opt=7.0).p == 2.0

    def test_whole_space_needs_N_above_2s(self):
        with pytest.raises(ParameterError):
            make_params(1, 0.5)

    @pytest.mark.parametrize('N,s', [(0, 0.5), (2.0, 0.5), (True, 0.5),
                                     (3, 0.0), (3, 1.5), (3, 'half')])
    def test_invalid_inputs(self, N, s):
        with pytest.raises(ParameterError):
            make_params(N, s)

    def test_unknown_regime(self):
        with pytest.raises(ParameterError):
            make_params(3, 0.5, 'Torus')

    def test_bounded_domain(self):
        params = make_params(1, 0.75, BOUNDED_DOMAIN, 2)
        assert params.p == 2.0
        assert params.m == 0.5
        assert params.critical_p == float('inf')

    def test_bounded_domain_needs_p(self):
        with pytest.raises(ParameterError):
            make_params(1, 0.75, BOUNDED_DOMAIN)

    def test_bounded_domain_subcritical(self):
        # (1 + 0.6)/(1 - 0.6) = 4
        make_params(1, 0.3, BOUNDED_DOMAIN, 3.9)
        with pytest.raises(ParameterError):
            make_params(1, 0.3, BOUNDED_DOMAIN, 4.5)
        with pytest.raises(ParameterError):
            make_params(1, 0.3, BOUNDED_DOMAIN, 1.0)

    def test_bounded_domain_needs_s_below_one(self):
        with pytest.raises(ParameterError):
            make_params(1, 1.0, BOUNDED_DOMAIN, 2)

    def test_immutable(self):
        params = make_params(3, 0.5)
        with pytest.raises(AttributeError):
            params.p = 3.0

    def test_equality_and_hash(self):
        assert make_params(3, 0.5) == make_params(3, 0.5)
        assert make_params(3, 0.5) != make_params(4, 0.5)
        assert len(set([make_params(3, 0.5), make_params(3, 0.5)])) == 1


class TestSharpExponents(object):

    def setup_method(self):
        self.params = make_params(3, 0.5)

    def test_rates_at_N3_half(self):
        rates = sharp_exponents(self.params)
        assert_almost_equal(rates.rate_w_hs, 0.5, 14)
        assert_almost_equal(rates.rate_J, 1.0, 14)
        assert_almost_equal(rates.rate_u, 1.0, 14)
        assert_almost_equal(rates.rate_relerr_bound, 0.25, 14)

    def test_bounded_domain_rejected(self):
        with pytest.raises(ParameterError):
            sharp_exponents(make_params(1, 0.75, BOUNDED_DOMAIN, 2))

    def test_nonpositive_T_star(self):
        with pytest.raises(ParameterError):
            sharp_exponents(self.params, 0.0)


class TestTimeMap(object):

    def setup_method(self):
        self.params = make_params(3, 0.5)

    def test_origin(self):
        assert tau_of_t(2.0, self.params, 0.0) == 0.0

    def test_known_value(self):
        # p = 2: tau = -2 log(1 - t/T*)
        assert_almost_equal(tau_of_t(1.0, self.params, 0.75), -2 * log(0.25),
                            12)

    def test_inverse(self):
        for tau in (0.1, 1.0, 5.0, 20.0):
            t = t_of_tau(3.0, self.params, tau)
            assert_almost_equal(tau_of_t(3.0, self.params, t) / tau, 1.0, 10)

    def test_time_map_alias(self):
        assert time_map(1.0, self.params, 0.5) == tau_of_t(1.0, self.params,
                                                           0.5)

    def test_past_extinction(self):
        with pytest.raises(ParameterError):
            tau_of_t(1.0, self.params, 1.0)
        with pytest.raises(ParameterError):
            tau_of_t(1.0, self.params, -0.1)
        with pytest.raises(ParameterError):
            t_of_tau(1.0, self.params, -1.0)

    def test_u_time_exponent(self):
        assert_almost_equal(u_time_exponent(0.5, self.params), 1.0, 14)
