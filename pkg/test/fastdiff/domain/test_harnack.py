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

import numpy as np
import pytest
from numpy.testing import assert_allclose

from fastdiff.domain.harnack import BENILAN_CRANDALL_BOUND, \
    benilan_crandall_check, benilan_crandall_threshold, \
    bootstrap_exponents, ghp_check, ghp_window_shift, harnack_summary, \
    integrated_relerr, nu_tilde_u_exponent, relerr_bound_check, \
    trailing_sup, u_variable_refit
from fastdiff.params import BOUNDED_DOMAIN, make_params
from fastdiff.util import ParameterError
from test.tools import assert_almost_equal, bounded_run


@pytest.fixture(scope='module')
def run():
    return bounded_run()


class TestBootstrap(object):

    def test_two_steps(self):
        mu = bootstrap_exponents(make_params(1, 0.3, BOUNDED_DOMAIN,
                                             1 / 0.7))
        assert len(mu) == 2
        assert mu[0] < 1 <= mu[1]

    def test_one_step(self):
        mu = bootstrap_exponents(make_params(1, 0.5, BOUNDED_DOMAIN, 2))
        assert_allclose(mu, [2.0])

    def test_exponents_increase(self):
        mu = bootstrap_exponents(make_params(1, 0.05, BOUNDED_DOMAIN, 1.05))
        assert np.all(np.diff(mu) > 0)
        assert mu[-1] >= 1


class TestBenilanCrandall(object):

    def test_threshold(self):
        params = make_params(1, 0.75, BOUNDED_DOMAIN, 2)
        assert_almost_equal(benilan_crandall_threshold(params), 2 * log(2),
                            14)

    def test_run_respects_bound(self, run):
        params, op, state, trajectory = run
        report = benilan_crandall_check(trajectory, params)
        assert report.passed
        assert report.max_ratio < BENILAN_CRANDALL_BOUND
        assert report.asdict()['pass'] is True


class TestGlobalHarnack(object):

    def test_window(self, run):
        params, op, state, trajectory = run
        report = ghp_check(trajectory, op, params, 1.0, 0.8)
        assert report.finite
        assert report.ratio < 10
        assert report.window[0] == 0.8
        assert report.window[1] == pytest.approx(1 - np.exp(-3.0))
        assert report.C0_w <= 1 <= report.C1_w

    def test_window_shift_is_stable(self, run):
        params, op, state, trajectory = run
        early, late, change, stable = ghp_window_shift(trajectory, op,
                                                       params, 1.0)
        assert stable
        assert change <= 0.2
        assert late.ratio <= early.ratio * (1 + 1e-12)

    def test_window_past_extinction(self, run):
        params, op, state, trajectory = run
        with pytest.raises(ParameterError):
            ghp_check(trajectory, op, params, 1.0, 1.0)
        with pytest.raises(ParameterError):
            ghp_check(trajectory, op, params, 1.0, 0.99)

    def test_summary(self, run):
        params, op, state, trajectory = run
        summary = harnack_summary(trajectory, op, params)
        assert summary['ghp_stable']
        assert summary['benilan_crandall']['pass']


class TestRelativeErrorBounds(object):

    def test_trailing_sup(self):
        tau = np.arange(6.0)
        values = np.array([5.0, 1.0, 4.0, 2.0, 3.0, 0.0])
        assert_allclose(trailing_sup(tau, values), [5, 5, 4, 4, 3, 3])
        assert_allclose(trailing_sup(tau, values, lag=0.0),
                        [5, 4, 4, 3, 3, 0])

    def test_exponents(self, run):
        params, op, state, trajectory = run
        report = relerr_bound_check(trajectory, params, op)
        assert_almost_equal(report.exponent, 0.375, 14)
        assert_almost_equal(report.integrated_exponent, 0.75, 14)
        assert report.passed
        assert report.asdict()['pass']

    def test_integrated_relerr(self, run):
        trajectory = run[3]
        value = integrated_relerr(trajectory, 2.0)
        assert 0 <= value <= np.max(trajectory.column('relerr_sup'))
        with pytest.raises(ParameterError):
            integrated_relerr(trajectory, 5.95, 0.01)


class TestTimeVariables(object):

    def test_u_refit(self, run):
        params, op, state, trajectory = run
        refit = u_variable_refit(trajectory, params)
        assert refit.agreement < 0.01
        assert refit.expected == pytest.approx(refit.tau_fit.slope * 2)

    def test_u_exponent(self):
        params = make_params(1, 0.75, BOUNDED_DOMAIN, 2)
        assert_almost_equal(nu_tilde_u_exponent(1.0, params), 1.0, 14)
