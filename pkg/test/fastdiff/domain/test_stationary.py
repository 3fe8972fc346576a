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

from fastdiff.domain.operator import RFL, SFL, build_operator
from fastdiff.domain.stationary import generalized_spectrum, \
    linearized_spectrum, ray_amplitude, ray_consistency, scaled_solution, \
    stationary_solve
from fastdiff.params import BOUNDED_DOMAIN, make_params
from fastdiff.util import ParameterError, SolverError
from test.tools import assert_almost_equal


@pytest.fixture(scope='module')
def ground_state():
    params = make_params(1, 0.75, BOUNDED_DOMAIN, 2)
    op = build_operator(SFL, 512, params, K=256)
    return params, op, stationary_solve(op, params, k=8)


class TestGroundState(object):

    def test_residual(self, ground_state):
        params, op, state = ground_state
        assert state.residual < 1e-9
        assert np.all(state.phi > 0)
        Aphi = op.apply(state.phi)
        interior = slice(64, 448)
        assert_allclose(Aphi[interior], state.phi[interior] ** 2,
                        rtol=1e-3)

    def test_grid_residual_includes_truncation(self, ground_state):
        params, op, state = ground_state
        grid = op.apply(state.phi) - state.phi ** 2
        assert_almost_equal(state.grid_residual_sup,
                            np.max(np.abs(grid)), 14)
        assert state.residual < state.grid_residual < 1e-3
        summary = state.asdict()
        assert summary['galerkin_residual'] == state.residual
        assert summary['grid_residual'] == state.grid_residual

    def test_morse_index_is_one(self, ground_state):
        params, op, state = ground_state
        assert state.spectrum.negative_count == 1
        assert state.nu_tilde > 0
        assert not state.degenerate_flag
        assert state.spectrum.tilde_index == 1

    def test_state_is_its_own_unstable_direction(self, ground_state):
        # A phi = phi^p makes phi an eigenfunction with nu = 1 - p
        params, op, state = ground_state
        assert_almost_equal(state.spectrum.nu[0], 1 - params.p, 8)

    def test_eigenvectors_have_unit_energy(self, ground_state):
        params, op, state = ground_state
        E = state.spectrum.vectors
        assert_allclose(np.dot(E.T, np.dot(op.stiffness, E)), np.eye(8),
                        atol=1e-8)
        assert np.max(state.spectrum.residuals) < 1e-6

    def test_ray_consistency(self, ground_state):
        params, op, state = ground_state
        ratio = ray_consistency(state, op, params)
        assert 0.5 < ratio < 2.0

    def test_asdict(self, ground_state):
        d = ground_state[2].asdict()
        assert d['negative_count'] == 1
        assert len(d['nu']) == 8


class TestScaling(object):

    def test_half_interval(self):
        params = make_params(1, 0.75, BOUNDED_DOMAIN, 2)
        unit = stationary_solve(build_operator(SFL, 128, params, K=64),
                                params)
        half_op = build_operator(SFL, 128, params, K=64, length=0.5)
        half = stationary_solve(half_op, params)
        assert_allclose(half.phi, scaled_solution(unit.phi, params, 2.0),
                        rtol=1e-8)

    def test_rfl_ground_state(self):
        params = make_params(1, 0.5, BOUNDED_DOMAIN, 1.5)
        op = build_operator(RFL, 128, params)
        state = stationary_solve(op, params, k=4)
        assert state.residual < 1e-9
        assert state.grid_residual < 1e-8
        assert state.spectrum.negative_count == 1


class TestGeneralizedSpectrum(object):

    def test_identity_weight(self):
        stiffness = np.diag([1.0, 4.0, 9.0, 16.0])
        D = 2.0 * np.eye(4)
        spectrum = generalized_spectrum(stiffness, D, 2.0)
        assert_allclose(spectrum.nu, [-1.5, 0.0, 2.5, 6.0], atol=1e-14)
        assert spectrum.degenerate
        assert spectrum.negative_count == 1
        assert spectrum.nu_tilde == pytest.approx(2.5)
        assert spectrum.tilde_index == 2
        assert_allclose(spectrum.mu, spectrum.nu + 2.0)

    def test_partial_spectrum(self):
        stiffness = np.diag([1.0, 4.0, 9.0, 16.0])
        spectrum = generalized_spectrum(stiffness, np.eye(4), 0.5, k=2)
        assert_allclose(spectrum.nu, [0.5, 3.5])

    def test_singular_weight(self):
        with pytest.raises(SolverError):
            generalized_spectrum(np.eye(2), np.diag([1.0, 0.0]), 2.0)

    def test_linearization_needs_positive_state(self):
        params = make_params(1, 0.5, BOUNDED_DOMAIN, 2)
        op = build_operator(SFL, 32, params)
        phi = np.ones(32)
        phi[3] = 0.0
        with pytest.raises(SolverError):
            linearized_spectrum(phi, op, params)


class TestStationaryErrors(object):

    def setup_method(self):
        self.params = make_params(1, 0.5, BOUNDED_DOMAIN, 2)
        self.op = build_operator(SFL, 32, self.params)

    def test_whole_space(self):
        with pytest.raises(ParameterError):
            stationary_solve(self.op, make_params(3, 0.5))

    def test_nonpositive_guess(self):
        with pytest.raises(ParameterError):
            stationary_solve(self.op, self.params, init=-self.op.Phi)

    def test_ray_amplitude(self):
        c = ray_amplitude(self.op, self.params)
        moment = self.op.integrate(self.op.Phi ** 3)
        assert_almost_equal(self.op.lambda1 * c, c ** 2 * moment, 10)
