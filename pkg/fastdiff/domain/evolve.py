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
"""Rescaled flow d(w^p)/dtau + A w = w^p on the interval.

In Galerkin form p D(w) w' = h Psi^T w^p - stiffness w, D(w) the
w^{p-1}-weighted mass matrix. The default ROS2 stepper is the two stage
Rosenbrock W-method with its Jacobian frozen at the stationary state.
"""

from math import sqrt

import numpy as np
from scipy import linalg

from fastdiff import settings
from fastdiff.domain.stationary import stationary_solve
from fastdiff.log import logging
from fastdiff.util import ParameterError, StepSizeError, isnum

logger = logging.getLogger("fastdiff.domain.evolve")

ROS2 = 'ROS2'
RK4 = 'RK4'
IMEX = 'IMEX'
STEPPERS = (ROS2, RK4, IMEX)

ROS2_GAMMA = 1 + 1 / sqrt(2)

DOMAIN_TAU_END = 6.0


class DomainFlowConfig(object):

    def __init__(self, dt=None, tau_end=None, output_every=None,
                 stepper=None, positivity_floor=None, calibrate=None):
        def pick(value, default):
            return default if value is None else value

        self.dt = float(pick(dt, settings.domain_dt))
        self.tau_end = float(pick(tau_end, DOMAIN_TAU_END))
        self.output_every = pick(output_every, settings.output_every)
        self.stepper = pick(stepper, settings.domain_stepper)
        self.positivity_floor = float(pick(positivity_floor,
                                           settings.positivity_floor))
        self.calibrate = bool(pick(calibrate, settings.calibrate))
        if not self.dt > 0 or not self.tau_end > 0:
            raise ParameterError("Domain dt and tau_end must be positive")
        if (not isnum(self.output_every) or self.output_every < 1 or
                int(self.output_every) != self.output_every):
            raise ParameterError("output_every must be a positive integer")
        self.output_every = int(self.output_every)
        if self.stepper not in STEPPERS:
            raise ParameterError("Unknown domain stepper %r, expected one of "
                                 "%s" % (self.stepper, ', '.join(STEPPERS)))

    @property
    def nsteps(self):
        return int(round(self.tau_end / self.dt))

    def asdict(self):
        return {'dt': self.dt, 'tau_end': self.tau_end,
                'output_every': self.output_every, 'stepper': self.stepper,
                'positivity_floor': self.positivity_floor,
                'calibrate': self.calibrate}


class DomainRecord(object):

    __slots__ = ('tau', 'H_norm', 'relerr_sup', 'J_gap')

    def __init__(self, tau, H_norm, relerr_sup, J_gap):
        self.tau = tau
        self.H_norm = H_norm
        self.relerr_sup = relerr_sup
        self.J_gap = J_gap

    def values(self):
        return [self.tau, self.H_norm, self.relerr_sup, self.J_gap]


class DomainTrajectory(list):
    """Records plus the recorded w grids, one row per output."""

    def __init__(self, params, op, state, config):
        list.__init__(self)
        self.params = params
        self.op = op
        self.state = state
        self.config = config
        self.grids = []
        self.degenerate = False
        self.calibration_factor = 1.0

    def column(self, name):
        return np.array([getattr(r, name) for r in self])

    def w_grids(self):
        return np.array(self.grids)


class _GalerkinFlow(object):

    def __init__(self, op, params, state, config):
        self.op = op
        self.p = params.p
        self.config = config
        self.floor_hit = False
        p = self.p
        if config.stepper == ROS2:
            D = op.weighted_mass(state.phi ** (p - 1))
            jac = np.eye(op.K) - linalg.solve(p * D, op.stiffness,
                                              assume_a='pos')
            W = np.eye(op.K) - ROS2_GAMMA * config.dt * jac
            self._lu = linalg.lu_factor(W)

    def grid(self, c):
        w = self.op.to_grid(c)
        if not np.all(np.isfinite(w)):
            raise StepSizeError("Non-finite state in the domain flow")
        floor = self.config.positivity_floor
        if np.any(w <= floor):
            self.floor_hit = True
            w = np.maximum(w, floor)
        return w

    def rhs(self, c):
        op, p = self.op, self.p
        w = self.grid(c)
        D = op.weighted_mass(w ** (p - 1))
        g = op.load(w ** p) - np.dot(op.stiffness, c)
        return linalg.solve(p * D, g, assume_a='pos')

    def step(self, c, dt):
        stepper = self.config.stepper
        if stepper == ROS2:
            k1 = linalg.lu_solve(self._lu, self.rhs(c))
            k2 = linalg.lu_solve(self._lu, self.rhs(c + dt * k1) - 2 * k1)
            return c + 1.5 * dt * k1 + 0.5 * dt * k2
        if stepper == RK4:
            k1 = self.rhs(c)
            k2 = self.rhs(c + 0.5 * dt * k1)
            k3 = self.rhs(c + 0.5 * dt * k2)
            k4 = self.rhs(c + dt * k3)
            return c + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        # linearly implicit Euler: stiffness implicit, w^p explicit
        op, p = self.op, self.p
        w = self.grid(c)
        pD = p * op.weighted_mass(w ** (p - 1))
        return linalg.solve(pD + dt * op.stiffness,
                            np.dot(pD, c) + dt * op.load(w ** p),
                            assume_a='pos')

    def advance(self, c, nsteps):
        for _ in range(nsteps):
            c = self.step(c, self.config.dt)
        return c


def J_gap(op, params, c, phi_coeffs, phi):
    """J(w) - J(phi) from the increment w - phi."""
    p = params.p
    w = op.to_grid(c)
    dc = c - phi_coeffs
    kinetic = 0.5 * float(np.dot(dc, np.dot(op.stiffness, c + phi_coeffs)))
    potential = op.integrate(
        phi ** (p + 1) * np.expm1((p + 1) * np.log1p((w - phi) / phi)))
    return kinetic - potential / (p + 1)


def _unstable_component(state, op, params, c):
    e0 = state.spectrum.vectors[:, 0]
    D = op.weighted_mass(state.phi ** (params.p - 1))
    return float(np.dot(e0, np.dot(D, c - state.coeffs)))


def calibrate_bounded(initial, op, params, state, config):
    """Scale the datum so the component along the unstable eigenfunction
    vanishes at tau_end; secant iteration as on the sphere.
    """
    flow = _GalerkinFlow(op, params, state, config)
    c_init = op.to_coeffs(initial)

    def residual(scale):
        end = flow.advance(scale * c_init, config.nsteps)
        return _unstable_component(state, op, params, end)

    a0, a1 = 1.0, 1.0 + 1e-6
    f0, f1 = residual(a0), residual(a1)
    for iteration in range(settings.calibration_iterations):
        if f1 == f0 or f1 == 0.0:
            break
        a0, a1 = a1, a1 - f1 * (a1 - a0) / (f1 - f0)
        f0, f1 = f1, residual(a1)
        logger.debug("Bounded calibration %d: scale=%.15g component=%.3e",
                     iteration + 1, a1, f1)
        if abs(a1 - a0) < 1e-15:
            break
    if abs(f1) > abs(f0):
        a1 = a0
    return a1 * np.asarray(initial, dtype=float), a1


def evolve_bounded(initial, op, params, config=None, state=None):
    """Integrate from a positive grid function; records the energy norm of
    w - phi, sup |w/phi - 1| and J(w) - J(phi) every output_every steps.
    """
    config = DomainFlowConfig() if config is None else config
    state = stationary_solve(op, params) if state is None else state
    initial = np.asarray(initial, dtype=float)
    if initial.shape != (op.M,) or np.any(initial <= 0):
        raise ParameterError("Initial datum must be a positive grid function "
                             "on the %d interior nodes" % op.M)
    trajectory = DomainTrajectory(params, op, state, config)
    if config.calibrate:
        initial, trajectory.calibration_factor = calibrate_bounded(
            initial, op, params, state, config)
    flow = _GalerkinFlow(op, params, state, config)
    phi, phi_c = state.phi, state.coeffs

    def record(tau, c):
        w = flow.grid(c)
        trajectory.append(DomainRecord(
            tau, op.q_norm(c - phi_c), float(np.max(np.abs(w / phi - 1))),
            J_gap(op, params, c, phi_c, phi)))
        trajectory.grids.append(w)

    c = op.to_coeffs(initial)
    record(0.0, c)
    for k in range(1, config.nsteps + 1):
        c = flow.step(c, config.dt)
        if k % config.output_every == 0:
            record(k * config.dt, c)
    trajectory.degenerate = flow.floor_hit
    if flow.floor_hit:
        logger.warning("Positivity floor bound in the domain flow")
    logger.debug("Domain run finished: H_norm %.3e -> %.3e",
                 trajectory[0].H_norm, trajectory[-1].H_norm)
    return trajectory
