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
"""Rescaled fast diffusion flow on S^N in the zonal class.

The state is the coefficient vector Q of q = v^p, truncated at degree L, and

    dQ/dtau = Q - alpha * analyze((synth Q)^{1/p})

is the Galerkin form of d(v^p)/dtau + A_s v = v^p.
"""

from collections import namedtuple
from math import exp

import numpy as np

from fastdiff import settings
from fastdiff.log import logging
from fastdiff.sphere.bubble import bubble_on_sphere, nearest_bubble
from fastdiff.sphere.spectral import (ZonalBasis, ZonalField, J_bubble,
                                      J_prime_residual, alpha, bubble_level,
                                      spectrum_closed_form)
from fastdiff.util import DegenerateRunError, ParameterError, StepSizeError, \
    isnum

logger = logging.getLogger("fastdiff.sphere.flow")

RK4 = 'RK4'
IMEX = 'IMEX'
STEPPERS = (RK4, IMEX)

# extent of the classical RK4 stability region on the negative real axis
RK4_REAL_EXTENT = 2.78

SIGMA_DEGREES = (0, 1, 2, 3, 4)

# other degrees relative to degree 0 below which a datum counts as unstable
UNSTABLE_DOMINANCE = 1e-6


class FlowConfig(object):
    """Time stepping for one sphere run. Defaults come from fastdiff.settings.

    The explicit stability bound dt alpha(L) / (p alpha(0)) is checked here,
    against the extent of the RK4 region times stability_factor.
    """

    def __init__(self, params, dt=None, tau_end=None, L=None, n=None,
                 output_every=None, stepper=None, positivity_floor=None,
                 stability_factor=None, calibrate=None,
                 abort_degenerate=None):
        def pick(value, default):
            return default if value is None else value

        self.params = params
        self.dt = float(pick(dt, settings.dt))
        self.tau_end = float(pick(tau_end, settings.tau_end))
        self.L = int(pick(L, settings.L))
        self.n = int(pick(n, settings.n_quad))
        self.output_every = pick(output_every, settings.output_every)
        self.stepper = pick(stepper, settings.stepper)
        self.positivity_floor = float(pick(positivity_floor,
                                           settings.positivity_floor))
        self.stability_factor = float(pick(stability_factor,
                                           settings.stability_factor))
        self.calibrate = bool(pick(calibrate, settings.calibrate))
        self.abort_degenerate = bool(pick(abort_degenerate,
                                          settings.abort_degenerate))
        self._validate()

    def _validate(self):
        if not self.dt > 0:
            raise ParameterError("flow dt must be positive, got %r" % self.dt)
        if not self.tau_end > 0:
            raise ParameterError("tau_end must be positive, got %r"
                                 % self.tau_end)
        if (not isnum(self.output_every) or int(self.output_every) !=
                self.output_every or self.output_every < 1):
            raise ParameterError("output_every must be a positive integer")
        self.output_every = int(self.output_every)
        if self.stepper not in STEPPERS:
            raise ParameterError("Unknown stepper %r, expected one of %s"
                                 % (self.stepper, ', '.join(STEPPERS)))
        if self.positivity_floor < 0:
            raise ParameterError("positivity_floor must be >= 0")
        stiffness = self.stiffness()
        if stiffness > self.stability_factor * RK4_REAL_EXTENT:
            raise StepSizeError(
                "dt=%g violates the explicit stability bound: dt*alpha(L)/"
                "(p*alpha(0)) = %.4g > %.4g" % (
                    self.dt, stiffness,
                    self.stability_factor * RK4_REAL_EXTENT))

    def stiffness(self):
        a = alpha(np.array([0, self.L]), self.params)
        return self.dt * a[1] / (self.params.p * a[0])

    @property
    def nsteps(self):
        return int(round(self.tau_end / self.dt))

    def asdict(self):
        return {'dt': self.dt, 'tau_end': self.tau_end, 'L': self.L,
                'n': self.n, 'output_every': self.output_every,
                'stepper': self.stepper,
                'positivity_floor': self.positivity_floor,
                'stability_factor': self.stability_factor,
                'calibrate': self.calibrate,
                'abort_degenerate': self.abort_degenerate}


class TrajectoryRecord(object):

    __slots__ = ('tau', 'J_gap', 'hs_dist', 'lambda_star', 'sigma',
                 'relerr_sup', 'residual_weighted', 'dissipation_residual')

    def __init__(self, tau, J_gap, hs_dist, lambda_star, sigma, relerr_sup,
                 residual_weighted, dissipation_residual):
        self.tau = tau
        self.J_gap = J_gap
        self.hs_dist = hs_dist
        self.lambda_star = lambda_star
        self.sigma = sigma
        self.relerr_sup = relerr_sup
        self.residual_weighted = residual_weighted
        self.dissipation_residual = dissipation_residual

    def values(self):
        return [self.tau, self.J_gap, self.hs_dist, self.lambda_star,
                self.relerr_sup, self.residual_weighted,
                self.dissipation_residual] + list(self.sigma)

    def __repr__(self):
        return ('TrajectoryRecord(tau=%g, J_gap=%.3e, hs_dist=%.3e, '
                'lambda_star=%.12g)' % (self.tau, self.J_gap, self.hs_dist,
                                        self.lambda_star))


class Trajectory(list):
    """Records of one run plus the flags of the run as a whole."""

    def __init__(self, params, config, records=()):
        list.__init__(self, records)
        self.params = params
        self.config = config
        self.degenerate = False
        self.calibration_factor = 1.0
        self.max_dissipation_residual = 0.0
        self.final = None

    def column(self, name):
        return np.array([getattr(r, name) for r in self])

    def sigma(self, l):
        return np.array([r.sigma[l] for r in self])


def _potential_difference(v1, v0, p):
    # v1^{p+1} - v0^{p+1} without cancellation
    return v0 ** (p + 1) * np.expm1((p + 1) * np.log1p((v1 - v0) / v0))


def J_difference(f1, f0):
    """J(f1) - J(f0) from the exact grid increment."""
    basis = f1.basis
    p = f1.params.p
    c1, c0 = f1.coeffs, f0.coeffs
    kinetic = 0.5 * float(np.dot(basis.alpha * (c1 - c0), c1 + c0))
    potential = basis.integrate(
        _potential_difference(f1.grid, f0.grid, p)) / (p + 1)
    return kinetic - potential


def dissipation_check(pre_step, post_step, dt):
    """|dJ/dtau + 4p/(p+1)^2 int (d v^{(p+1)/2}/dtau)^2| over one step."""
    p = pre_step.params.p
    basis = pre_step.basis
    v0, v1 = pre_step.grid, post_step.grid
    dJ = J_difference(post_step, pre_step)
    half = (p + 1) / 2.0
    dh = v0 ** half * np.expm1(half * np.log1p((v1 - v0) / v0))
    dissipation = 4 * p / (p + 1) ** 2 * basis.integrate((dh / dt) ** 2)
    return abs(dJ / dt + dissipation)


class FlowSolver(object):
    """Advances Q over fixed steps with RK4 or the Lawson integrating factor
    variant of RK4 (stepper IMEX) that treats the +Q term exactly.
    """

    def __init__(self, basis, config):
        if not basis.compatible(ZonalBasis(config.params, config.L,
                                           config.n)):
            raise ParameterError("Basis does not match the flow config")
        self.basis = basis
        self.config = config
        self.p = config.params.p
        self.floor_hit = False

    def q_coeffs(self, field):
        v = field.grid
        if np.any(v <= 0):
            raise ParameterError("Initial datum must be positive on the grid")
        return self.basis.analyze(v ** self.p)

    def v_grid(self, Q):
        q = self.basis.synth(Q)
        if not np.all(np.isfinite(q)):
            raise StepSizeError("Non-finite state in the flow; reduce dt")
        floor = self.config.positivity_floor
        if np.any(q <= floor):
            self.floor_hit = True
            q = np.maximum(q, floor)
        return q ** (1.0 / self.p)

    def field(self, Q):
        return ZonalField.from_grid(self.basis, self.v_grid(Q))

    def nonlinear(self, Q):
        return -self.basis.alpha * self.basis.analyze(self.v_grid(Q))

    def rhs(self, Q):
        return Q + self.nonlinear(Q)

    def step(self, Q, dt):
        if self.config.stepper == RK4:
            k1 = self.rhs(Q)
            k2 = self.rhs(Q + 0.5 * dt * k1)
            k3 = self.rhs(Q + 0.5 * dt * k2)
            k4 = self.rhs(Q + dt * k3)
            return Q + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        E = exp(0.5 * dt)
        k1 = self.nonlinear(Q)
        k2 = self.nonlinear(E * (Q + 0.5 * dt * k1))
        k3 = self.nonlinear(E * Q + 0.5 * dt * k2)
        k4 = self.nonlinear(E * E * Q + dt * E * k3)
        return E * E * Q + dt / 6.0 * (E * E * k1 + 2 * E * (k2 + k3) + k4)

    def advance(self, Q, nsteps):
        for _ in range(nsteps):
            Q = self.step(Q, self.config.dt)
        return Q


def _unstable_amplitude(solver, Q0):
    final = solver.field(solver.advance(Q0, solver.config.nsteps))
    projection = nearest_bubble(final)
    return projection.mode_amplitudes((0,))[0]


def calibrate_initial(initial, config):
    """Scale the datum by c so its unstable degree-0 component vanishes at
    tau_end, which puts the extinction time of the datum at the configured
    T*. Secant iteration from c = 1 and c = 1 + 1e-6.
    """
    solver = FlowSolver(initial.basis, config)
    Q = solver.q_coeffs(initial)

    def residual(c):
        return _unstable_amplitude(solver, c ** solver.p * Q)

    c0, c1 = 1.0, 1.0 + 1e-6
    f0 = residual(c0)
    f1 = residual(c1)
    for iteration in range(settings.calibration_iterations):
        if f1 == f0 or f1 == 0.0:
            break
        c0, c1 = c1, c1 - f1 * (c1 - c0) / (f1 - f0)
        f0, f1 = f1, residual(c1)
        logger.debug("Calibration iteration %d: c=%.15g sigma_0=%.3e",
                     iteration + 1, c1, f1)
    if abs(f1) > abs(f0):
        c1 = c0
    return c1 * initial, c1


def _record(tau, field, basis, U_gap_ref, defect):
    params = field.params
    projection = nearest_bubble(field)
    sigma = projection.mode_amplitudes(SIGMA_DEGREES)
    v = field.grid
    vl = bubble_on_sphere(projection.lam_star, params, basis.t)
    relerr = float(np.max(np.abs(v / vl - 1)))
    residual = J_prime_residual(field).weighted_norm
    J_gap = J_difference(field, U_gap_ref)
    return TrajectoryRecord(tau, J_gap, projection.distance,
                            projection.lam_star, sigma, relerr, residual,
                            defect)


def along_unstable_direction(field):
    """True when the datum leaves the bubble manifold only along degree 0.

    Calibration would scale such a datum back onto the bubble, so it is
    skipped for these.
    """
    projection = nearest_bubble(field)
    residual = projection.residual
    amplitudes = np.sqrt(residual.basis.alpha) * residual.coeffs
    unstable = abs(amplitudes[0])
    others = float(np.max(np.abs(amplitudes[1:])))
    return (unstable > settings.amplitude_floor and
            others <= UNSTABLE_DOMINANCE * unstable)


def evolve(initial, config):
    """Run the nonlinear flow from a positive zonal datum.

    Records are emitted every config.output_every steps, the first at tau = 0
    with a zero dissipation residual. A binding positivity floor marks the
    whole trajectory degenerate.
    """
    basis = initial.basis
    params = config.params
    if np.any(initial.grid <= 0):
        raise ParameterError("Initial datum must be positive on the grid")
    trajectory = Trajectory(params, config)
    if config.calibrate:
        if along_unstable_direction(initial):
            logger.warning("Datum lies along the unstable degree-0 mode; "
                           "running it uncalibrated")
        else:
            initial, trajectory.calibration_factor = calibrate_initial(
                initial, config)
    solver = FlowSolver(basis, config)
    reference = basis.constant(bubble_level(params))
    dt = config.dt

    Q = solver.q_coeffs(initial)
    current = solver.field(Q)
    trajectory.append(_record(0.0, current, basis, reference, 0.0))
    for k in range(1, config.nsteps + 1):
        Q = solver.step(Q, dt)
        if solver.floor_hit and config.abort_degenerate:
            raise DegenerateRunError("Positivity floor %g bound at tau=%g"
                                     % (config.positivity_floor, k * dt))
        nxt = solver.field(Q)
        defect = dissipation_check(current, nxt, dt)
        trajectory.max_dissipation_residual = max(
            trajectory.max_dissipation_residual, defect)
        current = nxt
        if k % config.output_every == 0:
            trajectory.append(_record(k * dt, current, basis, reference,
                                      defect))
    trajectory.final = current
    trajectory.degenerate = solver.floor_hit
    if solver.floor_hit:
        logger.warning("Positivity floor bound during the run; "
                       "trajectory flagged degenerate")
    logger.debug("Flow run finished: %d records, J_gap %.3e -> %.3e",
                 len(trajectory), trajectory[0].J_gap, trajectory[-1].J_gap)
    return trajectory


LinearRecord = namedtuple('LinearRecord', 'tau coeffs')


def evolve_linearized(initial_modes, config):
    """Closed form rho_l(tau) = rho_l(0) exp(-kappa_l tau), kappa_l = nu/p."""
    modes = np.asarray(initial_modes, dtype=float)
    report = spectrum_closed_form(config.params, max(len(modes) - 1, 2))
    kappa = np.array([report.kappa(l) for l in range(len(modes))])
    every = config.dt * config.output_every
    count = int(round(config.tau_end / every))
    records = []
    for k in range(count + 1):
        tau = k * every
        records.append(LinearRecord(tau, modes * np.exp(-kappa * tau)))
    return records


def energy_slope(trajectory):
    """Centred differences of J along the recorded outputs."""
    tau = trajectory.column('tau')
    J = trajectory.column('J_gap')
    slope = np.full(len(tau), np.nan)
    slope[1:-1] = (J[2:] - J[:-2]) / (tau[2:] - tau[:-2])
    return slope


InequalityCheck = namedtuple('InequalityCheck',
                             'easy_margin hard_ratio hard_points')


def inequality_check(trajectory, start=None):
    """Both sides of the differential inequality along the recorded run.

    easy_margin is the largest value of
    residual^2 + p (1 + relerr)^{p-1} dJ/dtau; hard_ratio is the largest
    J_gap / residual^2 among outputs with relerr_sup < 0.1, in units of
    1/(2 nu_gap).
    """
    params = trajectory.params
    p = params.p
    slope = energy_slope(trajectory)
    nu_gap = spectrum_closed_form(params, 2).gap
    easy, hard, points = -np.inf, 0.0, 0
    for i, r in enumerate(trajectory):
        if start is not None and r.tau < start:
            continue
        if np.isfinite(slope[i]):
            margin = (r.residual_weighted ** 2 +
                      p * (1 + r.relerr_sup) ** (p - 1) * slope[i])
            easy = max(easy, margin)
        if r.relerr_sup < 0.1 and r.residual_weighted > 0:
            ratio = r.J_gap / r.residual_weighted ** 2 * (2 * nu_gap)
            hard = max(hard, ratio)
            points += 1
    return InequalityCheck(easy, hard, points)


def check_monotone(trajectory, rtol=1e-8):
    """J never increases between outputs by more than rtol max(1, |J|)."""
    J = trajectory.column('J_gap')
    Jref = abs(J_bubble(trajectory.final.basis)) if trajectory.final else 1.0
    scale = rtol * max(1.0, Jref)
    return bool(np.all(np.diff(J) <= scale))


def unstable_growth_rate(params):
    """2 |nu_0| / p, the growth rate of J_gap along the degree-0 mode."""
    return 2 * abs(1 - params.p) / params.p
