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
"""Scenario orchestration: build, run, judge and persist.

Exit status is 0 when every verdict passes, 5 when one fails, and the
exit_code of the raised FastdiffException otherwise.
"""

import os
import time
from collections import OrderedDict
from concurrent.futures import ThreadPoolExecutor
from math import sqrt

import numpy as np

from fastdiff import config as cfg
from fastdiff import settings
from fastdiff.diagnostics import (BOUNDED_H_NORM, HS_DIST, J_GAP, RELERR_SUP,
                                  Verdict, at_most_verdict, compare_rates,
                                  default_window, fit_rate, mode_ledger,
                                  relative_verdict, trajectory_bound_checks)
from fastdiff.domain.evolve import DomainFlowConfig, evolve_bounded
from fastdiff.domain.green import green_bound_check
from fastdiff.domain.harnack import (benilan_crandall_check, ghp_window_shift,
                                     nu_tilde_u_exponent, relerr_bound_check,
                                     u_variable_refit)
from fastdiff.domain.operator import build_operator, constants_table
from fastdiff.domain.stationary import ray_consistency, stationary_solve
from fastdiff.initial import BUBBLE, perturbed_state, sphere_datum
from fastdiff.log import logging
from fastdiff.params import sharp_exponents
from fastdiff.persistence import (DOMAIN_COLUMNS, SPHERE_COLUMNS,
                                  RunPersister, load_summary, load_trajectory,
                                  parse_float)
from fastdiff.sphere.bubble import lambda_symmetry_defect, nearest_bubble
from fastdiff.sphere.flow import (FlowConfig, check_monotone, evolve,
                                  evolve_linearized, inequality_check)
from fastdiff.sphere.spectral import (ZonalBasis, bubble_hs_norm_sq,
                                      spectrum_closed_form)
from fastdiff.util import FastdiffException, ParameterError, command

logger = logging.getLogger("fastdiff.runner")

EXIT_OK = 0
EXIT_ASSERTION = 5

STATIONARY_TOL = 1e-8
DOMAIN_STATIONARY_TOL = 1e-9
DISSIPATION_TOL = 1e-6
INEQUALITY_SLACK = 1e-6
HARD_RATIO_BOUND = 1.5
GREEN_SYMMETRY_TOL = 1e-9
RESIDUAL_TOL = 1e-9
GHP_RATIO_BOUND = 10.0
U_REFIT_TOL = 0.01
MODE_DEGREES = (0, 1, 2, 3, 4)


class ScenarioResult(object):
    """Summary sections, verdicts and an optional table of one scenario."""

    def __init__(self, scenario):
        self.scenario = scenario
        self.summary = OrderedDict()
        self.verdicts = []
        self.columns = None
        self.rows = None

    def table(self, columns, rows):
        self.columns = tuple(columns)
        self.rows = rows

    def check(self, verdict):
        if not verdict.passed:
            logger.warning("Check failed: %r", verdict)
        self.verdicts.append(verdict)

    @property
    def passed(self):
        return all(v.passed for v in self.verdicts)


def flag_verdict(name, flag, formula):
    return Verdict(name, 1.0, 1.0 if flag else 0.0, 0.0, bool(flag), formula)


def stability_verdict(name, stability, formula):
    return at_most_verdict(name, stability.factor * stability.early,
                           stability.late, formula)


# sphere scenarios

def _basis(config, params):
    return ZonalBasis(params, config.sphere.L or settings.L,
                      config.sphere.n or settings.n_quad)


def _flow_config(config, params, basis):
    flow = config.flow
    return FlowConfig(params, dt=flow.dt, tau_end=flow.tau_end, L=basis.L,
                      n=basis.n, output_every=config.output.cadence,
                      stepper=flow.stepper,
                      positivity_floor=flow.positivity_floor,
                      stability_factor=flow.stability_factor,
                      calibrate=flow.calibrate,
                      abort_degenerate=flow.abort_degenerate)


def _sphere_datum(config, basis):
    initial = config.initial
    return sphere_datum(basis, initial.kind, eps=initial.eps, l=initial.mode,
                        lam=initial.lam, seed=initial.seed,
                        amplitude=initial.amplitude)


@command
def spectrum_scenario(config):
    params = config.params()
    result = ScenarioResult(cfg.SPECTRUM)
    report = spectrum_closed_form(params, config.sphere.lmax)
    result.summary['spectrum'] = report.asdict()
    N, s, p = params.N, params.s, params.p
    result.check(relative_verdict('nu_0', 1 - p, report.nu(0), 1e-12,
                                  '1-p'))
    result.check(relative_verdict('gap', p * 4 * s / (N - 2 * s + 2),
                                  report.gap, 1e-12, 'p*4s/(N-2s+2)'))
    return result


@command
def evolve_scenario(config):
    params = config.params()
    basis = _basis(config, params)
    flow_config = _flow_config(config, params, basis)
    initial = _sphere_datum(config, basis)
    trajectory = evolve(initial, flow_config)
    result = ScenarioResult(cfg.EVOLVE)
    result.table(SPHERE_COLUMNS, trajectory)
    result.summary['flow'] = flow_config.asdict()
    result.summary['calibration_factor'] = trajectory.calibration_factor
    result.summary['expected_rates'] = sharp_exponents(params).asdict()
    result.check(flag_verdict('positivity', not trajectory.degenerate,
                              'floor never binding'))
    result.check(at_most_verdict('dissipation_residual', DISSIPATION_TOL,
                                 trajectory.max_dissipation_residual,
                                 'J(v+) - J(v) + dt*|v_tau|^2 residual'))
    result.check(flag_verdict('J_monotone', check_monotone(trajectory),
                              'J non-increasing'))
    peak = float(np.max(trajectory.column('hs_dist')))
    if peak < STATIONARY_TOL:
        result.check(at_most_verdict('bubble_stationary', STATIONARY_TOL,
                                     peak, 'hs_dist(U) = 0'))
        return result

    window = default_window(trajectory.column('tau'))
    fits = OrderedDict()
    for quantity, column in ((HS_DIST, 'hs_dist'), (J_GAP, 'J_gap'),
                             (RELERR_SUP, 'relerr_sup')):
        fit = fit_rate(zip(trajectory.column('tau'),
                           trajectory.column(column)), window)
        fits[quantity] = fit
        result.check(compare_rates(fit, params, quantity))
    result.summary['fits'] = fits
    checks = inequality_check(trajectory, start=window[0])
    result.summary['inequality'] = checks._asdict()
    result.check(at_most_verdict('energy_inequality', INEQUALITY_SLACK,
                                 checks.easy_margin,
                                 'res^2 + p(1+relerr)^(p-1) dJ/dtau'))
    if checks.hard_points:
        result.check(at_most_verdict('energy_by_residual', HARD_RATIO_BOUND,
                                     checks.hard_ratio,
                                     'J_gap*2nu_gap/res^2'))
    bounds = trajectory_bound_checks(trajectory, window)
    result.summary['bound_constants'] = bounds
    result.check(stability_verdict('distance_by_energy',
                                   bounds['distance_by_energy'],
                                   'hs_dist <= K J_gap^(1/2)'))
    result.check(stability_verdict('relerr_by_distance',
                                   bounds['relerr_by_distance'],
                                   'relerr <= K hs_dist^(2/(N-2s+2))'))
    result.summary['modes'] = mode_ledger(trajectory, window)
    return result


@command
def evolve_linear_scenario(config):
    params = config.params()
    flow = config.flow
    lmax = config.sphere.lmax
    amplitude = config.initial.eps or 1e-3
    flow_config = FlowConfig(params, dt=flow.dt, tau_end=flow.tau_end,
                             output_every=config.output.cadence,
                             calibrate=False)
    records = evolve_linearized(amplitude * np.ones(lmax + 1), flow_config)
    result = ScenarioResult(cfg.EVOLVE_LINEAR)
    columns = ('tau',) + tuple('a_%d' % l for l in range(lmax + 1))
    result.table(columns, [[r.tau] + list(r.coeffs) for r in records])
    report = spectrum_closed_form(params, max(lmax, 2))
    tau = [r.tau for r in records]
    window = (tau[0], tau[-1])
    fitted = OrderedDict()
    for l in range(lmax + 1):
        series = [abs(r.coeffs[l]) for r in records]
        fit = fit_rate(zip(tau, series), window)
        fitted[str(l)] = fit
        result.check(relative_verdict('kappa_%d' % l, report.kappa(l),
                                      fit.slope,
                                      settings.linear_rate_tolerance,
                                      'nu(l)/p'))
    drift = max(abs(r.coeffs[1] - records[0].coeffs[1]) for r in records)
    result.check(at_most_verdict('kernel_mode_constant', 0.0, drift,
                                 'a_1(tau) = a_1(0)'))
    result.summary['fits'] = fitted
    return result


@command
def project_scenario(config):
    params = config.params()
    basis = _basis(config, params)
    field = _sphere_datum(config, basis)
    projection = nearest_bubble(field)
    result = ScenarioResult(cfg.PROJECT)
    result.summary['projection'] = OrderedDict([
        ('lambda_star', projection.lam_star),
        ('distance', projection.distance),
        ('slope', projection.slope),
        ('mode_amplitudes', projection.mode_amplitudes(MODE_DEGREES)),
        ('lambda_symmetry_defect',
         lambda_symmetry_defect(projection.lam_star, params)),
    ])
    if config.initial.kind == BUBBLE:
        result.check(relative_verdict('lambda_star', config.initial.lam,
                                      projection.lam_star, 1e-8,
                                      'U[0,lam] projects to itself'))
    relative = projection.distance / sqrt(bubble_hs_norm_sq(basis))
    result.check(at_most_verdict('trust_region', settings.trust_radius,
                                 relative, 'distance/|U| <= trust radius'))
    return result


# bounded domain scenarios

def _operator(config, params):
    domain = config.domain
    return build_operator(domain.kind, domain.M or settings.M, params,
                          K=domain.K, length=domain.length)


def _domain_checks(result, op, state, stride):
    result.check(at_most_verdict('stationary_residual', RESIDUAL_TOL,
                                 state.residual,
                                 'Galerkin residual of A phi = phi^p'))
    result.check(relative_verdict('negative_eigenvalues', 1,
                                  state.spectrum.negative_count, 0.0,
                                  'Morse index 1'))
    result.check(flag_verdict('nu_tilde_positive',
                              state.nu_tilde > 0 and
                              not state.degenerate_flag,
                              'non-degenerate ground state'))
    green = green_bound_check(op, stride)
    result.summary['green'] = green
    result.check(flag_verdict('green_lower_bound', green.lower_bound_holds,
                              'c Phi(x) Phi(y) <= G(x,y)'))
    result.check(at_most_verdict('green_symmetry', GREEN_SYMMETRY_TOL,
                                 green.symmetry_defect, 'G(x,y) = G(y,x)'))


@command
def domain_spectrum_scenario(config):
    params = config.params()
    op = _operator(config, params)
    state = stationary_solve(op, params, k=config.domain.eigen_count)
    result = ScenarioResult(cfg.DOMAIN_SPECTRUM)
    result.summary['operator'] = op.describe()
    result.summary['stationary'] = state
    result.summary['ray_consistency'] = ray_consistency(state, op, params)
    result.summary['constants'] = constants_table(params.s, params.N)
    _domain_checks(result, op, state, config.domain.green_stride)
    return result


def _domain_run(config, params, op, state):
    domain = config.domain
    flow_config = DomainFlowConfig(dt=domain.dt, tau_end=domain.tau_end,
                                   output_every=config.output.cadence,
                                   stepper=domain.stepper,
                                   calibrate=domain.calibrate)
    direction = state.eigenfunction(state.spectrum.tilde_index)
    direction = direction / np.max(np.abs(direction))
    initial = perturbed_state(state.phi, direction, config.initial.eps)
    trajectory = evolve_bounded(initial, op, params, flow_config, state)
    return flow_config, trajectory


def _domain_evolve(config, scenario):
    params = config.params()
    op = _operator(config, params)
    state = stationary_solve(op, params, k=config.domain.eigen_count)
    if state.spectrum.tilde_index is None:
        raise ParameterError("No positive eigenvalue among the %d computed"
                             % len(state.spectrum.nu))
    flow_config, trajectory = _domain_run(config, params, op, state)
    result = ScenarioResult(scenario)
    result.table(DOMAIN_COLUMNS, trajectory)
    result.summary['operator'] = op.describe()
    result.summary['stationary'] = state
    result.summary['flow'] = flow_config.asdict()
    result.summary['calibration_factor'] = trajectory.calibration_factor
    nu_tilde = state.nu_tilde
    result.summary['expected_rates'] = OrderedDict([
        ('nu_tilde', nu_tilde), ('rate_tau', nu_tilde / params.p),
        ('exponent_u', nu_tilde_u_exponent(nu_tilde, params))])
    result.check(flag_verdict('positivity', not trajectory.degenerate,
                              'floor never binding'))
    J = trajectory.column('J_gap')
    scale = 1e-8 * max(1.0, float(np.max(np.abs(J))))
    result.check(flag_verdict('J_monotone', bool(np.all(np.diff(J) <= scale)),
                              'J non-increasing'))
    return params, op, state, trajectory, result


@command
def domain_evolve_scenario(config):
    params, op, state, trajectory, result = _domain_evolve(
        config, cfg.DOMAIN_EVOLVE)
    peak = float(np.max(trajectory.column('H_norm')))
    if peak < DOMAIN_STATIONARY_TOL:
        result.check(at_most_verdict('phi_stationary', DOMAIN_STATIONARY_TOL,
                                     peak, '|phi - phi|_H = 0'))
        return result
    tau = trajectory.column('tau')
    window = default_window(tau)
    fit = fit_rate(zip(tau, trajectory.column('H_norm')), window)
    result.summary['fits'] = OrderedDict([(BOUNDED_H_NORM, fit)])
    result.check(compare_rates(fit, params, BOUNDED_H_NORM,
                               nu_tilde=state.nu_tilde))
    bound = relerr_bound_check(trajectory, params, op, window)
    result.summary['relerr_bound'] = bound
    result.check(stability_verdict('relerr_by_H_norm', bound.pointwise,
                                   '|h|_inf <= C sup|w-phi|_H^(s/(N+gamma))'))
    refit = u_variable_refit(trajectory, params)
    result.summary['u_refit'] = refit
    result.check(relative_verdict('u_exponent', refit.expected,
                                  refit.u_fit.slope, U_REFIT_TOL,
                                  'rate_tau*p/(p-1)'))
    return result


@command
def ghp_scenario(config):
    params, op, state, trajectory, result = _domain_evolve(config, cfg.GHP)
    harnack = config.harnack
    early, late, change, stable = ghp_window_shift(
        trajectory, op, params, harnack.T_star,
        (harnack.t_lo, harnack.t_lo_shifted))
    bc = benilan_crandall_check(trajectory, params)
    result.summary['ghp'] = early
    result.summary['ghp_shifted'] = late
    result.summary['benilan_crandall'] = bc
    result.check(flag_verdict('ghp_finite', early.finite, '0 < C0 <= C1'))
    result.check(at_most_verdict('ghp_ratio', GHP_RATIO_BOUND, early.ratio,
                                 'C1/C0'))
    result.check(at_most_verdict('ghp_window_shift', 0.2, change,
                                 '|dC1/C0| / (C1/C0)'))
    result.check(at_most_verdict('benilan_crandall', bc.bound, bc.max_ratio,
                                 'v_tau/v <= 2'))
    return result


# offline scenarios

@command
def fit_scenario(config):
    fit_block = config.fit
    header, columns = load_trajectory(fit_block.input)
    if 'tau' not in columns:
        raise ParameterError("'%s' has no tau column" % fit_block.input)
    if fit_block.column not in columns:
        raise ParameterError("'%s' has no column %r; found %s"
                             % (fit_block.input, fit_block.column,
                                ', '.join(header)))
    tau = columns['tau']
    window = default_window(tau)
    if fit_block.tau_lo is not None:
        window = (fit_block.tau_lo, window[1])
    if fit_block.tau_hi is not None:
        window = (window[0], fit_block.tau_hi)
    fit = fit_rate(zip(tau, columns[fit_block.column]), window)
    result = ScenarioResult(cfg.FIT)
    result.summary['input'] = fit_block.input
    result.summary['fits'] = OrderedDict([(fit_block.column, fit)])
    if fit_block.expected is not None:
        tolerance = settings.rate_tolerance if fit_block.tolerance is None \
            else fit_block.tolerance
        result.check(relative_verdict('rate_' + fit_block.column,
                                      fit_block.expected, fit.slope,
                                      tolerance, 'configured'))
    return result


def _verdict_from_dict(d):
    def number(x):
        return parse_float(x) if isinstance(x, str) else float(x)

    return Verdict(d['name'], number(d['expected']), number(d['observed']),
                   number(d['tolerance']), bool(d['pass']), d['formula'],
                   bool(d.get('one_sided', False)))


def _report_inputs(config, out):
    names = [d.strip() for d in config.report.inputs.split(',') if d.strip()]
    if names:
        return names
    if not os.path.isdir(out):
        return []
    return [os.path.join(out, d) for d in sorted(os.listdir(out))
            if os.path.isfile(os.path.join(out, d, 'summary.json'))]


@command
def report_scenario(config, out=None):
    out = config.output.directory if out is None else out
    result = ScenarioResult(cfg.REPORT)
    runs = OrderedDict()
    for directory in _report_inputs(config, out):
        summary = load_summary(os.path.join(directory, 'summary.json'))
        verdicts = [_verdict_from_dict(d) for d in summary['verdicts']]
        runs[directory] = OrderedDict([
            ('scenario', summary['scenario']),
            ('checks', len(verdicts)),
            ('failed', sum(1 for v in verdicts if not v.passed))])
        for v in verdicts:
            v.name = '%s:%s' % (os.path.basename(directory), v.name)
            result.check(v)
    if not runs:
        raise ParameterError("No run summaries found under '%s'" % out)
    result.summary['runs'] = runs
    return result


SCENARIO_FUNCTIONS = OrderedDict([
    (cfg.SPECTRUM, spectrum_scenario),
    (cfg.EVOLVE, evolve_scenario),
    (cfg.EVOLVE_LINEAR, evolve_linear_scenario),
    (cfg.PROJECT, project_scenario),
    (cfg.DOMAIN_SPECTRUM, domain_spectrum_scenario),
    (cfg.DOMAIN_EVOLVE, domain_evolve_scenario),
    (cfg.GHP, ghp_scenario),
    (cfg.FIT, fit_scenario),
    (cfg.REPORT, report_scenario),
])


def execute(config, out=None):
    """Validate and run one scenario without writing anything."""
    config.validate()
    scenario = SCENARIO_FUNCTIONS[config.scenario]
    if config.scenario == cfg.REPORT:
        return scenario(config, out)
    return scenario(config)


def summarize(config, result, wall_time=None):
    summary = OrderedDict()
    summary['scenario'] = result.scenario
    summary['config'] = config.asdict()
    summary.update(result.summary)
    summary['verdicts'] = result.verdicts
    summary['pass'] = result.passed
    if wall_time is not None:
        summary['wall_time'] = wall_time
    return summary


def persist(config, result, directory, wall_time=None):
    persister = RunPersister(directory)
    formats = config.formats
    written = []
    if 'csv' in formats and result.columns is not None:
        if result.scenario in (cfg.EVOLVE, cfg.DOMAIN_EVOLVE, cfg.GHP):
            written.append(persister.save_trajectory(result.rows,
                                                     result.columns))
        else:
            written.append(persister.save_table(result.columns,
                                                result.rows))
    if 'json' in formats:
        written.append(persister.save_summary(
            summarize(config, result, wall_time)))
    if 'tsv' in formats:
        written.append(persister.save_verdicts(result.verdicts))
    return written


def _print_result(result, directory):
    print('%s: %s (%d checks) -> %s' % (
        result.scenario, 'pass' if result.passed else 'FAIL',
        len(result.verdicts), directory))
    for v in result.verdicts:
        print('  %-28s %-4s expected %-14.8g observed %.8g' % (
            v.name, 'ok' if v.passed else 'FAIL', v.expected, v.observed))


def run(config, out=None, quiet=False):
    """Run one scenario and write its artifacts; returns the exit status."""
    started = time.time()
    directory = config.output.directory if out is None else out
    try:
        result = execute(config, directory)
        wall_time = time.time() - started if config.output.wall_time \
            else None
        persist(config, result, directory, wall_time)
    except FastdiffException as e:
        logger.error("%s scenario failed with exit status %d",
                     config.scenario, e.exit_code)
        if not quiet:
            print(str(e))
        return e.exit_code
    if not quiet:
        _print_result(result, directory)
    return EXIT_OK if result.passed else EXIT_ASSERTION


def batch_threads():
    value = os.environ.get(settings.THREADS_ENV)
    if value is None:
        return os.cpu_count() or 1
    try:
        threads = int(value)
    except ValueError:
        raise ParameterError("%s must be an integer, got %r"
                             % (settings.THREADS_ENV, value))
    if threads < 1:
        raise ParameterError("%s must be positive" % settings.THREADS_ENV)
    return threads


def run_batch(configs, out, quiet=False):
    """Run independent scenarios in parallel, each into out/NN_Scenario.

    Returns the per-config exit statuses in input order.
    """
    directories = [os.path.join(out, '%02d_%s' % (i, c.scenario))
                   for i, c in enumerate(configs)]
    with ThreadPoolExecutor(max_workers=batch_threads()) as pool:
        futures = [pool.submit(run, c, d, quiet)
                   for c, d in zip(configs, directories)]
        return [f.result() for f in futures]
