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
"""Harnack comparability, the Benilan-Crandall bound and relative error
bounds along a bounded domain run.
"""

from math import log

import numpy as np
from scipy import integrate

from fastdiff.diagnostics import (ConstantStability, default_window,
                                  fit_power_rate, fit_rate, shifted_windows,
                                  windowed_constants)
from fastdiff.log import logging
from fastdiff.params import t_of_tau, u_time_exponent
from fastdiff.sphere.bubble import u_from_w
from fastdiff.util import ParameterError

logger = logging.getLogger("fastdiff.domain.harnack")

BOOTSTRAP_CAP = 1000
BENILAN_CRANDALL_BOUND = 2.0
BENILAN_CRANDALL_SLACK = 0.05
GHP_WINDOW_STARTS = (0.8, 0.9)
GHP_SHIFT_TOLERANCE = 0.2


def bootstrap_exponents(params):
    """mu_1 = 2s/m, mu_{n+1} = (2s(1 - mu_n) + mu_n)/m until mu >= 1."""
    s, m = params.s, params.m
    mu = [2 * s / m]
    while mu[-1] < 1:
        if len(mu) >= BOOTSTRAP_CAP:
            raise ParameterError("Exponent bootstrap did not reach 1 in %d "
                                 "steps" % BOOTSTRAP_CAP)
        mu.append((2 * s * (1 - mu[-1]) + mu[-1]) / m)
    return mu


class HarnackReport(object):

    def __init__(self, window, C0, C1, C0_w, C1_w, bootstrap):
        self.window = window
        self.C0 = C0
        self.C1 = C1
        self.C0_w = C0_w
        self.C1_w = C1_w
        self.bootstrap = bootstrap

    @property
    def ratio(self):
        return self.C1 / self.C0

    @property
    def iterations(self):
        return len(self.bootstrap)

    @property
    def finite(self):
        return bool(0 < self.C0 <= self.C1 < float('inf'))

    def asdict(self):
        return {'window': list(self.window), 'C0': self.C0, 'C1': self.C1,
                'ratio': self.ratio, 'C0_w': self.C0_w, 'C1_w': self.C1_w,
                'bootstrap': self.bootstrap, 'iterations': self.iterations}


def _original_times(trajectory, params, T_star):
    return np.array([t_of_tau(T_star, params, tau)
                     for tau in trajectory.column('tau')])


def ghp_check(trajectory, op, params, T_star=1.0, t_lo=None):
    """C0, C1 as the extremes of u^m / ((T* - t)^{m/(1-m)} Phi) for
    t >= t_lo, with u synthesised from the recorded w grids.
    """
    if not T_star > 0:
        raise ParameterError("T* must be positive, got %r" % (T_star,))
    t_lo = GHP_WINDOW_STARTS[0] * T_star if t_lo is None else t_lo
    if not 0 <= t_lo < T_star:
        raise ParameterError("Window start t=%r reaches past extinction "
                             "(T*=%r)" % (t_lo, T_star))
    times = _original_times(trajectory, params, T_star)
    inside = times >= t_lo
    if not np.any(inside):
        raise ParameterError("No output at or after t=%r; run ends at t=%r"
                             % (t_lo, times[-1]))
    p = params.p
    grids = trajectory.w_grids()
    ratios, w_ratios = [], []
    for t, w in zip(times[inside], grids[inside]):
        u = u_from_w(w, params, T_star, t)
        ratios.append(u ** params.m /
                      ((T_star - t) ** (1 / (p - 1)) * op.Phi))
        w_ratios.append(w / trajectory.state.phi)
    ratios, w_ratios = np.array(ratios), np.array(w_ratios)
    report = HarnackReport((float(t_lo), float(times[-1])),
                           float(np.min(ratios)), float(np.max(ratios)),
                           float(np.min(w_ratios)), float(np.max(w_ratios)),
                           bootstrap_exponents(params))
    logger.debug("GHP on [%g, %g]: C0=%.6g C1=%.6g", report.window[0],
                 report.window[1], report.C0, report.C1)
    return report


def ghp_window_shift(trajectory, op, params, T_star=1.0,
                     starts=GHP_WINDOW_STARTS):
    """Reports for two window starts and the relative change of C1/C0."""
    early, late = [ghp_check(trajectory, op, params, T_star, a * T_star)
                   for a in starts]
    change = abs(late.ratio - early.ratio) / early.ratio
    return early, late, change, bool(change <= GHP_SHIFT_TOLERANCE)


class BenilanCrandallReport(object):

    def __init__(self, threshold, max_ratio):
        self.threshold = threshold
        self.max_ratio = max_ratio
        self.bound = BENILAN_CRANDALL_BOUND + BENILAN_CRANDALL_SLACK

    @property
    def passed(self):
        return bool(self.max_ratio <= self.bound)

    def asdict(self):
        return {'threshold': self.threshold, 'max_ratio': self.max_ratio,
                'bound': self.bound, 'pass': self.passed}


def benilan_crandall_threshold(params):
    p = params.p
    return p / (p - 1) * log(2)


def benilan_crandall_check(trajectory, params):
    """Largest v_tau / v with v = w^p past tau = (p/(p-1)) log 2."""
    tau = trajectory.column('tau')
    if len(tau) < 2:
        raise ParameterError("Need at least two outputs for v_tau")
    threshold = benilan_crandall_threshold(params)
    # v_tau / v = p d(log w)/dtau
    rate = params.p * np.gradient(np.log(trajectory.w_grids()), tau, axis=0)
    inside = tau >= threshold
    if not np.any(inside):
        raise ParameterError("Run ends at tau=%g before the threshold %g"
                             % (tau[-1], threshold))
    return BenilanCrandallReport(threshold, float(np.max(rate[inside])))


def trailing_sup(tau, values, lag=1.0):
    """sup of values over sigma >= tau - lag, for each recorded tau."""
    tau = np.asarray(tau, dtype=float)
    values = np.asarray(values, dtype=float)
    # suffix maxima
    suffix = np.maximum.accumulate(values[::-1])[::-1]
    start = np.searchsorted(tau, tau - lag - 1e-12)
    return suffix[start]


def integrated_relerr(trajectory, tau0, length=1.0):
    """sup_x |int_{tau0}^{tau0+length} (w/phi - 1) dsigma|."""
    tau = trajectory.column('tau')
    inside = (tau >= tau0 - 1e-12) & (tau <= tau0 + length + 1e-12)
    if np.sum(inside) < 2:
        raise ParameterError("Fewer than two outputs in [%g, %g]"
                             % (tau0, tau0 + length))
    h = trajectory.w_grids()[inside] / trajectory.state.phi - 1
    return float(np.max(np.abs(integrate.trapezoid(h, tau[inside],
                                                    axis=0))))


class RelerrBoundReport(object):

    def __init__(self, exponent, pointwise, integrated_exponent, integrated):
        self.exponent = exponent
        self.pointwise = pointwise
        self.integrated_exponent = integrated_exponent
        self.integrated = integrated

    @property
    def passed(self):
        return self.pointwise.stable

    def asdict(self):
        return {'exponent': self.exponent,
                'pointwise': self.pointwise.asdict(),
                'integrated_exponent': self.integrated_exponent,
                'integrated': self.integrated.asdict(),
                'pass': self.passed}


def relerr_bound_check(trajectory, params, op, window=None, factor=2.0):
    """Fit C in |h(tau)|_inf <= C (sup_{sigma >= tau-1} |w - phi|_H)^e with
    e = s/(N+gamma) on a window and its later shift; also M for the
    integrated version with exponent 2s/(N+gamma).
    """
    tau = trajectory.column('tau')
    if window is None:
        window = default_window(tau)
    early, late = shifted_windows(window)
    N, s, g = params.N, params.s, op.gamma
    exponent = s / (N + g)
    integrated_exponent = 2 * s / (N + g)
    sup_dist = trailing_sup(tau, trajectory.column('H_norm'))
    pointwise = windowed_constants(tau, trajectory.column('relerr_sup'),
                                   sup_dist, exponent, early, late, factor)
    # integrals need one unit of run ahead
    starts = tau[(tau >= window[0]) & (tau <= tau[-1] - 1.0 + 1e-12)]
    if len(starts) >= 2:
        lhs = np.array([integrated_relerr(trajectory, t0) for t0 in starts])
        rhs = trailing_sup(tau, trajectory.column('H_norm'))[
            np.searchsorted(tau, starts - 1e-12)]
        mid = 0.5 * (starts[0] + starts[-1])
        integrated = windowed_constants(starts, lhs, rhs,
                                        integrated_exponent,
                                        (starts[0], mid), (mid, starts[-1]),
                                        factor)
    else:
        integrated = ConstantStability(float('nan'), float('nan'), factor)
    report = RelerrBoundReport(exponent, pointwise, integrated_exponent,
                               integrated)
    if not report.passed:
        logger.warning("Relative error constant grew from %.4g to %.4g",
                       pointwise.early, pointwise.late)
    return report


class URefit(object):

    def __init__(self, tau_fit, u_fit, expected):
        self.tau_fit = tau_fit
        self.u_fit = u_fit
        self.expected = expected

    @property
    def agreement(self):
        return abs(self.u_fit.slope - self.expected) / abs(self.expected)

    def asdict(self):
        return {'tau_rate': self.tau_fit.slope, 'u_exponent': self.u_fit.slope,
                'expected_u_exponent': self.expected,
                'agreement': self.agreement}


def u_variable_refit(trajectory, params, T_star=1.0, window=None):
    """Refit the H-norm decay against log(T* - t); the exponent should be
    the tau rate times p/(p-1).
    """
    tau = trajectory.column('tau')
    if window is None:
        window = default_window(tau)
    H = trajectory.column('H_norm')
    tau_fit = fit_rate(zip(tau, H), window)
    times = _original_times(trajectory, params, T_star)
    t_window = (t_of_tau(T_star, params, window[0]),
                t_of_tau(T_star, params, window[1]))
    u_fit = fit_power_rate(times, H, T_star, t_window)
    return URefit(tau_fit, u_fit, u_time_exponent(tau_fit.slope, params))


def nu_tilde_u_exponent(nu_tilde, params):
    """(T* - t)^{nu_tilde/(p-1)}, the u form of exp(-(nu_tilde/p) tau)."""
    return u_time_exponent(nu_tilde / params.p, params)


def harnack_summary(trajectory, op, params, T_star=1.0):
    early, late, change, stable = ghp_window_shift(trajectory, op, params,
                                                   T_star)
    bc = benilan_crandall_check(trajectory, params)
    summary = {'ghp': early.asdict(), 'ghp_shifted': late.asdict(),
               'ghp_shift_change': change, 'ghp_stable': stable,
               'benilan_crandall': bc.asdict()}
    if not (early.finite and early.ratio < 10 and stable):
        logger.warning("Harnack constants not comparable: C1/C0=%.4g",
                       early.ratio)
    return summary
