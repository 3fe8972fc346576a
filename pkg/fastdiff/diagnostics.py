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
"""Decay rate fits and their comparison with the sharp predictions."""

from math import log

import numpy as np

from fastdiff import settings
from fastdiff.log import logging
from fastdiff.params import sharp_exponents
from fastdiff.util import ParameterError

logger = logging.getLogger("fastdiff.diagnostics")

HS_DIST = 'HsDist'
J_GAP = 'JGap'
RELERR_SUP = 'RelErrSup'
BOUNDED_H_NORM = 'BoundedHNorm'
QUANTITIES = (HS_DIST, J_GAP, RELERR_SUP, BOUNDED_H_NORM)

MIN_POINTS = 5
LEDGER_DEGREES = (0, 2, 3, 4)


class RateFit(object):
    """Least squares line through (tau, log value); value ~ exp(-slope tau).
    """

    def __init__(self, window, slope, intercept, r_squared, n_points):
        self.window = window
        self.slope = slope
        self.intercept = intercept
        self.r_squared = r_squared
        self.n_points = n_points

    def asdict(self):
        return {'window': list(self.window), 'slope': self.slope,
                'intercept': self.intercept, 'r_squared': self.r_squared,
                'n_points': self.n_points}

    def __repr__(self):
        return ('RateFit(slope=%.6g, r2=%.6f, n=%d, window=[%g, %g])' %
                (self.slope, self.r_squared, self.n_points, self.window[0],
                 self.window[1]))


def default_window(taus):
    """Drop the first fit_drop_start and the last fit_drop_end of the
    horizon.
    """
    taus = np.asarray(taus, dtype=float)
    lo, hi = taus[0], taus[-1]
    span = hi - lo
    return (lo + settings.fit_drop_start * span,
            hi - settings.fit_drop_end * span)


def _split(series):
    series = list(series)
    if not series:
        raise ParameterError("Cannot fit an empty series")
    x = np.array([s[0] for s in series], dtype=float)
    y = np.array([s[1] for s in series], dtype=float)
    return x, y


def _line(x, logy, window):
    n = len(x)
    if n < MIN_POINTS:
        raise ParameterError("Rate fit needs at least %d points in [%g, %g], "
                             "got %d" % (MIN_POINTS, window[0], window[1], n))
    slope, intercept = np.polyfit(x, logy, 1)
    predicted = slope * x + intercept
    ss_res = float(np.sum((logy - predicted) ** 2))
    ss_tot = float(np.sum((logy - np.mean(logy)) ** 2))
    if ss_tot == 0:
        r_squared = 1.0
    else:
        r_squared = min(max(1.0 - ss_res / ss_tot, 0.0), 1.0)
    return float(slope), float(intercept), r_squared


def fit_rate(series, window=None):
    """Fit value ~ C exp(-slope tau) over a window of (tau, value) pairs."""
    tau, value = _split(series)
    if window is None:
        window = default_window(tau)
    lo, hi = window
    if not hi > lo:
        raise ParameterError("Fit window must have tau_hi > tau_lo")
    inside = (tau >= lo - 1e-12) & (tau <= hi + 1e-12)
    tau, value = tau[inside], value[inside]
    if np.any(value <= 0) or not np.all(np.isfinite(value)):
        raise ParameterError("Rate fit needs positive finite values in "
                             "[%g, %g]" % (lo, hi))
    slope, intercept, r2 = _line(tau, np.log(value), window)
    fit = RateFit((float(lo), float(hi)), -slope, intercept, r2, len(tau))
    logger.debug("Fitted %r", fit)
    return fit


def fit_power_rate(times, values, T_star, window=None):
    """Fit value ~ C (T* - t)^slope in original time."""
    t = np.asarray(times, dtype=float)
    value = np.asarray(values, dtype=float)
    if np.any(t >= T_star):
        raise ParameterError("Power fit needs times before T*=%r" % T_star)
    if window is None:
        window = (t[0], t[-1])
    lo, hi = window
    inside = (t >= lo) & (t <= hi)
    t, value = t[inside], value[inside]
    if np.any(value <= 0):
        raise ParameterError("Power fit needs positive values")
    slope, intercept, r2 = _line(np.log(T_star - t), np.log(value), window)
    return RateFit((float(lo), float(hi)), slope, intercept, r2, len(t))


class Verdict(object):
    """Outcome of one comparison, with the formula that produced the
    expectation.
    """

    def __init__(self, name, expected, observed, tolerance, passed,
                 formula, one_sided=False):
        self.name = name
        self.expected = expected
        self.observed = observed
        self.tolerance = tolerance
        self.passed = passed
        self.formula = formula
        self.one_sided = one_sided

    @property
    def deviation(self):
        if self.expected == 0:
            return abs(self.observed)
        return abs(self.observed - self.expected) / abs(self.expected)

    def asdict(self):
        return {'name': self.name, 'expected': self.expected,
                'observed': self.observed, 'tolerance': self.tolerance,
                'pass': self.passed, 'formula': self.formula,
                'one_sided': self.one_sided, 'deviation': self.deviation}

    def __repr__(self):
        return 'Verdict(%s: %s, expected %.6g, observed %.6g)' % (
            self.name, 'pass' if self.passed else 'FAIL', self.expected,
            self.observed)


def relative_verdict(name, expected, observed, tolerance, formula):
    if expected == 0:
        passed = abs(observed) <= tolerance
    else:
        passed = abs(observed - expected) <= tolerance * abs(expected)
    return Verdict(name, expected, observed, tolerance, bool(passed), formula)


def at_most_verdict(name, bound, observed, formula):
    return Verdict(name, bound, observed, 0.0, bool(observed <= bound),
                   formula, one_sided=True)


def compare_rates(fit, params, quantity, nu_tilde=None, tolerance=None):
    if quantity == BOUNDED_H_NORM:
        if nu_tilde is None:
            raise ParameterError("BoundedHNorm needs the computed nu_tilde")
        tol = settings.bounded_rate_tolerance if tolerance is None \
            else tolerance
        return relative_verdict(quantity, nu_tilde / params.p, fit.slope,
                                tol, 'nu_tilde/p')
    if quantity not in QUANTITIES:
        raise ParameterError("Unknown quantity %r" % (quantity,))
    rates = sharp_exponents(params)
    tol = settings.rate_tolerance if tolerance is None else tolerance
    if quantity == HS_DIST:
        return relative_verdict(quantity, rates.rate_w_hs, fit.slope, tol,
                                '4s/(N-2s+2)')
    if quantity == J_GAP:
        return relative_verdict(quantity, rates.rate_J, fit.slope, tol,
                                '8s/(N-2s+2)')
    bound = rates.rate_relerr_bound
    return Verdict(quantity, bound, fit.slope, 0.0, bool(fit.slope >= bound),
                   '8s/(N-2s+2)^2 (lower bound)', one_sided=True)


class ModeRate(object):
    """Fitted decay of one mode amplitude.

    A slaved mode is driven at second order by the slowest fitted mode, so
    its amplitude decays at twice that mode's rate rather than at its own
    kappa; expected holds the rate it is compared against.
    """

    def __init__(self, l, kappa_hat, kappa, amplitude, fit=None):
        self.l = l
        self.kappa_hat = kappa_hat
        self.kappa = kappa
        self.amplitude = amplitude
        self.fit = fit
        self.slaved = False
        self.expected = kappa

    @property
    def fitted(self):
        return self.fit is not None

    def deviation(self):
        if not self.fitted:
            return float('nan')
        return abs(self.kappa_hat - self.expected) / abs(self.expected)

    def asdict(self):
        return {'l': self.l, 'kappa_hat': self.kappa_hat,
                'kappa': self.kappa, 'expected': self.expected,
                'slaved': self.slaved, 'amplitude': self.amplitude,
                'fitted': self.fitted}


def mode_ledger(trajectory, window=None, degrees=LEDGER_DEGREES):
    """Fitted kappa of each recorded mode amplitude against nu(l)/p.

    The kernel mode l = 1 is reported with its largest amplitude only.
    Modes under settings.amplitude_floor anywhere in the window, or with no
    samples in it, are left unfitted. Modes with kappa < 0 or kappa above
    twice the slowest fitted rate are marked slaved.
    """
    from fastdiff.sphere.spectral import spectrum_closed_form
    params = trajectory.params
    report = spectrum_closed_form(params, max(max(degrees), 2))
    tau = trajectory.column('tau')
    if window is None:
        window = default_window(tau)
    inside = (tau >= window[0] - 1e-12) & (tau <= window[1] + 1e-12)
    ledger = []
    for l in (1,) + tuple(degrees):
        sigma = np.abs(trajectory.sigma(l))
        if not np.any(inside):
            ledger.append(ModeRate(l, float('nan'), report.kappa(l), 0.0))
            continue
        amplitude = float(np.max(sigma[inside]))
        if l == 1:
            ledger.append(ModeRate(1, float('nan'), 0.0, amplitude))
            continue
        kappa = report.kappa(l)
        if np.min(sigma[inside]) < settings.amplitude_floor:
            logger.debug("Mode %d below the amplitude floor; skipped", l)
            ledger.append(ModeRate(l, float('nan'), kappa, amplitude))
            continue
        fit = fit_rate(zip(tau, sigma), window)
        ledger.append(ModeRate(l, fit.slope, kappa, amplitude, fit))
    rates = [m.kappa for m in ledger if m.fitted and m.kappa > 0]
    if rates:
        driving = min(rates)
        for m in ledger:
            if m.l != 1 and (m.kappa < 0 or m.kappa > 2 * driving):
                m.slaved = True
                m.expected = 2 * driving
    return ledger


def bound_constant(lhs, rhs, exponent):
    """Smallest C with lhs <= C rhs^exponent over the samples."""
    lhs = np.asarray(lhs, dtype=float)
    rhs = np.asarray(rhs, dtype=float)
    keep = rhs > 0
    if not np.any(keep):
        return 0.0
    return float(np.max(lhs[keep] / rhs[keep] ** exponent))


class ConstantStability(object):
    """Constants fitted on an early and a later window.

    Stable means the later constant does not exceed factor times the early
    one; the bound may only tighten with time.
    """

    def __init__(self, early, late, factor=2.0):
        self.early = early
        self.late = late
        self.factor = factor

    @property
    def stable(self):
        return self.late <= self.factor * self.early

    def asdict(self):
        return {'early': self.early, 'late': self.late,
                'factor': self.factor, 'stable': self.stable}


def windowed_constants(tau, lhs, rhs, exponent, early, late, factor=2.0):
    tau = np.asarray(tau, dtype=float)
    lhs = np.asarray(lhs, dtype=float)
    rhs = np.asarray(rhs, dtype=float)

    def constant(window):
        inside = (tau >= window[0]) & (tau <= window[1])
        return bound_constant(lhs[inside], rhs[inside], exponent)

    return ConstantStability(constant(early), constant(late), factor)


def shifted_windows(window, shift=0.5):
    """The window and its copy moved right by shift times its length."""
    lo, hi = window
    d = shift * (hi - lo)
    return (lo, hi - d), (lo + d, hi)


def trajectory_bound_checks(trajectory, window=None):
    """Late window constants for hs_dist <= K J_gap^{1/2} and
    relerr_sup <= K' hs_dist^{2/(N-2s+2)}.
    """
    params = trajectory.params
    tau = trajectory.column('tau')
    if window is None:
        window = default_window(tau)
    early, late = shifted_windows(window)
    gap = np.maximum(trajectory.column('J_gap'), 0.0)
    dist = trajectory.column('hs_dist')
    relerr = trajectory.column('relerr_sup')
    exponent = 2.0 / (params.N - 2 * params.s + 2)
    return {
        'distance_by_energy': windowed_constants(tau, dist, gap, 0.5,
                                                 early, late),
        'relerr_by_distance': windowed_constants(tau, relerr, dist, exponent,
                                                 early, late),
    }


def log_ratio_slope(a, b, ta, tb):
    """Exponential rate between two samples; positive for decay."""
    return -(log(b) - log(a)) / (tb - ta)
