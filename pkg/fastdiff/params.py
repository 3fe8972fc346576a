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

from math import expm1, log1p

from fastdiff.log import logging
from fastdiff.util import ParameterError, isnum

logger = logging.getLogger("fastdiff.params")

WHOLE_SPACE = 'WholeSpace'
BOUNDED_DOMAIN = 'BoundedDomain'
REGIMES = (WHOLE_SPACE, BOUNDED_DOMAIN)


class ProblemParams(object):
    """Dimension N, order s and the exponents m = 1/p of the fast diffusion
    equation. Built through make_params; never mutated afterwards.
    """

    __slots__ = ('N', 's', 'p', 'm', 'regime')

    def __init__(self, N, s, p, m, regime):
        object.__setattr__(self, 'N', N)
        object.__setattr__(self, 's', s)
        object.__setattr__(self, 'p', p)
        object.__setattr__(self, 'm', m)
        object.__setattr__(self, 'regime', regime)

    def __setattr__(self, name, value):
        raise AttributeError("ProblemParams is immutable")

    def __eq__(self, other):
        return (isinstance(other, ProblemParams) and
                self.astuple() == other.astuple())

    def __ne__(self, other):
        return not self == other

    def __hash__(self):
        return hash(self.astuple())

    def astuple(self):
        return (self.N, self.s, self.p, self.m, self.regime)

    @property
    def critical_p(self):
        """(N+2s)/(N-2s), or infinity when N <= 2s."""
        if self.N <= 2 * self.s:
            return float('inf')
        return (self.N + 2 * self.s) / (self.N - 2 * self.s)

    @property
    def beta(self):
        """Decay exponent (N-2s)/2 of the bubble."""
        return (self.N - 2 * self.s) / 2.0

    def asdict(self):
        return {'N': self.N, 's': self.s, 'p': self.p, 'm': self.m,
                'regime': self.regime}

    def __repr__(self):
        return ('ProblemParams(N=%d, s=%r, p=%r, m=%r, regime=%r)' %
                self.astuple())


def make_params(N, s, regime=WHOLE_SPACE, p_opt=None):
    if not isinstance(N, int) or isinstance(N, bool) or N < 1:
        raise ParameterError("Dimension N must be a positive integer, got %r"
                             % (N,))
    if not isnum(s) or not 0 < s <= 1:
        raise ParameterError("Order s must lie in (0, 1], got %r" % (s,))
    if regime not in REGIMES:
        raise ParameterError("Unknown regime %r, expected one of %s"
                             % (regime, ', '.join(REGIMES)))
    s = float(s)

    if regime == WHOLE_SPACE:
        if N <= 2 * s:
            raise ParameterError(
                "Whole space requires N > 2s (N=%d, 2s=%r)" % (N, 2 * s))
        if p_opt is not None:
            logger.debug("Ignoring p=%r in whole space (critical p used)",
                         p_opt)
        # evaluated from (N, s) directly, never from p
        p = (N + 2 * s) / (N - 2 * s)
        m = (N - 2 * s) / (N + 2 * s)
        return ProblemParams(N, s, p, m, regime)

    if p_opt is None:
        raise ParameterError("Bounded domain requires an exponent p")
    if s >= 1:
        raise ParameterError("Bounded domain requires s < 1, got %r" % s)
    if not isnum(p_opt):
        raise ParameterError("Exponent p must be a number, got %r" % (p_opt,))
    p = float(p_opt)
    upper = (N + 2 * s) / (N - 2 * s) if N > 2 * s else float('inf')
    if not 1 < p < upper:
        raise ParameterError(
            "Bounded domain requires 1 < p < %r, got p=%r" % (upper, p))
    return ProblemParams(N, s, p, 1.0 / p, regime)


class SharpExponents(object):
    """Sharp decay rates of the whole-space theory and the logarithmic time
    change between original time t and rescaled time tau.
    """

    def __init__(self, params, T_star):
        N, s = params.N, params.s
        self.params = params
        self.T_star = T_star
        self.rate_w_hs = 4 * s / (N - 2 * s + 2)
        self.rate_J = 2 * self.rate_w_hs
        self.rate_u = (N + 2 * s) / (N - 2 * s + 2)
        self.rate_relerr_bound = 8 * s / (N - 2 * s + 2) ** 2

    def tau_of_t(self, t):
        return tau_of_t(self.T_star, self.params, t)

    def t_of_tau(self, tau):
        return t_of_tau(self.T_star, self.params, tau)

    def asdict(self):
        return {'rate_w_hs': self.rate_w_hs, 'rate_J': self.rate_J,
                'rate_u': self.rate_u,
                'rate_relerr_bound': self.rate_relerr_bound,
                'T_star': self.T_star}


def sharp_exponents(params, T_star=1.0):
    if params.regime != WHOLE_SPACE:
        raise ParameterError(
            "Sharp exponents are closed form only in whole space; the bounded "
            "domain rate needs the computed spectrum")
    if not T_star > 0:
        raise ParameterError("T* must be positive, got %r" % (T_star,))
    return SharpExponents(params, T_star)


def tau_of_t(T_star, params, t):
    """tau = -(p/(p-1)) log((T* - t)/T*)."""
    if not T_star > 0:
        raise ParameterError("T* must be positive, got %r" % (T_star,))
    if t < 0:
        raise ParameterError("Time t=%r precedes the initial time" % t)
    if t >= T_star:
        raise ParameterError(
            "t=%r is past extinction (T*=%r)" % (t, T_star))
    p = params.p
    return -(p / (p - 1)) * log1p(-t / T_star)


def t_of_tau(T_star, params, tau):
    if tau < 0:
        raise ParameterError("Rescaled time tau=%r is negative" % tau)
    p = params.p
    return -T_star * expm1(-(p - 1) * tau / p)


def time_map(T_star, params, t):
    return tau_of_t(T_star, params, t)


def u_time_exponent(rate_tau, params):
    """Power of (T*-t) matching a decay e^{-rate tau} under the time map."""
    return rate_tau * params.p / (params.p - 1)
