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
"""Special functions and quadrature on [-1, 1] and on spheres.

The zonal measure on S^N is |S^{N-1}| (1-t^2)^{(N-2)/2} dt, t the cosine of
the polar angle measured from the north pole (0, ..., 0, 1).
"""

from math import pi

import numpy as np
from scipy import special as sf

from fastdiff.log import logging
from fastdiff.util import ParameterError

logger = logging.getLogger("fastdiff.special")

LEGENDRE = 'Legendre'
ZONAL = 'ZonalWeighted'

NEWTON_TOL = 1e-14
NEWTON_MAXITER = 100


def log_gamma(x):
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise ParameterError("log_gamma needs x > 0, got %r" % (x.tolist(),))
    result = sf.gammaln(x)
    return float(result) if result.ndim == 0 else result


def gamma_ratio(x, y):
    """Gamma(x) / Gamma(y) for positive x and y."""
    return np.exp(log_gamma(x) - log_gamma(y))


def sphere_area(N):
    """Surface measure of the unit sphere S^N in R^{N+1}."""
    if N < 0:
        raise ParameterError("Sphere dimension must be >= 0, got %r" % N)
    if N == 0:
        return 2.0
    return 2 * pi ** ((N + 1) / 2.0) / sf.gamma((N + 1) / 2.0)


def gegenbauer(l, a, t):
    """C_l^{(a)}(t) by the three term recurrence."""
    return gegenbauer_table(l, a, t)[..., l]


def gegenbauer_table(L, a, t):
    """All C_0^{(a)} .. C_L^{(a)} at t; the degree runs along the last axis."""
    if L < 0 or int(L) != L:
        raise ParameterError("Degree must be a nonnegative integer, got %r"
                             % (L,))
    if not a > 0:
        raise ParameterError("Gegenbauer parameter must be > 0, got %r" % a)
    t = np.asarray(t, dtype=float)
    if np.any(np.abs(t) > 1 + 1e-12):
        raise ParameterError("Gegenbauer argument outside [-1, 1]")
    table = np.empty(t.shape + (int(L) + 1,))
    table[..., 0] = 1.0
    if L >= 1:
        table[..., 1] = 2 * a * t
    for k in range(2, int(L) + 1):
        table[..., k] = (2 * t * (k + a - 1) * table[..., k - 1] -
                         (k + 2 * a - 2) * table[..., k - 2]) / k
    return table


def gegenbauer_at_one(l, a):
    """Closed form C_l^{(a)}(1) = Gamma(l+2a) / (Gamma(2a) l!)."""
    return gamma_ratio(l + 2 * a, 2 * a) / sf.gamma(l + 1)


class QuadratureRule(object):

    def __init__(self, nodes, weights, kind, N=None):
        self.nodes = np.asarray(nodes, dtype=float)
        self.weights = np.asarray(weights, dtype=float)
        self.kind = kind
        self.N = N
        self.nodes.setflags(write=False)
        self.weights.setflags(write=False)

    def __len__(self):
        return len(self.nodes)

    def integrate(self, values):
        return float(np.dot(self.weights, values))

    def __repr__(self):
        if self.kind == ZONAL:
            return 'QuadratureRule(%s(%d), n=%d)' % (self.kind, self.N,
                                                     len(self))
        return 'QuadratureRule(%s, n=%d)' % (self.kind, len(self))


def _legendre_newton(n):
    # initial guesses near the roots, descending
    i = np.arange(1, n + 1)
    x = np.cos(pi * (i - 0.25) / (n + 0.5))
    for iteration in range(NEWTON_MAXITER):
        p0 = np.ones_like(x)
        p1 = x.copy()
        for k in range(2, n + 1):
            p0, p1 = p1, ((2 * k - 1) * x * p1 - (k - 1) * p0) / k
        dp = n * (x * p1 - p0) / (x * x - 1)
        dx = p1 / dp
        x = x - dx
        if np.max(np.abs(dx)) < NEWTON_TOL:
            break
    else:
        raise ParameterError(
            "Legendre root iteration did not settle for n=%d" % n)
    # derivative at the final nodes for the weights
    p0 = np.ones_like(x)
    p1 = x.copy()
    for k in range(2, n + 1):
        p0, p1 = p1, ((2 * k - 1) * x * p1 - (k - 1) * p0) / k
    dp = n * (x * p1 - p0) / (x * x - 1)
    w = 2 / ((1 - x * x) * dp * dp)
    logger.debug("Legendre rule n=%d settled after %d iterations",
                 n, iteration + 1)
    order = np.argsort(x)
    return x[order], w[order]


def quad_rule(kind, n, N=None):
    if int(n) != n or n < 2:
        raise ParameterError("Quadrature needs n >= 2 nodes, got %r" % (n,))
    n = int(n)
    if kind == LEGENDRE:
        nodes, weights = _legendre_newton(n)
        return QuadratureRule(nodes, weights, LEGENDRE)
    if kind == ZONAL:
        if N is None or int(N) != N or N < 2:
            raise ParameterError(
                "Zonal quadrature needs a sphere dimension N >= 2, got %r"
                % (N,))
        a = (N - 2) / 2.0
        if a == 0:
            nodes, weights = _legendre_newton(n)
        else:
            nodes, weights = sf.roots_jacobi(n, a, a)
        return QuadratureRule(nodes, weights, ZONAL, int(N))
    raise ParameterError("Unknown quadrature kind %r" % (kind,))


def sphere_rule(N, n):
    """Product quadrature on S^N, exact for polynomials of degree <= 2n-1.

    Returns (points, weights) with points of shape (npts, N+1), the last
    coordinate along the polar axis.
    """
    if N < 1:
        raise ParameterError("Sphere dimension must be >= 1, got %r" % N)
    angles = pi * np.arange(2 * n) / n
    points = np.column_stack((np.cos(angles), np.sin(angles)))
    weights = np.full(2 * n, pi / n)
    for k in range(2, N + 1):
        rule = quad_rule(ZONAL, n, k)
        t = rule.nodes
        radial = np.sqrt(1 - t * t)
        npts = len(weights)
        points = np.concatenate(
            (np.kron(radial, np.ones(npts))[:, None] * np.tile(points,
                                                               (n, 1)),
             np.repeat(t, npts)[:, None]), axis=1)
        weights = np.kron(rule.weights, weights)
    return points, weights
