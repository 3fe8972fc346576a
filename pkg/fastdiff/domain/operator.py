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
"""Dirichlet fractional Laplacians on an interval (0, length).

Both realisations share one Galerkin picture: grid functions on the M interior
nodes x_j = j h, a basis Psi (M x K) with coefficients c, and

    mass      = h Psi^T Psi
    stiffness = h Psi^T A Psi

For SFL Psi holds the discrete-orthonormal sine modes and the stiffness is the
diagonal of multipliers (k pi / length)^{2s}; for RFL Psi is the identity and
A the collocation matrix of the singular integral with zero exterior values.
"""

from math import gamma, pi, sqrt

import numpy as np
from scipy import fft, linalg
from scipy import special as sf

from fastdiff import settings
from fastdiff.log import logging
from fastdiff.params import BOUNDED_DOMAIN
from fastdiff.special import LEGENDRE, quad_rule
from fastdiff.util import ParameterError, SolverError

logger = logging.getLogger("fastdiff.domain.operator")

SFL = 'SFL'
RFL = 'RFL'
CFL = 'CFL'
KINDS = (SFL, RFL)

MIN_NODES = 16
SYMMETRY_TOL = 1e-10
INVERSE_ITERATION_TOL = 1e-13
INVERSE_ITERATION_MAXITER = 1000
# Gauss nodes per half cell of a hat function against the kernel
CELL_NODES = 16


def boundary_exponent(kind, s):
    """gamma in Phi ~ dist^gamma: 1 for SFL, s for RFL, 2s-1 for CFL."""
    if kind == SFL:
        return 1.0
    if kind == RFL:
        return s
    if kind == CFL:
        return 2 * s - 1
    raise ParameterError("Unknown operator kind %r" % (kind,))


def rfl_constant(s):
    """c_{1,s} = s 4^s Gamma(1/2 + s) / (sqrt(pi) Gamma(1 - s))."""
    return s * 4 ** s * gamma(0.5 + s) / (sqrt(pi) * gamma(1 - s))


def constants_table(s, N=1):
    """gamma and the relative error exponents for each realisation."""
    table = []
    for kind in (SFL, RFL, CFL):
        if kind == CFL and s <= 0.5:
            continue
        g = boundary_exponent(kind, s)
        table.append({'kind': kind, 'gamma': g,
                      'relerr_exponent': s / (N + g),
                      'integrated_exponent': 2 * s / (N + g)})
    return table


class DomainOperator(object):
    """Common Galerkin interface; built through build_operator."""

    kind = None

    def __init__(self, params, M, K, length):
        self.params = params
        self.M = M
        self.K = K
        self.length = float(length)
        self.h = self.length / (M + 1)
        self.x = self.h * np.arange(1, M + 1)
        self.gamma = boundary_exponent(self.kind, params.s)

    # grid quadrature
    def integrate(self, u):
        return self.h * float(np.sum(u))

    def l2_norm(self, u):
        return sqrt(self.h * float(np.dot(u, u)))

    # Galerkin maps
    def to_coeffs(self, u):
        raise NotImplementedError()

    def to_grid(self, c):
        raise NotImplementedError()

    def load(self, g):
        """h Psi^T g, the grid function g tested against the basis."""
        raise NotImplementedError()

    def weighted_mass(self, weight):
        """h Psi^T diag(weight) Psi."""
        raise NotImplementedError()

    def mass_solve(self, F):
        raise NotImplementedError()

    def apply(self, u):
        raise NotImplementedError()

    def solve(self, f):
        raise NotImplementedError()

    def q_norm(self, c):
        return sqrt(max(float(np.dot(c, np.dot(self.stiffness, c))), 0.0))

    def residual_norm(self, F):
        """L^2 norm of the grid residual mass^{-1} F."""
        r = self.mass_solve(F)
        return sqrt(max(float(np.dot(r, np.dot(self.mass, r))), 0.0))

    def green_matrix(self):
        """G = Psi stiffness^{-1} Psi^T; G[i, j] approximates G(x_i, x_j)."""
        raise NotImplementedError()

    def tail_bound(self):
        return 0.0

    def describe(self):
        return {'kind': self.kind, 'M': self.M, 'K': self.K,
                'length': self.length, 'h': self.h, 'lambda1': self.lambda1,
                'gamma': self.gamma}


class SpectralOperator(DomainOperator):
    """SFL: multipliers (k pi / length)^{2s} on the first K sine modes."""

    kind = SFL

    def __init__(self, params, M, K, length=1.0):
        DomainOperator.__init__(self, params, M, K, length)
        k = np.arange(1, K + 1)
        self.multipliers = (k * pi / self.length) ** (2 * params.s)
        self.Psi = sqrt(2 / self.length) * np.sin(
            np.outer(self.x, k) * pi / self.length)
        self.mass = np.eye(K)
        self.stiffness = np.diag(self.multipliers)
        self.Phi = self.Psi[:, 0].copy()
        self.lambda1 = float(self.multipliers[0])
        self.symmetry_defect = 0.0
        for a in (self.multipliers, self.Psi, self.Phi):
            a.setflags(write=False)

    def _dst(self, u):
        # h Psi^T u through the type I sine transform, all M modes
        return 0.5 * self.h * sqrt(2 / self.length) * fft.dst(u, type=1)

    def _idst(self, c):
        full = np.zeros(self.M)
        full[:len(c)] = c
        return 0.5 * sqrt(2 / self.length) * fft.dst(full, type=1)

    def to_coeffs(self, u):
        return self._dst(np.asarray(u, dtype=float))[:self.K]

    def to_grid(self, c):
        return self._idst(np.asarray(c, dtype=float))

    def load(self, g):
        return self.to_coeffs(g)

    def weighted_mass(self, weight):
        return self.h * np.dot(self.Psi.T, weight[:, None] * self.Psi)

    def mass_solve(self, F):
        return np.asarray(F, dtype=float)

    def apply(self, u):
        return self.to_grid(self.multipliers * self.to_coeffs(u))

    def solve(self, f):
        return self.to_grid(self.to_coeffs(f) / self.multipliers)

    def green_matrix(self):
        return np.dot(self.Psi / self.multipliers, self.Psi.T)

    def tail_bound(self):
        """Bound on |G - G_K| from the discarded modes; infinite for s <= 1/2.
        """
        s = self.params.s
        if s <= 0.5:
            return float('inf')
        scale = (self.length / pi) ** (2 * s) * 2 / self.length
        return scale * self.K ** (1 - 2 * s) / (2 * s - 1)


def _hat_weights(M, a):
    """w(d) = int_{|r| >= 1} hat_d(r) r^{-1-a} dr for d = 0..M-1, unit h."""
    rule = quad_rule(LEGENDRE, CELL_NODES)
    y = 0.5 * (rule.nodes + 1)
    wy = 0.5 * rule.weights
    d = np.arange(1, M, dtype=float)[:, None]
    # right half cell [d, d+1]: hat = 1 - (r - d)
    right = np.dot((1 - y) * (d + y) ** (-1 - a), wy)
    # left half cell [d-1, d]: hat = 1 - (d - r); absent for d = 1
    r = d - 1 + y
    left = np.dot(y * r ** (-1 - a) * (d > 1), wy)
    w = np.zeros(M)
    w[1:] = right + left
    return w


def _quadratic_correction(a):
    """sum_{k>=1} int_0^1 y(1-y)(k+y)^{-1-a} dy through the Hurwitz zeta."""
    rule = quad_rule(LEGENDRE, 24)
    y = 0.5 * (rule.nodes + 1)
    return float(np.dot(0.5 * rule.weights,
                        y * (1 - y) * sf.zeta(1 + a, 1 + y)))


def rfl_matrix(M, s, length=1.0):
    """Collocation matrix of the restricted fractional Laplacian.

    Far cells use the piecewise linear interpolant of u with exact kernel
    weights; the cell [0, h] uses u'' from second differences. Its weight is
    reduced by the interpolation defect so the scheme is exact on
    quadratics.
    """
    a = 2 * s
    h = length / (M + 1)
    c = rfl_constant(s)
    near = (1 / (2 - a) - _quadratic_correction(a)) * h ** (2 - a)
    far = _hat_weights(M, a) * h ** -a
    A = -c * linalg.toeplitz(far)
    idx = np.arange(M)
    A[idx, idx] += c * (h ** -a / s + 2 * near / h ** 2)
    A[idx[:-1], idx[:-1] + 1] -= c * near / h ** 2
    A[idx[1:], idx[1:] - 1] -= c * near / h ** 2
    return A


class RestrictedOperator(DomainOperator):
    """RFL: nodal basis, A from rfl_matrix."""

    kind = RFL

    def __init__(self, params, M, length=1.0):
        DomainOperator.__init__(self, params, M, M, length)
        A = rfl_matrix(M, params.s, length)
        self.symmetry_defect = float(np.max(np.abs(A - A.T)))
        if self.symmetry_defect > SYMMETRY_TOL * np.max(np.abs(A)):
            raise SolverError("RFL assembly is not symmetric (defect %.3g)"
                              % self.symmetry_defect)
        self.A = 0.5 * (A + A.T)
        try:
            self._cho = linalg.cho_factor(self.A, lower=True)
        except linalg.LinAlgError:
            raise SolverError("RFL matrix is not positive definite")
        self.mass = self.h * np.eye(M)
        self.stiffness = self.h * self.A
        self.Phi, self.lambda1 = self._principal()
        self.A.setflags(write=False)
        self.Phi.setflags(write=False)

    def _principal(self):
        lu = linalg.lu_factor(self.A)
        u = np.sin(pi * self.x / self.length)
        u /= self.l2_norm(u)
        for iteration in range(INVERSE_ITERATION_MAXITER):
            nxt = linalg.lu_solve(lu, u)
            nxt /= self.l2_norm(nxt)
            if np.max(np.abs(nxt - u)) < INVERSE_ITERATION_TOL:
                u = nxt
                break
            u = nxt
        else:
            raise SolverError("Inverse iteration for Phi did not converge")
        if np.sum(u) < 0:
            u = -u
        if np.any(u < 0):
            raise SolverError("Principal eigenfunction changes sign")
        lam = float(np.dot(u, np.dot(self.A, u)) / np.dot(u, u))
        logger.debug("RFL principal pair after %d iterations: lambda1=%.15g",
                     iteration + 1, lam)
        return u, lam

    def to_coeffs(self, u):
        return np.array(u, dtype=float)

    def to_grid(self, c):
        return np.array(c, dtype=float)

    def load(self, g):
        return self.h * np.asarray(g, dtype=float)

    def weighted_mass(self, weight):
        return np.diag(self.h * np.asarray(weight, dtype=float))

    def mass_solve(self, F):
        return np.asarray(F, dtype=float) / self.h

    def apply(self, u):
        return np.dot(self.A, u)

    def solve(self, f):
        return linalg.cho_solve(self._cho, f)

    def green_matrix(self):
        return linalg.cho_solve(self._cho, np.eye(self.M)) / self.h


def build_operator(kind, M, params, K=None, length=1.0):
    if params.regime != BOUNDED_DOMAIN:
        raise ParameterError("Domain operators need bounded domain params")
    if params.N != 1:
        raise ParameterError("Only the interval (N = 1) is implemented")
    if int(M) != M or M < MIN_NODES:
        raise ParameterError("Need M >= %d interior nodes, got %r"
                             % (MIN_NODES, M))
    if not length > 0:
        raise ParameterError("Domain length must be positive")
    M = int(M)
    if kind == SFL:
        K = min(settings.K, M) if K is None else int(K)
        if not 1 <= K <= M:
            raise ParameterError("Need 1 <= K <= M sine modes, got K=%r" % K)
        op = SpectralOperator(params, M, K, length)
    elif kind == RFL:
        op = RestrictedOperator(params, M, length)
    else:
        raise ParameterError("Unknown operator kind %r, expected one of %s"
                             % (kind, ', '.join(KINDS)))
    logger.debug("Built %s operator M=%d K=%d length=%g lambda1=%.12g",
                 kind, op.M, op.K, op.length, op.lambda1)
    return op
