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
"""Zonal spectral engine on S^N.

A zonal field v(t) is stored in the orthonormal zonal basis Y_0..Y_L of
L^2(S^N) and/or as values at the zonal quadrature nodes. Under stereographic
projection w = (v o S) B, so

    <w_f, (-Delta)^s w_g>  = sum alpha(l) f_l g_l
    int w_f w_g U^{p-1} dx = alpha(0) sum f_l g_l
"""

from collections import namedtuple
from math import comb, sqrt

import numpy as np

from fastdiff import settings
from fastdiff.log import logging
from fastdiff.params import WHOLE_SPACE
from fastdiff.special import (ZONAL, gegenbauer_table, log_gamma, quad_rule,
                              sphere_area)
from fastdiff.util import ParameterError, SolverError

logger = logging.getLogger("fastdiff.sphere.spectral")

# |nu| below this is reported as the kernel
KERNEL_TOL = 1e-12

WEIGHT_B = 'B^{p-1}'
WEIGHT_U = 'U^{p-1}'


def alpha(l, params):
    """Multiplier Gamma(l + N/2 + s) / Gamma(l + N/2 - s) of A_s."""
    l = np.asarray(l, dtype=float)
    half = params.N / 2.0
    result = np.exp(log_gamma(l + half + params.s) -
                    log_gamma(l + half - params.s))
    return float(result) if result.ndim == 0 else result


def alpha_ratio(l, params):
    """alpha(l) / alpha(0) as a product of rational factors."""
    half = params.N / 2.0
    ratio = 1.0
    for k in range(int(l)):
        ratio *= (k + half + params.s) / (k + half - params.s)
    return ratio


def bubble_level(params):
    """The constant v* = alpha(0)^{1/(p-1)}, the bubble U[0,1] on S^N."""
    return alpha(0, params) ** (1.0 / (params.p - 1))


def multiplicity(l, N):
    """Dimension of the degree-l spherical harmonics on S^N."""
    if l < 2:
        return 1 if l == 0 else N + 1
    return comb(l + N, N) - comb(l + N - 2, N)


SpectrumEntry = namedtuple('SpectrumEntry',
                           'l alpha nu multiplicity kappa mu')


class SpectrumReport(object):
    """Eigenvalues nu(l) = alpha(l)/alpha(0) - p of the linearised operator
    against the weight U^{p-1}, by harmonic degree.
    """

    def __init__(self, params, entries):
        self.params = params
        self.entries = list(entries)
        self.unstable = self.entries[0].nu
        positive = [e for e in self.entries if e.nu > KERNEL_TOL]
        self.gap = positive[0].nu if positive else float('nan')
        self.gap_degree = positive[0].l if positive else None

    def nu(self, l):
        return self.entries[l].nu

    def kappa(self, l):
        return self.entries[l].kappa

    def __len__(self):
        return len(self.entries)

    def asdict(self):
        return {
            'params': self.params.asdict(),
            'l': [e.l for e in self.entries],
            'alpha': [e.alpha for e in self.entries],
            'nu': [e.nu for e in self.entries],
            'mu': [e.mu for e in self.entries],
            'multiplicity': [e.multiplicity for e in self.entries],
            'kappa': [e.kappa for e in self.entries],
            'gap': self.gap,
            'gap_degree': self.gap_degree,
            'unstable': self.unstable,
        }


def spectrum_closed_form(params, Lmax):
    if params.regime != WHOLE_SPACE:
        raise ParameterError("Closed form spectrum needs whole space params")
    if Lmax < 2:
        raise ParameterError("Lmax must be at least 2 to contain the gap")
    p = params.p
    entries = []
    for l in range(Lmax + 1):
        nu = alpha_ratio(l, params) - p
        if abs(nu) <= KERNEL_TOL * p:
            nu = 0.0
        entries.append(SpectrumEntry(l, alpha(l, params), nu,
                                     multiplicity(l, params.N), nu / p,
                                     nu + p))
    return SpectrumReport(params, entries)


class ZonalBasis(object):
    """Orthonormal zonal harmonics Y_0..Y_L sampled at n zonal nodes.

    Normalisation is numerical: Gegenbauer polynomials C_l^{((N-1)/2)} are
    rescaled by their quadrature norm over S^N.
    """

    def __init__(self, params, L=None, n=None):
        L = settings.L if L is None else L
        n = settings.n_quad if n is None else n
        if params.N < 2:
            raise ParameterError("The sphere pathway needs N >= 2")
        if L < 1:
            raise ParameterError("Cutoff L must be >= 1, got %r" % L)
        if n < 2 * L + 2:
            raise ParameterError(
                "Zonal grid needs n >= 2L+2 nodes (L=%d, n=%d)" % (L, n))
        self.params = params
        self.L = L
        self.n = n
        self.rule = quad_rule(ZONAL, n, params.N)
        self.t = self.rule.nodes
        self.weights = sphere_area(params.N - 1) * self.rule.weights
        raw = gegenbauer_table(L, (params.N - 1) / 2.0, self.t)
        norms = np.sqrt(np.dot(self.weights, raw * raw))
        self.Y = raw / norms
        self.alpha = alpha(np.arange(L + 1), params)
        self.area = float(np.sum(self.weights))
        for a in (self.t, self.weights, self.Y, self.alpha):
            a.setflags(write=False)
        logger.debug("Built zonal basis N=%d L=%d n=%d", params.N, L, n)

    def key(self):
        return (self.params, self.L, self.n)

    def compatible(self, other):
        return self is other or self.key() == other.key()

    def analyze(self, grid):
        return np.dot(self.Y.T, self.weights * grid)

    def synth(self, coeffs):
        return np.dot(self.Y, coeffs)

    def integrate(self, grid):
        return float(np.dot(self.weights, grid))

    def constant(self, value):
        return ZonalField.from_grid(self, np.full(self.n, float(value)))

    def mode(self, l, hs_normalized=True):
        """The degree-l zonal mode, unit in H^s (default) or in L^2."""
        if not 0 <= l <= self.L:
            raise ParameterError("Mode l=%r outside 0..%d" % (l, self.L))
        c = np.zeros(self.L + 1)
        c[l] = 1.0 / sqrt(self.alpha[l]) if hs_normalized else 1.0
        return ZonalField.from_coeffs(self, c)


class ZonalField(object):
    """Immutable zonal field. Whichever representation it was built from is
    authoritative; the other one is computed lazily.
    """

    def __init__(self, basis, coeffs=None, grid=None):
        if coeffs is None and grid is None:
            raise ParameterError("A zonal field needs coeffs or grid values")
        self.basis = basis
        self._coeffs = None
        self._grid = None
        if coeffs is not None:
            coeffs = np.array(coeffs, dtype=float)
            if coeffs.shape != (basis.L + 1,):
                raise ParameterError("Expected %d coefficients, got %r"
                                     % (basis.L + 1, coeffs.shape))
            coeffs.setflags(write=False)
            self._coeffs = coeffs
        if grid is not None:
            grid = np.array(grid, dtype=float)
            if grid.shape != (basis.n,):
                raise ParameterError("Expected %d grid values, got %r"
                                     % (basis.n, grid.shape))
            grid.setflags(write=False)
            self._grid = grid

    @classmethod
    def from_coeffs(cls, basis, coeffs):
        return cls(basis, coeffs=coeffs)

    @classmethod
    def from_grid(cls, basis, grid):
        return cls(basis, grid=grid)

    @property
    def params(self):
        return self.basis.params

    @property
    def L(self):
        return self.basis.L

    @property
    def coeffs(self):
        if self._coeffs is None:
            c = self.basis.analyze(self._grid)
            c.setflags(write=False)
            self._coeffs = c
        return self._coeffs

    @property
    def grid(self):
        if self._grid is None:
            g = self.basis.synth(self._coeffs)
            g.setflags(write=False)
            self._grid = g
        return self._grid

    def truncated(self):
        """Band-limited copy: grid re-synthesised from the coefficients."""
        return ZonalField.from_coeffs(self.basis, self.coeffs)

    def _check(self, other):
        if not self.basis.compatible(other.basis):
            raise ParameterError("Fields live on different discretisations")

    def __add__(self, other):
        self._check(other)
        if self._grid is not None and other._grid is not None:
            return ZonalField.from_grid(self.basis, self._grid + other._grid)
        return ZonalField.from_coeffs(self.basis, self.coeffs + other.coeffs)

    def __sub__(self, other):
        return self + (-1.0) * other

    def __mul__(self, scalar):
        if self._grid is not None:
            return ZonalField.from_grid(self.basis, scalar * self._grid)
        return ZonalField.from_coeffs(self.basis, scalar * self._coeffs)

    __rmul__ = __mul__

    def l2_norm(self):
        return sqrt(float(np.dot(self.coeffs, self.coeffs)))


def apply_As(field):
    return ZonalField.from_coeffs(field.basis,
                                  field.basis.alpha * field.coeffs)


def hs_inner(f, g):
    f._check(g)
    return float(np.dot(f.basis.alpha * f.coeffs, g.coeffs))


def hs_norm(f):
    return sqrt(max(hs_inner(f, f), 0.0))


def weighted_l2(f, g=None, weight=WEIGHT_B):
    """int w_f w_g W dx for W = B^{p-1} (the plain sphere L^2 product) or
    W = U^{p-1} = alpha(0) B^{p-1}.
    """
    g = f if g is None else g
    f._check(g)
    value = float(np.dot(f.coeffs, g.coeffs))
    if weight == WEIGHT_B:
        return value
    if weight == WEIGHT_U:
        return f.basis.alpha[0] * value
    raise ParameterError("Unknown weight %r" % (weight,))


def _finite_grid(field):
    v = field.grid
    if not np.all(np.isfinite(v)):
        raise SolverError("Field has non-finite grid values")
    return v


def J_functional(field):
    """J = 1/2 sum alpha c^2 - 1/(p+1) int |v|^{p+1}."""
    v = _finite_grid(field)
    p = field.params.p
    kinetic = 0.5 * float(np.dot(field.basis.alpha, field.coeffs ** 2))
    potential = field.basis.integrate(np.abs(v) ** (p + 1)) / (p + 1)
    return kinetic - potential


JPrime = namedtuple('JPrime', 'field weighted_norm')


def J_prime_residual(field):
    """A_s v - v^p on the grid and its norm in L^2(U^{1-p} dx)."""
    v = _finite_grid(field)
    if np.any(v <= 0):
        raise SolverError("Residual norm needs a positive field")
    basis = field.basis
    residual = basis.synth(basis.alpha * field.coeffs) - v ** field.params.p
    norm2 = basis.integrate(residual * residual) / basis.alpha[0]
    return JPrime(ZonalField.from_grid(basis, residual), sqrt(norm2))


def bubble_field(basis):
    return basis.constant(bubble_level(basis.params))


def bubble_hs_norm_sq(basis):
    """||U||^2 = int U^{p+1} dx = alpha(0)^{(p+1)/(p-1)} |S^N|."""
    p = basis.params.p
    return basis.alpha[0] ** ((p + 1) / (p - 1)) * basis.area


def J_bubble(basis):
    p = basis.params.p
    return (0.5 - 1.0 / (p + 1)) * bubble_hs_norm_sq(basis)


def linearized_form(e, f=None):
    """<e, L f> with L = (-Delta)^s - p U^{p-1} at U = U[0,1]."""
    f = e if f is None else f
    p = e.params.p
    return hs_inner(e, f) - p * weighted_l2(e, f, WEIGHT_U)


def taylor_remainder(basis, direction, eps):
    """J(U + eps e) - J(U) - eps^2/2 <e, L e>."""
    U = bubble_field(basis)
    shifted = ZonalField.from_grid(basis, U.grid + eps * direction.grid)
    return (J_functional(shifted) - J_functional(U) -
            0.5 * eps * eps * linearized_form(direction))
