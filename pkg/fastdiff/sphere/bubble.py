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
"""Bubbles U[z, lam], extinction profiles and their images on S^N.

Under stereographic projection S a bubble pulls back to

    v_{z,lam}(omega) = v* (2 lam / (A - b.omega))^beta,
    A = 1 + lam^2 (1 + |z|^2),  b = (2 lam^2 z, lam^2 - 1 - lam^2 |z|^2),

with A^2 - |b|^2 = 4 lam^2, so every integral of a function of v_{z,lam}
reduces to a one dimensional zonal integral along b.
"""

from math import sqrt

import numpy as np
from scipy import optimize

from fastdiff import settings
from fastdiff.log import logging
from fastdiff.params import WHOLE_SPACE
from fastdiff.special import ZONAL, gamma_ratio, quad_rule, sphere_area
from fastdiff.special import sphere_rule
from fastdiff.sphere.spectral import (ZonalField, bubble_hs_norm_sq,
                                      bubble_level, hs_inner)
from fastdiff.util import ParameterError, ProjectionError, isnum

logger = logging.getLogger("fastdiff.sphere.bubble")

# nodes of the one dimensional rule behind the overlap integrals
OVERLAP_NODES = 200
# samples along the polar axis for the sup ratio
SUP_SAMPLES = 4001
# polar nodes of the product rule behind the tangent Gram matrix
GRAM_NODES = 24


class BubbleParams(object):
    """Centre z in R^N and concentration lam > 0."""

    def __init__(self, z, lam):
        z = np.atleast_1d(np.array(z, dtype=float))
        if z.ndim != 1:
            raise ParameterError("Bubble centre must be a point, got %r" % z)
        if not isnum(lam) or not lam > 0:
            raise ParameterError("Bubble scale must be positive, got %r"
                                 % (lam,))
        z.setflags(write=False)
        self.z = z
        self.lam = float(lam)

    def __repr__(self):
        return 'BubbleParams(z=%r, lam=%r)' % (self.z.tolist(), self.lam)


class ExtinctionProfile(object):

    def __init__(self, T_star, bubble):
        if not T_star > 0:
            raise ParameterError("T* must be positive, got %r" % (T_star,))
        self.T_star = float(T_star)
        self.bubble = bubble


class SphereBubble(object):
    """The zonal pullback v_lam of U[0, lam] to S^N."""

    def __init__(self, lam, params):
        if not lam > 0:
            raise ParameterError("Bubble scale must be positive, got %r"
                                 % (lam,))
        _check_whole_space(params)
        self.lam = float(lam)
        self.params = params

    def __call__(self, t):
        return bubble_on_sphere(self.lam, self.params, t)

    def field(self, basis):
        return ZonalField.from_grid(basis, self(basis.t))


def _check_whole_space(params):
    if params.regime != WHOLE_SPACE:
        raise ParameterError("Bubbles live in the whole space regime")


def _check_point(x, params):
    x = np.asarray(x, dtype=float)
    if x.shape[-1:] != (params.N,):
        raise ParameterError("Expected points in R^%d, got shape %r"
                             % (params.N, x.shape))
    return x


def bubble_constant(params):
    """2^beta (Gamma((N+2s)/2) / Gamma((N-2s)/2))^{(N-2s)/(4s)}."""
    N, s = params.N, params.s
    ratio = gamma_ratio((N + 2 * s) / 2.0, (N - 2 * s) / 2.0)
    return 2 ** params.beta * ratio ** ((N - 2 * s) / (4 * s))


def bubble_eval(b, params, x):
    _check_whole_space(params)
    x = _check_point(x, params)
    r2 = np.sum((x - b.z) ** 2, axis=-1)
    return bubble_constant(params) * (b.lam / (1 + b.lam ** 2 * r2)) ** \
        params.beta


def bubble_tangents(b, params, x):
    """(dU/dz_1, .., dU/dz_N, dU/dlam) at x, stacked on the last axis."""
    x = _check_point(x, params)
    U = bubble_eval(b, params, x)
    lam, beta = b.lam, params.beta
    d = x - b.z
    q = 1 + lam ** 2 * np.sum(d * d, axis=-1)
    dz = (2 * beta * lam ** 2 * U / q)[..., None] * d
    dlam = beta * U * (2.0 / q - 1) / lam
    return np.concatenate((dz, dlam[..., None]), axis=-1)


def extinction_factor(params, T_star, t):
    """((p-1)/p (T* - t))^{p/(p-1)}, the time factor of the profile."""
    if t > T_star:
        raise ParameterError("t=%r is past extinction (T*=%r)" % (t, T_star))
    if t < 0:
        raise ParameterError("Time t=%r precedes the initial time" % t)
    p = params.p
    return ((p - 1) / p * (T_star - t)) ** (p / (p - 1))


def extinction_profile_eval(e, params, t, x):
    factor = extinction_factor(params, e.T_star, t)
    return factor * bubble_eval(e.bubble, params, x) ** params.p


def w_from_u(u, params, T_star, t):
    """Rescaled w = u^{1/p} / ((p-1)/p (T* - t))^{1/(p-1)}."""
    if not t < T_star:
        raise ParameterError("t=%r is not before extinction (T*=%r)"
                             % (t, T_star))
    p = params.p
    scale = ((p - 1) / p * (T_star - t)) ** (1.0 / (p - 1))
    return np.asarray(u, dtype=float) ** (1.0 / p) / scale


def u_from_w(w, params, T_star, t):
    factor = extinction_factor(params, T_star, t)
    return factor * np.asarray(w, dtype=float) ** params.p


def stereographic(x):
    """Inverse stereographic projection R^N -> S^N; S(0) is the north pole."""
    x = np.asarray(x, dtype=float)
    r2 = np.sum(x * x, axis=-1)
    head = 2 * x / (1 + r2)[..., None]
    tail = (1 - r2) / (1 + r2)
    return np.concatenate((head, tail[..., None]), axis=-1)


def stereographic_inverse(omega):
    """S^{-1}; returns None for the south pole, the image of infinity."""
    omega = np.asarray(omega, dtype=float)
    if omega.ndim != 1:
        raise ParameterError("stereographic_inverse takes a single point")
    if omega[-1] <= -1 + 1e-15:
        return None
    return omega[:-1] / (1 + omega[-1])


def conformal_factor(params, x):
    """B(x) = (2 / (1 + |x|^2))^beta."""
    r2 = np.sum(np.asarray(x, dtype=float) ** 2, axis=-1)
    return (2 / (1 + r2)) ** params.beta


def stereographic_jacobian(N, x):
    r2 = np.sum(np.asarray(x, dtype=float) ** 2, axis=-1)
    return (2 / (1 + r2)) ** N


def cos_polar(x):
    r2 = np.sum(np.asarray(x, dtype=float) ** 2, axis=-1)
    return (1 - r2) / (1 + r2)


def bubble_on_sphere(lam, params, t):
    if not lam > 0:
        raise ParameterError("Bubble scale must be positive, got %r" % (lam,))
    t = np.asarray(t, dtype=float)
    D = (1 + lam * lam) - (lam * lam - 1) * t
    return bubble_level(params) * (2 * lam / D) ** params.beta


def _sphere_coefficients(z, lam):
    z = np.atleast_1d(np.asarray(z, dtype=float))
    z2 = float(np.dot(z, z))
    A = 1 + lam * lam * (1 + z2)
    b = np.append(2 * lam * lam * z, lam * lam - 1 - lam * lam * z2)
    return A, b


def sphere_bubble_general(z, lam, params, omega):
    """v_{z,lam} at points omega of S^N (last axis of length N+1)."""
    A, b = _sphere_coefficients(z, lam)
    D = A - np.dot(np.asarray(omega, dtype=float), b)
    return bubble_level(params) * (2 * lam / D) ** params.beta


def _zonal_reduction(z, lam, params):
    A, b = _sphere_coefficients(z, lam)
    return A, sqrt(float(np.dot(b, b)))


def overlap(z, lam, params, n=OVERLAP_NODES):
    """F(z, lam) = int U[z,lam]^p U dx = v* int v_{z,lam}^p d omega."""
    _check_whole_space(params)
    A, bnorm = _zonal_reduction(z, lam, params)
    rule = quad_rule(ZONAL, n, params.N)
    vstar = bubble_level(params)
    v = vstar * (2 * lam / (A - bnorm * rule.nodes)) ** params.beta
    area = sphere_area(params.N - 1)
    return vstar * area * rule.integrate(v ** params.p)


class BubbleDistance(object):

    def __init__(self, hs_distance, sup_ratio):
        self.hs_distance = hs_distance
        self.sup_ratio = sup_ratio

    def asdict(self):
        return {'hs_distance': self.hs_distance, 'sup_ratio': self.sup_ratio}


def bubble_gram_and_distance(lam, z, params):
    """H^s distance from U[z,lam] to U[0,1] and sup |1 - U[z,lam]/U|."""
    _check_whole_space(params)
    if not lam > 0:
        raise ParameterError("Bubble scale must be positive, got %r" % (lam,))
    N = params.N
    norm2 = bubble_level(params) ** (params.p + 1) * sphere_area(N)
    d2 = 2 * norm2 - 2 * overlap(z, lam, params)
    distance = sqrt(max(d2, 0.0))

    A, bnorm = _zonal_reduction(z, lam, params)
    t = np.linspace(-1.0, 1.0, SUP_SAMPLES)
    ratio = (2 * lam / (A - bnorm * t)) ** params.beta
    # the south pole is infinity in R^N where the ratio tends to lam^-beta
    at_infinity = abs(1 - lam ** -params.beta)
    sup_ratio = max(float(np.max(np.abs(1 - ratio))), at_infinity)
    return BubbleDistance(distance, sup_ratio)


def _tangent_fields(z, lam, params, omega):
    A, b = _sphere_coefficients(z, lam)
    z = np.atleast_1d(np.asarray(z, dtype=float))
    beta = params.beta
    head, tail = omega[:, :-1], omega[:, -1]
    D = A - np.dot(omega, b)
    v = bubble_level(params) * (2 * lam / D) ** beta
    dD_dz = 2 * lam * lam * (z[None, :] * (1 + tail)[:, None] - head)
    dD_dlam = (2 * lam * (1 + np.dot(z, z)) - 4 * lam * np.dot(head, z) -
               2 * lam * (1 - np.dot(z, z)) * tail)
    dv_dz = -beta * (v / D)[:, None] * dD_dz
    dv_dlam = beta * v * (1 / lam - dD_dlam / D)
    return v, np.column_stack((dv_dz, dv_dlam))


def tangent_gram(b, params, n=GRAM_NODES):
    """H^s Gram matrix of (dU/dz_1, .., dU/dz_N, dU/dlam) at (z, lam).

    Uses (-Delta)^s dU = p U^{p-1} dU, which turns every entry into
    p int v^{p-1} dv_a dv_b d omega.
    """
    _check_whole_space(params)
    omega, weights = sphere_rule(params.N, n)
    v, dv = _tangent_fields(b.z, b.lam, params, omega)
    weighted = (params.p * weights * v ** (params.p - 1))[:, None] * dv
    return np.dot(dv.T, weighted)


def _overlap_slope(v, t, weights, lam, params):
    # dF_w/dlam with d(v_lam^p)/dlam = p beta v_lam^p (1/lam - 2 lam (1-t)/D)
    p, beta = params.p, params.beta
    D = (1 + lam * lam) - (lam * lam - 1) * t
    vl = bubble_on_sphere(lam, params, t)
    return float(np.dot(weights, p * beta * vl ** p *
                        (1 / lam - 2 * lam * (1 - t) / D) * v))


def _overlap_value(v, t, weights, lam, params):
    return float(np.dot(weights, bubble_on_sphere(lam, params, t) **
                        params.p * v))


class Projection(object):
    """Nearest bubble U[0, lam_star] to a zonal field and the residual rho."""

    def __init__(self, lam_star, distance, residual, slope):
        self.lam_star = lam_star
        self.distance = distance
        self.residual = residual
        self.slope = slope

    def mode_amplitudes(self, degrees):
        """Components of rho along the unit H^s zonal modes."""
        c = self.residual.coeffs
        alpha = self.residual.basis.alpha
        return [sqrt(alpha[l]) * c[l] for l in degrees]


def nearest_bubble(field, params=None, trust_radius=None):
    """Minimise ||w - U[0,lam]||_{H^s} over lam.

    Since ||U[0,lam]|| does not depend on lam this maximises
    F_w(lam) = int v_lam^p v d omega: a scan over settings.lambda_scan
    brackets the maximum and Brent's method solves dF_w/dlam = 0.
    """
    params = field.params if params is None else params
    _check_whole_space(params)
    trust = settings.trust_radius if trust_radius is None else trust_radius
    basis = field.basis
    v = field.grid
    if np.any(v <= 0) or not np.all(np.isfinite(v)):
        raise ProjectionError("Projection needs a positive finite field")
    t, w = basis.t, basis.weights

    lo, hi, count = settings.lambda_scan
    scan = np.geomspace(lo, hi, int(count))
    values = [_overlap_value(v, t, w, lam, params) for lam in scan]
    i = int(np.argmax(values))
    if i == 0 or i == len(scan) - 1:
        raise ProjectionError(
            "Nearest bubble scale leaves the scan range [%g, %g]" % (lo, hi))

    def slope(lam):
        return _overlap_slope(v, t, w, lam, params)

    a, b = scan[i - 1], scan[i + 1]
    if slope(a) <= 0 or slope(b) >= 0:
        # flat maximum inside roundoff; fall back to the scan point
        lam_star = scan[i]
        logger.debug("Overlap slope did not change sign around %g", lam_star)
    else:
        try:
            lam_star = optimize.brentq(slope, a, b,
                                       xtol=settings.projection_xtol,
                                       rtol=4 * np.finfo(float).eps,
                                       maxiter=200)
        except RuntimeError as e:
            raise ProjectionError("Nearest bubble search failed: %s" % e)

    residual = ZonalField.from_grid(
        basis, v - bubble_on_sphere(lam_star, params, t))
    distance = sqrt(max(hs_inner(residual, residual), 0.0))
    norm = sqrt(bubble_hs_norm_sq(basis))
    if distance > trust * norm:
        raise ProjectionError(
            "Field is outside the trust region: distance %.3g > %.3g"
            % (distance, trust * norm))
    return Projection(lam_star, distance, residual, slope(lam_star))


def tangent_pairing(residual, lam, params=None):
    """<rho, dU[0,lam]/dlam>_{H^s} in the weak form int rho d(v_lam^p)/dlam."""
    params = residual.params if params is None else params
    basis = residual.basis
    t = basis.t
    p, beta = params.p, params.beta
    D = (1 + lam * lam) - (lam * lam - 1) * t
    vl = bubble_on_sphere(lam, params, t)
    dq = p * beta * vl ** p * (1 / lam - 2 * lam * (1 - t) / D)
    return basis.integrate(residual.grid * dq)


def lambda_symmetry_defect(lam, params):
    """The distance to U[0,1] is the same for lam and 1/lam."""
    d1 = bubble_gram_and_distance(lam, np.zeros(params.N), params)
    d2 = bubble_gram_and_distance(1.0 / lam, np.zeros(params.N), params)
    return abs(d1.hs_distance - d2.hs_distance)