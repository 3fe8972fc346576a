'''
Initial data for sphere and bounded domain runs.

All randomness goes through fastdiff.util.Lcg64 so a seed fixes the datum
bit for bit.
'''

import numpy as np

from fastdiff.log import logging
from fastdiff.sphere.bubble import bubble_on_sphere
from fastdiff.sphere.spectral import ZonalField
from fastdiff.util import Lcg64, ParameterError

logger = logging.getLogger("fastdiff.initial")

BUBBLE = 'bubble'
PERTURBED = 'perturbed'
RANDOM = 'random'
KINDS = (BUBBLE, PERTURBED, RANDOM)

# decay exponent of random zonal coefficients
RANDOM_DECAY = 4


def bubble_datum(basis, lam=1.0):
    return ZonalField.from_grid(basis, bubble_on_sphere(lam, basis.params,
                                                        basis.t))


def perturbed_bubble(basis, eps, l, lam=1.0):
    """v_lam (1 + eps e_l) with e_l the unit H^s zonal mode of degree l."""
    v = bubble_on_sphere(lam, basis.params, basis.t)
    mode = basis.mode(l).grid
    grid = v * (1 + eps * mode)
    if np.any(grid <= 0):
        raise ParameterError("eps=%r makes the perturbed bubble nonpositive"
                             % (eps,))
    return ZonalField.from_grid(basis, grid)


def random_zonal(basis, seed, amplitude=0.1):
    """v* (1 + r) with r a random zonal field, c_l ~ U(-1, 1) (l+1)^-4 for
    l >= 1, rescaled so that sup |r| = amplitude.
    """
    if not 0 < amplitude < 1:
        raise ParameterError("Random amplitude must lie in (0, 1)")
    rng = Lcg64(seed)
    coeffs = np.zeros(basis.L + 1)
    for l in range(1, basis.L + 1):
        coeffs[l] = rng.uniform(-1.0, 1.0) * (l + 1.0) ** -RANDOM_DECAY
    r = basis.synth(coeffs)
    peak = np.max(np.abs(r))
    if peak == 0:
        raise ParameterError("Random perturbation vanished")
    r *= amplitude / peak
    vstar = bubble_on_sphere(1.0, basis.params, basis.t)
    logger.debug("Random zonal datum seed=%d amplitude=%g", seed, amplitude)
    return ZonalField.from_grid(basis, vstar * (1 + r))


def sphere_datum(basis, kind, eps=0.0, l=2, lam=1.0, seed=0, amplitude=0.1):
    if kind == BUBBLE:
        return bubble_datum(basis, lam)
    if kind == PERTURBED:
        return perturbed_bubble(basis, eps, l, lam)
    if kind == RANDOM:
        return random_zonal(basis, seed, amplitude)
    raise ParameterError("Unknown initial data kind %r, expected one of %s"
                         % (kind, ', '.join(KINDS)))


def perturbed_state(phi, direction, eps):
    """phi (1 + eps e) on a bounded domain grid."""
    grid = np.asarray(phi, dtype=float) * (1 + eps * np.asarray(direction))
    if np.any(grid <= 0):
        raise ParameterError("Perturbed state is not positive")
    return grid
