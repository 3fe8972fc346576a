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
"""Ground states of A phi = phi^p and the spectrum of their linearisation.
"""

import numpy as np
from scipy import linalg

from fastdiff import settings
from fastdiff.log import logging
from fastdiff.params import BOUNDED_DOMAIN
from fastdiff.util import ParameterError, SolverError

logger = logging.getLogger("fastdiff.domain.stationary")

# |nu| below this marks the state degenerate
DEGENERACY_TOL = 1e-8
RESIDUAL_LIMIT = 1e-9
MIN_DAMPING = 1.0 / 1024


def ray_amplitude(op, params):
    """c with lambda1 c = c^p int Phi^{p+1}, the ground state scale along
    the ray c Phi.
    """
    moment = op.integrate(op.Phi ** (params.p + 1))
    return (op.lambda1 / moment) ** (1.0 / (params.p - 1))


def _residual(op, params, c):
    phi = op.to_grid(c)
    return np.dot(op.stiffness, c) - op.load(phi ** params.p), phi


class DomainSpectrum(object):
    """Generalised eigenpairs (A - p D) e = nu D e, D = h Psi^T phi^{p-1} Psi.

    Columns of vectors are normalised so that e_i^T A e_j = delta_ij.
    """

    def __init__(self, nu, vectors, residuals, p):
        self.nu = nu
        self.mu = nu + p
        self.vectors = vectors
        self.residuals = residuals
        positive = nu[nu > DEGENERACY_TOL]
        self.nu_tilde = float(positive[0]) if len(positive) else float('nan')
        self.tilde_index = int(np.argmax(nu > DEGENERACY_TOL)) \
            if len(positive) else None
        self.degenerate = bool(np.any(np.abs(nu) < DEGENERACY_TOL))
        self.negative_count = int(np.sum(nu < -DEGENERACY_TOL))


def generalized_spectrum(stiffness, D, p, k=None):
    """Solve (stiffness - p D) e = nu D e by Cholesky reduction and eigh."""
    try:
        L = linalg.cholesky(D, lower=True)
    except linalg.LinAlgError:
        raise SolverError("Weight matrix is singular; the state vanishes "
                          "in the interior")
    B = stiffness - p * D
    X = linalg.solve_triangular(L, B, lower=True)
    S = linalg.solve_triangular(L, X.T, lower=True)
    S = 0.5 * (S + S.T)
    count = S.shape[0] if k is None else min(int(k), S.shape[0])
    nu, Y = linalg.eigh(S, subset_by_index=[0, count - 1])
    E = linalg.solve_triangular(L.T, Y, lower=False)
    # D-orthonormal now; rescale to unit energy e^T stiffness e = nu + p
    mu = nu + p
    if np.any(mu <= 0):
        raise SolverError("Energy form is not positive on the eigenvectors")
    E = E / np.sqrt(mu)
    residuals = np.array([
        np.linalg.norm(np.dot(B, E[:, i]) - nu[i] * np.dot(D, E[:, i]))
        for i in range(count)])
    return DomainSpectrum(nu, E, residuals, p)


def linearized_spectrum(phi, op, params, k=None):
    phi = np.asarray(phi, dtype=float)
    if np.any(phi <= 0):
        raise SolverError("Linearisation needs a positive state")
    D = op.weighted_mass(phi ** (params.p - 1))
    spectrum = generalized_spectrum(op.stiffness, D, params.p, k)
    spectrum.grids = np.column_stack([op.to_grid(spectrum.vectors[:, i])
                                      for i in range(len(spectrum.nu))])
    return spectrum


class StationaryState(object):
    """A converged ground state.

    residual is the Galerkin residual of the discrete equation in the
    operator's basis; grid_residual and grid_residual_sup measure
    A phi - phi^p on the nodes, which includes the truncation of phi^p to
    the retained modes.
    """

    def __init__(self, phi, coeffs, residual, spectrum, iterations,
                 grid_residual=None, grid_residual_sup=None):
        self.phi = phi
        self.coeffs = coeffs
        self.residual = residual
        self.grid_residual = grid_residual
        self.grid_residual_sup = grid_residual_sup
        self.spectrum = spectrum
        self.iterations = iterations

    @property
    def nu_tilde(self):
        return self.spectrum.nu_tilde

    @property
    def degenerate_flag(self):
        return self.spectrum.degenerate

    def eigenfunction(self, index):
        return self.spectrum.grids[:, index]

    def asdict(self):
        return {'galerkin_residual': self.residual,
                'grid_residual': self.grid_residual,
                'grid_residual_sup': self.grid_residual_sup,
                'nu_tilde': self.nu_tilde,
                'degenerate': self.degenerate_flag,
                'negative_count': self.spectrum.negative_count,
                'nu': self.spectrum.nu.tolist(),
                'iterations': self.iterations,
                'amplitude': float(np.max(self.phi))}


def stationary_solve(op, params, init=None, k=None):
    """Damped Newton iteration on F(c) = stiffness c - h Psi^T (Psi c)^p.

    The Jacobian stiffness - p D(phi) is the matrix of the linearised
    operator. Steps are halved until the residual drops and phi stays
    positive.
    """
    if params.regime != BOUNDED_DOMAIN:
        raise ParameterError("stationary_solve needs bounded domain params")
    p = params.p
    if init is None:
        init = ray_amplitude(op, params) * op.Phi
    init = np.asarray(init, dtype=float)
    if np.any(init <= 0):
        raise ParameterError("Initial guess must be positive")
    c = op.to_coeffs(init)
    F, phi = _residual(op, params, c)
    res = op.residual_norm(F)
    iteration = 0
    for iteration in range(1, settings.newton_maxiter + 1):
        if res < settings.newton_tol:
            break
        J = op.stiffness - p * op.weighted_mass(phi ** (p - 1))
        delta = linalg.solve(J, -F, assume_a='sym')
        theta = 1.0
        while True:
            trial = c + theta * delta
            F_trial, phi_trial = _residual(op, params, trial)
            res_trial = op.residual_norm(F_trial)
            if np.all(phi_trial > 0) and res_trial < res:
                break
            theta *= 0.5
            if theta < MIN_DAMPING:
                break
        if theta < MIN_DAMPING:
            if res < RESIDUAL_LIMIT:
                # roundoff floor
                break
            raise SolverError("Newton line search stalled at residual %.3e"
                              % res)
        c, F, phi, res = trial, F_trial, phi_trial, res_trial
        logger.debug("Newton iteration %d: residual %.3e, damping %g",
                     iteration, res, theta)
    if res >= RESIDUAL_LIMIT:
        raise SolverError("Newton did not converge: residual %.3e after %d "
                          "iterations" % (res, iteration))
    if np.any(phi <= 0):
        raise SolverError("Stationary state lost positivity")
    spectrum = linearized_spectrum(phi, op, params, k)
    if spectrum.degenerate:
        logger.warning("Stationary state is degenerate: nu near zero")
    grid = op.apply(phi) - phi ** p
    return StationaryState(phi, c, res, spectrum, iteration,
                           op.l2_norm(grid), float(np.max(np.abs(grid))))


def scaled_solution(phi, params, factor):
    """phi rescaled for the operator factor^{2s} A: factor^{2s/(p-1)} phi."""
    return factor ** (2 * params.s / (params.p - 1)) * np.asarray(phi)


def ray_consistency(state, op, params):
    """Ratio of the solved amplitude to the ray estimate."""
    estimate = ray_amplitude(op, params)
    projected = op.integrate(state.phi * op.Phi)
    return projected / estimate
