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
"""Discrete Green's functions and their two sided boundary weighted bound
c Phi(x) Phi(y) <= G(x, y) <= C |x-y|^{2s-N} min(Phi(x)/|x-y|^gamma, 1)
min(Phi(y)/|x-y|^gamma, 1).
"""

import numpy as np

from fastdiff.domain.operator import RFL, SFL
from fastdiff.log import logging
from fastdiff.util import ParameterError, SolverError

logger = logging.getLogger("fastdiff.domain.green")

DEFAULT_STRIDE = 8
RFL_POSITIVITY_TOL = 1e-10


def green_function(op, x_index, y_index):
    """G(x_i, y_j); a single column solve, without forming the matrix."""
    for index in (x_index, y_index):
        if not 0 <= index < op.M:
            raise ParameterError("Node index %r outside 0..%d"
                                 % (index, op.M - 1))
    delta = np.zeros(op.M)
    delta[y_index] = 1.0 / op.h
    return float(op.solve(delta)[x_index])


def _projector(op):
    # grid image of the discrete delta under truncation to K modes
    if op.kind == SFL:
        return op.h * np.dot(op.Psi, op.Psi.T)
    return np.eye(op.M)


def reproducing_defect(op, G=None, columns=None):
    """max |h A G(., y) - projected delta_y| over the chosen columns."""
    G = op.green_matrix() if G is None else G
    P = _projector(op)
    columns = range(op.M) if columns is None else columns
    return max(float(np.max(np.abs(op.h * op.apply(G[:, j]) - P[:, j])))
               for j in columns)


def positivity_tolerance(op, G):
    if op.kind == RFL:
        return RFL_POSITIVITY_TOL * float(np.max(G))
    return op.tail_bound()


def upper_weight(op, X, Y):
    s, N, g = op.params.s, op.params.N, op.gamma
    d = np.abs(X - Y)
    Phi_x, Phi_y = np.interp(X, op.x, op.Phi), np.interp(Y, op.x, op.Phi)
    return (d ** (2 * s - N) * np.minimum(Phi_x / d ** g, 1.0) *
            np.minimum(Phi_y / d ** g, 1.0))


class GreenReport(object):

    def __init__(self, kind, c_lower, C_upper, min_value, tolerance,
                 symmetry_defect, reproducing_defect, tail_bound, samples,
                 kernel_exponent):
        self.kind = kind
        self.c_lower = c_lower
        self.C_upper = C_upper
        self.min_value = min_value
        self.tolerance = tolerance
        self.symmetry_defect = symmetry_defect
        self.reproducing_defect = reproducing_defect
        self.tail_bound = tail_bound
        self.samples = samples
        self.kernel_exponent = kernel_exponent

    @property
    def singular_kernel(self):
        """True when N > 2s, the regime where the bound is stated."""
        return self.kernel_exponent > 0

    @property
    def lower_bound_holds(self):
        return self.c_lower > 0

    def asdict(self):
        return {'kind': self.kind, 'c_lower': self.c_lower,
                'C_upper': self.C_upper, 'min_value': self.min_value,
                'tolerance': self.tolerance,
                'symmetry_defect': self.symmetry_defect,
                'reproducing_defect': self.reproducing_defect,
                'tail_bound': self.tail_bound, 'samples': self.samples,
                'kernel_exponent': self.kernel_exponent,
                'singular_kernel': self.singular_kernel}


def green_bound_check(op, stride=DEFAULT_STRIDE):
    """Fit c and C of the two sided bound over every stride-th node pair,
    pairs within one cell of the diagonal excluded.
    """
    if stride < 1:
        raise ParameterError("Sample stride must be positive")
    G = op.green_matrix()
    tol = positivity_tolerance(op, G)
    min_value = float(np.min(G))
    if min_value < -tol:
        raise SolverError("Green's function is negative: min %.3e below "
                          "tolerance -%.3e" % (min_value, tol))
    idx = np.arange(0, op.M, stride)
    I, J = np.meshgrid(idx, idx, indexing='ij')
    keep = np.abs(op.x[I] - op.x[J]) > op.h * (1 + 1e-9)
    I, J = I[keep], J[keep]
    values = G[I, J]
    X, Y = op.x[I], op.x[J]
    c_lower = float(np.min(values / (op.Phi[I] * op.Phi[J])))
    C_upper = float(np.max(values / upper_weight(op, X, Y)))
    report = GreenReport(
        op.kind, c_lower, C_upper, min_value, tol,
        float(np.max(np.abs(G - G.T))),
        reproducing_defect(op, G, idx), op.tail_bound(), int(len(values)),
        op.params.N - 2 * op.params.s)
    logger.debug("Green bound on %d pairs: c=%.4g C=%.4g", len(values),
                 c_lower, C_upper)
    if not report.singular_kernel:
        logger.debug("N <= 2s: kernel factor |x-y|^(2s-N) is bounded; "
                     "constants reported only")
    return report
