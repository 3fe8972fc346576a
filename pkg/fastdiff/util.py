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

from functools import wraps
from math import isfinite

from fastdiff.log import logging

logger = logging.getLogger("fastdiff.util")


SMALL = 1e-10

# Knuth's MMIX multiplier and increment
LCG_MULTIPLIER = 6364136223846793005
LCG_INCREMENT = 1442695040888963407
_MASK64 = (1 << 64) - 1


class FastdiffException(Exception):
    """Error caused by misuse of the extinction laboratory.
    """
    exit_code = 1

    def __init__(self, message=''):
        Exception.__init__(self, message)
        self.message = message

    def __str__(self):
        lines = []
        for msg_line in self.message.split('\n'):
            lines.append('* ' + msg_line)
        width = max(len(l) for l in lines)
        lines.insert(0, '\n\n' + '*' * width)
        lines.append('*' * width)
        return '\n'.join(lines)


class ConfigError(FastdiffException):
    exit_code = 2


class ParameterError(FastdiffException):
    exit_code = 3


class SolverError(FastdiffException):
    exit_code = 4


class ProjectionError(SolverError):
    pass


class StepSizeError(SolverError):
    pass


class DegenerateRunError(SolverError):
    pass


class PersistenceError(FastdiffException):
    exit_code = 4


def require(condition, message, exc=ParameterError):
    if not condition:
        raise exc(message)


def isnum(o):
    return isinstance(o, (int, float)) and not isinstance(o, bool)


def allfinite(values):
    return all(isfinite(v) for v in values)


class Lcg64(object):
    """64-bit linear congruential generator.

    x_{n+1} = (6364136223846793005 x_n + 1442695040888963407) mod 2^64;
    uniform() returns the top 53 bits scaled into [0, 1).
    """

    def __init__(self, seed=0):
        self.state = int(seed) & _MASK64

    def next_u64(self):
        self.state = (LCG_MULTIPLIER * self.state + LCG_INCREMENT) & _MASK64
        return self.state

    def uniform(self, lo=0.0, hi=1.0):
        u = (self.next_u64() >> 11) * (1.0 / (1 << 53))
        return lo + (hi - lo) * u


DEBUG = False


def command(f):
    """A decorator to wrap a scenario function.

    Calls to the decorated function are wrapped by call_command.
    """
    @wraps(f)
    def wrapper(*args, **kwds):
        return call_command(f, args, kwds)

    return wrapper


def call_command(f, args, kwds):

    if DEBUG:
        return f(*args, **kwds)
    try:
        return f(*args, **kwds)
    except FastdiffException as e:
        logger.error("%s failed: %s", f.__name__, e.message)
        # re-raise a fresh one to shorten the stack trace for the user
        raise e.__class__(e.message)
