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

import csv
import json
import os
from collections import OrderedDict
from math import isinf, isnan

import numpy as np

from fastdiff.log import logging
from fastdiff.util import PersistenceError

logger = logging.getLogger("fastdiff.persistence")

SPHERE_COLUMNS = ('tau', 'J_gap', 'hs_dist', 'lambda_star', 'relerr_sup',
                  'residual_weighted', 'dissipation_residual', 'sigma_0',
                  'sigma_2', 'sigma_3', 'sigma_4')
DOMAIN_COLUMNS = ('tau', 'H_norm', 'relerr_sup', 'J_gap')
VERDICT_COLUMNS = ('check-name', 'expected', 'observed', 'tolerance', 'pass')

FLOAT_FORMAT = '%.17g'

NAN = 'NaN'
POS_INF = 'Infinity'
NEG_INF = '-Infinity'


def is_writable(directory):
    """Return true if the directory is writable by the current user
    """
    marker = os.path.join(directory, ".fastdiff_write_test")
    try:
        open(marker, 'w').close()
    except (IOError, OSError):
        return False
    else:
        os.remove(marker)
        return True


def check_directory_appropriate(directory):

    if not os.path.exists(directory):
        raise PersistenceError("'%s' does not exist" % directory)

    if not os.path.isdir(directory):
        raise PersistenceError("'%s' is not a directory" % directory)

    if not is_writable(directory):
        raise PersistenceError("'%s' is not writable" % directory)


def format_float(x):
    x = float(x)
    if isnan(x):
        return NAN
    if isinf(x):
        return POS_INF if x > 0 else NEG_INF
    return FLOAT_FORMAT % x


_SENTINELS = {NAN: float('nan'), POS_INF: float('inf'),
              NEG_INF: float('-inf')}


def parse_float(text):
    if text in _SENTINELS:
        return _SENTINELS[text]
    return float(text)


def sanitize(obj):
    """Plain JSON types only; non-finite floats become string sentinels."""
    if hasattr(obj, 'asdict'):
        return sanitize(obj.asdict())
    if isinstance(obj, dict):
        return OrderedDict((str(k), sanitize(v)) for k, v in obj.items())
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [sanitize(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if isnan(x) or isinf(x):
            return format_float(x)
        return x
    return obj


class SummaryEncoder(json.JSONEncoder):

    def iterencode(self, o, _one_shot=False):
        return json.JSONEncoder.iterencode(self, sanitize(o), _one_shot)

    def default(self, obj):
        return repr(obj)


def record_row(record, columns):
    row = []
    for name in columns:
        if name.startswith('sigma_'):
            row.append(record.sigma[int(name[len('sigma_'):])])
        else:
            row.append(getattr(record, name))
    return row


class RunPersister(object):
    """Writes the artifacts of one run into a single directory."""

    def __init__(self, directory, create=True):
        if create and not os.path.exists(directory):
            try:
                os.makedirs(directory)
            except OSError as e:
                raise PersistenceError("Cannot create '%s': %s"
                                       % (directory, e))
        check_directory_appropriate(directory)
        self.directory = directory

    def filepath(self, name):
        return os.path.join(self.directory, name)

    def _open(self, name):
        try:
            return open(self.filepath(name), 'w', newline='')
        except (IOError, OSError) as e:
            raise PersistenceError("Cannot write '%s': %s"
                                   % (self.filepath(name), e))

    def save_table(self, columns, rows, name='trajectory.csv'):
        if not len(rows):
            raise PersistenceError("Refusing to write an empty trajectory")
        with self._open(name) as f:
            writer = csv.writer(f, lineterminator='\n')
            writer.writerow(columns)
            for row in rows:
                writer.writerow([format_float(v) for v in row])
        logger.debug("Wrote %d rows to %s", len(rows), self.filepath(name))
        return self.filepath(name)

    def save_trajectory(self, records, columns, name='trajectory.csv'):
        return self.save_table(columns,
                               [record_row(r, columns) for r in records],
                               name)

    def save_summary(self, summary, name='summary.json'):
        with self._open(name) as f:
            json.dump(summary, f, indent=4, cls=SummaryEncoder,
                      allow_nan=False)
            f.write('\n')
        return self.filepath(name)

    def save_verdicts(self, verdicts, name='verdicts.tsv'):
        with self._open(name) as f:
            writer = csv.writer(f, delimiter='\t', lineterminator='\n')
            writer.writerow(VERDICT_COLUMNS)
            for v in verdicts:
                writer.writerow([v.name, format_float(v.expected),
                                 format_float(v.observed),
                                 format_float(v.tolerance),
                                 'true' if v.passed else 'false'])
        return self.filepath(name)


def load_trajectory(path):
    """Header and float columns of a trajectory CSV."""
    try:
        with open(path, 'r', newline='') as f:
            rows = list(csv.reader(f))
    except (IOError, OSError) as e:
        raise PersistenceError("Cannot read '%s': %s" % (path, e))
    if not rows:
        raise PersistenceError("'%s' is empty" % path)
    header = tuple(rows[0])
    try:
        data = [[parse_float(v) for v in row] for row in rows[1:] if row]
    except ValueError as e:
        raise PersistenceError("Malformed number in '%s': %s" % (path, e))
    columns = OrderedDict()
    for i, name in enumerate(header):
        columns[name] = np.array([row[i] for row in data])
    return header, columns


def load_summary(path):
    try:
        with open(path, 'r') as f:
            return json.load(f, object_pairs_hook=OrderedDict)
    except (IOError, OSError) as e:
        raise PersistenceError("Cannot read '%s': %s" % (path, e))
    except ValueError as e:
        raise PersistenceError("Malformed summary '%s': %s" % (path, e))
