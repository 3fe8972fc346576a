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
"""Scenario configuration: a flat text file of section.key=value lines.

Blank lines and lines starting with '#' are ignored. A key left out keeps
its default; None defers to fastdiff.settings.
"""

from collections import OrderedDict

from fastdiff.log import logging
from fastdiff.params import BOUNDED_DOMAIN, WHOLE_SPACE, make_params
from fastdiff.util import ConfigError, ParameterError

logger = logging.getLogger("fastdiff.config")

SPECTRUM = 'Spectrum'
EVOLVE = 'Evolve'
EVOLVE_LINEAR = 'EvolveLinear'
PROJECT = 'Project'
DOMAIN_SPECTRUM = 'DomainSpectrum'
DOMAIN_EVOLVE = 'DomainEvolve'
GHP = 'GHP'
FIT = 'Fit'
REPORT = 'Report'
SCENARIOS = (SPECTRUM, EVOLVE, EVOLVE_LINEAR, PROJECT, DOMAIN_SPECTRUM,
             DOMAIN_EVOLVE, GHP, FIT, REPORT)


def parse_bool(text):
    lowered = text.lower()
    if lowered in ('true', 'yes', 'on', '1'):
        return True
    if lowered in ('false', 'no', 'off', '0'):
        return False
    raise ValueError("not a boolean: %r" % text)


def parse_int(text):
    return int(text, 0)


def parse_str(text):
    return text


# section -> key -> (converter, default)
SCHEMA = OrderedDict([
    ('run', OrderedDict([
        ('scenario', (parse_str, None)),
    ])),
    ('params', OrderedDict([
        ('N', (parse_int, 3)),
        ('s', (float, 0.5)),
        ('p', (float, None)),
        ('regime', (parse_str, None)),
    ])),
    ('sphere', OrderedDict([
        ('L', (parse_int, None)),
        ('n', (parse_int, None)),
        ('lmax', (parse_int, 8)),
    ])),
    ('flow', OrderedDict([
        ('dt', (float, None)),
        ('tau_end', (float, None)),
        ('stepper', (parse_str, None)),
        ('positivity_floor', (float, None)),
        ('stability_factor', (float, None)),
        ('calibrate', (parse_bool, None)),
        ('abort_degenerate', (parse_bool, None)),
    ])),
    ('domain', OrderedDict([
        ('kind', (parse_str, 'SFL')),
        ('M', (parse_int, None)),
        ('K', (parse_int, None)),
        ('length', (float, 1.0)),
        ('dt', (float, None)),
        ('tau_end', (float, None)),
        ('stepper', (parse_str, None)),
        ('calibrate', (parse_bool, None)),
        ('eigen_count', (parse_int, 8)),
        ('green_stride', (parse_int, 8)),
    ])),
    ('initial', OrderedDict([
        ('kind', (parse_str, 'perturbed')),
        ('eps', (float, 0.0)),
        ('mode', (parse_int, 2)),
        ('lam', (float, 1.0)),
        ('seed', (parse_int, 0)),
        ('amplitude', (float, 0.1)),
    ])),
    ('fit', OrderedDict([
        ('input', (parse_str, None)),
        ('column', (parse_str, 'hs_dist')),
        ('tau_lo', (float, None)),
        ('tau_hi', (float, None)),
        ('expected', (float, None)),
        ('tolerance', (float, None)),
    ])),
    ('harnack', OrderedDict([
        ('T_star', (float, 1.0)),
        ('t_lo', (float, 0.8)),
        ('t_lo_shifted', (float, 0.9)),
    ])),
    ('report', OrderedDict([
        ('inputs', (parse_str, '')),
    ])),
    ('output', OrderedDict([
        ('directory', (parse_str, 'fastdiff_out')),
        ('cadence', (parse_int, None)),
        ('formats', (parse_str, 'csv,json,tsv')),
        ('wall_time', (parse_bool, False)),
    ])),
])

FORMATS = ('csv', 'json', 'tsv')


class Section(object):

    def __init__(self, name, values):
        self._name = name
        self._values = values

    def __getattr__(self, key):
        try:
            return self.__dict__['_values'][key]
        except KeyError:
            raise AttributeError("No key %r in section %r"
                                 % (key, self.__dict__['_name']))

    def asdict(self):
        return OrderedDict(self._values)


class ScenarioConfig(object):
    """Typed values of every section; unset keys hold their defaults."""

    def __init__(self, values=None, source=None):
        self.source = source
        self._values = OrderedDict()
        for section, keys in SCHEMA.items():
            self._values[section] = OrderedDict(
                (key, default) for key, (_, default) in keys.items())
        for dotted, value in (values or {}).items():
            self.set(dotted, value)

    def __getattr__(self, section):
        values = self.__dict__.get('_values', {})
        if section in values:
            return Section(section, values[section])
        raise AttributeError(section)

    def set(self, dotted, value):
        section, key = split_key(dotted)
        self._values[section][key] = value

    def get(self, dotted):
        section, key = split_key(dotted)
        return self._values[section][key]

    @property
    def scenario(self):
        return self._values['run']['scenario']

    @property
    def formats(self):
        return tuple(f.strip() for f in self.output.formats.split(',')
                     if f.strip())

    def params(self):
        """ProblemParams of the scenario; whole space unless p is given or
        the regime says otherwise.
        """
        regime = self.params_block('regime')
        if regime is None:
            if self.scenario in (DOMAIN_SPECTRUM, DOMAIN_EVOLVE, GHP):
                regime = BOUNDED_DOMAIN
            else:
                regime = WHOLE_SPACE
        return make_params(self.params_block('N'), self.params_block('s'),
                           regime, self.params_block('p'))

    def params_block(self, key):
        return self._values['params'][key]

    def validate(self):
        """Checks shared by every scenario; raises ParameterError."""
        if self.scenario not in SCENARIOS:
            raise ParameterError("Unknown scenario %r, expected one of %s"
                                 % (self.scenario, ', '.join(SCENARIOS)))
        unknown = [f for f in self.formats if f not in FORMATS]
        if unknown:
            raise ParameterError("Unknown output formats: %s"
                                 % ', '.join(unknown))
        cadence = self.output.cadence
        if cadence is not None and cadence < 1:
            raise ParameterError("output.cadence must be positive")
        if self.scenario not in (FIT, REPORT):
            self.params()
        if self.scenario == FIT and not self.fit.input:
            raise ParameterError("Fit scenario needs fit.input")
        seed = self.initial.seed
        if not 0 <= seed < 2 ** 64:
            raise ParameterError("Seed must be an unsigned 64-bit integer")

    def asdict(self):
        return OrderedDict((section, OrderedDict(values))
                           for section, values in self._values.items())


def split_key(dotted):
    if dotted.count('.') != 1:
        raise ConfigError("Key %r is not of the form section.key" % dotted)
    section, key = dotted.split('.')
    if section not in SCHEMA:
        raise ConfigError("Unknown section %r, expected one of %s"
                          % (section, ', '.join(SCHEMA)))
    if key not in SCHEMA[section]:
        raise ConfigError("Unknown key %r in section %r, expected one of %s"
                          % (key, section, ', '.join(SCHEMA[section])))
    return section, key


def parse_lines(lines, source='<string>'):
    config = ScenarioConfig(source=source)
    for lineno, raw in enumerate(lines, 1):
        line = raw.strip()
        if not line or line.startswith('#'):
            continue
        if '=' not in line:
            raise ConfigError("%s:%d: expected section.key=value, got %r"
                              % (source, lineno, line))
        dotted, text = [part.strip() for part in line.split('=', 1)]
        try:
            section, key = split_key(dotted)
        except ConfigError as e:
            raise ConfigError("%s:%d: %s" % (source, lineno, e.message))
        convert = SCHEMA[section][key][0]
        try:
            value = convert(text)
        except ValueError:
            raise ConfigError("%s:%d: bad value %r for %s"
                              % (source, lineno, text, dotted))
        config.set(dotted, value)
    logger.debug("Parsed config from %s", source)
    return config


def parse_text(text, source='<string>'):
    return parse_lines(text.splitlines(), source)


def load_config(path):
    try:
        with open(path, 'r') as f:
            return parse_lines(f.readlines(), path)
    except (IOError, OSError) as e:
        raise ConfigError("Cannot read config '%s': %s" % (path, e))
