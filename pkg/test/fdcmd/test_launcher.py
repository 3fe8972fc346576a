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

import argparse
import json
import os

import pytest

from fastdiff import util
from fdcmd.fastdiff_launcher import build_parser, load, main, parse_seed
from test.tools import write_config


class TestParseSeed(object):

    def test_decimal_and_hex(self):
        assert parse_seed('42') == 42
        assert parse_seed('0x10') == 16
        assert parse_seed(str(2 ** 64 - 1)) == 2 ** 64 - 1

    def test_invalid(self):
        with pytest.raises(argparse.ArgumentTypeError):
            parse_seed('seed')
        with pytest.raises(argparse.ArgumentTypeError):
            parse_seed('-1')
        with pytest.raises(argparse.ArgumentTypeError):
            parse_seed(str(2 ** 64))


class TestParser(object):

    def test_every_scenario_is_a_subcommand(self):
        args = build_parser().parse_args(['Spectrum', '--quiet'])
        assert args.command == 'Spectrum'
        assert args.quiet
        assert args.config is None

    def test_scenario_required(self):
        with pytest.raises(SystemExit):
            build_parser().parse_args([])

    def test_unknown_scenario(self):
        with pytest.raises(SystemExit):
            build_parser().parse_args(['Simulate'])


class TestLoad(object):

    def test_overrides(self, tmp_path):
        path = write_config(str(tmp_path / 'run.cfg'),
                            ['run.scenario=Evolve', 'initial.seed=3'])
        config = load(path, 'Spectrum', 7)
        assert config.scenario == 'Spectrum'
        assert config.initial.seed == 7

    def test_file_scenario_kept(self, tmp_path):
        path = write_config(str(tmp_path / 'run.cfg'),
                            ['run.scenario=Evolve'])
        config = load(path)
        assert config.scenario == 'Evolve'
        assert config.initial.seed == 0


class TestMain(object):

    def teardown_method(self):
        util.DEBUG = False

    def test_spectrum(self, tmp_path):
        out = str(tmp_path / 'out')
        assert main(['Spectrum', '--out', out, '--quiet']) == 0
        with open(os.path.join(out, 'summary.json')) as f:
            assert json.load(f)['scenario'] == 'Spectrum'

    def test_config_file(self, tmp_path):
        path = write_config(str(tmp_path / 'run.cfg'),
                            ['# closed form only', 'sphere.lmax=3',
                             'output.formats=json'])
        out = str(tmp_path / 'out')
        assert main(['Spectrum', '--config', path, '--out', out,
                     '--quiet']) == 0
        assert os.listdir(out) == ['summary.json']

    def test_bad_config_file(self, tmp_path):
        path = write_config(str(tmp_path / 'run.cfg'), ['sphere.size=3'])
        assert main(['Spectrum', '--config', path, '--quiet']) == 2

    def test_missing_config_file(self, tmp_path):
        path = str(tmp_path / 'absent.cfg')
        assert main(['Spectrum', '--config', path, '--quiet']) == 2

    def test_invalid_parameters(self, tmp_path):
        path = write_config(str(tmp_path / 'run.cfg'), ['params.N=1'])
        assert main(['Spectrum', '--config', path, '--out',
                     str(tmp_path / 'out'), '--quiet']) == 3

    def test_debug_flag(self, tmp_path):
        main(['Spectrum', '--debug', '--out', str(tmp_path / 'out'),
              '--quiet'])
        assert util.DEBUG

    def test_batch(self, tmp_path, monkeypatch):
        monkeypatch.setenv('FASTDIFF_THREADS', '2')
        first = write_config(str(tmp_path / 'a.cfg'),
                             ['run.scenario=Spectrum'])
        second = write_config(str(tmp_path / 'b.cfg'),
                              ['run.scenario=Spectrum', 'params.s=1.5'])
        out = str(tmp_path / 'out')
        assert main(['batch', first, second, '--out', out, '--quiet']) == 3
        assert os.listdir(out) == ['00_Spectrum']

    def test_report_on_missing_run(self, tmp_path):
        path = write_config(str(tmp_path / 'report.cfg'),
                            ['report.inputs=%s' % (tmp_path / 'absent')])
        assert main(['Report', '--config', path, '--out',
                     str(tmp_path / 'out'), '--quiet']) == 4

    def test_report_on_corrupt_summary(self, tmp_path):
        run = tmp_path / 'run'
        run.mkdir()
        (run / 'summary.json').write_text(u'{"scenario": "Spec')
        path = write_config(str(tmp_path / 'report.cfg'),
                            ['report.inputs=%s' % run])
        assert main(['Report', '--config', path, '--out',
                     str(tmp_path / 'out'), '--quiet']) == 4
