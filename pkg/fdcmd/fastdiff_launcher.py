#!/usr/bin/env python

import argparse
import sys

from fastdiff import config as cfg
from fastdiff import runner, util
from fastdiff.util import FastdiffException


def build_parser():
    parser = argparse.ArgumentParser(
        prog='fastdiff',
        description='fastdiff: a numerical laboratory for extinction in '
                    'fractional fast diffusion')
    parser.add_argument('--debug', dest='debug', action='store_true',
                        help='let library exceptions propagate with their '
                             'full stack trace')
    subparsers = parser.add_subparsers(dest='command', metavar='SCENARIO')
    subparsers.required = True

    for scenario in cfg.SCENARIOS:
        sub = subparsers.add_parser(scenario, help='run the %s scenario'
                                    % scenario)
        add_common_arguments(sub)

    batch = subparsers.add_parser(
        'batch', help='run several config files in parallel, each into its '
                      'own output sub-directory')
    batch.add_argument('configs', nargs='+', metavar='CONFIG',
                       help='config files; each must set run.scenario')
    batch.add_argument('--out', dest='out', default='fastdiff_out',
                       help='parent output directory')
    batch.add_argument('--seed', dest='seed', type=parse_seed, default=None,
                       help='override initial.seed in every config')
    batch.add_argument('--quiet', dest='quiet', action='store_true',
                       help='no summaries on stdout')
    return parser


def add_common_arguments(sub):
    sub.add_argument('--config', dest='config', default=None, metavar='PATH',
                     help='flat section.key=value config file')
    sub.add_argument('--out', dest='out', default=None, metavar='DIR',
                     help='output directory (default output.directory)')
    sub.add_argument('--seed', dest='seed', type=parse_seed, default=None,
                     metavar='U64', help='seed of the initial data generator')
    sub.add_argument('--quiet', dest='quiet', action='store_true',
                     help='no summaries on stdout')


def parse_seed(text):
    try:
        seed = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError("seed must be an integer")
    if not 0 <= seed < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must fit in 64 unsigned bits")
    return seed


def load(path, scenario=None, seed=None):
    config = cfg.load_config(path) if path else cfg.ScenarioConfig()
    if scenario is not None:
        config.set('run.scenario', scenario)
    if seed is not None:
        config.set('initial.seed', seed)
    return config


def main(argv=None):
    args = build_parser().parse_args(argv)
    util.DEBUG = args.debug
    try:
        if args.command == 'batch':
            configs = [load(path, seed=args.seed) for path in args.configs]
            statuses = runner.run_batch(configs, args.out, args.quiet)
            return max(statuses)
        config = load(args.config, args.command, args.seed)
    except FastdiffException as e:
        if not args.quiet:
            print(str(e))
        return e.exit_code
    return runner.run(config, args.out, args.quiet)


if __name__ == '__main__':
    sys.exit(main())
