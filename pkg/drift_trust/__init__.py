#!/usr/bin/env python3

import argparse
import logging
import os
import sys

from typing import Dict, List, Optional

from singer import get_logger

from drift_trust import plots
from drift_trust.config import build_run_config, load_config, merge_config, RunConfig
from drift_trust.evaluation import compare_detectors
from drift_trust.exceptions import ConfigException, DataException, InvalidConfigException
from drift_trust.file_format import ReportFormat, get_formatter
from drift_trust.file_formats import csv
from drift_trust.file_formats import json as json_format
from drift_trust.monitoring import run_monitoring
from drift_trust.synthgen import AIRLINE_SCHEMA, generate_dataset, sidecar_metadata

LOGGER = get_logger('drift_trust')

# Tone down matplotlib log noise by only outputting warnings and higher level messages
logging.getLogger('matplotlib').setLevel(logging.WARNING)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_INTERNAL = 3

DATASET_FILE = 'flights.csv'
SIDECAR_FILE = 'flights.meta.json'
REPORT_BASENAME = 'trust_report'
BENCHMARK_BASENAME = 'benchmark'
PREPROCESSING_REPORT_FILE = 'preprocessing_report.json'


class UsageArgumentParser(argparse.ArgumentParser):
    """ArgumentParser exiting with the usage exit code on bad arguments"""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f'{self.prog}: error: {message}\n')


def parse_weights(value: str) -> List[float]:
    """'a,b,c,d' to four floats"""
    try:
        weights = [float(part) for part in value.split(',')]
    except ValueError as exc:
        raise InvalidConfigException(f"--weights expects four comma separated numbers, got '{value}'") from exc
    if len(weights) != 4:
        raise InvalidConfigException(f"--weights expects four comma separated numbers, got '{value}'")
    return weights


def parse_batches(value: str) -> List[int]:
    """'6-10' or '6,7,8' to a list of batch indices"""
    try:
        if '-' in value:
            first, last = (int(part) for part in value.split('-', 1))
            return list(range(first, last + 1))
        return [int(part) for part in value.split(',')]
    except ValueError as exc:
        raise InvalidConfigException(f"--drift-batches expects 'first-last' or a comma separated list, "
                                     f"got '{value}'") from exc


def cli_overrides(args: argparse.Namespace) -> Dict:
    """Config keys set on the command line"""
    overrides = {}
    for key in ('rows', 'seed', 'k', 'trials', 'input', 'out'):
        if getattr(args, key, None) is not None:
            overrides[key] = getattr(args, key)

    drift = {}
    if getattr(args, 'drift', None) is not None:
        drift['mode'] = args.drift
    if getattr(args, 'drift_batches', None) is not None:
        drift['batches'] = parse_batches(args.drift_batches)
    if getattr(args, 'drift_feature', None) is not None:
        drift['feature'] = args.drift_feature
    if getattr(args, 'magnitude', None) is not None:
        drift['magnitude'] = args.magnitude
    if drift:
        overrides['drift'] = drift

    if getattr(args, 'weights', None) is not None:
        overrides['weights'] = parse_weights(args.weights)
    if getattr(args, 'trust_threshold', None) is not None:
        overrides['thresholds'] = {'trust': args.trust_threshold}
    if getattr(args, 'drift_source', None) is not None:
        overrides['drift_source'] = args.drift_source
    if getattr(args, 'detectors', None) is not None:
        overrides['detectors'] = [name.strip() for name in args.detectors.split(',') if name.strip()]
    return overrides


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """Defaults, then the config file, then command line flags"""
    file_config = load_config(args.config) if args.config else {}
    return build_run_config(merge_config(file_config, cli_overrides(args)))


def _output_dir(config: RunConfig, default: str = '.') -> str:
    out = config.output_dir or default
    os.makedirs(out, exist_ok=True)
    return out


def cmd_generate(config: RunConfig) -> List[str]:
    """Write the generated dataset CSV and its JSON sidecar"""
    generator = config.generator_config()
    dataset = generate_dataset(generator)
    out = _output_dir(config)
    paths = [
        csv.write_dataset(dataset, os.path.join(out, DATASET_FILE)),
        json_format.write_document(sidecar_metadata(generator, dataset), os.path.join(out, SIDECAR_FILE)),
    ]
    LOGGER.info('Generated dataset written: %s', paths)
    return paths


def cmd_run(config: RunConfig) -> List[str]:
    """Run monitoring and write the reports, the preprocessing report, the plots and the checkpoints"""
    dataset = csv.read_dataset(config.input_path, AIRLINE_SCHEMA) if config.input_path else None
    out = _output_dir(config)
    result = run_monitoring(config, dataset=dataset, output_dir=out)

    document = json_format.report_document(result, config)
    errors = json_format.validate_report(document)
    if errors:
        raise DataException('Report does not match its schema:\n  ' + '\n  '.join(errors))

    paths = [get_formatter(report_format).write_trust_report(document, os.path.join(out, f'{REPORT_BASENAME}.'
                                                                                          f'{report_format.value}'))
             for report_format in ReportFormat]
    paths.append(json_format.write_document(result.preprocessing, os.path.join(out, PREPROCESSING_REPORT_FILE)))
    paths.extend(plots.render_all(document, out))
    flagged = [r.batch_index for r in result.reports if r.flagged]
    LOGGER.info('Monitoring finished, flagged batches: %s', flagged)
    return paths


def cmd_bench(config: RunConfig) -> List[str]:
    """Benchmark every selected detector over config.trials seeds"""
    table = compare_detectors(config)
    document = json_format.benchmark_document(table)
    out = _output_dir(config)
    paths = [get_formatter(report_format).write_benchmark(document, os.path.join(out, f'{BENCHMARK_BASENAME}.'
                                                                                      f'{report_format.value}'))
             for report_format in ReportFormat]
    for row in table.rows:
        LOGGER.info('%s: accuracy %.4f, latency %s, F1 %.4f',
                    row['detector'], row['accuracy'], row['latency_batches'], row['f1'])
    return paths


def cmd_plot(report_path: str, out: Optional[str]) -> List[str]:
    """Regenerate the plots of a report JSON"""
    document = json_format.read_report(report_path)
    return plots.render_all(document, out or os.path.dirname(report_path) or '.')


def _add_common_flags(parser: argparse.ArgumentParser):
    parser.add_argument('-c', '--config', help='Config file')
    parser.add_argument('--seed', type=int, help='Master seed')
    parser.add_argument('--out', help='Output directory')
    parser.add_argument('--rows', type=int, help='Generated record count')


def _add_run_flags(parser: argparse.ArgumentParser):
    parser.add_argument('--k', type=int, help='Number of batches')
    parser.add_argument('--drift', choices=['none', 'permutation', 'shift'], help='Drift injection mode')
    parser.add_argument('--drift-batches', help="Drifted batches, 'first-last' or comma separated")
    parser.add_argument('--drift-feature', help='Feature to inject drift into')
    parser.add_argument('--magnitude', type=float, help='Shift magnitude in standard deviations')
    parser.add_argument('--weights', help='Trust weights alpha,beta,gamma,delta')
    parser.add_argument('--trust-threshold', type=float, help='Flag batches with trust below this value')
    parser.add_argument('--drift-source', choices=['tae', 'ae', 'both'], help='Reconstruction model of the drift component')


def build_parser() -> argparse.ArgumentParser:
    """Argument parser of the drift-trust command"""
    parser = UsageArgumentParser(prog='drift-trust', description='Drift detection and trust scoring of batch streams')
    commands = parser.add_subparsers(dest='command', parser_class=UsageArgumentParser)
    commands.required = True

    generate = commands.add_parser('generate', help='Generate a synthetic airline dataset')
    _add_common_flags(generate)

    run = commands.add_parser('run', help='Monitor a dataset and write trust reports and plots')
    _add_common_flags(run)
    _add_run_flags(run)
    run.add_argument('--input', help='Dataset CSV, generated when not given')

    bench = commands.add_parser('bench', help='Benchmark drift detectors over seeded trials')
    _add_common_flags(bench)
    _add_run_flags(bench)
    bench.add_argument('--trials', type=int, help='Number of seeds')
    bench.add_argument('--detectors', help='Comma separated detector kinds')

    plot = commands.add_parser('plot', help='Regenerate plots from a trust report JSON')
    plot.add_argument('--report', required=True, help='trust_report.json to plot')
    plot.add_argument('--out', help='Output directory, the report directory when not given')
    return parser


def run_cli(argv: List[str] = None) -> int:
    """Run one subcommand and return its exit code"""
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE

    try:
        if args.command == 'plot':
            cmd_plot(args.report, args.out)
        else:
            config = resolve_config(args)
            {'generate': cmd_generate, 'run': cmd_run, 'bench': cmd_bench}[args.command](config)
    except ConfigException as exc:
        LOGGER.error(str(exc))
        print(f'drift-trust: error: {exc}', file=sys.stderr)
        return EXIT_USAGE
    except (DataException, OSError) as exc:
        LOGGER.error(str(exc))
        print(f'drift-trust: error: {exc}', file=sys.stderr)
        return EXIT_DATA
    # pylint: disable=broad-except
    except Exception as exc:
        LOGGER.exception('Internal error')
        print(f'drift-trust: internal error: {exc}', file=sys.stderr)
        return EXIT_INTERNAL

    LOGGER.debug('Exiting normally')
    return EXIT_OK


def main():
    """Main function"""
    sys.exit(run_cli())


if __name__ == '__main__':
    main()
