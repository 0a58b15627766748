"""JSON report documents, their schema and writers"""
import json
import math

from dataclasses import asdict
from typing import Any, Dict, List

from jsonschema import Draft7Validator

from drift_trust.exceptions import DataException

REPORT_VERSION = 1

_NUMBER = {'type': 'number'}
_NULLABLE_NUMBER = {'type': ['number', 'null']}
_UNIT = {'type': 'number', 'minimum': 0, 'maximum': 1}

REPORT_SCHEMA = {
    '$schema': 'http://json-schema.org/draft-07/schema#',
    'type': 'object',
    'required': ['version', 'config', 'summary', 'preprocessing', 'batches'],
    'properties': {
        'version': {'const': REPORT_VERSION},
        'config': {'type': 'object'},
        'summary': {'type': 'object'},
        'preprocessing': {'type': 'object'},
        'batches': {
            'type': 'array',
            'minItems': 1,
            'items': {
                'type': 'object',
                'required': ['batch_index', 'trust', 'flagged', 'flag_reasons', 'drift_injected', 'components',
                             'weights', 'signals'],
                'properties': {
                    'batch_index': {'type': 'integer', 'minimum': 1},
                    'trust': _UNIT,
                    'flagged': {'type': 'boolean'},
                    'flag_reasons': {'type': 'array', 'items': {'enum': ['trust', 'reconstruction']}},
                    'drift_injected': {'type': 'boolean'},
                    'components': {
                        'type': 'object',
                        'required': ['drift', 'uncertainty', 'rules', 'error'],
                        'properties': {'drift': _UNIT, 'uncertainty': _UNIT, 'rules': _UNIT, 'error': _UNIT,
                                       'drift_terms': {'type': 'object'}},
                    },
                    'weights': {
                        'type': 'object',
                        'required': ['alpha', 'beta', 'gamma', 'delta'],
                        'properties': {'alpha': _UNIT, 'beta': _UNIT, 'gamma': _UNIT, 'delta': _UNIT},
                    },
                    'signals': {
                        'type': 'object',
                        'required': ['batch_index', 'psi', 'jsd', 'ae_error', 'ae_delta', 'ae_z', 'tae_error',
                                     'tae_delta', 'tae_z', 'uncertainty', 'rule_rate', 'accuracy', 'error'],
                        'properties': {
                            'batch_index': {'type': 'integer'},
                            'psi': {'type': 'number', 'minimum': 0},
                            'jsd': _UNIT,
                            'ae_error': _NUMBER,
                            'ae_delta': _NUMBER,
                            'ae_z': _NULLABLE_NUMBER,
                            'tae_error': _NUMBER,
                            'tae_delta': _NUMBER,
                            'tae_z': _NULLABLE_NUMBER,
                            'uncertainty': _UNIT,
                            'rule_rate': _UNIT,
                            'accuracy': _UNIT,
                            'error': _UNIT,
                            'rows': {'type': 'integer'},
                            'feature_drift': {'type': 'object'},
                            'rule_counts': {'type': 'object'},
                        },
                    },
                },
            },
        },
    },
}

BENCHMARK_SCHEMA = {
    '$schema': 'http://json-schema.org/draft-07/schema#',
    'type': 'object',
    'required': ['version', 'seeds', 'detectors'],
    'properties': {
        'version': {'const': REPORT_VERSION},
        'seeds': {'type': 'array', 'items': {'type': 'integer'}},
        'detectors': {
            'type': 'array',
            'items': {
                'type': 'object',
                'required': ['detector', 'accuracy', 'latency_batches', 'f1'],
                'properties': {'detector': {'type': 'string'}, 'accuracy': _UNIT,
                               'latency_batches': _NULLABLE_NUMBER, 'f1': _UNIT},
            },
        },
    },
}


def finite_or_null(value: Any) -> Any:
    """Replace every non-finite float by None, recursively"""
    if isinstance(value, float):
        return value if math.isfinite(value) else None
    if isinstance(value, dict):
        return {str(k): finite_or_null(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [finite_or_null(v) for v in value]
    return value


def report_document(result, config) -> Dict:
    """Report JSON document of a monitoring result; the output directory is left out of the config"""
    settings = asdict(config)
    settings.pop('output_dir', None)
    return finite_or_null({
        'version': REPORT_VERSION,
        'config': settings,
        'summary': result.summary,
        'preprocessing': result.preprocessing,
        'batches': [report.to_dict() for report in result.reports],
    })


def benchmark_document(table) -> Dict:
    """Benchmark JSON document of a benchmark table"""
    trials = {detector: [{'seed': seed, 'flags': list(r.flags), 'accuracy': r.accuracy, 'latency_batches': r.latency,
                          'f1': r.f1} for seed, r in zip(table.seeds, results)]
              for detector, results in table.trials.items()}
    return finite_or_null({'version': REPORT_VERSION, 'seeds': table.seeds, 'detectors': table.rows,
                           'trials': trials})


def validate_report(document: Dict) -> List[str]:
    """Schema errors of a report document, empty when valid"""
    return [f"{'/'.join(str(p) for p in error.absolute_path) or 'report'}: {error.message}"
            for error in Draft7Validator(REPORT_SCHEMA).iter_errors(document)]


def _write(document: Dict, path: str) -> str:
    with open(path, 'w', encoding='utf-8', newline='\n') as f:
        json.dump(document, f, indent=2, allow_nan=False)
        f.write('\n')
    return path


def write_trust_report(document: Dict, path: str) -> str:
    """Write a report document"""
    return _write(document, path)


def write_benchmark(document: Dict, path: str) -> str:
    """Write a benchmark document"""
    return _write(document, path)


def write_document(document: Dict, path: str) -> str:
    """Write any JSON-compatible document (sidecars, preprocessing reports)"""
    return _write(finite_or_null(document), path)


def read_report(path: str) -> Dict:
    """Read and validate a report document"""
    try:
        with open(path, encoding='utf-8') as f:
            document = json.load(f)
    except OSError as exc:
        raise DataException(f'Cannot read report {path}: {exc}') from exc
    except json.JSONDecodeError as exc:
        raise DataException(f'{path}:{exc.lineno}: invalid JSON: {exc.msg}') from exc
    errors = validate_report(document)
    if errors:
        raise DataException(f'{path} is not a valid trust report:\n  ' + '\n  '.join(errors))
    return document
