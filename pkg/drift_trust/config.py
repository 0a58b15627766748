"""Run configuration: defaults, JSON schema validation and the RunConfig object"""
import copy
import json

from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Tuple

from jsonschema import Draft7Validator

from drift_trust.classifier import ClassifierConfig
from drift_trust.evaluation import DetectorKind
from drift_trust.exceptions import InvalidConfigException, UnknownDetectorException
from drift_trust.neural.training import TrainConfig
from drift_trust.seeding import derive_seed
from drift_trust.stat_drift import BinningSpec, BinningStrategy
from drift_trust.synthgen import DriftMode, DriftSpec, GeneratorConfig
from drift_trust.trust import DriftSource, Thresholds, TrustWeights

DEFAULT_PARALLELISM = 0  # 0 is auto: one thread per job, capped by max_parallelism
DEFAULT_MAX_PARALLELISM = 16

DEFAULT_CONFIG = {
    'rows': 20000,
    'seed': 42,
    'k': 10,
    'drift': {'mode': 'permutation', 'feature': 'Price_USD', 'batches': [6, 7, 8, 9, 10], 'magnitude': 2.0},
    'weights': [0.25, 0.25, 0.25, 0.25],
    'thresholds': {'trust': 0.7, 'z': 3.0, 'psi': 0.2, 'jsd': 0.1},
    'drift_source': 'tae',
    'calibration_batches': [1, 2],
    'train_fraction': 0.8,
    'smote_k_neighbors': 5,
    'training': {'epochs': 200, 'batch_size': 64, 'learning_rate': 1e-3, 'momentum': 0.9, 'patience': 20,
                 'validation_fraction': 0.1},
    'classifier': {'rounds': 100, 'learning_rate': 0.1, 'max_depth': 4, 'min_samples_leaf': 5},
    'binning': {'bins': 10, 'strategy': 'quantile', 'epsilon': 1e-6},
    'rules': None,
    'generator': {},
    'detectors': [kind.value for kind in DetectorKind],
    'trials': 5,
    'parallelism': DEFAULT_PARALLELISM,
    'max_parallelism': DEFAULT_MAX_PARALLELISM,
}

_POSITIVE_INT = {'type': 'integer', 'minimum': 1}
_NUMBER = {'type': 'number'}

CONFIG_SCHEMA = {
    '$schema': 'http://json-schema.org/draft-07/schema#',
    'type': 'object',
    'additionalProperties': False,
    'properties': {
        'rows': {'type': 'integer'},
        'seed': {'type': 'integer', 'minimum': 0},
        'k': {'type': 'integer', 'minimum': 2},
        'drift': {
            'type': 'object',
            'additionalProperties': False,
            'properties': {
                'mode': {'enum': DriftMode.list()},
                'feature': {'type': 'string', 'minLength': 1},
                'batches': {'type': 'array', 'items': _POSITIVE_INT},
                'magnitude': _NUMBER,
            },
        },
        'weights': {'type': 'array', 'items': {'type': 'number', 'minimum': 0}, 'minItems': 4, 'maxItems': 4},
        'thresholds': {
            'type': 'object',
            'additionalProperties': False,
            'properties': {'trust': _NUMBER, 'z': _NUMBER, 'psi': _NUMBER, 'jsd': _NUMBER},
        },
        'drift_source': {'enum': DriftSource.list()},
        'calibration_batches': {'type': 'array', 'items': _POSITIVE_INT, 'minItems': 1},
        'train_fraction': {'type': 'number', 'exclusiveMinimum': 0, 'exclusiveMaximum': 1},
        'smote_k_neighbors': _POSITIVE_INT,
        'training': {
            'type': 'object',
            'additionalProperties': False,
            'properties': {
                'epochs': _POSITIVE_INT,
                'batch_size': _POSITIVE_INT,
                'learning_rate': {'type': 'number', 'exclusiveMinimum': 0},
                'momentum': {'type': 'number', 'minimum': 0, 'exclusiveMaximum': 1},
                'patience': _POSITIVE_INT,
                'validation_fraction': {'type': 'number', 'minimum': 0, 'exclusiveMaximum': 1},
            },
        },
        'classifier': {
            'type': 'object',
            'additionalProperties': False,
            'properties': {
                'rounds': {'type': 'integer', 'minimum': 0},
                'learning_rate': {'type': 'number', 'exclusiveMinimum': 0},
                'max_depth': _POSITIVE_INT,
                'min_samples_leaf': _POSITIVE_INT,
            },
        },
        'binning': {
            'type': 'object',
            'additionalProperties': False,
            'properties': {
                'bins': {'type': 'integer', 'minimum': 2},
                'strategy': {'enum': BinningStrategy.list()},
                'epsilon': {'type': 'number', 'exclusiveMinimum': 0},
            },
        },
        'rules': {'type': ['array', 'null'], 'items': {'type': 'object'}},
        'generator': {'type': 'object'},
        'detectors': {'type': 'array', 'items': {'type': 'string'}, 'minItems': 1},
        'trials': _POSITIVE_INT,
        'parallelism': {'type': 'integer', 'minimum': -1},
        'max_parallelism': _POSITIVE_INT,
        'input': {'type': ['string', 'null']},
        'out': {'type': ['string', 'null']},
    },
}


def merge_config(base: Dict, overrides: Dict) -> Dict:
    """Recursive merge; nested dicts merge key by key, everything else is replaced"""
    merged = copy.deepcopy(base)
    for key, value in (overrides or {}).items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = merge_config(merged[key], value)
        else:
            merged[key] = copy.deepcopy(value)
    return merged


def validate_config(config: Dict) -> List[str]:
    """Validate configuration"""
    errors = [f"{'/'.join(str(p) for p in error.absolute_path) or 'config'}: {error.message}"
              for error in sorted(Draft7Validator(CONFIG_SCHEMA).iter_errors(config), key=str)]
    if errors:
        return errors

    if config.get('rows', DEFAULT_CONFIG['rows']) <= 0:
        errors.append('rows must be positive')

    k = config.get('k', DEFAULT_CONFIG['k'])
    drift = merge_config(DEFAULT_CONFIG['drift'], config.get('drift', {}))
    drift_batches = set(drift['batches']) if drift['mode'] != DriftMode.NONE.value else set()
    outside = sorted(i for i in drift_batches if i > k)
    if outside:
        errors.append(f'drift batches {outside} outside 1..{k}')

    calibration = set(config.get('calibration_batches', DEFAULT_CONFIG['calibration_batches']))
    if any(i > k for i in calibration):
        errors.append(f'calibration batches {sorted(calibration)} outside 1..{k}')
    if calibration & drift_batches:
        errors.append(f'calibration batches {sorted(calibration & drift_batches)} are also drift batches')

    weights = config.get('weights', DEFAULT_CONFIG['weights'])
    if sum(weights) <= 0:
        errors.append('weights must have a positive sum')

    if 'generator' in config:
        try:
            GeneratorConfig.from_dict(config['generator'])
        except InvalidConfigException as exc:
            errors.append(f'generator: {exc}')

    return errors


# pylint: disable=too-many-instance-attributes
@dataclass(frozen=True)
class RunConfig:
    """Everything one monitoring run or benchmark needs"""
    rows: int = 20000
    seed: int = 42
    k: int = 10
    drift: DriftSpec = field(default_factory=DriftSpec)
    weights: TrustWeights = field(default_factory=TrustWeights)
    thresholds: Thresholds = field(default_factory=Thresholds)
    drift_source: DriftSource = DriftSource.TAE
    calibration_batches: Tuple[int, ...] = (1, 2)
    train_fraction: float = 0.8
    smote_k_neighbors: int = 5
    training: TrainConfig = field(default_factory=TrainConfig)
    classifier: ClassifierConfig = field(default_factory=ClassifierConfig)
    binning: BinningSpec = field(default_factory=BinningSpec)
    rules: Optional[Tuple[Dict, ...]] = None
    generator: Dict = field(default_factory=dict)
    detectors: Tuple[DetectorKind, ...] = tuple(DetectorKind)
    trials: int = 5
    parallelism: int = DEFAULT_PARALLELISM
    max_parallelism: int = DEFAULT_MAX_PARALLELISM
    input_path: Optional[str] = None
    output_dir: Optional[str] = None

    def generator_config(self) -> GeneratorConfig:
        """Generator settings of this run; rows and the seed come from the run"""
        values = dict(self.generator)
        values['rows'] = self.rows
        values['seed'] = derive_seed(self.seed, 'generator')
        return GeneratorConfig.from_dict(values)

    def training_config(self, component: str) -> TrainConfig:
        """Training settings seeded for one model"""
        return replace(self.training, seed=derive_seed(self.seed, component))

    def with_seed(self, seed: int) -> 'RunConfig':
        """The same run under another master seed"""
        return replace(self, seed=seed, drift=replace(self.drift, seed=seed))

    def n_jobs(self, jobs: int) -> int:
        """Thread count for a number of independent jobs"""
        # Parallelism 0 means one thread per job, but not more than max_parallelism
        if self.parallelism == 0:
            return min(jobs, self.max_parallelism)
        return self.parallelism


def parse_detectors(names) -> Tuple[DetectorKind, ...]:
    """DetectorKind values by name"""
    unknown = [name for name in names if name not in DetectorKind.list()]
    if unknown:
        raise UnknownDetectorException(f'Unknown detector(s) {unknown}. Valid kinds: {DetectorKind.list()}')
    return tuple(DetectorKind(name) for name in names)


def build_run_config(overrides: Dict = None) -> RunConfig:
    """
    Layer overrides on the defaults, validate, and build a RunConfig

    Raises:
        UnknownDetectorException: a detector name is not a DetectorKind
        InvalidConfigException: any other validation failure
    """
    config = merge_config(DEFAULT_CONFIG, overrides or {})
    if isinstance(config.get('detectors'), list):
        parse_detectors(config['detectors'])
    errors = validate_config(config)
    if errors:
        raise InvalidConfigException('Invalid configuration:\n  ' + '\n  '.join(errors))

    drift = config['drift']
    return RunConfig(
        rows=config['rows'],
        seed=config['seed'],
        k=config['k'],
        drift=DriftSpec(mode=DriftMode(drift['mode']), feature=drift['feature'], batches=tuple(drift['batches']),
                        magnitude=float(drift['magnitude']), seed=config['seed']),
        weights=TrustWeights.from_sequence(config['weights']),
        thresholds=Thresholds(**config['thresholds']),
        drift_source=DriftSource(config['drift_source']),
        calibration_batches=tuple(config['calibration_batches']),
        train_fraction=config['train_fraction'],
        smote_k_neighbors=config['smote_k_neighbors'],
        training=TrainConfig(**config['training']),
        classifier=ClassifierConfig(**config['classifier']),
        binning=BinningSpec(**config['binning']),
        rules=None if config['rules'] is None else tuple(config['rules']),
        generator=dict(config['generator']),
        detectors=parse_detectors(config['detectors']),
        trials=config['trials'],
        parallelism=config['parallelism'],
        max_parallelism=config['max_parallelism'],
        input_path=config.get('input'),
        output_dir=config.get('out'),
    )


def load_config(path: str) -> Dict:
    """Read a JSON config file"""
    try:
        with open(path, encoding='utf8') as config_input:
            config = json.load(config_input)
    except OSError as exc:
        raise InvalidConfigException(f'Cannot read config file {path}: {exc}') from exc
    except json.JSONDecodeError as exc:
        raise InvalidConfigException(f'{path}:{exc.lineno}: invalid JSON: {exc.msg}') from exc
    if not isinstance(config, dict):
        raise InvalidConfigException(f'{path}: config must be a JSON object')
    return config
