"""Seeded synthetic airline dataset and drift injection"""
import math

from dataclasses import asdict, dataclass, fields
from enum import Enum, unique
from typing import Dict, List, Sequence, Tuple

import numpy as np
import pandas

from singer import get_logger

from drift_trust.data_model import Batch, Dataset, FeatureKind, Field, Schema
from drift_trust.exceptions import DegenerateDatasetException, InvalidConfigException, UnknownFeatureException
from drift_trust.seeding import derive_seed

LOGGER = get_logger('drift_trust')

CLASSES = ('on_time', 'delayed', 'cancelled')

AIRLINE_SCHEMA = Schema(fields=(
    Field('Departure_Airport', FeatureKind.CATEGORICAL),
    Field('Arrival_Airport', FeatureKind.CATEGORICAL),
    Field('Check_In_Type', FeatureKind.CATEGORICAL),
    Field('Departure_Month', FeatureKind.NUMERIC),
    Field('Departure_Day', FeatureKind.NUMERIC),
    Field('Departure_Hour', FeatureKind.NUMERIC),
    Field('Distance_Miles', FeatureKind.NUMERIC, 'mi'),
    Field('Flight_Duration_Minutes', FeatureKind.NUMERIC, 'min'),
    Field('Price_USD', FeatureKind.NUMERIC, 'usd'),
    Field('Delay_Minutes', FeatureKind.NUMERIC, 'min'),
    Field('Flight_Status', FeatureKind.LABEL),
))

# Cells that may be blanked by missing-value injection
MISSABLE_COLUMNS = ('Distance_Miles', 'Flight_Duration_Minutes', 'Price_USD', 'Delay_Minutes', 'Check_In_Type')

DAYS_IN_MONTH = np.array([31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31])


# pylint: disable=too-many-instance-attributes
@dataclass(frozen=True)
class GeneratorConfig:
    """Knobs of the synthetic airline generator

    Class priors are ordered as CLASSES. Fares are affine in distance and scaled
    by a per-class multiplier, delays are class dependent, so both the delay and the
    fare carry label information.
    """
    rows: int = 20000
    priors: Tuple[float, float, float] = (0.70, 0.25, 0.05)
    seed: int = 42
    airports: Tuple[str, ...] = ('ATL', 'DFW', 'DEN', 'ORD', 'LAX', 'JFK', 'SEA', 'MIA')
    check_in_types: Tuple[str, ...] = ('Online', 'Kiosk', 'Counter', 'Mobile')
    distance_median: float = 800.0
    distance_sigma: float = 0.55
    distance_bounds: Tuple[float, float] = (150.0, 4000.0)
    taxi_minutes: float = 25.0
    cruise_miles_per_minute: float = 7.5
    duration_noise: float = 8.0
    base_fare: float = 45.0
    fare_per_mile: float = 0.11
    fare_noise: float = 0.06
    fare_multipliers: Tuple[float, float, float] = (1.0, 0.92, 0.6)
    on_time_delay_scale: float = 6.0
    late_delay_offset: float = 8.0
    late_delay_scale: float = 40.0
    same_airport_fraction: float = 0.005
    negative_price_fraction: float = 0.002
    missing_fraction: float = 0.01
    noisy_text_fraction: float = 0.05

    def __post_init__(self):
        errors = self.validate()
        if errors:
            raise InvalidConfigException('; '.join(errors))

    def validate(self) -> List[str]:
        """Validate generator settings"""
        errors = []
        if self.rows <= 0:
            errors.append('rows must be positive')
        if len(self.priors) != len(CLASSES) or any(p < 0 for p in self.priors):
            errors.append(f'priors must be {len(CLASSES)} non-negative values')
        elif abs(sum(self.priors) - 1.0) > 1e-9:
            errors.append(f'priors must sum to 1, got {sum(self.priors)}')
        if len(self.airports) < 2:
            errors.append('at least two airports are required')
        if not self.check_in_types:
            errors.append('at least one check-in type is required')
        if not 0 < self.distance_bounds[0] < self.distance_bounds[1]:
            errors.append('distance bounds must be positive and increasing')
        for name in ('same_airport_fraction', 'negative_price_fraction', 'missing_fraction', 'noisy_text_fraction'):
            if not 0 <= getattr(self, name) < 1:
                errors.append(f'{name} must be in [0, 1)')
        return errors

    def to_dict(self) -> Dict:
        """JSON-friendly representation"""
        return {k: list(v) if isinstance(v, tuple) else v for k, v in asdict(self).items()}

    @classmethod
    def from_dict(cls, values: Dict) -> 'GeneratorConfig':
        """Build from a (possibly partial) dict, ignoring nothing silently"""
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(values) - known)
        if unknown:
            raise InvalidConfigException(f'Unknown generator settings: {unknown}')
        return cls(**{k: tuple(v) if isinstance(v, list) else v for k, v in values.items()})


@unique
class DriftMode(str, Enum):
    """Enum of supported drift injection modes"""

    NONE = 'none'
    PERMUTATION = 'permutation'
    SHIFT = 'shift'

    @staticmethod
    def list():
        """List of supported drift mode values"""
        return list(map(lambda c: c.value, DriftMode))


@dataclass(frozen=True)
class DriftSpec:
    """Which batches get which drift on which feature"""
    mode: DriftMode = DriftMode.PERMUTATION
    feature: str = 'Price_USD'
    batches: Tuple[int, ...] = (6, 7, 8, 9, 10)
    magnitude: float = 2.0
    seed: int = 0

    def validate(self, k: int) -> List[str]:
        """Validate against the batch count of a run"""
        errors = []
        if self.mode != DriftMode.NONE:
            outside = [i for i in self.batches if not 1 <= i <= k]
            if outside:
                errors.append(f'drift batches {outside} outside 1..{k}')
        if not math.isfinite(self.magnitude):
            errors.append('drift magnitude must be finite')
        return errors

    @property
    def drifted_batches(self) -> Tuple[int, ...]:
        """Ground-truth drifted batch indices"""
        return () if self.mode == DriftMode.NONE else tuple(sorted(set(self.batches)))


def _noisy_text(rng: np.random.Generator, values: np.ndarray, fraction: float) -> np.ndarray:
    """Upper-case, pad or lower-case a fraction of strings"""
    out = values.astype(object)
    picks = np.flatnonzero(rng.random(len(out)) < fraction)
    styles = rng.integers(0, 3, len(picks))
    for position, style in zip(picks, styles):
        if style == 0:
            out[position] = out[position].upper()
        elif style == 1:
            out[position] = f' {out[position]} '
        else:
            out[position] = out[position].lower()
    return out


# pylint: disable=too-many-locals
def generate_dataset(config: GeneratorConfig) -> Dataset:
    """
    Generate a synthetic airline dataset

    Same config and seed give identical datasets. Fares are positively correlated
    with distance by construction.

    Args:
        config: generator settings

    Returns:
        Dataset over AIRLINE_SCHEMA
    """
    rng = np.random.default_rng(config.seed)
    n = config.rows

    labels = rng.choice(len(CLASSES), size=n, p=np.asarray(config.priors))

    month = rng.integers(1, 13, n)
    day = 1 + np.floor(rng.random(n) * DAYS_IN_MONTH[month - 1]).astype(int)
    hour = rng.integers(0, 24, n)

    n_airports = len(config.airports)
    departure = rng.integers(0, n_airports, n)
    arrival = (departure + rng.integers(1, n_airports, n)) % n_airports
    check_in = rng.integers(0, len(config.check_in_types), n)

    low, high = config.distance_bounds
    distance = np.clip(np.exp(math.log(config.distance_median) + config.distance_sigma * rng.standard_normal(n)),
                       low, high)
    duration = np.maximum(config.taxi_minutes + distance / config.cruise_miles_per_minute
                          + config.duration_noise * rng.standard_normal(n), 30.0)
    multipliers = np.asarray(config.fare_multipliers)[labels]
    price = (config.base_fare + config.fare_per_mile * distance) * multipliers \
        * np.exp(config.fare_noise * rng.standard_normal(n))

    on_time_delay = rng.exponential(config.on_time_delay_scale, n)
    late_delay = config.late_delay_offset + rng.exponential(config.late_delay_scale, n)
    delay = np.where(labels == CLASSES.index('on_time'), on_time_delay, late_delay)

    airports = np.asarray(config.airports, dtype=object)
    frame = pandas.DataFrame({
        'Departure_Airport': airports[departure],
        'Arrival_Airport': airports[arrival],
        'Check_In_Type': np.asarray(config.check_in_types, dtype=object)[check_in],
        'Departure_Month': month,
        'Departure_Day': day,
        'Departure_Hour': hour,
        'Distance_Miles': np.round(distance, 1),
        'Flight_Duration_Minutes': np.round(duration, 1),
        'Price_USD': np.round(price, 2),
        'Delay_Minutes': np.round(delay, 1),
        'Flight_Status': np.asarray(CLASSES, dtype=object)[labels],
    })

    # Dirty rows for the cleaning stage to find
    same_airport = rng.random(n) < config.same_airport_fraction
    frame.loc[same_airport, 'Arrival_Airport'] = frame.loc[same_airport, 'Departure_Airport']
    negative_price = rng.random(n) < config.negative_price_fraction
    frame.loc[negative_price, 'Price_USD'] = -frame.loc[negative_price, 'Price_USD']

    for column in ('Departure_Airport', 'Arrival_Airport', 'Check_In_Type'):
        frame[column] = _noisy_text(rng, frame[column].to_numpy(), config.noisy_text_fraction)

    for column in MISSABLE_COLUMNS:
        blank = rng.random(n) < config.missing_fraction
        frame[column] = frame[column].astype(object if column == 'Check_In_Type' else float)
        frame.loc[blank, column] = None if column == 'Check_In_Type' else np.nan

    LOGGER.info('Generated %d records (seed %d, %d same-airport, %d negative-price rows)',
                n, config.seed, int(same_airport.sum()), int(negative_price.sum()))
    return Dataset(AIRLINE_SCHEMA, frame)


def inject_permutation_drift(batch: Batch, feature: str, seed: int) -> Batch:
    """
    Shuffle one numeric column within a batch

    The column becomes a uniform random permutation of its own values; every other
    column, the record count and the value multiset are untouched.
    """
    batch.schema.require(feature, FeatureKind.NUMERIC)
    rng = np.random.default_rng(seed)
    frame = batch.frame.copy()
    frame[feature] = rng.permutation(frame[feature].to_numpy())
    return batch.with_frame(frame)


def inject_shift_drift(batch: Batch, feature: str, magnitude: float, scale: float = 1.0) -> Batch:
    """
    Add magnitude standard deviations to every value of one numeric column

    Args:
        batch: batch to drift
        feature: numeric feature name
        magnitude: shift in standard deviations, may be negative
        scale: the feature's training-standardization std (1.0 for standardized values)
    """
    batch.schema.require(feature, FeatureKind.NUMERIC)
    if len(batch) == 0:
        raise DegenerateDatasetException(f'Cannot shift an empty batch (batch {batch.index})')
    if not math.isfinite(magnitude):
        raise InvalidConfigException(f'Shift magnitude must be finite, got {magnitude}')
    frame = batch.frame.copy()
    frame[feature] = frame[feature] + magnitude * scale
    return batch.with_frame(frame)


def apply_drift(batches: Sequence[Batch], spec: DriftSpec, scales: Dict[str, float] = None) -> List[Batch]:
    """
    Inject the drift described by spec into the affected batches

    Every batch draws its own seed from (spec.seed, batch index) so batches can be
    drifted independently of each other.
    Shift drift needs the feature's training std in scales.
    """
    if spec.mode == DriftMode.NONE:
        return list(batches)
    scales = scales or {}
    if spec.mode == DriftMode.SHIFT and spec.feature not in scales:
        raise UnknownFeatureException(
            f"Cannot shift '{spec.feature}', it has no training std. Scaled features: {sorted(scales)}")

    drifted = []
    for batch in batches:
        if batch.index not in spec.drifted_batches:
            drifted.append(batch)
        elif spec.mode == DriftMode.PERMUTATION:
            drifted.append(inject_permutation_drift(batch, spec.feature,
                                                    derive_seed(spec.seed, f'drift:{batch.index}')))
        else:
            drifted.append(inject_shift_drift(batch, spec.feature, spec.magnitude, scales[spec.feature]))
    LOGGER.info('Injected %s drift on %s into batches %s', spec.mode.value, spec.feature, list(spec.drifted_batches))
    return drifted


def sidecar_metadata(config: GeneratorConfig, dataset: Dataset) -> Dict:
    """Metadata written next to a generated CSV"""
    return {
        'format_version': 1,
        'seed': config.seed,
        'rows': len(dataset),
        'generator': config.to_dict(),
        'schema': {
            'fields': [{'name': f.name, 'kind': f.kind.value, 'unit': f.unit} for f in dataset.schema.fields],
            'target': dataset.schema.target,
            'timestamp_fields': list(dataset.schema.timestamp_fields),
        },
    }


