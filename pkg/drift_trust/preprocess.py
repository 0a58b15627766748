"""Cleaning, feature engineering, encoding, resampling and splitting"""
from collections import Counter
from dataclasses import asdict, dataclass, field
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np
import pandas

from singer import get_logger
from sklearn.model_selection import train_test_split as sklearn_train_test_split
from sklearn.neighbors import NearestNeighbors

from drift_trust.data_model import (
    TIMESTAMP_COLUMN,
    Dataset,
    FeatureKind,
    Field,
    is_missing,
    sort_by_timestamp
)
from drift_trust.exceptions import (
    DegenerateDatasetException,
    InsufficientClassSamplesException,
    InvalidConfigException,
    ShapeMismatchException,
    TimestampRangeException,
    UnknownFeatureException,
    UnknownLabelException
)
from drift_trust.seeding import sklearn_seed

LOGGER = get_logger('drift_trust')

DEFAULT_CLIP_QUANTILES = (0.005, 0.995)
DEFAULT_SMOTE_NEIGHBORS = 5
DEFAULT_TRAIN_FRACTION = 0.8

MINUTES_PER_DAY = 1440
# First day of each month in a non-leap year, as a day offset from Jan 1
MONTH_START_DAY = np.cumsum([0, 31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30])

# (name, numerator, denominator, unit)
ENGINEERED_FEATURES = (
    ('Distance_per_Minute', 'Distance_Miles', 'Flight_Duration_Minutes', 'mi/min'),
    ('Price_per_Mile', 'Price_USD', 'Distance_Miles', 'usd/mi'),
)


def _normalized_text(series: pandas.Series) -> pandas.Series:
    return series.map(lambda v: v if is_missing(v) else str(v).strip().lower())


@dataclass(frozen=True)
class InvalidRowRule:
    """Named predicate marking rows to remove; predicate returns a boolean mask over the frame"""
    name: str
    columns: Tuple[str, ...]
    predicate: Callable[[pandas.DataFrame], pandas.Series]
    description: str = ''


def _same_airport(frame: pandas.DataFrame) -> pandas.Series:
    departure = _normalized_text(frame['Departure_Airport'])
    arrival = _normalized_text(frame['Arrival_Airport'])
    return departure.notna() & (departure == arrival)


def _negative(column: str) -> Callable[[pandas.DataFrame], pandas.Series]:
    return lambda frame: frame[column] < 0


DEFAULT_INVALID_ROW_RULES = (
    InvalidRowRule('same_airport', ('Departure_Airport', 'Arrival_Airport'), _same_airport,
                   'departure and arrival airports are the same'),
    InvalidRowRule('negative_distance', ('Distance_Miles',), _negative('Distance_Miles'), 'distance below zero'),
    InvalidRowRule('negative_delay', ('Delay_Minutes',), _negative('Delay_Minutes'), 'delay below zero'),
    InvalidRowRule('negative_price', ('Price_USD',), _negative('Price_USD'), 'price below zero'),
)


@dataclass(frozen=True)
class CleaningRuleSet:
    """Invalid-row predicates plus per-feature clipping quantiles (None disables clipping)"""
    rules: Tuple[InvalidRowRule, ...] = DEFAULT_INVALID_ROW_RULES
    clip_quantiles: Optional[Tuple[float, float]] = DEFAULT_CLIP_QUANTILES

    def __post_init__(self):
        if self.clip_quantiles is not None:
            lower, upper = self.clip_quantiles
            if not 0 < lower < upper < 1:
                raise InvalidConfigException(f'Clipping quantiles must satisfy 0 < lower < upper < 1, '
                                             f'got {self.clip_quantiles}')


@dataclass
class CleaningReport:
    """What clean() removed and clamped"""
    rows_in: int = 0
    rows_out: int = 0
    removed_by_rule: Dict[str, int] = field(default_factory=dict)
    clipped: Dict[str, int] = field(default_factory=dict)
    clip_bounds: Dict[str, List[float]] = field(default_factory=dict)


def clean(dataset: Dataset, rules: CleaningRuleSet = None) -> Tuple[Dataset, CleaningReport]:
    """
    Remove invalid rows and clamp numeric outliers to the clipping quantiles

    A row matching several rules is removed once but counted under every rule it matches.

    Args:
        dataset: raw dataset
        rules: invalid-row predicates and clipping quantiles

    Returns:
        cleaned dataset and a removal report
    """
    rules = rules or CleaningRuleSet()
    frame = dataset.frame
    report = CleaningReport(rows_in=len(frame))

    invalid = pandas.Series(False, index=frame.index)
    for rule in rules.rules:
        if any(column not in frame.columns for column in rule.columns):
            LOGGER.debug('Skipping cleaning rule %s, columns %s not present', rule.name, rule.columns)
            continue
        matches = rule.predicate(frame).fillna(False).astype(bool)
        report.removed_by_rule[rule.name] = int(matches.sum())
        invalid |= matches

    frame = frame[~invalid].reset_index(drop=True)
    if len(frame) == 0:
        raise DegenerateDatasetException(f'Cleaning removed all {report.rows_in} rows')

    if rules.clip_quantiles is not None:
        lower_q, upper_q = rules.clip_quantiles
        frame = frame.copy()
        for name in dataset.schema.numeric_features:
            values = frame[name].to_numpy(dtype=float)
            if np.isnan(values).all():
                continue
            lower, upper = np.nanquantile(values, [lower_q, upper_q])
            outside = (values < lower) | (values > upper)
            report.clipped[name] = int(outside.sum())
            report.clip_bounds[name] = [float(lower), float(upper)]
            frame[name] = frame[name].clip(lower, upper)

    report.rows_out = len(frame)
    LOGGER.info('Cleaning kept %d of %d rows, removed per rule: %s',
                report.rows_out, report.rows_in, report.removed_by_rule)
    return dataset.with_frame(frame), report


def standardize_categoricals(dataset: Dataset) -> Dataset:
    """Lowercase and trim every categorical value; missing values stay missing"""
    frame = dataset.frame.copy()
    for name in dataset.schema.categorical_features:
        frame[name] = _normalized_text(frame[name])
    return dataset.with_frame(frame)


@dataclass
class EngineeringReport:
    """Zero-denominator imputations made by engineer_features"""
    imputed: Dict[str, int] = field(default_factory=dict)
    medians: Dict[str, float] = field(default_factory=dict)


def engineer_features(dataset: Dataset,
                      medians: Dict[str, float] = None) -> Tuple[Dataset, EngineeringReport]:
    """
    Add Distance_per_Minute and Price_per_Mile

    Existing derived columns are recomputed. Rows with a zero denominator get the
    median of the derived feature over the rows with a usable denominator, or the
    given medians (training medians at serving time).

    Args:
        dataset: cleaned dataset holding distance, duration and price
        medians: optional fixed imputation values per derived feature

    Returns:
        dataset over the extended schema, and the imputation report
    """
    frame = dataset.frame.copy()
    report = EngineeringReport()
    new_fields = []

    for name, numerator, denominator, unit in ENGINEERED_FEATURES:
        for column in (numerator, denominator):
            dataset.schema.require(column, FeatureKind.NUMERIC)

        top = frame[numerator].to_numpy(dtype=float)
        bottom = frame[denominator].to_numpy(dtype=float)
        zero = bottom == 0
        with np.errstate(divide='ignore', invalid='ignore'):
            derived = np.where(zero, np.nan, top / np.where(zero, 1.0, bottom))

        if medians and name in medians:
            median = float(medians[name])
        else:
            usable = derived[~zero & ~np.isnan(derived)]
            if len(usable) == 0:
                raise DegenerateDatasetException(f'No row has a usable {denominator} to derive {name}')
            median = float(np.median(usable))

        if zero.any():
            LOGGER.warning('%d rows with zero %s, %s imputed with median %s', int(zero.sum()), denominator, name, median)
            derived[zero] = median
        report.imputed[name] = int(zero.sum())
        report.medians[name] = median

        frame[name] = derived
        new_fields.append(Field(name, FeatureKind.NUMERIC, unit))

    return dataset.with_frame(frame, dataset.schema.extended(new_fields)), report


def build_timestamp(dataset: Dataset) -> Dataset:
    """
    Compose the synthetic timestamp from month, day and hour

    Minutes since Jan 1 00:00 of a fixed non-leap year.
    """
    month_name, day_name, hour_name = dataset.schema.timestamp_fields
    month = dataset.frame[month_name].to_numpy(dtype=float)
    day = dataset.frame[day_name].to_numpy(dtype=float)
    hour = dataset.frame[hour_name].to_numpy(dtype=float)

    for name, values, low, high in ((month_name, month, 1, 12), (day_name, day, 1, 31), (hour_name, hour, 0, 23)):
        bad = np.isnan(values) | (values < low) | (values > high) | (values != np.floor(values))
        if bad.any():
            position = int(np.flatnonzero(bad)[0])
            raise TimestampRangeException(
                f'{name} must be an integer in {low}..{high}, row {position} has {values[position]}')

    days = MONTH_START_DAY[month.astype(int) - 1] + day.astype(int) - 1
    frame = dataset.frame.copy()
    frame[TIMESTAMP_COLUMN] = days * MINUTES_PER_DAY + hour.astype(int) * 60
    return dataset.with_frame(frame)


@dataclass(frozen=True)
class Scaling:
    """z-score parameters of one retained feature, plus its imputation value"""
    mean: float
    std: float
    fill: object


@dataclass(frozen=True)
class FittedTransform:
    """Training-only statistics that turn a dataset into a numeric matrix"""
    features: Tuple[str, ...]
    scaling: Dict[str, Scaling]
    code_tables: Dict[str, Dict[str, int]]
    classes: Tuple[str, ...]
    label: str
    dropped: Tuple[str, ...] = ()

    def to_dict(self) -> Dict:
        """JSON-friendly representation"""
        return {
            'features': list(self.features),
            'scaling': {name: asdict(s) for name, s in self.scaling.items()},
            'code_tables': self.code_tables,
            'classes': list(self.classes),
            'label': self.label,
            'dropped': list(self.dropped),
        }

    def raw_std(self, name: str) -> float:
        """Training std of a retained numeric feature in raw units"""
        if name not in self.scaling:
            raise UnknownFeatureException(f"Feature '{name}' is not part of the fitted transform")
        return self.scaling[name].std


def _mode(values: List[str]) -> str:
    counts = Counter(values)
    best = max(counts.values())
    return min(v for v, c in counts.items() if c == best)


def fit_transform(train: Dataset) -> FittedTransform:
    """
    Fit imputation, encoding and scaling on the training partition only

    Numeric features are imputed with their median, categoricals with their mode and
    ordinal-encoded; both are then z-scored. Zero-variance features are dropped.
    """
    schema = train.schema
    frame = train.frame
    features, scaling, code_tables, dropped = [], {}, {}, []

    for name in schema.feature_names:
        if schema.kind_of(name) == FeatureKind.NUMERIC:
            values = frame[name].to_numpy(dtype=float)
            if np.isnan(values).all():
                LOGGER.warning('Feature %s has no values in training, dropped', name)
                dropped.append(name)
                continue
            fill = float(np.nanmedian(values))
            column = np.where(np.isnan(values), fill, values)
        else:
            present = [v for v in frame[name].tolist() if not is_missing(v)]
            if not present:
                LOGGER.warning('Feature %s has no values in training, dropped', name)
                dropped.append(name)
                continue
            fill = _mode(present)
            table = {value: code for code, value in enumerate(sorted(set(present)))}
            column = np.array([table[fill] if is_missing(v) else table[v] for v in frame[name].tolist()], dtype=float)

        std = float(column.std())
        if std == 0.0:
            LOGGER.warning('Feature %s has zero variance in training, dropped', name)
            dropped.append(name)
            continue
        if schema.kind_of(name) == FeatureKind.CATEGORICAL:
            code_tables[name] = table
        features.append(name)
        scaling[name] = Scaling(mean=float(column.mean()), std=std, fill=fill)

    labels = frame[schema.label].tolist()
    if any(is_missing(v) for v in labels):
        raise UnknownLabelException(f'Training partition has records without {schema.label}')

    return FittedTransform(features=tuple(features), scaling=scaling, code_tables=code_tables,
                           classes=tuple(sorted(set(labels))), label=schema.label, dropped=tuple(dropped))


def apply_features(transform: FittedTransform, dataset: Dataset) -> np.ndarray:
    """Feature matrix of a dataset under a fitted transform; columns follow transform.features"""
    frame = dataset.frame
    X = np.empty((len(frame), len(transform.features)))
    for j, name in enumerate(transform.features):
        if name not in frame.columns:
            raise UnknownFeatureException(f"Column '{name}' missing from dataset")
        stats = transform.scaling[name]
        if name in transform.code_tables:
            table = transform.code_tables[name]
            unseen = len(table)
            column = np.array([table[stats.fill] if is_missing(v) else table.get(v, unseen)
                               for v in frame[name].tolist()], dtype=float)
        else:
            values = frame[name].to_numpy(dtype=float)
            column = np.where(np.isnan(values), stats.fill, values)
        X[:, j] = (column - stats.mean) / stats.std
    return X


def apply_labels(transform: FittedTransform, dataset: Dataset) -> np.ndarray:
    """Class indices of a dataset's labels, aligned to transform.classes"""
    index = {c: i for i, c in enumerate(transform.classes)}
    labels = dataset.frame[transform.label].tolist()
    unknown = sorted({str(v) for v in labels if is_missing(v) or v not in index})
    if unknown:
        raise UnknownLabelException(f'Labels not seen in training: {unknown}')
    return np.array([index[v] for v in labels], dtype=int)


def apply_transform(transform: FittedTransform, dataset: Dataset) -> Tuple[np.ndarray, np.ndarray]:
    """Numeric matrix X and label vector y of a dataset"""
    return apply_features(transform, dataset), apply_labels(transform, dataset)


def smote_resample(X: np.ndarray, y: np.ndarray, k_neighbors: int = DEFAULT_SMOTE_NEIGHBORS, seed: int = 0,
                   return_parents: bool = False):
    """
    Upsample every minority class to the majority count with SMOTE

    Each synthetic sample is x + u * (neighbor - x), u uniform in [0, 1), with the
    neighbor drawn from the k nearest same-class samples (Euclidean).

    Args:
        X: numeric feature matrix
        y: class labels
        k_neighbors: neighbors considered per sample, clamped to class size - 1
        seed: random seed
        return_parents: also return the (sample, neighbor) row indices of every synthetic point

    Returns:
        (X', y') or (X', y', parents) with originals first, synthetics appended class by class
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y)
    if X.ndim != 2 or len(X) != len(y):
        raise ShapeMismatchException(f'X {X.shape} and y {y.shape} do not align')

    rng = np.random.default_rng(seed)
    classes, counts = np.unique(y, return_counts=True)
    majority = counts.max()

    new_X, new_y, parents = [X], [y], []
    for cls, count in zip(classes, counts):
        if count == majority:
            continue
        if count < 2:
            raise InsufficientClassSamplesException(f'Class {cls} has {count} sample, SMOTE needs at least 2')
        k = k_neighbors
        if k > count - 1:
            LOGGER.warning('Class %s has %d samples, k_neighbors clamped from %d to %d', cls, count, k, count - 1)
            k = count - 1

        rows = np.flatnonzero(y == cls)
        members = X[rows]
        neighbors = NearestNeighbors(n_neighbors=k, algorithm='brute').fit(members).kneighbors(
            return_distance=False)

        n_new = majority - count
        base = rng.integers(0, count, n_new)
        neighbor = neighbors[base, rng.integers(0, k, n_new)]
        gap = rng.random((n_new, 1))
        new_X.append(members[base] + gap * (members[neighbor] - members[base]))
        new_y.append(np.full(n_new, cls, dtype=y.dtype))
        parents.append(np.column_stack([rows[base], rows[neighbor]]))

    X_out, y_out = np.vstack(new_X), np.concatenate(new_y)
    LOGGER.info('SMOTE resampled %d rows to %d (%d per class)', len(X), len(X_out), majority)
    if return_parents:
        return X_out, y_out, np.vstack(parents) if parents else np.empty((0, 2), dtype=int)
    return X_out, y_out


def train_test_split(dataset: Dataset, train_fraction: float = DEFAULT_TRAIN_FRACTION,
                     seed: int = 0) -> Tuple[Dataset, Dataset]:
    """
    Stratified, seeded split into disjoint train and test partitions

    Both partitions keep the input's record order.
    """
    if not 0 < train_fraction < 1:
        raise InvalidConfigException(f'train_fraction must be in (0, 1), got {train_fraction}')

    labels = dataset.frame[dataset.schema.label].astype(str).to_numpy()
    positions = np.arange(len(dataset))
    try:
        train_rows, test_rows = sklearn_train_test_split(positions, train_size=train_fraction, stratify=labels,
                                                         random_state=sklearn_seed(seed))
    except ValueError as ex:
        LOGGER.warning('Stratified split not possible (%s), falling back to an unstratified split', ex)
        train_rows, test_rows = sklearn_train_test_split(positions, train_size=train_fraction,
                                                         random_state=sklearn_seed(seed))

    train_rows, test_rows = np.sort(train_rows), np.sort(test_rows)
    for cls in np.unique(labels):
        if not (labels[train_rows] == cls).any() or not (labels[test_rows] == cls).any():
            LOGGER.warning('Class %s is absent from one side of the split', cls)

    train = dataset.with_frame(dataset.frame.iloc[train_rows].reset_index(drop=True))
    test = dataset.with_frame(dataset.frame.iloc[test_rows].reset_index(drop=True))
    return train, test


@dataclass
class PreparedData:
    """Output of the clean -> standardize -> engineer -> timestamp -> sort pipeline"""
    dataset: Dataset
    cleaning: CleaningReport
    engineering: EngineeringReport


def prepare(dataset: Dataset, rules: CleaningRuleSet = None) -> PreparedData:
    """Run every row-level preprocessing stage and return a time-sorted dataset"""
    cleaned, cleaning = clean(dataset, rules)
    engineered, engineering = engineer_features(standardize_categoricals(cleaned))
    ordered = sort_by_timestamp(build_timestamp(engineered))
    return PreparedData(ordered, cleaning, engineering)
