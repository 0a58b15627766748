"""Schema, record, dataset and batching primitives"""
import math
import numbers

from dataclasses import dataclass, field, replace
from enum import Enum, unique
from typing import Any, Iterable, List, NamedTuple, Optional, Tuple

import numpy as np
import pandas

from drift_trust.exceptions import (
    BatchPartitionException,
    PreprocessingNotRunException,
    SchemaException,
    UnknownFeatureException
)

TIMESTAMP_COLUMN = 'Timestamp_Minutes'
DEFAULT_TARGET = 'Price_USD'
DEFAULT_TIMESTAMP_FIELDS = ('Departure_Month', 'Departure_Day', 'Departure_Hour')


@unique
class FeatureKind(str, Enum):
    """Enum of supported field kinds"""

    NUMERIC = 'numeric'
    CATEGORICAL = 'categorical'
    LABEL = 'label'

    @staticmethod
    def list():
        """List of supported field kind values"""
        return list(map(lambda c: c.value, FeatureKind))


@dataclass(frozen=True)
class Field:
    """One named, typed column of a schema"""
    name: str
    kind: FeatureKind
    unit: Optional[str] = None


@dataclass(frozen=True)
class Schema:
    """Ordered field list plus the drift-target feature and the timestamp components"""
    fields: Tuple[Field, ...]
    target: str = DEFAULT_TARGET
    timestamp_fields: Tuple[str, ...] = DEFAULT_TIMESTAMP_FIELDS

    def __post_init__(self):
        object.__setattr__(self, 'fields', tuple(self.fields))
        object.__setattr__(self, 'timestamp_fields', tuple(self.timestamp_fields))

        names = [f.name for f in self.fields]
        if any(not name for name in names):
            raise SchemaException('Field names must be non-empty')
        if len(set(names)) != len(names):
            duplicates = sorted({n for n in names if names.count(n) > 1})
            raise SchemaException(f'Duplicate field names in schema: {duplicates}')

        labels = [f.name for f in self.fields if f.kind == FeatureKind.LABEL]
        if len(labels) != 1:
            raise SchemaException(f'Exactly one label field required, found {len(labels)}: {labels}')

        if self.target not in names or self.kind_of(self.target) != FeatureKind.NUMERIC:
            raise SchemaException(f"Drift-target feature '{self.target}' must exist and be numeric")

        for name in self.timestamp_fields:
            if name not in names or self.kind_of(name) != FeatureKind.NUMERIC:
                raise SchemaException(f"Timestamp component '{name}' must exist and be numeric")

    @property
    def names(self) -> List[str]:
        """Field names in schema order"""
        return [f.name for f in self.fields]

    @property
    def label(self) -> str:
        """Name of the label field"""
        return next(f.name for f in self.fields if f.kind == FeatureKind.LABEL)

    def kind_of(self, name: str) -> FeatureKind:
        """FeatureKind of a named field"""
        for f in self.fields:
            if f.name == name:
                return f.kind
        raise UnknownFeatureException(f"Unknown feature '{name}'. Available fields: {self.names}")

    def require(self, name: str, kind: FeatureKind = None) -> None:
        """Raise if a field is missing, or is not of the given kind"""
        actual = self.kind_of(name)
        if kind is not None and actual != kind:
            raise UnknownFeatureException(f"Feature '{name}' is {actual.value}, expected {kind.value}")

    @property
    def numeric_features(self) -> List[str]:
        """Numeric model features (timestamp components excluded)"""
        return [f.name for f in self.fields
                if f.kind == FeatureKind.NUMERIC and f.name not in self.timestamp_fields]

    @property
    def categorical_features(self) -> List[str]:
        """Categorical model features"""
        return [f.name for f in self.fields if f.kind == FeatureKind.CATEGORICAL]

    @property
    def feature_names(self) -> List[str]:
        """Model features in schema order: everything except the label and the timestamp components"""
        return [f.name for f in self.fields
                if f.kind != FeatureKind.LABEL and f.name not in self.timestamp_fields]

    def extended(self, new_fields: Iterable[Field]) -> 'Schema':
        """Schema with extra fields appended; fields already present are kept as they are"""
        existing = set(self.names)
        extra = tuple(f for f in new_fields if f.name not in existing)
        return replace(self, fields=self.fields + extra)

    def without(self, names: Iterable[str]) -> 'Schema':
        """Schema with the named fields removed"""
        dropped = set(names)
        return replace(self, fields=tuple(f for f in self.fields if f.name not in dropped))


@dataclass(frozen=True)
class Record:
    """Values aligned to schema order plus the synthetic timestamp in minutes"""
    values: Tuple[Any, ...]
    timestamp: Optional[int] = None


class Violation(NamedTuple):
    """One reason a record fails its schema"""
    kind: str
    field: Optional[str] = None


@dataclass(frozen=True)
class RecordVerdict:
    """Outcome of validating one record"""
    violations: Tuple[Violation, ...] = ()

    @property
    def ok(self) -> bool:
        """True if the record conforms"""
        return not self.violations


def is_missing(value: Any) -> bool:
    """None and NaN both mark a missing cell"""
    if value is None:
        return True
    return isinstance(value, float) and math.isnan(value)


def _value_matches(kind: FeatureKind, value: Any) -> bool:
    if is_missing(value):
        return True
    if kind == FeatureKind.NUMERIC:
        return isinstance(value, numbers.Real) and not isinstance(value, (bool, np.bool_))
    return isinstance(value, str)


def validate_record(schema: Schema, record: Record) -> RecordVerdict:
    """
    Check a record against a schema

    Args:
        schema: the schema to validate against
        record: the record to validate

    Returns:
        RecordVerdict, ok when arity matches and every value's type matches its FeatureKind
    """
    if len(record.values) != len(schema.fields):
        return RecordVerdict((Violation('arity'),))

    violations = tuple(Violation('type', f.name)
                       for f, value in zip(schema.fields, record.values)
                       if not _value_matches(f.kind, value))
    return RecordVerdict(violations)


@dataclass(frozen=True, eq=False)
class Dataset:
    """Schema plus an ordered table of records, one DataFrame column per field"""
    schema: Schema
    frame: pandas.DataFrame = field(repr=False)

    def __post_init__(self):
        missing = [name for name in self.schema.names if name not in self.frame.columns]
        if missing:
            raise SchemaException(f'Columns missing from dataset: {missing}')

    def __len__(self):
        return len(self.frame)

    @property
    def has_timestamps(self) -> bool:
        """True once build_timestamp has run and every record carries a timestamp"""
        return TIMESTAMP_COLUMN in self.frame.columns and not self.frame[TIMESTAMP_COLUMN].isna().any()

    @property
    def records(self) -> List[Record]:
        """Records in dataset order"""
        columns = [self.frame[name].tolist() for name in self.schema.names]
        if TIMESTAMP_COLUMN in self.frame.columns:
            timestamps = [None if is_missing(t) else int(t) for t in self.frame[TIMESTAMP_COLUMN].tolist()]
        else:
            timestamps = [None] * len(self.frame)
        return [Record(tuple(values), ts) for values, ts in zip(zip(*columns), timestamps)]

    def with_frame(self, frame: pandas.DataFrame, schema: Schema = None) -> 'Dataset':
        """Dataset of the same kind over a new frame"""
        return replace(self, schema=schema or self.schema, frame=frame)

    def column(self, name: str) -> pandas.Series:
        """One column by field name"""
        self.schema.kind_of(name)
        return self.frame[name]


@dataclass(frozen=True, eq=False)
class Batch(Dataset):
    """Contiguous, chronologically ordered slice of a dataset; index is 1-based"""
    index: int = 1


def dataset_from_records(schema: Schema, records: List[Record]) -> Dataset:
    """Build a dataset from records aligned to the schema"""
    frame = pandas.DataFrame([list(r.values) for r in records], columns=schema.names)
    if any(r.timestamp is not None for r in records):
        frame[TIMESTAMP_COLUMN] = [r.timestamp for r in records]
    for name in schema.names:
        if schema.kind_of(name) == FeatureKind.NUMERIC:
            frame[name] = pandas.to_numeric(frame[name])
    return Dataset(schema, frame)


def validate_dataset(dataset: Dataset) -> List[Tuple[int, RecordVerdict]]:
    """Row position and verdict of every record that fails the schema"""
    failures = []
    for position, record in enumerate(dataset.records):
        verdict = validate_record(dataset.schema, record)
        if not verdict.ok:
            failures.append((position, verdict))
    return failures


def sort_by_timestamp(dataset: Dataset) -> Dataset:
    """
    Stable sort by synthetic timestamp

    Raises:
        PreprocessingNotRunException: if any record has no timestamp
    """
    if not dataset.has_timestamps:
        raise PreprocessingNotRunException('Records have no timestamps, run build_timestamp first')

    frame = dataset.frame.sort_values(TIMESTAMP_COLUMN, kind='mergesort').reset_index(drop=True)
    return dataset.with_frame(frame)


def partition_batches(dataset: Dataset, k: int) -> List[Batch]:
    """
    Cut a time-sorted dataset into k contiguous batches

    Batch sizes differ by at most one and the earliest batches take the remainder.

    Args:
        dataset: dataset sorted by timestamp
        k: number of batches

    Returns:
        list of k Batch objects, 1-based indices
    """
    if k <= 0:
        raise BatchPartitionException(f'Batch count must be positive, got {k}')
    if k > len(dataset):
        raise BatchPartitionException(f'Cannot cut {len(dataset)} records into {k} batches')
    if not dataset.has_timestamps:
        raise PreprocessingNotRunException('Records have no timestamps, run build_timestamp first')
    if not dataset.frame[TIMESTAMP_COLUMN].is_monotonic_increasing:
        raise BatchPartitionException('Dataset must be sorted by timestamp before partitioning')

    batches = []
    for index, positions in enumerate(np.array_split(np.arange(len(dataset)), k), start=1):
        frame = dataset.frame.iloc[positions].reset_index(drop=True)
        batches.append(Batch(dataset.schema, frame, index))
    return batches
