"""CSV file format functions"""
import os

from typing import Dict, List

import numpy as np
import pandas

from drift_trust import flattening
from drift_trust.data_model import Dataset, FeatureKind, Schema
from drift_trust.evaluation import BENCHMARK_COLUMNS
from drift_trust.exceptions import CsvParseException

REPORT_FLATTENING_MAX_LEVEL = 3


def read_dataset(path: str, schema: Schema) -> Dataset:
    """
    Read a CSV file whose header matches the schema field names exactly

    Args:
        path: CSV file
        schema: expected schema; numeric fields are parsed as decimals, empty cells are missing

    Returns:
        Dataset
    """
    try:
        frame = pandas.read_csv(path, dtype=str, keep_default_na=False, na_values=[''])
    except FileNotFoundError as exc:
        raise CsvParseException(f'{path}: file not found') from exc
    except (pandas.errors.ParserError, pandas.errors.EmptyDataError, UnicodeDecodeError) as exc:
        raise CsvParseException(f'{path}: {exc}') from exc

    header = list(frame.columns)
    if header != schema.names:
        raise CsvParseException(f'{path}:1: header {header} does not match schema fields {schema.names}')

    for name in schema.names:
        if schema.kind_of(name) != FeatureKind.NUMERIC:
            frame[name] = frame[name].astype(object).where(frame[name].notna(), None)
            continue
        parsed = pandas.to_numeric(frame[name], errors='coerce')
        bad = parsed.isna() & frame[name].notna()
        if bad.any():
            position = int(np.flatnonzero(bad.to_numpy())[0])
            raise CsvParseException(f"{path}:{position + 2}: column {name}: '{frame[name].iloc[position]}' "
                                    f'is not a number')
        frame[name] = parsed.astype(float)
    return Dataset(schema, frame)


def write_dataset(dataset: Dataset, path: str) -> str:
    """Write the schema columns of a dataset; missing values become empty cells"""
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    dataset.frame[dataset.schema.names].to_csv(path, index=False, na_rep='', lineterminator='\n')
    return path


def _write_rows(rows: List[Dict], columns: List[str], path: str) -> str:
    pandas.DataFrame(rows, columns=columns).to_csv(path, index=False, na_rep='', lineterminator='\n')
    return path


def report_rows(document: Dict) -> List[Dict]:
    """One flat row per batch of a report document"""
    return flattening.flatten_rows(document['batches'], max_level=REPORT_FLATTENING_MAX_LEVEL)


def write_trust_report(document: Dict, path: str) -> str:
    """Write one row per batch of a report document"""
    rows = report_rows(document)
    columns = list(dict.fromkeys(column for row in rows for column in row))
    return _write_rows(rows, columns, path)


def write_benchmark(document: Dict, path: str) -> str:
    """Write one row per detector of a benchmark document"""
    return _write_rows(document['detectors'], list(BENCHMARK_COLUMNS), path)
