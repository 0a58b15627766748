"""Reconstruction error and the reconstruction drift statistic"""
import math

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from drift_trust.exceptions import CalibrationMissingException, DataException
from drift_trust.neural.layers import ReconstructionModel


@dataclass(frozen=True)
class DriftDelta:
    """Batch mean error, its rise over the baseline mean, and that rise in standard errors"""
    batch_mean: float
    delta: float
    z: float


def reconstruction_error(model: ReconstructionModel, X: np.ndarray) -> Tuple[np.ndarray, float]:
    """Per-sample squared L2 norm of the residual, and its mean"""
    X = model.check_width(X)
    if len(X) == 0:
        raise DataException('Cannot score an empty matrix')
    errors = np.sum((model.reconstruct(X) - X) ** 2, axis=1)
    return errors, float(errors.mean())


def z_score(delta: float, std: float) -> float:
    """delta / std; a zero std gives +inf for a positive delta and 0 otherwise"""
    if std > 0:
        return delta / std
    return float('inf') if delta > 0 else 0.0


def standard_error(std: float, rows: int) -> float:
    """Std of the mean of rows independent draws with per-sample std"""
    return std / math.sqrt(rows)


def drift_delta(model: ReconstructionModel, batch_X: np.ndarray) -> DriftDelta:
    """
    Mean batch reconstruction error minus the frozen baseline mean, with its z-score

    The z-score measures the rise in standard errors of a clean batch mean of the
    same size, baseline std / sqrt(rows), so it is comparable across batch sizes.
    A single row is scored against the per-sample baseline std.
    """
    if model.baseline is None:
        raise CalibrationMissingException(f'{model.kind} has no baseline error statistics, train it first')
    errors, batch_mean = reconstruction_error(model, batch_X)
    delta = batch_mean - model.baseline.mean
    return DriftDelta(batch_mean=batch_mean, delta=delta,
                      z=z_score(delta, standard_error(model.baseline.std, len(errors))))
