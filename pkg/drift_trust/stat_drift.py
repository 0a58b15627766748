"""Histograms and the statistical drift measures: PSI, KL divergence and JSD"""
from dataclasses import dataclass
from enum import Enum, unique
from typing import Dict, Iterable, Tuple

import numpy as np

from scipy.special import rel_entr

from drift_trust.exceptions import (
    DataException,
    HistogramMismatchException,
    InvalidConfigException,
    ShapeMismatchException
)

DEFAULT_BINS = 10
DEFAULT_EPSILON = 1e-6
LN2 = np.log(2.0)


@unique
class BinningStrategy(str, Enum):
    """Enum of supported bin edge strategies"""

    QUANTILE = 'quantile'
    EQUAL_WIDTH = 'equal_width'

    @staticmethod
    def list():
        """List of supported binning strategy values"""
        return list(map(lambda c: c.value, BinningStrategy))


@dataclass(frozen=True)
class BinningSpec:
    """Bin count, edge strategy and additive smoothing"""
    bins: int = DEFAULT_BINS
    strategy: BinningStrategy = BinningStrategy.QUANTILE
    epsilon: float = DEFAULT_EPSILON

    def __post_init__(self):
        object.__setattr__(self, 'strategy', BinningStrategy(self.strategy))
        if self.bins < 2:
            raise InvalidConfigException(f'Bin count must be at least 2, got {self.bins}')
        if not self.epsilon > 0:
            raise InvalidConfigException(f'Smoothing epsilon must be positive, got {self.epsilon}')


@dataclass(frozen=True)
class Histogram:
    """Ascending bin edges, outermost at -inf and +inf, with smoothed proportions"""
    edges: Tuple[float, ...]
    proportions: Tuple[float, ...]
    count: int = 0

    @property
    def bins(self) -> int:
        """Number of bins"""
        return len(self.proportions)

    @property
    def p(self) -> np.ndarray:
        """Proportions as an array"""
        return np.asarray(self.proportions, dtype=float)


def _equal_width_edges(low: float, high: float, bins: int) -> np.ndarray:
    edges = np.linspace(low, high, bins + 1)
    edges[0], edges[-1] = -np.inf, np.inf
    return edges


def _reference_edges(values: np.ndarray, spec: BinningSpec) -> np.ndarray:
    low, high = float(values.min()), float(values.max())
    if low == high:
        return _equal_width_edges(low - 1.0, high + 1.0, spec.bins)

    if spec.strategy == BinningStrategy.EQUAL_WIDTH:
        return _equal_width_edges(low, high, spec.bins)

    interior = np.unique(np.quantile(values, np.linspace(0, 1, spec.bins + 1)[1:-1]))
    return np.concatenate([[-np.inf], interior, [np.inf]])


def build_histogram(values: Iterable[float], spec: BinningSpec = None, reference: Histogram = None) -> Histogram:
    """
    Bin values and smooth the proportions as (c_i + eps) / (N + n * eps)

    Quantile edges may collapse on heavily repeated values, leaving fewer than spec.bins bins.

    Args:
        values: finite numeric values
        spec: binning parameters
        reference: histogram whose edges are reused; the expected side defines the edges

    Returns:
        Histogram
    """
    spec = spec or BinningSpec()
    values = np.asarray(list(values) if not isinstance(values, np.ndarray) else values, dtype=float)
    if values.size == 0:
        raise DataException('Cannot build a histogram from no values')
    if not np.isfinite(values).all():
        raise DataException('Histogram values must be finite')

    edges = np.asarray(reference.edges) if reference is not None else _reference_edges(values, spec)
    n_bins = len(edges) - 1
    positions = np.searchsorted(edges[1:-1], values, side='right')
    counts = np.bincount(positions, minlength=n_bins)
    proportions = (counts + spec.epsilon) / (values.size + n_bins * spec.epsilon)
    return Histogram(tuple(float(e) for e in edges), tuple(float(p) for p in proportions), int(values.size))


def psi(expected: Histogram, actual: Histogram) -> float:
    """Population stability index, natural log"""
    if expected.edges != actual.edges:
        raise HistogramMismatchException(
            f'PSI needs histograms over identical edges, got {expected.bins} and {actual.bins} bins')
    e, a = expected.p, actual.p
    return float(max(np.sum((a - e) * np.log(a / e)), 0.0))


def _proportions_pair(p, q) -> Tuple[np.ndarray, np.ndarray]:
    p, q = np.asarray(p, dtype=float), np.asarray(q, dtype=float)
    if p.shape != q.shape or p.ndim != 1:
        raise ShapeMismatchException(f'Proportion vectors must have equal length, got {p.shape} and {q.shape}')
    return p, q


def kl_divergence(p, q) -> float:
    """KL(p || q) in bits; 0 * log(0 / q) is 0"""
    p, q = _proportions_pair(p, q)
    return float(max(np.sum(rel_entr(p, q)) / LN2, 0.0))


def jsd(p, q) -> float:
    """Jensen-Shannon divergence in bits, bounded by [0, 1]"""
    p, q = _proportions_pair(p, q)
    m = (p + q) / 2.0
    value = 0.5 * np.sum(rel_entr(p, m)) / LN2 + 0.5 * np.sum(rel_entr(q, m)) / LN2
    return float(min(max(value, 0.0), 1.0))


@dataclass(frozen=True)
class FeatureDrift:
    """PSI and JSD of one feature against its reference histogram"""
    psi: float
    jsd: float


class ReferenceProfile:
    """Reference histograms of several features, fitted once on training data"""

    def __init__(self, histograms: Dict[str, Histogram], spec: BinningSpec):
        self.histograms = histograms
        self.spec = spec

    @classmethod
    def fit(cls, columns: Dict[str, np.ndarray], spec: BinningSpec = None) -> 'ReferenceProfile':
        """Reference histograms for every column"""
        spec = spec or BinningSpec()
        return cls({name: build_histogram(values, spec) for name, values in columns.items()}, spec)

    @property
    def features(self) -> Tuple[str, ...]:
        """Profiled feature names"""
        return tuple(self.histograms)

    def compare(self, columns: Dict[str, np.ndarray]) -> Dict[str, FeatureDrift]:
        """PSI and JSD of every profiled feature in columns"""
        drift = {}
        for name, reference in self.histograms.items():
            actual = build_histogram(columns[name], self.spec, reference=reference)
            drift[name] = FeatureDrift(psi(reference, actual), jsd(reference.p, actual.p))
        return drift
