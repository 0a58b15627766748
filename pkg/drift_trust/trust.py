"""Batch signals, drift normalization and the composite trust score"""
import math

from dataclasses import asdict, dataclass, field
from enum import Enum, unique
from typing import Dict, Iterable, Optional, Sequence, Tuple

import numpy as np

from drift_trust.exceptions import CalibrationMissingException, ComponentRangeException, InvalidConfigException

PSI_SATURATION = 0.5
Z_SATURATION = 6.0
DEFAULT_CALIBRATION_BATCHES = (1, 2)


@unique
class DriftSource(str, Enum):
    """Which reconstruction model feeds the drift component"""

    TAE = 'tae'
    AE = 'ae'
    BOTH = 'both'

    @staticmethod
    def list():
        """List of supported drift source values"""
        return list(map(lambda c: c.value, DriftSource))


@dataclass(frozen=True)
class TrustWeights:
    """Non-negative component weights, normalized to sum to 1 at construction"""
    alpha: float = 0.25
    beta: float = 0.25
    gamma: float = 0.25
    delta: float = 0.25

    def __post_init__(self):
        raw = self.as_tuple()
        if any(not math.isfinite(w) or w < 0 for w in raw):
            raise InvalidConfigException(f'Trust weights must be finite and non-negative, got {list(raw)}')
        total = sum(raw)
        if total <= 0:
            raise InvalidConfigException('Trust weights must have a positive sum')
        for name, value in zip(('alpha', 'beta', 'gamma', 'delta'), raw):
            object.__setattr__(self, name, value / total)

    @classmethod
    def from_sequence(cls, values: Sequence[float]) -> 'TrustWeights':
        """Weights from [alpha, beta, gamma, delta]"""
        if len(values) != 4:
            raise InvalidConfigException(f'Exactly four trust weights are required, got {len(values)}')
        return cls(*(float(v) for v in values))

    def as_tuple(self) -> Tuple[float, float, float, float]:
        """(alpha, beta, gamma, delta)"""
        return self.alpha, self.beta, self.gamma, self.delta


@dataclass(frozen=True)
class Thresholds:
    """Flag thresholds of the detectors"""
    trust: float = 0.7
    z: float = 3.0
    psi: float = 0.2
    jsd: float = 0.1


# pylint: disable=too-many-instance-attributes
@dataclass(frozen=True)
class BatchSignals:
    """Raw per-batch signals; the headline psi/jsd are those of the drift-target feature"""
    batch_index: int
    psi: float
    jsd: float
    ae_error: float
    ae_delta: float
    ae_z: float
    tae_error: float
    tae_delta: float
    tae_z: float
    uncertainty: float
    rule_rate: float
    accuracy: float
    error: float
    rows: int = 0
    feature_drift: Dict[str, Dict[str, float]] = field(default_factory=dict)
    rule_counts: Dict[str, int] = field(default_factory=dict)


def _finite_mean(values: Iterable[float]) -> float:
    finite = [v for v in values if math.isfinite(v)]
    return float(np.mean(finite)) if finite else 0.0


@dataclass(frozen=True)
class Calibration:
    """Clean-batch means subtracted from the drift signals before normalization"""
    psi: float = 0.0
    jsd: float = 0.0
    ae_z: float = 0.0
    tae_z: float = 0.0
    batches: Tuple[int, ...] = ()

    @classmethod
    def from_signals(cls, signals: Sequence[BatchSignals],
                     batches: Sequence[int] = DEFAULT_CALIBRATION_BATCHES) -> 'Calibration':
        """Means over the designated clean batches"""
        clean = [s for s in signals if s.batch_index in set(batches)]
        if not clean:
            raise CalibrationMissingException(f'None of the calibration batches {list(batches)} were monitored')
        return cls(psi=_finite_mean(s.psi for s in clean), jsd=_finite_mean(s.jsd for s in clean),
                   ae_z=_finite_mean(s.ae_z for s in clean), tae_z=_finite_mean(s.tae_z for s in clean),
                   batches=tuple(sorted(set(batches))))


@dataclass(frozen=True)
class Components:
    """Normalized trust components, each in [0, 1], plus the terms of the drift component"""
    drift: float
    uncertainty: float
    rules: float
    error: float
    drift_terms: Dict[str, float] = field(default_factory=dict)

    def as_tuple(self) -> Tuple[float, float, float, float]:
        """(drift, uncertainty, rules, error)"""
        return self.drift, self.uncertainty, self.rules, self.error


def _clamp(value: float) -> float:
    return min(max(value, 0.0), 1.0)


def psi_term(psi: float, baseline: float = 0.0) -> float:
    """PSI above the clean baseline over 0.5, clamped to [0, 1]"""
    return _clamp(max(psi - baseline, 0.0) / PSI_SATURATION)


def z_term(z: float, baseline: float = 0.0) -> float:
    """z above the clean baseline over 6, clamped to [0, 1]"""
    return min(max(z - baseline, 0.0) / Z_SATURATION, 1.0)


def reconstruction_z(signals, source: DriftSource) -> float:
    """
    z-score of the configured reconstruction source; the mean of both for DriftSource.BOTH

    Works on BatchSignals and on Calibration alike, so a batch and its clean
    baseline are always combined the same way.
    """
    source = DriftSource(source)
    if source == DriftSource.TAE:
        return signals.tae_z
    if source == DriftSource.AE:
        return signals.ae_z
    return (signals.ae_z + signals.tae_z) / 2.0


def normalize_components(signals: BatchSignals, calibration: Optional[Calibration],
                         drift_source: DriftSource = DriftSource.TAE) -> Components:
    """
    Map raw signals onto [0, 1]

    Drift is the mean of the PSI term, the JSD term and the reconstruction term,
    each taken above its clean-batch calibration mean. Uncertainty, rule rate and
    error rate are already in [0, 1] and pass through.
    """
    if calibration is None:
        raise CalibrationMissingException('Drift normalization needs clean-batch calibration')

    terms = {
        'psi': psi_term(signals.psi, calibration.psi),
        'jsd': _clamp(signals.jsd - calibration.jsd),
        'reconstruction': z_term(reconstruction_z(signals, drift_source),
                                 reconstruction_z(calibration, drift_source)),
    }

    return Components(drift=float(np.mean(list(terms.values()))), uncertainty=_clamp(signals.uncertainty),
                      rules=_clamp(signals.rule_rate), error=_clamp(signals.error), drift_terms=terms)


def trust_score(components: Components, weights: TrustWeights) -> float:
    """1 - (alpha D + beta U + gamma R + delta E), clamped to [0, 1]"""
    values = components.as_tuple()
    outside = [v for v in values if not 0.0 <= v <= 1.0]
    if outside:
        raise ComponentRangeException(f'Trust components must lie in [0, 1], got {list(values)}')
    penalty = sum(w * c for w, c in zip(weights.as_tuple(), values))
    return _clamp(1.0 - penalty)


# pylint: disable=too-many-instance-attributes
@dataclass(frozen=True)
class TrustReport:
    """Trust verdict of one batch"""
    batch_index: int
    components: Components
    weights: TrustWeights
    trust: float
    flagged: bool
    flag_reasons: Tuple[str, ...]
    signals: BatchSignals
    drifted: bool = False

    def to_dict(self) -> Dict:
        """Nested dict in report field order"""
        return {
            'batch_index': self.batch_index,
            'trust': self.trust,
            'flagged': self.flagged,
            'flag_reasons': list(self.flag_reasons),
            'drift_injected': self.drifted,
            'components': {'drift': self.components.drift, 'uncertainty': self.components.uncertainty,
                           'rules': self.components.rules, 'error': self.components.error,
                           'drift_terms': dict(self.components.drift_terms)},
            'weights': dict(zip(('alpha', 'beta', 'gamma', 'delta'), self.weights.as_tuple())),
            'signals': asdict(self.signals),
        }


def build_report(signals: BatchSignals, calibration: Calibration, weights: TrustWeights,
                 thresholds: Thresholds = None, drift_source: DriftSource = DriftSource.TAE,
                 drifted: bool = False) -> TrustReport:
    """Normalize, score and flag one batch"""
    thresholds = thresholds or Thresholds()
    components = normalize_components(signals, calibration, drift_source)
    trust = trust_score(components, weights)
    reasons = []
    if trust < thresholds.trust:
        reasons.append('trust')
    if reconstruction_z(signals, drift_source) > thresholds.z:
        reasons.append('reconstruction')
    return TrustReport(signals.batch_index, components, weights, trust, bool(reasons), tuple(reasons), signals,
                       drifted)
