"""Detector benchmarking: per-batch flags against ground truth, averaged over seeded trials"""
from dataclasses import dataclass, field
from enum import Enum, unique
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from singer import get_logger

from drift_trust.exceptions import InvalidConfigException, ShapeMismatchException, UnknownDetectorException
from drift_trust.monitoring import run_monitoring
from drift_trust.trust import Thresholds

LOGGER = get_logger('drift_trust')

BENCHMARK_COLUMNS = ('detector', 'accuracy', 'latency_batches', 'f1')


@unique
class DetectorKind(str, Enum):
    """Enum of benchmarked detectors"""

    STATISTICAL = 'statistical'
    AE_ONLY = 'ae_only'
    TAE_ONLY = 'tae_only'
    HYBRID = 'hybrid'

    @staticmethod
    def list():
        """List of supported detector values"""
        return list(map(lambda c: c.value, DetectorKind))


@unique
class Direction(str, Enum):
    """Which side of the threshold raises a flag"""

    ABOVE = 'above'
    BELOW = 'below'


# pylint: disable=too-many-instance-attributes
@dataclass(frozen=True)
class BenchmarkResult:
    """Confusion counts and detection metrics of one detector on one run"""
    detector: Optional[str]
    flags: Tuple[bool, ...]
    truth: Tuple[int, ...]
    accuracy: float
    latency: Optional[float]
    f1: float
    tp: int = 0
    fp: int = 0
    fn: int = 0
    tn: int = 0


def flags_from_scores(scores: Iterable[float], threshold: float, direction: Direction = Direction.ABOVE) -> List[bool]:
    """Flag every score strictly beyond the threshold in the given direction"""
    scores = np.asarray(list(scores), dtype=float)
    if Direction(direction) == Direction.ABOVE:
        return (scores > threshold).tolist()
    return (scores < threshold).tolist()


def detection_metrics(flags: Sequence[bool], truth: Iterable[int], k: int = None,
                      detector: str = None) -> BenchmarkResult:
    """
    Per-batch confusion of flags against the drifted-batch set

    Args:
        flags: one flag per batch, batch 1 first
        truth: 1-based indices of the drifted batches
        k: expected batch count, checked against len(flags) when given
        detector: name recorded on the result

    Returns:
        BenchmarkResult; F1 is 1.0 when there is nothing to find and nothing was flagged,
        latency is None when drift is never flagged
    """
    flags = [bool(f) for f in flags]
    if k is not None and len(flags) != k:
        raise ShapeMismatchException(f'Expected {k} flags, got {len(flags)}')
    truth = tuple(sorted(set(truth)))
    outside = [i for i in truth if not 1 <= i <= len(flags)]
    if outside:
        raise ShapeMismatchException(f'Drifted batches {outside} outside 1..{len(flags)}')

    drifted = [i + 1 in truth for i in range(len(flags))]
    tp = sum(f and d for f, d in zip(flags, drifted))
    fp = sum(f and not d for f, d in zip(flags, drifted))
    fn = sum(d and not f for f, d in zip(flags, drifted))
    tn = len(flags) - tp - fp - fn

    accuracy = (tp + tn) / len(flags) if flags else 0.0
    f1 = 1.0 if tp + fp + fn == 0 else 2 * tp / (2 * tp + fp + fn)

    latency = None
    if truth:
        first = truth[0]
        detected = [i for i in range(first, len(flags) + 1) if flags[i - 1]]
        if detected:
            latency = float(detected[0] - first)

    return BenchmarkResult(detector, tuple(flags), truth, accuracy, latency, f1, tp, fp, fn, tn)


def detector_flags(reports, kind: DetectorKind, thresholds: Thresholds = None) -> List[bool]:
    """Per-batch flags of one detector read off a run's trust reports"""
    thresholds = thresholds or Thresholds()
    kind = DetectorKind(kind)
    signals = [r.signals for r in reports]
    if kind == DetectorKind.STATISTICAL:
        psi = flags_from_scores([s.psi for s in signals], thresholds.psi)
        jsd = flags_from_scores([s.jsd for s in signals], thresholds.jsd)
        return [a or b for a, b in zip(psi, jsd)]
    if kind == DetectorKind.AE_ONLY:
        return flags_from_scores([s.ae_z for s in signals], thresholds.z)
    if kind == DetectorKind.TAE_ONLY:
        return flags_from_scores([s.tae_z for s in signals], thresholds.z)
    return [r.flagged for r in reports]


@dataclass
class BenchmarkTable:
    """Mean metrics per detector over trials, plus every trial's result"""
    rows: List[Dict]
    seeds: List[int]
    trials: Dict[str, List[BenchmarkResult]] = field(default_factory=dict)


def _mean_latency(results: Sequence[BenchmarkResult]) -> Optional[float]:
    defined = [r.latency for r in results if r.latency is not None]
    return float(np.mean(defined)) if defined else None


def summarize(results: Dict[str, List[BenchmarkResult]], seeds: List[int]) -> BenchmarkTable:
    """Reduce per-trial results to one row per detector, in detector order"""
    rows = []
    for detector, trials in results.items():
        rows.append({
            'detector': detector,
            'accuracy': float(np.mean([r.accuracy for r in trials])),
            'latency_batches': _mean_latency(trials),
            'f1': float(np.mean([r.f1 for r in trials])),
        })
    return BenchmarkTable(rows, list(seeds), results)


def compare_detectors(config, trials: int = None, run=None) -> BenchmarkTable:
    """
    Run the full pipeline once per seed and score every configured detector on it

    Seeds are config.seed, config.seed + 1, ... Trials run one after another; the
    batches inside each trial are processed in parallel.

    Args:
        config: RunConfig
        trials: number of seeds, config.trials when not given
        run: monitoring entry point, run_monitoring when not given

    Returns:
        BenchmarkTable
    """
    run = run or run_monitoring

    trials = config.trials if trials is None else trials
    if trials < 1:
        raise InvalidConfigException(f"At least one trial is required, got {trials}")
    detectors = [DetectorKind(d) for d in config.detectors]
    if not detectors:
        raise UnknownDetectorException(f'No detectors selected. Valid kinds: {DetectorKind.list()}')

    seeds = [config.seed + trial for trial in range(trials)]
    results = {d.value: [] for d in detectors}
    for seed in seeds:
        trial_config = config.with_seed(seed)
        outcome = run(trial_config)
        truth = trial_config.drift.drifted_batches
        for detector in detectors:
            flags = detector_flags(outcome.reports, detector, trial_config.thresholds)
            results[detector.value].append(detection_metrics(flags, truth, trial_config.k, detector.value))
        LOGGER.info('Trial seed %d: %s', seed,
                    {d: round(r[-1].f1, 4) for d, r in results.items()})
    return summarize(results, seeds)
