"""End-to-end monitoring: train on clean data, then score every batch of the stream"""
import os

from dataclasses import asdict, dataclass, field
from typing import Dict, List, Optional

import numpy as np

from joblib import Parallel, delayed, parallel_backend
from singer import get_logger

from drift_trust import classifier as gbdt
from drift_trust.data_model import Batch, Dataset, FeatureKind, partition_batches
from drift_trust.exceptions import BatchProcessingException, DriftTrustException
from drift_trust.neural import checkpoint
from drift_trust.neural.layers import ReconstructionModel
from drift_trust.neural.scoring import drift_delta
from drift_trust.neural.training import train_autoencoder, train_transformer_ae
from drift_trust.preprocess import (
    ENGINEERED_FEATURES,
    FittedTransform,
    PreparedData,
    apply_features,
    apply_labels,
    apply_transform,
    engineer_features,
    fit_transform,
    prepare,
    smote_resample,
    train_test_split
)
from drift_trust.rules import Rule, evaluate_rules, load_rules
from drift_trust.seeding import derive_seed
from drift_trust.stat_drift import ReferenceProfile
from drift_trust.synthgen import apply_drift, generate_dataset
from drift_trust.trust import BatchSignals, Calibration, TrustReport, build_report

LOGGER = get_logger('drift_trust')

AUTOENCODER_CHECKPOINT = 'autoencoder.json'
TRANSFORMER_AE_CHECKPOINT = 'transformer_ae.json'
CLASSIFIER_CHECKPOINT = 'classifier.json'


# pylint: disable=too-many-instance-attributes
@dataclass
class TrainedModels:
    """Everything fitted on the clean training split"""
    prepared: PreparedData
    transform: FittedTransform
    classifier: gbdt.GBDTModel
    autoencoder: ReconstructionModel
    transformer_ae: ReconstructionModel
    profile: ReferenceProfile
    rules: List[Rule]
    medians: Dict[str, float]
    summary: Dict = field(default_factory=dict)


@dataclass
class MonitoringResult:
    """Per-batch trust reports plus the model summary and the preprocessing report"""
    reports: List[TrustReport]
    calibration: Calibration
    models: TrainedModels
    summary: Dict
    preprocessing: Dict

    @property
    def flags(self) -> List[bool]:
        """Hybrid drift flag per batch"""
        return [r.flagged for r in self.reports]


def _columns(dataset: Dataset, names) -> Dict[str, np.ndarray]:
    columns = {}
    for name in names:
        values = dataset.frame[name].to_numpy(dtype=float)
        columns[name] = values[~np.isnan(values)]
    return columns


def _model_summary(model: ReconstructionModel) -> Dict:
    return {
        'loss_curve': list(model.loss_curve),
        'epochs_run': len(model.loss_curve) - 1,
        'baseline': asdict(model.baseline),
    }


def preprocessing_report(prepared: PreparedData, transform: FittedTransform, medians: Dict[str, float]) -> Dict:
    """Rows removed per rule, clip counts, dropped features and every imputation value"""
    cleaning = prepared.cleaning
    return {
        'rows_in': cleaning.rows_in,
        'rows_out': cleaning.rows_out,
        'removed_by_rule': dict(cleaning.removed_by_rule),
        'clipped': dict(cleaning.clipped),
        'clip_bounds': dict(cleaning.clip_bounds),
        'dropped_features': list(transform.dropped),
        'imputation_values': {name: s.fill for name, s in transform.scaling.items()},
        'engineered_imputations': dict(prepared.engineering.imputed),
        'engineered_medians': dict(medians),
    }


def train_models(config, dataset: Dataset = None) -> TrainedModels:
    """
    Preprocess, split, resample and fit the classifier, the autoencoder and the transformer autoencoder

    The reconstruction models train concurrently on the pre-resampling training matrix.

    Args:
        config: RunConfig
        dataset: raw dataset; generated from config when not given

    Returns:
        TrainedModels
    """
    if dataset is None:
        dataset = generate_dataset(config.generator_config())

    prepared = prepare(dataset)
    rules = load_rules(config.rules, prepared.dataset.schema)
    train, test = train_test_split(prepared.dataset, config.train_fraction, derive_seed(config.seed, 'split'))

    transform = fit_transform(train)
    X_train, y_train = apply_transform(transform, train)
    X_test, y_test = apply_transform(transform, test)
    X_resampled, y_resampled = smote_resample(X_train, y_train, config.smote_k_neighbors,
                                              derive_seed(config.seed, 'smote'))

    model = gbdt.fit(X_resampled, y_resampled, config.classifier, derive_seed(config.seed, 'classifier'))

    jobs = [(train_autoencoder, 'autoencoder'), (train_transformer_ae, 'transformer_ae')]
    with parallel_backend('threading', n_jobs=config.n_jobs(len(jobs))):
        autoencoder, transformer_ae = Parallel()(
            delayed(trainer)(X_train, config.training_config(component)) for trainer, component in jobs)

    numeric = [name for name in transform.features
               if prepared.dataset.schema.kind_of(name) == FeatureKind.NUMERIC]
    profile = ReferenceProfile.fit(_columns(train, numeric), config.binning)
    medians = {name: float(train.frame[name].median()) for name, *_ in ENGINEERED_FEATURES}

    priors = np.bincount(y_train, minlength=len(transform.classes)) / len(y_train)
    accuracy, _ = gbdt.batch_error(model, X_test, y_test)
    importance = gbdt.permutation_importance(model, X_test, y_test, derive_seed(config.seed, 'importance'))
    summary = {
        'classifier': {
            'classes': list(transform.classes),
            'held_out_accuracy': accuracy,
            'majority_prior': float(priors.max()),
            'training_priors': dict(zip(transform.classes, priors.tolist())),
            'log_loss_curve': list(model.log_loss_curve_),
            'feature_importance': dict(zip(transform.features, importance.tolist())),
        },
        'autoencoder': _model_summary(autoencoder),
        'transformer_ae': _model_summary(transformer_ae),
        'features': list(transform.features),
        'rows': {'train': len(train), 'test': len(test), 'resampled': len(y_resampled)},
    }
    LOGGER.info('Classifier held-out accuracy %.4f (majority prior %.4f)', accuracy, priors.max())
    return TrainedModels(prepared, transform, model, autoencoder, transformer_ae, profile, rules, medians, summary)


def batch_signals(models: TrainedModels, batch: Batch, headline: str) -> BatchSignals:
    """Raw signals of one (possibly drifted) batch"""
    engineered, _ = engineer_features(batch, models.medians)
    drift = models.profile.compare(_columns(engineered, models.profile.features))
    X = apply_features(models.transform, engineered)
    y = apply_labels(models.transform, engineered)

    ae = drift_delta(models.autoencoder, X)
    tae = drift_delta(models.transformer_ae, X)
    accuracy, error = gbdt.batch_error(models.classifier, X, y)
    rules = evaluate_rules(engineered, models.rules)

    return BatchSignals(
        batch_index=batch.index,
        psi=drift[headline].psi,
        jsd=drift[headline].jsd,
        ae_error=ae.batch_mean,
        ae_delta=ae.delta,
        ae_z=ae.z,
        tae_error=tae.batch_mean,
        tae_delta=tae.delta,
        tae_z=tae.z,
        uncertainty=gbdt.batch_uncertainty(models.classifier, X),
        rule_rate=rules.rate,
        accuracy=accuracy,
        error=error,
        rows=len(batch),
        feature_drift={name: asdict(d) for name, d in drift.items()},
        rule_counts=rules.counts,
    )


def _guarded_batch_signals(models: TrainedModels, batch: Batch, headline: str) -> BatchSignals:
    try:
        return batch_signals(models, batch, headline)
    except DriftTrustException as exc:
        raise BatchProcessingException(batch.index, str(exc)) from exc


def write_checkpoints(models: TrainedModels, output_dir: str) -> None:
    """Model checkpoints next to the report"""
    os.makedirs(output_dir, exist_ok=True)
    checkpoint.save_checkpoint(models.autoencoder, os.path.join(output_dir, AUTOENCODER_CHECKPOINT))
    checkpoint.save_checkpoint(models.transformer_ae, os.path.join(output_dir, TRANSFORMER_AE_CHECKPOINT))
    gbdt.save_model(models.classifier, os.path.join(output_dir, CLASSIFIER_CHECKPOINT))


def monitor(config, models: TrainedModels) -> MonitoringResult:
    """Partition the stream, inject drift, and score every batch against the trained models"""
    batches = partition_batches(models.prepared.dataset, config.k)
    feature = config.drift.feature
    scales = {feature: models.transform.raw_std(feature)} if feature in models.transform.features else {}
    batches = apply_drift(batches, config.drift, scales)

    headline = feature if feature in models.profile.features else models.prepared.dataset.schema.target
    with parallel_backend('threading', n_jobs=config.n_jobs(len(batches))):
        signals = Parallel()(delayed(_guarded_batch_signals)(models, batch, headline) for batch in batches)

    calibration = Calibration.from_signals(signals, config.calibration_batches)
    drifted = set(config.drift.drifted_batches)
    reports = [build_report(s, calibration, config.weights, config.thresholds, config.drift_source,
                            s.batch_index in drifted)
               for s in signals]
    for report in reports:
        LOGGER.info('Batch %d: trust %.4f, TAE z %.2f, flagged %s',
                    report.batch_index, report.trust, report.signals.tae_z, report.flagged)

    summary = dict(models.summary)
    summary['calibration'] = asdict(calibration)
    summary['headline_feature'] = headline
    summary['drifted_batches'] = sorted(drifted)
    return MonitoringResult(reports, calibration, models, summary,
                            preprocessing_report(models.prepared, models.transform, models.medians))


def run_monitoring(config, dataset: Dataset = None, output_dir: Optional[str] = None) -> MonitoringResult:
    """
    Train on the clean data and compute a trust report per batch

    Args:
        config: RunConfig
        dataset: raw dataset; generated from config when not given
        output_dir: directory for model checkpoints, none written when not given

    Returns:
        MonitoringResult with one TrustReport per batch, in batch order
    """
    models = train_models(config, dataset)
    if output_dir:
        write_checkpoints(models, output_dir)
    return monitor(config, models)
