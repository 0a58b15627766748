"""Versioned JSON checkpoints of reconstruction models"""
import json

from typing import Dict

import numpy as np

from drift_trust.exceptions import CheckpointException
from drift_trust.neural.autoencoder import AutoencoderModel
from drift_trust.neural.layers import BaselineStats, ReconstructionModel
from drift_trust.neural.transformer_ae import TransformerAEModel

CHECKPOINT_VERSION = 1
MODEL_KINDS = {
    AutoencoderModel.kind: AutoencoderModel,
    TransformerAEModel.kind: TransformerAEModel,
}


def model_to_dict(model: ReconstructionModel) -> Dict:
    """Checkpoint payload: shapes, flat parameter values, baseline and loss curve"""
    return {
        'version': CHECKPOINT_VERSION,
        'kind': model.kind,
        'architecture': model.architecture(),
        'parameters': {name: {'shape': list(value.shape), 'values': value.ravel().tolist()}
                       for name, value in model.parameters().items()},
        'baseline': None if model.baseline is None else {'mean': model.baseline.mean, 'std': model.baseline.std},
        'loss_curve': list(model.loss_curve),
    }


def model_from_dict(payload: Dict) -> ReconstructionModel:
    """Rebuild a model from a checkpoint payload"""
    if payload.get('version') != CHECKPOINT_VERSION:
        raise CheckpointException(f"Unsupported checkpoint version {payload.get('version')}, "
                                  f'expected {CHECKPOINT_VERSION}')
    kind = payload.get('kind')
    if kind not in MODEL_KINDS:
        raise CheckpointException(f'Unknown model kind {kind}, expected one of {sorted(MODEL_KINDS)}')

    try:
        model = MODEL_KINDS[kind](**payload['architecture'])
        params = model.parameters()
        stored = payload['parameters']
        if set(stored) != set(params):
            raise CheckpointException(f'Checkpoint parameters {sorted(stored)} do not match {kind} '
                                      f'parameters {sorted(params)}')
        for name, value in params.items():
            restored = np.asarray(stored[name]['values'], dtype=float).reshape(stored[name]['shape'])
            if restored.shape != value.shape:
                raise CheckpointException(f'Parameter {name} has shape {restored.shape}, expected {value.shape}')
            value[...] = restored
    except (KeyError, TypeError, ValueError) as exc:
        raise CheckpointException(f'Malformed {kind} checkpoint: {exc}') from exc

    if payload.get('baseline') is not None:
        model.baseline = BaselineStats(float(payload['baseline']['mean']), float(payload['baseline']['std']))
    model.loss_curve = [float(v) for v in payload.get('loss_curve', [])]
    return model


def save_checkpoint(model: ReconstructionModel, path: str) -> None:
    """Write a model checkpoint"""
    with open(path, 'w', encoding='utf-8') as f:
        json.dump(model_to_dict(model), f)


def load_checkpoint(path: str) -> ReconstructionModel:
    """Read a model checkpoint written by save_checkpoint"""
    try:
        with open(path, 'r', encoding='utf-8') as f:
            payload = json.load(f)
    except (OSError, json.JSONDecodeError) as exc:
        raise CheckpointException(f'Cannot read checkpoint {path}: {exc}') from exc
    return model_from_dict(payload)
