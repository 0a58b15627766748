"""Mini-batch momentum SGD with early stopping for reconstruction models"""
from dataclasses import asdict, dataclass
from typing import Dict

import numpy as np

from singer import get_logger

from drift_trust.exceptions import DegenerateDatasetException, InvalidConfigException, TrainingDivergedException
from drift_trust.neural.autoencoder import DEFAULT_HIDDEN, AutoencoderModel
from drift_trust.neural.layers import BaselineStats, ReconstructionModel
from drift_trust.neural.scoring import reconstruction_error
from drift_trust.neural.transformer_ae import DEFAULT_D_MODEL, DEFAULT_FF_WIDTH, TransformerAEModel

LOGGER = get_logger('drift_trust')

MIN_TRAINING_ROWS = 32


# pylint: disable=too-many-instance-attributes
@dataclass(frozen=True)
class TrainConfig:
    """Optimizer and early-stopping settings"""
    epochs: int = 200
    batch_size: int = 64
    learning_rate: float = 1e-3
    momentum: float = 0.9
    seed: int = 0
    patience: int = 20
    validation_fraction: float = 0.1

    def __post_init__(self):
        errors = []
        if self.epochs <= 0:
            errors.append(f'epochs must be positive, got {self.epochs}')
        if self.batch_size <= 0:
            errors.append(f'batch_size must be positive, got {self.batch_size}')
        if not self.learning_rate > 0:
            errors.append(f'learning_rate must be positive, got {self.learning_rate}')
        if not 0 <= self.momentum < 1:
            errors.append(f'momentum must be in [0, 1), got {self.momentum}')
        if self.patience <= 0:
            errors.append(f'patience must be positive, got {self.patience}')
        if not 0 <= self.validation_fraction < 1:
            errors.append(f'validation_fraction must be in [0, 1), got {self.validation_fraction}')
        if errors:
            raise InvalidConfigException('\n'.join(errors))

    def to_dict(self) -> Dict:
        """Plain dict of the settings"""
        return asdict(self)


def _check_finite(model: ReconstructionModel, loss: float, epoch: int):
    if not np.isfinite(loss):
        raise TrainingDivergedException(
            f'{model.kind} loss became {loss} in epoch {epoch}, lower the learning rate')
    for name, value in model.parameters().items():
        if not np.isfinite(value).all():
            raise TrainingDivergedException(
                f'{model.kind} parameter {name} became non-finite in epoch {epoch}, lower the learning rate')


def fit_model(model: ReconstructionModel, X: np.ndarray, cfg: TrainConfig) -> ReconstructionModel:
    """
    Train a reconstruction model in place on the mean squared reconstruction loss

    A validation_fraction holdout drives early stopping with cfg.patience epochs of
    patience; the parameters of the best validation epoch are restored at the end.
    loss_curve[0] is the training loss before the first update, loss_curve[e] the
    training loss after epoch e. The baseline error statistics are then computed
    over every row of X and frozen on the model.

    Args:
        model: freshly initialized model
        X: standardized training matrix
        cfg: optimizer settings

    Returns:
        the trained model
    """
    X = model.check_width(X)
    if len(X) < MIN_TRAINING_ROWS:
        raise DegenerateDatasetException(f'{model.kind} needs at least {MIN_TRAINING_ROWS} rows, got {len(X)}')

    rng = np.random.default_rng(cfg.seed)
    order = rng.permutation(len(X))
    n_valid = int(len(X) * cfg.validation_fraction)
    X_valid, X_train = X[order[:n_valid]], X[order[n_valid:]]

    params = model.parameters()
    velocity = {name: np.zeros_like(value) for name, value in params.items()}

    curve = [model.loss(X_train)]
    best_valid = model.loss(X_valid) if n_valid else np.inf
    best_params = {name: value.copy() for name, value in params.items()}
    best_epoch, stale = 0, 0

    for epoch in range(1, cfg.epochs + 1):
        shuffled = X_train[rng.permutation(len(X_train))]
        for start in range(0, len(shuffled), cfg.batch_size):
            _, grads = model.loss_and_gradients(shuffled[start:start + cfg.batch_size])
            for name, value in params.items():
                velocity[name] *= cfg.momentum
                velocity[name] -= cfg.learning_rate * grads[name]
                value += velocity[name]

        train_loss = model.loss(X_train)
        _check_finite(model, train_loss, epoch)
        curve.append(train_loss)

        if n_valid:
            valid_loss = model.loss(X_valid)
            LOGGER.debug('%s epoch %d: train loss %.6f, validation loss %.6f',
                         model.kind, epoch, train_loss, valid_loss)
            if valid_loss < best_valid:
                best_valid, best_epoch, stale = valid_loss, epoch, 0
                best_params = {name: value.copy() for name, value in params.items()}
            else:
                stale += 1
                if stale >= cfg.patience:
                    LOGGER.info('%s stopped early after epoch %d, best epoch %d', model.kind, epoch, best_epoch)
                    break
        else:
            LOGGER.debug('%s epoch %d: train loss %.6f', model.kind, epoch, train_loss)
            best_epoch = epoch

    if n_valid:
        for name, value in params.items():
            value[...] = best_params[name]

    errors, _ = reconstruction_error(model, X)
    model.loss_curve = curve
    model.baseline = BaselineStats(mean=float(errors.mean()), std=float(errors.std()))
    LOGGER.info('%s trained: loss %.6f -> %.6f, baseline error %.6f +- %.6f',
                model.kind, curve[0], curve[-1], model.baseline.mean, model.baseline.std)
    return model


def train_autoencoder(X: np.ndarray, cfg: TrainConfig = None, hidden=DEFAULT_HIDDEN) -> AutoencoderModel:
    """Initialize from cfg.seed and train a dense autoencoder on X"""
    cfg = cfg or TrainConfig()
    X = np.asarray(X, dtype=float)
    return fit_model(AutoencoderModel(X.shape[1], hidden=hidden, seed=cfg.seed), X, cfg)


def train_transformer_ae(X: np.ndarray, cfg: TrainConfig = None, d_model: int = DEFAULT_D_MODEL,
                         ff_width: int = DEFAULT_FF_WIDTH, hidden=DEFAULT_HIDDEN) -> TransformerAEModel:
    """Initialize from cfg.seed and train a transformer autoencoder on X"""
    cfg = cfg or TrainConfig()
    X = np.asarray(X, dtype=float)
    model = TransformerAEModel(X.shape[1], d_model=d_model, ff_width=ff_width, hidden=hidden, seed=cfg.seed)
    return fit_model(model, X, cfg)
