"""SVG plots rendered from a report document alone"""
import os

from typing import Dict, List

import matplotlib
matplotlib.use('Agg')
# pylint: disable=wrong-import-position
import matplotlib.pyplot as plt
import numpy as np

from singer import get_logger

LOGGER = get_logger('drift_trust')

TRUST_PLOT = 'trust_over_batches.svg'
DRIFT_PLOT = 'drift_metrics_over_batches.svg'
CORRELATION_PLOT = 'component_correlation.svg'
CORRELATION_COLUMNS = ('trust', 'drift', 'uncertainty', 'rules', 'error')
SVG_HASH_SALT = 'drift-trust'


def _save(figure, path: str) -> str:
    figure.tight_layout()
    figure.savefig(path, format='svg', metadata={'Date': None})
    plt.close(figure)
    return path


def _nan_for_none(values) -> np.ndarray:
    return np.array([np.nan if v is None else v for v in values], dtype=float)


def plot_trust(document: Dict, path: str) -> str:
    """Trust per batch with the trust threshold and the flagged batches"""
    batches = document['batches']
    index = [b['batch_index'] for b in batches]
    threshold = document['config']['thresholds']['trust']

    figure, ax = plt.subplots(figsize=(8, 4))
    ax.plot(index, [b['trust'] for b in batches], marker='o', label='trust')
    ax.axhline(threshold, color='grey', linestyle='--', label=f'threshold {threshold}')
    drifted = [b['batch_index'] for b in batches if b['drift_injected']]
    if drifted:
        ax.axvspan(min(drifted) - 0.5, max(drifted) + 0.5, color='orange', alpha=0.15, label='drift injected')
    flagged = [b for b in batches if b['flagged']]
    ax.scatter([b['batch_index'] for b in flagged], [b['trust'] for b in flagged], color='red', zorder=3,
               label='flagged')
    ax.set_xlabel('batch')
    ax.set_ylabel('trust score')
    ax.set_ylim(0, 1.05)
    ax.set_xticks(index)
    ax.legend(loc='lower left')
    return _save(figure, path)


def plot_drift_metrics(document: Dict, path: str) -> str:
    """PSI, JSD and reconstruction z-scores per batch"""
    batches = document['batches']
    index = [b['batch_index'] for b in batches]
    signals = [b['signals'] for b in batches]

    figure, (top, bottom) = plt.subplots(2, 1, figsize=(8, 6), sharex=True)
    top.plot(index, [s['psi'] for s in signals], marker='o', label='PSI')
    top.plot(index, [s['jsd'] for s in signals], marker='s', label='JSD')
    top.set_ylabel('statistical drift')
    top.legend(loc='upper left')
    bottom.plot(index, _nan_for_none(s['ae_z'] for s in signals), marker='o', label='AE z')
    bottom.plot(index, _nan_for_none(s['tae_z'] for s in signals), marker='s', label='TAE z')
    bottom.axhline(document['config']['thresholds']['z'], color='grey', linestyle='--', label='z threshold')
    bottom.set_xlabel('batch')
    bottom.set_ylabel('reconstruction z')
    bottom.set_xticks(index)
    bottom.legend(loc='upper left')
    return _save(figure, path)


def component_matrix(document: Dict) -> np.ndarray:
    """Pearson correlation of trust and its components across batches; constant columns give 0"""
    batches = document['batches']
    table = np.array([[b['trust']] + [b['components'][c] for c in CORRELATION_COLUMNS[1:]] for b in batches],
                     dtype=float)
    constant = np.ptp(table, axis=0) == 0
    with np.errstate(divide='ignore', invalid='ignore'):
        matrix = np.nan_to_num(np.atleast_2d(np.corrcoef(table, rowvar=False)), nan=0.0)
    matrix[constant, :] = 0.0
    matrix[:, constant] = 0.0
    return matrix


def plot_component_correlation(document: Dict, path: str) -> str:
    """Correlation matrix heatmap of trust and its components"""
    matrix = component_matrix(document)
    figure, ax = plt.subplots(figsize=(6, 5))
    image = ax.imshow(matrix, vmin=-1, vmax=1, cmap='coolwarm')
    ax.set_xticks(range(len(CORRELATION_COLUMNS)))
    ax.set_yticks(range(len(CORRELATION_COLUMNS)))
    ax.set_xticklabels(CORRELATION_COLUMNS, rotation=45, ha='right')
    ax.set_yticklabels(CORRELATION_COLUMNS)
    for i in range(matrix.shape[0]):
        for j in range(matrix.shape[1]):
            ax.text(j, i, f'{matrix[i, j]:.2f}', ha='center', va='center', fontsize=8)
    figure.colorbar(image, ax=ax)
    return _save(figure, path)


def render_all(document: Dict, out_dir: str) -> List[str]:
    """Write the three plots of a report document into out_dir"""
    os.makedirs(out_dir, exist_ok=True)
    with matplotlib.rc_context({'svg.hashsalt': SVG_HASH_SALT}):
        paths = [
            plot_trust(document, os.path.join(out_dir, TRUST_PLOT)),
            plot_drift_metrics(document, os.path.join(out_dir, DRIFT_PLOT)),
            plot_component_correlation(document, os.path.join(out_dir, CORRELATION_PLOT)),
        ]
    LOGGER.info('Plots written: %s', paths)
    return paths
