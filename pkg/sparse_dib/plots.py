"""
Standalone SVG figures: entropy-vs-u trajectory and selected feature weights.
"""

import logging

import matplotlib
matplotlib.use('Agg')  # Must set before importing pyplot
import matplotlib.pyplot as plt
import numpy as np

logger = logging.getLogger(__name__)

# Fixed salt and no date stamp keep reruns byte-identical
matplotlib.rcParams['svg.hashsalt'] = 'sparse-dib'
SVG_METADATA = {'Date': None}


def _save(fig, path):
    fig.savefig(path, format='svg', metadata=SVG_METADATA)
    plt.close(fig)
    logger.info("Wrote %s", path)


def plot_trajectory(trajectory, path):
    """Normalised weight entropy against u, with the plateau shaded."""
    u = [pt.u for pt in trajectory.points]
    entropy = [pt.normalized_entropy for pt in trajectory.points]

    fig, ax = plt.subplots(figsize=(7, 4))
    ax.plot(u, entropy, marker='o', markersize=3, color='#3498db', label='Normalised entropy')

    if trajectory.plateau is not None:
        ax.axvspan(trajectory.plateau.u_low, trajectory.plateau.u_high,
                   color='#2ecc71', alpha=0.25,
                   label=f'Plateau ({len(trajectory.plateau.support)} features)')
    if trajectory.closest_to_target is not None:
        best = trajectory.closest_to_target
        ax.scatter([best.u], [best.normalized_entropy], color='black', zorder=3,
                   label=f'Closest to target ({best.nonzero_count} nonzero)')

    ax.set_xlabel('Sparsity parameter u')
    ax.set_ylabel('Normalised entropy of weights')
    ax.set_ylim(0, 1.05)
    ax.legend(loc='lower right')
    fig.tight_layout()
    _save(fig, path)


def plot_weights(weights, names, path):
    """Bar chart of the nonzero weights, largest first."""
    weights = np.asarray(weights, dtype=float)
    selected = [i for i in np.argsort(-weights, kind='stable') if weights[i] > 1e-12]

    fig, ax = plt.subplots(figsize=(max(6, 0.25 * len(selected)), 4))
    ax.bar(range(len(selected)), weights[selected], color='#e74c3c')
    ax.set_xticks(range(len(selected)))
    ax.set_xticklabels([names[i] for i in selected], rotation=90, fontsize=7)
    ax.set_ylabel('Weight')
    ax.set_title(f'Selected features ({len(selected)} of {len(weights)})')
    fig.tight_layout()
    _save(fig, path)
