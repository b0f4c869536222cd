"""
Sparse DIB command-line interface.
Commands: cluster, tune, simulate, eval, generate.
"""

# -------------------------------
# 1. Imports & Constants
# -------------------------------
import functools
import itertools
import json
import logging
import os
import sys
import time

import click
import numpy as np
import pandas as pd

from .config import Settings, setup_logging
from .datagen import HIGH_SEPARATION, MixtureSpec, generate
from .dib_engine import DibConfig
from .exceptions import NonConvergence, SparseDibError
from .files import (
    ensure_dir,
    read_bandwidths,
    read_data_csv,
    read_json,
    read_labels_csv,
    to_json,
    write_csv,
    write_json,
)
from .metrics import adjusted_mutual_information, adjusted_rand_index, selection_scores
from .similarity import as_data_matrix
from .sparse_engine import (
    SparseDibConfig,
    feature_scales,
    run_sparse_dib,
    standardize,
    tune_sparsity,
)

logger = logging.getLogger(__name__)

EXIT_INPUT_ERROR = 2
EXIT_NON_CONVERGENCE = 3
DEFAULT_U_GRID = '0.4:10:0.2'


# -------------------------------
# 2. Helper Functions
# -------------------------------
def _settings():
    return Settings.from_env()


def _load_echo(ctx, param, value):
    """Use the config block of an earlier summary as this run's defaults."""
    if value is None:
        return
    payload = read_json(value)
    echoed = payload.get('config', payload)
    ctx.default_map = {**(ctx.default_map or {}), **echoed}


def _report(error):
    payload = error.to_dict() if isinstance(error, SparseDibError) else {
        'error': type(error).__name__, 'message': str(error)}
    click.echo(json.dumps(payload, sort_keys=True, default=str), err=True)


def handle_errors(fn):
    """Map package errors onto the documented exit codes."""
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        ctx = click.get_current_context()
        try:
            return fn(*args, **kwargs)
        except NonConvergence as e:
            _report(e)
            ctx.exit(EXIT_NON_CONVERGENCE)
        except ValueError as e:
            _report(e)
            ctx.exit(EXIT_INPUT_ERROR)
    return wrapper


def parse_u_grid(text):
    """'min:max:step' or a comma-separated list of values."""
    try:
        if ':' in text:
            low, high, step = (float(part) for part in text.split(':'))
            if step <= 0 or high < low:
                raise ValueError
            count = int(round((high - low) / step)) + 1
            return [round(low + i * step, 10) for i in range(count)]
        return [float(part) for part in text.split(',') if part.strip()]
    except ValueError:
        raise click.BadParameter(f"Cannot read u grid {text!r}; use min:max:step or a,b,c")


def _sparse_config(params, k=None, seed=None):
    settings = _settings()
    dib = DibConfig(
        k=params['k'] if k is None else k,
        beta0=params['beta0'],
        restarts=params['restarts'],
        seed=params['seed'] if seed is None else seed,
    )
    return SparseDibConfig(
        u=params['u'],
        eps=params['eps'],
        max_outer=params['max_outer'],
        init='warm_start' if params['weights_init'] == 'warm' else 'uniform',
        dib=dib,
        kmeans_restarts=params['kmeans_restarts'],
        floor=settings.probability_floor,
        strict=params['strict'],
    )


def _prepare(X, params):
    X = as_data_matrix(X)
    return standardize(X) if params['standardize'] == 'on' else X


def _load_inputs(params):
    """Data, feature names, bandwidths in the units of the returned data, and the scales used."""
    X, names = read_data_csv(params['input'], params['header'])
    X = as_data_matrix(X)
    bandwidths = read_bandwidths(params['bandwidths'], X.shape[1])
    scales = None
    if params['standardize'] == 'on':
        scales = feature_scales(X)
        X = standardize(X)
        if bandwidths is not None:
            # bandwidth files are in raw feature units
            bandwidths = bandwidths / scales
    return X, names, bandwidths, scales


def _config_echo(ctx):
    return {key: value for key, value in sorted(ctx.params.items()) if key != 'output_dir'}


# -------------------------------
# 3. Shared Options
# -------------------------------
def algorithm_options(fn):
    options = [
        click.option('--config', type=click.Path(exists=True, dir_okay=False), is_eager=True,
                     expose_value=False, callback=_load_echo,
                     help='Rerun from the config block of an earlier summary JSON.'),
        click.option('--output-dir', type=click.Path(file_okay=False),
                     default=lambda: _settings().output_dir, show_default='SPARSE_DIB_OUTPUT_DIR'),
        click.option('--seed', type=int, default=lambda: _settings().seed,
                     show_default='SPARSE_DIB_SEED'),
        click.option('--u', type=float, default=2.0, show_default=True, help='L1 budget on the weights.'),
        click.option('--weights-init', type=click.Choice(['uniform', 'warm']), default='uniform',
                     show_default=True),
        click.option('--restarts', type=int, default=10, show_default=True, help='DIB random restarts.'),
        click.option('--beta0', type=float, default=1.0, show_default=True),
        click.option('--eps', type=float, default=1e-5, show_default=True),
        click.option('--max-outer', type=int, default=50, show_default=True),
        click.option('--kmeans-restarts', type=int, default=10, show_default=True),
        click.option('--standardize', type=click.Choice(['on', 'off']), default='on', show_default=True),
        click.option('--strict', is_flag=True, help='Treat non-convergence as failure (exit 3).'),
    ]
    for option in reversed(options):
        fn = option(fn)
    return fn


def input_options(fn):
    options = [
        click.option('--input', type=click.Path(exists=True, dir_okay=False), required=True),
        click.option('--header/--no-header', default=True, show_default=True),
        click.option('--bandwidths', default='auto', show_default=True,
                     help="'auto' or a CSV with one bandwidth per feature."),
        click.option('--k', type=int, default=3, show_default=True),
        click.option('--plot', is_flag=True, help='Also write an SVG figure.'),
    ]
    for option in reversed(options):
        fn = option(fn)
    return fn


# -------------------------------
# 4. Commands
# -------------------------------
@click.group()
@click.pass_context
def cli(ctx):
    """Sparse Deterministic Information Bottleneck clustering."""
    try:
        setup_logging(_settings())
    except SparseDibError as e:
        _report(e)
        ctx.exit(EXIT_INPUT_ERROR)


@cli.command()
@input_options
@algorithm_options
@click.pass_context
@handle_errors
def cluster(ctx, **params):
    """Cluster a CSV with Sparse DIB and write partition, weights and summary."""
    X, names, bandwidths, scales = _load_inputs(params)
    cfg = _sparse_config(params)
    result = run_sparse_dib(X, cfg, bandwidths)

    out = ensure_dir(params['output_dir'])
    write_csv(pd.DataFrame({
        'observation': np.arange(1, X.shape[0] + 1),
        'cluster': result.partition + 1,
    }), os.path.join(out, 'partition.csv'))
    write_csv(pd.DataFrame({
        'feature': names,
        'weight': result.weights.values,
        'mi': result.per_feature_mi,
    }), os.path.join(out, 'weights.csv'))

    dib = result.dib
    write_json({
        'config': _config_echo(ctx),
        'n': X.shape[0],
        'p': X.shape[1],
        'init': cfg.init,
        'seed': params['seed'],
        'outer_iterations': result.outer_iterations,
        'converged': result.converged,
        'weight_changes': result.weight_changes,
        'nonzero_count': result.nonzero_count,
        'weight_entropy': result.weight_entropy,
        'selected_features': [names[i] for i in result.weights.support],
        'bandwidths': result.bandwidths,
        'feature_scales': scales,
        'dib': {
            'mi': dib.mi,
            'ht': dib.ht,
            'beta_final': dib.beta_final,
            'iterations': dib.iterations,
            'restart': dib.restart,
            'k_final': dib.k_final,
            'collapsed': dib.collapsed,
            'objective_trace': dib.objective_trace,
            'retry_flags': dib.retry_flags,
            'refine_moves': dib.refine_moves,
        },
    }, os.path.join(out, 'summary.json'))

    if params['plot']:
        from .plots import plot_weights
        plot_weights(result.weights.values, names, os.path.join(out, 'weights.svg'))
    logger.info("Cluster run finished: %d clusters, %d selected features",
                dib.k_final, result.nonzero_count)


@cli.command()
@input_options
@algorithm_options
@click.option('--u-grid', default=DEFAULT_U_GRID, show_default=True, help='min:max:step or a,b,c')
@click.option('--target-count', type=int, default=None,
              help='Known number of informative features to mark on the trajectory.')
@click.option('--chain/--no-chain', default=True, show_default=True,
              help='Warm-start each u from the previous solution.')
@click.pass_context
@handle_errors
def tune(ctx, **params):
    """Sweep u and report the normalised weight-entropy trajectory and its plateau."""
    grid = parse_u_grid(params['u_grid'])
    X, names, bandwidths, _ = _load_inputs(params)
    cfg = _sparse_config(params)
    trajectory = tune_sparsity(X, cfg, grid, bandwidths, chain=params['chain'],
                               target_count=params['target_count'])

    out = ensure_dir(params['output_dir'])
    write_csv(pd.DataFrame({
        'u': [pt.u for pt in trajectory.points],
        'normalized_entropy': [pt.normalized_entropy for pt in trajectory.points],
        'nonzero_count': [pt.nonzero_count for pt in trajectory.points],
        'support_hash': [pt.support_hash for pt in trajectory.points],
        'converged': [pt.converged for pt in trajectory.points],
        'budget_active': [pt.budget_active for pt in trajectory.points],
    }), os.path.join(out, 'trajectory.csv'))

    plateau = trajectory.plateau
    closest = trajectory.closest_to_target
    write_json({
        'config': _config_echo(ctx),
        'grid_size': len(grid),
        'plateau': 'none' if plateau is None else {
            'u_low': plateau.u_low,
            'u_high': plateau.u_high,
            'length': plateau.length,
            'support': [names[i] for i in plateau.support],
            'support_indices': list(plateau.support),
        },
        'closest_to_target': None if closest is None else {
            'u': closest.u,
            'nonzero_count': closest.nonzero_count,
            'normalized_entropy': closest.normalized_entropy,
        },
        'monotonicity_violations': trajectory.monotonicity_violations,
    }, os.path.join(out, 'plateau.json'))

    if params['plot']:
        from .plots import plot_trajectory
        plot_trajectory(trajectory, os.path.join(out, 'trajectory.svg'))


@cli.command()
@algorithm_options
@click.option('--n', type=int, default=200, show_default=True)
@click.option('--p', 'p_values', type=int, multiple=True, default=(100,), show_default=True)
@click.option('--q-ratio', 'q_values', type=float, multiple=True, default=(0.2,), show_default=True)
@click.option('--k', 'k_values', type=int, multiple=True, default=(3,), show_default=True)
@click.option('--balance', type=click.Choice(['balanced', 'unbalanced']), multiple=True,
              default=('balanced',), show_default=True)
@click.option('--shape', type=click.Choice(['spherical', 'elliptical']), multiple=True,
              default=('spherical',), show_default=True)
@click.option('--separation', type=float, default=HIGH_SEPARATION, show_default=True)
@click.option('--replicates', type=int, default=3, show_default=True)
@click.pass_context
@handle_errors
def simulate(ctx, **params):
    """Generate benchmark datasets over a settings grid and score Sparse DIB on each."""
    settings = list(itertools.product(params['p_values'], params['q_values'], params['k_values'],
                                      params['balance'], params['shape']))
    rows, runtimes = [], []
    for setting, (p, q_ratio, k, balance, shape) in enumerate(settings, start=1):
        for replicate in range(1, params['replicates'] + 1):
            seed = int(np.random.SeedSequence([params['seed'], setting, replicate]).generate_state(1)[0])
            spec = MixtureSpec(n=params['n'], p=p, q_ratio=q_ratio, k=k, balance=balance,
                               shape=shape, separation=params['separation'], seed=seed)
            dataset = generate(spec)

            started = time.perf_counter()
            result = run_sparse_dib(_prepare(dataset.data, params),
                                    _sparse_config(params, k=k, seed=seed))
            elapsed = time.perf_counter() - started

            precision, recall = selection_scores(result.weights.support, dataset.informative)
            rows.append({
                'setting': setting, 'replicate': replicate,
                'n': spec.n, 'p': p, 'q_ratio': q_ratio, 'k': k,
                'balance': balance, 'shape': shape, 'separation': spec.separation, 'seed': seed,
                'ari': adjusted_rand_index(dataset.labels, result.partition),
                'ami': adjusted_mutual_information(dataset.labels, result.partition),
                'precision': precision, 'recall': recall,
                'nonzero_count': result.nonzero_count,
                'outer_iterations': result.outer_iterations,
                'converged': result.converged,
            })
            runtimes.append({'setting': setting, 'replicate': replicate,
                             'runtime_seconds': round(elapsed, 3)})
            logger.info("Setting %d replicate %d: ARI %.3f", setting, replicate, rows[-1]['ari'])

    results = pd.DataFrame(rows).sort_values(['setting', 'replicate'], kind='stable')
    out = ensure_dir(params['output_dir'])
    write_csv(results, os.path.join(out, 'results.csv'))
    write_csv(pd.DataFrame(runtimes), os.path.join(out, 'runtimes.csv'))

    medians = results.groupby('setting')[['ari', 'ami']].median()
    write_json({
        'config': _config_echo(ctx),
        'settings': len(settings),
        'rows': len(results),
        'median_ari': {str(s): v for s, v in medians['ari'].items()},
        'median_ami': {str(s): v for s, v in medians['ami'].items()},
    }, os.path.join(out, 'summary.json'))


@cli.command('eval')
@click.argument('labels_a', type=click.Path(exists=True, dir_okay=False))
@click.argument('labels_b', type=click.Path(exists=True, dir_okay=False))
@click.option('--header/--no-header', default=True, show_default=True)
@click.option('--average-method', type=click.Choice(['min', 'geometric', 'arithmetic', 'max']),
              default='arithmetic', show_default=True)
@handle_errors
def evaluate(labels_a, labels_b, header, average_method):
    """Print ARI and AMI between two label files as JSON."""
    a = read_labels_csv(labels_a, header)
    b = read_labels_csv(labels_b, header)
    scores = {
        'ari': adjusted_rand_index(a, b),
        'ami': adjusted_mutual_information(a, b, average_method),
    }
    click.echo(to_json(scores))


@cli.command('generate')
@click.option('--config', type=click.Path(exists=True, dir_okay=False), is_eager=True,
              expose_value=False, callback=_load_echo)
@click.option('--output-dir', type=click.Path(file_okay=False),
              default=lambda: _settings().output_dir)
@click.option('--n', type=int, default=200, show_default=True)
@click.option('--p', type=int, default=100, show_default=True)
@click.option('--q-ratio', type=float, default=0.05, show_default=True)
@click.option('--k', type=int, default=3, show_default=True)
@click.option('--balance', type=click.Choice(['balanced', 'unbalanced']), default='balanced')
@click.option('--shape', type=click.Choice(['spherical', 'elliptical']), default='spherical')
@click.option('--separation', type=float, default=HIGH_SEPARATION, show_default=True)
@click.option('--seed', type=int, default=lambda: _settings().seed)
@click.option('--shuffle-columns', is_flag=True)
@click.pass_context
@handle_errors
def generate_command(ctx, **params):
    """Write a synthetic mixture dataset, its labels and a metadata sidecar."""
    spec = MixtureSpec(n=params['n'], p=params['p'], q_ratio=params['q_ratio'], k=params['k'],
                       balance=params['balance'], shape=params['shape'],
                       separation=params['separation'], seed=params['seed'],
                       shuffle_columns=params['shuffle_columns'])
    dataset = generate(spec)

    out = ensure_dir(params['output_dir'])
    columns = [f"x{j + 1}" for j in range(spec.p)]
    write_csv(pd.DataFrame(dataset.data, columns=columns), os.path.join(out, 'data.csv'))
    write_csv(pd.DataFrame({
        'observation': np.arange(1, spec.n + 1),
        'cluster': dataset.labels + 1,
    }), os.path.join(out, 'labels.csv'))
    write_json({'config': _config_echo(ctx), **dataset.metadata()},
               os.path.join(out, 'metadata.json'))


def main():
    cli(prog_name='sparse-dib')


if __name__ == '__main__':
    sys.exit(main())
