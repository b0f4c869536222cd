"""
Sparse DIB: clustering with the Deterministic Information Bottleneck and
simultaneous L1/L2-constrained feature weighting.
"""

from .dib_engine import DibConfig, DibResult, run_dib
from .metrics import adjusted_mutual_information, adjusted_rand_index
from .sparse_engine import SparseDibConfig, SparseDibResult, run_sparse_dib, tune_sparsity

__all__ = [
    'DibConfig',
    'DibResult',
    'SparseDibConfig',
    'SparseDibResult',
    'adjusted_mutual_information',
    'adjusted_rand_index',
    'run_dib',
    'run_sparse_dib',
    'tune_sparsity',
]
