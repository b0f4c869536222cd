"""
External cluster-evaluation indices: Adjusted Rand Index and Adjusted
Mutual Information (exact hypergeometric expectation), plus selected-feature
precision/recall for the benchmark harness.

The indices come from sklearn.metrics; this module adds the label-vector
checks and the conventions for degenerate tables.
"""

from dataclasses import dataclass
from math import comb

import numpy as np
from sklearn.metrics import adjusted_mutual_info_score, adjusted_rand_score, mutual_info_score
from sklearn.metrics.cluster import contingency_matrix
from sklearn.metrics.cluster import expected_mutual_information as _expected_mi

from .exceptions import LengthMismatch

AVERAGE_METHODS = ('min', 'geometric', 'arithmetic', 'max')


@dataclass(frozen=True)
class ContingencyTable:
    counts: np.ndarray
    row_labels: np.ndarray
    col_labels: np.ndarray

    @property
    def n(self):
        return int(self.counts.sum())

    @property
    def row_sums(self):
        return self.counts.sum(axis=1)

    @property
    def col_sums(self):
        return self.counts.sum(axis=0)

    def transpose(self):
        return ContingencyTable(self.counts.T, self.col_labels, self.row_labels)

    @property
    def is_matching(self):
        """True when the two labelings agree up to renaming of labels."""
        nonzero = self.counts > 0
        return (self.counts.shape[0] == self.counts.shape[1]
                and bool(np.all(nonzero.sum(axis=0) == 1))
                and bool(np.all(nonzero.sum(axis=1) == 1)))

    def labelings(self):
        """A pair of label vectors (row index, column index) with this table."""
        rows, cols = np.nonzero(self.counts)
        repeats = self.counts[rows, cols]
        return np.repeat(rows, repeats), np.repeat(cols, repeats)


def contingency(a, b):
    """Counts of (a_i, b_i) pairs over the distinct labels of each side."""
    a = np.asarray(a).ravel()
    b = np.asarray(b).ravel()
    if a.shape[0] != b.shape[0]:
        raise LengthMismatch(f"Label vectors differ in length: {a.shape[0]} vs {b.shape[0]}",
                             left=int(a.shape[0]), right=int(b.shape[0]))
    if a.shape[0] == 0:
        raise LengthMismatch("Label vectors must not be empty")

    counts = contingency_matrix(a, b).astype(np.int64)
    return ContingencyTable(counts=counts, row_labels=np.unique(a), col_labels=np.unique(b))


def _rand_denominator_vanishes(t):
    n = t.n
    if n < 2:
        return True
    sum_a = sum(comb(int(c), 2) for c in t.row_sums)
    sum_b = sum(comb(int(c), 2) for c in t.col_sums)
    # max index == expected index, cleared of the C(n, 2) divisor
    return (sum_a + sum_b) * comb(n, 2) == 2 * sum_a * sum_b


def ari(t):
    """Hubert-Arabie adjusted Rand index; 0 when the denominator vanishes."""
    if _rand_denominator_vanishes(t):
        return 0.0
    return float(adjusted_rand_score(*t.labelings()))


def expected_mutual_information(t):
    """E[MI] under the hypergeometric model of random labelings with fixed marginals."""
    return float(_expected_mi(t.counts, t.n))


def table_mutual_information(t):
    return float(mutual_info_score(None, None, contingency=t.counts))


def ami(t, average_method='arithmetic'):
    """Adjusted mutual information with the chosen entropy normalizer."""
    if average_method not in AVERAGE_METHODS:
        raise ValueError(f"average method must be one of {AVERAGE_METHODS}")
    if t.is_matching:
        return 1.0
    if min(t.counts.shape) == 1:
        # one side is a single cluster: no information to adjust
        return 0.0
    return float(adjusted_mutual_info_score(*t.labelings(), average_method=average_method))


def adjusted_rand_index(a, b):
    return ari(contingency(a, b))


def adjusted_mutual_information(a, b, average_method='arithmetic'):
    return ami(contingency(a, b), average_method)


def selection_scores(selected, informative):
    """Precision and recall of a selected feature set against the true informative set."""
    selected = set(int(i) for i in selected)
    informative = set(int(i) for i in informative)
    hits = len(selected & informative)
    precision = hits / len(selected) if selected else 0.0
    recall = hits / len(informative) if informative else 0.0
    return precision, recall
