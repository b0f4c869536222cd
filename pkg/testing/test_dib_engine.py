import itertools

import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal
from scipy.stats import entropy as scipy_entropy

from sparse_dib.dib_engine import (
    ClusterModel,
    DibConfig,
    assign_step,
    compact_labels,
    dib_score,
    initial_partition,
    mutual_information_yt,
    partition_entropy,
    refine_partition,
    run_dib,
    score_table,
    update_cluster_model,
)
from sparse_dib.exceptions import EmptyCluster, InsufficientPoints
from sparse_dib.info_core import DiscreteDistribution, kl_divergence
from sparse_dib.similarity import default_bandwidths, normalize_columns, similarity_matrix


def random_similarity(n, seed):
    return normalize_columns(-np.random.default_rng(seed).exponential(size=(n, n)))


def two_pairs():
    X = np.array([[0.0], [0.1], [10.0], [10.1]])
    return similarity_matrix(X, [0.5], [1.0])


# -------------------------------
# Cluster model
# -------------------------------
def test_single_cluster_model():
    P = random_similarity(5, 0)
    model = update_cluster_model(P, np.zeros(5, dtype=int))
    assert_allclose(model.prior, [1.0])
    assert_allclose(model.cond[:, 0], P.mean(axis=1))


def test_singleton_clusters_copy_columns():
    P = random_similarity(4, 1)
    model = update_cluster_model(P, np.arange(4))
    assert_allclose(model.prior, np.full(4, 0.25))
    assert_allclose(model.cond, P)


def test_hand_built_two_clusters():
    P = np.array([
        [0.4, 0.3, 0.1, 0.0],
        [0.4, 0.5, 0.1, 0.2],
        [0.1, 0.1, 0.4, 0.3],
        [0.1, 0.1, 0.4, 0.5],
    ])
    model = update_cluster_model(P, np.array([0, 0, 1, 1]))
    assert_allclose(model.prior, [0.5, 0.5])
    assert_allclose(model.cond[:, 0], [0.35, 0.45, 0.1, 0.1])
    assert_allclose(model.cond[:, 1], [0.05, 0.15, 0.35, 0.45])


def test_empty_cluster_rejected():
    with pytest.raises(EmptyCluster) as info:
        update_cluster_model(random_similarity(4, 2), np.array([0, 0, 2, 2]), k=3)
    assert info.value.cluster == 1


# -------------------------------
# Scores and assignment
# -------------------------------
def test_score_of_matching_column_is_log_prior():
    P = random_similarity(5, 3)
    model = update_cluster_model(P, np.arange(5))
    for j in range(5):
        assert_allclose(dib_score(P, j, j, model, beta=2.5), np.log(0.2))


def test_equidistant_point_scores_equally():
    P = np.column_stack([[0.5, 0.1, 0.4], [0.1, 0.5, 0.4], [0.3, 0.3, 0.4]])
    model = ClusterModel(prior=np.array([0.5, 0.5]), cond=P[:, :2])
    assert_allclose(dib_score(P, 2, 0, model, 1.0), dib_score(P, 2, 1, model, 1.0))


def test_score_table_matches_direct_formula():
    P = random_similarity(3, 4)
    model = update_cluster_model(P, np.array([0, 1, 1]))
    table = score_table(P, model, beta=1.7)
    for j in range(3):
        for t in range(2):
            direct = np.log(model.prior[t]) - 1.7 * kl_divergence(
                DiscreteDistribution(P[:, j]), DiscreteDistribution(model.cond[:, t]))
            assert_allclose(table[j, t], direct, atol=1e-12)
            assert_allclose(dib_score(P, j, t, model, 1.7), direct, atol=1e-12)


def test_two_block_similarity_recovers_blocks():
    block = np.full((3, 3), 1 / 3)
    P = normalize_columns(np.log(np.kron(np.eye(2), block) + 1e-9))
    truth = np.array([0, 0, 0, 1, 1, 1])
    model = update_cluster_model(P, truth)
    assert_array_equal(assign_step(P, model, beta=1.0), truth)
    swapped = update_cluster_model(P, 1 - truth)
    assert_array_equal(assign_step(P, swapped, beta=1.0), 1 - truth)


def test_small_beta_sends_everything_to_largest_prior():
    P = random_similarity(4, 5)
    model = update_cluster_model(P, np.array([0, 1, 1, 1]))
    assert_array_equal(assign_step(P, model, beta=1e-300), np.ones(4, dtype=int))

    model = update_cluster_model(P, np.array([0, 0, 1, 1]))
    assert_array_equal(assign_step(P, model, beta=1e-300), np.zeros(4, dtype=int))


def test_identical_columns_go_to_one_cluster():
    P = np.full((4, 4), 0.25)
    model = update_cluster_model(P, np.array([0, 0, 1, 1]))
    assert_array_equal(assign_step(P, model, beta=5.0), np.zeros(4, dtype=int))


# -------------------------------
# I(Y;T)
# -------------------------------
def test_mutual_information_single_cluster_is_zero():
    assert_allclose(mutual_information_yt(random_similarity(6, 6), np.zeros(6, dtype=int)), 0.0,
                    atol=1e-15)


def test_mutual_information_of_identity_is_log_n():
    n = 5
    P = normalize_columns(np.log(np.eye(n) + 1e-300), floor=1e-12)
    assert_allclose(mutual_information_yt(P, np.arange(n)), np.log(n), atol=1e-9)


def test_mutual_information_ignores_label_names():
    P = random_similarity(6, 7)
    labels = np.array([0, 1, 1, 2, 0, 2])
    assert_allclose(mutual_information_yt(P, labels), mutual_information_yt(P, (labels + 1) % 3))
    assert_allclose(mutual_information_yt(P, np.array([0, 0, 4, 4, 7, 7])),
                    mutual_information_yt(P, compact_labels(np.array([0, 0, 4, 4, 7, 7]))))


# -------------------------------
# Full runs
# -------------------------------
def test_initial_partition_has_no_empty_cluster():
    rng = np.random.default_rng(8)
    for n, k in [(3, 3), (10, 4), (50, 7)]:
        labels = initial_partition(n, k, rng)
        assert np.bincount(labels, minlength=k).min() > 0


def test_single_cluster_run_is_trivial():
    result = run_dib(random_similarity(5, 9), DibConfig(k=1))
    assert_array_equal(result.partition, np.zeros(5, dtype=int))
    assert result.mi == 0.0
    assert result.ht == 0.0


def test_insufficient_points():
    with pytest.raises(InsufficientPoints):
        run_dib(random_similarity(3, 10), DibConfig(k=4))


def test_two_pairs_recovered():
    result = run_dib(two_pairs(), DibConfig(k=2, restarts=10, seed=0))
    labels = result.partition
    assert labels[0] == labels[1]
    assert labels[2] == labels[3]
    assert labels[0] != labels[2]
    assert abs(result.mi - np.log(2)) < 0.05


def test_duplicates_are_co_assigned():
    rng = np.random.default_rng(11)
    base = rng.normal(size=(12, 2))
    X = np.vstack([base, base[:4]])
    P = similarity_matrix(X, default_bandwidths(X), [1.0, 1.0])
    result = run_dib(P, DibConfig(k=3, restarts=5, seed=3))
    assert_array_equal(result.partition[:4], result.partition[12:])


def test_run_is_reproducible():
    P = random_similarity(20, 12)
    cfg = DibConfig(k=3, restarts=4, seed=42)
    first, second = run_dib(P, cfg), run_dib(P, cfg)
    assert_array_equal(first.partition, second.partition)
    assert first.objective_trace == second.objective_trace
    assert first.restart == second.restart


def test_objective_never_increases_at_fixed_beta():
    for seed in range(100):
        X = np.random.default_rng(seed).normal(size=(20, 2))
        P = similarity_matrix(X, default_bandwidths(X), [1.0, 1.0])
        result = run_dib(P, DibConfig(k=4, restarts=3, seed=seed))
        trace, flags = result.objective_trace, result.retry_flags
        assert len(trace) == len(flags) == result.iterations + 1
        for i in range(1, len(trace)):
            if not flags[i]:
                assert trace[i] <= trace[i - 1]


def test_result_fields_are_consistent():
    P = random_similarity(15, 13)
    result = run_dib(P, DibConfig(k=3, restarts=3, seed=1))
    assert result.k_final == len(np.unique(result.partition))
    assert result.model.k == result.k_final
    assert_allclose(result.mi, mutual_information_yt(P, result.partition))
    assert result.beta_final >= 1.0


def best_two_partition_mi(P):
    n = P.shape[0]
    best = 0.0
    for tail in itertools.product([0, 1], repeat=n - 1):
        labels = np.array((0,) + tail)
        if labels.max() == 0:
            continue
        best = max(best, mutual_information_yt(P, labels))
    return best


def test_best_restart_matches_exhaustive_search():
    for instance in range(50):
        X = np.random.default_rng(instance).normal(size=(8, 3))
        P = similarity_matrix(X, default_bandwidths(X), np.ones(3))
        result = run_dib(P, DibConfig(k=2, restarts=63, seed=instance))
        assert_allclose(result.mi, best_two_partition_mi(P), atol=1e-9)


def test_entropy_of_result_matches_label_proportions():
    for seed in range(20):
        X = np.random.default_rng(100 + seed).normal(size=(30, 2))
        P = similarity_matrix(X, default_bandwidths(X), [1.0, 1.0])
        result = run_dib(P, DibConfig(k=3, restarts=3, seed=seed))
        counts = np.bincount(result.partition)
        assert abs(result.ht - scipy_entropy(counts[counts > 0] / counts.sum())) <= 1e-12


def test_relabelling_leaves_scores_and_partition_unchanged():
    P = random_similarity(12, 14)
    result = run_dib(P, DibConfig(k=3, restarts=4, seed=5))
    labels = result.partition
    perm = np.roll(np.arange(result.k_final), 1)
    relabelled = perm[labels]

    assert_allclose(mutual_information_yt(P, relabelled), result.mi, atol=1e-12)
    assert_allclose(partition_entropy(relabelled), result.ht, atol=1e-12)
    assert_array_equal(labels[:, None] == labels[None, :],
                       relabelled[:, None] == relabelled[None, :])

    step = assign_step(P, update_cluster_model(P, labels), beta=2.0)
    relabelled_step = assign_step(P, update_cluster_model(P, relabelled), beta=2.0)
    assert_array_equal(relabelled_step, perm[step])


# -------------------------------
# Refinement
# -------------------------------
def test_refinement_leaves_assignment_fixed_point():
    P = two_pairs()
    labels = np.array([0, 1, 0, 1])
    # the assignment step alone cannot leave this partition, even at large beta
    assert_array_equal(assign_step(P, update_cluster_model(P, labels), beta=1e3), labels)

    refined, moves = refine_partition(P, labels)
    assert moves >= 1
    assert refined[0] == refined[1]
    assert refined[2] == refined[3]
    assert refined[0] != refined[2]
    assert abs(mutual_information_yt(P, refined) - np.log(2)) < 0.05


def test_refinement_raises_mi_without_emptying_clusters():
    for seed in range(20):
        P = random_similarity(12, 200 + seed)
        labels = initial_partition(12, 3, np.random.default_rng(seed))
        refined, moves = refine_partition(P, labels)
        assert np.bincount(refined, minlength=3).min() > 0
        assert mutual_information_yt(P, refined) >= mutual_information_yt(P, labels)
        if moves == 0:
            assert_array_equal(refined, labels)


def test_refinement_moves_duplicates_together():
    rng = np.random.default_rng(15)
    base = rng.normal(size=(10, 2))
    X = np.vstack([base, base[:3]])
    P = similarity_matrix(X, default_bandwidths(X), [1.0, 1.0])
    labels = np.arange(13) % 2
    labels[10:] = labels[:3]
    refined, _ = refine_partition(P, labels)
    assert_array_equal(refined[:3], refined[10:])


def test_refinement_of_single_cluster_is_a_no_op():
    refined, moves = refine_partition(random_similarity(5, 16), np.zeros(5, dtype=int))
    assert moves == 0
    assert_array_equal(refined, np.zeros(5, dtype=int))


def test_refinement_can_be_switched_off():
    P = two_pairs()
    result = run_dib(P, DibConfig(k=2, restarts=1, seed=0, refine=False))
    assert result.refine_moves == 0
    assert result.converged
    model = update_cluster_model(P, result.partition)
    assert_array_equal(assign_step(P, model, result.beta_final), result.partition)


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
