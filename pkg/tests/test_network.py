"""Network sampling: reproducibility, exact identities, degenerate graphs."""

import numpy as np
import pytest

from hawkes_meanfield.errors import ContractError, ParameterError
from hawkes_meanfield.network import (
    NetworkConfiguration,
    build_complementary_network,
    compute_weight_statistics,
    network_from_dict,
    network_to_dict,
    sample_network,
)


def test_same_seed_reproduces_matrices():
    a = sample_network(80, 0.8, 0.5, seed=123)
    b = sample_network(80, 0.8, 0.5, seed=123)
    np.testing.assert_array_equal(a.adjacency, b.adjacency)
    np.testing.assert_array_equal(a.signs, b.signs)


def test_different_seeds_differ():
    a = sample_network(80, 0.8, 0.5, seed=123)
    b = sample_network(80, 0.8, 0.5, seed=124)
    assert not np.array_equal(a.adjacency, b.adjacency)


def test_edge_density_near_q():
    # n^2 = 40000 Bernoulli(0.3) draws, SE of the mean = sqrt(pq)/200
    net = sample_network(200, 0.5, 0.3, seed=5)
    density = net.adjacency.mean()
    se = np.sqrt(0.3 * 0.7) / 200
    assert abs(density - 0.3) < 4 * se


def test_sign_mean_near_2p_minus_1():
    net = sample_network(400, 0.8, 0.5, seed=17)
    se = np.sqrt(4 * 0.8 * 0.2 / 400)
    assert abs(net.signs.mean() - 0.6) < 4 * se


def test_self_loops_are_sampled():
    net = sample_network(60, 0.5, 1.0, seed=2)
    assert net.adjacency.all(), "q=1 must give the complete graph with loops"


def test_degenerate_edge_probabilities():
    assert sample_network(30, 0.5, 0.0, seed=3).adjacency.sum() == 0
    assert sample_network(30, 0.5, 1.0, seed=3).adjacency.sum() == 900


def test_matrices_are_immutable():
    net = sample_network(10, 0.5, 0.5, seed=1)
    with pytest.raises(ValueError):
        net.adjacency[0, 0] = 1
    with pytest.raises(ValueError):
        net.signs[0] = -1


def test_invalid_parameters_rejected():
    with pytest.raises(ParameterError):
        sample_network(0, 0.5, 0.5, seed=1)
    with pytest.raises(ParameterError):
        sample_network(10, 1.5, 0.5, seed=1)
    with pytest.raises(ParameterError):
        sample_network(10, 0.5, -0.1, seed=1)


def test_explicit_matrices_validated():
    with pytest.raises(ContractError):
        NetworkConfiguration(n=3, p=0.5, q=0.5,
                             adjacency=np.zeros((2, 3), dtype=np.uint8),
                             signs=np.ones(3, dtype=np.int8))
    with pytest.raises(ContractError):
        NetworkConfiguration(n=3, p=0.5, q=0.5,
                             adjacency=np.zeros((3, 3), dtype=np.uint8),
                             signs=np.array([1, 0, -1], dtype=np.int8))
    with pytest.raises(ContractError):
        NetworkConfiguration(n=2, p=0.5, q=0.5,
                             adjacency=np.full((2, 2), 2, dtype=np.uint8),
                             signs=np.ones(2, dtype=np.int8))


def test_signed_rows_matches_definition():
    net = sample_network(25, 0.7, 0.4, seed=9)
    theta = 1.0 / 25
    expected = theta * np.diag(net.signs.astype(float)) @ net.adjacency
    np.testing.assert_allclose(net.signed_rows(theta), expected)


def test_weight_decomposition_is_exact():
    # U_j V_ji - (2p-1) q = U_j (V_ji - q) + q (U_j - (2p-1)) termwise,
    # so the three scaled sums satisfy w_n_i = q w_n + w_tilde identically
    for seed, p, q in [(1, 0.8, 0.5), (2, 0.3, 0.9), (3, 0.5, 0.2)]:
        stats = compute_weight_statistics(sample_network(150, p, q, seed))
        np.testing.assert_allclose(stats.w_n_i, q * stats.w_n + stats.w_tilde,
                                   atol=1e-12)


def test_mean_square_weight_matches_exact_expectation():
    # E[(W^{N,i})^2] = q^2 4p(1-p) + q(1-q) holds at every N, not just in
    # the limit; check the across-seed average against the closed form
    p, q, n = 0.8, 0.5, 64
    target = q * q * 4 * p * (1 - p) + q * (1 - q)
    values = [compute_weight_statistics(sample_network(n, p, q, s)).mean_square_w
              for s in range(300)]
    values = np.asarray(values)
    se = values.std(ddof=1) / np.sqrt(len(values))
    assert abs(values.mean() - target) < 3 * se


def test_complementary_halves_partition_the_vertices():
    net = build_complementary_network(64, seed=11)
    col0 = np.flatnonzero(net.adjacency[:, 0])
    col1 = np.flatnonzero(net.adjacency[:, 1])
    assert len(col0) == len(col1) == 32
    assert len(np.intersect1d(col0, col1)) == 0
    assert len(np.union1d(col0, col1)) == 64


def test_complementary_sign_multisets_match():
    net = build_complementary_network(64, seed=11)
    col0 = np.flatnonzero(net.adjacency[:, 0])
    col1 = np.flatnonzero(net.adjacency[:, 1])
    assert sorted(net.signs[col0]) == sorted(net.signs[col1])
    stats = compute_weight_statistics(net)
    assert stats.w_n_i[0] == stats.w_n_i[1]


def test_complementary_sign_residual_follows_parity():
    # equal half sums force total 0 when n/2 is even, +-2 when n/2 is odd
    assert build_complementary_network(12, seed=4).sign_sum == 0
    assert abs(build_complementary_network(10, seed=4).sign_sum) == 2
    assert build_complementary_network(500, seed=4).sign_sum == 0


def test_complementary_requires_even_n():
    with pytest.raises(ParameterError):
        build_complementary_network(7, seed=1)
    with pytest.raises(ParameterError):
        build_complementary_network(0, seed=1)


def test_complementary_remaining_columns_are_random():
    net = build_complementary_network(200, seed=8)
    rest = net.adjacency[:, 2:]
    se = np.sqrt(0.25 / rest.size)
    assert abs(rest.mean() - 0.5) < 4 * se


def test_roundtrip_by_seed():
    net = sample_network(30, 0.7, 0.4, seed=42)
    back = network_from_dict(network_to_dict(net))
    assert back.kind == "erdos_renyi"
    np.testing.assert_array_equal(back.adjacency, net.adjacency)
    np.testing.assert_array_equal(back.signs, net.signs)


def test_roundtrip_with_matrices():
    net = sample_network(30, 0.7, 0.4, seed=42)
    data = network_to_dict(net, include_matrices=True)
    data["seed"] = None
    back = network_from_dict(data)
    assert back.kind == "explicit"
    np.testing.assert_array_equal(back.adjacency, net.adjacency)


def test_roundtrip_complementary():
    net = build_complementary_network(20, seed=6)
    back = network_from_dict(network_to_dict(net))
    assert back.kind == "complementary"
    np.testing.assert_array_equal(back.adjacency, net.adjacency)
    np.testing.assert_array_equal(back.signs, net.signs)


def test_serialized_network_needs_seed_or_matrices():
    with pytest.raises(ContractError):
        network_from_dict({"kind": "erdos_renyi", "n": 5, "p": 0.5, "q": 0.5,
                           "seed": None})
