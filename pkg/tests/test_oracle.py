"""Unit tests for the dense reference implementations.

The oracle module is the measuring stick for the tensor-network code, so
these tests pin it against hand-computable cases and against the
permanent-based route, which shares nothing with density-matrix evolution.
"""

import itertools

import numpy as np
import pytest

from mns import ResourceLimitError
from mns.iqp import IQPCircuit, NoiseSpec, parse_iqp_circuit, random_iqp_circuit
from mns.linalg import haar_unitary, is_unitary
from mns.mps import one_site_gate, two_site_gate
from mns.oracle import (
    apply_channel,
    apply_gates_dense,
    embed_unitary,
    empirical_distribution,
    exact_bs_probability,
    exact_lossy_bs_distribution,
    exact_noisy_iqp_distribution,
    iqp_layer_phase_vector,
    loss_channel_kraus,
    total_variation_distance,
    write_distribution_csv,
)
from mns.photonic import (
    LossyInputSpec,
    beamsplitter_gate,
    lossy_fock_density,
    transfer_matrix,
    worst_case_gatelist,
)


# ---------------------------------------------------------------------------
# Dense embedding


def test_embed_unitary_matches_kron() -> None:
    u = haar_unitary(2, seed=0)
    dims = (2, 3)
    np.testing.assert_allclose(embed_unitary(u, (0,), dims), np.kron(u, np.eye(3)), atol=1e-14)
    v = haar_unitary(3, seed=1)
    np.testing.assert_allclose(embed_unitary(v, (1,), dims), np.kron(np.eye(2), v), atol=1e-14)


def test_embed_unitary_two_site_ordering() -> None:
    # embedding on (1, 0) must equal embedding the index-swapped operator
    # on (0, 1)
    u = haar_unitary(4, seed=2)
    dims = (2, 2)
    swapped = u.reshape(2, 2, 2, 2).transpose(1, 0, 3, 2).reshape(4, 4)
    np.testing.assert_allclose(
        embed_unitary(u, (1, 0), dims), embed_unitary(swapped, (0, 1), dims), atol=1e-14
    )


def test_embed_unitary_preserves_unitarity() -> None:
    u = haar_unitary(6, seed=3)
    out = embed_unitary(u, (0, 2), (2, 2, 3))
    assert is_unitary(out, tol=1e-12)


def test_apply_gates_dense_simple() -> None:
    # a single X on qubit 1 of |00> gives |01>
    x = np.array([[0.0, 1.0], [1.0, 0.0]])
    vec = np.zeros(4)
    vec[0] = 1.0
    out = apply_gates_dense(vec, [one_site_gate(x, 1)], (2, 2))
    expected = np.zeros(4)
    expected[1] = 1.0  # site 0 is the most significant index
    np.testing.assert_allclose(out, expected, atol=1e-14)


def test_apply_gates_dense_rejects_transfer_only() -> None:
    g = two_site_gate(None, (0, 1), transfer=np.eye(2))
    with pytest.raises(ValueError):
        apply_gates_dense(np.zeros(4), [g], (2, 2))


# ---------------------------------------------------------------------------
# Loss channel


@pytest.mark.parametrize("eta", [0.0, 0.3, 0.7, 1.0])
def test_loss_channel_is_trace_preserving(eta: float) -> None:
    d = 6
    kraus = loss_channel_kraus(eta, d)
    acc = sum(k.conj().T @ k for k in kraus)
    np.testing.assert_allclose(acc, np.eye(d), atol=1e-12)


def test_loss_channel_on_fock_state() -> None:
    # |n><n| through the loss channel is the binomial mixture
    n, eta, d = 4, 0.6, 6
    rho = np.zeros((d, d), dtype=complex)
    rho[n, n] = 1.0
    out = np.zeros_like(rho)
    for k in loss_channel_kraus(eta, d):
        out += k @ rho @ k.conj().T
    np.testing.assert_allclose(out[: n + 1, : n + 1], lossy_fock_density(n, eta), atol=1e-12)


def test_apply_channel_acts_on_one_site() -> None:
    dims = (2, 2)
    rho = np.zeros((4, 4), dtype=complex)
    rho[3, 3] = 1.0  # |11><11|
    kraus = loss_channel_kraus(0.5, 2)
    out = apply_channel(rho, kraus, 1, dims)
    # second mode decays to a 50/50 mixture, first is untouched
    expected = np.zeros((4, 4), dtype=complex)
    expected[2, 2] = 0.5  # |10>
    expected[3, 3] = 0.5  # |11>
    np.testing.assert_allclose(out, expected, atol=1e-14)


# ---------------------------------------------------------------------------
# Lossy boson-sampling distribution


def test_half_transmission_splitter_distribution() -> None:
    # one photon at eta = 1/2 into a balanced splitter: vacuum with
    # probability 1/2, and the surviving photon exits either port equally
    spec = LossyInputSpec("single", 2, 1, 0.5, local_dim=2)
    gates = [beamsplitter_gate(np.pi / 4, (0, 1), 2)]
    dist = exact_lossy_bs_distribution(spec, gates)
    assert dist[(0, 0)] == pytest.approx(0.5, abs=1e-12)
    assert dist[(1, 0)] == pytest.approx(0.25, abs=1e-12)
    assert dist[(0, 1)] == pytest.approx(0.25, abs=1e-12)
    assert dist[(1, 1)] == pytest.approx(0.0, abs=1e-12)


def test_distribution_normalization_and_keys() -> None:
    spec = LossyInputSpec("single", 3, 2, 0.7, local_dim=3)
    gates = worst_case_gatelist(4, 2, local_dim=3)[:1]  # one splitter on (0, 2)
    dist = exact_lossy_bs_distribution(spec, gates)
    assert sum(dist.values()) == pytest.approx(1.0, abs=1e-10)
    assert list(dist) == list(itertools.product(range(3), repeat=3))
    assert all(p >= -1e-14 for p in dist.values())


def test_zero_transmission_is_vacuum() -> None:
    spec = LossyInputSpec("single", 2, 1, 0.0, local_dim=2)
    gates = [beamsplitter_gate(0.3, (0, 1), 2)]
    dist = exact_lossy_bs_distribution(spec, gates)
    assert dist[(0, 0)] == pytest.approx(1.0, abs=1e-12)


def test_dense_distribution_respects_size_cap() -> None:
    spec = LossyInputSpec("single", 13, 1, 0.5, local_dim=2)
    with pytest.raises(ResourceLimitError):
        exact_lossy_bs_distribution(spec, [])


# ---------------------------------------------------------------------------
# Permanent-based probabilities


def test_exact_bs_probability_identity_circuit() -> None:
    u = np.eye(4, dtype=complex)
    assert exact_bs_probability(u, (1, 1, 0, 0), 2) == pytest.approx(1.0)
    assert exact_bs_probability(u, (0, 0, 1, 1), 2) == pytest.approx(0.0, abs=1e-14)


def test_exact_bs_probability_hong_ou_mandel() -> None:
    from mns.photonic import beamsplitter_transfer

    u = beamsplitter_transfer(np.pi / 4)
    assert exact_bs_probability(u, (1, 1), 2) == pytest.approx(0.0, abs=1e-12)
    assert exact_bs_probability(u, (2, 0), 2) == pytest.approx(0.5, abs=1e-12)
    assert exact_bs_probability(u, (0, 2), 2) == pytest.approx(0.5, abs=1e-12)


def test_exact_bs_probability_sums_to_one() -> None:
    m, n = 5, 2
    u = haar_unitary(m, seed=9)
    total = 0.0
    for outcome in itertools.product(range(n + 1), repeat=m):
        if sum(outcome) == n:
            total += exact_bs_probability(u, outcome, n)
    assert total == pytest.approx(1.0, abs=1e-10)


def test_exact_bs_probability_mismatched_count_is_zero() -> None:
    u = haar_unitary(3, seed=1)
    assert exact_bs_probability(u, (1, 0, 0), 2) == 0.0


def test_exact_bs_probability_validation() -> None:
    u = haar_unitary(3, seed=1)
    with pytest.raises(ValueError):
        exact_bs_probability(u, (1, 1), 2)  # wrong length
    with pytest.raises(ValueError):
        exact_bs_probability(u, (1, -1, 2), 2)


def test_dense_and_permanent_routes_agree_when_lossless() -> None:
    # eta = 1 single photons: the density-matrix route must reproduce the
    # permanent route on every outcome
    for m, n, seed in [(3, 1, 4), (4, 2, 5), (5, 2, 6)]:
        from mns.photonic import brickwall_gatelist

        spec = LossyInputSpec("single", m, n, 1.0, local_dim=n + 1)
        gates = brickwall_gatelist(m, 2, seed, local_dim=n + 1)
        dist = exact_lossy_bs_distribution(spec, gates)
        u = transfer_matrix(gates, m)
        for outcome, prob in dist.items():
            expected = exact_bs_probability(u, outcome, n) if sum(outcome) <= n else 0.0
            assert prob == pytest.approx(expected, abs=1e-10)


# ---------------------------------------------------------------------------
# Noisy IQP distribution


def test_iqp_layer_phase_vector_values() -> None:
    c = parse_iqp_circuit("CZ 0 1\n", qubit_count=2)
    np.testing.assert_allclose(iqp_layer_phase_vector(c, 0), [1, 1, 1, -1], atol=1e-15)
    c = parse_iqp_circuit("S 0 T 1\n", qubit_count=2)
    expected = [1, np.exp(1j * np.pi / 4), 1j, 1j * np.exp(1j * np.pi / 4)]
    np.testing.assert_allclose(iqp_layer_phase_vector(c, 0), expected, atol=1e-15)


def test_noiseless_empty_iqp_is_point_mass() -> None:
    c = IQPCircuit(3, (tuple(),))
    dist = exact_noisy_iqp_distribution(c, NoiseSpec("dephasing", 0.0))
    assert dist[(0, 0, 0)] == pytest.approx(1.0, abs=1e-12)


def test_full_dephasing_is_uniform() -> None:
    c = random_iqp_circuit(3, 2, 0.7, 0)
    dist = exact_noisy_iqp_distribution(c, NoiseSpec("dephasing", 0.5))
    for p in dist.values():
        assert p == pytest.approx(1.0 / 8.0, abs=1e-12)


def test_iqp_distribution_normalization() -> None:
    c = random_iqp_circuit(4, 3, 0.5, 2)
    for noise in [NoiseSpec("dephasing", 0.13), NoiseSpec("depolarizing", 0.21)]:
        dist = exact_noisy_iqp_distribution(c, noise, extra_noise_layer=True)
        assert sum(dist.values()) == pytest.approx(1.0, abs=1e-12)
        assert all(p >= -1e-14 for p in dist.values())
        assert list(dist) == list(itertools.product((0, 1), repeat=4))


def test_iqp_distribution_size_cap() -> None:
    c = random_iqp_circuit(13, 1, 0.5, 0)
    with pytest.raises(ResourceLimitError):
        exact_noisy_iqp_distribution(c, NoiseSpec("dephasing", 0.1))


def test_depolarizing_contracts_toward_uniform() -> None:
    # heavier depolarizing noise can only shrink the TVD to uniform
    c = random_iqp_circuit(3, 2, 0.6, 7)
    uniform = {k: 1.0 / 8.0 for k in itertools.product((0, 1), repeat=3)}
    tvds = [
        total_variation_distance(
            exact_noisy_iqp_distribution(c, NoiseSpec("depolarizing", p)), uniform
        )
        for p in (0.0, 0.1, 0.3, 0.5)
    ]
    assert all(a >= b - 1e-12 for a, b in zip(tvds, tvds[1:]))
    assert tvds[-1] == pytest.approx(0.0, abs=1e-12)


# ---------------------------------------------------------------------------
# Distribution utilities


def test_total_variation_distance_values() -> None:
    p = {0: 0.6, 1: 0.4}
    q = {0: 0.5, 1: 0.5}
    assert total_variation_distance(p, q) == pytest.approx(0.1, abs=1e-15)
    assert total_variation_distance(p, p) == 0.0
    disjoint = total_variation_distance({0: 1.0, 1: 0.0}, {0: 0.0, 1: 1.0})
    assert disjoint == pytest.approx(1.0)


def test_total_variation_distance_rejects_key_mismatch() -> None:
    with pytest.raises(ValueError):
        total_variation_distance({0: 1.0}, {0: 0.5, 1: 0.5})


def test_empirical_distribution_counts() -> None:
    outs = [(0, 1), (0, 1), (1, 1), None]
    dist = empirical_distribution(outs)
    assert dist == {(0, 1): pytest.approx(2 / 3), (1, 1): pytest.approx(1 / 3)}


def test_empirical_distribution_with_space() -> None:
    space = list(itertools.product((0, 1), repeat=2))
    dist = empirical_distribution([(0, 0), (0, 0), (1, 0)], space=space)
    assert set(dist) == set(space)
    assert dist[(1, 1)] == 0.0
    with pytest.raises(ValueError):
        empirical_distribution([(2, 2)], space=space)
    with pytest.raises(ValueError):
        empirical_distribution([None])


def test_write_distribution_csv(tmp_path) -> None:
    dist = {(0, 1): 0.25, (1, 0): 0.75}
    path = tmp_path / "dist.csv"
    write_distribution_csv(dist, path)
    lines = path.read_text().strip().split("\n")
    assert lines[0] == "outcome,probability"
    assert lines[1] == "0 1,0.25"
    assert lines[2] == "1 0,0.75"
    # repr round-trips the float exactly
    assert float(lines[1].split(",")[1]) == 0.25
