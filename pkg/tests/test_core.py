import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import expm

from ensemble_rcs.core import (
    CapacityError,
    EnsembleDims,
    Gate,
    StateVector,
    apply_gate,
    apply_global_squeeze,
    apply_hadamard,
    apply_hadamard_layer,
    apply_local_squeeze,
    apply_pairwise_squeeze,
    apply_rotation,
    apply_three_ensemble_R,
    apply_two_ensemble_T,
    apply_x_half,
    apply_y_half,
    apply_z_quarter,
    basis_state,
    config_table,
    decode_config,
    encode_config,
    make_initial_state,
    measurement_probabilities,
    rotation_matrix,
    sample_outcomes,
    spin_operator_matrix,
    x_half,
    y_half,
    y_quarter_turn_closed_form,
)

from oracles import HADAMARD, binomial_probs, collective, dicke_embedding, fock_operator


def random_state(dims, seed):
    rng = np.random.default_rng(seed)
    v = rng.normal(size=dims.D) + 1j * rng.normal(size=dims.D)
    return StateVector(dims, v / np.linalg.norm(v))


# -- encoding -----------------------------------------------------------------


@pytest.mark.parametrize("k, index", [((0, 0), 0), ((3, 7), 73), ((9, 9), 99)])
def test_encode_examples(k, index):
    dims = EnsembleDims(9, 2)
    assert encode_config(k, dims) == index
    assert decode_config(index, dims) == k


@given(N=st.integers(1, 6), M=st.integers(1, 4), data=st.data())
def test_encode_decode_roundtrip(N, M, data):
    dims = EnsembleDims(N, M)
    k = tuple(data.draw(st.lists(st.integers(0, N), min_size=M, max_size=M)))
    assert decode_config(encode_config(k, dims), dims) == k


def test_config_table_matches_decode():
    dims = EnsembleDims(3, 3)
    table = config_table(dims)
    assert table.shape == (dims.D, 3)
    for i in range(dims.D):
        assert tuple(table[i]) == decode_config(i, dims)


@pytest.mark.parametrize("k", [(10, 0), (-1, 0), (0,), (0, 0, 0)])
def test_encode_rejects_bad_config(k):
    with pytest.raises(ValueError):
        encode_config(k, EnsembleDims(9, 2))


def test_state_cap():
    with pytest.raises(CapacityError):
        EnsembleDims(1, 28)
    EnsembleDims(1, 27)  # exactly at the cap is fine


def test_initial_state():
    s = make_initial_state(EnsembleDims(1, 1))
    assert s.amp[1] == 1 and s.amp[0] == 0
    s = make_initial_state(EnsembleDims(9, 2))
    assert s.amp[99] == 1 and np.count_nonzero(s.amp) == 1


# -- spin operators and rotations ------------------------------------------------


def test_spin_operator_examples():
    np.testing.assert_array_equal(spin_operator_matrix(1, "z"), np.diag([-1, 1]))
    np.testing.assert_array_equal(spin_operator_matrix(2, "z"), np.diag([-2, 0, 2]))
    # sigma^y written in the (k=0, k=1) = (|1>, |0>) ordering
    swap = np.array([[0, 1], [1, 0]])
    np.testing.assert_allclose(spin_operator_matrix(1, "y"), swap @ np.array([[0, -1j], [1j, 0]]) @ swap)


@pytest.mark.parametrize("N", range(1, 6))
@pytest.mark.parametrize("axis", "xyz")
def test_spin_operator_matches_qubit_projection(N, axis):
    np.testing.assert_allclose(spin_operator_matrix(N, axis), fock_operator(axis, N), atol=1e-12)


@pytest.mark.parametrize("N", [1, 2, 5, 17, 50])
def test_spin_commutator(N):
    sx, sy, sz = (spin_operator_matrix(N, a) for a in "xyz")
    np.testing.assert_allclose(sx @ sy - sy @ sx, 2j * sz, atol=1e-10)


def test_rotation_example_n1():
    c = 1 / math.sqrt(2)
    np.testing.assert_allclose(rotation_matrix(1, "y", math.pi / 4).entries, [[c, c], [-c, c]], atol=1e-15)


@pytest.mark.parametrize("axis", "xyz")
@pytest.mark.parametrize("N", [1, 7, 40])
def test_zero_angle_is_identity(axis, N):
    np.testing.assert_allclose(rotation_matrix(N, axis, 0.0).entries, np.eye(N + 1), atol=1e-12)


@pytest.mark.parametrize("N", [1, 3, 8])
@pytest.mark.parametrize("axis", "xyz")
@pytest.mark.parametrize("angle", [0.3, math.pi / 4, -1.1])
def test_rotation_matches_expm(N, axis, angle):
    ref = expm(-1j * angle * spin_operator_matrix(N, axis))
    np.testing.assert_allclose(rotation_matrix(N, axis, angle).entries, ref, atol=1e-11)


@pytest.mark.parametrize("axis", "xyz")
@pytest.mark.parametrize("angle", [0.2, math.pi / 4, math.pi / 8, 2.0])
def test_single_qubit_reduction(axis, angle):
    # direct 2x2 Pauli exponential cos(a) I - i sin(a) sigma, sigma projected from the qubit
    sigma = fock_operator(axis, 1)
    ref = math.cos(angle) * np.eye(2) - 1j * math.sin(angle) * sigma
    np.testing.assert_allclose(rotation_matrix(1, axis, angle).entries, ref, atol=1e-12)


def test_closed_form_n20():
    np.testing.assert_allclose(rotation_matrix(20, "y", math.pi / 4).entries, y_quarter_turn_closed_form(20), atol=1e-8)


def test_closed_form_large_n_is_finite():
    # no overflow, though cancellation makes it inaccurate this far out
    assert np.all(np.isfinite(y_quarter_turn_closed_form(120)))


@pytest.mark.parametrize("N", [1, 9, 50, 99, 200])
def test_rotation_unitarity(N):
    for axis in "xyz":
        U = rotation_matrix(N, axis, 0.7).entries
        assert np.max(np.abs(U.conj().T @ U - np.eye(N + 1))) <= 1e-10


@pytest.mark.parametrize("N", [1, 2, 5, 20, 99])
def test_x_half_from_phase_conjugated_y_half(N):
    k = np.arange(N + 1)
    dk = k[:, None] - k[None, :]
    X, Y = x_half(N).entries, y_half(N).entries
    np.testing.assert_allclose(X, np.exp(1j * dk * math.pi / 2) * Y, atol=1e-10)
    # the opposite phase yields the inverse quarter turn about x
    X_inv = rotation_matrix(N, "x", -math.pi / 4).entries
    np.testing.assert_allclose(X_inv, np.exp(-1j * dk * math.pi / 2) * Y, atol=1e-10)


def test_rotation_is_cached():
    assert rotation_matrix(7, "x", 0.5) is rotation_matrix(7, "x", 0.5)
    with pytest.raises(ValueError):
        rotation_matrix(7, "x", 0.5).entries[0, 0] = 1


# -- gate application ------------------------------------------------------------


def test_z_quarter_example():
    out = apply_z_quarter(basis_state(EnsembleDims(1, 1), (1,)), 0)
    np.testing.assert_allclose(out.amp, [0, np.exp(-1j * math.pi / 8)], atol=1e-15)


def test_y_half_example():
    out = apply_y_half(basis_state(EnsembleDims(1, 1), (1,)), 0)
    np.testing.assert_allclose(out.amp, np.array([1, 1]) / math.sqrt(2), atol=1e-15)


def test_zero_angle_rotation_leaves_state():
    s = random_state(EnsembleDims(3, 2), 0)
    for axis in "xyz":
        np.testing.assert_allclose(apply_rotation(s, 1, rotation_matrix(3, axis, 0.0)).amp, s.amp, atol=1e-14)


def test_rotation_targets_correct_ensemble():
    # compare against a qubit-level rotation on each ensemble in turn
    N, M = 2, 3
    dims = EnsembleDims(N, M)
    E = dicke_embedding(N, M)
    s = random_state(dims, 3)
    psi = E @ s.amp
    for m in range(M):
        ref = E.T @ expm(-1j * 0.4 * collective("y", range(m * N, (m + 1) * N), N * M)) @ psi
        got = apply_rotation(s, m, rotation_matrix(N, "y", 0.4)).amp
        np.testing.assert_allclose(got, ref, atol=1e-12)


def test_hadamard_examples():
    p = measurement_probabilities(apply_hadamard(make_initial_state(EnsembleDims(1, 1)), 0))
    np.testing.assert_allclose(p, [0.5, 0.5], atol=1e-15)
    p = measurement_probabilities(apply_hadamard(make_initial_state(EnsembleDims(9, 1)), 0))
    np.testing.assert_allclose(p, binomial_probs(9), atol=1e-13)


@pytest.mark.parametrize("N", [1, 4, 9, 30])
def test_hadamard_is_involution_up_to_phase(N):
    s = random_state(EnsembleDims(N, 1), N)
    twice = apply_hadamard(apply_hadamard(s, 0), 0)
    assert abs(abs(s.overlap(twice)) - 1) <= 1e-9


@pytest.mark.parametrize("N", [1, 2, 3, 4])
def test_hadamard_matches_qubit_hadamard(N):
    H = np.array([[1.0 + 0j]])
    for _ in range(N):
        H = np.kron(H, HADAMARD)
    E = dicke_embedding(N, 1)
    ref = E.T @ H @ E
    s = random_state(EnsembleDims(N, 1), 11)
    got = apply_hadamard(s, 0)
    assert abs(abs(np.vdot(ref @ s.amp, got.amp)) - 1) <= 1e-12


def test_global_squeeze_examples():
    dims = EnsembleDims(1, 2)
    s = random_state(dims, 1)
    np.testing.assert_array_equal(apply_global_squeeze(s, 0.0).amp, s.amp)
    out = apply_global_squeeze(s, 0.37)
    i = encode_config((1, 0), dims)
    assert out.amp[i] == s.amp[i]


def test_local_squeeze_examples():
    s = random_state(EnsembleDims(1, 1), 2)
    np.testing.assert_allclose(apply_local_squeeze(s, 0, 0.3).amp, np.exp(-0.3j) * s.amp)
    s = basis_state(EnsembleDims(2, 1), (1,))
    np.testing.assert_array_equal(apply_local_squeeze(s, 0, 0.3).amp, s.amp)


def test_pairwise_squeeze_phase():
    dims = EnsembleDims(2, 2)
    s = basis_state(dims, (2, 0))  # S^z = (2, -2), sum 0
    np.testing.assert_array_equal(apply_pairwise_squeeze(s, 0, 1, 0.9).amp, s.amp)
    s = basis_state(dims, (2, 1))  # sum 2
    np.testing.assert_allclose(apply_pairwise_squeeze(s, 0, 1, 0.9).amp[encode_config((2, 1), dims)], np.exp(-3.6j))


def test_T_and_R_examples():
    dims = EnsembleDims(1, 3)
    s = basis_state(dims, (1, 0, 1))
    out = apply_three_ensemble_R(s, 0, 1, 2, math.pi)
    np.testing.assert_allclose(out.amp, -s.amp, atol=1e-15)
    s = basis_state(EnsembleDims(1, 2), (1, 1))
    out = apply_two_ensemble_T(s, 0, 1, math.pi / 4)
    np.testing.assert_allclose(out.amp[3], np.exp(-1j * math.pi / 4))
    for f, args in [(apply_two_ensemble_T, (0, 0, 0.1)), (apply_three_ensemble_R, (0, 1, 0, 0.1))]:
        with pytest.raises(ValueError):
            f(basis_state(dims, (0, 0, 0)), *args)
    with pytest.raises(IndexError):
        apply_two_ensemble_T(basis_state(dims, (0, 0, 0)), 0, 3, 0.1)


def test_T_and_R_zero_angle_identity():
    s = random_state(EnsembleDims(2, 3), 5)
    np.testing.assert_array_equal(apply_two_ensemble_T(s, 0, 2, 0.0).amp, s.amp)
    np.testing.assert_array_equal(apply_three_ensemble_R(s, 0, 1, 2, 0.0).amp, s.amp)


DIAGONAL_GATES = [
    Gate("rz", (0,), math.pi / 8),
    Gate("rz", (2,), math.pi / 8),
    Gate("q_global", (), 0.45),
    Gate("t", (0, 1), 0.8),
    Gate("r", (0, 1, 2), 1.3),
    Gate("q", (1,), 0.2),
]


@settings(max_examples=25, deadline=None)
@given(perm=st.permutations(range(len(DIAGONAL_GATES))), seed=st.integers(0, 1000))
def test_diagonal_gates_commute(perm, seed):
    s = random_state(EnsembleDims(2, 3), seed)
    ref = s
    for g in DIAGONAL_GATES:
        ref = apply_gate(ref, g)
    out = s
    for i in perm:
        out = apply_gate(out, DIAGONAL_GATES[i])
    np.testing.assert_allclose(out.amp, ref.amp, atol=1e-10)


ALL_GATES = DIAGONAL_GATES + [
    Gate("rx", (1,), math.pi / 4),
    Gate("ry", (2,), math.pi / 4),
    Gate("rx", (0,), -0.77),
    Gate("q_pair", (0, 2), 0.3),
]


@settings(max_examples=40, deadline=None)
@given(N=st.integers(1, 4), gate=st.sampled_from(ALL_GATES), seed=st.integers(0, 10**6))
def test_norm_preserved_by_every_gate(N, gate, seed):
    s = random_state(EnsembleDims(N, 3), seed)
    assert abs(apply_gate(s, gate).norm() - 1) <= 1e-9


@pytest.mark.parametrize("f", [apply_x_half, apply_y_half, apply_z_quarter, apply_hadamard])
def test_named_gates_preserve_norm(f):
    s = random_state(EnsembleDims(9, 2), 4)
    assert abs(f(s, 1).norm() - 1) <= 1e-9


def test_hadamard_layer_gives_product_binomial():
    p = measurement_probabilities(apply_hadamard_layer(make_initial_state(EnsembleDims(3, 2))))
    b = binomial_probs(3)
    np.testing.assert_allclose(p, np.outer(b, b).reshape(-1), atol=1e-14)


# -- measurement -----------------------------------------------------------------


def test_probabilities_examples():
    dims = EnsembleDims(2, 2)
    p = measurement_probabilities(make_initial_state(dims))
    assert p[-1] == 1 and p.sum() == 1
    s = random_state(dims, 9)
    p = measurement_probabilities(s)
    p_diag = measurement_probabilities(apply_gate(apply_global_squeeze(s, 0.9), Gate("rz", (1,), 0.4)))
    np.testing.assert_allclose(p, p_diag, atol=1e-15)


def test_sample_delta():
    dims = EnsembleDims(3, 2)
    shots = sample_outcomes(measurement_probabilities(make_initial_state(dims)), 500, 1, dims)
    assert shots.shape == (500, 2)
    assert np.all(shots == 3)


def test_sample_uniform_within_five_sigma():
    dims = EnsembleDims(1, 2)
    n = 10**6
    shots = sample_outcomes(np.full(4, 0.25), n, 123, dims)
    idx = shots[:, 0] + 2 * shots[:, 1]
    freq = np.bincount(idx, minlength=4) / n
    sigma = math.sqrt(0.25 * 0.75 / n)
    assert np.all(np.abs(freq - 0.25) <= 5 * sigma)


def test_sample_deterministic_and_seed_sensitive():
    dims = EnsembleDims(3, 2)
    p = np.full(dims.D, 1 / dims.D)
    a = sample_outcomes(p, 200, 7, dims)
    np.testing.assert_array_equal(a, sample_outcomes(p, 200, 7, dims))
    assert not np.array_equal(a, sample_outcomes(p, 200, 8, dims))


def test_sample_decodes_configs():
    dims = EnsembleDims(3, 2)
    p = np.zeros(dims.D)
    p[encode_config((1, 2), dims)] = 1
    assert np.all(sample_outcomes(p, 10, 0, dims) == [1, 2])


def test_sample_rejects_unnormalized():
    dims = EnsembleDims(1, 1)
    with pytest.raises(ValueError):
        sample_outcomes(np.array([0.5, 0.6]), 10, 0, dims)
    with pytest.raises(ValueError):
        sample_outcomes(np.array([1.1, -0.1]), 10, 0, dims)


@pytest.mark.parametrize("N, M", list(itertools.product([1, 2], [1, 2, 3])))
def test_zero_shots(N, M):
    dims = EnsembleDims(N, M)
    assert sample_outcomes(np.full(dims.D, 1 / dims.D), 0, 0, dims).shape == (0, M)
