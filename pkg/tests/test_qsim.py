import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from cqpolar.hilbert import bpsk_codeword_state, photonic_basis
from cqpolar.polar import build_codebook, default_code, polar_transform
from cqpolar.qsim import (
    CNOT,
    ERROR,
    DecisionTree,
    DensityMatrix,
    KrausChannel,
    NoiseConfig,
    apply_channel,
    apply_unitary,
    compression_circuit,
    decision_tree_decode,
    leaf_distribution_to_messages,
    load_encoding,
    load_tree,
    noisy_pipeline_channel,
    pauli_channel,
    pauli_probabilities,
    project,
    receiver_effects,
    simulate_message,
    transducer_channel,
)
from cqpolar.qsim.circuits import _load_gate, _string_phase_flip
from cqpolar.qsim.density import H, I2, X, Z
from cqpolar.rates import optimize_input
from cqpolar.scdecoder import effective_channel

CODE4 = default_code(4)


def random_state(rng, dim):
    psi = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return psi / np.linalg.norm(psi)


def random_dm(rng, dim, rank=2):
    vecs = [random_state(rng, dim) for _ in range(rank)]
    w = rng.dirichlet(np.ones(rank))
    return sum(wk * np.outer(v, v.conj()) for wk, v in zip(w, vecs))


# ---------------------------------------------------------------- density matrices


def test_identity_unitary_leaves_state():
    rho = DensityMatrix(random_dm(np.random.default_rng(0), 4))
    out = apply_unitary(rho, np.eye(2), [1])
    np.testing.assert_allclose(out.matrix, rho.matrix, atol=1e-15)


def test_x_flips_zero():
    out = apply_unitary(DensityMatrix.basis("0"), X, [0])
    np.testing.assert_allclose(out.matrix, DensityMatrix.basis("1").matrix)


def test_hadamard_twice():
    rho = DensityMatrix(random_dm(np.random.default_rng(1), 8))
    out = apply_unitary(apply_unitary(rho, H, [2]), H, [2])
    np.testing.assert_allclose(out.matrix, rho.matrix, atol=1e-12)


@pytest.mark.parametrize("targets", [(0, 1), (1, 0), (0, 2), (2, 1)])
def test_two_qubit_gate_matches_explicit_kron(targets):
    rng = np.random.default_rng(2)
    rho = DensityMatrix(random_dm(rng, 8, 3))
    out = apply_unitary(rho, CNOT, list(targets))
    # build the full operator by permuting basis indices
    U = np.zeros((8, 8), dtype=complex)
    c, t = targets
    for k in range(8):
        bits = [(k >> (2 - q)) & 1 for q in range(3)]
        if bits[c]:
            bits[t] ^= 1
        U[int("".join(map(str, bits)), 2), k] = 1.0
    np.testing.assert_allclose(out.matrix, U @ rho.matrix @ U.conj().T, atol=1e-12)


def test_mixed_dimensions():
    rng = np.random.default_rng(3)
    rho = DensityMatrix(random_dm(rng, 6), (3, 2))
    out = apply_unitary(rho, X, [1])
    full = np.kron(np.eye(3), X)
    np.testing.assert_allclose(out.matrix, full @ rho.matrix @ full, atol=1e-12)


def test_partial_trace_of_product():
    rng = np.random.default_rng(4)
    a, b = random_dm(rng, 3), random_dm(rng, 2)
    rho = DensityMatrix(np.kron(a, b), (3, 2))
    np.testing.assert_allclose(rho.partial_trace([1]).matrix, a, atol=1e-12)
    np.testing.assert_allclose(rho.partial_trace([0]).matrix, b, atol=1e-12)


def test_project_traces_to_probability():
    psi = np.array([np.sqrt(0.3), np.sqrt(0.7)])
    rho = DensityMatrix.from_state(psi)
    assert project(rho, 0, 0).trace() == pytest.approx(0.3)
    assert project(rho, 0, 1).trace() == pytest.approx(0.7)


def test_rejects_non_unitary_and_bad_targets():
    rho = DensityMatrix.basis("00")
    with pytest.raises(ValueError):
        apply_unitary(rho, np.diag([1.0, 0.5]), [0])
    with pytest.raises(IndexError):
        apply_unitary(rho, X, [2])
    with pytest.raises(ValueError):
        DensityMatrix(np.eye(3))


# ---------------------------------------------------------------- channels


def test_identity_channel():
    rho = DensityMatrix(random_dm(np.random.default_rng(5), 2))
    out = apply_channel(rho, KrausChannel((I2,)), [0])
    np.testing.assert_allclose(out.matrix, rho.matrix)


@pytest.mark.parametrize("p", [0.0, 0.1, 0.5, 0.9])
def test_depolarizing_fixed_point(p):
    out = apply_channel(DensityMatrix(np.eye(2) / 2), pauli_channel("independent", p, 1), [0])
    np.testing.assert_allclose(out.matrix, np.eye(2) / 2, atol=1e-15)


@pytest.mark.parametrize("p", [0.05, 0.3, 0.75])
def test_depolarizing_shrinks_offdiagonals(p):
    # X, Y, Z each with p/3: coherence scales by 1 - 4p/3, populations mix by 2p/3
    psi = random_state(np.random.default_rng(6), 2)
    rho = np.outer(psi, psi.conj())
    out = apply_channel(DensityMatrix(rho), pauli_channel("independent", p, 1), [0]).matrix
    assert out[0, 1] == pytest.approx(rho[0, 1] * (1 - 4 * p / 3), abs=1e-14)
    assert out[0, 0].real == pytest.approx(rho[0, 0].real * (1 - 2 * p / 3) + rho[1, 1].real * 2 * p / 3, abs=1e-14)


@pytest.mark.parametrize("model,arity", [("independent", 1), ("independent", 2), ("uniform", 2), ("paired", 2)])
@pytest.mark.parametrize("p", [0.0, 0.001, 0.2])
def test_pauli_channels_are_cptp(model, arity, p):
    probs = pauli_probabilities(model, p, arity)
    assert sum(probs.values()) == pytest.approx(1.0, abs=1e-14)
    assert min(probs.values()) >= 0.0
    ch = pauli_channel(model, p, arity)
    assert ch.tp_error() < 1e-10


def test_pauli_examples():
    p = 0.01
    ind = pauli_probabilities("independent", p, 2)
    assert ind["IX"] == pytest.approx((1 - p) * p / 3, rel=1e-14)
    assert ind["XY"] == pytest.approx((p / 3) ** 2, rel=1e-14)
    paired = pauli_probabilities("paired", p, 2)
    assert paired["IX"] == 0.0 and paired["ZI"] == 0.0
    assert paired["XZ"] == pytest.approx(p / 9)
    uni = pauli_probabilities("uniform", p, 2)
    assert uni["II"] == pytest.approx(1 - p)
    assert uni["IX"] == pytest.approx(p / 15)


@pytest.mark.parametrize("model", ["independent", "uniform", "paired"])
def test_zero_noise_is_identity(model):
    rho = DensityMatrix(random_dm(np.random.default_rng(7), 4))
    out = apply_channel(rho, pauli_channel(model, 0.0, 2), [0, 1])
    np.testing.assert_allclose(out.matrix, rho.matrix, atol=1e-15)


def test_pauli_validation():
    with pytest.raises(ValueError):
        pauli_probabilities("independent", 1.0, 1)
    with pytest.raises(ValueError):
        pauli_probabilities("bogus", 0.1, 1)
    with pytest.raises(ValueError):
        NoiseConfig(gate_p=0.1, model="bogus")
    with pytest.raises(ValueError):
        NoiseConfig(decoupling="bogus")
    with pytest.raises(ValueError):
        NoiseConfig(transducer_p=1.5)


def test_transducer_endpoints():
    rho = random_dm(np.random.default_rng(8), 5)
    np.testing.assert_allclose(transducer_channel(rho, 0.0), rho)
    np.testing.assert_allclose(transducer_channel(rho, 1.0), np.eye(5) / 5, atol=1e-15)
    with pytest.raises(ValueError):
        transducer_channel(rho, -0.1)


@given(st.floats(0.0, 1.0), st.integers(0, 2**31 - 1))
def test_transducer_preserves_trace_and_positivity(p, seed):
    rho = random_dm(np.random.default_rng(seed), 5)
    out = DensityMatrix(transducer_channel(rho, p), (5,))
    out.check(trace=1.0)


# ---------------------------------------------------------------- encodings and trees


@pytest.mark.parametrize("n", [4, 8])
def test_encoding_injective_and_vacuum_zero(n):
    enc = load_encoding(n)
    strings = [enc[p] for p in photonic_basis(n, 1)]
    assert len(set(strings)) == n + 1
    assert enc[()] == "0" * enc.n_qubits
    V = enc.isometry(photonic_basis(n, 1))
    np.testing.assert_allclose(V.T @ V, np.eye(n + 1))


def test_encoding_n4_table():
    enc = load_encoding(4)
    assert [enc[(i,)] for i in range(1, 5)] == ["100", "101", "110", "111"]


def test_encoding_rejects_collision_and_missing_length():
    from cqpolar.qsim import TimeBinEncoding

    with pytest.raises(ValueError):
        TimeBinEncoding(2, 2, (((), "00"), ((1,), "10"), ((2,), "10")))
    with pytest.raises(ValueError):
        load_encoding(16)


@pytest.mark.parametrize("n", [4, 8])
def test_tree_leaves_cover_messages(n):
    tree = load_tree(n)
    msgs = build_codebook(default_code(n)).messages
    assert sorted(tree.decided_messages()) == sorted(msgs)
    assert DecisionTree.from_json(tree.to_json()) == tree


def test_tree_validation():
    with pytest.raises(ValueError):
        DecisionTree.from_dict({"n_bins": 4, "n_qubits": 1, "root": {"measure": 0, "branches": {
            "0": {"measure": 0, "branches": {"0": {"leaf": "0000"}, "1": {"leaf": "0001"}}},
            "1": {"leaf": "error"}}}})
    with pytest.raises(ValueError):
        DecisionTree.from_dict({"n_bins": 4, "n_qubits": 1, "root": {
            "ops": [{"gate": "H", "qubits": [3]}], "measure": 0,
            "branches": {"0": {"leaf": "0000"}, "1": {"leaf": "0001"}}}})
    with pytest.raises(ValueError):
        DecisionTree.from_dict({"n_bins": 4, "n_qubits": 1, "root": {"ops": []}})


def test_leaf_spreading():
    out = leaf_distribution_to_messages({"0000": 0.5, "0010|0011": 0.4, ERROR: 0.1},
                                        ["0000", "0001", "0010", "0011"])
    assert out == {"0000": 0.5, "0001": 0.0, "0010": 0.2, "0011": 0.2, ERROR: 0.1}


# ---------------------------------------------------------------- compression


@pytest.mark.parametrize("n", [4, 8])
def test_compression_is_the_isometry(n):
    enc = load_encoding(n)
    V = enc.isometry(photonic_basis(n, 1))
    rng = np.random.default_rng(n)
    for _ in range(3):
        rho = random_dm(rng, n + 1, 3)
        out = compression_circuit(rho, enc)
        np.testing.assert_allclose(out.matrix, V @ rho @ V.T, atol=1e-12)


def test_compression_worked_example():
    a = 0.1
    psi = bpsk_codeword_state(polar_transform("0001"), a).amplitudes
    out = compression_circuit(np.outer(psi, psi.conj()), load_encoding(4))
    target = np.zeros(8)
    target[0] = 1.0
    for s in ("100", "101", "110", "111"):
        target[int(s, 2)] = -a
    target /= np.linalg.norm(target)
    fid = float(np.real(target @ out.matrix @ target)) / out.trace()
    assert fid == pytest.approx(1.0, abs=1e-12)


def test_compression_vacuum():
    rho = np.zeros((5, 5))
    rho[0, 0] = 1.0
    out = compression_circuit(rho, load_encoding(4))
    np.testing.assert_allclose(out.matrix, DensityMatrix.basis("000").matrix, atol=1e-15)


@pytest.mark.parametrize("n", [4, 8])
def test_phase_correction_equalizes_outcomes(n):
    # one time bin in isolation: both control outcomes end in the same register state
    enc = load_encoding(n)
    q = enc.n_qubits
    rng = np.random.default_rng(10 + n)
    for i in range(1, n + 1):
        psi = random_state(rng, n + 1)
        zeros = np.zeros(2**q)
        zeros[0] = 1.0
        rho = DensityMatrix.from_state(np.kron(psi, zeros), (n + 1,) + (2,) * q).expand(2)
        c = q + 1
        rho = apply_unitary(rho, _load_gate(n + 1, i), [0, c])
        code = enc[(i,)]
        for k, bit in enumerate(code):
            if bit == "1":
                rho = apply_unitary(rho, CNOT, [c, 1 + k])
        rho = apply_unitary(rho, H, [c])
        reg = list(range(1, q + 1))
        plus = project(rho, c, 0)
        minus = apply_unitary(project(rho, c, 1), _string_phase_flip(code), reg)
        assert plus.trace() == pytest.approx(0.5, abs=1e-12)
        assert minus.trace() == pytest.approx(0.5, abs=1e-12)
        a = plus.partial_trace([c]).matrix * 2
        b = minus.partial_trace([c]).matrix * 2
        assert np.abs(a - b).max() < 1e-12


def test_single_qubit_flip_does_not_suffice_for_multibit_strings():
    # flipping only the lowest set qubit leaves a relative sign on other strings
    enc = load_encoding(4)
    code = enc[(4,)]  # "111"
    D_full = _string_phase_flip(code)
    D_low = np.kron(Z, np.eye(4))
    assert not np.allclose(D_full, D_low)


# ---------------------------------------------------------------- decoding


def test_decode_worked_example():
    for a in (0.01, 0.1, 0.3):
        dist = simulate_message(CODE4, a, "0001")
        assert dist["0001"] == pytest.approx((2 * a * a + 2 * a + 0.5) / (4 * a * a + 1), abs=1e-12)


def test_decode_zero_alpha():
    dist = simulate_message(CODE4, 0.0, "0010")
    assert dist["0000"] == pytest.approx(0.5, abs=1e-12)
    assert dist["0001"] == pytest.approx(0.5, abs=1e-12)
    assert sum(v for k, v in dist.items() if k not in ("0000", "0001")) == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize("n", [4, 8])
@pytest.mark.parametrize("alpha", [0.03, 0.1, 0.25])
def test_circuit_matches_povm(n, alpha):
    code = default_code(n)
    tm = noisy_pipeline_channel(code, alpha, multiphoton_policy="ignore")
    ref = effective_channel(code, alpha, multiphoton_policy="ignore")
    if ERROR in tm.outcomes:
        assert np.abs(tm.column(ERROR)).max() < 1e-9
    got = tm.restrict_outcomes(ref.outcomes).probabilities
    np.testing.assert_allclose(got, ref.probabilities, atol=1e-9)


def test_branch_probabilities_sum_to_one():
    enc, tree = load_encoding(4), load_tree(4)
    noise = NoiseConfig(gate_p=0.01)
    rng = np.random.default_rng(11)
    for _ in range(3):
        rho = compression_circuit(random_dm(rng, 5), enc, noise)
        rho.check(trace=1.0)
        dist = decision_tree_decode(rho, tree, noise, check_branches=True)
        assert sum(dist.values()) == pytest.approx(1.0, abs=1e-10)


NOISES = [
    NoiseConfig(transducer_p=0.05),
    NoiseConfig(gate_p=0.01),
    NoiseConfig(gate_p=0.01, model="paired"),
    NoiseConfig(gate_p=0.01, model="uniform", decoupling="postselect"),
]


@pytest.mark.parametrize("noise", NOISES, ids=lambda z: f"{z.model}-{z.decoupling}-{z.gate_p}-{z.transducer_p}")
def test_receiver_effects_form_a_povm(noise):
    effects = receiver_effects(load_encoding(4), load_tree(4), noise)
    total = sum(effects.values())
    np.testing.assert_allclose(total, np.eye(5), atol=1e-10)
    for E in effects.values():
        assert np.linalg.eigvalsh(E).min() > -1e-10


def test_noiseless_gate_config_matches_effective_channel():
    for n in (4, 8):
        code = default_code(n)
        tm = noisy_pipeline_channel(code, 0.1, NoiseConfig(gate_p=0.0))
        ref = effective_channel(code, 0.1)
        np.testing.assert_allclose(tm.restrict_outcomes(ref.outcomes).probabilities, ref.probabilities, atol=1e-9)


def test_fully_depolarized_rows_identical():
    tm = noisy_pipeline_channel(CODE4, 0.2, NoiseConfig(transducer_p=1.0))
    P = tm.probabilities
    assert np.abs(P - P[0]).max() < 1e-12


def test_postselect_close_to_correct():
    a = noisy_pipeline_channel(CODE4, 0.05, NoiseConfig(gate_p=0.001))
    b = noisy_pipeline_channel(CODE4, 0.05, NoiseConfig(gate_p=0.001, decoupling="postselect"))
    assert np.abs(a.probabilities - b.probabilities).max() < 1e-3


def _pie(noise, alpha=np.sqrt(0.01)):
    tm = noisy_pipeline_channel(CODE4, alpha, noise)
    _, info = optimize_input(tm.probabilities)
    return info / (4 * alpha**2)


@pytest.mark.parametrize("field,grid", [
    ("transducer_p", [0.0, 0.01, 0.05, 0.2, 0.5]),
    ("gate_p", [0.0, 0.001, 0.005, 0.02, 0.05]),
])
def test_pie_monotone_in_noise(field, grid):
    values = [_pie(NoiseConfig(**{field: p})) for p in grid]
    assert all(b <= a + 1e-9 for a, b in zip(values, values[1:])), values


@pytest.mark.parametrize("model", ["paired", "uniform"])
def test_pie_monotone_other_models(model):
    values = [_pie(NoiseConfig(gate_p=p, model=model)) for p in (0.0, 0.001, 0.005, 0.02, 0.05)]
    assert all(b <= a + 1e-9 for a, b in zip(values, values[1:])), values


def test_noisy_states_stay_physical():
    enc = load_encoding(8)
    noise = NoiseConfig(gate_p=0.005, transducer_p=0.01)
    rng = np.random.default_rng(12)
    for _ in range(2):
        rho = transducer_channel(random_dm(rng, 9), noise.transducer_p)
        out = compression_circuit(rho, enc, noise)
        out.check(trace=1.0)


def test_pipeline_rejects_mismatched_parts():
    with pytest.raises(ValueError):
        noisy_pipeline_channel(CODE4, 0.1, encoding=load_encoding(8))
    with pytest.raises(ValueError):
        noisy_pipeline_channel(CODE4, 0.1, multiphoton_policy="bogus")


@pytest.mark.parametrize("u", ["".join(b) for b in itertools.product("01", repeat=2)])
def test_simulate_matches_effects(u):
    msg = "00" + u
    direct = simulate_message(CODE4, 0.15, msg, NoiseConfig(gate_p=0.003))
    tm = noisy_pipeline_channel(CODE4, 0.15, NoiseConfig(gate_p=0.003), multiphoton_policy="ignore")
    spread = leaf_distribution_to_messages(direct, tm.messages, keep_error=ERROR in tm.outcomes)
    np.testing.assert_allclose([spread[o] for o in tm.outcomes], tm.row(msg), atol=1e-12)
