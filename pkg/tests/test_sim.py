import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qvernam.sim import (
    BellLabel,
    DenseState,
    FrameState,
    PauliOperator,
    StabilizerState,
    bell_identify,
    dense_from_stabilizer,
    fidelity,
    measure_pair,
    partial_trace,
    random_density,
    random_state,
    trace_distance,
    von_neumann_entropy,
)
from qvernam.sim.dense import gate_matrix

ONE_QUBIT = ["I", "X", "Y", "Z", "H", "S", "SDG"]
TWO_QUBIT = ["CNOT", "CZ", "SWAP"]


@st.composite
def clifford_circuits(draw, max_qubits=4, max_len=20):
    n = draw(st.integers(1, max_qubits))
    gates = []
    for _ in range(draw(st.integers(0, max_len))):
        if n > 1 and draw(st.booleans()):
            a, b = draw(st.permutations(range(n)))[:2]
            gates.append((draw(st.sampled_from(TWO_QUBIT)), a, b))
        else:
            gates.append((draw(st.sampled_from(ONE_QUBIT)), draw(st.integers(0, n - 1))))
    return n, gates


paulis = st.integers(1, 3).flatmap(
    lambda n: st.tuples(
        st.lists(st.integers(0, 1), min_size=n, max_size=n),
        st.lists(st.integers(0, 1), min_size=n, max_size=n),
        st.integers(0, 3),
    )
)


def _op(t):
    x, z, ph = t
    return PauliOperator(x, z, ph)


def test_pauli_label_roundtrip():
    op = PauliOperator.from_label("XIZY")
    assert op.n == 4
    assert op.weight == 3
    assert op.support() == [0, 2, 3]
    assert PauliOperator.from_label("X0 Z3", 4) == PauliOperator.from_label("XIIZ")
    assert PauliOperator.from_label("-Z") == PauliOperator.from_label("Z").with_phase(2)


def test_pauli_label_errors():
    with pytest.raises(ValueError):
        PauliOperator.from_label("X0 Z1")
    with pytest.raises(ValueError):
        PauliOperator.from_label("XQ")
    with pytest.raises(IndexError):
        PauliOperator.from_label("X5", 3)


@given(paulis, st.data())
def test_pauli_product_matches_matrices(a, data):
    n = len(a[0])
    b = data.draw(
        st.tuples(
            st.lists(st.integers(0, 1), min_size=n, max_size=n),
            st.lists(st.integers(0, 1), min_size=n, max_size=n),
            st.integers(0, 3),
        )
    )
    A, B = _op(a), _op(b)
    assert np.allclose((A * B).to_matrix(), A.to_matrix() @ B.to_matrix())
    comm = np.allclose(A.to_matrix() @ B.to_matrix(), B.to_matrix() @ A.to_matrix())
    assert A.commutes(B) == comm


@given(paulis)
def test_pauli_square_is_identity_up_to_phase(a):
    A = _op(a).strip_phase()
    sq = (A * A).to_matrix()
    assert np.allclose(np.abs(sq), np.eye(2**A.n))


def test_qutrit_pauli_order_three():
    op = PauliOperator([1, 2], [0, 1], 0, d=3)
    assert (op**3).is_identity()
    assert np.allclose(np.linalg.matrix_power(op.to_matrix(), 3), np.eye(9))


@given(clifford_circuits())
@settings(max_examples=60, deadline=None)
def test_tableau_matches_dense(circ):
    n, gates = circ
    tab = StabilizerState(n)
    den = DenseState(n)
    for g, *qs in gates:
        tab.apply(g, *qs)
        den.apply(g, *qs)
    tab.check_invariants()
    assert abs(fidelity(dense_from_stabilizer(tab), den) - 1) < 1e-9


@given(clifford_circuits(max_qubits=3), st.integers(0, 2**31 - 1))
@settings(max_examples=40, deadline=None)
def test_tableau_measurement_probabilities(circ, seed):
    n, gates = circ
    tab = StabilizerState(n)
    den = DenseState(n)
    for g, *qs in gates:
        tab.apply(g, *qs)
        den.apply(g, *qs)
    p1 = float(np.real(np.trace(den.density_matrix([0]) @ np.diag([0, 1]))))
    bit = tab.copy().measure_z(0, np.random.default_rng(seed))
    if p1 < 1e-9:
        assert bit == 0
    elif p1 > 1 - 1e-9:
        assert bit == 1
    else:
        assert abs(p1 - 0.5) < 1e-9


@given(clifford_circuits(max_qubits=3), paulis)
@settings(max_examples=60, deadline=None)
def test_frame_tracks_conjugated_error(circ, err):
    # the frame drops Pauli gates and S from the reference, so use H and two-qubit gates
    n, gates = circ
    gates = [g for g in gates if g[0] in ("H", *TWO_QUBIT)]
    x = np.resize(np.array(err[0], np.uint8), n)
    z = np.resize(np.array(err[1], np.uint8), n)
    frame = FrameState(n)
    frame.apply_pauli(PauliOperator(x, z))
    U = np.eye(2**n, dtype=complex)
    for g, *qs in gates:
        frame.apply(g, *qs)
        step = DenseState(n)
        M = np.eye(2**n, dtype=complex)
        for col in range(2**n):
            step.amp = M[:, col].copy()
            step.apply(g, *qs)
            M[:, col] = step.amp
        U = M @ U
    # U E U^dag must equal the frame's Pauli up to a phase
    E = PauliOperator(x, z).to_matrix()
    got = frame.error_on(range(n)).to_matrix()
    conj = U @ E @ U.conj().T
    overlap = abs(np.trace(got.conj().T @ conj)) / 2**n
    assert abs(overlap - 1) < 1e-9


def test_bell_labels_on_all_engines():
    for zb in (0, 1):
        for xb in (0, 1):
            states = [StabilizerState(2), DenseState(2), FrameState(2)]
            for s in states:
                if not isinstance(s, FrameState):
                    s.apply("H", 0).apply("CNOT", 0, 1)
                if xb:
                    s.apply("X", 1)
                if zb:
                    s.apply("Z", 1)
                assert bell_identify(s, (0, 1)) == BellLabel.from_bits(zb, xb)


def test_bell_identify_rejects_product_state():
    with pytest.raises(ValueError):
        bell_identify(StabilizerState(2).apply("H", 0), (0, 1))


def test_frame_pair_measurement_parity(rng):
    f = FrameState(4)
    f.apply("Z", 1)
    a, b = f.measure_pairs([0, 2], [1, 3], "x", rng)
    assert list(a ^ b) == [1, 0]
    a, b = f.measure_pairs([0, 2], [1, 3], "z", rng)
    assert list(a ^ b) == [0, 0]


def test_measure_pair_phi_plus_correlated(rng):
    for _ in range(20):
        s = StabilizerState(2).apply("H", 0).apply("CNOT", 0, 1)
        a, b = measure_pair(s, 0, 1, "x", rng)
        assert a == b


def test_frame_pauli_gates_flip_the_frame():
    f = FrameState(1)
    f.apply("Y", 0)
    assert (f.x[0], f.z[0]) == (1, 1)
    f.apply("X", 0)
    assert (f.x[0], f.z[0]) == (0, 1)


def test_frame_rejects_non_clifford_names():
    with pytest.raises(ValueError):
        FrameState(1).apply("T", 0)


def test_stabilizer_rejects_bad_targets():
    s = StabilizerState(2)
    with pytest.raises(ValueError):
        s.apply("CNOT", 0, 0)
    with pytest.raises(ValueError):
        s.apply("T", 0)
    with pytest.raises(IndexError):
        s.apply("X", 3)


def test_dense_cap():
    with pytest.raises(ValueError):
        DenseState(15)


def test_gate_matrices_unitary():
    for d, names in ((2, ["H", "S", "T", "CNOT", "CZ", "SWAP"]), (3, ["SHIFT", "PHASE", "FOURIER", "SUM", "DIFFERENCE"])):
        for g in names:
            U = gate_matrix(g, d)
            assert np.allclose(U.conj().T @ U, np.eye(U.shape[0]))


def test_partial_trace_of_bell_pair_is_mixed():
    s = DenseState(2).apply("H", 0).apply("CNOT", 0, 1)
    rho = partial_trace(s.amp, [0], 2)
    assert np.allclose(rho, np.eye(2) / 2)
    assert abs(von_neumann_entropy(rho) - 1) < 1e-12


def test_random_density_is_a_state(rng):
    rho = random_density(2, rng)
    assert np.allclose(rho, rho.conj().T)
    assert abs(np.trace(rho) - 1) < 1e-12
    assert np.linalg.eigvalsh(rho).min() > -1e-12


def test_trace_distance_bounds(rng):
    a = random_state(2, rng).density_matrix()
    b = random_state(2, rng).density_matrix()
    assert 0 <= trace_distance(a, b) <= 1
    assert trace_distance(a, a) < 1e-12


def test_qutrit_dense_sum_gate():
    s = DenseState(2, d=3)
    s.apply("SHIFT", 0).apply("SUM", 0, 1)
    assert np.isclose(abs(s.amp[1 + 3 * 1]), 1)
