"""(2,3) threshold cipher from the five-qubit code.

Registers: 0 = A1, 1 = A2 (Alice), 2 = B1, 3 = B2 (Bob), 4 = message, sent
as share E.  Pairs (0, 2) and (1, 3) start in Phi+.  The encoder touches
only Alice's qubits and the message; the decoder only Bob's and E.  After
decoding, a Pauli on E in transit leaves both pairs with the same Bell
label (I: Phi+, X: Psi+, Z: Phi-, XZ: Psi-) and a known Pauli on the
message.
"""
from __future__ import annotations

from functools import lru_cache

import numpy as np

from ..sim import BellLabel, DenseState, PauliOperator, StabilizerState, bell_identify
from ..transcript import Transcript
from .circuits import load_circuit, run_circuit
from .shares import FIVEBIT_SHARES

__all__ = [
    "PAIRS",
    "ERRORS",
    "fivebit_prepare",
    "fivebit_encode",
    "fivebit_decode",
    "fivebit_error_table",
    "fivebit_pair_labels",
    "fivebit_locc_syndrome",
    "fivebit_correct",
    "fivebit_recover_without_share",
    "circuit_unitary",
    "is_clifford",
]

PAIRS = ((0, 2), (1, 3))
ERRORS = ("I", "X", "Z", "XZ")
E = FIVEBIT_SHARES.E[0]


def _unitary_for(psi: np.ndarray) -> np.ndarray:
    a, b = psi
    return np.array([[a, -np.conj(b)], [b, np.conj(a)]], dtype=complex)


def fivebit_prepare(psi=None, engine: str = "dense", reference: bool = False):
    """Two Phi+ pairs and the message.

    Dense engine: ``psi`` is a length-2 amplitude vector (default |0>).
    Stabilizer engine with ``reference``: qubit 5 purifies the message.
    """
    if engine == "dense":
        st = DenseState(5)
        if psi is not None:
            st.apply_matrix(_unitary_for(np.asarray(psi, dtype=complex)), [E])
    elif engine == "stabilizer":
        st = StabilizerState(6 if reference else 5)
        if reference:
            st.apply("H", E)
            st.apply("CNOT", E, 5)
    else:
        raise ValueError(f"unknown engine {engine!r}")
    for a, b in PAIRS:
        st.apply("H", a)
        st.apply("CNOT", a, b)
    return st


def fivebit_encode(state):
    """Alice's encoder on qubits 0, 1 and 4."""
    run_circuit(state, load_circuit("fivebit_encode"))
    return state


def fivebit_decode(state):
    """Bob's decoder on qubits 2, 3 and 4."""
    run_circuit(state, load_circuit("fivebit_decode"))
    return state


def _apply_error(state, error: str):
    if "X" in error:
        state.apply("X", E)
    if "Z" in error:
        state.apply("Z", E)


def fivebit_pair_labels(state) -> tuple[BellLabel, BellLabel]:
    """Exact labels of both pairs (harness view)."""
    return tuple(bell_identify(state, p) for p in PAIRS)


@lru_cache(maxsize=1)
def fivebit_error_table() -> dict:
    """Error on E -> (pair labels, Pauli left on the decoded message).

    Tabulated by running every error through the stabilizer engine with a
    reference qubit purifying the message.
    """
    table = {}
    for err in ERRORS:
        st = fivebit_prepare(engine="stabilizer", reference=True)
        fivebit_encode(st)
        _apply_error(st, err)
        fivebit_decode(st)
        labels = fivebit_pair_labels(st)
        msg = bell_identify(st, (E, 5))
        residual = ("X" if msg.xbit else "") + ("Z" if msg.zbit else "")
        table[err] = (labels, residual or "I")
    return table


def fivebit_locc_syndrome(state, rng, transcript: Transcript | None = None, round: int = 0) -> str:
    """Identify the error class with local measurements and broadcast only.

    Alice and Bob measure pair (0, 2) in Z and pair (1, 3) in X, announce
    their outcomes, and look the two parities up in the error table.  The
    pairs are consumed.
    """
    tr = transcript if transcript is not None else Transcript()
    (a1, b1), (a2, b2) = PAIRS
    tr.post("alice", "z-outcome", [int(state.measure_z(a1, rng))], round=round)
    tr.post("bob", "z-outcome", [int(state.measure_z(b1, rng))], round=round)
    tr.post("alice", "x-outcome", [int(state.measure_x(a2, rng))], round=round)
    tr.post("bob", "x-outcome", [int(state.measure_x(b2, rng))], round=round)
    za, zb = (p[0] for p in tr.payloads("z-outcome", round))
    xa, xb = (p[0] for p in tr.payloads("x-outcome", round))
    xbit, zbit = za ^ zb, xa ^ xb
    for err, (labels, _) in fivebit_error_table().items():
        if labels[0].xbit == xbit and labels[1].zbit == zbit:
            return err
    raise ValueError("pairs are not in a valid syndrome pattern")


def fivebit_correct(state, error: str) -> None:
    """Undo the message Pauli associated with ``error``."""
    _, residual = fivebit_error_table()[error]
    if residual != "I":
        _apply_error(state, residual)


def fivebit_recover_without_share(state, rng) -> str:
    """Reconstruct from shares A and B alone after E is lost.

    E is modelled as measured in Z (unrecorded) and replaced by |0>; Bob
    decodes, the syndrome is read by LOCC and the message corrected.
    """
    state.measure_z(E, rng)
    state.reset(E, rng)
    fivebit_decode(state)
    err = fivebit_locc_syndrome(state, rng)
    fivebit_correct(state, err)
    return err


def circuit_unitary(gates, n: int) -> np.ndarray:
    """Dense unitary of a qubit gate list."""
    dim = 2**n
    U = np.empty((dim, dim), dtype=complex)
    for col in range(dim):
        amp = np.zeros(dim, dtype=complex)
        amp[col] = 1
        st = DenseState(n, amplitudes=amp)
        run_circuit(st, gates)
        U[:, col] = st.amp
    return U


def _pauli_coefficients(M: np.ndarray, n: int) -> np.ndarray:
    # Fast Walsh-style expansion over the Pauli basis: c_P = tr(P M) / 2^n.
    coeffs = np.empty(4**n, dtype=complex)
    for k in range(4**n):
        x = np.array([(k >> (2 * q)) & 1 for q in range(n)], np.uint8)
        z = np.array([(k >> (2 * q + 1)) & 1 for q in range(n)], np.uint8)
        P = PauliOperator(x, z).to_matrix()
        coeffs[k] = np.trace(P.conj().T @ M) / 2**n
    return coeffs


def is_clifford(U: np.ndarray, tol: float = 1e-9) -> bool:
    """True iff U maps every single-qubit X and Z generator to a Pauli."""
    n = int(round(np.log2(U.shape[0])))
    for q in range(n):
        for kind in ("X", "Z"):
            P = PauliOperator.single(n, q, x=int(kind == "X"), z=int(kind == "Z")).to_matrix()
            c = _pauli_coefficients(U @ P @ U.conj().T, n)
            if np.sum(np.abs(c) > tol) != 1 or abs(np.max(np.abs(c)) - 1) > tol:
                return False
    return True
