"""Encode and decode circuits of the entanglement-keyed Vernam cipher."""
from __future__ import annotations

from ..sim import PauliOperator
from .register import EbitKeyRegister, SyndromeVector

__all__ = ["qvc_encode", "qvc_decode", "predicted_syndrome", "correct_message"]


def _check(message, key: EbitKeyRegister):
    message = [int(m) for m in message]
    if len(message) != key.n:
        raise ValueError(f"key covers {key.n} qubits, message has {len(message)}")
    halves = set(key.alice.tolist()) | set(key.bob.tolist())
    if halves & set(message):
        raise ValueError("message register overlaps the key register")
    return message


def qvc_encode(message, key: EbitKeyRegister):
    """Alice's circuit: CNOT from pair 2i, then CZ from pair 2i+1, onto qubit i.

    Returns the cipher-text indices (the message qubits themselves).
    """
    message = _check(message, key)
    if key.in_use or not key.live.all():
        raise ValueError("key register is stale; allocate fresh pairs")
    key.in_use = True
    st = key.state
    for i, m in enumerate(message):
        st.apply("CNOT", int(key.alice[2 * i]), m)
        st.apply("CZ", int(key.alice[2 * i + 1]), m)
    return message


def qvc_decode(cipher, key: EbitKeyRegister):
    """Bob's circuit: CZ from pair 2i+1, then CNOT from pair 2i."""
    cipher = _check(cipher, key)
    if not key.in_use:
        raise ValueError("key register was not used to encode")
    st = key.state
    for i, m in enumerate(cipher):
        st.apply("CZ", int(key.bob[2 * i + 1]), m)
        st.apply("CNOT", int(key.bob[2 * i]), m)
    key.in_use = False
    return cipher


def predicted_syndrome(error: PauliOperator) -> SyndromeVector:
    """Key pattern left by a cipher-text error: Z flags pair 2i, X flags pair 2i+1."""
    return SyndromeVector.from_pauli(error)


def correct_message(state, message, syndrome: SyndromeVector) -> None:
    """Undo the flagged Pauli error on the decoded message."""
    for i, m in enumerate(message):
        if syndrome.bits[2 * i + 1]:
            state.apply("X", int(m))
        if syndrome.bits[2 * i]:
            state.apply("Z", int(m))
