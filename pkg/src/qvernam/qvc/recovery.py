"""Recovering a message whose cipher-text was lost.

If the transmitted qubits are traced out, Bob can substitute fresh |0>
qubits and run the ordinary decode circuit.  The key pairs then carry the
labels of a random Pauli X^s Z^t that maps the substituted state onto the
original message, so measuring the pairs and correcting restores it.
"""
from __future__ import annotations

import numpy as np

from .cipher import correct_message, qvc_decode
from .register import EbitKeyRegister, SyndromeVector

__all__ = ["discard_ciphertext", "recover_without_ciphertext"]


def discard_ciphertext(key: EbitKeyRegister, cipher, rng) -> None:
    """Model losing the cipher-text: an unrecorded Z measurement, then reset to |0>."""
    for q in cipher:
        key.state.measure_z(int(q), rng)
        key.state.reset(int(q), rng)
    key.lost = set(int(q) for q in cipher)


def recover_without_ciphertext(key: EbitKeyRegister, substitutes, rng, round: int = 0):
    """Decode ``substitutes`` (fresh |0> qubits) and undo the flagged Pauli.

    Returns the identified SyndromeVector; bit 2i marks a Z and bit 2i+1 an
    X on recovered qubit i.  Every key pair is consumed.
    """
    substitutes = [int(q) for q in substitutes]
    lost = getattr(key, "lost", None)
    if lost is None or set(substitutes) != lost:
        raise ValueError("cipher-text still present; discard it before recovering")
    qvc_decode(substitutes, key)
    bits = key.measure_pairs_x(np.arange(key.size), rng)
    key.transcript.post("both", "recovery-syndrome", bits, round=round)
    syn = SyndromeVector(bits)
    correct_message(key.state, substitutes, syn)
    key.lost = None
    return syn
