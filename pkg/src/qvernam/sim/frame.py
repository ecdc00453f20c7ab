"""Pauli-frame engine for Bell-pair registers.

The frame tracks only the Pauli *deviation* of the actual state from a
reference state.  The reference is the circuit with every Pauli gate
removed; for the key-recycling protocols it keeps every registered pair in
Phi+ whenever the pairs are measured.  Clifford gates conjugate the frame,
Pauli gates and channel errors flip it.

Pair measurements are exact for pairs whose reference state is Phi+: the
first party's outcome is uniform and the second differs by the frame's
parity.  Nothing else is measurable here; use the tableau engine for
general states.
"""
from __future__ import annotations

import numpy as np

from .pauli import BellLabel, PauliOperator

__all__ = ["FrameState"]


class FrameState:
    """X/Z error frame over ``n`` qubits."""

    d = 2

    def __init__(self, n: int):
        self.n = int(n)
        self.x = np.zeros(self.n, dtype=np.uint8)
        self.z = np.zeros(self.n, dtype=np.uint8)

    def copy(self) -> "FrameState":
        out = FrameState(self.n)
        out.x[:] = self.x
        out.z[:] = self.z
        return out

    def _q(self, q) -> int:
        q = int(q)
        if not 0 <= q < self.n:
            raise IndexError(f"qubit {q} out of range for n={self.n}")
        return q

    def apply(self, gate: str, *targets) -> "FrameState":
        g = gate.upper()
        qs = [self._q(t) for t in targets]
        if g in ("I", "X", "Y", "Z"):
            if len(qs) != 1:
                raise ValueError(f"gate {gate} expects 1 target")
            (q,) = qs
            if g in ("X", "Y"):
                self.x[q] ^= 1
            if g in ("Z", "Y"):
                self.z[q] ^= 1
        elif g == "H":
            (q,) = qs
            self.x[q], self.z[q] = self.z[q], self.x[q]
        elif g in ("CNOT", "CX"):
            a, b = qs
            self.x[b] ^= self.x[a]
            self.z[a] ^= self.z[b]
        elif g == "CZ":
            a, b = qs
            self.z[a] ^= self.x[b]
            self.z[b] ^= self.x[a]
        elif g == "SWAP":
            a, b = qs
            self.x[[a, b]] = self.x[[b, a]]
            self.z[[a, b]] = self.z[[b, a]]
        else:
            raise ValueError(f"gate {gate!r} is not supported by the frame engine")
        return self

    def apply_pauli(self, op: PauliOperator, qubits=None) -> "FrameState":
        qubits = np.arange(self.n) if qubits is None else np.asarray(list(qubits), dtype=np.int64)
        if op.d != 2 or op.n != qubits.size:
            raise ValueError("operator does not match the qubit list")
        self.x[qubits] ^= op.x
        self.z[qubits] ^= op.z
        return self

    def cnot_fanout(self, control: int, targets) -> None:
        """CNOT from ``control`` onto each target (vectorised)."""
        t = np.asarray(list(targets), dtype=np.int64)
        if t.size == 0:
            return
        c = self._q(control)
        self.x[t] ^= self.x[c]
        self.z[c] ^= np.bitwise_xor.reduce(self.z[t])

    def pair_label(self, a: int, b: int) -> BellLabel:
        """Bell label of a pair whose reference state is Phi+."""
        return BellLabel.from_bits(self.z[a] ^ self.z[b], self.x[a] ^ self.x[b])

    def measure_pair(self, a: int, b: int, basis: str, rng):
        """Both halves measured locally in the same basis ('x' or 'z')."""
        first = int(rng.integers(0, 2))
        if basis == "x":
            return first, first ^ int(self.z[a] ^ self.z[b])
        if basis == "z":
            return first, first ^ int(self.x[a] ^ self.x[b])
        raise ValueError("basis must be 'x' or 'z'")

    def measure_pairs(self, a, b, basis: str, rng):
        """Vectorised ``measure_pair`` over index arrays."""
        a = np.asarray(a, dtype=np.int64)
        b = np.asarray(b, dtype=np.int64)
        first = rng.integers(0, 2, size=a.size, dtype=np.uint8)
        if basis == "x":
            return first, first ^ self.z[a] ^ self.z[b]
        if basis == "z":
            return first, first ^ self.x[a] ^ self.x[b]
        raise ValueError("basis must be 'x' or 'z'")

    def error_on(self, qubits) -> PauliOperator:
        """Residual Pauli error on the listed qubits."""
        q = list(qubits)
        return PauliOperator(self.x[q], self.z[q], 0, 2)
