"""Stabilizer tableau engine (destabilizer form, bit-packed rows).

Rows ``0..n-1`` are destabilizers, rows ``n..2n-1`` stabilizers and row
``2n`` is scratch space for deterministic measurements.  Each row holds
packed X and Z bit masks (64 qubits per ``uint64`` word) and a sign bit;
a row ``(x, z, r)`` denotes ``(-1)^r`` times the tensor product of I, X,
Z, Y = iXZ letters.
"""
from __future__ import annotations

import numpy as np

from .pauli import PauliOperator

__all__ = ["StabilizerState", "CLIFFORD_GATES"]

_ONE = np.uint64(1)

CLIFFORD_GATES = {
    "I": 1, "X": 1, "Y": 1, "Z": 1, "H": 1, "S": 1, "SDG": 1,
    "CNOT": 2, "CX": 2, "CZ": 2, "SWAP": 2,
}


def _pack(bits, words: int) -> np.ndarray:
    raw = np.packbits(np.asarray(bits, dtype=np.uint8) & 1, bitorder="little")
    buf = np.zeros(words * 8, dtype=np.uint8)
    buf[: raw.size] = raw
    return buf.view("<u8").astype(np.uint64)


def _unpack(words: np.ndarray, n: int) -> np.ndarray:
    return np.unpackbits(words.astype("<u8").view(np.uint8), bitorder="little")[:n]


def _phase_g(x1, z1, x2, z2) -> np.ndarray:
    """Sum over qubits of the i-exponent picked up by P1 * P2 (per target row)."""
    y1 = x1 & z1
    xo = x1 & ~z1
    zo = ~x1 & z1
    plus = (y1 & z2 & ~x2) | (xo & z2 & x2) | (zo & x2 & ~z2)
    minus = (y1 & x2 & ~z2) | (xo & z2 & ~x2) | (zo & x2 & z2)
    return (
        np.bitwise_count(plus).sum(axis=-1, dtype=np.int64)
        - np.bitwise_count(minus).sum(axis=-1, dtype=np.int64)
    )


class StabilizerState:
    """Pure n-qubit stabilizer state, initialised to |0...0>."""

    d = 2

    def __init__(self, n: int):
        if n < 1:
            raise ValueError("need at least one qubit")
        self.n = int(n)
        self.words = (self.n + 63) // 64
        rows = 2 * self.n + 1
        self.x = np.zeros((rows, self.words), dtype=np.uint64)
        self.z = np.zeros((rows, self.words), dtype=np.uint64)
        self.r = np.zeros(rows, dtype=np.uint8)
        for q in range(self.n):
            w, s = q >> 6, np.uint64(q & 63)
            self.x[q, w] |= _ONE << s
            self.z[self.n + q, w] |= _ONE << s

    def copy(self) -> "StabilizerState":
        out = object.__new__(StabilizerState)
        out.n, out.words = self.n, self.words
        out.x, out.z, out.r = self.x.copy(), self.z.copy(), self.r.copy()
        return out

    # column helpers ---------------------------------------------------
    def _check_qubit(self, q: int) -> int:
        q = int(q)
        if not 0 <= q < self.n:
            raise IndexError(f"qubit {q} out of range for n={self.n}")
        return q

    def _col(self, arr, q):
        return (arr[:, q >> 6] >> np.uint64(q & 63)) & _ONE

    def _flip(self, arr, q, bits):
        arr[:, q >> 6] ^= bits << np.uint64(q & 63)

    # gates ------------------------------------------------------------
    def apply(self, gate: str, *targets) -> "StabilizerState":
        g = gate.upper()
        if g not in CLIFFORD_GATES:
            raise ValueError(f"gate {gate!r} is not available on the stabilizer engine")
        if len(targets) != CLIFFORD_GATES[g]:
            raise ValueError(f"gate {gate} expects {CLIFFORD_GATES[g]} targets, got {len(targets)}")
        qs = [self._check_qubit(q) for q in targets]
        if len(qs) == 2 and qs[0] == qs[1]:
            raise ValueError("two-qubit gate needs distinct targets")
        getattr(self, "_g_" + {"CX": "CNOT"}.get(g, g))(*qs)
        return self

    def _g_I(self, q):
        pass

    def _g_X(self, q):
        self.r ^= self._col(self.z, q).astype(np.uint8)

    def _g_Z(self, q):
        self.r ^= self._col(self.x, q).astype(np.uint8)

    def _g_Y(self, q):
        self.r ^= (self._col(self.x, q) ^ self._col(self.z, q)).astype(np.uint8)

    def _g_H(self, q):
        xq, zq = self._col(self.x, q), self._col(self.z, q)
        self.r ^= (xq & zq).astype(np.uint8)
        diff = xq ^ zq
        self._flip(self.x, q, diff)
        self._flip(self.z, q, diff)

    def _g_S(self, q):
        xq, zq = self._col(self.x, q), self._col(self.z, q)
        self.r ^= (xq & zq).astype(np.uint8)
        self._flip(self.z, q, xq)

    def _g_SDG(self, q):
        for _ in range(3):
            self._g_S(q)

    def _g_CNOT(self, a, b):
        xa, za = self._col(self.x, a), self._col(self.z, a)
        xb, zb = self._col(self.x, b), self._col(self.z, b)
        self.r ^= (xa & zb & (xb ^ za ^ _ONE)).astype(np.uint8)
        self._flip(self.x, b, xa)
        self._flip(self.z, a, zb)

    def _g_CZ(self, a, b):
        self._g_H(b)
        self._g_CNOT(a, b)
        self._g_H(b)

    def _g_SWAP(self, a, b):
        for arr in (self.x, self.z):
            diff = self._col(arr, a) ^ self._col(arr, b)
            self._flip(arr, a, diff)
            self._flip(arr, b, diff)

    def apply_pauli(self, op: PauliOperator, qubits=None) -> "StabilizerState":
        """Apply a Pauli (global phase dropped) on ``qubits``."""
        qubits = list(range(self.n)) if qubits is None else list(qubits)
        if op.d != 2 or op.n != len(qubits):
            raise ValueError("operator does not match the qubit list")
        xs = np.zeros(self.n, np.uint8)
        zs = np.zeros(self.n, np.uint8)
        xs[qubits] = op.x
        zs[qubits] = op.z
        xm, zm = _pack(xs, self.words), _pack(zs, self.words)
        par = np.bitwise_count((self.z & xm) ^ (self.x & zm)).sum(axis=1) & 1
        self.r ^= par.astype(np.uint8)
        return self

    def cnot_fanout(self, control: int, targets) -> None:
        for t in targets:
            self.apply("CNOT", control, t)

    # row algebra ------------------------------------------------------
    def _rowsum(self, h, i: int) -> None:
        h = np.atleast_1d(np.asarray(h, dtype=np.int64))
        if h.size == 0:
            return
        g = _phase_g(self.x[i], self.z[i], self.x[h], self.z[h])
        tot = 2 * self.r[h].astype(np.int64) + 2 * int(self.r[i]) + g
        self.r[h] = (np.mod(tot, 4) // 2).astype(np.uint8)
        self.x[h] ^= self.x[i]
        self.z[h] ^= self.z[i]

    def _observable(self, obs: PauliOperator):
        if not isinstance(obs, PauliOperator):
            raise TypeError("observable must be a PauliOperator")
        if obs.d != 2:
            raise ValueError("stabilizer engine measures qubit Paulis only")
        if obs.n != self.n:
            raise ValueError(f"observable acts on {obs.n} qubits, state has {self.n}")
        if not obs.is_hermitian():
            raise ValueError("observable must be Hermitian")
        if obs.is_identity():
            raise ValueError("cannot measure the identity")
        ny = int(np.count_nonzero(obs.x & obs.z))
        sign = ((obs.phase - ny) % 4) // 2
        return _pack(obs.x, self.words), _pack(obs.z, self.words), sign

    def _anticommuting(self, xp, zp) -> np.ndarray:
        rows = slice(0, 2 * self.n)
        par = np.bitwise_count((self.x[rows] & zp) ^ (self.z[rows] & xp)).sum(axis=1)
        return (par & 1).astype(bool)

    def _product_sign(self, ac, xp, zp) -> int:
        """Sign of the stabilizer product matching a commuting observable."""
        s = 2 * self.n
        self.x[s] = 0
        self.z[s] = 0
        self.r[s] = 0
        for i in np.flatnonzero(ac[: self.n]):
            self._rowsum(s, int(i) + self.n)
        if not (np.array_equal(self.x[s], xp) and np.array_equal(self.z[s], zp)):
            raise RuntimeError("observable commutes with the stabilizer but is not in it")
        return int(self.r[s])

    def measure(self, obs: PauliOperator, rng) -> int:
        """Measure a Hermitian Pauli; return k with eigenvalue (-1)^k."""
        xp, zp, sign = self._observable(obs)
        ac = self._anticommuting(xp, zp)
        stab_hits = np.flatnonzero(ac[self.n:])
        if stab_hits.size == 0:
            return self._product_sign(ac, xp, zp) ^ sign
        p = int(stab_hits[0]) + self.n
        outcome = int(rng.integers(0, 2))
        others = np.flatnonzero(ac)
        others = others[others != p]
        self._rowsum(others, p)
        d = p - self.n
        self.x[d], self.z[d], self.r[d] = self.x[p], self.z[p], self.r[p]
        self.x[p], self.z[p], self.r[p] = xp, zp, sign ^ outcome
        return outcome

    def stabilizer_sign(self, obs: PauliOperator) -> int:
        """+1 or -1 if +-obs is in the stabilizer group, else 0 (non-destructive)."""
        xp, zp, sign = self._observable(obs)
        ac = self._anticommuting(xp, zp)
        if ac[self.n:].any():
            return 0
        return -1 if self._product_sign(ac, xp, zp) ^ sign else 1

    def measure_z(self, q: int, rng) -> int:
        return self.measure(PauliOperator.single(self.n, self._check_qubit(q), 0, 1), rng)

    def measure_x(self, q: int, rng) -> int:
        return self.measure(PauliOperator.single(self.n, self._check_qubit(q), 1, 0), rng)

    def reset(self, q: int, rng) -> None:
        """Return qubit q to |0> (measure Z, flip on outcome 1)."""
        if self.measure_z(q, rng):
            self.apply("X", q)

    # inspection -------------------------------------------------------
    def _row_operator(self, i: int) -> PauliOperator:
        x = _unpack(self.x[i], self.n)
        z = _unpack(self.z[i], self.n)
        ny = int(np.count_nonzero(x & z))
        return PauliOperator(x, z, 2 * int(self.r[i]) + ny, 2)

    def stabilizers(self) -> list[PauliOperator]:
        return [self._row_operator(i) for i in range(self.n, 2 * self.n)]

    def destabilizers(self) -> list[PauliOperator]:
        return [self._row_operator(i) for i in range(self.n)]

    def check_invariants(self) -> None:
        """Raise if the tableau violates the destabilizer-form relations."""
        stabs = self.stabilizers()
        destabs = self.destabilizers()
        for i in range(self.n):
            for j in range(self.n):
                if not stabs[i].commutes(stabs[j]):
                    raise AssertionError(f"stabilizers {i} and {j} anticommute")
                if not destabs[i].commutes(destabs[j]):
                    raise AssertionError(f"destabilizers {i} and {j} anticommute")
                expect = i != j
                if destabs[i].commutes(stabs[j]) != expect:
                    raise AssertionError(f"destabilizer {i} vs stabilizer {j}")

    def __repr__(self) -> str:
        return f"StabilizerState(n={self.n}, stabilizers={[s.label() for s in self.stabilizers()]})"
