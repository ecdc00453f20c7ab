"""Generalized Pauli operators on qubits and qutrits.

An operator is stored as ``w**phase * X^x Z^z`` where ``X^x Z^z`` is the
tensor product over qudits (qudit 0 least significant) and
``w = exp(i*pi/d)``.  For qubits ``w = i`` so ``Y = i X Z`` has
``x = z = 1, phase = 1``.  For qutrits the physical phases are powers of
``w**2 = exp(2*pi*i/3)``.
"""
from __future__ import annotations

import enum
import re
from functools import reduce

import numpy as np

__all__ = ["PauliOperator", "BellLabel", "single_qudit_matrices"]


def single_qudit_matrices(d: int):
    """Return the shift and clock matrices ``(X, Z)`` for dimension ``d``."""
    X = np.roll(np.eye(d), 1, axis=0).astype(complex)
    Z = np.diag(np.exp(2j * np.pi * np.arange(d) / d))
    return X, Z


_TOKEN = re.compile(r"^([IXYZ]+)(\d+)$")


class PauliOperator:
    """n-qudit Pauli ``w**phase X^x Z^z`` with ``w = exp(i pi / d)``."""

    __slots__ = ("n", "d", "x", "z", "phase")

    def __init__(self, x, z, phase: int = 0, d: int = 2):
        x = np.asarray(x, dtype=np.int64).ravel()
        z = np.asarray(z, dtype=np.int64).ravel()
        if x.shape != z.shape:
            raise ValueError("x and z exponent vectors must have equal length")
        if d not in (2, 3):
            raise ValueError(f"unsupported local dimension {d}")
        self.n = int(x.size)
        self.d = int(d)
        self.x = np.mod(x, d).astype(np.uint8)
        self.z = np.mod(z, d).astype(np.uint8)
        self.phase = int(phase) % (2 * d)

    # construction -------------------------------------------------------
    @classmethod
    def identity(cls, n: int, d: int = 2) -> "PauliOperator":
        return cls(np.zeros(n, int), np.zeros(n, int), 0, d)

    @classmethod
    def single(cls, n: int, qudit: int, x: int = 0, z: int = 0, d: int = 2):
        """Operator ``X^x Z^z`` on one qudit of an n-qudit register."""
        if not 0 <= qudit < n:
            raise IndexError(f"qudit {qudit} out of range for n={n}")
        xs = np.zeros(n, int)
        zs = np.zeros(n, int)
        xs[qudit] = x
        zs[qudit] = z
        return cls(xs, zs, 0, d)

    @classmethod
    def from_label(cls, label: str, n: int | None = None) -> "PauliOperator":
        """Parse a qubit Pauli label.

        Dense labels list one letter per qubit, qubit 0 first: ``"XIZ"``.
        Sparse labels are whitespace-separated tokens ``<letters><index>``,
        e.g. ``"X0 Z2"`` or ``"XZ1"`` (X times Z on qubit 1); they need ``n``.
        ``Y`` means the Hermitian ``iXZ``.  A leading ``-`` negates.
        """
        text = label.strip()
        sign = 0
        if text.startswith("-"):
            sign, text = 2, text[1:].strip()
        elif text.startswith("+"):
            text = text[1:].strip()
        tokens = text.split()
        sparse = any(ch.isdigit() for ch in text)
        if not sparse:
            if len(tokens) != 1:
                raise ValueError(f"bad Pauli label {label!r}")
            word = tokens[0]
            if n is not None and len(word) != n:
                raise ValueError(f"label {label!r} does not have {n} qubits")
            n = len(word)
            items = list(enumerate(word))
        else:
            if n is None:
                raise ValueError("sparse Pauli labels need an explicit n")
            items = []
            for tok in tokens:
                m = _TOKEN.match(tok)
                if not m:
                    raise ValueError(f"bad Pauli token {tok!r}")
                items.append((int(m.group(2)), m.group(1)))
        op = cls.identity(n)
        for q, letters in items:
            if q >= n:
                raise IndexError(f"qubit {q} out of range for n={n}")
            for ch in letters:
                if ch == "I":
                    continue
                if ch not in "XYZ":
                    raise ValueError(f"unknown Pauli letter {ch!r}")
                xb, zb, ph = {"X": (1, 0, 0), "Z": (0, 1, 0), "Y": (1, 1, 1)}[ch]
                op = op * cls.single(n, q, xb, zb)
                op = op.with_phase(op.phase + ph)
        return op.with_phase(op.phase + sign)

    def with_phase(self, phase: int) -> "PauliOperator":
        return PauliOperator(self.x, self.z, phase, self.d)

    # algebra ------------------------------------------------------------
    def _check(self, other: "PauliOperator"):
        if not isinstance(other, PauliOperator):
            raise TypeError("expected a PauliOperator")
        if other.n != self.n or other.d != self.d:
            raise ValueError("operators act on different registers")

    def __mul__(self, other: "PauliOperator") -> "PauliOperator":
        # Z^a X^b = w^(2ab) X^b Z^a, since ZX = exp(2 pi i / d) XZ.
        self._check(other)
        cross = int(np.dot(self.z.astype(np.int64), other.x.astype(np.int64)))
        ph = self.phase + other.phase + 2 * cross
        return PauliOperator(
            self.x.astype(np.int64) + other.x,
            self.z.astype(np.int64) + other.z,
            ph,
            self.d,
        )

    def __pow__(self, k: int) -> "PauliOperator":
        out = PauliOperator.identity(self.n, self.d)
        if k < 0:
            raise ValueError("negative powers are not supported")
        for _ in range(int(k)):
            out = out * self
        return out

    def symplectic(self, other: "PauliOperator") -> int:
        """Commutation exponent c with ``P Q = exp(2 pi i c / d) Q P``."""
        self._check(other)
        a = np.dot(self.z.astype(np.int64), other.x.astype(np.int64))
        b = np.dot(self.x.astype(np.int64), other.z.astype(np.int64))
        return int(a - b) % self.d

    def commutes(self, other: "PauliOperator") -> bool:
        return self.symplectic(other) == 0

    def is_identity(self) -> bool:
        return not self.x.any() and not self.z.any()

    @property
    def weight(self) -> int:
        return int(np.count_nonzero(self.x | self.z))

    def support(self) -> list[int]:
        return [int(i) for i in np.flatnonzero(self.x | self.z)]

    def is_hermitian(self) -> bool:
        if self.d != 2:
            return self.is_identity() and self.phase % self.d == 0
        return (self.phase - int(np.count_nonzero(self.x & self.z))) % 2 == 0

    def embed(self, n_total: int, qudits) -> "PauliOperator":
        """Place this operator on the given qudits of a larger register."""
        qudits = list(qudits)
        if len(qudits) != self.n:
            raise ValueError("qudit list must match operator size")
        x = np.zeros(n_total, int)
        z = np.zeros(n_total, int)
        x[qudits] = self.x
        z[qudits] = self.z
        return PauliOperator(x, z, self.phase, self.d)

    def restrict(self, qudits) -> "PauliOperator":
        """Tensor factor on the listed qudits (phase kept)."""
        qudits = list(qudits)
        return PauliOperator(self.x[qudits], self.z[qudits], self.phase, self.d)

    def strip_phase(self) -> "PauliOperator":
        return PauliOperator(self.x, self.z, 0, self.d)

    # matrices -----------------------------------------------------------
    def to_matrix(self) -> np.ndarray:
        """Dense matrix in the little-endian basis (qudit 0 least significant)."""
        if self.n > 12:
            raise ValueError("matrix form limited to 12 qudits")
        X, Z = single_qudit_matrices(self.d)
        factors = [
            np.linalg.matrix_power(X, int(self.x[q])) @ np.linalg.matrix_power(Z, int(self.z[q]))
            for q in range(self.n)
        ]
        mat = reduce(np.kron, reversed(factors), np.eye(1, dtype=complex))
        return np.exp(1j * np.pi * self.phase / self.d) * mat

    # identity and display ----------------------------------------------
    def _key(self):
        return (self.d, self.phase, self.x.tobytes(), self.z.tobytes())

    def __eq__(self, other) -> bool:
        return isinstance(other, PauliOperator) and self._key() == other._key()

    def __hash__(self) -> int:
        return hash(self._key())

    def label(self) -> str:
        """Readable label; qubit operators use I/X/Y/Z with Y = iXZ."""
        if self.d == 2:
            letters = "".join(
                "IZXY"[int(self.x[q]) * 2 + int(self.z[q])] for q in range(self.n)
            )
            ph = (self.phase - int(np.count_nonzero(self.x & self.z))) % 4
            return ["+", "+i", "-", "-i"][ph] + letters
        parts = [f"X{self.x[q]}Z{self.z[q]}" for q in range(self.n)]
        return f"w^{self.phase} " + " ".join(parts)

    def __repr__(self) -> str:
        return f"PauliOperator({self.label()!r})"


class BellLabel(enum.Enum):
    """Bell states keyed by (z-bit, x-bit) relative to Phi+."""

    PHI_PLUS = (0, 0)
    PHI_MINUS = (1, 0)
    PSI_PLUS = (0, 1)
    PSI_MINUS = (1, 1)

    @property
    def zbit(self) -> int:
        return self.value[0]

    @property
    def xbit(self) -> int:
        return self.value[1]

    @classmethod
    def from_bits(cls, zbit: int, xbit: int) -> "BellLabel":
        return cls((int(zbit) & 1, int(xbit) & 1))

    def __str__(self) -> str:
        return {(0, 0): "Φ+", (1, 0): "Φ-", (0, 1): "Ψ+", (1, 1): "Ψ-"}[self.value]
