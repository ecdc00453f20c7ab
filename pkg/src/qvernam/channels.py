"""Adversary models acting on transmitted qubits.

Pauli channels use trajectory semantics: one Pauli is sampled per call
and applied; the sampled operator is returned to the caller (the test
harness), never to the protocol parties.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .sim import DenseState, PauliOperator

__all__ = [
    "PauliChannel",
    "UnitaryAttack",
    "InterceptResendAttack",
    "PRESETS",
    "preset",
    "apply_pauli_channel",
    "apply_unitary_attack",
    "apply_intercept_resend",
    "channel_entropy",
    "shannon",
]

# single-qubit Pauli classes in the order I, X, Z, XZ with (x, z) bits
CLASSES = ("I", "X", "Z", "XZ")
_CLASS_BITS = {"I": (0, 0), "X": (1, 0), "Z": (0, 1), "XZ": (1, 1)}

PRESETS = {
    "noiseless": {"I": 1.0},
    "z-measure-all": {"I": 0.5, "Z": 0.5},
    "paper-mix": {"I": 0.5, "X": 1 / 6, "Z": 1 / 6, "XZ": 1 / 6},
    "depolarizing-complete": {"I": 0.25, "X": 0.25, "Z": 0.25, "XZ": 0.25},
}


def shannon(probs) -> float:
    """Shannon entropy in bits with 0 log 0 = 0."""
    p = np.asarray(list(probs), dtype=float)
    p = p[p > 0]
    return float(-(p * np.log2(p)).sum())


def _norm_class(key: str) -> str:
    k = key.strip().upper()
    if k == "Y" or k == "ZX":
        k = "XZ"
    if k not in _CLASS_BITS:
        raise ValueError(f"unknown single-qubit Pauli class {key!r}")
    return k


class PauliChannel:
    """Distribution over n-qubit Pauli errors.

    Either an explicit ``distribution`` mapping operators (or labels) to
    probabilities, or ``per_qubit`` class probabilities over
    ``{I, X, Z, XZ}`` applied independently to each qubit in ``targets``.
    """

    def __init__(self, n: int, distribution=None, per_qubit=None, targets=None, name: str | None = None):
        if (distribution is None) == (per_qubit is None):
            raise ValueError("give exactly one of distribution or per_qubit")
        self.n = int(n)
        self.name = name
        if distribution is not None:
            ops, probs = [], []
            for key, p in distribution.items():
                op = key if isinstance(key, PauliOperator) else PauliOperator.from_label(str(key), self.n)
                if op.n != self.n or op.d != 2:
                    raise ValueError(f"operator {op!r} does not act on {self.n} qubits")
                ops.append(op.strip_phase())
                probs.append(float(p))
            self._check(probs)
            self.terms = list(zip(ops, probs))
            self.per_qubit = None
            self.targets = None
            self._cum = np.cumsum(probs)
        else:
            pq = {_norm_class(k): float(v) for k, v in per_qubit.items()}
            self._check(pq.values())
            self.per_qubit = {c: pq.get(c, 0.0) for c in CLASSES}
            self.targets = list(range(self.n)) if targets is None else sorted(int(t) for t in targets)
            if any(not 0 <= t < self.n for t in self.targets):
                raise ValueError("channel targets out of range")
            self.terms = None

    @staticmethod
    def _check(probs):
        probs = list(probs)
        if any(p < 0 for p in probs) or not probs:
            raise ValueError("probabilities must be non-negative")
        if abs(sum(probs) - 1) > 1e-12:
            raise ValueError(f"probabilities sum to {sum(probs)}, not 1")

    @property
    def is_product(self) -> bool:
        return self.per_qubit is not None

    def sample_bits(self, rng, trials: int | None = None):
        """Sampled error as (x, z) uint8 arrays; shape (n,) or (trials, n)."""
        shape = (1 if trials is None else trials, self.n)
        x = np.zeros(shape, np.uint8)
        z = np.zeros(shape, np.uint8)
        if self.is_product:
            probs = np.array([self.per_qubit[c] for c in CLASSES])
            cls = np.searchsorted(np.cumsum(probs), rng.random((shape[0], len(self.targets))), side="right")
            cls = np.minimum(cls, 3)
            x[:, self.targets] = (cls == 1) | (cls == 3)
            z[:, self.targets] = (cls == 2) | (cls == 3)
        else:
            idx = np.searchsorted(self._cum, rng.random(shape[0]) * self._cum[-1], side="right")
            idx = np.minimum(idx, len(self.terms) - 1)
            for row, k in enumerate(idx):
                x[row] = self.terms[k][0].x
                z[row] = self.terms[k][0].z
        if trials is None:
            return x[0], z[0]
        return x, z

    def sample(self, rng) -> PauliOperator:
        x, z = self.sample_bits(rng)
        return PauliOperator(x, z)

    def marginal(self, qubit: int) -> dict:
        """Class probabilities of the error on one qubit."""
        if self.is_product:
            return dict(self.per_qubit) if qubit in self.targets else {"I": 1.0, "X": 0.0, "Z": 0.0, "XZ": 0.0}
        out = dict.fromkeys(CLASSES, 0.0)
        for op, p in self.terms:
            out[CLASSES[int(op.x[qubit]) + 2 * int(op.z[qubit])]] += p
        return out

    def flag_rates(self) -> tuple[np.ndarray, np.ndarray]:
        """Per-qubit probabilities of a Z component and of an X component."""
        zr = np.zeros(self.n)
        xr = np.zeros(self.n)
        for q in range(self.n):
            m = self.marginal(q)
            zr[q] = m["Z"] + m["XZ"]
            xr[q] = m["X"] + m["XZ"]
        return zr, xr

    def __repr__(self) -> str:
        kind = self.name or ("product" if self.is_product else "explicit")
        return f"PauliChannel(n={self.n}, {kind})"


def preset(name: str, n: int, targets=None) -> PauliChannel:
    """Expand a named preset into an i.i.d. product channel on ``targets``."""
    if name not in PRESETS:
        raise ValueError(f"unknown channel preset {name!r}; choose from {sorted(PRESETS)}")
    return PauliChannel(n, per_qubit=PRESETS[name], targets=targets, name=name)


def channel_entropy(channel: PauliChannel) -> float:
    """Entropy in bits of the sampled Pauli error."""
    if channel.is_product:
        return len(channel.targets) * shannon(channel.per_qubit.values())
    return shannon(p for _, p in channel.terms)


def apply_pauli_channel(state, channel: PauliChannel, cipher, rng):
    """Sample one Pauli from ``channel`` and apply it to ``cipher`` qubits."""
    cipher = list(cipher)
    if len(cipher) != channel.n:
        raise ValueError(f"channel acts on {channel.n} qubits, got {len(cipher)} indices")
    op = channel.sample(rng)
    state.apply_pauli(op, cipher)
    return state, op


@dataclass
class UnitaryAttack:
    """Joint unitary on the cipher-text and a fresh |0...0> ancilla."""

    ancilla: int
    unitary: np.ndarray

    def __post_init__(self):
        U = np.asarray(self.unitary, dtype=complex)
        if U.ndim != 2 or U.shape[0] != U.shape[1]:
            raise ValueError("unitary must be a square matrix")
        if np.max(np.abs(U.conj().T @ U - np.eye(U.shape[0]))) > 1e-9:
            raise ValueError("matrix is not unitary within 1e-9")
        self.unitary = U

    @property
    def cipher_size(self) -> int:
        return int(round(math.log2(self.unitary.shape[0]))) - self.ancilla

    @classmethod
    def from_pauli_channel(cls, channel: PauliChannel) -> "UnitaryAttack":
        """Coherent realisation: ancilla in sum sqrt(p_i)|i>, then controlled P_i."""
        if channel.is_product:
            raise ValueError("expand product channels to an explicit distribution first")
        terms = channel.terms
        a = max(1, math.ceil(math.log2(len(terms))))
        dim_a, dim_c = 2**a, 2**channel.n
        amp = np.zeros(dim_a)
        amp[: len(terms)] = np.sqrt([p for _, p in terms])
        # complete amp to an orthonormal basis (first column = amp)
        M = np.eye(dim_a)
        M[:, 0] = amp
        V, _ = np.linalg.qr(M)
        V = V * np.sign(V[:, 0] @ amp)
        prep = np.kron(V, np.eye(dim_c))
        ctrl = np.zeros((dim_a * dim_c, dim_a * dim_c), dtype=complex)
        for i in range(dim_a):
            proj = np.zeros((dim_a, dim_a))
            proj[i, i] = 1
            P = terms[i][0].to_matrix() if i < len(terms) else np.eye(dim_c)
            ctrl += np.kron(proj, P)
        return cls(a, ctrl @ prep)


def apply_unitary_attack(state: DenseState, attack: UnitaryAttack, cipher):
    """Extend ``state`` by the ancilla and apply the attack unitary.

    Returns ``(new_state, ancilla_indices)``; the ancilla occupies the top
    indices of the new register.
    """
    if not isinstance(state, DenseState):
        raise TypeError("unitary attacks need the dense engine")
    cipher = list(cipher)
    if len(cipher) != attack.cipher_size:
        raise ValueError("attack size does not match the cipher-text")
    out = state.extend(attack.ancilla)
    anc = list(range(state.n, state.n + attack.ancilla))
    out.apply_matrix(attack.unitary, cipher + anc)
    return out, anc


@dataclass
class InterceptResendAttack:
    """Measure-and-resend on selected qubits; basis 'z', 'x' or 'random'."""

    intercept: list = field(default_factory=list)
    basis: str = "z"

    def __post_init__(self):
        if self.basis not in ("z", "x", "random"):
            raise ValueError("basis policy must be 'z', 'x' or 'random'")
        self.intercept = [int(q) for q in self.intercept]


def apply_intercept_resend(state, attack: InterceptResendAttack, rng):
    """Measure each tapped qubit; the collapsed eigenstate is what is resent.

    Returns ``(state, record)`` with record entries ``(qubit, basis, bit)``.
    """
    record = []
    for q in attack.intercept:
        if not 0 <= q < state.n:
            raise IndexError(f"qubit {q} out of range")
        basis = attack.basis
        if basis == "random":
            basis = "x" if rng.integers(0, 2) else "z"
        bit = state.measure_x(q, rng) if basis == "x" else state.measure_z(q, rng)
        record.append((q, basis, int(bit)))
    return state, record
