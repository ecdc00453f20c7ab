"""Shared Bell-pair key registers, ancilla pools and round allocation.

Pair ``k`` of an n-qubit key is ``(alice[k], bob[k])``.  Message qubit ``i``
uses pair ``2i`` as its CNOT (X-key) pair and pair ``2i + 1`` as its CZ
(Z-key) pair.  Syndrome bit ``2i`` therefore flags a Z error on qubit ``i``
and bit ``2i + 1`` flags an X error.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..sim import BellLabel, DenseState, FrameState, PauliOperator, StabilizerState, bell_identify
from ..transcript import Transcript

__all__ = [
    "EbitKeyRegister",
    "AncillaPool",
    "SyndromeVector",
    "QVCRound",
    "allocate_round",
    "message_fidelity",
]


class SyndromeVector:
    """The 2n-bit Phi+/Phi- pattern of a key register (1 = Phi-)."""

    __slots__ = ("bits",)

    def __init__(self, bits):
        b = np.asarray(bits, dtype=np.uint8).ravel() & 1
        if b.size % 2:
            raise ValueError("syndrome length must be even (two pairs per qubit)")
        self.bits = b

    @property
    def n(self) -> int:
        return self.bits.size // 2

    @classmethod
    def from_pauli(cls, op: PauliOperator) -> "SyndromeVector":
        """Pattern a Pauli error on the cipher-text leaves on the key."""
        bits = np.zeros(2 * op.n, np.uint8)
        bits[0::2] = op.z
        bits[1::2] = op.x
        return cls(bits)

    def to_pauli(self) -> PauliOperator:
        """Error flagged by the pattern (X from odd bits, Z from even bits)."""
        return PauliOperator(self.bits[1::2], self.bits[0::2])

    @property
    def weight(self) -> int:
        return int(self.bits.sum())

    def hex(self) -> str:
        """Little-endian hex: bit k of the vector is bit k of the integer."""
        width = max(1, (self.bits.size + 3) // 4)
        value = 0
        for k in np.flatnonzero(self.bits)[::-1]:
            value |= 1 << int(k)
        return format(value, f"0{width}x")

    def __eq__(self, other) -> bool:
        return isinstance(other, SyndromeVector) and np.array_equal(self.bits, other.bits)

    def __repr__(self) -> str:
        return f"SyndromeVector({''.join(map(str, self.bits))})"


class AncillaPool:
    """Spare Phi+ pairs; each may be consumed once."""

    def __init__(self, alice, bob):
        self.alice = np.asarray(alice, dtype=np.int64)
        self.bob = np.asarray(bob, dtype=np.int64)
        self._next = 0
        self.consumed = 0

    def __len__(self) -> int:
        return self.alice.size - self._next

    def take_many(self, count: int):
        """Next ``count`` pairs as (alice, bob) index arrays."""
        if self._next + count > self.alice.size:
            raise RuntimeError("ancilla pool exhausted")
        k = self._next
        self._next += count
        return self.alice[k:k + count], self.bob[k:k + count]

    def take(self):
        if self._next >= self.alice.size:
            raise RuntimeError("ancilla pool exhausted")
        k = self._next
        self._next += 1
        return int(self.alice[k]), int(self.bob[k])


class EbitKeyRegister:
    """2n Bell pairs shared between Alice and Bob, plus bookkeeping.

    ``live[k]`` is False once pair k has been measured.  ``known`` maps
    measured pair indices to the label bit that was announced.
    """

    def __init__(self, state, alice, bob, pool: AncillaPool | None = None, transcript: Transcript | None = None):
        alice = np.asarray(alice, dtype=np.int64)
        bob = np.asarray(bob, dtype=np.int64)
        if alice.shape != bob.shape or alice.size % 2:
            raise ValueError("need an even number of pairs with matching halves")
        self.state = state
        self.alice, self.bob = alice, bob
        self.n = alice.size // 2
        self.pool = pool
        self.transcript = transcript if transcript is not None else Transcript()
        self.live = np.ones(alice.size, dtype=bool)
        self.known: dict[int, int] = {}
        self.in_use = False

    @property
    def size(self) -> int:
        return self.alice.size

    def pair(self, k: int):
        return int(self.alice[k]), int(self.bob[k])

    def label(self, k: int) -> BellLabel:
        """Harness-side exact label of pair k (non-destructive)."""
        if not self.live[k]:
            raise ValueError(f"pair {k} has been measured")
        return bell_identify(self.state, self.pair(k))

    def labels(self) -> list[BellLabel]:
        return [self.label(k) for k in range(self.size)]

    def true_syndrome(self) -> SyndromeVector:
        """Harness-side ground truth; raises if any live pair is a Psi state."""
        bits = []
        for lab in self.labels():
            if lab.xbit:
                raise ValueError("key pair left the Phi subspace")
            bits.append(lab.zbit)
        return SyndromeVector(bits)

    def measure_pairs_x(self, idx, rng) -> np.ndarray:
        """Both holders measure the listed pairs in the +/- basis and announce.

        Returns the label bits (1 for Phi-); pairs become consumed.
        """
        idx = np.asarray(idx, dtype=np.int64)
        if idx.size == 0:
            return np.zeros(0, np.uint8)
        if not self.live[idx].all():
            raise ValueError("pair already consumed")
        if isinstance(self.state, FrameState):
            oa, ob = self.state.measure_pairs(self.alice[idx], self.bob[idx], "x", rng)
            bits = (oa ^ ob).astype(np.uint8)
        else:
            bits = np.empty(idx.size, np.uint8)
            for j, k in enumerate(idx):
                a = self.state.measure_x(int(self.alice[k]), rng)
                b = self.state.measure_x(int(self.bob[k]), rng)
                bits[j] = a ^ b
        self.live[idx] = False
        for k, b in zip(idx.tolist(), bits.tolist()):
            self.known[k] = b
        return bits

    def bxor(self, control: int, targets) -> None:
        """CNOT on Alice's halves and on Bob's halves from pair ``control``."""
        targets = np.asarray(list(targets), dtype=np.int64)
        self.state.cnot_fanout(int(self.alice[control]), self.alice[targets])
        self.state.cnot_fanout(int(self.bob[control]), self.bob[targets])

    def fix_phase(self, k: int) -> None:
        """Bob applies Z to his half, turning Phi- into Phi+."""
        self.state.apply("Z", int(self.bob[k]))


@dataclass
class QVCRound:
    """Everything one protocol round owns."""

    state: object
    message: list
    reference: list | None
    key: EbitKeyRegister
    pool: AncillaPool


def _bell(state, a, b):
    state.apply("H", a)
    state.apply("CNOT", a, b)


def allocate_round(n: int, engine: str = "stabilizer", pool: int = 0, reference: bool = True,
                   message: DenseState | None = None, prepare=None) -> QVCRound:
    """Lay out message, optional reference, 2n key pairs and a pool.

    Index layout: message ``0..n-1``; reference ``n..2n-1`` (stabilizer
    engine only, each reference qubit in Phi+ with its message qubit); then
    key pairs ``(a_k, b_k)`` interleaved; then pool pairs.  On the dense
    engine ``message`` supplies the initial message state.  ``prepare`` is
    an optional callable ``prepare(state, message_indices)`` run before the
    key is used.
    """
    ref = reference and engine == "stabilizer"
    base = 2 * n if ref else n
    key_a = base + 2 * np.arange(2 * n)
    key_b = key_a + 1
    pbase = base + 4 * n
    pool_a = pbase + 2 * np.arange(pool)
    pool_b = pool_a + 1
    total = pbase + 2 * pool
    if engine == "stabilizer":
        state = StabilizerState(total)
    elif engine == "dense":
        state = DenseState(total)
        if message is not None:
            if message.n != n or message.d != 2:
                raise ValueError("message state does not have n qubits")
            state.amp[:] = 0
            state.amp[: message.amp.size] = message.amp
    elif engine == "frame":
        state = FrameState(total)
    else:
        raise ValueError(f"unknown engine {engine!r}")
    msg = list(range(n))
    refs = list(range(n, 2 * n)) if ref else None
    if engine != "frame":
        if ref:
            for i in range(n):
                _bell(state, msg[i], refs[i])
        for a, b in zip(np.concatenate([key_a, pool_a]), np.concatenate([key_b, pool_b])):
            _bell(state, int(a), int(b))
    if prepare is not None:
        prepare(state, msg)
    transcript = Transcript()
    apool = AncillaPool(pool_a, pool_b)
    key = EbitKeyRegister(state, key_a, key_b, apool, transcript)
    return QVCRound(state, msg, refs, key, apool)


def message_fidelity(rnd: QVCRound, target: DenseState | None = None) -> float:
    """Fidelity of the message register with what was sent.

    Stabilizer engine: entanglement fidelity with the reference (1 iff every
    message/reference pair is back in Phi+).  Frame engine: 1 iff no residual
    error.  Dense engine: <psi|rho|psi> against ``target``.
    """
    st = rnd.state
    if isinstance(st, StabilizerState):
        if rnd.reference is None:
            raise ValueError("stabilizer fidelity needs reference qubits")
        ok = all(bell_identify(st, (m, r)) is BellLabel.PHI_PLUS for m, r in zip(rnd.message, rnd.reference))
        return 1.0 if ok else 0.0
    if isinstance(st, FrameState):
        return 0.0 if st.error_on(rnd.message).weight else 1.0
    if target is None:
        raise ValueError("dense fidelity needs the target state")
    rho = st.density_matrix(rnd.message)
    return float(np.real(np.vdot(target.amp, rho @ target.amp)))
