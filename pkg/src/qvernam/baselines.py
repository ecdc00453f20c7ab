"""Reference protocols: one-time pad, eavesdrop-detecting channel,
teleportation, superdense coding and the two key-distribution schemes.

Single-qubit conjugate-basis transmissions (the detecting channel and
BB84) are simulated with a vectorised bit-level model: a qubit prepared as
bit b in basis a and measured in basis a' yields b when a' == a and a fair
coin otherwise.  ``edc_send`` can also run on the stabilizer engine, which
the tests use to cross-check the shortcut.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats

from .channels import InterceptResendAttack, apply_intercept_resend
from .sim import DenseState, FrameState, StabilizerState, partial_trace
from .transcript import Transcript, TranscriptOrderError

__all__ = [
    "Transcript",
    "TranscriptOrderError",
    "classical_otp",
    "otp_decode",
    "random_parity_subsets",
    "edc_send",
    "edc_undetected",
    "TeleportResult",
    "teleport",
    "teleport_branches",
    "superdense",
    "ebit_key_distribution",
    "runs_test",
    "BB84Result",
    "bb84_round",
    "bb84_escape",
]


def _bits(x) -> np.ndarray:
    a = np.asarray(x, dtype=np.uint8)
    if a.size and a.max() > 1:
        raise ValueError("bit strings must contain only 0 and 1")
    return a


def classical_otp(message, key) -> np.ndarray:
    """C = M xor K."""
    m, k = _bits(message), _bits(key)
    if m.shape != k.shape:
        raise ValueError("message and key lengths differ")
    return m ^ k


def otp_decode(cipher, key) -> np.ndarray:
    return classical_otp(cipher, key)


# ---------------------------------------------------------------------------
# Eavesdrop-detecting channel


def random_parity_subsets(n: int, r: int, rng) -> np.ndarray:
    """r x n boolean matrix of random nonempty subsets of the message bits."""
    S = rng.random((r, n)) < 0.5
    while True:
        empty = ~S.any(axis=1)
        if not empty.any() or n == 0:
            return S
        S[empty] = rng.random((int(empty.sum()), n)) < 0.5


def _transmit(bits, bases, rng, eve_mask=None, eve_bases=None, bob_bases=None):
    """Bob's outcomes for conjugate-basis qubits; arrays broadcast over trials."""
    bob_bases = bases if bob_bases is None else bob_bases
    sent_bits, sent_bases = bits, bases
    if eve_mask is not None:
        coin = rng.integers(0, 2, size=np.shape(bits), dtype=np.uint8)
        eve_bit = np.where(eve_bases == bases, bits, coin)
        sent_bits = np.where(eve_mask, eve_bit, bits)
        sent_bases = np.where(eve_mask, eve_bases, bases)
    coin = rng.integers(0, 2, size=np.shape(bits), dtype=np.uint8)
    return np.where(bob_bases == sent_bases, sent_bits, coin).astype(np.uint8)


def edc_send(message, K1, K2, r: int, attack: InterceptResendAttack | None, rng,
             transcript: Transcript | None = None, engine: str = "bits", round: int = 0):
    """Send ``message`` with r parity checks over a conjugate-basis channel.

    M' is M followed by r random subset parities of M.  Bit i of K1 xor M'
    is sent in the Z basis when K2[i] = 0 and in the X basis otherwise.  The
    subsets are announced only after Bob confirms receipt.  Returns
    ``(accept, decoded message)``.
    """
    m = _bits(message)
    n = m.size
    K1, K2 = _bits(K1), _bits(K2)
    if K1.size != n + r or K2.size != n + r:
        raise ValueError("keys must have n + r bits")
    tr = transcript if transcript is not None else Transcript()
    S = random_parity_subsets(n, r, rng)
    mp = np.concatenate([m, (S.astype(np.int64) @ m % 2).astype(np.uint8)])
    sent = mp ^ K1
    if engine == "bits":
        if attack is None or not attack.intercept:
            received = sent.copy()
        else:
            mask = np.zeros(n + r, bool)
            mask[attack.intercept] = True
            if attack.basis == "random":
                eb = rng.integers(0, 2, size=n + r).astype(np.uint8)
            else:
                eb = np.full(n + r, int(attack.basis == "x"), np.uint8)
            received = _transmit(sent, K2, rng, mask, eb)
    elif engine == "stabilizer":
        st = StabilizerState(n + r)
        for q in range(n + r):
            if sent[q]:
                st.apply("X", q)
            if K2[q]:
                st.apply("H", q)
        if attack is not None:
            apply_intercept_resend(st, attack, rng)
        received = np.array([st.measure_x(q, rng) if K2[q] else st.measure_z(q, rng) for q in range(n + r)],
                            dtype=np.uint8)
    else:
        raise ValueError(f"unknown engine {engine!r}")
    tr.post("bob", "receipt", b"", round=round)
    tr.post("alice", "subsets", S.astype(int), round=round, after="receipt")
    got = received ^ K1
    accept = bool(np.array_equal(S.astype(np.int64) @ got[:n] % 2, got[n:]))
    return accept, got[:n]


def edc_undetected(n: int, r: int, l: int, trials: int, rng) -> np.ndarray:
    """Accept flags of ``trials`` runs with l random qubits intercepted in random bases.

    Vectorised over trials with fresh keys, message and subsets each run.
    """
    m = n + r
    if not 0 <= l <= m:
        raise ValueError("l must be between 0 and n + r")
    msg = rng.integers(0, 2, size=(trials, n), dtype=np.uint8)
    K1 = rng.integers(0, 2, size=(trials, m), dtype=np.uint8)
    K2 = rng.integers(0, 2, size=(trials, m), dtype=np.uint8)
    S = rng.random((trials, r, n)) < 0.5
    # Redraw empty subsets, matching random_parity_subsets.
    while True:
        empty = ~S.any(axis=2)
        if not empty.any():
            break
        S[empty] = rng.random((int(empty.sum()), n)) < 0.5
    par = (np.einsum("trn,tn->tr", S.astype(np.int64), msg) & 1).astype(np.uint8)
    sent = np.concatenate([msg, par], axis=1) ^ K1
    pick = np.argsort(rng.random((trials, m)), axis=1)[:, :l]
    mask = np.zeros((trials, m), bool)
    np.put_along_axis(mask, pick, True, axis=1)
    eb = rng.integers(0, 2, size=(trials, m), dtype=np.uint8)
    got = _transmit(sent, K2, rng, mask, eb) ^ K1
    check = np.einsum("trn,tn->tr", S.astype(np.int64), got[:, :n].astype(np.int64)) & 1
    return (check == got[:, n:]).all(axis=1)


# ---------------------------------------------------------------------------
# Teleportation and superdense coding


@dataclass
class TeleportResult:
    k1: int
    k2: int
    bob: np.ndarray
    fidelity: float


def _with_message(psi, extra: int) -> DenseState:
    psi = np.asarray(psi, dtype=complex)
    psi = psi / np.linalg.norm(psi)
    amp = np.zeros(2 ** (1 + extra), dtype=complex)
    amp[:2] = psi
    return DenseState(1 + extra, amplitudes=amp)


def _bob_state(st: DenseState, q: int) -> np.ndarray:
    rho = st.density_matrix([q])
    w, v = np.linalg.eigh(rho)
    return v[:, -1] * np.exp(-1j * np.angle(v[np.argmax(np.abs(v[:, -1])), -1]))


def teleport(psi, rng) -> TeleportResult:
    """Teleport one qubit over a fresh Phi+ pair.

    Qubit 0 holds |psi>, qubits 1 (Alice) and 2 (Bob) the pair.  k1 is the
    outcome on Alice's pair half and k2 the outcome on the message qubit;
    Bob applies X^k1 then Z^k2.
    """
    st = _with_message(psi, 2)
    st.apply("H", 1)
    st.apply("CNOT", 1, 2)
    st.apply("CNOT", 0, 1)
    st.apply("H", 0)
    k2 = st.measure_z(0, rng)
    k1 = st.measure_z(1, rng)
    if k1:
        st.apply("X", 2)
    if k2:
        st.apply("Z", 2)
    target = np.asarray(psi, dtype=complex) / np.linalg.norm(psi)
    rho = st.density_matrix([2])
    fid = float(np.real(np.vdot(target, rho @ target)))
    return TeleportResult(int(k1), int(k2), _bob_state(st, 2), fid)


def teleport_branches(psi) -> dict:
    """(k1, k2) -> (probability, Bob's uncorrected density matrix)."""
    st = _with_message(psi, 2)
    st.apply("H", 1)
    st.apply("CNOT", 1, 2)
    st.apply("CNOT", 0, 1)
    st.apply("H", 0)
    amp = st.amp.reshape(2, 2, 2)  # axes: q2, q1, q0
    out = {}
    for k1 in range(2):
        for k2 in range(2):
            v = amp[:, k1, k2]
            p = float(np.vdot(v, v).real)
            out[(k1, k2)] = (p, np.outer(v, v.conj()) / p)
    return out


def superdense(c1: int, c2: int, rng):
    """Send two bits with one qubit of a Phi+ pair.

    Alice applies X^c1 Z^c2 to her half and sends it.  Returns the decoded
    bits and the reduced state of the transmitted qubit.
    """
    st = DenseState(2)
    st.apply("H", 0)
    st.apply("CNOT", 0, 1)
    if c2:
        st.apply("Z", 0)
    if c1:
        st.apply("X", 0)
    sent = partial_trace(st.amp, [0], 2)
    st.apply("CNOT", 0, 1)
    st.apply("H", 0)
    d2 = st.measure_z(0, rng)
    d1 = st.measure_z(1, rng)
    return (int(d1), int(d2)), sent


# ---------------------------------------------------------------------------
# Key distribution


def ebit_key_distribution(count: int, rng, engine: str = "frame"):
    """Both parties measure their halves of ``count`` Phi+ pairs in Z."""
    if engine == "frame":
        st = FrameState(2 * count)
        a = np.arange(0, 2 * count, 2)
        return st.measure_pairs(a, a + 1, "z", rng)
    if engine == "stabilizer":
        alice, bob = [], []
        for _ in range(count):
            st = StabilizerState(2)
            st.apply("H", 0)
            st.apply("CNOT", 0, 1)
            alice.append(st.measure_z(0, rng))
            bob.append(st.measure_z(1, rng))
        return np.array(alice, np.uint8), np.array(bob, np.uint8)
    raise ValueError(f"unknown engine {engine!r}")


def runs_test(bits) -> float:
    """Two-sided p-value of the Wald-Wolfowitz runs test on a bit string."""
    b = np.asarray(bits, dtype=np.int64)
    n1 = int(b.sum())
    n0 = b.size - n1
    if n0 == 0 or n1 == 0:
        return 0.0
    runs = 1 + int(np.count_nonzero(np.diff(b)))
    mu = 2.0 * n0 * n1 / b.size + 1
    var = (mu - 1) * (mu - 2) / (b.size - 1)
    z = (runs - mu) / np.sqrt(var)
    return float(2 * stats.norm.sf(abs(z)))


@dataclass
class BB84Result:
    key: np.ndarray | None
    error_rate: float
    sifted: int
    tested: int

    @property
    def aborted(self) -> bool:
        return self.key is None


def bb84_round(count: int, intercept: float, r_test: float, rng,
               transcript: Transcript | None = None, round: int = 0) -> BB84Result:
    """One BB84 round with intercept-resend on a random ``intercept`` fraction.

    Eve picks a random basis for each tapped qubit.  After sifting, a random
    ``r_test`` fraction of the sifted bits is compared; any mismatch aborts.
    """
    if not (0 <= intercept <= 1 and 0 <= r_test <= 1):
        raise ValueError("intercept and r_test must lie in [0, 1]")
    tr = transcript if transcript is not None else Transcript()
    bits = rng.integers(0, 2, size=count, dtype=np.uint8)
    bases = rng.integers(0, 2, size=count, dtype=np.uint8)
    bob_bases = rng.integers(0, 2, size=count, dtype=np.uint8)
    mask = rng.random(count) < intercept
    eve = rng.integers(0, 2, size=count, dtype=np.uint8)
    got = _transmit(bits, bases, rng, mask, eve, bob_bases)
    tr.post("bob", "receipt", b"", round=round)
    tr.post("alice", "bases", bases, round=round, after="receipt")
    keep = np.flatnonzero(bases == bob_bases)
    test = rng.random(keep.size) < r_test
    t_idx, k_idx = keep[test], keep[~test]
    errors = int(np.count_nonzero(bits[t_idx] != got[t_idx]))
    rate = errors / t_idx.size if t_idx.size else 0.0
    tr.post("alice", "test-bits", {"idx": t_idx, "bits": bits[t_idx]}, round=round, after="bases")
    key = None if errors else bits[k_idx]
    return BB84Result(key, rate, int(keep.size), int(t_idx.size))


def bb84_escape(l: int, trials: int, rng) -> float:
    """Frequency with which intercepting l tested sifted bits causes no mismatch."""
    bits = rng.integers(0, 2, size=(trials, l), dtype=np.uint8)
    bases = rng.integers(0, 2, size=(trials, l), dtype=np.uint8)
    eve = rng.integers(0, 2, size=(trials, l), dtype=np.uint8)
    got = _transmit(bits, bases, rng, np.ones((trials, l), bool), eve)
    return float((got == bits).all(axis=1).mean())
