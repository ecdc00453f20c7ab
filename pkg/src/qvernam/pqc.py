"""Classical-key Pauli encryption and its test-qubit authenticated variant.

Register layout for the authenticated variant: data qubits first, then the
r x-tests (prepared |0>), then the r z-tests (prepared |+>).  Alice's
encoding, after the data is Pauli-encrypted and the tests are flipped, is

1. CNOT from z-test ``z_i`` onto every data qubit in ``S_z[i]``;
2. CNOT from every data qubit in ``S_x[i]`` onto x-test ``x_i``;
3. CNOT from every z-test ``z_j`` with ``T[i, j]`` onto ``x_i``.

Bob undoes these in reverse order, measures x-tests in Z and z-tests in X,
and accepts iff every outcome equals its flip bit.
"""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .channels import PauliChannel
from .sim import DenseState, FrameState, PauliOperator, StabilizerState, random_state, von_neumann_entropy
from .transcript import Transcript

__all__ = [
    "ClassicalPauliKey",
    "pqc_encrypt",
    "pqc_decrypt",
    "key_average",
    "TestQubitLayout",
    "MPQCRegisters",
    "allocate_mpqc",
    "mpqc_encode",
    "mpqc_decode_accept",
    "announce_layout",
    "predict_test_flips",
    "residual_data_error",
    "frame_acceptance",
    "AcceptanceAnalysis",
    "analyze_acceptance",
    "ReplacementAttack",
    "authenticate_message",
    "wegman_carter_key_size",
]


class ClassicalPauliKey:
    """2n key bits; bit 2i is the X exponent and bit 2i+1 the Z exponent of qubit i."""

    def __init__(self, bits):
        b = np.asarray(bits, dtype=np.uint8).ravel() & 1
        if b.size % 2:
            raise ValueError("key length must be even")
        self.bits = b

    @property
    def n(self) -> int:
        return self.bits.size // 2

    @classmethod
    def generate(cls, n: int, rng) -> "ClassicalPauliKey":
        return cls(rng.integers(0, 2, size=2 * n))

    @classmethod
    def all_keys(cls, n: int):
        for k in range(4**n):
            yield cls([(k >> j) & 1 for j in range(2 * n)])

    def to_pauli(self) -> PauliOperator:
        return PauliOperator(self.bits[0::2], self.bits[1::2])


def _check_key(key: ClassicalPauliKey, qubits):
    qubits = [int(q) for q in qubits]
    if key.n != len(qubits):
        raise ValueError(f"key covers {key.n} qubits, got {len(qubits)}")
    return qubits


def pqc_encrypt(state, qubits, key: ClassicalPauliKey):
    """Apply Z^{k_z} X^{k_x} to each qubit (X first)."""
    qubits = _check_key(key, qubits)
    for i, q in enumerate(qubits):
        if key.bits[2 * i]:
            state.apply("X", q)
        if key.bits[2 * i + 1]:
            state.apply("Z", q)
    return state


def pqc_decrypt(state, qubits, key: ClassicalPauliKey):
    """Inverse of :func:`pqc_encrypt` (Z first, then X)."""
    qubits = _check_key(key, qubits)
    for i, q in enumerate(qubits):
        if key.bits[2 * i + 1]:
            state.apply("Z", q)
        if key.bits[2 * i]:
            state.apply("X", q)
    return state


def key_average(rho: np.ndarray) -> np.ndarray:
    """Exact average of U_K rho U_K^dagger over all 4^n keys."""
    rho = np.asarray(rho, dtype=complex)
    n = int(round(math.log2(rho.shape[0])))
    out = np.zeros_like(rho)
    for key in ClassicalPauliKey.all_keys(n):
        U = key.to_pauli().to_matrix()
        out += U @ rho @ U.conj().T
    return out / 4**n


def _subsets(rng, shape, resample_empty: bool) -> np.ndarray:
    m = rng.random(shape) < 0.5
    if resample_empty and shape[-1] > 0:
        while True:
            empty = ~m.any(axis=-1)
            if not empty.any():
                break
            m[empty] = rng.random((int(empty.sum()), shape[-1])) < 0.5
    return m


@dataclass
class TestQubitLayout:
    """Flip key and CNOT subsets of one authenticated transmission.

    ``flip[:r]`` flips the x-tests, ``flip[r:]`` the z-tests.  ``Sx[i, d]``
    and ``Sz[i, d]`` mark data qubit d in S_x[i] and S_z[i]; ``T[i, j]``
    marks z-test j in T_x[i].
    """

    n: int
    r: int
    flip: np.ndarray
    Sx: np.ndarray
    Sz: np.ndarray
    T: np.ndarray
    used: bool = False

    @classmethod
    def random(cls, n: int, r: int, rng, resample_empty: bool = False) -> "TestQubitLayout":
        """Every membership is an independent fair coin.

        Empty subsets are kept by default: redrawing them biases the
        acceptance of errors that hit both a test qubit and the data.
        """
        if n < 0 or r < 1:
            raise ValueError("need n >= 0 and r >= 1")
        flip = rng.integers(0, 2, size=2 * r).astype(np.uint8)
        Sx = _subsets(rng, (r, n), resample_empty)
        Sz = _subsets(rng, (r, n), resample_empty)
        T = _subsets(rng, (r, r), resample_empty)
        return cls(n, r, flip, Sx, Sz, T)

    def to_json(self) -> dict:
        return {"Sx": self.Sx.astype(int).tolist(), "Sz": self.Sz.astype(int).tolist(), "T": self.T.astype(int).tolist()}


@dataclass
class MPQCRegisters:
    state: object
    data: list
    xt: list
    zt: list
    reference: list | None = None

    @property
    def cipher(self) -> list:
        return self.data + self.xt + self.zt


def allocate_mpqc(n: int, r: int, engine: str = "stabilizer", message: DenseState | None = None,
                  reference: bool = True) -> MPQCRegisters:
    """Data, tests and (stabilizer engine) a reference purifying the data."""
    data = list(range(n))
    xt = list(range(n, n + r))
    zt = list(range(n + r, n + 2 * r))
    ref = reference and engine == "stabilizer"
    total = n + 2 * r + (n if ref else 0)
    if engine == "stabilizer":
        st = StabilizerState(total)
    elif engine == "frame":
        st = FrameState(total)
    elif engine == "dense":
        st = DenseState(total)
        if message is not None:
            if message.n != n:
                raise ValueError("message size mismatch")
            st.amp[:] = 0
            st.amp[: message.amp.size] = message.amp
    else:
        raise ValueError(f"unknown engine {engine!r}")
    refs = None
    if ref:
        refs = list(range(n + 2 * r, total))
        for d, q in zip(data, refs):
            st.apply("H", d)
            st.apply("CNOT", d, q)
    return MPQCRegisters(st, data, xt, zt, refs)


def _encode_cnots(regs: MPQCRegisters, layout: TestQubitLayout):
    for i in range(layout.r):
        for d in np.flatnonzero(layout.Sz[i]):
            yield regs.zt[i], regs.data[d]
    for i in range(layout.r):
        for d in np.flatnonzero(layout.Sx[i]):
            yield regs.data[d], regs.xt[i]
    for i in range(layout.r):
        for j in np.flatnonzero(layout.T[i]):
            yield regs.zt[j], regs.xt[i]


def mpqc_encode(regs: MPQCRegisters, key: ClassicalPauliKey | None, layout: TestQubitLayout):
    """Alice's encoding; ``key=None`` skips data encryption (authentication only)."""
    if layout.used:
        raise ValueError("layout already used; draw a fresh one")
    if layout.n != len(regs.data) or layout.r != len(regs.xt):
        raise ValueError("layout does not match the registers")
    layout.used = True
    st = regs.state
    if key is not None:
        pqc_encrypt(st, regs.data, key)
    r = layout.r
    for i, q in enumerate(regs.zt):
        st.apply("H", q)
    for i in range(r):
        if layout.flip[i]:
            st.apply("X", regs.xt[i])
        if layout.flip[r + i]:
            st.apply("Z", regs.zt[i])
    for c, t in _encode_cnots(regs, layout):
        st.apply("CNOT", c, t)
    return regs.cipher


def announce_layout(transcript: Transcript, layout: TestQubitLayout, round: int = 0):
    """Alice reveals the subsets; only legal once Bob has confirmed receipt."""
    return transcript.post("alice", "layout", layout.to_json(), round=round, after="receipt")


def mpqc_decode_accept(regs: MPQCRegisters, key: ClassicalPauliKey | None, layout: TestQubitLayout,
                       transcript: Transcript, rng, round: int = 0):
    """Bob's decoding and test check.

    Returns ``(accept, recyclable)``.  The data register holds the decoded
    message afterwards; the keys may be reused only when accepted.
    """
    if not transcript.has("layout", round):
        announce_layout(transcript, layout, round)
    st = regs.state
    for c, t in reversed(list(_encode_cnots(regs, layout))):
        st.apply("CNOT", c, t)
    r = layout.r
    ok = True
    outcomes = []
    for i in range(r):
        if isinstance(st, FrameState):
            got = int(st.x[regs.xt[i]]) ^ int(layout.flip[i])
        else:
            got = st.measure_z(regs.xt[i], rng)
        outcomes.append(got)
        ok &= got == layout.flip[i]
    for j in range(r):
        if isinstance(st, FrameState):
            got = int(st.z[regs.zt[j]]) ^ int(layout.flip[r + j])
        else:
            got = st.measure_x(regs.zt[j], rng)
        outcomes.append(got)
        ok &= got == layout.flip[r + j]
    transcript.post("bob", "verdict", {"accept": bool(ok)}, round=round)
    if key is not None:
        pqc_decrypt(st, regs.data, key)
    return bool(ok), bool(ok)


def _split(err_x, err_z, n, r):
    ex, ez = np.asarray(err_x, np.uint8), np.asarray(err_z, np.uint8)
    return ex[..., :n], ex[..., n:n + r], ex[..., n + r:], ez[..., :n], ez[..., n:n + r], ez[..., n + r:]


def predict_test_flips(err_x, err_z, Sx, Sz, T):
    """Test outcomes flipped by a cipher-text Pauli error, from the layout alone.

    Works on single layouts or stacks with a leading batch axis.  x-test i
    flips on an odd X overlap with S_x[i], T_x[i] and x_i itself.  z-test j
    flips on an odd Z overlap with z_j, S_z[j] and the x-tests whose T set
    holds j, plus, for every x-test with a Z error, the size of
    S_x[i] intersect S_z[j].
    """
    Sx = np.asarray(Sx, np.int64)
    Sz = np.asarray(Sz, np.int64)
    T = np.asarray(T, np.int64)
    r, n = Sx.shape[-2:]
    xd, xx, xz, zd, zx, zz = (a.astype(np.int64) for a in _split(err_x, err_z, n, r))
    xflip = (np.einsum("...id,...d->...i", Sx, xd) + np.einsum("...ij,...j->...i", T, xz) + xx) & 1
    back = np.einsum("...id,...i->...d", Sx, zx)
    zflip = (np.einsum("...jd,...d->...j", Sz, zd + back) + np.einsum("...ij,...i->...j", T, zx) + zz) & 1
    return xflip.astype(np.uint8), zflip.astype(np.uint8)


def residual_data_error(err_x, err_z, Sx, Sz, T):
    """Pauli left on the data after decoding, as (x, z) bit arrays."""
    Sx = np.asarray(Sx, np.int64)
    Sz = np.asarray(Sz, np.int64)
    r, n = Sx.shape[-2:]
    xd, xx, xz, zd, zx, zz = (a.astype(np.int64) for a in _split(err_x, err_z, n, r))
    rx = (xd + np.einsum("...jd,...j->...d", Sz, xz)) & 1
    rz = (zd + np.einsum("...id,...i->...d", Sx, zx)) & 1
    return rx.astype(np.uint8), rz.astype(np.uint8)


def frame_acceptance(err_x, err_z, n: int, r: int, layouts: int, rng, chunk: int = 20000):
    """Accept indicators of a fixed error against ``layouts`` fresh random layouts.

    Also returns whether the accepted data carries a residual error.
    """
    acc = np.empty(layouts, dtype=bool)
    bad = np.empty(layouts, dtype=bool)
    for lo in range(0, layouts, chunk):
        m = min(chunk, layouts - lo)
        Sx = rng.random((m, r, n)) < 0.5
        Sz = rng.random((m, r, n)) < 0.5
        T = rng.random((m, r, r)) < 0.5
        xf, zf = predict_test_flips(err_x, err_z, Sx, Sz, T)
        acc[lo:lo + m] = ~(xf.any(axis=1) | zf.any(axis=1))
        rx, rz = residual_data_error(err_x, err_z, Sx, Sz, T)
        bad[lo:lo + m] = (rx | rz).any(axis=1)
    return acc, bad


@dataclass
class AcceptanceAnalysis:
    channel: str
    n: int
    r: int
    trials: int
    prob_accept: float
    coefficients: dict = field(default_factory=dict)
    max_nontrivial_c: float = 0.0
    eve_entropy_bound_bits: float | None = None
    e00: float = 0.0

    @property
    def upper_bound(self) -> float:
        return self.e00 + 2.0**-self.r * (1 - self.e00)

    def to_json_dict(self) -> dict:
        return {
            "channel": self.channel,
            "n": self.n,
            "r": self.r,
            "trials": self.trials,
            "probAccept": self.prob_accept,
            "maxNontrivialC": self.max_nontrivial_c,
            "eveEntropyBoundBits": self.eve_entropy_bound_bits,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict())


def _channel_errors(channel: PauliChannel, n: int, r: int, max_terms: int = 64):
    """(probability, x, z) over the full cipher-text, most likely first."""
    width = n + 2 * r
    if channel.n not in (n, width):
        raise ValueError(f"channel must act on the {n} data qubits or the whole {width}-qubit cipher-text")

    def lift(op):
        x = np.zeros(width, np.uint8)
        z = np.zeros(width, np.uint8)
        x[: channel.n] = op.x
        z[: channel.n] = op.z
        return x, z

    if not channel.is_product:
        terms = sorted(channel.terms, key=lambda t: -t[1])
        return [(p, *lift(op)) for op, p in terms[:max_terms]], sum(p for _, p in terms[max_terms:])
    classes = {"I": (0, 0), "X": (1, 0), "Z": (0, 1), "XZ": (1, 1)}
    probs = [(c, p) for c, p in channel.per_qubit.items() if p > 0]
    out = []
    tgt = list(channel.targets)
    for combo in itertools.islice(itertools.product(probs, repeat=len(tgt)), 4**8):
        p = math.prod(q for _, q in combo)
        op = PauliOperator.identity(channel.n)
        x, z = op.x.copy(), op.z.copy()
        for q, (c, _) in zip(tgt, combo):
            x[q], z[q] = classes[c]
        out.append((p, *lift(PauliOperator(x, z))))
    out.sort(key=lambda t: -t[0])
    return out[:max_terms], max(0.0, 1 - sum(t[0] for t in out[:max_terms]))


def _accepted_state(psi: np.ndarray, weights: dict, n: int) -> np.ndarray:
    rho = np.zeros((2**n, 2**n), complex)
    for (xb, zb), w in weights.items():
        U = PauliOperator(np.array(xb, np.uint8), np.array(zb, np.uint8)).to_matrix()
        v = U @ psi
        rho += w * np.outer(v, v.conj())
    return rho / np.trace(rho).real


def analyze_acceptance(channel: PauliChannel, n: int, r: int, trials: int, rng, probes: int = 64,
                       name: str | None = None) -> AcceptanceAnalysis:
    """Per-error acceptance coefficients and the accepted-state entropy bound.

    Each channel term gets ``trials`` fresh random layouts; ``c`` is its
    acceptance frequency.  ``probAccept`` is the channel-weighted sum.  For
    n <= 3 the normalized accepted data state is formed from the residual
    errors of accepted runs and its entropy is maximized over ``probes``
    random pure inputs plus the computational basis.
    """
    if trials < 1000:
        raise ValueError("trials must be at least 1000")
    terms, tail = _channel_errors(channel, n, r)
    if tail > 1e-12:
        raise ValueError("channel has too many terms for an exact weighted analysis")
    coeffs = {}
    nontrivial = []
    prob = 0.0
    residual = {}
    e00 = 0.0
    for p, x, z in terms:
        acc, _ = frame_acceptance(x, z, n, r, trials, rng)
        label = PauliOperator(x, z).label().lstrip("+")
        c = float(acc.mean())
        coeffs[label] = c
        prob += p * c
        if x.any() or z.any():
            nontrivial.append(c)
        else:
            e00 += p
        if n <= 3:
            # Reuse the same layouts' statistics for the residual distribution.
            sub = np.random.default_rng(rng.integers(2**63))
            m = min(trials, 20000)
            Sx = sub.random((m, r, n)) < 0.5
            Sz = sub.random((m, r, n)) < 0.5
            T = sub.random((m, r, r)) < 0.5
            xf, zf = predict_test_flips(x, z, Sx, Sz, T)
            ok = ~(xf.any(axis=1) | zf.any(axis=1))
            rx, rz = residual_data_error(x, z, Sx[ok], Sz[ok], T[ok])
            for a, b in zip(rx, rz):
                k = (tuple(a.tolist()), tuple(b.tolist()))
                residual[k] = residual.get(k, 0.0) + p * c / ok.sum()
    ana = AcceptanceAnalysis(name or channel.name or "custom", n, r, trials, prob, coeffs,
                             max(nontrivial, default=0.0), None, e00)
    if n <= 3 and residual:
        inputs = [random_state(n, rng).amp for _ in range(probes)]
        inputs += [np.eye(2**n, dtype=complex)[k] for k in range(2**n)]
        ana.eve_entropy_bound_bits = max(von_neumann_entropy(_accepted_state(v, residual, n)) for v in inputs)
    return ana


@dataclass
class ReplacementAttack:
    """Eve discards the cipher-text and sends her own state of the same size."""

    state: DenseState | None = None


def authenticate_message(psi: DenseState, layout: TestQubitLayout, channel, rng):
    """Authentication without data encryption on the dense engine.

    ``channel`` is a PauliChannel over the data or the whole cipher-text, a
    ReplacementAttack, or None.  Returns ``(accept, fidelity)`` with the
    fidelity of the decoded data to ``psi`` (None when rejected).
    """
    n, r = layout.n, layout.r
    regs = allocate_mpqc(n, r, "dense", message=psi)
    transcript = Transcript()
    mpqc_encode(regs, None, layout)
    st = regs.state
    if isinstance(channel, ReplacementAttack):
        forged = channel.state if channel.state is not None else random_state(n + 2 * r, rng)
        if forged.n != n + 2 * r:
            raise ValueError("forged state must cover the whole cipher-text")
        st.amp[:] = forged.amp
    elif channel is not None:
        op = channel.sample(rng)
        st.apply_pauli(op, regs.cipher[: channel.n])
    transcript.post("bob", "receipt", b"")
    accept, _ = mpqc_decode_accept(regs, None, layout, transcript, rng)
    if not accept:
        return False, None
    rho = st.density_matrix(regs.data)
    return True, float(np.real(np.vdot(psi.amp, rho @ psi.amp)))


def wegman_carter_key_size(n: int, r: int) -> tuple[int, int]:
    """Key bits to authenticate Alice's (2nr + r^2)-bit and Bob's reply messages.

    Uses 4 (r + log log m) log m with base-2 logs; Bob's message length is
    2r + r^2.
    """
    if n < 1 or r < 1:
        raise ValueError("n and r must be at least 1")

    def size(m):
        lg = math.log2(m)
        return math.ceil(4 * (r + math.log2(lg)) * lg - 1e-9)

    return size(2 * n * r + r * r), size(2 * r + r * r)
