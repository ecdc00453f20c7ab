"""Key recycling: subset parities, the preliminary test, weight estimation
and syndrome identification by hashing.

Parities of Bell-pair labels are read out with bilateral XOR: CNOTs from a
control pair onto the subset members on Alice's side and on Bob's side
leave the control carrying the XOR of the members' Phi-/Phi+ bits, which
both parties read with local +/- measurements.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..channels import PauliChannel, apply_pauli_channel
from ..sim import FrameState, PauliOperator
from .cipher import correct_message, qvc_decode, qvc_encode
from .polar import prior_llr, reliability_order, scl_decode, superset_members, superset_transform
from .register import EbitKeyRegister, SyndromeVector

__all__ = [
    "binary_entropy",
    "random_subset",
    "subset_parity",
    "preliminary_test",
    "chebyshev_sample_size",
    "estimate_weight",
    "hash_budget",
    "HashResult",
    "hash_identify",
    "RecycleReport",
    "recycle_round",
]

VERIFY_EXTRA = 40


def binary_entropy(p: float) -> float:
    if p <= 0 or p >= 1:
        return 0.0
    return -p * math.log2(p) - (1 - p) * math.log2(1 - p)


def random_subset(size: int, rng, allow_empty: bool = False) -> np.ndarray:
    """Boolean mask with each entry included independently with probability 1/2."""
    if size < 1:
        raise ValueError("cannot draw a subset of an empty set")
    while True:
        mask = rng.random(size) < 0.5
        if allow_empty or mask.any():
            return mask


def _read_control(key: EbitKeyRegister, a: int, b: int, rng) -> int:
    st = key.state
    if hasattr(st, "measure_pairs"):
        oa, ob = st.measure_pair(a, b, "x", rng)
    else:
        oa = st.measure_x(a, rng)
        ob = st.measure_x(b, rng)
    return int(oa) ^ int(ob)


def subset_parity(key: EbitKeyRegister, subset, rng, ancilla=None) -> int:
    """Parity of the listed pairs' labels, consuming one pool ancilla.

    ``ancilla`` may be an explicit ``(alice, bob)`` qubit pair; by default
    the next pool pair is taken.  The subset pairs are left in place.
    """
    idx = np.asarray(list(subset), dtype=np.int64)
    if idx.size == 0:
        raise ValueError("subset must be nonempty")
    if not key.live[idx].all():
        raise ValueError("subset contains consumed pairs")
    if ancilla is None:
        if key.pool is None:
            raise ValueError("no ancilla pool attached to the key")
        ancilla = key.pool.take()
    a, b = ancilla
    st = key.state
    st.cnot_fanout(a, key.alice[idx])
    st.cnot_fanout(b, key.bob[idx])
    return _read_control(key, a, b, rng)


def _inplace_parity(key: EbitKeyRegister, consumer: int, others, rng) -> int:
    """Parity of ``consumer`` together with ``others``; only ``consumer`` is spent."""
    others = np.asarray(others, dtype=np.int64)
    if others.size:
        key.bxor(consumer, others)
    a, b = key.pair(consumer)
    bit = _read_control(key, a, b, rng)
    key.live[consumer] = False
    return bit


def _frame_prelim(key: EbitKeyRegister, members: np.ndarray, masks: np.ndarray, rng) -> np.ndarray:
    """All r ancilla fan-outs at once on the frame engine.

    The ancillas are distinct, so the sequential CNOTs commute and each
    ancilla's Z frame picks up the XOR of its subset's Z frames.
    """
    st = key.state
    a, b = key.pool.take_many(masks.shape[0])
    # uint8 sums wrap modulo 256, which keeps their parity
    m = masks.view(np.uint8)
    ka, kb = key.alice[members], key.bob[members]
    st.z[a] ^= (m @ st.z[ka]) & 1
    st.z[b] ^= (m @ st.z[kb]) & 1
    st.x[ka] ^= (st.x[a] @ m) & 1
    st.x[kb] ^= (st.x[b] @ m) & 1
    oa, ob = st.measure_pairs(a, b, "x", rng)
    return (oa ^ ob).astype(np.uint8)


def preliminary_test(key: EbitKeyRegister, r: int, rng, round: int = 0):
    """Check r random subset parities of the key; pass iff all are even.

    Subsets include each pair with probability 1/2; empty draws are redrawn.
    Returns ``(passed, parities)``.
    """
    if r < 1:
        raise ValueError("r must be at least 1")
    live = np.flatnonzero(key.live)
    if live.size == 0:
        raise ValueError("cannot draw a subset of an empty set")
    masks = rng.random((r, live.size)) < 0.5
    empty = ~masks.any(axis=1)
    while empty.any():
        masks[empty] = rng.random((int(empty.sum()), live.size)) < 0.5
        empty = ~masks.any(axis=1)
    if isinstance(key.state, FrameState) and key.pool is not None and len(key.pool) >= r:
        parities = _frame_prelim(key, live, masks, rng)
    else:
        parities = np.array([subset_parity(key, live[m], rng) for m in masks], dtype=np.uint8)
    key.transcript.post("alice", "prelim-subset", {"pairs": live, "masks": masks.view(np.uint8)}, round=round)
    key.transcript.post("both", "prelim-parities", parities, round=round)
    return bool(not parities.any()), parities


def chebyshev_sample_size(delta: float, epsilon: float) -> int:
    """Smallest r2 with 1 / (4 delta^2 r2) <= epsilon."""
    if not (delta > 0 and epsilon > 0):
        raise ValueError("delta and epsilon must be positive")
    return max(1, math.ceil(1.0 / (4.0 * delta * delta * epsilon) - 1e-9))


def estimate_weight(key: EbitKeyRegister, r2: int, rng, pairs=None, round: int = 0) -> float:
    """Measure r2 distinct random live pairs and return the Phi- fraction."""
    pool = np.flatnonzero(key.live) if pairs is None else np.asarray(pairs, dtype=np.int64)
    pool = pool[key.live[pool]]
    if r2 > pool.size:
        raise ValueError(f"r2={r2} exceeds the {pool.size} available pairs")
    if r2 <= 0:
        return 0.0
    pick = np.sort(rng.choice(pool, size=r2, replace=False))
    bits = key.measure_pairs_x(pick, rng)
    key.transcript.post("both", "weight-sample", {"pairs": pick, "bits": bits}, round=round)
    return float(bits.sum()) / r2


def hash_budget(N: int, alpha_hat: float, delta: float) -> int:
    """Maximum number of subset parities spent identifying N bits."""
    return math.ceil(N * binary_entropy(alpha_hat + delta) - 1e-9) + VERIFY_EXTRA


def _frame_bulk_ok(key: EbitKeyRegister, idx) -> bool:
    st = key.state
    return isinstance(st, FrameState) and not (st.x[key.alice[idx]].any() or st.x[key.bob[idx]].any())


def _bulk_parities(key: EbitKeyRegister, perm, M, frozen_idx, masks):
    """All in-place parities of one hash pass at once, on the frame engine.

    With no X frame on the key halves the bilateral CNOTs only change the
    consumer's Z frame, and every consumer is measured right after, so each
    readout equals the XOR of the members' current label bits.  The
    consumers are marked spent; their frames are left as they were.
    """
    st = key.state
    zb = np.zeros(M, dtype=np.uint8)
    zb[: perm.size] = st.z[key.alice[perm]] ^ st.z[key.bob[perm]]
    frozen_bits = superset_transform(zb)[frozen_idx]
    ver = np.array([int(zb[c]) ^ (int(zb[o].sum()) & 1) for c, o in masks], dtype=np.uint8)
    consumers = np.concatenate([perm[frozen_idx], perm[[c for c, _ in masks]]]).astype(np.int64)
    key.live[consumers] = False
    return frozen_bits, ver


@dataclass
class HashResult:
    success: bool
    bits: dict = field(default_factory=dict)
    r3: int = 0
    records: list = field(default_factory=list)


def _solve_records(records, bits: dict) -> None:
    # Later records only involve pairs still live when they were taken,
    # so solving newest-first always has the other members resolved.
    for consumer, others, parity in reversed(records):
        acc = parity
        for j in others:
            acc ^= bits[int(j)]
        bits[int(consumer)] = acc


def hash_identify(key: EbitKeyRegister, alpha_hat: float, delta: float, rng, pairs=None,
                  list_size: int = 16, round: int = 0) -> HashResult:
    """Identify the labels of the live pairs in ``pairs`` from subset parities.

    The live pairs are shuffled and indexed ``0..N-1``.  Each spent parity
    is the XOR over the indices whose binary digits include a chosen index
    ``i``; pair ``i`` itself is the control, so the parity is read in place
    and only that pair is consumed.  Indices are spent in ascending order,
    which keeps every later parity among live pairs.  A list decoder with a
    Bernoulli(alpha_hat + delta/2) prior proposes candidates; the first one
    that matches 40 further random parities and whose weight is at most
    ceil(N (alpha_hat + delta)) is returned.  When the budget is at least N
    every pair is measured directly.
    """
    p = alpha_hat + delta
    if not 0 <= alpha_hat or p >= 0.5:
        raise ValueError("hashing requires alpha_hat + delta < 1/2")
    dom = np.flatnonzero(key.live) if pairs is None else np.asarray(pairs, dtype=np.int64)
    dom = dom[key.live[dom]]
    N = dom.size
    res = HashResult(True)
    if N == 0:
        return res
    wmax = math.ceil(N * p - 1e-9)
    if wmax == 0:
        res.bits = {int(k): 0 for k in dom}
        return res
    budget = hash_budget(N, alpha_hat, delta)
    if budget >= N:
        bits = key.measure_pairs_x(dom, rng)
        res.bits = dict(zip(dom.tolist(), bits.tolist()))
        res.r3 = N
        return res

    perm = rng.permutation(dom)
    M = 1 << (N - 1).bit_length()
    K = budget - VERIFY_EXTRA
    frozen_idx = np.sort(reliability_order(M, N, p)[:K])
    frozen = np.zeros(M, dtype=bool)
    frozen[frozen_idx] = True
    frozen[N:] = True
    live_pos = np.setdiff1d(np.arange(N), frozen_idx)
    masks = []
    for _ in range(VERIFY_EXTRA):
        if live_pos.size == 0:
            break
        members = live_pos[random_subset(live_pos.size, rng)]
        c = int(members[rng.integers(members.size)])
        masks.append((c, members[members != c]))
        live_pos = live_pos[live_pos != c]

    fval = np.zeros(M, dtype=np.uint8)
    if _frame_bulk_ok(key, dom):
        fval[frozen_idx], vbits = _bulk_parities(key, perm, M, frozen_idx, masks)
        checks = [(c, o, int(b)) for (c, o), b in zip(masks, vbits)]
        bulk = True
    else:
        bulk = False
        for i in frozen_idx.tolist():
            members = superset_members(i, N)
            others = perm[members[members != i]]
            bit = _inplace_parity(key, int(perm[i]), others, rng)
            fval[i] = bit
            res.records.append((int(perm[i]), others, bit))
        checks = []
        for c, o in masks:
            bit = _inplace_parity(key, int(perm[c]), perm[o], rng)
            res.records.append((int(perm[c]), perm[o], bit))
            checks.append((c, o, bit))
    res.r3 = K + len(checks)
    key.transcript.post("both", "hash-parities", fval[frozen_idx], round=round)
    key.transcript.post("both", "verify-parities", [b for _, _, b in checks], round=round)

    cands, _ = scl_decode(prior_llr(M, N, alpha_hat + delta / 2), frozen, fval, list_size)

    for cand in cands:
        v = cand[:N]
        if int(v.sum()) > wmax:
            continue
        if all((int(v[c]) ^ (int(v[o].sum()) & 1)) == b for c, o, b in checks):
            res.bits = dict(zip(perm.tolist(), v.tolist()))
            return res
    res.success = False
    if bulk:
        for i in frozen_idx.tolist():
            others = superset_members(i, N)
            res.records.append((int(perm[i]), perm[others[others != i]], int(fval[i])))
        res.records.extend((int(perm[c]), perm[o], b) for c, o, b in checks)
    return res


@dataclass
class RecycleReport:
    """Outcome of one transmission with key recycling.

    ``stage`` is ``passed-preliminary`` or ``hashed``; ``measured`` marks the
    fallback where every remaining pair was measured directly (estimated
    error rate outside the hashing regime, or hashing ambiguous) and
    ``aborted`` the variant that discards the key instead.
    """

    stage: str
    r: int
    r2: int = 0
    r3: int = 0
    alpha_hat: float | None = None
    syndrome: SyndromeVector | None = None
    ebits_consumed: int = 0
    ebits_recycled: int = 0
    accepted: bool = True
    channel_error: PauliOperator | None = field(default=None, repr=False, compare=False)

    def to_json_dict(self) -> dict:
        return {
            "stage": self.stage,
            "r": self.r,
            "r2": self.r2,
            "r3": self.r3,
            "alphaHat": self.alpha_hat,
            "syndromeHex": None if self.syndrome is None else self.syndrome.hex(),
            "ebitsConsumed": self.ebits_consumed,
            "ebitsRecycled": self.ebits_recycled,
            "accepted": self.accepted,
        }


def _measure_rest(key: EbitKeyRegister, bits: dict, rng, pairs=None) -> int:
    rest = np.flatnonzero(key.live) if pairs is None else np.asarray(pairs, dtype=np.int64)
    rest = rest[key.live[rest]]
    vals = key.measure_pairs_x(rest, rng)
    bits.update(zip(rest.tolist(), vals.tolist()))
    return rest.size


def _identify(key, alpha_hat, delta, rng, bits, pairs, list_size, round):
    """Hash one class of pairs, falling back to direct measurement."""
    if alpha_hat + delta >= 0.5:
        return _measure_rest(key, bits, rng, pairs), False
    res = hash_identify(key, alpha_hat, delta, rng, pairs=pairs, list_size=list_size, round=round)
    if res.success:
        bits.update(res.bits)
        return res.r3, True
    spent = _measure_rest(key, bits, rng, pairs)
    _solve_records(res.records, bits)
    return res.r3 + spent, False


def recycle_round(message, key: EbitKeyRegister, channel: PauliChannel, r: int, delta: float,
                  epsilon: float, rng, alpha_knowledge=None, list_size: int = 16,
                  fallback: bool = True, round: int = 0):
    """Encode, transmit through ``channel``, decode, test and recycle.

    On a passed preliminary test the message is accepted as decoded and
    every key pair is kept.  Otherwise r2 pairs estimate the error weight
    (skipped when ``alpha_knowledge`` supplies the Z-flag and X-flag rates),
    the rest are hashed, the identified syndrome corrects the message and
    Phi- survivors are rotated back to Phi+.

    Returns ``(message, report)``; the report's ``channel_error`` field holds
    the sampled error for the harness only.
    """
    if r < 1:
        raise ValueError("r must be at least 1")
    if not (0 < delta < 0.5) or not (0 < epsilon < 1):
        raise ValueError("need 0 < delta < 1/2 and 0 < epsilon < 1")
    size = key.size
    cipher = qvc_encode(message, key)
    key.transcript.post("alice", "sent", b"", round=round)
    _, err = apply_pauli_channel(key.state, channel, cipher, rng)
    key.transcript.post("bob", "received", b"", round=round)
    qvc_decode(cipher, key)

    passed, _ = preliminary_test(key, r, rng, round=round)
    if passed:
        return message, RecycleReport("passed-preliminary", r, ebits_consumed=r,
                                      ebits_recycled=size, channel_error=err)

    bits: dict[int, int] = {}
    hashed = True
    r2 = r3 = 0
    if alpha_knowledge is None:
        r2 = min(chebyshev_sample_size(delta, epsilon), size)
        alpha_hat = estimate_weight(key, r2, rng, round=round)
        bits.update(key.known)
        spent, ok = _identify(key, alpha_hat, delta, rng, bits, None, list_size, round)
        r3 += spent
        hashed &= ok
    else:
        rates = np.broadcast_to(np.asarray(alpha_knowledge, dtype=float), (2,))
        alpha_hat = float(rates.mean())
        for cls, a in enumerate(rates):
            spent, ok = _identify(key, float(a), delta, rng, bits, np.arange(cls, size, 2), list_size, round)
            r3 += spent
            hashed &= ok
    if not hashed and not fallback:
        _discard(key, rng)
        return message, RecycleReport("aborted", r, r2, r3, alpha_hat, None, r + size, 0, False, err)

    syn = SyndromeVector([bits[k] for k in range(size)])
    correct_message(key.state, message, syn)
    survivors = np.flatnonzero(key.live)
    for k in survivors:
        if bits[int(k)]:
            key.fix_phase(int(k))
    key.transcript.post("bob", "corrected", syn.hex(), round=round)
    stage = "hashed" if hashed else "measured"
    consumed = r + size - survivors.size
    return message, RecycleReport(stage, r, r2, r3, alpha_hat, syn, consumed, int(survivors.size), True, err)


def _discard(key, rng):
    rest = np.flatnonzero(key.live)
    key.measure_pairs_x(rest, rng)
