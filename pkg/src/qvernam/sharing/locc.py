"""Which error syndromes can the key holders read with LOCC alone?

Five-qubit scheme: yes, via :func:`fivebit_locc_syndrome`, checked by
running it on every error.  Qutrit scheme: the nine post-decode pair
states form a complete basis of maximally entangled states.  Perfect LOCC
discrimination of such a basis is impossible (it would let LOCC create
entanglement), so only a numeric witness is computed here: the best
one-way protocol in which each party measures in one of the four mutually
unbiased qutrit bases, the second choosing its basis from the first
party's announced outcome, stays below certainty.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from ..sim.pauli import single_qudit_matrices
from .fivebit import ERRORS, _apply_error, fivebit_decode, fivebit_encode, fivebit_locc_syndrome, fivebit_prepare
from .qutrit import qutrit_error_table

__all__ = ["LOCCVerdict", "locc_feasibility_check", "qutrit_mub_bases", "one_way_success", "global_success"]


@dataclass
class LOCCVerdict:
    scheme: str
    verdict: str
    locc_success: float
    global_success: float
    witness: str

    def to_json_dict(self) -> dict:
        return {
            "scheme": self.scheme,
            "verdict": self.verdict,
            "loccSuccess": self.locc_success,
            "globalSuccess": self.global_success,
            "witness": self.witness,
        }


def qutrit_mub_bases() -> list[np.ndarray]:
    """Eigenbases of Z, X, XZ and XZ^2; columns are basis vectors."""
    X, Z = single_qudit_matrices(3)
    out = []
    for op in (Z, X, X @ Z, X @ Z @ Z):
        _, vecs = np.linalg.eig(op)
        q, _ = np.linalg.qr(vecs)
        out.append(q)
    return out


def _joint_probs(states, b_first, b_second, first: int) -> np.ndarray:
    """P[i, o1, o2] for state i, first party outcome o1, second o2."""
    # states[i] indexed a + 3e -> tensor [e, a]
    T = np.array([s.reshape(3, 3) for s in states])  # [i, e, a]
    if first == 0:
        amp = np.einsum("iea,ao,ep->iop", T, b_first.conj(), b_second.conj())
    else:
        amp = np.einsum("iea,eo,ap->iop", T, b_first.conj(), b_second.conj())
    return np.abs(amp) ** 2


def one_way_success(states, priors=None) -> tuple[float, tuple]:
    """Best success over the restricted one-way protocol family.

    Enumerates who measures first (A or E), the first basis, and a second
    basis for each of the three announced outcomes, then guesses the most
    likely state.  Returns ``(success, protocol)``.
    """
    k = len(states)
    priors = np.full(k, 1.0 / k) if priors is None else np.asarray(priors)
    bases = qutrit_mub_bases()
    best, arg = -1.0, None
    for first in (0, 1):
        for b1 in range(4):
            # With the first basis fixed, each outcome's second basis is optimized independently.
            total = 0.0
            choice = []
            for o1 in range(3):
                scores = []
                for b2 in range(4):
                    P = _joint_probs(states, bases[b1], bases[b2], first)[:, o1, :] * priors[:, None]
                    scores.append(P.max(axis=0).sum())
                choice.append(int(np.argmax(scores)))
                total += max(scores)
            if total > best + 1e-12:
                best, arg = total, ("AE"[first], b1, tuple(choice))
    return float(best), arg


def global_success(states) -> float:
    """Success of the projective measurement onto the given states (uniform prior)."""
    S = np.array(states)
    gram = S.conj() @ S.T
    return float(np.sum(np.abs(np.diag(gram)) ** 2) / len(states)) if np.allclose(gram, np.eye(len(states)), atol=1e-9) else float("nan")


def locc_feasibility_check(scheme: str, trials: int = 25, rng=None) -> LOCCVerdict:
    if scheme == "fivebit":
        rng = np.random.default_rng(0) if rng is None else rng
        hits = 0
        for err, _ in itertools.product(ERRORS, range(trials)):
            st = fivebit_encode(fivebit_prepare(engine="stabilizer"))
            _apply_error(st, err)
            fivebit_decode(st)
            hits += fivebit_locc_syndrome(st, rng) == err
        rate = hits / (len(ERRORS) * trials)
        return LOCCVerdict("fivebit", "locc-distinguishable", rate, 1.0,
                           "Z outcomes on pair (A1,B1) and X outcomes on pair (A2,B2), parities broadcast")
    if scheme == "qutrit":
        states = [v[0] for v in qutrit_error_table().values()]
        succ, proto = one_way_success(states)
        return LOCCVerdict("qutrit", "locc-indistinguishable", succ, global_success(states),
                           f"best one-way MUB protocol {proto} succeeds with {succ:.6f}; "
                           "a complete maximally entangled basis admits no perfect LOCC discrimination")
    raise ValueError(f"unknown scheme {scheme!r}")
