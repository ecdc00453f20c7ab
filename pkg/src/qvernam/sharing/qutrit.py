"""(2,3) threshold cipher on qutrits.

Registers: 0 = A (Alice), 1 = B (Bob), 2 = message, sent as share E.
A and B start in (|00> + |12> + |21>)/sqrt(3), i.e. sum_k |k>|-k>.  Gates:
SUM |a,b> -> |a, a+b> and DIFFERENCE |a,b> -> |a, a-b> (control first).

Encode (Alice): DIFFERENCE(m, A) then SUM(A, m).  Decode (Bob):
DIFFERENCE(E, B), SUM(B, E), then F^2 (|j> -> |-j>) on B and on E.  The
message ends up in B and the pair is regenerated on (A, E).
"""
from __future__ import annotations

import itertools
from functools import lru_cache

import numpy as np

from ..sim import DenseState, partial_trace
from ..sim.pauli import single_qudit_matrices
from .shares import QUTRIT_SHARES

__all__ = [
    "PAIR_STATE",
    "qutrit_prepare",
    "qutrit_encode",
    "qutrit_decode",
    "qutrit_apply_error",
    "qutrit_error_table",
    "qutrit_pair_state",
    "qutrit_correct",
    "qutrit_reconstruct",
    "generalized_bell_state",
]

A, B, E = QUTRIT_SHARES.A[0], QUTRIT_SHARES.B[0], QUTRIT_SHARES.E[0]
_X3, _Z3 = single_qudit_matrices(3)


def generalized_bell_state(s: int = 0, t: int = 0) -> np.ndarray:
    """(X^s Z^t on the second qutrit) applied to sum_k |k>|-k> / sqrt(3); index a + 3b."""
    v = np.zeros(9, dtype=complex)
    for k in range(3):
        v[k + 3 * ((-k) % 3)] = 1 / np.sqrt(3)
    op = np.kron(np.linalg.matrix_power(_X3, s) @ np.linalg.matrix_power(_Z3, t), np.eye(3))
    return op @ v


PAIR_STATE = generalized_bell_state()


def qutrit_prepare(psi=None) -> DenseState:
    """Entangled pair on (A, B) and the message on E; ``psi`` has three amplitudes."""
    m = np.zeros(3, dtype=complex)
    m[0] = 1
    if psi is not None:
        m = np.asarray(psi, dtype=complex)
        m = m / np.linalg.norm(m)
    amp = np.kron(m, PAIR_STATE)
    return DenseState(3, d=3, amplitudes=amp)


def qutrit_encode(state: DenseState) -> DenseState:
    state.apply("DIFFERENCE", E, A)
    state.apply("SUM", A, E)
    return state


def qutrit_decode(state: DenseState) -> DenseState:
    state.apply("DIFFERENCE", E, B)
    state.apply("SUM", B, E)
    for q in (B, E):
        state.apply("FOURIER", q)
        state.apply("FOURIER", q)
    return state


def qutrit_apply_error(state: DenseState, s: int, t: int, target: int = E) -> DenseState:
    """Apply X^s Z^t to ``target``."""
    U = np.linalg.matrix_power(_X3, s % 3) @ np.linalg.matrix_power(_Z3, t % 3)
    state.apply_matrix(U, [target])
    return state


def qutrit_pair_state(state: DenseState) -> np.ndarray:
    """Pure state of the (A, E) pair when it factors from B (index a + 3e)."""
    amp = state.amp.reshape(3, 3, 3)  # axes: E, B, A
    u, sv, vh = np.linalg.svd(amp.transpose(1, 0, 2).reshape(3, 9))
    if sv[1] > 1e-9:
        raise ValueError("pair is entangled with the message register")
    pair = vh[0].reshape(3, 3)  # (E, A)
    return pair.T.reshape(9, order="F")


def _message_amp(state: DenseState, pair: np.ndarray) -> np.ndarray:
    amp = state.amp.reshape(3, 3, 3)
    P = pair.reshape(3, 3, order="F")  # P[a, e]
    return np.einsum("eba,ae->b", amp, P.conj())


@lru_cache(maxsize=1)
def qutrit_error_table() -> dict:
    """(s, t) -> (pair state on (A, E), message correction (s', t')).

    The message correction is the X^s' Z^t' that, applied to B after
    decoding, restores the input up to a global phase.
    """
    rng_psi = np.array([0.6, 0.48 + 0.3j, 0.2 - 0.5j])
    rng_psi = rng_psi / np.linalg.norm(rng_psi)
    table = {}
    for s, t in itertools.product(range(3), repeat=2):
        st = qutrit_encode(qutrit_prepare(rng_psi))
        qutrit_apply_error(st, s, t)
        qutrit_decode(st)
        pair = qutrit_pair_state(st)
        msg = _message_amp(st, pair)
        msg = msg / np.linalg.norm(msg)
        fix = None
        for a, b in itertools.product(range(3), repeat=2):
            U = np.linalg.matrix_power(_X3, a) @ np.linalg.matrix_power(_Z3, b)
            if abs(abs(np.vdot(rng_psi, U @ msg)) - 1) < 1e-9:
                fix = (a, b)
                break
        if fix is None:
            raise AssertionError("decoded message is not a Pauli image of the input")
        table[(s, t)] = (pair, fix)
    return table


def qutrit_correct(state: DenseState, error) -> DenseState:
    """Apply the message correction for a known error (global operation)."""
    _, (a, b) = qutrit_error_table()[tuple(error)]
    return qutrit_apply_error(state, a, b, target=B)


def qutrit_reconstruct(state: DenseState, shares: str):
    """Recover the secret from two shares of an encoded state.

    ``"BE"``: Bob's decode (secret in B).  ``"AE"``: Alice undoes her
    encoding (secret in E).  ``"AB"``: a joint unitary on A and B that
    leaves the secret in A with E still entangled only with B.
    Returns the index of the register holding the secret.
    """
    if shares == "BE":
        qutrit_decode(state)
        return B
    if shares == "AE":
        state.apply("DIFFERENCE", A, E)
        state.apply("FOURIER", E)
        state.apply("FOURIER", E)
        state.apply("DIFFERENCE", E, A)
        return E
    if shares == "AB":
        state.apply("DIFFERENCE", B, A)
        state.apply("FOURIER", A)
        state.apply("FOURIER", A)
        state.apply("SUM", A, B)
        state.apply("SUM", A, B)
        return A
    raise ValueError("shares must be two of 'A', 'B', 'E'")


def reduced_share(state: DenseState, share: int) -> np.ndarray:
    return partial_trace(state.amp, [share], state.n, 3)
