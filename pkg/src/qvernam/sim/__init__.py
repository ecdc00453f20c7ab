"""Quantum state engines and Pauli algebra shared by the protocol modules."""
from __future__ import annotations

import numpy as np

from .dense import (
    DenseState,
    fidelity,
    partial_trace,
    random_density,
    random_state,
    trace_distance,
    von_neumann_entropy,
)
from .frame import FrameState
from .pauli import BellLabel, PauliOperator
from .tableau import StabilizerState

__all__ = [
    "PauliOperator",
    "BellLabel",
    "StabilizerState",
    "DenseState",
    "FrameState",
    "apply_gate",
    "measure_pauli",
    "measure_pair",
    "bell_identify",
    "fidelity",
    "dense_from_stabilizer",
    "partial_trace",
    "trace_distance",
    "von_neumann_entropy",
    "random_state",
    "random_density",
]


def apply_gate(state, gate: str, *targets):
    """Apply a named gate in place and return the state."""
    return state.apply(gate, *targets)


def measure_pauli(state, observable: PauliOperator, rng):
    """Measure ``observable``; returns (outcome index, collapsed state).

    The outcome ``k`` labels the eigenvalue ``exp(2 pi i k / d)``, so for
    qubits 0 means +1 and 1 means -1.  The state is collapsed in place.
    """
    if isinstance(state, FrameState):
        raise TypeError("the frame engine only supports pair measurements")
    return state.measure(observable, rng), state


def measure_pair(state, a: int, b: int, basis: str, rng):
    """Each holder measures their half of pair (a, b) in basis 'x' or 'z'."""
    if isinstance(state, FrameState):
        return state.measure_pair(a, b, basis, rng)
    if basis == "x":
        return state.measure_x(a, rng), state.measure_x(b, rng)
    if basis == "z":
        return state.measure_z(a, rng), state.measure_z(b, rng)
    raise ValueError("basis must be 'x' or 'z'")


def _pair_op(n: int, a: int, b: int, kind: str) -> PauliOperator:
    x = np.zeros(n, int)
    z = np.zeros(n, int)
    target = x if kind == "X" else z
    target[a] = target[b] = 1
    return PauliOperator(x, z)


def bell_identify(state, pair) -> BellLabel:
    """Label of a qubit pair that is in a definite Bell state (non-destructive)."""
    a, b = (int(q) for q in pair)
    if a == b:
        raise ValueError("pair needs two distinct qubits")
    if isinstance(state, FrameState):
        return state.pair_label(a, b)
    xx = _pair_op(state.n, a, b, "X")
    zz = _pair_op(state.n, a, b, "Z")
    if isinstance(state, StabilizerState):
        sx, sz = state.stabilizer_sign(xx), state.stabilizer_sign(zz)
    elif isinstance(state, DenseState):
        if state.d != 2:
            raise ValueError("Bell labels are defined for qubits")
        ex, ez = state.expectation(xx).real, state.expectation(zz).real
        if abs(abs(ex) - 1) > 1e-7 or abs(abs(ez) - 1) > 1e-7:
            sx = sz = 0
        else:
            sx, sz = int(np.sign(ex)), int(np.sign(ez))
    else:
        raise TypeError(f"unsupported state type {type(state).__name__}")
    if sx == 0 or sz == 0:
        raise ValueError(f"qubits {a},{b} are not in a definite Bell state")
    return BellLabel.from_bits(int(sx < 0), int(sz < 0))


def _pauli_on_vector(amp: np.ndarray, xbits: int, zbits: int, yc: int, sign: int) -> np.ndarray:
    """Apply (-1)^sign i^yc X^x Z^z (bit masks over basis indices) to ``amp``."""
    idx = np.arange(amp.size)
    par = (np.bitwise_count(idx & zbits) & 1).astype(np.int64)
    out = np.empty_like(amp)
    out[idx ^ xbits] = amp * (1 - 2 * par)
    return out * (1j**yc) * (-1) ** sign


def dense_from_stabilizer(state: StabilizerState, cap: int | None = None) -> DenseState:
    """Amplitude vector of a stabilizer state, canonical global phase."""
    n = state.n
    out = DenseState(n, 2, cap=cap)  # raises when n exceeds the cap
    gens = []
    for op in state.stabilizers():
        xb = int(sum(1 << q for q in np.flatnonzero(op.x)))
        zb = int(sum(1 << q for q in np.flatnonzero(op.z)))
        # op = i^phase X^x Z^z
        gens.append((xb, zb, op.phase))
    # a computational-basis sample lies in the support of the state
    probe = state.copy()
    sampler = np.random.default_rng(0)
    start = sum(probe.measure_z(q, sampler) << q for q in range(n))
    v = np.zeros(2**n, dtype=complex)
    v[start] = 1.0
    for xb, zb, ph in gens:
        v = 0.5 * (v + _pauli_on_vector(v, xb, zb, ph, 0))
    nv = np.linalg.norm(v)
    if nv > 1e-6:
        out.amp = v / nv
        out.amp = out.canonical()
        return out
    raise RuntimeError("no basis state overlaps the stabilizer state")
