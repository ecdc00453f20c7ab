"""Dense amplitude engine for qubits and qutrits.

Qudit ``q`` is digit ``q`` of the basis index written in base ``d``
(little-endian).  Multi-qudit gate matrices use the same convention over
their target list: the first target is the least significant digit.
"""
from __future__ import annotations

import numpy as np

from .pauli import PauliOperator, single_qudit_matrices

__all__ = [
    "DenseState",
    "DEFAULT_CAP",
    "gate_matrix",
    "fidelity",
    "trace_distance",
    "von_neumann_entropy",
    "partial_trace",
    "random_state",
    "random_density",
    "EQ_TOL",
    "NORM_TOL",
]

EQ_TOL = 1e-9
NORM_TOL = 1e-7
DEFAULT_CAP = {2: 2**14, 3: 3**9}

_S2 = 1 / np.sqrt(2)
_W3 = np.exp(2j * np.pi / 3)


def _perm_matrix(d: int, k: int, fn) -> np.ndarray:
    """Matrix of the basis permutation fn acting on digit tuples (first target first)."""
    dim = d**k
    U = np.zeros((dim, dim), dtype=complex)
    for idx in range(dim):
        digits = [(idx // d**j) % d for j in range(k)]
        out = fn(*digits)
        U[sum(v * d**j for j, v in enumerate(out)), idx] = 1
    return U


_QUBIT = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.diag([1, -1]).astype(complex),
    "H": _S2 * np.array([[1, 1], [1, -1]], dtype=complex),
    "S": np.diag([1, 1j]),
    "SDG": np.diag([1, -1j]),
    "T": np.diag([1, np.exp(1j * np.pi / 4)]),
    "CNOT": _perm_matrix(2, 2, lambda c, t: (c, t ^ c)),
    "CZ": np.diag([1, 1, 1, -1]).astype(complex),
    "SWAP": _perm_matrix(2, 2, lambda a, b: (b, a)),
}
_QUBIT["CX"] = _QUBIT["CNOT"]

_QUTRIT = {
    "I": np.eye(3, dtype=complex),
    "SHIFT": single_qudit_matrices(3)[0],
    "PHASE": single_qudit_matrices(3)[1],
    "FOURIER": np.array([[_W3 ** (j * k) for j in range(3)] for k in range(3)]) / np.sqrt(3),
    "SUM": _perm_matrix(3, 2, lambda a, b: (a, (a + b) % 3)),
    "DIFFERENCE": _perm_matrix(3, 2, lambda a, b: (a, (a - b) % 3)),
    "SWAP": _perm_matrix(3, 2, lambda a, b: (b, a)),
}
_QUTRIT_ALIAS = {"X": "SHIFT", "Z": "PHASE", "F": "FOURIER", "DIFF": "DIFFERENCE"}


def gate_matrix(gate: str, d: int = 2) -> np.ndarray:
    """Unitary for a named gate in dimension ``d``."""
    g = gate.upper()
    if d == 2:
        if g not in _QUBIT:
            raise ValueError(f"gate {gate!r} is not a qubit gate")
        return _QUBIT[g]
    if d == 3:
        g = _QUTRIT_ALIAS.get(g, g)
        if g not in _QUTRIT:
            raise ValueError(f"gate {gate!r} is not a qutrit gate")
        return _QUTRIT[g]
    raise ValueError(f"unsupported dimension {d}")


class DenseState:
    """Pure state of ``n`` qudits of dimension ``d`` as an amplitude vector."""

    def __init__(self, n: int, d: int = 2, amplitudes=None, cap: int | None = None):
        if d not in (2, 3):
            raise ValueError(f"unsupported dimension {d}")
        self.n, self.d = int(n), int(d)
        self.cap = DEFAULT_CAP[d] if cap is None else int(cap)
        dim = d**self.n
        if dim > self.cap:
            raise ValueError(
                f"{self.n} qudits of dimension {d} need {dim} amplitudes, above the cap {self.cap}"
            )
        if amplitudes is None:
            self.amp = np.zeros(dim, dtype=complex)
            self.amp[0] = 1.0
        else:
            amp = np.asarray(amplitudes, dtype=complex).ravel()
            if amp.size != dim:
                raise ValueError(f"expected {dim} amplitudes, got {amp.size}")
            norm = np.linalg.norm(amp)
            if abs(norm - 1) > NORM_TOL:
                raise ValueError(f"amplitudes not normalised (norm {norm})")
            self.amp = amp.copy()

    @classmethod
    def from_amplitudes(cls, amplitudes, d: int = 2, cap: int | None = None) -> "DenseState":
        amp = np.asarray(amplitudes, dtype=complex).ravel()
        n = int(round(np.log(amp.size) / np.log(d)))
        if d**n != amp.size:
            raise ValueError("amplitude count is not a power of d")
        return cls(n, d, amp, cap)

    def copy(self) -> "DenseState":
        out = object.__new__(DenseState)
        out.n, out.d, out.cap, out.amp = self.n, self.d, self.cap, self.amp.copy()
        return out

    def _check(self, q) -> int:
        q = int(q)
        if not 0 <= q < self.n:
            raise IndexError(f"qudit {q} out of range for n={self.n}")
        return q

    # evolution --------------------------------------------------------
    def apply_matrix(self, U, targets) -> "DenseState":
        """Apply a k-qudit unitary on ``targets`` (first target least significant)."""
        targets = [self._check(t) for t in targets]
        if len(set(targets)) != len(targets):
            raise ValueError("targets must be distinct")
        k, d, n = len(targets), self.d, self.n
        U = np.asarray(U, dtype=complex)
        if U.shape != (d**k, d**k):
            raise ValueError(f"matrix shape {U.shape} does not match {k} targets of dimension {d}")
        ut = U.reshape((d,) * (2 * k))
        psi = self.amp.reshape((d,) * n)
        in_axes = [k + (k - 1 - j) for j in range(k)]
        psi_axes = [n - 1 - t for t in targets]
        res = np.tensordot(ut, psi, axes=(in_axes, psi_axes))
        dest = [n - 1 - targets[k - 1 - j] for j in range(k)]
        res = np.moveaxis(res, list(range(k)), dest)
        self.amp = np.ascontiguousarray(res).reshape(-1)
        return self

    def apply(self, gate: str, *targets) -> "DenseState":
        U = gate_matrix(gate, self.d)
        k = int(round(np.log(U.shape[0]) / np.log(self.d)))
        if len(targets) != k:
            raise ValueError(f"gate {gate} expects {k} targets, got {len(targets)}")
        return self.apply_matrix(U, targets)

    def apply_pauli(self, op: PauliOperator, qudits=None) -> "DenseState":
        """Apply a Pauli operator (global phase dropped) on ``qudits``."""
        if op.d != self.d:
            raise ValueError("dimension mismatch")
        qudits = list(range(self.n)) if qudits is None else list(qudits)
        if len(qudits) != op.n:
            raise ValueError("qudit list must match operator size")
        X, Z = single_qudit_matrices(self.d)
        for j, q in enumerate(qudits):
            a, b = int(op.x[j]), int(op.z[j])
            if a or b:
                M = np.linalg.matrix_power(X, a) @ np.linalg.matrix_power(Z, b)
                self.apply_matrix(M, [q])
        return self

    def cnot_fanout(self, control: int, targets) -> None:
        for t in targets:
            self.apply("CNOT", control, t)

    def extend(self, k: int) -> "DenseState":
        """New state with ``k`` extra |0> qudits appended at the top indices."""
        out = DenseState(self.n + k, self.d, cap=self.cap)
        out.amp[:] = 0
        out.amp[: self.amp.size] = self.amp
        return out

    # measurement ------------------------------------------------------
    def _projectors(self, op: PauliOperator):
        supp = op.support()
        if not supp:
            raise ValueError("cannot measure the identity")
        M = op.restrict(supp).to_matrix()
        vals, vecs = np.linalg.eig(M)
        ks = np.angle(vals) * self.d / (2 * np.pi)
        kr = np.round(ks)
        if np.max(np.abs(ks - kr)) > 1e-8 or np.max(np.abs(np.abs(vals) - 1)) > 1e-8:
            raise ValueError("observable eigenvalues are not d-th roots of unity")
        kr = kr.astype(int) % self.d
        projs = {}
        for k in range(self.d):
            cols = vecs[:, kr == k]
            if cols.size:
                q, _ = np.linalg.qr(cols)
                projs[k] = q @ q.conj().T
        return supp, projs

    def measure(self, op: PauliOperator, rng) -> int:
        """Projective Pauli measurement; returns k for eigenvalue exp(2 pi i k / d)."""
        if not isinstance(op, PauliOperator):
            raise TypeError("observable must be a PauliOperator")
        if op.d != self.d or op.n != self.n:
            raise ValueError("observable does not match the register")
        supp, projs = self._projectors(op)
        branches, probs = [], []
        for k, P in sorted(projs.items()):
            cand = self.copy().apply_matrix(P, supp)
            branches.append((k, cand))
            probs.append(float(np.vdot(cand.amp, cand.amp).real))
        probs = np.array(probs)
        u = rng.random() * probs.sum()
        pick = int(np.searchsorted(np.cumsum(probs), u, side="right"))
        pick = min(pick, len(branches) - 1)
        while probs[pick] < 1e-15:
            pick -= 1
        k, cand = branches[pick]
        self.amp = cand.amp / np.sqrt(probs[pick])
        return int(k)

    def expectation(self, op: PauliOperator) -> complex:
        tmp = self.copy().apply_pauli(op.strip_phase())
        return np.exp(1j * np.pi * op.phase / self.d) * np.vdot(self.amp, tmp.amp)

    def measure_z(self, q: int, rng) -> int:
        return self.measure(PauliOperator.single(self.n, self._check(q), 0, 1, self.d), rng)

    def measure_x(self, q: int, rng) -> int:
        if self.d != 2:
            raise ValueError("measure_x is a qubit operation")
        return self.measure(PauliOperator.single(self.n, self._check(q), 1, 0), rng)

    def reset(self, q: int, rng) -> None:
        k = self.measure_z(q, rng)
        if k:
            shift = gate_matrix("X", self.d)
            for _ in range(self.d - k):
                self.apply_matrix(shift, [q])

    # inspection -------------------------------------------------------
    def norm(self) -> float:
        return float(np.linalg.norm(self.amp))

    def check_norm(self) -> None:
        if abs(self.norm() - 1) > NORM_TOL:
            raise RuntimeError(f"normalisation drift {self.norm() - 1:.3g}")

    def canonical(self) -> np.ndarray:
        """Amplitudes with the first nonzero entry made real positive."""
        idx = np.flatnonzero(np.abs(self.amp) > EQ_TOL)
        if idx.size == 0:
            return self.amp.copy()
        a = self.amp[idx[0]]
        return self.amp * (abs(a) / a)

    def density_matrix(self, keep=None) -> np.ndarray:
        keep = list(range(self.n)) if keep is None else list(keep)
        return partial_trace(self.amp, keep, self.n, self.d)

    def __repr__(self) -> str:
        return f"DenseState(n={self.n}, d={self.d})"


def partial_trace(amp, keep, n: int, d: int = 2) -> np.ndarray:
    """Reduced density matrix of a pure state on ``keep`` (keep[0] least significant)."""
    keep = list(keep)
    psi = np.asarray(amp).reshape((d,) * n)
    front = [n - 1 - q for q in reversed(keep)]
    rest = [a for a in range(n) if a not in front]
    m = np.transpose(psi, front + rest).reshape(d ** len(keep), -1)
    return m @ m.conj().T


def fidelity(a: DenseState, b: DenseState) -> float:
    """|<a|b>|^2 for two pure states."""
    if a.n != b.n or a.d != b.d:
        raise ValueError("states have different shapes")
    return float(abs(np.vdot(a.amp, b.amp)) ** 2)


def trace_distance(rho, sigma) -> float:
    ev = np.linalg.eigvalsh(np.asarray(rho) - np.asarray(sigma))
    return float(0.5 * np.abs(ev).sum())


def von_neumann_entropy(rho) -> float:
    """Entropy in bits."""
    ev = np.linalg.eigvalsh(np.asarray(rho))
    ev = ev[ev > 1e-12]
    return float(-(ev * np.log2(ev)).sum())


def random_state(n: int, rng, d: int = 2) -> DenseState:
    """Haar-random pure state."""
    v = rng.normal(size=d**n) + 1j * rng.normal(size=d**n)
    return DenseState(n, d, v / np.linalg.norm(v))


def random_density(n: int, rng, rank: int | None = None) -> np.ndarray:
    """Random qubit density matrix (induced measure)."""
    dim = 2**n
    rank = dim if rank is None else rank
    g = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real
