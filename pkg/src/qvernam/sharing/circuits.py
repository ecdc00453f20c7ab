"""Plain-text gate lists: one ``GATE q[,q2]`` per line, ``#`` comments."""
from __future__ import annotations

from importlib import resources

__all__ = ["parse_circuit", "load_circuit", "run_circuit", "invert_circuit"]

_SELF_INVERSE = {"H", "X", "Y", "Z", "CNOT", "CX", "CZ", "SWAP"}
_INVERSE = {"S": "SDG", "SDG": "S"}


def parse_circuit(text: str) -> list[tuple[str, tuple[int, ...]]]:
    gates = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            name, args = line.split(None, 1)
            qubits = tuple(int(a) for a in args.split(","))
        except ValueError as exc:
            raise ValueError(f"line {lineno}: cannot parse {raw!r}") from exc
        gates.append((name.upper(), qubits))
    return gates


def load_circuit(name: str) -> list[tuple[str, tuple[int, ...]]]:
    """Read a packaged circuit file by stem (for example ``fivebit_encode``)."""
    text = resources.files("qvernam.sharing").joinpath("circuits").joinpath(f"{name}.circ").read_text()
    return parse_circuit(text)


def run_circuit(state, gates) -> None:
    for name, qubits in gates:
        state.apply(name, *qubits)


def invert_circuit(gates):
    out = []
    for name, qubits in reversed(gates):
        if name in _SELF_INVERSE:
            out.append((name, qubits))
        elif name in _INVERSE:
            out.append((_INVERSE[name], qubits))
        else:
            raise ValueError(f"no inverse known for {name}")
    return out
