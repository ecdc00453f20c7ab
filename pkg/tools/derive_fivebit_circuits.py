"""Derive the five-qubit-code cipher circuits and write them as gate lists.

Dev-only (needs ``stim``).  Register layout of the written circuits:
0 = A1, 1 = A2 (Alice's pair halves), 2 = B1, 3 = B2 (Bob's halves),
4 = the message qubit, which becomes the transmitted share E.

Alice's encoder maps two Phi+ pairs and the message onto a codeword of the
[[5,1,3]] code; it is fixed by requiring that the stabilizer element whose
B-part is X_B1 (Z_B1, X_B2, Z_B2) be the image of X_A1 X_B1 (and so on),
and that the logical operators be represented without B support.  Bob's
decoder is fixed the same way with the roles of A and B swapped.  Code
positions and single-qubit Cliffords on Alice's two code qubits are
searched so that an X, Z or Y on E marks both regenerated pairs with the
same Bell label.

Usage: python tools/derive_fivebit_circuits.py [outdir]
"""
import itertools
import sys
from pathlib import Path

import stim

A1, A2, B1, B2, E = range(5)
GENS = ["XZZXI", "IXZZX", "XIXZZ", "ZXIXZ"]
LOGX, LOGZ = "XXXXX", "ZZZZZ"


def group(gens):
    out = []
    for bits in range(16):
        p = stim.PauliString(5)
        for k, g in enumerate(gens):
            if bits >> k & 1:
                p *= g
        out.append(p)
    return out


def restrict(p, qubits):
    s = stim.PauliString(len(qubits))
    for j, q in enumerate(qubits):
        s[j] = p[q]
    return s


def find(elements, qubits, target):
    """Unique element whose restriction to ``qubits`` equals ``target`` (ignoring sign)."""
    hits = [p for p in elements if str(restrict(p, qubits))[1:] == target]
    assert len(hits) == 1, (target, len(hits))
    return hits[0]


def lift(p, qubits):
    """Sign-carrying Pauli on the 3 listed register qubits."""
    s = restrict(p, qubits)
    s.sign = p.sign
    return s


def code(perm, cA1, cA2):
    """Code with position perm[role] for each role and Cliffords on A1, A2."""
    def place(label):
        s = stim.PauliString(5)
        for role in range(5):
            s[role] = label[perm[role]]
        return s

    gens = [place(g) for g in GENS]
    lx, lz = place(LOGX), place(LOGZ)
    loc = stim.Circuit()
    loc.append(cA1, [A1]) if cA1 else None
    loc.append(cA2, [A2]) if cA2 else None
    t = stim.Tableau.from_circuit(loc) if len(loc) else stim.Tableau(5)
    if len(t) < 5:
        t = t + stim.Tableau(5 - len(t))
    return [t(g) for g in gens], t(lx), t(lz)


def pattern_ok(stab):
    for a in (A1, A2):
        ax = find(stab, [A1, A2], "".join("X" if q == a else "_" for q in (A1, A2)))
        az = find(stab, [A1, A2], "".join("Z" if q == a else "_" for q in (A1, A2)))
        if str(restrict(ax, [E]))[1:] != "X" or str(restrict(az, [E]))[1:] != "Z":
            return False
    return True


def logical_rep(stab, op, avoid):
    keep = [q for q in range(5) if q not in avoid]
    for s in stab:
        cand = op * s
        if all(cand[q] == 0 for q in avoid):
            return cand, keep
    raise AssertionError("no logical representative avoiding " + str(avoid))


def image_tableau(stab, lx, lz, other, mine):
    """3-qubit tableau on ``mine`` sending pair halves and message to codeword operators."""
    xs, zs = [], []
    o1, o2 = other
    for o in (o1, o2):
        for kind, lst in (("X", xs), ("Z", zs)):
            tgt = "".join(kind if q == o else "_" for q in other)
            lst.append(lift(find(stab, list(other), tgt), mine))
    rx, _ = logical_rep(stab, lx, other)
    rz, _ = logical_rep(stab, lz, other)
    xs.append(lift(rx, mine))
    zs.append(lift(rz, mine))
    return stim.Tableau.from_conjugated_generators(xs=xs, zs=zs)


CLIFFORDS = [None, "H", "S", "S_DAG", "SQRT_X", "SQRT_X_DAG", "SQRT_Y", "SQRT_Y_DAG", "H_XY", "H_YZ", "C_XYZ", "C_ZYX"]
NAMES = {"H": "H", "S": "S", "S_DAG": "SDG", "CX": "CNOT", "CZ": "CZ", "SWAP": "SWAP", "X": "X", "Y": "Y", "Z": "Z"}


def to_lines(tab, qubits):
    circ = tab.to_circuit(method="elimination")
    lines = []
    for inst in circ.flattened():
        name = inst.name
        targets = [qubits[t.value] for t in inst.targets_copy()]
        arity = 2 if name in ("CX", "CZ", "SWAP") else 1
        for k in range(0, len(targets), arity):
            grp = targets[k:k + arity]
            if name not in NAMES:
                raise ValueError(f"unexpected gate {name}")
            lines.append(NAMES[name] + " " + ",".join(map(str, grp)))
    return lines


def main(outdir):
    for perm in itertools.permutations(range(5)):
        for c1, c2 in itertools.product(CLIFFORDS, repeat=2):
            gens, lx, lz = code(perm, c1, c2)
            stab = group(gens)
            if not pattern_ok(stab):
                continue
                        # The tableau maps pair/message Paulis to codeword Paulis: that is
            # Alice's encoder, and the inverse of Bob's decoder.
            enc = image_tableau(stab, lx, lz, (B1, B2), [A1, A2, E])
            dec = image_tableau(stab, lx, lz, (A1, A2), [B1, B2, E]).inverse()
            header = f"# five-qubit-code cipher; registers 0=A1 1=A2 2=B1 3=B2 4=message/E; code positions {perm}, local {c1},{c2}\n"
            Path(outdir, "fivebit_encode.circ").write_text(
                header.replace("cipher;", "cipher encoder (Alice);") + "\n".join(to_lines(enc, [A1, A2, E])) + "\n")
            Path(outdir, "fivebit_decode.circ").write_text(
                header.replace("cipher;", "cipher decoder (Bob);") + "\n".join(to_lines(dec, [B1, B2, E])) + "\n")
            print("written for", perm, c1, c2)
            return
    raise SystemExit("no assignment found")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "src/qvernam/sharing/circuits")
