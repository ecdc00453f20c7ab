"""(2,3) threshold ciphers: the five-qubit-code scheme and the qutrit scheme."""
from .circuits import load_circuit, parse_circuit, run_circuit
from .fivebit import (
    fivebit_correct,
    fivebit_decode,
    fivebit_encode,
    fivebit_error_table,
    fivebit_locc_syndrome,
    fivebit_pair_labels,
    fivebit_prepare,
    fivebit_recover_without_share,
    is_clifford,
)
from .locc import LOCCVerdict, locc_feasibility_check
from .qutrit import (
    qutrit_correct,
    qutrit_decode,
    qutrit_encode,
    qutrit_error_table,
    qutrit_prepare,
    qutrit_reconstruct,
)
from .shares import FIVEBIT_SHARES, QUTRIT_SHARES, ShareAssignment

__all__ = [
    "FIVEBIT_SHARES",
    "QUTRIT_SHARES",
    "LOCCVerdict",
    "ShareAssignment",
    "fivebit_correct",
    "fivebit_decode",
    "fivebit_encode",
    "fivebit_error_table",
    "fivebit_locc_syndrome",
    "fivebit_pair_labels",
    "fivebit_prepare",
    "fivebit_recover_without_share",
    "is_clifford",
    "load_circuit",
    "locc_feasibility_check",
    "parse_circuit",
    "qutrit_correct",
    "qutrit_decode",
    "qutrit_encode",
    "qutrit_error_table",
    "qutrit_prepare",
    "qutrit_reconstruct",
    "run_circuit",
]
