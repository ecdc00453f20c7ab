"""The entanglement-keyed quantum Vernam cipher and key recycling."""
from .cipher import correct_message, predicted_syndrome, qvc_decode, qvc_encode
from .recovery import discard_ciphertext, recover_without_ciphertext
from .recycle import (
    HashResult,
    RecycleReport,
    binary_entropy,
    chebyshev_sample_size,
    estimate_weight,
    hash_budget,
    hash_identify,
    preliminary_test,
    random_subset,
    recycle_round,
    subset_parity,
)
from .register import (
    AncillaPool,
    EbitKeyRegister,
    QVCRound,
    SyndromeVector,
    allocate_round,
    message_fidelity,
)

__all__ = [
    "AncillaPool",
    "EbitKeyRegister",
    "HashResult",
    "QVCRound",
    "RecycleReport",
    "SyndromeVector",
    "allocate_round",
    "binary_entropy",
    "chebyshev_sample_size",
    "correct_message",
    "discard_ciphertext",
    "estimate_weight",
    "hash_budget",
    "hash_identify",
    "message_fidelity",
    "predicted_syndrome",
    "preliminary_test",
    "qvc_decode",
    "qvc_encode",
    "random_subset",
    "recover_without_ciphertext",
    "recycle_round",
    "subset_parity",
]
