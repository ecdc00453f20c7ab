from __future__ import annotations

from dataclasses import dataclass

__all__ = ["ShareAssignment", "FIVEBIT_SHARES", "QUTRIT_SHARES"]


@dataclass(frozen=True)
class ShareAssignment:
    """Which register indices form Alice's, Bob's and the transmitted share."""

    scheme: str
    A: tuple
    B: tuple
    E: tuple

    def __post_init__(self):
        sizes = {"fivebit": (2, 2, 1), "qutrit": (1, 1, 1)}
        if self.scheme not in sizes:
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if (len(self.A), len(self.B), len(self.E)) != sizes[self.scheme]:
            raise ValueError(f"{self.scheme} shares must have sizes {sizes[self.scheme]}")
        if len(set(self.A) | set(self.B) | set(self.E)) != sum(sizes[self.scheme]):
            raise ValueError("shares overlap")


FIVEBIT_SHARES = ShareAssignment("fivebit", A=(0, 1), B=(2, 3), E=(4,))
QUTRIT_SHARES = ShareAssignment("qutrit", A=(0,), B=(1,), E=(2,))
