"""Physical constants (CODATA 2018, SI units)."""

from dataclasses import dataclass

HBAR = 1.054571817e-34  # J s
C = 299792458.0  # m / s
EPS0 = 8.8541878128e-12  # F / m
MU0 = 1.25663706212e-6  # H / m
KB = 1.380649e-23  # J / K
WIEN_B = 2.897771955e-3  # m K


@dataclass(frozen=True)
class PhysicalConstants:
    """Bundle of the constants used by the library."""

    hbar: float = HBAR
    c: float = C
    eps0: float = EPS0
    mu0: float = MU0
    kB: float = KB
    wien_b: float = WIEN_B

    def __post_init__(self):
        for name in ("hbar", "c", "eps0", "mu0", "kB", "wien_b"):
            if not getattr(self, name) > 0:
                raise ValueError(f"constant {name} must be positive")


CONSTANTS = PhysicalConstants()
