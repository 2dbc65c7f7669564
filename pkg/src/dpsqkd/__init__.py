"""Phase-error bounds and finite-size-free key rates for DPS quantum key distribution."""

from .operators import Pattern, build_pi, build_pi_ph
from .omega import OmegaCurve, omega, omega_curve, region_boundary, support_function_h, verify_chain

__all__ = [
    "Pattern",
    "build_pi",
    "build_pi_ph",
    "OmegaCurve",
    "omega",
    "omega_curve",
    "region_boundary",
    "support_function_h",
    "verify_chain",
]
__version__ = "0.1.0"
