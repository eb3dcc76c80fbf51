"""Heralded preparation of multi-qubit photonic states with linear optics.

Principal single photons are partially reflected into a passive network,
measured together with any ancilla photons, and the surviving principal
modes carry the target state when every detector fires as desired.
"""

__version__ = "0.1.0"

from .errors import HeraldixError, InfeasibleError  # noqa: E402
from .fock import FockState, StateVector, fidelity, normalize  # noqa: E402
from .heralding import SchemeConfig, ideal_output, projector_coefficients  # noqa: E402
from .network import UnitaryMatrix, permanent  # noqa: E402
from .optimizer import Budget, OptimizationResult, TargetState, optimize  # noqa: E402

__all__ = [
    "Budget", "FockState", "HeraldixError", "InfeasibleError", "OptimizationResult",
    "SchemeConfig", "StateVector", "TargetState", "UnitaryMatrix", "fidelity",
    "ideal_output", "normalize", "optimize", "permanent", "projector_coefficients",
]
