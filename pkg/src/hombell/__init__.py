"""Gaussian-optics simulation and automated search for heralded homodyne Bell tests."""

__version__ = "0.1.0"

from ._kernels import USE_NUMBA
from .chsh import (BellMeasurement, Binning, DegenerateCovariance, chsh_score, correlator,
                   correlators, homodyne_marginal, rectangle_integral)
from .circuit import Circuit, CompiledCircuit, EvalResult, evaluate, evaluate_reference
from .gaussian import (Gate, GateKind, GaussianState, apply_circuit, apply_gate, check_valid,
                       db_from_squeezing, partial_trace, squeezing_from_db, symplectic_matrix,
                       vacuum_state)
from .herald import (HeraldImpossible, HeraldScheme, HeraldSpec, LcgState, apply_loss,
                     condition_click, condition_no_click, herald_all,
                     herald_single_photon_projection)

__all__ = [
    "USE_NUMBA", "BellMeasurement", "Binning", "DegenerateCovariance", "chsh_score",
    "correlator", "correlators", "homodyne_marginal", "rectangle_integral", "Circuit",
    "CompiledCircuit", "EvalResult", "evaluate", "evaluate_reference", "Gate", "GateKind",
    "GaussianState", "apply_circuit", "apply_gate", "check_valid", "db_from_squeezing",
    "partial_trace", "squeezing_from_db", "symplectic_matrix", "vacuum_state",
    "HeraldImpossible", "HeraldScheme", "HeraldSpec", "LcgState", "apply_loss",
    "condition_click", "condition_no_click", "herald_all", "herald_single_photon_projection",
]
