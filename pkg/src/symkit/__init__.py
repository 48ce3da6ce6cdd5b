"""Desk-scale simulator for symmetry tests of quantum states, channels and Hamiltonians."""

from .errors import SymkitError
from .numerics import DensityMatrix, PureState
from .symmetry import GroupRep, c2_from_unitary, projector, shift_rep, swap_rep, trivial_rep, twirl, validate_rep
from .channels import EBChannel, QuantumChannel
from .circuits import GateCircuit, Register, compile_circuit
from .measures import MeasureResult

__version__ = "0.1.0"

__all__ = [
    "SymkitError", "DensityMatrix", "PureState", "GroupRep", "c2_from_unitary", "projector", "shift_rep",
    "swap_rep", "trivial_rep", "twirl", "validate_rep", "EBChannel", "QuantumChannel", "GateCircuit",
    "Register", "compile_circuit", "MeasureResult", "__version__",
]
