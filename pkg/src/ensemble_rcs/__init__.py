"""Random circuits on M ensembles of N qubits in the symmetric (Dicke) subspace.

Modules
-------
core       Fock-space states, collective rotations and squeezing gates
circuits   random L-cycle circuits, exact dephasing, Porter-Thomas diagnostics
pathint    Feynman path-integral amplitudes, exhaustive and Monte Carlo
hardness   worst-case circuit, gap-function oracle, gate synthesis
cli        command-line experiment runner
"""

__version__ = "0.1.0"

from .core import (  # noqa: E402
    CapacityError,
    EnsembleDims,
    StateVector,
    make_initial_state,
    measurement_probabilities,
    rotation_matrix,
)
from .circuits import CircuitSpec, generate_random_circuit, run_circuit  # noqa: E402

__all__ = [
    "CapacityError",
    "CircuitSpec",
    "EnsembleDims",
    "StateVector",
    "generate_random_circuit",
    "make_initial_state",
    "measurement_probabilities",
    "rotation_matrix",
    "run_circuit",
]
