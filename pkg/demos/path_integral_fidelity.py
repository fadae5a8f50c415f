"""Monte Carlo path sums lose fidelity once the circuit branches past the path budget."""

from ensemble_rcs.circuits import CircuitSpec, run_circuit
from ensemble_rcs.core import EnsembleDims
from ensemble_rcs.pathint import exact_amplitude_enumeration, fidelity_vs_cycles, flatten_circuit

dims = EnsembleDims(19, 1)
sequence = "XYZXZYZXYX"

# Each X or Y quarter turn lets a path branch into N+1 successors, while the
# squeezing and Z gates only add phases.  Counting two-sparse gates tells us
# how many paths exist.
flat = flatten_circuit(CircuitSpec.from_choices(dims, list(sequence)))
print(f"{flat.T} gates in total, {flat.G} of them branching; (N+1)^G = {flat.path_capacity():.3e}")

# With a tiny circuit the exhaustive sum reproduces the state vector exactly.
small = CircuitSpec.from_choices(dims, ["X"])
psi = run_circuit(small)
amp = exact_amplitude_enumeration(flatten_circuit(small), (7,))
print(f"amplitude <7|C|psi0>: path sum {amp:.6f}, state vector {psi.amp[7]:.6f}")

for P in (10**4, 10**5):
    print(f"\npath budget P = {P:.0e}")
    print("  L  G   (N+1)^G   fidelity")
    for row in fidelity_vs_cycles(dims, sequence, xi=None, P=P, seed=0):
        print(f"  {row.L:<2d} {row.G:<3d} {row.paths_capacity:9.2e}  {row.fidelity:.4f}")
