"""Outcome entropy of random ensemble circuits approaching the Porter-Thomas value."""

import math

import numpy as np

from ensemble_rcs.circuits import entropy_sweep, generate_random_circuit, pt_distance, pt_entropy, run_circuit
from ensemble_rcs.core import EnsembleDims, measurement_probabilities

# One ensemble of 99 qubits has a 100-dimensional symmetric subspace, the same
# dimension as two ensembles of 9 qubits.  Both should forget their starting
# point after a handful of cycles.
target = pt_entropy(100)
print(f"Porter-Thomas entropy for D=100: {target:.4f} nats (uniform would be {math.log(100):.4f})")

for N, M in [(99, 1), (9, 2)]:
    sweep = entropy_sweep(EnsembleDims(N, M), xi=None, tau=0.0, L_max=12, n_circuits=10, seed=0)
    print(f"\nN={N}, M={M}: mean entropy over {len(sweep.seeds)} circuits")
    for L, mean, std in sweep.rows():
        bar = "#" * int(40 * mean / math.log(100))
        print(f"  L={L:2d}  {mean:.4f} +- {std:.4f}  {bar}")

# A single deep circuit: D * p_k should look like draws from a unit exponential.
p = measurement_probabilities(run_circuit(generate_random_circuit(EnsembleDims(99, 1), 10, seed=0)))
scaled = np.sort(100 * p)[::-1]
print("\nlargest ten values of D*p:", np.round(scaled[:10], 3))
print(f"KS distance to Exp(1): {pt_distance(p):.3f}")
