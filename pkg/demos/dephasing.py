"""Collective dephasing flattens the output distribution toward uniform."""

import numpy as np

from ensemble_rcs.circuits import generate_random_circuit, iter_dephased_states, pt_ideal_sorted, sorted_probabilities
from ensemble_rcs.core import EnsembleDims

dims = EnsembleDims(99, 1)
spec = generate_random_circuit(dims, L=10, seed=0)
ranks = np.array([1, 2, 5, 10, 20, 50, 100])

print("sorted outcome probabilities after 10 cycles, by rank")
print("tau      " + "".join(f"{r:>9d}" for r in ranks))
print("ideal PT " + "".join(f"{v:9.4f}" for v in pt_ideal_sorted(dims.D, ranks)))
for tau in (0.0, 1e-3, 1e-2, 1e-1, 1.0, 10.0):
    *_, rho = iter_dephased_states(spec, tau)
    p = sorted_probabilities(np.clip(rho.diagonal(), 0, None))
    print(f"{tau:<9g}" + "".join(f"{p[r - 1]:9.4f}" for r in ranks) + f"   purity {rho.purity():.3f}")

# Strong dephasing leaves only the diagonal, and the random rotations then mix
# populations until every outcome is equally likely.
