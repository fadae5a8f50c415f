"""Building two- and three-ensemble interactions from squeezing and rotations."""

from ensemble_rcs.core import EnsembleDims, apply_three_ensemble_R, apply_two_ensemble_T
from ensemble_rcs.hardness import sequence_error, synthesize_R_commutator, synthesize_T

# T is an exact product of commuting squeezes.
dims = EnsembleDims(2, 2)
gates = synthesize_T(0, 1, 0.7)
print("T(0.7) sequence:", [(g.kind, g.targets, round(g.param, 3)) for g in gates])
print(f"worst basis-state error: {sequence_error(gates, lambda s: apply_two_ensemble_T(s, 0, 1, 0.7), dims):.1e}")

# R only appears through a group commutator, so it is approximate and improves
# with the number of repetitions.
dims = EnsembleDims(1, 3)
chi = 0.3
print(f"\nR({chi}) from commutators")
for steps in (1, 3, 10, 30, 100, 300):
    seq = synthesize_R_commutator(0, 1, 2, chi, steps)
    err = sequence_error(seq, lambda s: apply_three_ensemble_R(s, 0, 1, 2, chi), dims)
    print(f"  steps={steps:<4d} gates={len(seq):<5d} error={err:.4f}")
