"""States, entropies and distances: a tour of the core toolbox.

Every operator carries its tensor-factor dimensions, so partial traces,
partial transposes and Schmidt decompositions are plain index bookkeeping.
"""

import numpy as np

from densecode import (
    basis_state,
    is_ppt,
    maximally_mixed,
    partial_trace,
    relative_entropy,
    schmidt,
    singlet,
    tensor_pure,
    trace_distance,
    von_neumann_entropy,
)
from densecode.capacity import werner_state

print("=== the singlet and its marginal ===")
bell = singlet().to_density()
print("H(singlet)          =", round(von_neumann_entropy(bell), 6), "bits (pure)")
marginal = partial_trace(bell, keep={1})
print("H(receiver side)    =", round(von_neumann_entropy(marginal), 6), "bits (I/2)")

print("\n=== distances ===")
zero = basis_state(2, 0).to_density()
one = basis_state(2, 1).to_density()
print("||  |0> - |1>  ||_1 =", round(trace_distance(zero, one), 6), "(orthogonal: 2)")
print("|| I/2 - |0>   ||_1 =", round(trace_distance(maximally_mixed((2,)), zero), 6))
print("D(singlet || I/4)   =", round(relative_entropy(bell, maximally_mixed((2, 2))), 6), "bits")

print("\n=== entanglement certificates ===")
verdict = is_ppt(bell, cut={0})
print("singlet partial transpose min eigenvalue:", round(verdict.min_eigenvalue, 6),
      "-> PPT:", verdict.ppt)
boundary = werner_state(0.5)
verdict = is_ppt(boundary, cut={0})
print("Werner boundary state min eigenvalue:    ", round(verdict.min_eigenvalue, 9),
      "-> PPT:", verdict.ppt)

print("\n=== Schmidt structure ===")
print("singlet coefficients:", np.round(schmidt(singlet(), cut={0}).coefficients, 6))
product = tensor_pure(basis_state(2, 0), basis_state(2, 1))
print("product coefficients:", np.round(schmidt(product, cut={0}).coefficients, 6))
