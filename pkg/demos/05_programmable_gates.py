"""Programmable gates: programs, the orthogonality dichotomy, and nets.

A fixed unitary on data (x) program registers turns program states into
channels on the data.  Two programs implementing essentially different
unitaries must be orthogonal, which caps exact programmability at
dim(program register) unitaries; approximation nets get around this, and
superposition programs (acting as mixtures of nearby unitaries) make them
dramatically smaller than pure-atom coverings.
"""

import numpy as np

from densecode import (
    approximation_error,
    basis_state,
    control_gate,
    induced_map,
    net_gate,
    program_orthogonality_check,
)
from densecode.channels import random_unitary
from densecode.pqg import program_for_target, random_program_instance
from densecode.qmath import PureState

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)

print("=== a two-program gate ===")
gate = control_gate([I2, X])
print("program |1> implements X exactly:",
      approximation_error(gate, basis_state(2, 1), X).value)
plus = PureState((2,), np.array([1, 1], dtype=complex) / np.sqrt(2))
chan = induced_map(gate, plus)
print("program (|0>+|1>)/sqrt2 mixes the blocks instead:",
      len(chan.kraus), "Kraus operators (not a unitary)")

print("\n=== the orthogonality dichotomy ===")
verdict = program_orthogonality_check(gate, basis_state(2, 0), basis_state(2, 1))
print("distinct unitaries, orthogonal programs -> consistent:", verdict.consistent)
violations = 0
for seed in range(200):
    g, psi1, psi2 = random_program_instance(seed)
    if not program_orthogonality_check(g, psi1, psi2).consistent:
        violations += 1
print("randomized search over 200 program pairs: violations =", violations)

print("\n=== approximation nets for all qubit unitaries ===")
for eps in (0.5, 0.2):
    g, net = net_gate(eps, 2, seed=42, n_targets=40)
    print(f"requested {eps}: {len(net.elements)} atoms, "
          f"certificate {net.metadata['certificate_max_program_error']:.4f}, "
          f"single-atom covering ~{net.covering_radius:.3f}")
    target = random_unitary(2, seed=7)
    program, err = program_for_target(g, target, seed=8)
    support = int(np.sum(np.abs(program.amplitudes) > 1e-8))
    print(f"  random target reached at {err.value:.4f} "
          f"with a {support}-atom superposition program")
print("\nSuperposition programs beat the best single atom because the")
print("first-order errors of surrounding atoms cancel in the induced mixture.")
