import numpy as np
import pytest

from densecode import pqg

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.diag([1.0, -1.0]).astype(complex)
CNOT = np.array(
    [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
)


@pytest.fixture(scope="session")
def pauli_gate():
    return pqg.control_gate(
        [np.eye(2, dtype=complex), PAULI_X, PAULI_X @ PAULI_Z, PAULI_Z]
    )


@pytest.fixture(scope="session")
def net_gates():
    """Calibrated qubit nets reused across modules (expensive to build)."""
    cache = {}

    def build(epsilon):
        if epsilon not in cache:
            cache[epsilon] = pqg.net_gate(epsilon, 2, seed=42)
        return cache[epsilon]

    return build
