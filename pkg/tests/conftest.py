"""Shared fixtures and independent dense-matrix oracles.

The oracles here deliberately avoid the package's statevector kernels: they
build full 2^n x 2^n operators with numpy.kron and plain matrix products, so
simulator results are checked against an independent computational path.
"""

import numpy as np
import pytest

from quatopt.circuits import CircuitTemplate, Entangler, GateSlot
from quatopt.gatealg import to_matrix

I2 = np.eye(2, dtype=complex)
PAULI = {
    "I": I2,
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}
CZ4 = np.diag([1.0, 1.0, 1.0, -1.0]).astype(complex)


def embed(op: np.ndarray, qubit: int, n: int) -> np.ndarray:
    """Single-qubit operator on the full register (qubit 0 = least significant)."""
    out = np.array([[1.0 + 0j]])
    for q in range(n - 1, -1, -1):
        out = np.kron(out, op if q == qubit else I2)
    return out


def embed_two(op4: np.ndarray, q_low: int, q_high: int, n: int) -> np.ndarray:
    """Two-qubit operator with q_low the low bit of the operator index."""
    dim = 2**n
    out = np.zeros((dim, dim), dtype=complex)
    for col in range(dim):
        b_low = (col >> q_low) & 1
        b_high = (col >> q_high) & 1
        rest = col & ~((1 << q_low) | (1 << q_high))
        col_op = (b_high << 1) | b_low
        for row_op in range(4):
            row = rest | ((row_op & 1) << q_low) | (((row_op >> 1) & 1) << q_high)
            out[row, col] += op4[row_op, col_op]
    return out


def dense_observable(obs, n: int) -> np.ndarray:
    out = obs.constant * np.eye(2**n, dtype=complex)
    for coeff, word in obs.terms:
        term = np.array([[1.0 + 0j]])
        for q in range(n - 1, -1, -1):
            term = np.kron(term, PAULI[word.letters[q]])
        out += coeff * term
    return out


def dense_template_unitary(template: CircuitTemplate, params: np.ndarray) -> np.ndarray:
    """Full circuit unitary assembled gate by gate with kron embeddings."""
    n = template.num_qubits
    u = np.eye(2**n, dtype=complex)
    for e in template.elements:
        if isinstance(e, GateSlot):
            u = embed(to_matrix(params[e.slot_id]), e.qubit, n) @ u
        else:
            u = embed_two(CZ4, e.a, e.b, n) @ u
    return u


def random_unit_rows(rng: np.random.Generator, count: int) -> np.ndarray:
    vecs = rng.standard_normal((count, 4))
    return vecs / np.linalg.norm(vecs, axis=1, keepdims=True)


@pytest.fixture
def single_slot_rig() -> CircuitTemplate:
    """One qubit, one slot, no entanglers: the minimal analysis testbed."""
    return CircuitTemplate("rig", 1, 1, [GateSlot(0, 0, 0)])


@pytest.fixture
def two_qubit_rig() -> CircuitTemplate:
    """Two qubits, two slots and one CZ."""
    return CircuitTemplate(
        "rig", 2, 1, [GateSlot(0, 0, 0), GateSlot(1, 1, 0), Entangler(0, 1)]
    )
