"""Quadratic-form matrices of sequential gate optimizers and their eigensolver.

The cost of a circuit, as a function of one slot's quaternion q, is the
quadratic form q^T S q with S a real-symmetric 4x4 matrix. S is assembled
from exactly ten circuit evaluations:

* type A: the slot replaced by the identity (element S_00);
* type B: the slot replaced by R_k(+-pi/2) for k = x, y, z (six values);
  sums give the remaining diagonal, differences the first row;
* type C: the slot replaced by the pi-rotations with axes along
  (1,1,0), (1,0,1), (0,1,1) (three values); these fix the remaining
  off-diagonal entries after subtracting half the diagonals.

Fixed-axis (2x2) and axis-only (3x3) matrices are contractions of S and are
built from 3 and 6 evaluations respectively.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .circuits import CircuitTemplate, EvalCounter, energy_with_replacement
from .gatealg import quaternion_for_axis, to_matrix

_SYM_TOL = 1e-10

AXIS_VECTORS = {
    "x": np.array([1.0, 0.0, 0.0]),
    "y": np.array([0.0, 1.0, 0.0]),
    "z": np.array([0.0, 0.0, 1.0]),
}

IDENTITY_GATE = np.eye(2, dtype=complex)

def _rotation_gate(psi: float, axis) -> np.ndarray:
    return to_matrix(quaternion_for_axis(psi, axis))


#: R_k(+pi/2) and R_k(-pi/2) for k = x, y, z, generated through the axis
#: convention of gatealg (key: (axis index, sign)).
TYPE_B_GATES = {
    (k, sign): _rotation_gate(sign * np.pi / 2, AXIS_VECTORS[name])
    for k, name in enumerate("xyz")
    for sign in (+1, -1)
}

_TYPE_C_PAIRS = ((0, 1), (0, 2), (1, 2))

#: pi-rotations about the diagonal axes (1,1,0), (1,0,1), (0,1,1) (normalized).
TYPE_C_GATES = {
    (k, m): _rotation_gate(
        np.pi, (AXIS_VECTORS["xyz"[k]] + AXIS_VECTORS["xyz"[m]]) / np.sqrt(2.0)
    )
    for k, m in _TYPE_C_PAIRS
}

FRAXIS_AXIS_GATES = tuple(
    _rotation_gate(np.pi, AXIS_VECTORS[name]) for name in "xyz"
)


@dataclass(frozen=True)
class EigPair:
    value: float
    vector: np.ndarray


def _require_symmetric(mat: np.ndarray) -> np.ndarray:
    mat = np.asarray(mat, dtype=float)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise ValueError("expected a square matrix")
    if np.max(np.abs(mat - mat.T)) > _SYM_TOL:
        raise ValueError("matrix is not symmetric within 1e-10")
    return 0.5 * (mat + mat.T)


def jacobi_eigensystem(
    mat: np.ndarray, off_tol: float = 1e-13, max_sweeps: int = 100
) -> tuple[np.ndarray, np.ndarray]:
    """Cyclic Jacobi diagonalization of a small symmetric matrix.

    Returns (values, vectors) in the solver's natural index order (no
    sorting); vectors are the columns. Sweeps stop once the off-diagonal
    Frobenius norm drops below ``off_tol``.
    """
    a = _require_symmetric(mat).copy()
    p = a.shape[0]
    v = np.eye(p)
    for _ in range(max_sweeps):
        off = np.sqrt(np.sum(np.tril(a, -1) ** 2) * 2.0)
        if off < off_tol:
            break
        for i in range(p - 1):
            for j in range(i + 1, p):
                if a[i, j] == 0.0:
                    continue
                theta = (a[j, j] - a[i, i]) / (2.0 * a[i, j])
                t = np.sign(theta) / (abs(theta) + np.hypot(theta, 1.0))
                if theta == 0.0:
                    t = 1.0
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                rot = np.eye(p)
                rot[i, i] = rot[j, j] = c
                rot[i, j] = s
                rot[j, i] = -s
                a = rot.T @ a @ rot
                v = v @ rot
    return np.diagonal(a).copy(), v


def min_eigenpair(mat: np.ndarray, degeneracy_tol: float = 1e-10) -> EigPair:
    """Smallest eigenvalue with a deterministically chosen unit eigenvector.

    Among eigenvalues within ``degeneracy_tol`` of the minimum the pair with
    the lowest solver index wins; the sign is fixed so that the first
    component larger than 1e-12 in magnitude is positive.
    """
    values, vectors = jacobi_eigensystem(mat)
    lam_min = values.min()
    idx = int(np.nonzero(values <= lam_min + degeneracy_tol)[0][0])
    vec = vectors[:, idx].copy()
    vec /= np.linalg.norm(vec)
    for comp in vec:
        if abs(comp) > 1e-12:
            if comp < 0:
                vec = -vec
            break
    return EigPair(float(values[idx]), vec)


def centered(mat: np.ndarray) -> np.ndarray:
    """Subtract the eigenvalue mean: S - (tr S / p) I."""
    mat = _require_symmetric(mat)
    p = mat.shape[0]
    return mat - (np.trace(mat) / p) * np.eye(p)


def spectral_radius(mat: np.ndarray) -> float:
    """Largest eigenvalue magnitude (callers pass the centered matrix)."""
    values, _ = jacobi_eigensystem(mat)
    return float(np.max(np.abs(values)))


def nft_contraction(s_full: np.ndarray, axis) -> np.ndarray:
    """Analytic 2x2 contraction of the full 4x4 matrix onto a rotation axis."""
    s_full = _require_symmetric(s_full)
    if s_full.shape != (4, 4):
        raise ValueError("contraction expects the full 4x4 matrix")
    m = np.asarray(axis, dtype=float)
    b = float(s_full[0, 1:] @ m)
    return np.array([[s_full[0, 0], b], [b, float(m @ s_full[1:, 1:] @ m)]])


def nft_matrix_from_energies(e_id: float, e_plus: float, e_minus: float) -> np.ndarray:
    """2x2 matrix from the identity and R_axis(+-pi/2) evaluations."""
    b = 0.5 * (e_plus - e_minus)
    return np.array([[e_id, b], [b, e_plus + e_minus - e_id]])


def build_fqs_matrix(
    template: CircuitTemplate, params, slot_id: int, cost, counter: EvalCounter
) -> np.ndarray:
    """Full 4x4 quadratic-form matrix of one slot from ten evaluations."""
    prefix = template.prefix_amplitudes(params, slot_id)

    def ew(gate):
        return energy_with_replacement(
            template, params, slot_id, gate, cost, counter, prefix=prefix
        )

    e_id = ew(IDENTITY_GATE)
    e_b = {key: ew(gate) for key, gate in TYPE_B_GATES.items()}
    e_c = {key: ew(gate) for key, gate in TYPE_C_GATES.items()}

    s = np.zeros((4, 4))
    s[0, 0] = e_id
    for k in range(3):
        s[k + 1, k + 1] = e_b[(k, +1)] + e_b[(k, -1)] - e_id
        s[0, k + 1] = s[k + 1, 0] = 0.5 * (e_b[(k, +1)] - e_b[(k, -1)])
    for k, m in _TYPE_C_PAIRS:
        val = e_c[(k, m)] - 0.5 * (s[k + 1, k + 1] + s[m + 1, m + 1])
        s[k + 1, m + 1] = s[m + 1, k + 1] = val
    return s


def build_fraxis_matrix(
    template: CircuitTemplate, params, slot_id: int, cost, counter: EvalCounter
) -> np.ndarray:
    """Axis-only 3x3 matrix (pi-rotation gates) from six evaluations.

    Equals the lower-right 3x3 block of the full matrix on the same
    configuration.
    """
    prefix = template.prefix_amplitudes(params, slot_id)

    def ew(gate):
        return energy_with_replacement(
            template, params, slot_id, gate, cost, counter, prefix=prefix
        )

    s = np.zeros((3, 3))
    for k in range(3):
        s[k, k] = ew(FRAXIS_AXIS_GATES[k])
    for k, m in _TYPE_C_PAIRS:
        val = ew(TYPE_C_GATES[(k, m)]) - 0.5 * (s[k, k] + s[m, m])
        s[k, m] = s[m, k] = val
    return s


def build_nft_matrix(
    template: CircuitTemplate, params, slot_id: int, axis, cost, counter: EvalCounter
) -> np.ndarray:
    """Fixed-axis 2x2 matrix from three evaluations (identity and +-pi/2)."""
    m = np.asarray(axis, dtype=float)
    if abs(np.linalg.norm(m) - 1.0) > 1e-8:
        raise ValueError("rotation axis must be a unit vector")
    prefix = template.prefix_amplitudes(params, slot_id)

    def ew(gate):
        return energy_with_replacement(
            template, params, slot_id, gate, cost, counter, prefix=prefix
        )

    e_id = ew(IDENTITY_GATE)
    e_plus = ew(to_matrix(quaternion_for_axis(np.pi / 2, m)))
    e_minus = ew(to_matrix(quaternion_for_axis(-np.pi / 2, m)))
    return nft_matrix_from_energies(e_id, e_plus, e_minus)
