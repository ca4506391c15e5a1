"""Quaternion algebra for general single-qubit gates.

A gate ``R_n(psi) = cos(psi/2) I - i sin(psi/2) n . sigma`` is identified
with the unit 4-vector ``q = (cos(psi/2), sin(psi/2) n)`` through the basis
``(I, -iX, -iY, -iZ)``, so that ``R(q) = sum_mu q_mu varsigma_mu``.

Axis convention: the rotation axis in polar form is
``n(theta, phi) = (cos theta, sin theta cos phi, sin theta sin phi)`` with
the zenith measured from the x axis. All axis-to-quaternion conversions in
the package go through this module so the convention lives in one place.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_I2 = np.eye(2, dtype=complex)
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
_Z = np.array([[1, 0], [0, -1]], dtype=complex)

#: Extended Pauli basis (I, -iX, -iY, -iZ) of the quaternion representation.
VARSIGMA = (_I2, -1j * _X, -1j * _Y, -1j * _Z)

SQRT_X = 0.5 * np.array([[1 + 1j, 1 - 1j], [1 - 1j, 1 + 1j]])

_POLE_TOL = 1e-10


def varsigma(mu: int) -> np.ndarray:
    """mu-th element of the extended Pauli basis, mu in 0..3."""
    if mu not in (0, 1, 2, 3):
        raise ValueError(f"varsigma index {mu} out of range")
    return VARSIGMA[mu].copy()


def rz_matrix(angle: float) -> np.ndarray:
    return np.array(
        [[np.exp(-0.5j * angle), 0], [0, np.exp(0.5j * angle)]], dtype=complex
    )


@dataclass(frozen=True, eq=False)
class Quaternion:
    """Unit 4-vector identifying a single-qubit gate (renormalized on construction)."""

    q: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.q, dtype=float).reshape(4).copy()
        nrm = np.linalg.norm(arr)
        if nrm < 1e-8:
            raise ValueError("quaternion norm too small to normalize")
        arr /= nrm
        arr.flags.writeable = False
        object.__setattr__(self, "q", arr)

    def as_array(self) -> np.ndarray:
        return self.q.copy()

    def __iter__(self):
        return iter(self.q)


@dataclass(frozen=True)
class AxisAngle:
    """Rotation angle psi with polar axis angles (theta = zenith from x, phi = azimuth)."""

    psi: float
    theta: float = 0.0
    phi: float = 0.0


def axis_vector(theta: float, phi: float) -> np.ndarray:
    """Unit rotation axis for the polar angles of the project convention."""
    return np.array(
        [np.cos(theta), np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi)]
    )


def polar_angles(axis) -> tuple[float, float]:
    """Inverse of :func:`axis_vector` for a unit 3-vector."""
    ax = np.asarray(axis, dtype=float)
    nrm = np.linalg.norm(ax)
    if abs(nrm - 1.0) > 1e-8:
        raise ValueError("rotation axis must be a unit vector")
    theta = float(np.arccos(np.clip(ax[0] / nrm, -1.0, 1.0)))
    phi = float(np.arctan2(ax[2], ax[1]))
    return theta, phi


def from_axis_angle(angles: AxisAngle) -> Quaternion:
    """Quaternion (cos(psi/2), sin(psi/2) n(theta, phi))."""
    half = 0.5 * angles.psi
    s = np.sin(half)
    return Quaternion(
        np.array(
            [
                np.cos(half),
                s * np.cos(angles.theta),
                s * np.sin(angles.theta) * np.cos(angles.phi),
                s * np.sin(angles.theta) * np.sin(angles.phi),
            ]
        )
    )


def quaternion_for_axis(psi: float, axis) -> Quaternion:
    """Quaternion of R_axis(psi); goes through the polar convention."""
    theta, phi = polar_angles(axis)
    return from_axis_angle(AxisAngle(psi, theta, phi))


def to_matrix(q) -> np.ndarray:
    """SU(2) matrix sum_mu q_mu varsigma_mu of a unit quaternion."""
    arr = q.q if isinstance(q, Quaternion) else np.asarray(q, dtype=float).reshape(4)
    return np.array(
        [
            [arr[0] - 1j * arr[3], -arr[2] - 1j * arr[1]],
            [arr[2] - 1j * arr[1], arr[0] + 1j * arr[3]],
        ]
    )


def zxz_matrix(phi: float, theta: float, lam: float) -> np.ndarray:
    """Rz(phi) sqrt(X) Rz(theta) sqrt(X) Rz(lam)."""
    return rz_matrix(phi) @ SQRT_X @ rz_matrix(theta) @ SQRT_X @ rz_matrix(lam)


def zxz_decompose(q) -> tuple[float, float, float]:
    """Euler angles (phi, theta, lam) with R(q) = Rz(phi) sqrt(X) Rz(theta) sqrt(X) Rz(lam)
    up to a global phase.

    The middle factor satisfies sqrt(X) Rz(theta) sqrt(X) =
    [[sin(theta/2), cos(theta/2)], [cos(theta/2), -sin(theta/2)]], so theta is read
    off the moduli of the first row and the outer angles from relative phases of
    single matrix-element products (no half-angle branch ambiguity). At the
    poles (theta = 0 or pi) lam is fixed to 0 and the free angle folded into phi.
    """
    t = to_matrix(q)
    s, c = abs(t[0, 0]), abs(t[0, 1])
    theta = 2.0 * float(np.arctan2(s, c))
    if s < _POLE_TOL:
        return float(np.angle(t[1, 0] * np.conj(t[0, 1]))), theta, 0.0
    if c < _POLE_TOL:
        return float(np.angle(-t[1, 1] * np.conj(t[0, 0]))), theta, 0.0
    phi = float(np.angle(t[1, 0] * np.conj(t[0, 0])))
    lam = float(np.angle(-t[1, 1] * np.conj(t[1, 0])))
    return phi, theta, lam


def random_quaternion(rng: np.random.Generator) -> Quaternion:
    """Uniform draw on the 3-sphere; induces the Haar measure on SU(2) up to phase."""
    while True:
        vec = rng.standard_normal(4)
        if np.linalg.norm(vec) > 1e-8:
            return Quaternion(vec)
