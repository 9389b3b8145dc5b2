"""Exact algebra for two-level systems.

Rotations are carried internally as quaternion-like quadruples
(cos(angle/2), sin(angle/2) * axis) and materialized to 2x2 complex
matrices only where a trace or a density matrix is actually needed.
The correspondence used everywhere is

    U = cos(angle/2) * 1 - i sin(angle/2) * (sigma . axis)

so composing two rotors is ordinary quaternion multiplication.  Global
phase is irrelevant for every observable computed downstream (all of
them are traces against density matrices of echo loops), and is not
tracked beyond this convention.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
SIGMA_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
SIGMA_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
IDENTITY = np.eye(2, dtype=complex)

# |axis| may deviate from 1 by at most this much before being rejected.
AXIS_UNIT_TOL = 1e-6


def _checked_unit(vec, what: str) -> NDArray[np.float64]:
    v = np.asarray(vec, dtype=float)
    if v.shape != (3,):
        raise ValueError(f"{what} must be a 3-vector, got shape {v.shape}")
    norm = np.linalg.norm(v)
    if abs(norm - 1.0) > AXIS_UNIT_TOL:
        raise ValueError(f"{what} must be a unit vector (|v| = {norm:.9g})")
    return v / norm


def pauli_dot(vec) -> NDArray[np.complex128]:
    """sigma . vec for a real 3-vector (not necessarily unit)."""
    v = np.asarray(vec, dtype=float)
    return v[0] * SIGMA_X + v[1] * SIGMA_Y + v[2] * SIGMA_Z


@dataclass(frozen=True)
class Rotor:
    """Quaternion-like representation of an SU(2) element.

    ``w`` is cos(angle/2) and ``xyz`` is sin(angle/2) * axis.  Unit norm
    is an invariant of every constructor in this module.
    """

    w: float
    xyz: NDArray[np.float64]

    @classmethod
    def from_axis_angle(cls, axis, angle: float) -> "Rotor":
        axis = _checked_unit(axis, "rotation axis")
        half = 0.5 * float(angle)
        return cls(float(np.cos(half)), np.sin(half) * axis)

    def compose(self, other: "Rotor") -> "Rotor":
        """Rotor for the matrix product self @ other."""
        w = self.w * other.w - self.xyz @ other.xyz
        xyz = (
            self.w * other.xyz
            + other.w * self.xyz
            + np.cross(self.xyz, other.xyz)
        )
        return Rotor(float(w), xyz)

    def dagger(self) -> "Rotor":
        return Rotor(self.w, -self.xyz)

    def matrix(self) -> NDArray[np.complex128]:
        """Materialize the 2x2 unitary."""
        return self.w * IDENTITY - 1.0j * pauli_dot(self.xyz)


def unitary_from_axis_angle(axis, angle: float) -> NDArray[np.complex128]:
    """2x2 unitary for a rotation by ``angle`` (radians) about ``axis``.

    Equals exp(-i * angle/2 * sigma.axis).  The axis must be unit to
    within 1e-6; it is renormalized before use, larger deviations raise
    ValueError.
    """
    return Rotor.from_axis_angle(axis, angle).matrix()


def density_from_polarization(p: float, m_dir) -> NDArray[np.complex128]:
    """Spin-1/2 density matrix with Bloch vector p * m_dir.

    Args:
        p: degree of polarization, in [-1, 1].
        m_dir: unit 3-vector giving the polarization direction.

    Returns:
        Hermitian 2x2 matrix with trace 1 and eigenvalues (1 +- p)/2.
    """
    p = float(p)
    if abs(p) > 1.0 + 1e-12:
        raise ValueError(f"polarization degree must satisfy |p| <= 1, got {p}")
    m = _checked_unit(m_dir, "polarization direction")
    return 0.5 * IDENTITY + 0.5 * p * pauli_dot(m)


def trace_product(mats) -> complex:
    """Trace of the ordered product of 2x2 matrices.

    An empty sequence yields Tr(identity) = 2.
    """
    out = IDENTITY
    for m in mats:
        m = np.asarray(m, dtype=complex)
        if m.shape != (2, 2):
            raise ValueError(f"expected 2x2 matrices, got shape {m.shape}")
        out = out @ m
    return complex(np.trace(out))


def rotate_vector(vec, axis, angle: float) -> NDArray[np.float64]:
    """Rotate a real 3-vector by ``angle`` about a unit ``axis`` (Rodrigues)."""
    v = np.asarray(vec, dtype=float)
    n = _checked_unit(axis, "rotation axis")
    c, s = np.cos(angle), np.sin(angle)
    return v * c + np.cross(n, v) * s + n * (n @ v) * (1.0 - c)
