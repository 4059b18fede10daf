"""Quaternion algebra for attitude and frame computations.

Conventions
-----------
* Scalar-first component ordering (w, x, y, z); the rotation by an angle
  ``chi`` about the z axis is ``(cos(chi/2), 0, 0, sin(chi/2))``.
* Hamilton product, right-handed frames.
* A 3-vector ``v`` is embedded as the pure quaternion ``(0, v)`` at frame
  conversion boundaries; everywhere else plain numpy 3-vectors are used.
* ``rotate(q, v)`` returns the vector part of ``q v q*`` and maps body/path
  frame vectors into the navigation frame when ``q`` is the attitude.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateInput

__all__ = [
    "Quaternion",
    "mul",
    "conj",
    "normalize",
    "rotate",
    "axis_rotation_z",
    "axis_rotation_y",
]

# |q| may drift this far from 1 before rotate() renormalizes implicitly.
_UNIT_TOL = 1e-6


@dataclass(frozen=True, slots=True)
class Quaternion:
    """Immutable quaternion (w, x, y, z), scalar part first."""

    w: float
    x: float
    y: float
    z: float

    # -- constructors ------------------------------------------------------

    @staticmethod
    def identity() -> "Quaternion":
        return Quaternion(1.0, 0.0, 0.0, 0.0)

    @staticmethod
    def from_vector(v) -> "Quaternion":
        """Embed a 3-vector as a pure quaternion (w = 0 exactly)."""
        return Quaternion(0.0, float(v[0]), float(v[1]), float(v[2]))

    # -- algebra -----------------------------------------------------------

    def __mul__(self, other: "Quaternion") -> "Quaternion":
        a, b = self, other
        return Quaternion(
            a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z,
            a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y,
            a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x,
            a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w,
        )

    def __add__(self, other: "Quaternion") -> "Quaternion":
        return Quaternion(self.w + other.w, self.x + other.x,
                          self.y + other.y, self.z + other.z)

    def __sub__(self, other: "Quaternion") -> "Quaternion":
        return Quaternion(self.w - other.w, self.x - other.x,
                          self.y - other.y, self.z - other.z)

    def __neg__(self) -> "Quaternion":
        return Quaternion(-self.w, -self.x, -self.y, -self.z)

    def scaled(self, a: float) -> "Quaternion":
        return Quaternion(a * self.w, a * self.x, a * self.y, a * self.z)

    def conj(self) -> "Quaternion":
        return Quaternion(self.w, -self.x, -self.y, -self.z)

    def dot(self, other: "Quaternion") -> float:
        """4-dimensional inner product."""
        return (self.w * other.w + self.x * other.x
                + self.y * other.y + self.z * other.z)

    def norm_sq(self) -> float:
        return self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z

    def norm(self) -> float:
        return math.sqrt(self.norm_sq())

    def normalized(self) -> "Quaternion":
        n = self.norm()
        if n <= 1e-12:
            raise DegenerateInput("cannot normalize near-zero quaternion")
        return self.scaled(1.0 / n)

    # -- rotations ---------------------------------------------------------

    def rotate(self, v) -> np.ndarray:
        """Rotate a 3-vector: vector part of q v q*.

        Tolerates |q| drifting away from 1 (renormalizes through the
        |q|^2 division), so integrator output can be used directly.
        """
        n2 = self.norm_sq()
        if n2 <= 1e-12:
            raise DegenerateInput("cannot rotate with near-zero quaternion")
        p = self * Quaternion(0.0, float(v[0]), float(v[1]), float(v[2])) * self.conj()
        if abs(n2 - 1.0) > 1e-15:
            return np.array([p.x / n2, p.y / n2, p.z / n2])
        return np.array([p.x, p.y, p.z])

    @property
    def vector(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])

    def as_array(self) -> np.ndarray:
        return np.array([self.w, self.x, self.y, self.z])


def mul(a: Quaternion, b: Quaternion) -> Quaternion:
    """Hamilton product a*b."""
    return a * b


def conj(q: Quaternion) -> Quaternion:
    return q.conj()


def normalize(q: Quaternion) -> Quaternion:
    return q.normalized()


def rotate(q: Quaternion, v) -> np.ndarray:
    """Vector part of q v q*; q is renormalized if |q| has drifted."""
    if abs(q.norm_sq() - 1.0) > 2.0 * _UNIT_TOL:
        q = q.normalized()
    return q.rotate(v)


def axis_rotation_z(chi: float) -> Quaternion:
    """Unit quaternion for a rotation by chi about the z axis."""
    half = 0.5 * chi
    return Quaternion(math.cos(half), 0.0, 0.0, math.sin(half))


def axis_rotation_y(nu: float) -> Quaternion:
    """Unit quaternion for a rotation by nu about the y axis."""
    half = 0.5 * nu
    return Quaternion(math.cos(half), 0.0, math.sin(half), 0.0)
