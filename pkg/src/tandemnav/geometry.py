"""Small 3D vector type and angle helpers shared by every module.

Positions are in meters, velocities in m/s, forces in virtual newtons.
Ground-plane operations use the XY projection of a vector.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

_NORM_EPS = 1e-9


@dataclass(frozen=True, slots=True)
class Vec3:
    """Immutable 3-vector. Components must be finite; NaN/Inf are rejected."""

    x: float
    y: float
    z: float = 0.0

    def __post_init__(self) -> None:
        if not (math.isfinite(self.x) and math.isfinite(self.y) and math.isfinite(self.z)):
            raise ValueError(f"non-finite vector component: ({self.x}, {self.y}, {self.z})")

    def __add__(self, other: "Vec3") -> "Vec3":
        return Vec3(self.x + other.x, self.y + other.y, self.z + other.z)

    def __sub__(self, other: "Vec3") -> "Vec3":
        return Vec3(self.x - other.x, self.y - other.y, self.z - other.z)

    def __mul__(self, s: float) -> "Vec3":
        return Vec3(self.x * s, self.y * s, self.z * s)

    __rmul__ = __mul__

    def __neg__(self) -> "Vec3":
        return Vec3(-self.x, -self.y, -self.z)

    def dot(self, other: "Vec3") -> float:
        return self.x * other.x + self.y * other.y + self.z * other.z

    def norm(self) -> float:
        return math.sqrt(self.x * self.x + self.y * self.y + self.z * self.z)

    def norm_xy(self) -> float:
        return math.hypot(self.x, self.y)

    def normalized(self) -> "Vec3":
        n = self.norm()
        if n <= _NORM_EPS:
            raise ValueError(f"cannot normalize near-zero vector (norm={n:g})")
        return Vec3(self.x / n, self.y / n, self.z / n)

    def xy(self) -> "Vec3":
        """Ground-plane projection (z dropped to 0)."""
        return Vec3(self.x, self.y, 0.0)

    def with_z(self, z: float) -> "Vec3":
        return Vec3(self.x, self.y, z)

    def distance_to(self, other: "Vec3") -> float:
        return (self - other).norm()

    def distance_xy(self, other: "Vec3") -> float:
        return math.hypot(self.x - other.x, self.y - other.y)

    def clipped(self, max_norm: float) -> "Vec3":
        """Scale down to `max_norm` if longer; direction preserved."""
        n = self.norm()
        if n > max_norm and n > 0.0:
            return self * (max_norm / n)
        return self

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.x, self.y, self.z)


ZERO = Vec3(0.0, 0.0, 0.0)


def wrap_angle(theta: float) -> float:
    """Wrap an angle to (-pi, pi]."""
    r = theta % (2.0 * math.pi)
    if r > math.pi:
        r -= 2.0 * math.pi
    return r


def left_perp_xy(v: Vec3) -> Vec3:
    """90-degree counterclockwise rotation of the XY projection."""
    return Vec3(-v.y, v.x, 0.0)
