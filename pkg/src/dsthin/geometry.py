"""Lattice algebra and direction transforms.

All lengths are in wavelengths, so the wavenumber reduces to 2*pi and the
wavelength never appears explicitly.  Functions accept scalars or numpy
arrays for the direction arguments and broadcast.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateLattice

NU_TOL = 1e-9
VISIBLE_TOL = 1e-12


@dataclass(frozen=True)
class UnitCell:
    d1x: float
    d1y: float
    d2x: float
    d2y: float
    nu: float = field(init=False)

    def __post_init__(self):
        nu = self.d1x * self.d2y - self.d2x * self.d1y
        if abs(nu) <= NU_TOL:
            raise DegenerateLattice(f"lattice determinant {nu:g} is (near) zero")
        object.__setattr__(self, "nu", nu)

    @property
    def d1(self):
        return np.array([self.d1x, self.d1y])

    @property
    def d2(self):
        return np.array([self.d2x, self.d2y])

    def scaled(self, s):
        return UnitCell(s * self.d1x, s * self.d1y, s * self.d2x, s * self.d2y)

    def as_tuple(self):
        return (self.d1x, self.d1y, self.d2x, self.d2y)


@dataclass(frozen=True)
class Steering:
    u0: float = 0.0
    v0: float = 0.0

    def __post_init__(self):
        if self.u0 ** 2 + self.v0 ** 2 > 1.0 + VISIBLE_TOL:
            raise ValueError("steering direction lies outside the visible region")

    @classmethod
    def from_angles(cls, theta0, phi0, degrees=True):
        if degrees:
            theta0, phi0 = math.radians(theta0), math.radians(phi0)
        return cls(math.sin(theta0) * math.cos(phi0), math.sin(theta0) * math.sin(phi0))


BROADSIDE = Steering(0.0, 0.0)


@dataclass(frozen=True)
class Direction:
    u: float
    v: float
    visible: bool = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "visible", is_visible(self.u, self.v))

    def as_tuple(self):
        return (self.u, self.v)


def is_visible(u, v):
    r2 = np.asarray(u) ** 2 + np.asarray(v) ** 2
    out = r2 <= 1.0 + VISIBLE_TOL
    return bool(out) if out.ndim == 0 else out


def make_unit_cell(d1x, d1y, d2x, d2y):
    """Build a unit cell; raises DegenerateLattice when the axes are parallel."""
    return UnitCell(float(d1x), float(d1y), float(d2x), float(d2y))


def chi_psi_to_uv(cell, chi, psi, steer=BROADSIDE):
    """Inverse of :func:`chi_psi`: lattice phases to direction cosines."""
    chi = np.asarray(chi, dtype=float)
    psi = np.asarray(psi, dtype=float)
    two_pi_nu = 2.0 * np.pi * cell.nu
    u = steer.u0 + (cell.d2y * chi - cell.d1y * psi) / two_pi_nu
    v = steer.v0 + (cell.d1x * psi - cell.d2x * chi) / two_pi_nu
    return u, v


def _fractional_uv(cell, P, Q, k, l, steer):
    k = np.asarray(k, dtype=float)
    l = np.asarray(l, dtype=float)
    denom = P * Q * cell.nu
    u = steer.u0 + (k * Q * cell.d2y - l * P * cell.d1y) / denom
    v = steer.v0 + (l * P * cell.d1x - k * Q * cell.d2x) / denom
    return u, v


def sample_uv(cell, P, Q, k, l, steer=BROADSIDE):
    """Vectorised sample directions; k and l may be arrays (or non-integers)."""
    return _fractional_uv(cell, P, Q, k, l, steer)


def sample_direction(cell, P, Q, k, l, steer=BROADSIDE):
    if not (0 <= k < P and 0 <= l < Q):
        raise ValueError(f"sample index ({k}, {l}) outside [0,{P})x[0,{Q})")
    u, v = _fractional_uv(cell, P, Q, k, l, steer)
    return Direction(float(u), float(v))


def mid_direction(cell, P, Q, m, n, steer=BROADSIDE):
    """Direction half-way (diagonally) between samples (m, n) and (m+1, n+1)."""
    if not (0 <= m < P and 0 <= n < Q):
        raise ValueError(f"mid-point index ({m}, {n}) outside [0,{P})x[0,{Q})")
    u, v = _fractional_uv(cell, P, Q, m + 0.5, n + 0.5, steer)
    return Direction(float(u), float(v))


def chi_psi(cell, u, v, steer=BROADSIDE):
    du = np.asarray(u, dtype=float) - steer.u0
    dv = np.asarray(v, dtype=float) - steer.v0
    chi = 2.0 * np.pi * (cell.d1x * du + cell.d1y * dv)
    psi = 2.0 * np.pi * (cell.d2x * du + cell.d2y * dv)
    if chi.ndim == 0:
        return float(chi), float(psi)
    return chi, psi


def grating_lobe_uv(cell, b, c, steer=BROADSIDE):
    b = np.asarray(b, dtype=float)
    c = np.asarray(c, dtype=float)
    u = steer.u0 + (cell.d2y * b - cell.d1y * c) / cell.nu
    v = steer.v0 + (cell.d1x * c - cell.d2x * b) / cell.nu
    return u, v


def grating_lobes(cell, steer=BROADSIDE, max_order=1):
    """Every lattice replica of the main beam for orders up to ``max_order``.

    Axial orders (b or c zero) are included.  Returns ``(Direction, b, c)``
    tuples in row-major (b, c) order.
    """
    if max_order < 1:
        raise ValueError("max_order must be >= 1")
    out = []
    for b in range(-max_order, max_order + 1):
        for c in range(-max_order, max_order + 1):
            if b == 0 and c == 0:
                continue
            u, v = grating_lobe_uv(cell, b, c, steer)
            out.append((Direction(float(u), float(v)), b, c))
    return out


def is_gl_free(cell, steer=BROADSIDE):
    """True when no first-order grating lobe enters the closed visible disc."""
    for b in (-1, 0, 1):
        for c in (-1, 0, 1):
            if b == 0 and c == 0:
                continue
            u, v = grating_lobe_uv(cell, b, c, steer)
            if math.hypot(float(u), float(v)) <= 1.0:
                return False
    return True
