"""Closed-form performance predictions for difference-set layouts.

For a ``(P x Q, H, gamma)`` set the sampled array factor is exactly two
valued: ``gamma (PQ - 1) + H = H^2`` in the beam and ``H - gamma`` at every
other sample.  Everything here follows from those two numbers.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import geometry as geo
from .diffsets import to_excitations, validate
from .errors import ApertureTooSmall, InvalidDescriptors, NoVisibleSamples
from .geometry import BROADSIDE
from .metrics import RADIUS, MainlobeSpec
from .pattern import _dirichlet, node_images, node_weights
from .sequences import spectral_samples

DEFAULT_RULE = "default-rule"
USER = "user"
CALIBRATED = "calibrated"

MIN_MIDPOINT_APERTURE = 8


def _db(x):
    return 10.0 * math.log10(x) if x > 0 else -math.inf


def check_descriptors(P, Q, H, gamma):
    if P < 1 or Q < 1 or P * Q < 2:
        raise InvalidDescriptors(f"grid {P}x{Q} too small")
    if not 0 < H <= P * Q or gamma < 0:
        raise InvalidDescriptors(f"H={H}, gamma={gamma} out of range")
    if H * (H - 1) != gamma * (P * Q - 1):
        raise InvalidDescriptors(f"H(H-1) = {H * (H - 1)} differs from gamma(PQ-1) = {gamma * (P * Q - 1)}")


def _peak(P, Q, H, gamma):
    return gamma * (P * Q - 1) + H


@dataclass(frozen=True)
class ThetaBar:
    """Angular mainlobe radius used by the directivity and beamwidth bounds."""

    value: float
    provenance: str = USER

    def __post_init__(self):
        if not 0.0 < self.value < math.pi / 2:
            raise ValueError("theta_bar must lie in (0, pi/2)")
        if self.provenance not in (DEFAULT_RULE, USER, CALIBRATED):
            raise ValueError(f"unknown provenance {self.provenance!r}")

    @classmethod
    def default_rule(cls, P, Q, cell):
        """First-null angle of the equivalent uniform aperture of area P Q |nu|."""
        return cls(math.asin(min(1.0, 1.0 / math.sqrt(P * Q * abs(cell.nu)))), DEFAULT_RULE)

    @classmethod
    def calibrate(cls, P, Q, H, gamma, d_inf_db):
        """The value at which :func:`d_inf` returns ``d_inf_db``."""
        check_descriptors(P, Q, H, gamma)
        if gamma == 0:
            raise InvalidDescriptors("d_inf does not depend on theta_bar when gamma = 0")
        target = 10 ** (d_inf_db / 10)
        one_minus_cos = ((2 * _peak(P, Q, H, gamma) / target - H) / gamma + 1) / (P * Q)
        if not 0.0 < one_minus_cos < 1.0:
            raise ValueError(f"D_INF = {d_inf_db} dB is unreachable for theta_bar in (0, pi/2)")
        return cls(math.acos(1.0 - one_minus_cos), CALIBRATED)

    @classmethod
    def calibrate_bw(cls, P, Q, H, gamma, bw_sup_deg):
        """The value at which :func:`bw_sup` returns ``bw_sup_deg``."""
        d_lin = 4 * math.pi * (0.886 / math.radians(bw_sup_deg)) ** 2
        return cls.calibrate(P, Q, H, gamma, 10 * math.log10(d_lin))


@dataclass(frozen=True)
class SampleLevels:
    peak: float
    offpeak: float
    normalized_offpeak_db: float


@dataclass(frozen=True)
class SllBounds:
    sll_inf: float
    sll_sup: float
    mc_rhs: float


@dataclass(frozen=True)
class BoundsReport:
    sll_inf: float
    sll_sup: float
    d_inf: float
    bw_sup: float
    epsilon: float
    peak_level: float
    offpeak_level: float
    mc_rhs: float
    theta_bar: ThetaBar


def ds_sample_levels(P, Q, H, gamma, ep, cell, steer=BROADSIDE):
    """Beam and off-peak sample values; off-peak is reported before the element factor."""
    check_descriptors(P, Q, H, gamma)
    peak_af = _peak(P, Q, H, gamma)
    off = H - gamma
    peak = ep.power(steer.u0, steer.v0, strict=False) * peak_af
    return SampleLevels(float(peak), float(off), _db(off / peak_af))


def epsilon(ep, cell, P, Q, steer=BROADSIDE, exclude_axes=False):
    """Largest element power over visible off-beam samples, relative to the beam.

    ``exclude_axes`` restricts the search to samples with k*l != 0.
    """
    k, l = np.meshgrid(np.arange(P), np.arange(Q), indexing="ij")
    keep = (k * l != 0) if exclude_axes else ((k != 0) | (l != 0))
    u, v = geo.sample_uv(cell, P, Q, k[keep], l[keep], steer)
    vis = geo.is_visible(u, v)
    if not np.any(vis):
        raise NoVisibleSamples("no visible off-beam sample direction")
    ref = ep.power(steer.u0, steer.v0, strict=False)
    return float(np.max(ep.power(u[vis], v[vis], strict=False)) / ref)


def sll_bounds(P, Q, H, gamma, eps=1.0):
    """Lower and upper SLL bounds in dB plus the multiplicative factor of the upper one."""
    check_descriptors(P, Q, H, gamma)
    if eps <= 0:
        raise InvalidDescriptors("epsilon must be positive")
    base = eps * (H - gamma) / _peak(P, Q, H, gamma)
    mc = 0.5 + 1.5 * math.log10(P * Q)
    return SllBounds(_db(base), _db(base * mc), mc)


def _d_inf_linear(P, Q, H, gamma, theta_bar):
    check_descriptors(P, Q, H, gamma)
    tb = theta_bar.value if isinstance(theta_bar, ThetaBar) else float(theta_bar)
    den = gamma * (P * Q * (1 - math.cos(tb)) - 1) + H
    if den <= 0:
        raise InvalidDescriptors("non-positive directivity-bound denominator")
    return 2 * _peak(P, Q, H, gamma) / den


def d_inf(P, Q, H, gamma, theta_bar):
    """Directivity lower bound in dB."""
    return _db(_d_inf_linear(P, Q, H, gamma, theta_bar))


def bw_sup(P, Q, H, gamma, theta_bar):
    """Upper bound on the maximum half-power beamwidth, in degrees."""
    return math.degrees(0.886 * math.sqrt(4 * math.pi / _d_inf_linear(P, Q, H, gamma, theta_bar)))


def bounds_report(P, Q, H, gamma, ep, cell, steer=BROADSIDE, theta_bar=None, exclude_axes=False):
    theta_bar = theta_bar or ThetaBar.default_rule(P, Q, cell)
    eps = epsilon(ep, cell, P, Q, steer, exclude_axes)
    sb = sll_bounds(P, Q, H, gamma, eps)
    lv = ds_sample_levels(P, Q, H, gamma, ep, cell, steer)
    return BoundsReport(sb.sll_inf, sb.sll_sup, d_inf(P, Q, H, gamma, theta_bar),
                        bw_sup(P, Q, H, gamma, theta_bar), eps, lv.peak, lv.offpeak,
                        sb.mc_rhs, theta_bar)


def sll_midpoint_estimate(ds, shift, cell, ep, ml=MainlobeSpec(), steer=BROADSIDE):
    """SLL estimate (dB) from the pattern at the diagonal mid-points between samples.

    The beam sample is dropped from the interpolation sum and every
    off-beam sample carries amplitude sqrt(H - gamma) with the phase of the
    actual layout, so only the phases depend on the shift.
    """
    P, Q = ds.P, ds.Q
    if P < MIN_MIDPOINT_APERTURE or Q < MIN_MIDPOINT_APERTURE:
        raise ApertureTooSmall(f"{P}x{Q}: mid-point estimate needs P, Q >= {MIN_MIDPOINT_APERTURE}")
    H, gamma = validate(P, Q, ds.indices)
    sx, sy = shift
    eta = spectral_samples(to_excitations(ds, sx, sy)).eta
    coeff = np.exp(1j * eta)
    coeff[0, 0] = 0.0
    m = np.arange(P)
    n = np.arange(Q)
    A = _dirichlet(2 * np.pi * (m[:, None] + 0.5 - m[None, :]) / P, P)
    B = _dirichlet(2 * np.pi * (n[:, None] + 0.5 - n[None, :]) / Q, Q)
    field = A @ coeff @ B.T
    # mid-points are the odd nodes of the doubled grid
    images = node_images(cell, 2 * P, 2 * Q, steer)
    if ml.mode == RADIUS:
        inside = np.hypot(images.u - steer.u0, images.v - steer.v0) < ml.radius
        w = node_weights(images, ep, exclude=inside)[1::2, 1::2]
    else:
        w = node_weights(images, ep)[1::2, 1::2]
        w[ml.index_mask(P, Q, m[:, None] + 0.5, n[None, :] + 0.5)] = 0.0
    ref = ep.power(steer.u0, steer.v0, strict=False)
    level = (H - gamma) * np.max(w * np.abs(field) ** 2) / (ref * _peak(P, Q, H, gamma))
    return _db(level)
