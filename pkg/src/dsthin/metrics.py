"""Numerically measured figures of merit: SLL, directivity, beamwidth and
the pattern value along a given direction.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import geometry as geo
from .errors import BeamNotResolved, EmptySidelobeRegion, InvisibleDirection
from .geometry import BROADSIDE, Direction
from .pattern import (
    ElementPattern,
    NodeImages,
    af_fft,
    array_factor,
    node_images,
    node_weights,
    power_pattern,
)

CROSS = "cross"
CELL = "cell"
RADIUS = "radius"

DEFAULT_QUAD = (512, 1024)

_MODE_ALIASES = {"chi-psi-cell": CELL, "custom-radius": RADIUS}


@dataclass(frozen=True)
class MainlobeSpec:
    """Region excluded from the sidelobe search.

    ``cross``: lattice phases within ``cell_radius`` sample spacings of the
    beam along *either* axis (periodic), i.e. the two axis bands where the
    main-beam kernel dominates.  ``cell``: both phases within the radius
    (a periodic rectangle).  ``radius``: a disc of ``radius`` in (u, v)
    around the steering direction.
    """

    mode: str = CROSS
    cell_radius: float = 1.0
    radius: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "mode", _MODE_ALIASES.get(self.mode, self.mode))
        if self.mode not in (CROSS, CELL, RADIUS):
            raise ValueError(f"unknown mainlobe mode {self.mode!r}")
        if self.mode == RADIUS:
            if self.radius is None or self.radius <= 0:
                raise ValueError("radius mode needs a positive radius")
        elif self.cell_radius <= 0:
            raise ValueError("cell_radius must be > 0")

    def node_mask(self, P, Q, oversample):
        """Mainlobe membership of the ``(O P) x (O Q)`` phase-grid nodes (cross/cell modes)."""
        NP, NQ = oversample * P, oversample * Q
        k = np.arange(NP)
        l = np.arange(NQ)
        # circular distance in units of one sample spacing
        dk = np.minimum(k, NP - k) / oversample
        dl = np.minimum(l, NQ - l) / oversample
        in_k = (dk < self.cell_radius)[:, None]
        in_l = (dl < self.cell_radius)[None, :]
        return (in_k | in_l) if self.mode == CROSS else (in_k & in_l)

    def index_mask(self, P, Q, m, n):
        """Membership of fractional sample indices (e.g. mid-points m + 1/2)."""
        m = np.asarray(m, dtype=float)
        n = np.asarray(n, dtype=float)
        dm = np.abs((m + P / 2) % P - P / 2)
        dn = np.abs((n + Q / 2) % Q - Q / 2)
        if self.mode == CROSS:
            return (dm < self.cell_radius) | (dn < self.cell_radius)
        if self.mode == CELL:
            return (dm < self.cell_radius) & (dn < self.cell_radius)
        raise ValueError("index_mask is defined for cross/cell modes only")


@dataclass
class MetricsReport:
    sll: float
    directivity: float
    bw_max: float
    pattern_at: list = field(default_factory=list)


def _db(x):
    return 10.0 * math.log10(x) if x > 0 else -math.inf


def sidelobe_weights(images, ep, ml, steer, P, Q, oversample):
    """Per-node element weight restricted to visible sidelobe-region images."""
    if ml.mode == RADIUS:
        inside = np.hypot(images.u - steer.u0, images.v - steer.v0) < ml.radius
        return node_weights(images, ep, exclude=inside)
    w = node_weights(images, ep)
    w[ml.node_mask(P, Q, oversample)] = 0.0
    return w


# least-squares fit of a + b x + c y + d x^2 + e x y + f y^2 on the 3x3 stencil
_STENCIL = np.array([(x, y) for x in (-1, 0, 1) for y in (-1, 0, 1)], dtype=float)
_DESIGN = np.column_stack([np.ones(9), _STENCIL[:, 0], _STENCIL[:, 1],
                           _STENCIL[:, 0] ** 2, _STENCIL[:, 0] * _STENCIL[:, 1], _STENCIL[:, 1] ** 2])
_PINV = np.linalg.pinv(_DESIGN)


def _refine(af, k, l):
    NP, NQ = af.shape
    patch = np.array([af[(k + x) % NP, (l + y) % NQ] for x in (-1, 0, 1) for y in (-1, 0, 1)])
    a, b, c, d, e, f = _PINV @ patch
    hess = np.array([[2 * d, e], [e, 2 * f]])
    det = np.linalg.det(hess)
    if not (hess[0, 0] < 0 and det > 0):
        return af[k, l]
    x, y = np.linalg.solve(hess, [-b, -c])
    if abs(x) > 1 or abs(y) > 1:
        return af[k, l]
    val = a + b * x + c * y + d * x * x + e * x * y + f * y * y
    return max(val, af[k, l])


def sll_from_af(af, weight, ref_value, n_candidates=8, flat_ok=False):
    """SLL in dB from node array factor and per-node sidelobe weights."""
    if ref_value <= 0:
        raise EmptySidelobeRegion("zero reference (beam) power")
    top = af.max()
    if top - af.min() <= 1e-9 * top:
        if flat_ok:
            return 0.0
        raise EmptySidelobeRegion("flat pattern: no sidelobes exist")
    score = af * weight
    if not np.any(weight > 0):
        raise EmptySidelobeRegion("no visible direction outside the mainlobe region")
    flat = score.ravel()
    n = min(n_candidates, flat.size)
    idx = np.argpartition(flat, -n)[-n:]
    NQ = af.shape[1]
    best = 0.0
    for i in idx:
        k, l = divmod(int(i), NQ)
        if weight[k, l] <= 0:
            continue
        best = max(best, _refine(af, k, l) * weight[k, l])
    return _db(best / ref_value)


def sll(pg, ml=MainlobeSpec(), ep=None, flat_ok=False):
    """Sidelobe level (dB) of an FFT pattern grid, normalised by the beam value P(u0, v0)."""
    ep = ep or ElementPattern.isotropic()
    images = NodeImages(pg.af.shape, pg.u, pg.v, pg.node_k, pg.node_l, pg.visible)
    w = sidelobe_weights(images, ep, ml, pg.steer, pg.P, pg.Q, pg.oversample)
    return sll_from_af(pg.af, w, pg.ref_value, flat_ok=flat_ok)


class SllEvaluator:
    """Reusable SLL evaluation for many grids sharing cell, element and size."""

    def __init__(self, P, Q, cell, ep, steer=BROADSIDE, ml=MainlobeSpec(), oversample=16):
        self.P, self.Q, self.oversample = P, Q, oversample
        self.ep, self.steer = ep, steer
        images = node_images(cell, oversample * P, oversample * Q, steer)
        self.weight = sidelobe_weights(images, ep, ml, steer, P, Q, oversample)
        self.beam_el = ep.power(steer.u0, steer.v0, strict=False)

    def __call__(self, grid, flat_ok=False):
        af = af_fft(grid.weights, self.oversample)
        return sll_from_af(af, self.weight, af[0, 0] * self.beam_el, flat_ok=flat_ok)


class DirectivityKernel:
    """Hemisphere integrals of the element power against every lattice lag.

    ``K[dp, dq] = sum_i w_i P_el(u_i, v_i) exp(j(dp chi_i + dq psi_i))`` on a
    midpoint (theta, phi) rule, so that the radiated power of any excitation
    is ``Re sum r[dp, dq] K[dp, dq]`` with ``r`` its linear autocorrelation.
    """

    def __init__(self, cell, P, Q, ep, steer=BROADSIDE, quad=DEFAULT_QUAD, chunk=16384):
        n_theta, n_phi = quad
        self.P, self.Q, self.quad = P, Q, quad
        th = (np.arange(n_theta) + 0.5) * (np.pi / 2) / n_theta
        ph = (np.arange(n_phi) + 0.5) * (2 * np.pi) / n_phi
        dA = (np.pi / 2 / n_theta) * (2 * np.pi / n_phi)
        tt, pp = np.meshgrid(th, ph, indexing="ij")
        u = (np.sin(tt) * np.cos(pp)).ravel()
        v = (np.sin(tt) * np.sin(pp)).ravel()
        wts = (np.sin(tt).ravel() * dA) * ep.power(u, v, strict=False)
        chi, psi = geo.chi_psi(cell, u, v, steer)
        lp = np.arange(-(P - 1), P)
        lq = np.arange(-(Q - 1), Q)
        K = np.zeros((lp.size, lq.size), dtype=complex)
        for s in range(0, u.size, chunk):
            sl = slice(s, s + chunk)
            ep_ = np.exp(1j * np.outer(chi[sl], lp)) * wts[sl, None]
            eq_ = np.exp(1j * np.outer(psi[sl], lq))
            K += ep_.T @ eq_
        self.K = K
        self.beam_el = ep.power(steer.u0, steer.v0, strict=False)

    def radiated(self, weights):
        w = np.asarray(weights, dtype=complex)
        P, Q = w.shape
        F = np.fft.fft2(w, s=(2 * P - 1, 2 * Q - 1))
        r = np.fft.fftshift(np.fft.ifft2(np.abs(F) ** 2))
        return float(np.real(np.sum(r * self.K)))

    def directivity(self, weights):
        w = np.asarray(weights, dtype=complex)
        beam = self.beam_el * abs(w.sum()) ** 2
        return _db(4 * np.pi * beam / self.radiated(w))


def directivity(grid, cell, ep, quad=DEFAULT_QUAD, steer=BROADSIDE, kernel=None):
    """Directivity (dB) over the upper hemisphere by (theta, phi) quadrature."""
    if kernel is None:
        kernel = DirectivityKernel(cell, grid.P, grid.Q, ep, steer, quad)
    return kernel.directivity(grid.weights)


def _beam_frame(steer):
    w0 = math.sqrt(max(0.0, 1.0 - steer.u0 ** 2 - steer.v0 ** 2))
    b = np.array([steer.u0, steer.v0, w0])
    theta0 = math.acos(min(1.0, w0))
    phi0 = math.atan2(steer.v0, steer.u0) if theta0 > 0 else 0.0
    e_t = np.array([math.cos(theta0) * math.cos(phi0), math.cos(theta0) * math.sin(phi0), -math.sin(theta0)])
    e_p = np.array([-math.sin(phi0), math.cos(phi0), 0.0])
    return b, e_t, e_p


def hpbw_cuts(grid, cell, ep, phi_steps=72, steer=BROADSIDE, tol=1e-7):
    """Half-power beamwidth (degrees) of the cuts phi_i = pi i / phi_steps.

    Each cut rotates away from the beam direction along azimuth phi and
    phi + pi; the width is the sum of both -3 dB offsets.
    """
    if phi_steps < 36:
        raise ValueError("phi_steps must be >= 36")
    phis = np.pi * np.arange(phi_steps) / phi_steps
    dirs = np.concatenate([phis, phis + np.pi])
    b, e_t, e_p = _beam_frame(steer)
    tangents = np.cos(dirs)[:, None] * e_t[None, :] + np.sin(dirs)[:, None] * e_p[None, :]
    w = grid.weights
    P, Q = w.shape
    corner = (P - 1) * cell.d1 + (Q - 1) * cell.d2
    diag = (P - 1) * cell.d1 - (Q - 1) * cell.d2
    extent = max(np.linalg.norm(corner), np.linalg.norm(diag), 1.0)
    dt = min(0.02, 0.1 / extent)
    half = 0.5 * float(power_pattern(grid, cell, ep, steer.u0, steer.v0, steer))

    def level(t, idx):
        d = np.cos(t)[:, None] * b[None, :] + np.sin(t)[:, None] * tangents[idx]
        val = power_pattern(grid, cell, ep, d[:, 0], d[:, 1], steer)
        return np.where(d[:, 2] >= 0, val, -np.inf), d[:, 2]

    n = dirs.size
    lo = np.zeros(n)
    hi = np.full(n, np.nan)
    t_cur = np.zeros(n)
    active = np.arange(n)
    block = 16
    while active.size:
        for _ in range(block):
            t_next = t_cur[active] + dt
            val, wz = level(t_next, active)
            crossed = val < half
            over = (t_next > np.pi / 2) | (wz < 0)
            if np.any(over & ~crossed):
                raise BeamNotResolved("no -3 dB crossing above the horizon")
            hi[active[crossed]] = t_next[crossed]
            lo[active[crossed]] = t_cur[active[crossed]]
            t_cur[active] = t_next
            active = active[~crossed]
            if not active.size:
                break
    while np.max(hi - lo) > tol:
        mid = 0.5 * (lo + hi)
        val, _ = level(mid, np.arange(n))
        below = val < half
        hi = np.where(below, mid, hi)
        lo = np.where(below, lo, mid)
    edge = 0.5 * (lo + hi)
    return np.degrees(edge[:phi_steps] + edge[phi_steps:])


def max_hpbw(grid, cell, ep, phi_steps=72, steer=BROADSIDE):
    return float(np.max(hpbw_cuts(grid, cell, ep, phi_steps, steer)))


def pattern_value_at(grid, cell, ep, u, v, steer=BROADSIDE):
    """Pattern at (u, v) in dB relative to the beam value P(u0, v0)."""
    if not geo.is_visible(u, v):
        raise InvisibleDirection(f"({u}, {v}) is outside the visible region")
    num = float(power_pattern(grid, cell, ep, u, v, steer))
    den = float(power_pattern(grid, cell, ep, steer.u0, steer.v0, steer))
    return _db(num / den)


def measure(grid, cell, ep, steer=BROADSIDE, ml=MainlobeSpec(), oversample=16,
            quad=DEFAULT_QUAD, phi_steps=72, targets=(), kernel=None):
    """All four figures of merit for one layout."""
    from .pattern import pattern_grid_fft

    pg = pattern_grid_fft(grid, cell, ep, oversample, steer)
    s = sll(pg, ml, ep)
    d = directivity(grid, cell, ep, quad, steer, kernel)
    bw = max_hpbw(grid, cell, ep, phi_steps, steer)
    at = [(Direction(float(u), float(v)), pattern_value_at(grid, cell, ep, u, v, steer)) for u, v in targets]
    return MetricsReport(s, d, bw, at)
