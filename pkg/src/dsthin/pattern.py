"""Power-pattern evaluation: direct sums, FFT grids, sample prediction,
exact interpolation and the Monte Carlo phase approximation.

The array factor ``A = |sum alpha_pq exp(j(p chi + q psi))|^2`` is a 2D
trigonometric polynomial in the lattice phases (chi, psi), so a zero-padded
FFT evaluates it exactly on any uniform (chi, psi) grid.  Each grid node
stands for a whole family of (u, v) directions that differ by a lattice
period; ``PatternGrid`` keeps both views.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import RegularGridInterpolator

from . import geometry as geo
from .errors import TabulatedOutOfRange
from .geometry import BROADSIDE, Direction
from .sequences import AutocorrGrid, ExcitationGrid, SpectralSamples, acf_spectrum

KERNEL_EPS = 1e-8
_CHUNK = 4096

ISOTROPIC = "isotropic"
COSINE = "cosine-y-dipole"
TABULATED = "tabulated"


@dataclass(frozen=True, eq=False)
class ElementPattern:
    """Embedded element power pattern.

    ``table`` is ``(u_axis, v_axis, power[u, v])`` for tabulated patterns;
    lookups are bilinear.
    """

    kind: str = ISOTROPIC
    table: tuple | None = None
    _interp: object = field(default=None, repr=False)

    def __post_init__(self):
        if self.kind not in (ISOTROPIC, COSINE, TABULATED):
            raise ValueError(f"unknown element kind {self.kind!r}")
        if self.kind == TABULATED:
            if self.table is None:
                raise ValueError("tabulated element needs a table")
            u_ax, v_ax, vals = (np.asarray(t, dtype=float) for t in self.table)
            if np.any(vals < 0):
                raise ValueError("tabulated element power must be nonnegative")
            interp = RegularGridInterpolator((u_ax, v_ax), vals, method="linear",
                                             bounds_error=False, fill_value=np.nan)
            object.__setattr__(self, "_interp", interp)

    @classmethod
    def isotropic(cls):
        return cls(ISOTROPIC)

    @classmethod
    def cosine(cls):
        return cls(COSINE)

    @classmethod
    def tabulated(cls, u_axis, v_axis, power):
        return cls(TABULATED, (u_axis, v_axis, power))

    def power(self, u, v, strict=True):
        """Element power at (u, v).

        With ``strict=False`` tabulated lookups outside the table return 0
        and the cosine model is clipped at 0 (used for invisible space).
        """
        u = np.asarray(u, dtype=float)
        v = np.asarray(v, dtype=float)
        if self.kind == ISOTROPIC:
            out = np.ones(np.broadcast(u, v).shape)
        elif self.kind == COSINE:
            out = np.maximum(1.0 - u ** 2, 0.0) * np.ones_like(v)
        else:
            uu, vv = np.broadcast_arrays(u, v)
            out = self._interp(np.stack([uu.ravel(), vv.ravel()], axis=-1)).reshape(uu.shape)
            bad = np.isnan(out)
            if np.any(bad):
                if strict:
                    raise TabulatedOutOfRange("direction outside the tabulated element pattern")
                out = np.where(bad, 0.0, out)
        return float(out) if out.ndim == 0 else out


def element_power(ep, u, v):
    return ep.power(u, v)


def _field(weights, chi, psi):
    """Complex field sum at arrays of (chi, psi); chunked direct evaluation."""
    w = np.asarray(weights, dtype=complex)
    P, Q = w.shape
    chi = np.atleast_1d(np.asarray(chi, dtype=float)).ravel()
    psi = np.atleast_1d(np.asarray(psi, dtype=float)).ravel()
    p = np.arange(P)
    q = np.arange(Q)
    out = np.empty(chi.size, dtype=complex)
    for start in range(0, chi.size, _CHUNK):
        sl = slice(start, start + _CHUNK)
        ep_ = np.exp(1j * np.outer(chi[sl], p))
        eq_ = np.exp(1j * np.outer(psi[sl], q))
        out[sl] = np.einsum("np,nq,pq->n", ep_, eq_, w, optimize=True)
    return out


def array_factor(grid, cell, u, v, steer=BROADSIDE):
    """``|sum alpha exp(j(p chi + q psi))|^2`` by direct summation."""
    chi, psi = geo.chi_psi(cell, u, v, steer)
    shape = np.shape(chi)
    af = np.abs(_field(grid.weights, chi, psi)) ** 2
    return float(af[0]) if shape == () else af.reshape(shape)


def power_pattern(grid, cell, ep, u, v, steer=BROADSIDE):
    return array_factor(grid, cell, u, v, steer) * ep.power(u, v, strict=False)


def af_fft(weights, oversample):
    """Array factor on the ``(O P) x (O Q)`` node grid chi = 2 pi k'/(O P)."""
    w = np.asarray(weights)
    P, Q = w.shape
    NP, NQ = oversample * P, oversample * Q
    pad = np.zeros((NP, NQ), dtype=complex)
    pad[:P, :Q] = w
    return np.abs(np.fft.ifft2(pad) * (NP * NQ)) ** 2


@dataclass(frozen=True, eq=False)
class PatternGrid:
    """FFT-evaluated pattern.

    Node arrays (shape ``(O P, O Q)``): ``af`` and ``node_weight`` (largest
    element power among the visible lattice images of the node, 0 if none).
    Image arrays (flat): every (u, v) image of every node inside the box
    ``[-1, 1]^2`` with its node index, power value and visibility.
    """

    P: int
    Q: int
    oversample: int
    cell: geo.UnitCell
    steer: geo.Steering
    af: np.ndarray
    node_weight: np.ndarray
    u: np.ndarray
    v: np.ndarray
    node_k: np.ndarray
    node_l: np.ndarray
    values: np.ndarray
    visible: np.ndarray
    ref_value: float
    peak_value: float
    peak_direction: Direction

    @property
    def chi(self):
        return 2 * np.pi * self.node_k / (self.oversample * self.P)

    @property
    def psi(self):
        return 2 * np.pi * self.node_l / (self.oversample * self.Q)

    @property
    def directions(self):
        return [Direction(float(a), float(b)) for a, b in zip(self.u, self.v)]


@dataclass(frozen=True, eq=False)
class NodeImages:
    """Lattice images of every FFT node that fall inside ``[-1, 1]^2``.

    Depends only on the cell, steering and grid size, so sweeps reuse it.
    """

    shape: tuple
    u: np.ndarray
    v: np.ndarray
    node_k: np.ndarray
    node_l: np.ndarray
    visible: np.ndarray


def node_images(cell, NP, NQ, steer=BROADSIDE):
    corners_u = np.array([-1.0, 1.0, 1.0, -1.0]) - steer.u0
    corners_v = np.array([-1.0, -1.0, 1.0, 1.0]) - steer.v0
    f1 = cell.d1x * corners_u + cell.d1y * corners_v
    f2 = cell.d2x * corners_u + cell.d2y * corners_v
    b_rng = range(int(np.floor(f1.min())) - 1, int(np.ceil(f1.max())) + 2)
    c_rng = range(int(np.floor(f2.min())) - 1, int(np.ceil(f2.max())) + 2)
    kk, ll = np.meshgrid(np.arange(NP), np.arange(NQ), indexing="ij")
    kk, ll = kk.ravel(), ll.ravel()
    chi0 = 2 * np.pi * kk / NP
    psi0 = 2 * np.pi * ll / NQ
    us, vs, ks, ls = [], [], [], []
    for b in b_rng:
        for c in c_rng:
            u, v = geo.chi_psi_to_uv(cell, chi0 + 2 * np.pi * b, psi0 + 2 * np.pi * c, steer)
            keep = (np.abs(u) <= 1.0) & (np.abs(v) <= 1.0)
            if np.any(keep):
                us.append(u[keep]); vs.append(v[keep]); ks.append(kk[keep]); ls.append(ll[keep])
    u = np.concatenate(us)
    v = np.concatenate(vs)
    k = np.concatenate(ks)
    l = np.concatenate(ls)
    order = np.lexsort((u, v, l, k))
    u, v, k, l = u[order], v[order], k[order], l[order]
    return NodeImages((NP, NQ), u, v, k, l, geo.is_visible(u, v))


def node_weights(images, ep, exclude=None):
    """Per-node maximum element power over visible images (optionally skipping ``exclude`` images)."""
    w = np.zeros(images.shape)
    sel = images.visible if exclude is None else images.visible & ~exclude
    if np.any(sel):
        pw = ep.power(images.u[sel], images.v[sel], strict=False)
        np.maximum.at(w, (images.node_k[sel], images.node_l[sel]), pw)
    return w


def pattern_grid_fft(grid, cell, ep, oversample=16, steer=BROADSIDE, images=None):
    if oversample < 1:
        raise ValueError("oversample must be >= 1")
    P, Q = grid.shape
    NP, NQ = oversample * P, oversample * Q
    af = af_fft(grid.weights, oversample)
    if images is None:
        images = node_images(cell, NP, NQ, steer)
    el = ep.power(images.u, images.v, strict=False)
    values = af[images.node_k, images.node_l] * el
    weight = node_weights(images, ep)
    ref = float(af[0, 0] * ep.power(steer.u0, steer.v0, strict=False))
    vis_vals = np.where(images.visible, values, -np.inf)
    i = int(np.argmax(vis_vals))
    return PatternGrid(P, Q, oversample, cell, steer, af, weight, images.u, images.v,
                       images.node_k, images.node_l, values, images.visible, ref,
                       float(vis_vals[i]), Direction(float(images.u[i]), float(images.v[i])))


@dataclass(frozen=True, eq=False)
class SamplePrediction:
    k: np.ndarray
    l: np.ndarray
    u: np.ndarray
    v: np.ndarray
    power: np.ndarray

    def as_list(self):
        return [(Direction(float(a), float(b)), float(p)) for a, b, p in zip(self.u, self.v, self.power)]


def predict_samples(acf, ep, cell, steer=BROADSIDE):
    """Pattern at the P x Q sample directions from the autocorrelation alone."""
    xi = acf_spectrum(acf)
    P, Q = xi.shape
    k, l = np.meshgrid(np.arange(P), np.arange(Q), indexing="ij")
    u, v = geo.sample_uv(cell, P, Q, k, l, steer)
    power = ep.power(u, v, strict=False) * xi
    return SamplePrediction(k.ravel(), l.ravel(), u.ravel(), v.ravel(), power.ravel())


def _dirichlet(x, N):
    """``sin(N x/2) / (N sin(x/2)) * exp(j x (N-1)/2)`` with the removable singularity filled."""
    x = np.asarray(x, dtype=float)
    s = np.sin(x / 2)
    near = np.abs(s) < KERNEL_EPS
    ratio = np.sin(N * x / 2) / (N * np.where(near, 1.0, s))
    # limit at x = 2 pi n is (-1)^((N-1) n)
    n = np.rint(x / (2 * np.pi))
    ratio = np.where(near, np.where(((N - 1) * n) % 2 == 0, 1.0, -1.0), ratio)
    return ratio * np.exp(1j * x * (N - 1) / 2)


def interp_kernel(chi, psi, P, Q):
    out = _dirichlet(chi, P) * _dirichlet(psi, Q)
    return complex(out) if np.ndim(out) == 0 else out


def _interp_field(coeffs, chi, psi):
    P, Q = coeffs.shape
    chi = np.atleast_1d(np.asarray(chi, dtype=float)).ravel()
    psi = np.atleast_1d(np.asarray(psi, dtype=float)).ravel()
    ck = 2 * np.pi * np.arange(P) / P
    cl = 2 * np.pi * np.arange(Q) / Q
    out = np.empty(chi.size, dtype=complex)
    for start in range(0, chi.size, _CHUNK):
        sl = slice(start, start + _CHUNK)
        sp = _dirichlet(chi[sl, None] - ck[None, :], P)
        sq = _dirichlet(psi[sl, None] - cl[None, :], Q)
        out[sl] = np.einsum("nk,nl,kl->n", sp, sq, coeffs, optimize=True)
    return out


def pattern_interpolated(samples, ep, cell, u, v, steer=BROADSIDE):
    """Power pattern anywhere from the spectral samples (magnitudes and phases)."""
    chi, psi = geo.chi_psi(cell, u, v, steer)
    shape = np.shape(chi)
    af = np.abs(_interp_field(samples.coefficients(), chi, psi)) ** 2
    out = af * np.ravel(ep.power(u, v, strict=False))
    return float(out[0]) if shape == () else out.reshape(shape)


@dataclass(frozen=True, eq=False)
class MonteCarloPattern:
    u: np.ndarray
    v: np.ndarray
    trials: np.ndarray  # (n_trials, n_directions)

    @property
    def mean(self):
        return self.trials.mean(axis=0)

    @property
    def max(self):
        return self.trials.max(axis=0)


def pattern_mc(acf, ep, cell, seed, trials, u=None, v=None, steer=BROADSIDE):
    """Pattern estimates with the unknown DFT phases drawn at random.

    Phases are i.i.d. uniform on [0, 2 pi) except the (0, 0) phase, pinned
    to 0.  Trial ``i`` uses its own stream seeded by ``(seed, i)``.
    Directions default to the P x Q mid-point grid.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    xi = np.maximum(acf_spectrum(acf), 0.0)
    P, Q = xi.shape
    if u is None:
        m, n = np.meshgrid(np.arange(P) + 0.5, np.arange(Q) + 0.5, indexing="ij")
        u, v = geo.sample_uv(cell, P, Q, m.ravel(), n.ravel(), steer)
    u = np.atleast_1d(np.asarray(u, dtype=float)).ravel()
    v = np.atleast_1d(np.asarray(v, dtype=float)).ravel()
    chi, psi = geo.chi_psi(cell, u, v, steer)
    ck = 2 * np.pi * np.arange(P) / P
    cl = 2 * np.pi * np.arange(Q) / Q
    sp = _dirichlet(np.asarray(chi)[:, None] - ck[None, :], P)
    sq = _dirichlet(np.asarray(psi)[:, None] - cl[None, :], Q)
    el = ep.power(u, v, strict=False)
    mag = np.sqrt(xi)
    out = np.empty((trials, u.size))
    for i in range(trials):
        rng = np.random.default_rng([seed, i])
        eta = rng.uniform(0.0, 2 * np.pi, size=(P, Q))
        eta[0, 0] = 0.0
        f = np.einsum("nk,nl,kl->n", sp, sq, mag * np.exp(1j * eta), optimize=True)
        out[i] = np.abs(f) ** 2 * el
    return MonteCarloPattern(u, v, out)
