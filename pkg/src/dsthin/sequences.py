"""Excitation grids, circular autocorrelation and their 2D spectra.

Index convention: ``weights[p, q]`` is the excitation at lattice position
``p*d1 + q*d2``.  Spectral coefficients use the ``+j`` kernel

    F[k, l] = sum_pq alpha[p, q] * exp(+j 2 pi (p k / P + q l / Q)),

which is ``P*Q*ifft2(alpha)``; with it the sampled array factor equals
``|F[k, l]|**2``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True, eq=False)
class ExcitationGrid:
    weights: np.ndarray

    def __post_init__(self):
        w = np.array(self.weights, dtype=complex)
        if w.ndim != 2:
            raise ValueError("excitation grid must be two-dimensional")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @property
    def P(self):
        return self.weights.shape[0]

    @property
    def Q(self):
        return self.weights.shape[1]

    @property
    def shape(self):
        return self.weights.shape

    @property
    def binary(self):
        w = self.weights
        return bool(np.all(w.imag == 0) and np.all((w.real == 0) | (w.real == 1)))

    @property
    def active(self):
        return int(np.count_nonzero(self.weights))

    @classmethod
    def ones(cls, P, Q):
        return cls(np.ones((P, Q)))

    @classmethod
    def from_indices(cls, P, Q, indices):
        w = np.zeros((P, Q))
        for p, q in indices:
            w[p, q] = 1.0
        return cls(w)

    def indices(self):
        """Sorted list of (p, q) positions with nonzero weight."""
        ps, qs = np.nonzero(self.weights)
        return sorted(zip(ps.tolist(), qs.tolist()))

    def __eq__(self, other):
        if not isinstance(other, ExcitationGrid):
            return NotImplemented
        return self.shape == other.shape and np.array_equal(self.weights, other.weights)

    __hash__ = None


@dataclass(frozen=True, eq=False)
class AutocorrGrid:
    values: np.ndarray

    @property
    def P(self):
        return self.values.shape[0]

    @property
    def Q(self):
        return self.values.shape[1]


@dataclass(frozen=True, eq=False)
class SpectralSamples:
    xi: np.ndarray
    eta: np.ndarray

    @property
    def P(self):
        return self.xi.shape[0]

    @property
    def Q(self):
        return self.xi.shape[1]

    def coefficients(self):
        return np.sqrt(np.maximum(self.xi, 0.0)) * np.exp(1j * self.eta)


def spectrum(weights):
    """``sum_pq w[p,q] exp(+j 2 pi (pk/P + ql/Q))`` for every (k, l)."""
    w = np.asarray(weights)
    P, Q = w.shape
    return np.fft.ifft2(w) * (P * Q)


def autocorrelation(grid):
    """Circular autocorrelation ``a[s,t] = sum conj(w[p,q]) w[p+s, q+t]``."""
    w = grid.weights
    F = np.fft.fft2(w)
    a = np.fft.ifft2(np.abs(F) ** 2)
    # fft2 uses exp(-j...), so |F|^2 -> ifft2 gives sum conj(w[p]) w[p+s]
    if grid.binary or np.all(w.imag == 0):
        a = a.real.astype(complex)
    if grid.binary:
        a = np.rint(a.real).astype(complex)
    a[0, 0] = np.sum(np.abs(w) ** 2)
    return AutocorrGrid(a)


def acf_spectrum(acf):
    """Transform of the autocorrelation with the ``+j`` kernel (real, >= 0 up to round-off)."""
    a = acf.values if isinstance(acf, AutocorrGrid) else np.asarray(acf)
    P, Q = a.shape
    return (np.fft.ifft2(a) * (P * Q)).real


def spectral_samples(grid):
    F = spectrum(grid.weights)
    xi = np.abs(F) ** 2
    eta = np.angle(F)
    return SpectralSamples(xi, eta)


def cyclic_shift(grid, sx, sy):
    """``out[p, q] = in[(p+sx) % P, (q+sy) % Q]``."""
    return ExcitationGrid(np.roll(grid.weights, shift=(-sx, -sy), axis=(0, 1)))


def random_thinned(P, Q, tau, seed):
    """Binary grid with exactly ``round(tau*P*Q)`` active cells drawn uniformly."""
    if not 0.0 <= tau <= 1.0:
        raise ValueError("tau must lie in [0, 1]")
    n = P * Q
    count = int(np.floor(tau * n + 0.5))
    rng = np.random.default_rng(seed)
    w = np.zeros(n)
    w[rng.choice(n, size=count, replace=False)] = 1.0
    return ExcitationGrid(w.reshape(P, Q))
