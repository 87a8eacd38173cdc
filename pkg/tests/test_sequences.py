import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from dsthin import sequences as seq

import oracles

dims = st.integers(1, 8)


def complex_grids():
    return st.tuples(dims, dims, st.integers(0, 2**31 - 1)).map(
        lambda t: seq.ExcitationGrid(np.random.default_rng(t[2]).normal(size=(t[0], t[1]))
                                     + 1j * np.random.default_rng(t[2] + 1).normal(size=(t[0], t[1]))))


def binary_grids():
    return st.tuples(dims, dims).flatmap(
        lambda s: arrays(np.int8, s, elements=st.integers(0, 1))).map(
        lambda a: seq.ExcitationGrid(a.astype(float)))


@settings(max_examples=40)
@given(complex_grids())
def test_autocorrelation_matches_direct_sum(g):
    np.testing.assert_allclose(seq.autocorrelation(g).values, oracles.cyclic_acf_bruteforce(g.weights), atol=1e-9)


@settings(max_examples=40)
@given(complex_grids())
def test_acf_spectrum_is_power_spectrum(g):
    xi = seq.acf_spectrum(seq.autocorrelation(g))
    np.testing.assert_allclose(xi, np.abs(seq.spectrum(g.weights)) ** 2, atol=1e-8 * max(1, xi.max()))


@settings(max_examples=40)
@given(complex_grids())
def test_parseval(g):
    F = seq.spectrum(g.weights)
    assert np.sum(np.abs(F) ** 2) == pytest.approx(g.P * g.Q * np.sum(np.abs(g.weights) ** 2))


@settings(max_examples=40)
@given(binary_grids(), st.integers(-10, 10), st.integers(-10, 10))
def test_shift_leaves_acf_unchanged(g, sx, sy):
    a = seq.autocorrelation(g).values
    b = seq.autocorrelation(seq.cyclic_shift(g, sx, sy)).values
    np.testing.assert_allclose(a, b, atol=1e-12)


@settings(max_examples=40)
@given(binary_grids())
def test_binary_acf_is_integer(g):
    a = seq.autocorrelation(g).values
    np.testing.assert_array_equal(a, np.rint(a))
    assert a[0, 0] == g.active


def test_spectrum_convention():
    w = np.zeros((4, 4))
    w[1, 0] = 1
    F = seq.spectrum(w)
    assert F[1, 0] == pytest.approx(1j)


def test_spectral_samples_magnitude_phase():
    g = seq.ExcitationGrid.from_indices(3, 3, [(0, 0), (1, 2)])
    s = seq.spectral_samples(g)
    np.testing.assert_allclose(s.coefficients(), seq.spectrum(g.weights), atol=1e-12)


def test_grid_helpers():
    g = seq.ExcitationGrid.from_indices(3, 2, [(2, 1), (0, 0)])
    assert g.binary and g.active == 2
    assert g.indices() == [(0, 0), (2, 1)]
    assert seq.ExcitationGrid.ones(2, 2) == seq.ExcitationGrid(np.ones((2, 2)))
    with pytest.raises(ValueError):
        seq.ExcitationGrid(np.ones(3))


def test_random_thinned_is_seeded_and_sized():
    a = seq.random_thinned(17, 19, 0.5, seed=3)
    b = seq.random_thinned(17, 19, 0.5, seed=3)
    assert a == b
    assert a.active == 162
    with pytest.raises(ValueError):
        seq.random_thinned(4, 4, 1.5, seed=0)
