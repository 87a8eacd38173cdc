import math

import numpy as np
import pytest

from dsthin import dsbounds as bd
from dsthin import geometry as geo
from dsthin import pattern as pat
from dsthin import sequences as seq
from dsthin.errors import ApertureTooSmall, InvalidDescriptors, NoVisibleSamples
from dsthin.metrics import MainlobeSpec

import oracles


def test_descriptor_checks():
    bd.check_descriptors(11, 13, 71, 35)
    with pytest.raises(InvalidDescriptors):
        bd.check_descriptors(11, 13, 71, 34)
    with pytest.raises(InvalidDescriptors):
        bd.check_descriptors(1, 1, 1, 0)
    with pytest.raises(InvalidDescriptors):
        bd.sll_bounds(11, 13, 71, 35, eps=0.0)


def test_sample_levels_match_fft(tp143, skew_cell, iso):
    lv = bd.ds_sample_levels(11, 13, 71, 35, iso, skew_cell)
    af = pat.af_fft(tp143.grid().weights, 1)
    assert lv.peak == pytest.approx(af[0, 0])
    np.testing.assert_allclose(af.ravel()[1:], lv.offpeak, rtol=1e-9)
    assert lv.normalized_offpeak_db == pytest.approx(10 * math.log10(36 / 71 ** 2))


def test_sll_bounds_structure():
    b = bd.sll_bounds(11, 13, 71, 35)
    assert b.sll_sup - b.sll_inf == pytest.approx(10 * math.log10(0.5 + 1.5 * math.log10(143)))
    assert b.sll_inf == pytest.approx(10 * math.log10(36 / 71 ** 2))
    assert bd.sll_bounds(11, 13, 71, 35, eps=0.5).sll_inf == pytest.approx(b.sll_inf - 10 * math.log10(2))


def test_epsilon_cosine(square_cell, cosine, iso):
    P = Q = 16
    k, l = np.meshgrid(range(P), range(Q), indexing="ij")
    u, v = geo.sample_uv(square_cell, P, Q, k, l)
    vis = (u ** 2 + v ** 2 <= 1) & ((k != 0) | (l != 0))
    assert bd.epsilon(cosine, square_cell, P, Q) == pytest.approx(np.max(1 - u[vis] ** 2))
    both = vis & (k * l != 0)
    assert bd.epsilon(cosine, square_cell, P, Q, exclude_axes=True) == pytest.approx(np.max(1 - u[both] ** 2))
    assert bd.epsilon(iso, square_cell, P, Q) == 1.0
    with pytest.raises(NoVisibleSamples):
        bd.epsilon(iso, geo.make_unit_cell(0.2, 0, 0, 0.2), 2, 1)


def test_directivity_bound_monotone_in_theta_bar():
    vals = [bd.d_inf(11, 13, 71, 35, t) for t in (0.1, 0.2, 0.4)]
    assert vals[0] > vals[1] > vals[2]
    bws = [bd.bw_sup(11, 13, 71, 35, t) for t in (0.1, 0.2, 0.4)]
    assert bws[0] < bws[1] < bws[2]


@pytest.mark.parametrize("target", [18.0, 20.47, 22.0])
def test_calibration_round_trip(target):
    tb = bd.ThetaBar.calibrate(11, 13, 71, 35, target)
    assert tb.provenance == bd.CALIBRATED
    assert bd.d_inf(11, 13, 71, 35, tb) == pytest.approx(target, abs=1e-9)


def test_bw_calibration_round_trip():
    tb = bd.ThetaBar.calibrate_bw(31, 33, 511, 255, 5.65)
    assert bd.bw_sup(31, 33, 511, 255, tb) == pytest.approx(5.65, abs=1e-9)


def test_theta_bar_validation(square_cell):
    with pytest.raises(ValueError):
        bd.ThetaBar(0.0)
    with pytest.raises(ValueError):
        bd.ThetaBar(0.1, "guess")
    with pytest.raises(ValueError):
        bd.ThetaBar.calibrate(11, 13, 71, 35, 40.0)
    tb = bd.ThetaBar.default_rule(16, 16, square_cell)
    assert tb.value == pytest.approx(math.asin(1 / math.sqrt(64)))


def test_bounds_report_collects_everything(skew_cell, iso):
    r = bd.bounds_report(11, 13, 71, 35, iso, skew_cell, theta_bar=bd.ThetaBar(0.15))
    assert r.sll_inf < r.sll_sup
    assert r.epsilon == 1.0 and r.theta_bar.value == 0.15
    assert r.d_inf == pytest.approx(bd.d_inf(11, 13, 71, 35, 0.15))


def _midpoint_oracle(ds, shift, cell):
    """Mid-point levels of the layout with the beam's own interpolation term removed."""
    P, Q, H = ds.P, ds.Q, ds.H
    w = seq.cyclic_shift(ds.grid(), *shift).weights
    m, n = np.meshgrid(np.arange(P) + 0.5, np.arange(Q) + 0.5, indexing="ij")
    u, v = geo.sample_uv(cell, P, Q, m.ravel(), n.ravel())
    field = oracles.direct_field(w, cell.d1, cell.d2, u, v)
    chi = 2 * np.pi * m.ravel() / P
    psi = 2 * np.pi * n.ravel() / Q
    dp = np.exp(1j * np.outer(chi, np.arange(P))).mean(axis=1)
    dq = np.exp(1j * np.outer(psi, np.arange(Q))).mean(axis=1)
    rest = np.abs(field - H * dp * dq) ** 2
    # keep mid-points with a visible lattice image, outside the beam bands
    vis = np.zeros(u.size, bool)
    for b in range(-2, 3):
        for c in range(-2, 3):
            gu, gv = geo.grating_lobe_uv(cell, b, c)
            vis |= (u + gu) ** 2 + (v + gv) ** 2 <= 1
    mm, nn = m.ravel(), n.ravel()
    band = (np.minimum(mm, P - mm) < 1) | (np.minimum(nn, Q - nn) < 1)
    keep = vis & ~band
    return 10 * math.log10(rest[keep].max() / H ** 2)


@pytest.mark.parametrize("shift", [(0, 0), (3, 7), (10, 2)])
def test_midpoint_estimate_matches_direct_oracle(tp323, skew_cell, iso, shift):
    got = bd.sll_midpoint_estimate(tp323, shift, skew_cell, iso)
    assert got == pytest.approx(_midpoint_oracle(tp323, shift, skew_cell), abs=1e-6)


def test_midpoint_needs_aperture(iso, square_cell):
    from dsthin import diffsets as dsm
    with pytest.raises(ApertureTooSmall):
        bd.sll_midpoint_estimate(dsm.twin_prime(5, 7), (0, 0), square_cell, iso)
