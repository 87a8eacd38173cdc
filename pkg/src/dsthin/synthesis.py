"""Four-step analytic design of difference-set thinned arrays.

1. pick a set whose SLL upper bound meets the target,
2. pick a GL-free lattice placing an off-beam sample on the pattern target,
3. check the directivity and beamwidth bounds,
4. choose the cyclic shift with the lowest measured SLL.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import dsbounds as bnd
from . import geometry as geo
from .diffsets import to_excitations
from .errors import ElementInadmissible, Infeasible, NoFeasibleLattice
from .geometry import BROADSIDE
from .metrics import (
    DEFAULT_QUAD,
    DirectivityKernel,
    MainlobeSpec,
    MetricsReport,
    SllEvaluator,
    max_hpbw,
    pattern_value_at,
)
from .pattern import ElementPattern

RESIDUAL_TOL = 1e-6


@dataclass(frozen=True)
class PatternTarget:
    u: float
    v: float
    p_db: float

    def __post_init__(self):
        if self.u ** 2 + self.v ** 2 > 1.0:
            raise ValueError("pattern target must be a visible direction")
        if not math.isfinite(self.p_db):
            raise ValueError("pattern target level must be finite")


@dataclass(frozen=True)
class CellBox:
    """Search box for the lattice axes (wavelengths).

    Two components (one per axis) are scanned on a grid of ``step``; the
    other two are solved for.
    """

    d1x: tuple = (0.3, 0.7)
    d1y: tuple = (-0.3, 0.3)
    d2x: tuple = (-0.7, 0.7)
    d2y: tuple = (0.3, 0.7)
    step: float = 0.01

    def axis(self, name):
        lo, hi = getattr(self, name)
        n = int(round((hi - lo) / self.step))
        return np.round(lo + self.step * np.arange(n + 1), 10)

    def inside(self, name, x, tol=1e-9):
        lo, hi = getattr(self, name)
        return (x >= lo - tol) & (x <= hi + tol)


@dataclass(frozen=True)
class SweepSettings:
    screen_oversample: int = 8
    final_oversample: int = 16
    recheck_fraction: float = 0.05
    with_directivity: bool = False
    with_beamwidth: bool = False
    quad: tuple = DEFAULT_QUAD
    phi_steps: int = 72
    mainlobe: MainlobeSpec = MainlobeSpec()
    workers: int | None = None


@dataclass(frozen=True)
class SynthesisSpec:
    sll_t: float
    d_t: float
    bw_t: float
    target: PatternTarget
    steer: geo.Steering = BROADSIDE
    element: ElementPattern = field(default_factory=ElementPattern.isotropic)
    cell_box: CellBox = CellBox()
    mn_range: tuple = (-10, 10)
    theta_bar: bnd.ThetaBar | None = None
    epsilon_estimate: float = 1.0
    sweep: SweepSettings = SweepSettings()
    max_lattice_attempts: int = 25

    def __post_init__(self):
        for name in ("sll_t", "d_t", "bw_t"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")


@dataclass(frozen=True)
class Candidate:
    ds: object
    sll_sup: float


@dataclass(frozen=True)
class LatticeSolution:
    cell: geo.UnitCell
    m: int
    n: int
    residual: float


@dataclass(frozen=True)
class Step3Report:
    passed: bool
    d_inf: float
    bw_sup: float
    d_margin: float
    bw_margin: float
    theta_bar: bnd.ThetaBar


@dataclass(frozen=True)
class ShiftRow:
    sigma: int
    sigma_x: int
    sigma_y: int
    sll: float
    directivity: float = math.nan
    bw: float = math.nan


@dataclass(frozen=True)
class SweepResult:
    rows: tuple
    sigma_opt: int

    @property
    def best(self):
        return self.rows[self.sigma_opt]


@dataclass
class SynthesisResult:
    status: str
    ds: object
    cell: geo.UnitCell
    mn: tuple
    sigma_opt: tuple
    bounds: bnd.BoundsReport
    measured: MetricsReport
    per_shift: tuple
    met: dict
    trace: list

    @property
    def sigma(self):
        return self.sigma_opt[0] * self.ds.Q + self.sigma_opt[1]

    def layout(self):
        return to_excitations(self.ds, *self.sigma_opt)


def _descriptor(entry):
    return entry.P, entry.Q, entry.H, entry.gamma


def step1_select(catalog, sll_t, eps=1.0):
    """Catalog entries whose SLL upper bound meets ``sll_t``, best bound first."""
    if not catalog:
        raise ValueError("empty catalog")
    out = []
    for entry in catalog:
        sup = bnd.sll_bounds(*_descriptor(entry), eps).sll_sup
        if sup <= sll_t:
            out.append(Candidate(entry, sup))
    # stable sort keeps catalog order among equal bounds
    return sorted(out, key=lambda c: c.sll_sup)


def admissibility_db(ds, target, element, steer=BROADSIDE):
    """Predicted pattern level (dB rel. beam) at a sample placed on the target direction."""
    P, Q, H, gamma = _descriptor(ds)
    el_t = element.power(target.u, target.v, strict=False)
    el_0 = element.power(steer.u0, steer.v0, strict=False)
    ratio = (H - gamma) * el_t / (el_0 * (gamma * (P * Q - 1) + H))
    return 10 * math.log10(ratio) if ratio > 0 else -math.inf


def _axis_options(cell_box, axis, count, du, dv):
    """(index, x, y) triples with axis . offset = index / count inside the box."""
    along_x = abs(du) >= abs(dv)
    fixed = f"d{axis}y" if along_x else f"d{axis}x"
    solved = f"d{axis}x" if along_x else f"d{axis}y"
    grid = cell_box.axis(fixed)
    out = []
    for idx in range(-count + 1, count):
        # d . (du, dv) = idx / count, solved for the dominant component
        val = (idx / count - grid * (dv if along_x else du)) / (du if along_x else dv)
        ok = cell_box.inside(solved, val)
        for f, v in zip(grid[ok], val[ok]):
            x, y = (float(v), float(f)) if along_x else (float(f), float(v))
            out.append((idx, x, y))
    return out


def lattice_candidates(ds, target, element, mn_range=(-10, 10), cell_box=CellBox(), steer=BROADSIDE):
    """Every admissible lattice in the box, largest cell area first.

    A sample (m, n) lands on the target exactly when d1 . offset = m / P
    and d2 . offset = n / Q, so each axis is solved independently.
    Raises ElementInadmissible when the predicted level at the target
    exceeds the target level, NoFeasibleLattice when the box holds no
    solution.
    """
    level = admissibility_db(ds, target, element, steer)
    if level > target.p_db:
        raise ElementInadmissible(
            f"predicted level {level:.2f} dB at ({target.u}, {target.v}) exceeds {target.p_db} dB")
    P, Q = ds.P, ds.Q
    du, dv = target.u - steer.u0, target.v - steer.v0
    if du == 0 and dv == 0:
        raise NoFeasibleLattice("the target coincides with the beam direction (needs m*n != 0)")
    lo, hi = mn_range
    a1 = [o for o in _axis_options(cell_box, 1, P, du, dv) if o[0] != 0 and lo <= o[0] <= hi]
    a2 = [o for o in _axis_options(cell_box, 2, Q, du, dv) if o[0] != 0 and lo <= o[0] <= hi]
    found = []
    if a1 and a2:
        m, x1, y1 = (np.array(c) for c in zip(*a1))
        n, x2, y2 = (np.array(c) for c in zip(*a2))
        nu = x1[:, None] * y2[None, :] - x2[None, :] * y1[:, None]
        ok = np.abs(nu) > geo.NU_TOL
        # first-order grating lobes: offsets (b r1 + c r2) with r the reciprocal axes
        nu_s = np.where(ok, nu, 1.0)
        r1 = (y2[None, :] / nu_s, -x2[None, :] / nu_s)
        r2 = (-y1[:, None] / nu_s, x1[:, None] / nu_s)
        for b in (-1, 0, 1):
            for c in (-1, 0, 1):
                if b == 0 and c == 0:
                    continue
                gu = steer.u0 + b * r1[0] + c * r2[0]
                gv = steer.v0 + b * r1[1] + c * r2[1]
                ok &= np.hypot(gu, gv) > 1.0
        for i, j in zip(*np.nonzero(ok)):
            cell = geo.UnitCell(float(x1[i]), float(y1[i]), float(x2[j]), float(y2[j]))
            u, v = geo.sample_uv(cell, P, Q, int(m[i]), int(n[j]), steer)
            res = math.hypot(float(u) - target.u, float(v) - target.v)
            if res <= RESIDUAL_TOL:
                found.append(LatticeSolution(cell, int(m[i]), int(n[j]), res))
    if not found:
        raise NoFeasibleLattice("no GL-free lattice in the search box reaches the target")
    found.sort(key=lambda s: (-abs(s.cell.nu), s.m, s.n, s.cell.as_tuple()))
    return found


def step2_lattice(ds, target, element, mn_range=(-10, 10), cell_box=CellBox(), steer=BROADSIDE):
    return lattice_candidates(ds, target, element, mn_range, cell_box, steer)[0]


def step3_check(ds, cell, theta_bar, d_t, bw_t):
    P, Q, H, gamma = _descriptor(ds)
    theta_bar = theta_bar or bnd.ThetaBar.default_rule(P, Q, cell)
    d = bnd.d_inf(P, Q, H, gamma, theta_bar)
    bw = bnd.bw_sup(P, Q, H, gamma, theta_bar)
    return Step3Report(d >= d_t and bw <= bw_t, d, bw, d - d_t, bw_t - bw, theta_bar)


def _workers(settings):
    if settings.workers is not None:
        return max(1, settings.workers)
    env = os.environ.get("DSTHIN_WORKERS")
    return max(1, int(env)) if env else 1


def _ordered_map(fn, items, workers):
    if workers == 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def step4_shift_sweep(ds, cell, element, steer=BROADSIDE, settings=SweepSettings()):
    """Measured SLL for every cyclic shift; the optimum is the lowest, smallest sigma on ties.

    Shifts are screened on a coarse FFT grid and the best fraction is
    re-measured on the fine grid before picking the optimum.  Rows carry
    the fine value for re-measured shifts and the screening value otherwise.
    """
    P, Q = ds.P, ds.Q
    N = P * Q
    workers = _workers(settings)
    ml = settings.mainlobe
    coarse = SllEvaluator(P, Q, cell, element, steer, ml, settings.screen_oversample)
    sigmas = list(range(N))
    grids = lambda s: to_excitations(ds, s // Q, s % Q)
    sll = np.array(_ordered_map(lambda s: coarse(grids(s), flat_ok=True), sigmas, workers))
    if settings.final_oversample != settings.screen_oversample:
        fine = SllEvaluator(P, Q, cell, element, steer, ml, settings.final_oversample)
        n_top = max(1, int(math.ceil(settings.recheck_fraction * N)))
        top = np.argsort(sll, kind="stable")[:n_top]
        refined = _ordered_map(lambda s: fine(grids(int(s)), flat_ok=True), top, workers)
        sll[top] = refined
        pool_idx = top
    else:
        pool_idx = np.arange(N)
    best = min(pool_idx, key=lambda s: (sll[s], s))
    d = np.full(N, math.nan)
    bw = np.full(N, math.nan)
    if settings.with_directivity:
        kern = DirectivityKernel(cell, P, Q, element, steer, settings.quad)
        d[:] = _ordered_map(lambda s: kern.directivity(grids(s).weights), sigmas, workers)
    if settings.with_beamwidth:
        bw[:] = _ordered_map(lambda s: max_hpbw(grids(s), cell, element, settings.phi_steps, steer),
                             sigmas, workers)
    rows = tuple(ShiftRow(s, s // Q, s % Q, float(sll[s]), float(d[s]), float(bw[s])) for s in sigmas)
    return SweepResult(rows, int(best))


def measure_design(ds, cell, element, sigma, target, steer=BROADSIDE, settings=SweepSettings()):
    """Re-measure a layout from scratch on the fine grid."""
    grid = to_excitations(ds, sigma // ds.Q, sigma % ds.Q)
    s = SllEvaluator(ds.P, ds.Q, cell, element, steer, settings.mainlobe, settings.final_oversample)(grid)
    kern = DirectivityKernel(cell, ds.P, ds.Q, element, steer, settings.quad)
    d = kern.directivity(grid.weights)
    bw = max_hpbw(grid, cell, element, settings.phi_steps, steer)
    at = pattern_value_at(grid, cell, element, target.u, target.v, steer)
    return MetricsReport(s, d, bw, [(geo.Direction(target.u, target.v), at)])


def synthesize(spec, catalog):
    """Run the four steps with backtracking; raises Infeasible with a per-step trace."""
    trace = []
    cands = step1_select(catalog, spec.sll_t, spec.epsilon_estimate)
    if not cands:
        trace.append({"step": 1, "outcome": "no candidate", "sll_t": spec.sll_t})
        raise Infeasible(f"step 1: no difference set has SLL_SUP <= {spec.sll_t} dB", trace)
    for cand in cands:
        ds = cand.ds
        label = ds.name or f"({ds.P}x{ds.Q},{ds.H},{ds.gamma})"
        trace.append({"step": 1, "outcome": "selected", "ds": label, "sll_sup": cand.sll_sup})
        try:
            lattices = lattice_candidates(ds, spec.target, spec.element, spec.mn_range, spec.cell_box, spec.steer)
        except (ElementInadmissible, NoFeasibleLattice) as exc:
            trace.append({"step": 2, "outcome": type(exc).__name__, "ds": label, "detail": str(exc)})
            continue
        for sol in lattices[: spec.max_lattice_attempts]:
            rep = step3_check(ds, sol.cell, spec.theta_bar, spec.d_t, spec.bw_t)
            entry = {"ds": label, "cell": list(sol.cell.as_tuple()), "m": sol.m, "n": sol.n}
            if not rep.passed:
                trace.append({"step": 3, "outcome": "fail", **entry, "d_inf": rep.d_inf, "bw_sup": rep.bw_sup})
                continue
            sweep = step4_shift_sweep(ds, sol.cell, spec.element, spec.steer, spec.sweep)
            measured = measure_design(ds, sol.cell, spec.element, sweep.sigma_opt, spec.target,
                                      spec.steer, spec.sweep)
            met = {
                "sll": measured.sll <= spec.sll_t,
                "directivity": measured.directivity >= spec.d_t,
                "pattern": measured.pattern_at[0][1] <= spec.target.p_db,
                "bw": measured.bw_max <= spec.bw_t,
            }
            if not all(met.values()):
                trace.append({"step": 4, "outcome": "targets missed", **entry, "met": met})
                continue
            trace.append({"step": 4, "outcome": "success", **entry, "sigma": sweep.sigma_opt})
            bounds = bnd.bounds_report(ds.P, ds.Q, ds.H, ds.gamma, spec.element, sol.cell,
                                       spec.steer, rep.theta_bar)
            Q = ds.Q
            return SynthesisResult("success", ds, sol.cell, (sol.m, sol.n),
                                   (sweep.sigma_opt // Q, sweep.sigma_opt % Q), bounds, measured,
                                   sweep.rows, met, trace)
    raise Infeasible("all candidates exhausted", trace)
