"""Measured SLL (and optionally directivity and beamwidth) over every cyclic shift of a twin-prime layout."""
import csv
import sys
from dataclasses import dataclass

import numpy as np

from _config import parse
from dsthin import diffsets as dsm
from dsthin import dsbounds as bd
from dsthin import geometry as geo
from dsthin.metrics import MainlobeSpec
from dsthin.pattern import ElementPattern
from dsthin.synthesis import SweepSettings, step4_shift_sweep


@dataclass
class Config:
    p: int = 11
    cell: tuple = (0.5, 0.0, 0.1, 0.5)
    mainlobe: str = "cross"
    directivity: bool = False
    beamwidth: bool = False
    d_inf_calibration: float = 20.47
    out: str = ""


def run(cfg):
    ds = dsm.twin_prime(cfg.p, cfg.p + 2)
    cell = geo.make_unit_cell(*cfg.cell)
    settings = SweepSettings(with_directivity=cfg.directivity, with_beamwidth=cfg.beamwidth,
                             mainlobe=MainlobeSpec(cfg.mainlobe))
    res = step4_shift_sweep(ds, cell, ElementPattern.isotropic(), settings=settings)
    tb = bd.ThetaBar.calibrate(ds.P, ds.Q, ds.H, ds.gamma, cfg.d_inf_calibration)
    b = bd.sll_bounds(ds.P, ds.Q, ds.H, ds.gamma)
    sll = np.array([r.sll for r in res.rows])
    print(f"{ds.name}: {len(sll)} shifts, SLL {sll.min():.2f}..{sll.max():.2f} dB, best sigma {res.sigma_opt}")
    print(f"bounds: SLL_INF {b.sll_inf:.2f} dB, SLL_SUP {b.sll_sup:.2f} dB, "
          f"D_INF {bd.d_inf(ds.P, ds.Q, ds.H, ds.gamma, tb):.2f} dB, BW_SUP {bd.bw_sup(ds.P, ds.Q, ds.H, ds.gamma, tb):.2f} deg")
    if cfg.out:
        with open(cfg.out, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["sigma", "sll_db", "d_db", "bw_deg"])
            for r in res.rows:
                w.writerow([r.sigma, f"{r.sll:.6f}", f"{r.directivity:.6f}", f"{r.bw:.6f}"])
    return res


if __name__ == "__main__":
    run(parse(Config, sys.argv[1:], __doc__))
