"""Closed-form bounds for the built-in difference sets on a chosen lattice."""
import sys
from dataclasses import dataclass

from _config import parse
from dsthin import diffsets as dsm
from dsthin import dsbounds as bd
from dsthin import geometry as geo
from dsthin.pattern import ElementPattern


@dataclass
class Config:
    cell: tuple = (0.5, 0.0, 0.0, 0.5)
    element: str = "isotropic"


def catalog():
    yield dsm.twin_prime(11, 13)
    yield dsm.twin_prime(17, 19)
    yield dsm.twin_prime(29, 31)
    yield dsm.crt_fold(dsm.singer_lfsr(8), 15, 17)
    yield dsm.crt_fold(dsm.singer_lfsr(10), 31, 33)


def run(cfg):
    cell = geo.make_unit_cell(*cfg.cell)
    ep = ElementPattern(cfg.element)
    print(f"{'set':>22s} {'SLL_INF':>8s} {'SLL_SUP':>8s} {'D_INF':>7s} {'BW_SUP':>7s} {'eps':>6s}")
    for ds in catalog():
        r = bd.bounds_report(ds.P, ds.Q, ds.H, ds.gamma, ep, cell)
        label = f"({ds.P}x{ds.Q},{ds.H},{ds.gamma})"
        print(f"{label:>22s} {r.sll_inf:8.2f} {r.sll_sup:8.2f} {r.d_inf:7.2f} {r.bw_sup:7.2f} {r.epsilon:6.3f}")


if __name__ == "__main__":
    run(parse(Config, sys.argv[1:], __doc__))
