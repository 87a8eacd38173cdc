"""Largest level away from the beam and its lattice images: difference set vs random thinning."""
import sys
from dataclasses import dataclass

from _config import parse
from dsthin import diffsets as dsm
from dsthin import geometry as geo
from dsthin import sequences as seq
from dsthin.metrics import MainlobeSpec, sll
from dsthin.pattern import ElementPattern, pattern_grid_fft


@dataclass
class Config:
    p: int = 17
    d2x: tuple = (0.1, 0.3, 0.5)
    seeds: int = 10
    mainlobe: str = "cell"


def level(grid, cell, ml):
    ep = ElementPattern.isotropic()
    return sll(pattern_grid_fft(grid, cell, ep, 16), ml, ep)


def run(cfg):
    ds = dsm.twin_prime(cfg.p, cfg.p + 2)
    ml = MainlobeSpec(cfg.mainlobe)
    for x in cfg.d2x:
        cell = geo.make_unit_cell(0.5, 0.0, x, 0.5)
        rnd = [level(seq.random_thinned(ds.P, ds.Q, ds.tau, s), cell, ml) for s in range(cfg.seeds)]
        print(f"d2x={x:.2f}: DS {level(ds.grid(), cell, ml):6.2f} dB, random "
              f"{min(rnd):6.2f}..{max(rnd):6.2f} dB over {cfg.seeds} seeds")


if __name__ == "__main__":
    run(parse(Config, sys.argv[1:], __doc__))
