"""Command-line front end.

Subcommands::

    dsthin ds construct ...      build a difference set and write it to a file
    dsthin ds validate FILE      check a difference-set file
    dsthin bounds --config C     closed-form bounds as JSON
    dsthin predict --config C    samples.csv, pattern.csv, glmap.csv
    dsthin sweep --config C      sweep.csv over every cyclic shift
    dsthin synthesize --config C result.json, layout.ds, sweep.csv, pattern.csv

Exit codes: 0 success, 1 usage or configuration error, 2 infeasible design,
3 numerical failure.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np
import yaml

from . import __version__
from . import diffsets as dsm
from . import dsbounds as bnd
from . import geometry as geo
from . import metrics as met
from . import pattern as pat
from . import sequences as seq
from . import synthesis as syn
from .errors import DsThinError, Infeasible, NotADifferenceSet

EXIT_OK, EXIT_CONFIG, EXIT_INFEASIBLE, EXIT_NUMERIC = 0, 1, 2, 3
DB_FLOOR = -200.0
SCHEMA_VERSION = "1.0"


class ConfigError(Exception):
    pass


def fmt(x):
    """Fixed float formatting used in every output file."""
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.6e}"


def fmt_db(x):
    return "-inf" if x < DB_FLOOR else fmt(x)


def _db(x):
    return 10 * math.log10(x) if x > 0 else -math.inf


def _json_num(x):
    x = float(x)
    if math.isnan(x):
        return None
    if math.isinf(x) or x < DB_FLOOR:
        return "-inf" if x < 0 else "inf"
    return float(fmt(x))


# configuration -------------------------------------------------------------

@dataclass
class RunConfig:
    command: str
    out: Path
    base: Path
    raw: dict = field(default_factory=dict)
    seed: int = 0
    workers: int = 1

    def get(self, key, default=None):
        return self.raw.get(key, default)

    def path(self, p):
        p = Path(p)
        return p if p.is_absolute() else self.base / p


def load_config(args):
    raw = {}
    base = Path.cwd()
    if getattr(args, "config", None):
        cfg = Path(args.config)
        if not cfg.is_file():
            raise ConfigError(f"config file {cfg} not found")
        try:
            raw = yaml.safe_load(cfg.read_text(encoding="utf-8")) or {}
        except yaml.YAMLError as exc:
            raise ConfigError(f"cannot parse {cfg}: {exc}") from exc
        if not isinstance(raw, dict):
            raise ConfigError("config must be a mapping")
        base = cfg.parent.resolve()
    if getattr(args, "oversample", None) is not None:
        raw["oversample"] = args.oversample
    seed = args.seed if getattr(args, "seed", None) is not None else int(raw.get("seed", 0))
    workers = raw.get("workers", 1)
    if os.environ.get("DSTHIN_WORKERS"):
        workers = os.environ["DSTHIN_WORKERS"]
    if getattr(args, "workers", None) is not None:
        workers = args.workers
    try:
        workers = int(workers)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid worker count {workers!r}") from exc
    if workers < 1:
        raise ConfigError("workers must be >= 1")
    out = Path(getattr(args, "out", None) or raw.get("output", "out"))
    if not out.is_absolute() and not getattr(args, "out", None):
        out = base / out
    return RunConfig(args.command, out, base, raw, seed, workers)


def _floats(value, n, name):
    try:
        vals = [float(x) for x in value]
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{name} must be a list of {n} numbers") from exc
    if len(vals) != n:
        raise ConfigError(f"{name} must have {n} entries")
    return vals


def parse_cell(cfg):
    if "cell" not in cfg.raw:
        raise ConfigError("missing 'cell: [d1x, d1y, d2x, d2y]'")
    return geo.make_unit_cell(*_floats(cfg.raw["cell"], 4, "cell"))


def parse_steer(cfg):
    u0, v0 = _floats(cfg.get("steer", [0.0, 0.0]), 2, "steer")
    try:
        return geo.Steering(u0, v0)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def parse_element(cfg):
    spec = cfg.get("element", "isotropic")
    if isinstance(spec, str):
        spec = {"kind": spec}
    kind = spec.get("kind", "isotropic")
    if kind in ("isotropic",):
        return pat.ElementPattern.isotropic()
    if kind in ("cosine", "cosine-y-dipole"):
        return pat.ElementPattern.cosine()
    if kind == "tabulated":
        path = cfg.path(spec.get("file", ""))
        if not path.is_file():
            raise ConfigError(f"element table {path} not found")
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        u_ax, v_ax = np.unique(data[:, 0]), np.unique(data[:, 1])
        if u_ax.size * v_ax.size != data.shape[0]:
            raise ConfigError("element table must be a full regular (u, v) grid")
        order = np.lexsort((data[:, 1], data[:, 0]))
        return pat.ElementPattern.tabulated(u_ax, v_ax, data[order, 2].reshape(u_ax.size, v_ax.size))
    raise ConfigError(f"unknown element kind {kind!r}")


def parse_mainlobe(cfg):
    spec = cfg.get("mainlobe", {}) or {}
    try:
        return met.MainlobeSpec(spec.get("mode", met.CROSS), float(spec.get("cell_radius", 1.0)),
                                spec.get("radius"))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _oversample(cfg, key="oversample", default=16):
    o = int(cfg.get(key, default))  # cfg may be a RunConfig or a plain mapping
    if o < 1 or o > 64:
        raise ConfigError(f"{key} must lie in [1, 64]")
    return o


def _quad(cfg):
    q = cfg.get("quad", list(met.DEFAULT_QUAD))
    nt, nph = (int(x) for x in _floats(q, 2, "quad"))
    if nt < met.DEFAULT_QUAD[0] or nph < met.DEFAULT_QUAD[1]:
        raise ConfigError(f"quad must be at least {list(met.DEFAULT_QUAD)}")
    return nt, nph


def _phi_steps(cfg):
    n = int(cfg.get("phi_steps", 72))
    if n < 36:
        raise ConfigError("phi_steps must be >= 36")
    return n


def construct_ds(spec):
    kind = spec.get("kind")
    if kind == "twin-prime":
        return dsm.twin_prime(int(spec["p"]), int(spec["q"]))
    if kind == "singer":
        ds = dsm.singer_lfsr(int(spec["m"]), spec.get("poly"))
        if "fold" in spec:
            P, Q = (int(x) for x in spec["fold"])
            ds = dsm.crt_fold(ds, P, Q)
        return ds
    if kind == "search":
        found = dsm.brute_force_search(int(spec["P"]), int(spec["Q"]), int(spec["H"]), limit=1)
        if not found:
            raise ConfigError("brute-force search found no difference set")
        return found[0]
    if kind == "trivial":
        P, Q = int(spec["P"]), int(spec["Q"])
        return dsm.make_difference_set(P, Q, [(0, 0)], name=f"single({P}x{Q})")
    raise ConfigError(f"unknown difference-set construction {kind!r}")


def load_ds_entry(cfg, entry):
    if "file" in entry:
        path = cfg.path(entry["file"])
        if not path.is_file():
            raise ConfigError(f"difference-set file {path} not found")
        return dsm.load(path)
    if "construct" in entry:
        return construct_ds(entry["construct"])
    raise ConfigError("difference-set entry needs 'file' or 'construct'")


def parse_excitation(cfg):
    """Returns (grid, ds or None, shift)."""
    src = cfg.get("excitation")
    if not isinstance(src, dict):
        raise ConfigError("missing 'excitation' section")
    if "ones" in src:
        P, Q = (int(x) for x in src["ones"])
        return seq.ExcitationGrid.ones(P, Q), None, (0, 0)
    if "random" in src:
        r = src["random"]
        seed = int(r.get("seed", cfg.seed))
        return seq.random_thinned(int(r["P"]), int(r["Q"]), float(r["tau"]), seed), None, (0, 0)
    ds = load_ds_entry(cfg, src)
    sx, sy = (int(x) for x in src.get("shift", [0, 0]))
    return dsm.to_excitations(ds, sx, sy), ds, (sx, sy)


def parse_theta_bar(cfg, ds, cell):
    spec = cfg.get("theta_bar")
    if spec is None or spec == "default":
        return bnd.ThetaBar.default_rule(ds.P, ds.Q, cell)
    if isinstance(spec, (int, float)):
        return bnd.ThetaBar(float(spec))
    if "value" in spec:
        return bnd.ThetaBar(float(spec["value"]))
    if "calibrate_d_inf" in spec:
        return bnd.ThetaBar.calibrate(ds.P, ds.Q, ds.H, ds.gamma, float(spec["calibrate_d_inf"]))
    if "calibrate_bw_sup" in spec:
        return bnd.ThetaBar.calibrate_bw(ds.P, ds.Q, ds.H, ds.gamma, float(spec["calibrate_bw_sup"]))
    raise ConfigError("theta_bar must be 'default', a number, or {value|calibrate_d_inf|calibrate_bw_sup}")


def parse_sweep_settings(cfg):
    s = cfg.get("sweep", {}) or {}
    return syn.SweepSettings(
        screen_oversample=_oversample(s, "screen_oversample", 8),
        final_oversample=_oversample(s, "final_oversample", cfg.get("oversample", 16)),
        recheck_fraction=float(s.get("recheck_fraction", 0.05)),
        with_directivity=bool(s.get("directivity", True)),
        with_beamwidth=bool(s.get("beamwidth", False)),
        quad=_quad(cfg),
        phi_steps=_phi_steps(cfg),
        mainlobe=parse_mainlobe(cfg),
        workers=cfg.workers,
    )


# writers -------------------------------------------------------------------

def _write_lines(path, lines):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def write_samples(path, grid, ep, cell, steer):
    pred = pat.predict_samples(seq.autocorrelation(grid), ep, cell, steer)
    ref = pred.power[0]
    lines = ["k,l,u,v,P_linear,P_dB_norm"]
    for k, l, u, v, p in zip(pred.k, pred.l, pred.u, pred.v, pred.power):
        norm = _db(p / ref) if ref > 0 else -math.inf
        lines.append(f"{k},{l},{fmt(u)},{fmt(v)},{fmt(max(p, 0.0))},{fmt_db(norm)}")
    _write_lines(path, lines)


def write_pattern(path, grid, ep, cell, steer, oversample):
    pg = pat.pattern_grid_fft(grid, cell, ep, oversample, steer)
    chi, psi = pg.chi, pg.psi
    lines = ["u,v,chi,psi,p_linear,p_db_norm,visible"]
    for u, v, c, s, p, vis in zip(pg.u, pg.v, chi, psi, pg.values, pg.visible):
        norm = _db(p / pg.ref_value) if pg.ref_value > 0 else -math.inf
        lines.append(f"{fmt(u)},{fmt(v)},{fmt(c)},{fmt(s)},{fmt(p)},{fmt_db(norm)},{str(bool(vis)).lower()}")
    _write_lines(path, lines)


def write_glmap(path, cell, steer, max_order=1):
    lines = ["b,c,u,v,visible"]
    for d, b, c in geo.grating_lobes(cell, steer, max_order):
        lines.append(f"{b},{c},{fmt(d.u)},{fmt(d.v)},{str(d.visible).lower()}")
    _write_lines(path, lines)


def write_sweep(path, rows, bounds):
    lines = ["sigma,sigma_x,sigma_y,sll_db,d_db,bw_deg"]
    for r in rows:
        lines.append(f"{r.sigma},{r.sigma_x},{r.sigma_y},{fmt_db(r.sll)},{fmt(r.directivity)},{fmt(r.bw)}")
    lines.append(f"# bounds sll_inf={fmt_db(bounds.sll_inf)} sll_sup={fmt_db(bounds.sll_sup)} "
                 f"d_inf={fmt(bounds.d_inf)} bw_sup={fmt(bounds.bw_sup)}")
    _write_lines(path, lines)


def _bounds_dict(b):
    return {
        "sll_inf_db": _json_num(b.sll_inf),
        "sll_sup_db": _json_num(b.sll_sup),
        "d_inf_db": _json_num(b.d_inf),
        "bw_sup_deg": _json_num(b.bw_sup),
        "epsilon": _json_num(b.epsilon),
        "peak_level": _json_num(b.peak_level),
        "offpeak_level": _json_num(b.offpeak_level),
        "mc_rhs": _json_num(b.mc_rhs),
        "theta_bar_deg": _json_num(math.degrees(b.theta_bar.value)),
        "theta_bar_provenance": b.theta_bar.provenance,
    }


def _write_json(path, obj):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(obj, indent=2, sort_keys=False) + "\n", encoding="utf-8")


def result_schema():
    return json.loads(resources.files("dsthin").joinpath("schemas/result.schema.json").read_text(encoding="utf-8"))


# commands ------------------------------------------------------------------

def cmd_ds(args):
    if args.ds_command == "validate":
        try:
            ds = dsm.load(args.file)
        except NotADifferenceSet as exc:
            print(f"invalid: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        print(f"ok: {ds.P}x{ds.Q} H={ds.H} gamma={ds.gamma}")
        return EXIT_OK
    spec = {"kind": args.kind, "p": args.p, "q": args.q, "m": args.m, "poly": args.poly,
            "P": args.P, "Q": args.Q, "H": args.H}
    if args.fold:
        spec["fold"] = [int(x) for x in args.fold.lower().split("x")]
    ds = construct_ds(spec)
    dsm.save(ds, args.output)
    print(f"wrote {args.output}: {ds.P}x{ds.Q} H={ds.H} gamma={ds.gamma}")
    return EXIT_OK


def cmd_bounds(cfg):
    cell, steer, ep = parse_cell(cfg), parse_steer(cfg), parse_element(cfg)
    _, ds, _ = parse_excitation(cfg)
    if ds is None:
        raise ConfigError("bounds need a difference-set excitation")
    b = bnd.bounds_report(ds.P, ds.Q, ds.H, ds.gamma, ep, cell, steer, parse_theta_bar(cfg, ds, cell))
    _write_json(cfg.out / "bounds.json", _bounds_dict(b))
    return EXIT_OK


def cmd_predict(cfg):
    cell, steer, ep = parse_cell(cfg), parse_steer(cfg), parse_element(cfg)
    grid, _, _ = parse_excitation(cfg)
    write_samples(cfg.out / "samples.csv", grid, ep, cell, steer)
    write_pattern(cfg.out / "pattern.csv", grid, ep, cell, steer, _oversample(cfg, "pattern_oversample",
                                                                             cfg.get("oversample", 16)))
    write_glmap(cfg.out / "glmap.csv", cell, steer, int(cfg.get("gl_order", 1)))
    return EXIT_OK


def cmd_sweep(cfg):
    cell, steer, ep = parse_cell(cfg), parse_steer(cfg), parse_element(cfg)
    _, ds, _ = parse_excitation(cfg)
    if ds is None:
        raise ConfigError("sweep needs a difference-set excitation")
    settings = parse_sweep_settings(cfg)
    res = syn.step4_shift_sweep(ds, cell, ep, steer, settings)
    b = bnd.bounds_report(ds.P, ds.Q, ds.H, ds.gamma, ep, cell, steer, parse_theta_bar(cfg, ds, cell))
    write_sweep(cfg.out / "sweep.csv", res.rows, b)
    return EXIT_OK


def parse_synthesis_spec(cfg):
    s = cfg.get("synthesis")
    if not isinstance(s, dict):
        raise ConfigError("missing 'synthesis' section")
    try:
        u, v, p = _floats(s["target"], 3, "synthesis.target")
        box = s.get("cell_box", {}) or {}
        defaults = syn.CellBox()
        cell_box = syn.CellBox(
            tuple(_floats(box.get("d1x", defaults.d1x), 2, "d1x")),
            tuple(_floats(box.get("d1y", defaults.d1y), 2, "d1y")),
            tuple(_floats(box.get("d2x", defaults.d2x), 2, "d2x")),
            tuple(_floats(box.get("d2y", defaults.d2y), 2, "d2y")),
            float(box.get("step", defaults.step)),
        )
        return dict(
            sll_t=float(s["sll_t"]), d_t=float(s["d_t"]), bw_t=float(s["bw_t"]),
            target=syn.PatternTarget(u, v, p), steer=parse_steer(cfg), element=parse_element(cfg),
            cell_box=cell_box, mn_range=tuple(int(x) for x in s.get("mn_range", [-10, 10])),
            epsilon_estimate=float(s.get("epsilon_estimate", 1.0)),
            sweep=parse_sweep_settings(cfg),
            max_lattice_attempts=int(s.get("max_lattice_attempts", 25)),
        )
    except KeyError as exc:
        raise ConfigError(f"synthesis section lacks {exc}") from exc
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def cmd_synthesize(cfg):
    fields = parse_synthesis_spec(cfg)
    catalog = [load_ds_entry(cfg, e) for e in (cfg.get("catalog") or [])]
    if not catalog:
        raise ConfigError("synthesis needs a non-empty 'catalog'")
    tb_spec = cfg.get("theta_bar")
    # a calibration refers to one set's descriptors, so it is resolved per set
    theta_bar = None
    if tb_spec not in (None, "default"):
        theta_bar = parse_theta_bar(cfg, catalog[0], None)
    spec = syn.SynthesisSpec(theta_bar=theta_bar, **fields)
    try:
        res = syn.synthesize(spec, catalog)
    except Infeasible as exc:
        _write_json(cfg.out / "diagnostic.json", {"schema_version": SCHEMA_VERSION, "status": "infeasible",
                                                 "message": str(exc), "trace": _clean(exc.trace)})
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    ds_shifted = res.ds.shifted(*res.sigma_opt)
    dsm.save(ds_shifted, cfg.out / "layout.ds")
    b = res.bounds
    write_sweep(cfg.out / "sweep.csv", res.per_shift, b)
    write_pattern(cfg.out / "pattern.csv", res.layout(), spec.element, res.cell, spec.steer,
                  _oversample(cfg, "pattern_oversample", 4))
    m = res.measured
    target_dir, target_db = m.pattern_at[0]
    result = {
        "schema_version": SCHEMA_VERSION,
        "tool_version": __version__,
        "status": res.status,
        "ds": {"P": res.ds.P, "Q": res.ds.Q, "H": res.ds.H, "gamma": res.ds.gamma, "name": res.ds.name},
        "cell": {"d1x": _json_num(res.cell.d1x), "d1y": _json_num(res.cell.d1y),
                 "d2x": _json_num(res.cell.d2x), "d2y": _json_num(res.cell.d2y),
                 "nu": _json_num(res.cell.nu)},
        "m": res.mn[0],
        "n": res.mn[1],
        "sigma_opt": {"sigma": res.sigma, "sigma_x": res.sigma_opt[0], "sigma_y": res.sigma_opt[1]},
        "bounds": _bounds_dict(b),
        "measured": {
            "sll_db": _json_num(m.sll),
            "directivity_db": _json_num(m.directivity),
            "bw_max_deg": _json_num(m.bw_max),
            "pattern_at_target_db": _json_num(target_db),
            "target": {"u": target_dir.u, "v": target_dir.v},
        },
        "targets": {"sll_db": spec.sll_t, "directivity_db": spec.d_t, "bw_deg": spec.bw_t,
                    "pattern_db": spec.target.p_db},
        "met": {k: bool(v) for k, v in res.met.items()},
        "trace": _clean(res.trace),
    }
    _write_json(cfg.out / "result.json", result)
    return EXIT_OK


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return _json_num(obj)
    return obj


# entry point ---------------------------------------------------------------

def build_parser():
    p = argparse.ArgumentParser(prog="dsthin", description=__doc__.split("\n")[0])
    p.add_argument("--version", action="version", version=f"dsthin {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    ds = sub.add_parser("ds", help="construct or validate difference-set files")
    dsub = ds.add_subparsers(dest="ds_command", required=True)
    c = dsub.add_parser("construct")
    c.add_argument("--kind", required=True, choices=["twin-prime", "singer", "search", "trivial"])
    c.add_argument("--p", type=int)
    c.add_argument("--q", type=int)
    c.add_argument("--m", type=int)
    c.add_argument("--poly", type=lambda s: int(s, 0))
    c.add_argument("--fold", help="PxQ for CRT folding a cyclic set")
    c.add_argument("--P", type=int)
    c.add_argument("--Q", type=int)
    c.add_argument("--H", type=int)
    c.add_argument("-o", "--output", required=True)
    v = dsub.add_parser("validate")
    v.add_argument("file")

    for name in ("bounds", "predict", "sweep", "synthesize"):
        s = sub.add_parser(name)
        s.add_argument("--config", required=True)
        s.add_argument("--out")
        s.add_argument("--seed", type=int)
        s.add_argument("--workers", type=int)
        s.add_argument("--oversample", type=int)
    return p


COMMANDS = {"bounds": cmd_bounds, "predict": cmd_predict, "sweep": cmd_sweep, "synthesize": cmd_synthesize}


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    try:
        if args.command == "ds":
            return cmd_ds(args)
        cfg = load_config(args)
        cfg.out.mkdir(parents=True, exist_ok=True)
        return COMMANDS[args.command](cfg)
    except (ConfigError, FileNotFoundError, KeyError, TypeError, ValueError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Infeasible as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (DsThinError, FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
