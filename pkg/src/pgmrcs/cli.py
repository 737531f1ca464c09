"""Command-line front end: ``pgmrcs {cell-sweep,optimize,layout,rcs}``.

Exit codes: 0 success, 2 invalid input or config, 3 numerical failure,
4 file I/O failure. All inputs are read and validated before the output
directory is touched.
"""
from __future__ import annotations

import argparse
import dataclasses
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .cellmodel import IncidenceSpec, PhaseTable, find_resonances
from .config import OBJECTIVES, RunConfig, load_config
from .errors import CoverageError, NumericalError, PgmError, ValidationError
from .exportio import (
    RunManifest,
    fmt,
    pattern_filename,
    read_layout_json,
    read_phase_table,
    read_weights,
    write_band_json,
    write_ga_report,
    write_layout_json,
    write_layout_svg,
    write_manifest,
    write_pattern_csv,
    write_phase_table,
    write_spectrum_csv,
    write_weights,
)
from .layout import ModulationSpec, build_layout, layout_histogram
from .metrics import SpectrumObjective, WeightVector, rcsr_spectrum, threshold_band
from .optimizer import exhaustive_two, ga_optimize
from .scatter import bistatic_cut, grating_angle_deg, monostatic_spectrum, strongest_lobe

EXIT_OK, EXIT_INVALID, EXIT_NUMERICAL, EXIT_IO = 0, 2, 3, 4


class _Run:
    """Per-command state: config, manifest and the output directory."""

    def __init__(self, args, command):
        self.command = command
        cfg = load_config(args.config) if args.config else RunConfig()
        over = {"out_dir": args.out_dir}
        if args.seed is not None:
            over["ga"] = _replace_seed(cfg.ga, args.seed)
        theta = getattr(args, "theta_inc", None)
        pol = getattr(args, "pol", None)
        if theta is not None or pol is not None:
            try:
                over["incidence"] = IncidenceSpec(
                    cfg.incidence.theta_deg if theta is None else theta,
                    cfg.incidence.polarization if pol is None else pol.upper(),
                )
            except ValueError as e:
                raise ValidationError(f"--theta-inc/--pol: {e}") from None
        self.cfg = cfg.with_overrides(**over)
        self.manifest = RunManifest(command, {}, seed=self.cfg.ga.rng_seed)
        if args.config:
            self.manifest.add_input(args.config)
        self.out = Path(self.cfg.out_dir)
        self.table = None
        if self.cfg.phase_table is not None:
            p = self.cfg.resolve(self.cfg.phase_table)
            self.table = read_phase_table(p)
            self.manifest.add_input(p)
            # fail now rather than mid-run if the table lacks a palette type or the band
            prov = self.cfg.provider(self.table)
            prov.gammas(self.cfg.grid.freqs[[0, -1]])

    def provider(self):
        return self.cfg.provider(self.table)

    def start(self):
        self.manifest.config = self.cfg.to_dict()
        self.out.mkdir(parents=True, exist_ok=True)

    def emit(self, path):
        self.manifest.add_artifact(path, self.out)
        return path

    def finish(self):
        write_manifest(self.manifest, self.out)


def _replace_seed(ga, seed):
    try:
        return dataclasses.replace(ga, rng_seed=seed)
    except PgmError as e:
        raise ValidationError(f"--seed: {e}") from None


def _table_crossings(f, ph):
    """0-phase crossings of tabulated data by linear interpolation (wraps skipped)."""
    idx = np.nonzero((np.sign(ph[:-1]) != np.sign(ph[1:])) & (np.abs(np.diff(ph)) < np.pi))[0]
    return [float(f[i] + (f[i + 1] - f[i]) * ph[i] / (ph[i] - ph[i + 1])) for i in idx]


def cmd_cell_sweep(args) -> int:
    run = _Run(args, "cell-sweep")
    cfg = run.cfg
    n = len(cfg.palette)
    if args.type is not None and not 0 <= args.type < n:
        raise ValidationError(f"unknown cell type {args.type}; palette has types 0..{n - 1}")
    types = list(range(n)) if args.type is None else [args.type]
    f = cfg.grid.freqs
    gam = run.provider().gammas(f, cfg.incidence)
    run.start()
    for t in types:
        one = PhaseTable((t,), f, gam[t : t + 1])
        run.emit(write_phase_table(one, run.out / f"cell_{t}.csv"))
        cell = cfg.palette[t]
        if run.table is None:
            res = find_resonances(cell, f, cfg.incidence)
        else:
            res = _table_crossings(f, np.angle(gam[t]))
        shown = ", ".join(f"{fmt(r)} GHz" for r in res) or "none in band"
        print(f"type {t}  gap {fmt(cell.gap_g)} mm  resonance {shown}")
    if len(types) == n:
        run.emit(write_phase_table(PhaseTable(tuple(range(n)), f, gam), run.out / "phase_table.csv"))
    run.finish()
    return EXIT_OK


def cmd_optimize(args) -> int:
    if args.jobs < 1:
        raise ValidationError(f"--jobs must be >= 1, got {args.jobs}")
    run = _Run(args, "optimize")
    cfg = run.cfg
    kind = args.objective or cfg.objective.kind
    n, N = len(cfg.palette), cfg.array.n_cells
    obj = SpectrumObjective(run.provider(), cfg.grid.freqs, kind, cfg.objective.band, cfg.objective.threshold_dB, cfg.incidence)
    uniform = WeightVector.uniform(n, N)
    run.start()
    # the uniform composition seeds the population, so elitism keeps best <= baseline
    if args.jobs > 1:
        with ThreadPoolExecutor(args.jobs) as ex:
            res = ga_optimize(obj, n, N, cfg.ga, map_fn=ex.map, initial=[uniform])
    else:
        res = ga_optimize(obj, n, N, cfg.ga, initial=[uniform])
    base = obj(uniform)
    extra = {
        "objective": kind,
        "band_GHz": list(cfg.objective.band),
        "threshold_dB": cfg.objective.threshold_dB,
        "n_total": N,
        "uniform_weights": list(uniform.counts),
        "uniform_fitness": float(fmt(base)),
    }
    if n == 2:
        w2, f2 = exhaustive_two(obj, N)
        extra["exhaustive_best_weights"] = list(w2.counts)
        extra["exhaustive_best_fitness"] = float(fmt(f2))
    if res.best_fitness > base:
        raise NumericalError(f"GA best {res.best_fitness} is worse than the uniform baseline {base}")
    run.emit(write_ga_report(res, cfg.ga, run.out / "ga_report.json", **extra))
    run.emit(write_weights(res.best, run.out / "weights.json"))
    prov = run.provider()
    run.emit(write_spectrum_csv(rcsr_spectrum(prov, res.best, cfg.grid, cfg.incidence), run.out / "spectrum_best.csv"))
    run.emit(write_spectrum_csv(rcsr_spectrum(prov, uniform, cfg.grid, cfg.incidence), run.out / "spectrum_uniform.csv"))
    run.finish()
    print(f"best weights {list(res.best.counts)}  fitness {fmt(res.best_fitness)}  (uniform {fmt(base)})")
    return EXIT_OK


def cmd_layout(args) -> int:
    run = _Run(args, "layout")
    cfg = run.cfg
    if args.weights is not None:
        counts = read_weights(args.weights)
        run.manifest.add_input(args.weights)
    elif cfg.weights is not None:
        counts = cfg.weights.counts
    else:
        raise ValidationError("no weights: pass --weights FILE or set 'weights' in the config")
    if len(counts) != len(cfg.palette):
        raise ValidationError(f"{len(counts)} weights for a palette of {len(cfg.palette)} cells")
    mod = cfg.modulation
    if args.variant is not None:
        mod = ModulationSpec(mod.period_mm, mod.phase_rad, args.variant)
    lay = build_layout(counts, cfg.palette, cfg.array.P, cfg.array.Q, mod, cfg.array.margin_mm)
    run.cfg = run.cfg.with_overrides(modulation=mod)
    run.start()
    run.emit(write_layout_json(lay, run.out / "layout.json"))
    run.emit(write_layout_svg(lay, run.out / "layout.svg"))
    run.finish()
    print(f"{lay.n_rows}x{lay.n_cols} layout, histogram {list(layout_histogram(lay).counts)}")
    return EXIT_OK


def cmd_rcs(args) -> int:
    run = _Run(args, "rcs")
    cfg = run.cfg
    path = args.layout or (str(cfg.resolve(cfg.layout)) if cfg.layout else None)
    if path is None:
        raise ValidationError("no layout: pass --layout FILE or set 'layout' in the config")
    lay = read_layout_json(path)
    run.manifest.add_input(path)
    prov = run.provider()
    if prov.n_types != lay.n_types:
        raise CoverageError(f"layout uses {lay.n_types} cell types but the configuration provides {prov.n_types}")
    inc = cfg.incidence
    if args.mode == "mono":
        spec = monostatic_spectrum(lay, prov, cfg.grid, inc, cfg.observation)
        bands = threshold_band(spec, cfg.objective.threshold_dB)
        run.start()
        run.emit(write_spectrum_csv(spec, run.out / "spectrum.csv"))
        run.emit(write_band_json(bands, run.out / "bands.json", cfg.objective.threshold_dB))
        run.finish()
        if bands:
            b = bands[0]
            print(f"widest band {fmt(b.f_lo)}-{fmt(b.f_hi)} GHz ({fmt(b.fractional_bw)} %)")
        else:
            print(f"no band below {fmt(cfg.objective.threshold_dB)} dB")
        return EXIT_OK
    freqs = args.freq or []
    if not freqs:
        raise ValidationError("bistatic mode needs at least one --freq")
    pats = [bistatic_cut(lay, prov, f, inc, cfg.scatter, diffuse=args.diffuse) for f in freqs]
    run.start()
    for f, pat in zip(freqs, pats):
        run.emit(write_pattern_csv(pat, run.out / pattern_filename(f)))
        th, lv = strongest_lobe(pat)
        ga = grating_angle_deg(f, cfg.modulation.period_mm)
        ref = "evanescent" if ga is None else f"{fmt(ga)} deg"
        print(f"{fmt(f)} GHz  strongest lobe {fmt(th)} deg at {fmt(lv)} dB  (first order {ref})")
    run.finish()
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON run configuration")
    common.add_argument("--out-dir", help="output directory (overrides config out_dir)")
    common.add_argument("--seed", type=int, help="GA seed (overrides config ga.rng_seed)")

    inc = argparse.ArgumentParser(add_help=False)
    inc.add_argument("--theta-inc", type=float, help="incidence angle in degrees")
    inc.add_argument("--pol", choices=["TE", "TM", "te", "tm"], help="polarization")

    p = argparse.ArgumentParser(prog="pgmrcs", description="Modulated-surface RCS reduction toolkit")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("cell-sweep", parents=[common, inc], help="reflection of palette cells over the grid")
    g = s.add_mutually_exclusive_group()
    g.add_argument("--type", type=int, help="single palette index")
    g.add_argument("--all", action="store_true", help="every palette cell (default)")
    s.set_defaults(func=cmd_cell_sweep)

    s = sub.add_parser("optimize", parents=[common, inc], help="GA search for the weight vector")
    s.add_argument("--objective", choices=OBJECTIVES)
    s.add_argument("--jobs", type=int, default=1, help="threads for fitness evaluation")
    s.set_defaults(func=cmd_optimize)

    s = sub.add_parser("layout", parents=[common], help="synthesize the modulated layout")
    s.add_argument("--weights", help="weights file (JSON or comma/space separated integers)")
    s.add_argument("--variant", choices=["along_x", "quadrant_symmetric"])
    s.set_defaults(func=cmd_layout)

    s = sub.add_parser("rcs", parents=[common, inc], help="monostatic spectrum or bistatic cuts of a layout")
    s.add_argument("--mode", choices=["mono", "bistatic"], default="mono")
    s.add_argument("--layout", help="layout JSON (overrides config layout)")
    s.add_argument("--freq", type=float, action="append", help="bistatic frequency in GHz (repeatable)")
    s.add_argument("--diffuse", action="store_true", help="remove the mean reflection before the bistatic sum")
    s.set_defaults(func=cmd_rcs)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INVALID
    except NumericalError as e:
        print(f"numerical error: {e}", file=sys.stderr)
        return EXIT_NUMERICAL
    except PgmError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as e:
        print(f"I/O error: {e}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
