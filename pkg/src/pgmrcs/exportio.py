"""Reading and writing of every file the toolkit exchanges.

Floats go out with 6 significant digits, files are UTF-8 with LF line endings,
and nothing time-dependent is written except the manifest timestamp, so two
runs on the same inputs produce byte-identical artifacts.
"""
from __future__ import annotations

import csv
import hashlib
import json
import os
from collections.abc import Iterable, Sequence
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .cellmodel import PhaseTable, UnitCellSpec
from .errors import TableError, ValidationError
from .layout import SurfaceLayout, patch_geometry
from .metrics import Band, RcsSpectrum
from .optimizer import GaConfig, GaResult
from .scatter import BistaticPattern

PHASE_TABLE_HEADER = ("type_id", "freq_GHz", "re", "im")
SPECTRUM_HEADER = ("freq_GHz", "rcsr_dB")
PATTERN_HEADER = ("theta_deg", "level_dB")
MANIFEST_NAME = "manifest.json"

PATCH_FILL = "#b87333"


def fmt(x: float) -> str:
    """6 significant digits, no negative zero."""
    s = f"{float(x):.6g}"
    return "0" if s == "-0" else s


def round6(x: float) -> float:
    return float(fmt(x))


def _write_text(path, text: str) -> Path:
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    return path


def _csv_text(header, rows) -> str:
    lines = [",".join(header)]
    lines.extend(",".join(r) for r in rows)
    return "\n".join(lines) + "\n"


def _read_csv(path, header):
    with open(path, encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or tuple(c.strip() for c in rows[0]) != tuple(header):
        got = rows[0] if rows else []
        raise TableError(f"{path}: expected header {','.join(header)}, got {','.join(got)}")
    # (line number, fields); blank lines are skipped
    return [(i, r) for i, r in enumerate(rows[1:], start=2) if r]


def _floats(row, ln, n):
    if len(row) != n:
        raise TableError(f"row {ln}: expected {n} fields, got {len(row)}")
    try:
        return [float(c) for c in row]
    except ValueError:
        raise TableError(f"row {ln}: non-numeric field in {row}") from None


# phase tables


def read_phase_table(path) -> PhaseTable:
    """Load a ``type_id,freq_GHz,re,im`` table.

    Row numbers in error messages are file line numbers (the header is line 1).
    """
    records, lines = [], []
    for ln, row in _read_csv(path, PHASE_TABLE_HEADER):
        tid, f, re, im = _floats(row, ln, 4)
        if tid != int(tid):
            raise TableError(f"row {ln}: type_id must be an integer, got {row[0]}")
        records.append((int(tid), f, complex(re, im)))
        lines.append(ln)
    return PhaseTable.from_records(records, lines)


def write_phase_table(table: PhaseTable, path) -> Path:
    rows = ((str(t), fmt(f), fmt(g.real), fmt(g.imag)) for t, f, g in table.records())
    return _write_text(path, _csv_text(PHASE_TABLE_HEADER, rows))


# spectra and patterns


def write_spectrum_csv(spec: RcsSpectrum, path) -> Path:
    if len(spec) == 0:
        raise ValidationError("empty spectrum, nothing written")
    rows = ((fmt(f), fmt(r)) for f, r in zip(spec.freq_GHz, spec.rcsr_dB))
    return _write_text(path, _csv_text(SPECTRUM_HEADER, rows))


def read_spectrum_csv(path) -> RcsSpectrum:
    data = np.array([_floats(r, ln, 2) for ln, r in _read_csv(path, SPECTRUM_HEADER)]).reshape(-1, 2)
    return RcsSpectrum(data[:, 0], data[:, 1], source=f"file:{Path(path).name}")


def write_pattern_csv(pat: BistaticPattern, path) -> Path:
    if len(pat) == 0:
        raise ValidationError("empty pattern, nothing written")
    rows = ((fmt(t), fmt(v)) for t, v in zip(pat.theta_deg, pat.level_dB))
    return _write_text(path, _csv_text(PATTERN_HEADER, rows))


def read_pattern_csv(path, freq_GHz: float = float("nan")) -> BistaticPattern:
    data = np.array([_floats(r, ln, 2) for ln, r in _read_csv(path, PATTERN_HEADER)]).reshape(-1, 2)
    return BistaticPattern(freq_GHz, data[:, 0], data[:, 1])


def pattern_filename(freq_GHz: float) -> str:
    return f"pattern_{fmt(freq_GHz)}GHz.csv"


# layouts


def cell_to_dict(c: UnitCellSpec) -> dict:
    return {
        "gap_mm": c.gap_g,
        "period_mm": c.period_D,
        "thickness_mm": c.thickness_d,
        "eps_r": c.eps_r,
        "tan_delta": c.tan_delta,
    }


def cell_from_dict(d: dict) -> UnitCellSpec:
    known = {"gap_mm", "period_mm", "thickness_mm", "eps_r", "tan_delta"}
    if "gap_mm" not in d:
        raise ValidationError("palette entry needs gap_mm")
    unknown = set(d) - known
    if unknown:
        raise ValidationError(f"unknown palette fields {sorted(unknown)}")
    kw = {"gap_g": d["gap_mm"]}
    for k, name in (("period_mm", "period_D"), ("thickness_mm", "thickness_d"), ("eps_r", "eps_r"), ("tan_delta", "tan_delta")):
        if k in d:
            kw[name] = d[k]
    return UnitCellSpec(**kw)


def layout_to_dict(layout: SurfaceLayout) -> dict:
    return {
        "P": layout.n_rows,
        "Q": layout.n_cols,
        "period_mm": layout.period_mm,
        "margin_mm": layout.margin_mm,
        "palette": [cell_to_dict(c) for c in layout.palette],
        "type_grid": layout.type_grid.tolist(),
    }


def layout_from_dict(d: dict) -> SurfaceLayout:
    try:
        grid = np.array(d["type_grid"])
        P, Q = int(d["P"]), int(d["Q"])
        palette = tuple(cell_from_dict(c) for c in d["palette"])
        lay = SurfaceLayout(grid, palette, float(d["period_mm"]), float(d["margin_mm"]))
    except KeyError as e:
        raise ValidationError(f"layout JSON missing field {e.args[0]!r}") from None
    if lay.shape != (P, Q):
        raise ValidationError(f"type_grid is {lay.shape[0]}x{lay.shape[1]} but P x Q says {P}x{Q}")
    return lay


def _json_text(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def write_layout_json(layout: SurfaceLayout, path) -> Path:
    d = layout_to_dict(layout)
    # keep the grid one row per line for diffs
    grid = d.pop("type_grid")
    head = json.dumps(d, indent=2)[:-2]
    rows = ",\n".join("    " + json.dumps(r, separators=(",", ":")) for r in grid)
    return _write_text(path, f'{head},\n  "type_grid": [\n{rows}\n  ]\n}}\n')


def read_layout_json(path) -> SurfaceLayout:
    with open(path, encoding="utf-8") as fh:
        try:
            d = json.load(fh)
        except json.JSONDecodeError as e:
            raise ValidationError(f"{path}: not valid JSON ({e})") from None
    if not isinstance(d, dict):
        raise ValidationError(f"{path}: layout JSON must be an object")
    return layout_from_dict(d)


def layout_svg(layout: SurfaceLayout) -> str:
    W, H = layout.board_size
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{fmt(W)}mm" height="{fmt(H)}mm" viewBox="0 0 {fmt(W)} {fmt(H)}">',
        f'<rect id="board" x="0" y="0" width="{fmt(W)}" height="{fmt(H)}" fill="none" stroke="#000000" stroke-width="0.2"/>',
    ]
    for p in patch_geometry(layout):
        h = p.edge / 2
        out.append(
            f'<rect x="{fmt(p.x - h)}" y="{fmt(p.y - h)}" width="{fmt(p.edge)}" height="{fmt(p.edge)}"'
            f' fill="{PATCH_FILL}" data-type="{p.type_index}"/>'
        )
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_layout_svg(layout: SurfaceLayout, path) -> Path:
    """Board outline plus one square per patch, row-major, mm user units."""
    return _write_text(path, layout_svg(layout))


# reports


def band_report(bands: Sequence[Band], threshold_dB: float = -10.0) -> dict:
    """Widest band at top level (nulls if none) plus the full list."""
    top = bands[0].to_dict() if bands else {"f_lo": None, "f_hi": None, "fractional_bw_percent": None}
    top = {k: (None if v is None else round6(v)) for k, v in top.items()}
    return {
        **top,
        "threshold_dB": round6(threshold_dB),
        "bands": [{k: round6(v) for k, v in b.to_dict().items()} for b in bands],
    }


def write_band_json(bands: Sequence[Band], path, threshold_dB: float = -10.0) -> Path:
    return _write_text(path, _json_text(band_report(bands, threshold_dB)))


def ga_report(result: GaResult, cfg: GaConfig, **extra) -> dict:
    d = {
        "config": cfg.to_dict(),
        "seed": cfg.rng_seed,
        "best_weights": list(result.best.counts),
        "best_fitness": round6(result.best_fitness),
        "evaluations": result.evaluations,
        "history": [[round6(b), round6(m)] for b, m in result.history],
    }
    d.update(extra)
    return d


def write_ga_report(result: GaResult, cfg: GaConfig, path, **extra) -> Path:
    return _write_text(path, _json_text(ga_report(result, cfg, **extra)))


def write_weights(weights: Iterable[int], path) -> Path:
    return _write_text(path, _json_text({"weights": [int(m) for m in weights]}))


def read_weights(path) -> tuple[int, ...]:
    """Weights file: ``{"weights": [...]}``, a bare JSON list, or comma/space separated integers."""
    text = Path(path).read_text(encoding="utf-8")
    try:
        obj = json.loads(text)
    except json.JSONDecodeError:
        obj = text.replace(",", " ").split()
    if isinstance(obj, dict):
        if "weights" not in obj:
            raise ValidationError(f"{path}: JSON weights file needs a 'weights' list")
        obj = obj["weights"]
    if not isinstance(obj, list):
        raise ValidationError(f"{path}: weights must be a list of integers")
    try:
        vals = [float(v) for v in obj]
    except (TypeError, ValueError):
        raise ValidationError(f"{path}: weights must be integers") from None
    if any(v != int(v) for v in vals):
        raise ValidationError(f"{path}: weights must be integers")
    return tuple(int(v) for v in vals)


# manifest


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


@dataclass
class RunManifest:
    """What produced a set of artifacts. Only ``timestamp`` varies between identical runs."""

    command: str
    config: dict
    seed: int | None = None
    inputs: dict[str, str] = field(default_factory=dict)
    artifacts: dict[str, str] = field(default_factory=dict)
    tool_version: str = __version__
    timestamp: str = ""

    def add_input(self, path) -> None:
        self.inputs[os.fspath(path)] = sha256_file(path)

    def add_artifact(self, path, out_dir=None) -> None:
        p = Path(path)
        key = os.fspath(p.relative_to(out_dir)) if out_dir is not None else p.name
        self.artifacts[key] = sha256_file(p)

    def to_dict(self, with_timestamp: bool = True) -> dict:
        d = asdict(self)
        d["artifacts"] = dict(sorted(self.artifacts.items()))
        d["inputs"] = dict(sorted(self.inputs.items()))
        if not with_timestamp:
            d.pop("timestamp")
        return d


def write_manifest(manifest: RunManifest, out_dir) -> Path:
    if not manifest.timestamp:
        manifest.timestamp = datetime.now(timezone.utc).isoformat(timespec="seconds")
    return _write_text(Path(out_dir) / MANIFEST_NAME, _json_text(manifest.to_dict()))


def read_manifest(path) -> RunManifest:
    with open(path, encoding="utf-8") as fh:
        return RunManifest(**json.load(fh))
