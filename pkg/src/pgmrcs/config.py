"""Run configuration: one JSON document, validated in full before any work starts.

Every section is optional; missing sections take the defaults below. Errors
name the offending field as ``section.key``.

Example::

    {
      "palette": {"gaps_mm": [0.1, 0.55, 1.0, 1.55, 2.05, 2.5, 2.9], "period_mm": 6.0},
      "grid": {"f_start": 10, "f_stop": 35, "n_points": 251},
      "incidence": {"theta_deg": 0, "polarization": "TE"},
      "modulation": {"period_mm": 24, "phase_rad": 0, "variant": "along_x"},
      "array": {"P": 40, "Q": 40, "margin_mm": 5},
      "ga": {"generations": 200, "rng_seed": 0},
      "objective": {"kind": "minimax", "band": [11.3, 32.3], "threshold_dB": -10},
      "scatter": {"theta_step_deg": 0.25, "element": "isotropic", "observation": "specular"},
      "phase_table": null,
      "weights": null,
      "layout": null,
      "out_dir": "out"
    }
"""
from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path

from .cellmodel import REFERENCE_GAPS_MM, IncidenceSpec, SurrogateProvider, TableProvider, UnitCellSpec
from .errors import BudgetError, PgmError, ValidationError
from .exportio import cell_from_dict, cell_to_dict
from .layout import ModulationSpec
from .metrics import FrequencyGrid, WeightVector
from .optimizer import GaConfig
from .scatter import Observation, ScatterConfig

OBJECTIVES = ("minimax", "bandwidth")


@dataclass(frozen=True)
class ArraySpec:
    P: int = 40
    Q: int = 40
    margin_mm: float = 5.0

    def __post_init__(self):
        for k in ("P", "Q"):
            v = getattr(self, k)
            if isinstance(v, bool) or not isinstance(v, int) or v < 1:
                raise ValidationError(f"{k} must be a positive integer, got {v!r}")
        if not self.margin_mm >= 0:
            raise ValidationError(f"margin_mm must be non-negative, got {self.margin_mm}")

    @property
    def n_cells(self) -> int:
        return self.P * self.Q


@dataclass(frozen=True)
class ObjectiveSpec:
    kind: str = "minimax"
    band: tuple[float, float] = (11.3, 32.3)
    threshold_dB: float = -10.0

    def __post_init__(self):
        if self.kind not in OBJECTIVES:
            raise ValidationError(f"kind must be one of {OBJECTIVES}, got {self.kind!r}")
        band = tuple(float(b) for b in self.band)
        if len(band) != 2 or not band[0] < band[1]:
            raise ValidationError(f"band must be [f_lo, f_hi] with f_lo < f_hi, got {list(self.band)}")
        object.__setattr__(self, "band", band)


def _section(name, cls, raw, convert=None):
    """Build ``cls(**raw)`` and turn any failure into a field-level message."""
    if raw is None:
        raw = {}
    if not isinstance(raw, dict):
        raise ValidationError(f"config field '{name}' must be an object")
    known = {f.name for f in dataclasses.fields(cls)}
    for k in raw:
        if k not in known:
            raise ValidationError(f"config field '{name}.{k}' is not recognised (expected one of {sorted(known)})")
    if convert:
        raw = convert(dict(raw))
    try:
        return cls(**raw)
    except (PgmError, ValueError, TypeError) as e:
        msg = str(e)
        # blame the key the message names, else the key whose value it quotes
        keys = [k for k in raw if k in msg] or [k for k in raw if str(raw[k]) in msg] or (list(raw) if len(raw) == 1 else [])
        where = f"{name}.{keys[0]}" if keys else name
        raise ValidationError(f"config field '{where}': {e}") from None


def _palette(raw) -> tuple[UnitCellSpec, ...]:
    if raw is None:
        raw = {"gaps_mm": list(REFERENCE_GAPS_MM)}
    try:
        if isinstance(raw, list):
            cells = [cell_from_dict(c) for c in raw]
        elif isinstance(raw, dict):
            shared = {k: v for k, v in raw.items() if k != "gaps_mm"}
            if "gaps_mm" not in raw:
                raise ValidationError("needs 'gaps_mm' (or give a list of cell objects)")
            cells = [cell_from_dict({"gap_mm": g, **shared}) for g in raw["gaps_mm"]]
        else:
            raise ValidationError("must be a list of cells or an object with 'gaps_mm'")
    except (PgmError, ValueError, TypeError) as e:
        raise ValidationError(f"config field 'palette': {e}") from None
    gaps = [c.gap_g for c in cells]
    if len(cells) < 2:
        raise ValidationError(f"config field 'palette': needs at least 2 cell types, got {len(cells)}")
    if any(b <= a for a, b in zip(gaps, gaps[1:])):
        raise ValidationError(f"config field 'palette.gaps_mm': must be strictly ascending, got {gaps}")
    if len({c.period_D for c in cells}) != 1:
        raise ValidationError("config field 'palette.period_mm': all cells must share one period")
    return tuple(cells)


def _incidence(raw):
    def conv(d):
        if "polarization" in d:
            d["polarization"] = str(d["polarization"]).upper()
        return d

    return _section("incidence", IncidenceSpec, raw, conv)


@dataclass(frozen=True)
class RunConfig:
    palette: tuple[UnitCellSpec, ...] = tuple(UnitCellSpec(gap_g=g) for g in REFERENCE_GAPS_MM)
    grid: FrequencyGrid = FrequencyGrid(10.0, 35.0, 251)
    incidence: IncidenceSpec = IncidenceSpec()
    modulation: ModulationSpec = ModulationSpec()
    array: ArraySpec = ArraySpec()
    ga: GaConfig = GaConfig()
    objective: ObjectiveSpec = ObjectiveSpec()
    scatter: ScatterConfig = ScatterConfig()
    observation: Observation = Observation.SPECULAR
    phase_table: str | None = None
    weights: WeightVector | None = None
    layout: str | None = None
    out_dir: str = "out"
    base_dir: Path = field(default=Path("."), compare=False)

    def __post_init__(self):
        self._check()

    def _check(self):
        n = len(self.palette)
        if self.weights is not None:
            if self.weights.n != n:
                raise ValidationError(f"config field 'weights': {self.weights.n} entries for a palette of {n} cells")
            if self.weights.total != self.array.n_cells:
                d = self.array.n_cells - self.weights.total
                kind = f"deficit {d}" if d > 0 else f"excess {-d}"
                raise BudgetError(
                    f"config field 'weights': sum {self.weights.total} but the {self.array.P}x{self.array.Q} array holds {self.array.n_cells} cells ({kind})"
                )
        if self.ga.min_count * n > self.array.n_cells:
            raise ValidationError(f"config field 'ga.min_count': {n} x {self.ga.min_count} exceeds {self.array.n_cells} cells")
        lo, hi = self.objective.band
        f = self.grid.freqs
        if self.objective.kind == "minimax" and not (f[0] <= lo + 1e-9 and hi - 1e-9 <= f[-1]):
            raise ValidationError(f"config field 'objective.band': {[lo, hi]} lies outside the grid {f[0]:g}-{f[-1]:g} GHz")

    def resolve(self, p: str | None) -> Path | None:
        if p is None:
            return None
        p = Path(p)
        return p if p.is_absolute() else self.base_dir / p

    def provider(self, table=None):
        """Tabulated data when a phase table is configured, otherwise the surrogate."""
        if table is not None:
            return TableProvider(table, list(range(len(self.palette))))
        return SurrogateProvider(self.palette)

    def with_overrides(self, **kw) -> "RunConfig":
        kw = {k: v for k, v in kw.items() if v is not None}
        return dataclasses.replace(self, **kw) if kw else self

    def to_dict(self) -> dict:
        return {
            "palette": [cell_to_dict(c) for c in self.palette],
            "grid": dataclasses.asdict(self.grid),
            "incidence": {"theta_deg": self.incidence.theta_deg, "polarization": self.incidence.polarization.value},
            "modulation": {
                "period_mm": self.modulation.period_mm,
                "phase_rad": self.modulation.phase_rad,
                "variant": self.modulation.variant.value,
            },
            "array": dataclasses.asdict(self.array),
            "ga": self.ga.to_dict(),
            "objective": {"kind": self.objective.kind, "band": list(self.objective.band), "threshold_dB": self.objective.threshold_dB},
            "scatter": {
                "theta_step_deg": self.scatter.theta_step_deg,
                "element": self.scatter.element.value,
                "observation": self.observation.value,
            },
            "phase_table": self.phase_table,
            "weights": None if self.weights is None else list(self.weights.counts),
            "layout": self.layout,
            "out_dir": self.out_dir,
        }

    @classmethod
    def from_dict(cls, d: dict, base_dir=".") -> "RunConfig":
        if not isinstance(d, dict):
            raise ValidationError("config must be a JSON object")
        known = {"palette", "grid", "incidence", "modulation", "array", "ga", "objective", "scatter", "phase_table", "weights", "layout", "out_dir"}
        for k in d:
            if k not in known:
                raise ValidationError(f"config field '{k}' is not recognised")
        scat = dict(d.get("scatter") or {})
        obs = scat.pop("observation", "specular")
        try:
            observation = Observation(str(obs).lower())
        except ValueError:
            raise ValidationError(f"config field 'scatter.observation': must be specular or backscatter, got {obs!r}") from None
        weights = d.get("weights")
        if weights is not None:
            try:
                weights = WeightVector(tuple(weights))
            except (PgmError, TypeError) as e:
                raise ValidationError(f"config field 'weights': {e}") from None
        for k in ("phase_table", "layout", "out_dir"):
            if d.get(k) is not None and not isinstance(d[k], str):
                raise ValidationError(f"config field '{k}' must be a path string")
        return cls(
            palette=_palette(d.get("palette")),
            grid=_section("grid", FrequencyGrid, d.get("grid")) if d.get("grid") is not None else FrequencyGrid(10.0, 35.0, 251),
            incidence=_incidence(d.get("incidence")),
            modulation=_section("modulation", ModulationSpec, d.get("modulation")),
            array=_section("array", ArraySpec, d.get("array")),
            ga=_section("ga", GaConfig, d.get("ga")),
            objective=_section("objective", ObjectiveSpec, d.get("objective")),
            scatter=_section("scatter", ScatterConfig, scat),
            observation=observation,
            phase_table=d.get("phase_table"),
            weights=weights,
            layout=d.get("layout"),
            out_dir=d.get("out_dir") or "out",
            base_dir=Path(base_dir),
        )


def load_config(path) -> RunConfig:
    """Read and validate a JSON config; relative paths inside resolve against its folder."""
    path = Path(path)
    with open(path, encoding="utf-8") as fh:
        try:
            d = json.load(fh)
        except json.JSONDecodeError as e:
            raise ValidationError(f"{path}: not valid JSON ({e})") from None
    return RunConfig.from_dict(d, base_dir=path.parent)
