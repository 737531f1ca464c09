"""Sinusoidally modulated surface synthesis.

A scalar sinusoid is sampled at the cell centres; cells are then sorted by that
value (ties broken by row-major index) and cut into consecutive blocks of sizes
``m_0, m_1, ...``, so the smallest field values get type 0 (smallest gap) and
the histogram of the layout equals the weight vector exactly.

Array frame: row ``p`` runs along y, column ``q`` along x, cell ``(p, q)`` is
centred at ``((q + 0.5) D, (p + 0.5) D)``. Board coordinates add ``margin`` to both.
"""
from __future__ import annotations

import enum
from collections.abc import Sequence
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from numpy.typing import NDArray

from .cellmodel import UnitCellSpec
from .errors import BudgetError, GeometryError, ValidationError
from .metrics import WeightVector

DEFAULT_MODULATION_PERIOD_MM = 24.0
DEFAULT_MARGIN_MM = 5.0
FIELD_DECIMALS = 12


class Variant(str, enum.Enum):
    ALONG_X = "along_x"
    QUADRANT_SYMMETRIC = "quadrant_symmetric"


@dataclass(frozen=True)
class ModulationSpec:
    period_mm: float = DEFAULT_MODULATION_PERIOD_MM
    phase_rad: float = 0.0
    variant: Variant = Variant.ALONG_X

    def __post_init__(self):
        v = self.variant
        object.__setattr__(self, "variant", v if isinstance(v, Variant) else Variant(str(v).lower()))
        if not self.period_mm > 0:
            raise ValidationError(f"modulation period must be positive, got {self.period_mm}")


def _centred_offsets(n, D):
    # half-integers are exact, so mirrored cells get bit-identical |offset|
    return (np.arange(n) + 0.5 - n / 2.0) * D


def _snap(v):
    # equal-by-geometry samples differ in the last bits; make those ties exact
    return np.round(v, FIELD_DECIMALS) + 0.0


def sinusoid_field(P: int, Q: int, D: float, mod: ModulationSpec = ModulationSpec()) -> NDArray[np.float64]:
    """Modulation field sampled at the ``P x Q`` cell centres.

    ``ALONG_X``: ``sin(2 pi x_q / period + phase)`` with ``x_q = (q + 0.5) D``,
    constant down each column. ``QUADRANT_SYMMETRIC``: mean of the same sinusoid
    evaluated on ``|x - x_c|`` and ``|y - y_c|``, hence mirror-symmetric about
    both board axes.
    """
    if P < 1 or Q < 1:
        raise GeometryError(f"array must have at least one row and column, got {P}x{Q}")
    k = 2.0 * np.pi / mod.period_mm
    if mod.variant is Variant.ALONG_X:
        x = (np.arange(Q) + 0.5) * D
        return np.tile(_snap(np.sin(k * x + mod.phase_rad)), (P, 1))
    sx = np.sin(k * np.abs(_centred_offsets(Q, D)) + mod.phase_rad)
    sy = np.sin(k * np.abs(_centred_offsets(P, D)) + mod.phase_rad)
    return _snap(0.5 * (sy[:, None] + sx[None, :]))


@dataclass(frozen=True, eq=False)
class SurfaceLayout:
    type_grid: NDArray[np.int64]
    palette: tuple[UnitCellSpec, ...]
    period_mm: float = 6.0
    margin_mm: float = DEFAULT_MARGIN_MM

    def __post_init__(self):
        grid = np.asarray(self.type_grid)
        if grid.ndim != 2 or grid.shape[0] < 1 or grid.shape[1] < 1:
            raise GeometryError(f"type_grid must be a non-empty 2-D array, got shape {grid.shape}")
        if not np.issubdtype(grid.dtype, np.integer):
            raise ValidationError("type_grid must hold integer type indices")
        palette = tuple(self.palette)
        if not palette:
            raise ValidationError("empty palette")
        if grid.min() < 0 or grid.max() >= len(palette):
            raise ValidationError(f"type indices must lie in [0, {len(palette)})")
        gaps = [c.gap_g for c in palette]
        if any(b <= a for a, b in zip(gaps, gaps[1:])):
            raise ValidationError(f"palette must be ordered by strictly ascending gap, got {gaps}")
        if any(c.period_D != self.period_mm for c in palette):
            raise GeometryError(f"palette cell periods must equal the layout period {self.period_mm} mm")
        if self.margin_mm < 0:
            raise GeometryError("margin must be non-negative")
        grid = grid.astype(np.int64)
        grid.setflags(write=False)
        object.__setattr__(self, "type_grid", grid)
        object.__setattr__(self, "palette", palette)

    @property
    def shape(self) -> tuple[int, int]:
        return self.type_grid.shape

    @property
    def n_rows(self) -> int:
        return self.type_grid.shape[0]

    @property
    def n_cols(self) -> int:
        return self.type_grid.shape[1]

    @property
    def n_types(self) -> int:
        return len(self.palette)

    @property
    def board_size(self) -> tuple[float, float]:
        """Board (width, height) in mm: cells plus a margin on each side."""
        return (self.n_cols * self.period_mm + 2 * self.margin_mm, self.n_rows * self.period_mm + 2 * self.margin_mm)

    def counts(self) -> NDArray[np.int64]:
        return np.bincount(self.type_grid.ravel(), minlength=self.n_types)

    def column_type_counts(self) -> NDArray[np.int64]:
        """``(n_cols, n_types)`` matrix: how many cells of each type sit in each column."""
        out = np.zeros((self.n_cols, self.n_types), dtype=np.int64)
        for t in range(self.n_types):
            out[:, t] = (self.type_grid == t).sum(axis=0)
        return out

    def __eq__(self, other):
        if not isinstance(other, SurfaceLayout):
            return NotImplemented
        return (
            np.array_equal(self.type_grid, other.type_grid)
            and self.palette == other.palette
            and self.period_mm == other.period_mm
            and self.margin_mm == other.margin_mm
        )


def assign_types(
    field: NDArray[np.float64],
    weights: WeightVector | Sequence[int],
    palette: Sequence[UnitCellSpec],
    period_mm: float | None = None,
    margin_mm: float = DEFAULT_MARGIN_MM,
) -> SurfaceLayout:
    """Sorted-partition assignment: lowest field values get type 0, and so on."""
    field = np.asarray(field, dtype=float)
    if field.ndim != 2 or field.size == 0:
        raise GeometryError(f"field must be a non-empty 2-D array, got shape {field.shape}")
    counts = np.asarray(tuple(weights), dtype=np.int64)
    palette = tuple(palette)
    if counts.size != len(palette):
        raise ValidationError(f"{counts.size} weights for a palette of {len(palette)} cells")
    if np.any(counts < 0):
        raise BudgetError("weights must be non-negative")
    if counts.sum() != field.size:
        diff = int(field.size - counts.sum())
        kind = f"deficit {diff}" if diff > 0 else f"excess {-diff}"
        raise BudgetError(
            f"weights sum to {int(counts.sum())} but the {field.shape[0]}x{field.shape[1]} array holds {field.size} cells ({kind})"
        )
    order = np.argsort(field.ravel(), kind="stable")
    flat = np.empty(field.size, dtype=np.int64)
    flat[order] = np.repeat(np.arange(counts.size), counts)
    if period_mm is None:
        period_mm = palette[0].period_D
    return SurfaceLayout(flat.reshape(field.shape), palette, period_mm, margin_mm)


def layout_histogram(layout: SurfaceLayout) -> WeightVector:
    return WeightVector(tuple(layout.counts()))


class Patch(NamedTuple):
    x: float
    y: float
    edge: float
    type_index: int


def patch_geometry(layout: SurfaceLayout) -> list[Patch]:
    """One centred square per cell in board coordinates (mm), row-major order."""
    D, m = layout.period_mm, layout.margin_mm
    edges = [c.patch_edge for c in layout.palette]
    out = []
    for p in range(layout.n_rows):
        y = m + (p + 0.5) * D
        for q in range(layout.n_cols):
            t = int(layout.type_grid[p, q])
            out.append(Patch(m + (q + 0.5) * D, y, edges[t], t))
    return out


def build_layout(
    weights: WeightVector | Sequence[int],
    palette: Sequence[UnitCellSpec],
    n_rows: int = 40,
    n_cols: int = 40,
    mod: ModulationSpec = ModulationSpec(),
    margin_mm: float = DEFAULT_MARGIN_MM,
) -> SurfaceLayout:
    """``sinusoid_field`` followed by ``assign_types``."""
    D = palette[0].period_D
    return assign_types(sinusoid_field(n_rows, n_cols, D, mod), weights, palette, D, margin_mm)
