"""Phase-cancellation RCS-reduction formulas, spectra and bandwidth extraction.

The reduction of a surface made of ``n`` cell types repeated ``m_i`` times,
relative to a PEC plate of equal size, is::

    RCSR = 10 log10 | sum_i m_i Gamma_i / sum_i m_i |^2

with complex ``Gamma_i`` (amplitude included). Two cells with unit weights give
the classic checkerboard expression ``10 log10 |(G1 + G2) / 2|^2``.
"""
from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .cellmodel import NORMAL, IncidenceSpec
from .errors import BudgetError, ValidationError

FLOOR_DB = -300.0
"Value reported for (numerically) perfect cancellation."

_FLOOR_POWER = 10.0 ** (FLOOR_DB / 10.0)


@dataclass(frozen=True)
class WeightVector:
    """Repetition counts ``m_i`` of each cell type; ``total`` is the cell budget."""

    counts: tuple[int, ...]

    def __post_init__(self):
        raw = tuple(self.counts)
        if len(raw) < 2:
            raise BudgetError(f"a weight vector needs at least 2 cell types, got {len(raw)}")
        counts = []
        for m in raw:
            if isinstance(m, (bool, np.bool_)) or int(m) != m:
                raise BudgetError(f"counts must be integers, got {raw}")
            counts.append(int(m))
        if any(m < 0 for m in counts):
            raise BudgetError(f"counts must be non-negative, got {counts}")
        if sum(counts) <= 0:
            raise BudgetError("at least one count must be positive")
        object.__setattr__(self, "counts", tuple(counts))

    @classmethod
    def uniform(cls, n: int, total: int) -> "WeightVector":
        """Spread ``total`` as evenly as possible, remainder to the lowest indices."""
        q, r = divmod(int(total), int(n))
        return cls(tuple(q + 1 if i < r else q for i in range(n)))

    @property
    def n(self) -> int:
        return len(self.counts)

    @property
    def total(self) -> int:
        return sum(self.counts)

    def as_array(self) -> NDArray[np.int64]:
        return np.array(self.counts, dtype=np.int64)

    def __len__(self):
        return len(self.counts)

    def __iter__(self):
        return iter(self.counts)


REFERENCE_WEIGHTS = WeightVector((104, 112, 164, 196, 412, 336, 276))


@dataclass(frozen=True)
class FrequencyGrid:
    f_start: float
    f_stop: float
    n_points: int

    def __post_init__(self):
        if not self.f_start < self.f_stop:
            raise ValidationError(f"f_start ({self.f_start}) must be below f_stop ({self.f_stop})")
        if not (self.f_start > 0):
            raise ValidationError("f_start must be positive")
        if int(self.n_points) != self.n_points or self.n_points < 2:
            raise ValidationError(f"n_points must be an integer >= 2, got {self.n_points}")

    @property
    def freqs(self) -> NDArray[np.float64]:
        return np.linspace(self.f_start, self.f_stop, int(self.n_points))

    @property
    def step(self) -> float:
        return (self.f_stop - self.f_start) / (self.n_points - 1)


@dataclass(frozen=True, eq=False)
class RcsSpectrum:
    freq_GHz: NDArray[np.float64]
    rcsr_dB: NDArray[np.float64]
    incidence: IncidenceSpec = NORMAL
    source: str = "formula"

    def __post_init__(self):
        f = np.asarray(self.freq_GHz, dtype=float)
        r = np.asarray(self.rcsr_dB, dtype=float)
        if f.ndim != 1 or f.shape != r.shape:
            raise ValidationError("frequency and rcsr arrays must be 1-D and equally long")
        if np.any(np.diff(f) <= 0):
            raise ValidationError("spectrum frequencies must be strictly increasing")
        object.__setattr__(self, "freq_GHz", f)
        object.__setattr__(self, "rcsr_dB", r)

    def __len__(self):
        return self.freq_GHz.size


@dataclass(frozen=True)
class Band:
    f_lo: float
    f_hi: float

    def __post_init__(self):
        if not self.f_lo < self.f_hi:
            raise ValidationError(f"band needs f_lo < f_hi, got ({self.f_lo}, {self.f_hi})")

    @property
    def width(self) -> float:
        return self.f_hi - self.f_lo

    @property
    def fractional_bw(self) -> float:
        """Fractional bandwidth ``2 (f_hi - f_lo) / (f_hi + f_lo)`` in percent."""
        return 200.0 * (self.f_hi - self.f_lo) / (self.f_hi + self.f_lo)

    def to_dict(self) -> dict:
        return {"f_lo": self.f_lo, "f_hi": self.f_hi, "fractional_bw_percent": self.fractional_bw}


def _to_db(power):
    p = np.asarray(power, dtype=float)
    with np.errstate(divide="ignore"):
        out = np.where(p <= _FLOOR_POWER, FLOOR_DB, 10.0 * np.log10(np.maximum(p, _FLOOR_POWER)))
    return out if out.ndim else float(out)


def rcsr_two(gamma1: complex, gamma2: complex) -> float:
    """Checkerboard reduction of two equally weighted cells, in dB."""
    return _to_db(abs((gamma1 + gamma2) / 2.0) ** 2)


def rcsr_weighted(gammas: ArrayLike, weights: WeightVector | Sequence[int]):
    """Weighted phase-cancellation reduction in dB.

    ``gammas`` has shape ``(n,)`` or ``(n, n_freq)``; the result is a float or
    an ``(n_freq,)`` array.
    """
    g = np.asarray(gammas, dtype=complex)
    m = np.asarray(tuple(weights), dtype=float)
    if g.shape[0] != m.size:
        raise ValidationError(f"{g.shape[0]} reflection coefficients for {m.size} weights")
    if m.sum() <= 0:
        raise BudgetError("weights must have a positive sum")
    s = np.tensordot(m, g, axes=(0, 0)) / m.sum()
    return _to_db(np.abs(s) ** 2)


def rcsr_spectrum(provider, weights: WeightVector, grid: FrequencyGrid | ArrayLike, inc: IncidenceSpec = NORMAL) -> RcsSpectrum:
    """RCSR over a frequency grid from a reflection provider (one type per weight)."""
    f = grid.freqs if isinstance(grid, FrequencyGrid) else np.asarray(grid, dtype=float)
    if provider.n_types != len(weights):
        raise ValidationError(f"provider has {provider.n_types} types but {len(weights)} weights were given")
    return RcsSpectrum(f, rcsr_weighted(provider.gammas(f, inc), weights), inc, "formula")


def _crossing(f0, r0, f1, r1, thr):
    if r1 == r0:
        return f0
    return f0 + (thr - r0) * (f1 - f0) / (r1 - r0)


def threshold_band(spec: RcsSpectrum, threshold_dB: float = -10.0) -> list[Band]:
    """Contiguous runs with ``rcsr_dB <= threshold_dB``, widest first.

    Edges are refined by linear interpolation between the samples bracketing
    each crossing; a run touching the end of the spectrum stops at that sample.
    Single-sample runs that cannot be widened by interpolation are dropped.
    """
    f, r = spec.freq_GHz, spec.rcsr_dB
    if f.size == 0:
        raise ValidationError("empty spectrum")
    below = r <= threshold_dB
    bands = []
    i = 0
    n = f.size
    while i < n:
        if not below[i]:
            i += 1
            continue
        j = i
        while j + 1 < n and below[j + 1]:
            j += 1
        lo = f[i] if i == 0 else _crossing(f[i - 1], r[i - 1], f[i], r[i], threshold_dB)
        hi = f[j] if j == n - 1 else _crossing(f[j], r[j], f[j + 1], r[j + 1], threshold_dB)
        if hi > lo:
            bands.append(Band(float(lo), float(hi)))
        i = j + 1
    bands.sort(key=lambda b: (-b.width, b.f_lo))
    return bands


def _in_band(f, band, tol=1e-9):
    lo, hi = band
    span = max(abs(lo), abs(hi), 1.0)
    return (f >= lo - tol * span) & (f <= hi + tol * span)


def objective_worst_case(spec: RcsSpectrum, band: tuple[float, float]) -> float:
    """Highest (worst) RCSR in dB over samples inside ``band``; lower is better."""
    sel = _in_band(spec.freq_GHz, band)
    if not np.any(sel):
        raise ValidationError(f"no spectrum samples inside band {band}")
    return float(np.max(spec.rcsr_dB[sel]))


def objective_bandwidth(spec: RcsSpectrum, threshold_dB: float = -10.0) -> float:
    """Negative fractional bandwidth (percent) of the widest run below threshold."""
    bands = threshold_band(spec, threshold_dB)
    return -max((b.fractional_bw for b in bands), default=0.0)


@dataclass
class SpectrumObjective:
    """Fitness function ``WeightVector -> float`` over a fixed palette and grid.

    Reflection coefficients are evaluated once; each call is then a weighted sum
    over the cached ``(n_types, n_freq)`` matrix.
    """

    provider: object
    freqs: NDArray[np.float64]
    kind: str = "minimax"
    band: tuple[float, float] = (11.3, 32.3)
    threshold_dB: float = -10.0
    inc: IncidenceSpec = NORMAL
    _gammas: NDArray[np.complex128] = field(init=False, repr=False)

    def __post_init__(self):
        if self.kind not in ("minimax", "bandwidth"):
            raise ValidationError(f"unknown objective {self.kind!r}; use 'minimax' or 'bandwidth'")
        self.freqs = np.asarray(self.freqs, dtype=float)
        if self.kind == "minimax":
            sel = _in_band(self.freqs, self.band)
            if not np.any(sel):
                raise ValidationError(f"no grid samples inside band {self.band}")
            self.freqs = self.freqs[sel]
        self._gammas = self.provider.gammas(self.freqs, self.inc)

    def spectrum(self, weights) -> RcsSpectrum:
        return RcsSpectrum(self.freqs, rcsr_weighted(self._gammas, weights), self.inc)

    def __call__(self, weights) -> float:
        spec = self.spectrum(weights)
        if self.kind == "minimax":
            return float(np.max(spec.rcsr_dB))
        return objective_bandwidth(spec, self.threshold_dB)
