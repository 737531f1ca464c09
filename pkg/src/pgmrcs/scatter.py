"""Scalar array-factor scattering of a modulated surface.

Each cell scatters with its own reflection coefficient; there is no edge
diffraction or coupling. Incidence and observation lie in the x-z plane
(phi = 0 cut), so only the column sums of the per-cell coefficients enter the
far field and the computation is ``O(n_cols)`` per angle.

All levels are relative to a PEC plate of the same aperture (Gamma = -1 in
every cell) evaluated in the same direction convention.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray
from scipy.constants import c as C0
from scipy.integrate import trapezoid

from .cellmodel import NORMAL, IncidenceSpec
from .errors import CoverageError, ValidationError
from .layout import SurfaceLayout
from .metrics import FrequencyGrid, RcsSpectrum, _to_db


class ElementPattern(str, enum.Enum):
    ISOTROPIC = "isotropic"
    COSINE = "cosine"


class Observation(str, enum.Enum):
    SPECULAR = "specular"
    BACKSCATTER = "backscatter"


@dataclass(frozen=True)
class ScatterConfig:
    theta_step_deg: float = 0.25
    element: ElementPattern = ElementPattern.ISOTROPIC

    def __post_init__(self):
        e = self.element
        object.__setattr__(self, "element", e if isinstance(e, ElementPattern) else ElementPattern(str(e).lower()))
        if not self.theta_step_deg > 0:
            raise ValidationError("theta step must be positive")
        n = 180.0 / self.theta_step_deg
        if abs(n - round(n)) > 1e-9:
            raise ValidationError(f"theta step {self.theta_step_deg} deg must divide 180 deg")

    @property
    def thetas(self) -> NDArray[np.float64]:
        return np.linspace(-90.0, 90.0, int(round(180.0 / self.theta_step_deg)) + 1)


@dataclass(frozen=True, eq=False)
class BistaticPattern:
    freq_GHz: float
    theta_deg: NDArray[np.float64]
    level_dB: NDArray[np.float64]
    phi_deg: float = 0.0
    incidence: IncidenceSpec = NORMAL

    def __post_init__(self):
        t = np.asarray(self.theta_deg, dtype=float)
        lv = np.asarray(self.level_dB, dtype=float)
        if t.ndim != 1 or t.shape != lv.shape:
            raise ValidationError("theta and level arrays must be 1-D and equally long")
        if np.any(np.diff(t) <= 0):
            raise ValidationError("theta samples must be strictly increasing")
        object.__setattr__(self, "theta_deg", t)
        object.__setattr__(self, "level_dB", lv)

    def __len__(self):
        return self.theta_deg.size


def _k0(f):
    return 2.0 * np.pi * np.asarray(f, dtype=float) * 1e9 / C0


def _x_centres_m(layout):
    return (np.arange(layout.n_cols) + 0.5) * layout.period_mm * 1e-3


def column_sums(layout: SurfaceLayout, provider, freqs, inc: IncidenceSpec = NORMAL) -> NDArray[np.complex128]:
    """``(n_cols, n_freq)`` sums of Gamma down each column of the layout."""
    if provider.n_types != layout.n_types:
        raise CoverageError(f"provider covers {provider.n_types} types, layout uses {layout.n_types}")
    g = provider.gammas(np.atleast_1d(freqs), inc)
    return layout.column_type_counts() @ g


def backscatter_coefficient(layout: SurfaceLayout, provider, freq_GHz, inc: IncidenceSpec = NORMAL):
    """Normalised monostatic sum ``(1/PQ) sum_pq Gamma_pq exp(-2j k0 x_q sin(theta))``.

    At normal incidence this is exactly the histogram-weighted mean reflection.
    """
    f = np.atleast_1d(np.asarray(freq_GHz, dtype=float))
    S = column_sums(layout, provider, f, inc)
    ramp = np.exp(-2j * np.outer(_x_centres_m(layout), _k0(f)) * np.sin(inc.theta_rad))
    out = (S * ramp).sum(axis=0) / layout.type_grid.size
    return out if np.ndim(freq_GHz) else complex(out[0])


def _pec_backscatter(layout, f, inc):
    ramp = np.exp(-2j * np.outer(_x_centres_m(layout), _k0(f)) * np.sin(inc.theta_rad))
    return -layout.n_rows * ramp.sum(axis=0) / layout.type_grid.size


def monostatic_spectrum(
    layout: SurfaceLayout,
    provider,
    grid: FrequencyGrid | NDArray[np.float64],
    inc: IncidenceSpec = NORMAL,
    observation: Observation | str = Observation.SPECULAR,
) -> RcsSpectrum:
    """RCS reduction of the layout against an equal PEC plate, in dB.

    ``observation="backscatter"`` compares the two monostatic sums
    (:func:`backscatter_coefficient`). At oblique incidence the PEC backscatter
    sits in its own sidelobe region and has nulls, so the ratio is erratic;
    the default ``"specular"`` compares both surfaces in the PEC plate's
    specular direction, where the incidence ramp cancels. The two coincide at
    normal incidence.
    """
    observation = Observation(observation)
    f = grid.freqs if isinstance(grid, FrequencyGrid) else np.asarray(grid, dtype=float)
    if observation is Observation.BACKSCATTER or inc.theta_deg == 0.0:
        num = backscatter_coefficient(layout, provider, f, inc)
        den = _pec_backscatter(layout, f, inc)
    else:
        num = column_sums(layout, provider, f, inc).sum(axis=0) / layout.type_grid.size
        den = -np.ones_like(num)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.abs(num) ** 2 / np.abs(den) ** 2
    return RcsSpectrum(f, _to_db(ratio), inc, "array-factor")


def _element(theta_rad, kind):
    if kind is ElementPattern.COSINE:
        return np.cos(theta_rad)
    return np.ones_like(theta_rad)


def bistatic_cut(
    layout: SurfaceLayout,
    provider,
    freq_GHz: float,
    inc: IncidenceSpec = NORMAL,
    cfg: ScatterConfig = ScatterConfig(),
    thetas: NDArray[np.float64] | None = None,
    diffuse: bool = False,
) -> BistaticPattern:
    """Scattered level versus observation angle in the phi = 0 plane.

    ``E(theta) = sum_pq Gamma_pq exp(j k0 x_q (sin(theta) - sin(theta_inc)))``
    times the element factor, in dB relative to the PEC plate's specular peak
    (``theta = theta_inc`` in this convention). ``diffuse=True`` removes the
    mean reflection from every cell first, leaving only the field produced by
    the modulation.
    """
    th = cfg.thetas if thetas is None else np.asarray(thetas, dtype=float)
    rad = np.radians(th)
    S = column_sums(layout, provider, float(freq_GHz), inc)[:, 0]
    if diffuse:
        S = S - S.sum() / layout.n_cols
    k0 = float(_k0(freq_GHz))
    u = np.sin(rad) - np.sin(inc.theta_rad)
    E = np.exp(1j * k0 * np.outer(u, _x_centres_m(layout))) @ S
    E = E * _element(rad, cfg.element)
    ref = layout.type_grid.size * float(_element(np.array(inc.theta_rad), cfg.element))
    return BistaticPattern(float(freq_GHz), th, _to_db(np.abs(E) ** 2 / ref**2), 0.0, inc)


def strongest_lobe(pattern: BistaticPattern, exclude_deg: float = 10.0) -> tuple[float, float]:
    """Angle and level of the strongest local maximum away from the specular beam.

    Local maxima within ``exclude_deg`` of the specular direction (the main
    beam and its first sidelobes) are ignored.
    """
    t, lv = pattern.theta_deg, pattern.level_dB
    peak = np.zeros(t.size, dtype=bool)
    peak[1:-1] = (lv[1:-1] >= lv[:-2]) & (lv[1:-1] >= lv[2:]) & ((lv[1:-1] > lv[:-2]) | (lv[1:-1] > lv[2:]))
    peak &= np.abs(t - pattern.incidence.theta_deg) > exclude_deg
    if not np.any(peak):
        raise ValidationError("no lobe outside the specular exclusion zone")
    i = np.flatnonzero(peak)[np.argmax(lv[peak])]
    return float(t[i]), float(lv[i])


def grating_angle_deg(freq_GHz: float, period_mm: float, order: int = 1) -> float | None:
    """First-order redirection angle ``asin(order * lambda / period)``, or None if evanescent."""
    s = order * C0 / (freq_GHz * 1e9) / (period_mm * 1e-3)
    return float(np.degrees(np.arcsin(s))) if abs(s) <= 1.0 else None


def scattered_power(pattern: BistaticPattern) -> float:
    """Integral of linear power over ``u = sin(theta)`` across the cut."""
    p = 10.0 ** (pattern.level_dB / 10.0)
    return float(trapezoid(p, np.sin(np.radians(pattern.theta_deg))))
