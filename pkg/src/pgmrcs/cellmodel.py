"""Reflection model of square-patch unit cells on a grounded dielectric.

Conventions: time factor exp(+j w t), so a PEC reflects with Gamma = -1
(phase 180 deg). Lengths are in millimetres and frequencies in GHz at the API
boundary; SI units are used internally.

Two reflection sources are provided:

* the analytic averaged-impedance surrogate (capacitive patch grid in parallel
  with a grounded slab), see :func:`grid_impedance`, :func:`slab_impedance`
  and :func:`reflection`;
* linear interpolation of tabulated complex data, see :class:`PhaseTable`.

Both are wrapped as *providers* (:class:`SurrogateProvider`,
:class:`TableProvider`, :class:`ConstantProvider`) exposing
``gammas(freq_GHz, inc) -> (n_types, n_freq)`` for the metrics and scatter code.
"""
from __future__ import annotations

import enum
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.constants import c as C0
from scipy.constants import epsilon_0, mu_0

from .errors import CoverageError, GeometryError, NoCrossingError, PassivityError, RaggedGridError, SlabResonanceError, TableError, ValidationError

ETA0 = float(np.sqrt(mu_0 / epsilon_0))
"Free-space wave impedance in ohms."

POLE_GUARD_RAD = 1e-3
PASSIVITY_TOL = 1e-6


class Polarization(str, enum.Enum):
    TE = "TE"
    TM = "TM"


@dataclass(frozen=True)
class UnitCellSpec:
    """Square patch of edge ``period_D - gap_g`` centred in a ``period_D`` cell."""

    period_D: float = 6.0
    gap_g: float = 1.0
    thickness_d: float = 1.6
    eps_r: float = 3.55
    tan_delta: float = 0.0

    def __post_init__(self):
        if not (0.0 < self.gap_g < self.period_D):
            raise GeometryError(
                f"gap_g must lie in (0, period_D={self.period_D}) mm, got {self.gap_g}"
            )
        if not self.thickness_d > 0.0:
            raise GeometryError(f"thickness_d must be positive, got {self.thickness_d}")
        if not self.eps_r >= 1.0:
            raise GeometryError(f"eps_r must be >= 1, got {self.eps_r}")
        if not self.tan_delta >= 0.0:
            raise GeometryError(f"tan_delta must be >= 0, got {self.tan_delta}")

    @property
    def patch_edge(self) -> float:
        return self.period_D - self.gap_g


@dataclass(frozen=True)
class IncidenceSpec:
    theta_deg: float = 0.0
    polarization: Polarization = Polarization.TE

    def __post_init__(self):
        object.__setattr__(self, "polarization", Polarization(self.polarization))
        if not (0.0 <= self.theta_deg < 90.0):
            raise ValidationError(f"theta_deg must lie in [0, 90), got {self.theta_deg}")

    @property
    def theta_rad(self) -> float:
        return np.deg2rad(self.theta_deg)


NORMAL = IncidenceSpec()


def wrap_phase_deg(phase: ArrayLike) -> NDArray[np.float64] | float:
    """Wrap degrees into (-180, 180]."""
    out = -((-np.asarray(phase, dtype=float) + 180.0) % 360.0 - 180.0)
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class ReflectionSample:
    freq_GHz: float
    gamma: complex

    @property
    def mag(self) -> float:
        return abs(self.gamma)

    @property
    def phase_deg(self) -> float:
        return wrap_phase_deg(np.degrees(np.angle(self.gamma)))


def _k0(freq_GHz):
    return 2.0 * np.pi * np.asarray(freq_GHz, dtype=float) * 1e9 / C0


def _check_freq(freq_GHz):
    f = np.asarray(freq_GHz, dtype=float)
    if np.any(~(f > 0.0)):
        raise ValidationError("frequencies must be positive")
    return f


def grid_impedance(cell: UnitCellSpec, freq_GHz: ArrayLike, inc: IncidenceSpec = NORMAL):
    """Sheet impedance (ohms) of the capacitive patch grid.

    Averaged-boundary model of a dense patch array: with
    ``eps_eff = (eps_r + 1) / 2`` and grid parameter
    ``alpha = (k_eff D / pi) ln(1 / sin(pi g / 2D))`` the TM impedance is
    ``-j eta_eff / (2 alpha)``; TE is divided by ``1 - sin^2(theta) / (2 eps_eff)``.
    """
    if not (0.0 < cell.gap_g < cell.period_D):
        raise GeometryError(f"gap {cell.gap_g} mm outside (0, {cell.period_D}) mm")
    f = _check_freq(freq_GHz)
    D = cell.period_D * 1e-3
    eps_eff = 0.5 * (cell.eps_r + 1.0)
    k_eff = _k0(f) * np.sqrt(eps_eff)
    eta_eff = ETA0 / np.sqrt(eps_eff)
    alpha = (k_eff * D / np.pi) * np.log(1.0 / np.sin(np.pi * cell.gap_g / (2.0 * cell.period_D)))
    if np.any(alpha <= 0.0):
        raise GeometryError(f"gap {cell.gap_g} mm leaves a vanishing patch grid (alpha underflows to 0)")
    z = -1j * eta_eff / (2.0 * alpha)
    if Polarization(inc.polarization) is Polarization.TE:
        z = z / (1.0 - np.sin(inc.theta_rad) ** 2 / (2.0 * eps_eff))
    return z


def _slab_beta(cell, f, inc):
    eps_c = cell.eps_r * (1.0 - 1j * cell.tan_delta)
    beta = _k0(f) * np.sqrt(eps_c - np.sin(inc.theta_rad) ** 2)
    d = cell.thickness_d * 1e-3
    bd_re = np.real(beta * d)
    off = np.abs(np.mod(bd_re, np.pi) - np.pi / 2.0)
    if np.any(off < POLE_GUARD_RAD):
        bad = np.atleast_1d(f)[np.atleast_1d(off < POLE_GUARD_RAD)]
        raise SlabResonanceError(
            f"grounded slab is at its tangent pole (beta*d = pi/2 mod pi) near {bad[0]:.6g} GHz; "
            "shift the frequency grid"
        )
    return eps_c, beta, d


def slab_impedance(cell: UnitCellSpec, freq_GHz: ArrayLike, inc: IncidenceSpec = NORMAL):
    """Surface impedance (ohms) of the grounded dielectric slab.

    TE: ``j w mu0 tan(beta d) / beta``; TM: ``j beta tan(beta d) / (w eps0 eps_c)``,
    with ``beta = k0 sqrt(eps_c - sin^2 theta)`` and ``eps_c = eps_r (1 - j tan_delta)``.
    At normal incidence both polarizations go through the TE expression, so the
    two results are bit-identical.
    """
    f = _check_freq(freq_GHz)
    eps_c, beta, d = _slab_beta(cell, f, inc)
    w = 2.0 * np.pi * f * 1e9
    t = np.tan(beta * d)
    if Polarization(inc.polarization) is Polarization.TE or inc.theta_deg == 0.0:
        z = 1j * w * mu_0 * t / beta
    else:
        z = 1j * beta * t / (w * epsilon_0 * eps_c)
    if cell.tan_delta == 0.0:
        z = 1j * np.imag(z)
    return z


def _wave_impedance(inc):
    ct = np.cos(inc.theta_rad)
    return ETA0 / ct if Polarization(inc.polarization) is Polarization.TE else ETA0 * ct


def reflection_coefficient(cell: UnitCellSpec, freq_GHz: ArrayLike, inc: IncidenceSpec = NORMAL):
    """Complex Gamma of the cell, vectorised over ``freq_GHz``.

    Grid and slab are combined as parallel admittances, which stays finite at the
    parallel resonance (where ``Z_grid + Z_slab = 0``).
    """
    zg = grid_impedance(cell, freq_GHz, inc)
    zs = slab_impedance(cell, freq_GHz, inc)
    eta = _wave_impedance(inc)
    with np.errstate(divide="ignore", invalid="ignore"):
        y = np.where(np.isinf(zg), 0.0, 1.0 / zg) + 1.0 / zs
        g = (1.0 - eta * y) / (1.0 + eta * y)
    # zs == 0 (short) gives y = inf
    g = np.where(np.isinf(y), -1.0 + 0j, g)
    return g if np.ndim(g) else complex(g)


def reflection(cell: UnitCellSpec, freq_GHz: float, inc: IncidenceSpec = NORMAL) -> ReflectionSample:
    return ReflectionSample(float(freq_GHz), complex(reflection_coefficient(cell, float(freq_GHz), inc)))


def _phase(cell, f, inc):
    return float(np.degrees(np.angle(reflection_coefficient(cell, f, inc))))


def resonance_frequency(
    cell: UnitCellSpec,
    inc: IncidenceSpec = NORMAL,
    f_lo: float = 1.0,
    f_hi: float = 40.0,
    tol_deg: float = 0.01,
    max_iter: int = 100,
) -> float:
    """Frequency (GHz) of the 0-degree reflection-phase crossing, by bisection.

    The phase must change sign over ``[f_lo, f_hi]``. A sign change produced by
    the +/-180 deg wrap instead of a zero crossing raises :class:`NoCrossingError`.
    """
    p_lo, p_hi = _phase(cell, f_lo, inc), _phase(cell, f_hi, inc)
    if abs(p_lo) < tol_deg:
        return float(f_lo)
    if abs(p_hi) < tol_deg:
        return float(f_hi)
    if np.sign(p_lo) == np.sign(p_hi):
        raise NoCrossingError(
            f"reflection phase keeps one sign on [{f_lo}, {f_hi}] GHz ({p_lo:.3g}, {p_hi:.3g} deg)"
        )
    a, b = float(f_lo), float(f_hi)
    for _ in range(max_iter):
        m = 0.5 * (a + b)
        p = _phase(cell, m, inc)
        if abs(p) < tol_deg:
            return m
        if np.sign(p) == np.sign(p_lo):
            a, p_lo = m, p
        else:
            b = m
    raise NoCrossingError(
        f"bisection on [{f_lo}, {f_hi}] GHz closed on a phase wrap, not a 0 deg crossing"
    )


def find_resonances(cell: UnitCellSpec, freqs_GHz: ArrayLike, inc: IncidenceSpec = NORMAL) -> list[float]:
    """All 0-degree crossings bracketed by consecutive samples of ``freqs_GHz``."""
    f = np.asarray(freqs_GHz, dtype=float)
    ph = np.degrees(np.angle(reflection_coefficient(cell, f, inc)))
    out = []
    for i in np.nonzero(np.sign(ph[:-1]) != np.sign(ph[1:]))[0]:
        # a jump of ~360 deg is the wrap, not a zero crossing
        if abs(ph[i] - ph[i + 1]) < 180.0:
            out.append(resonance_frequency(cell, inc, f[i], f[i + 1]))
    return out


@dataclass(frozen=True, eq=False)
class PhaseTable:
    """Complex reflection samples on a rectangular (type x frequency) grid."""

    type_ids: tuple[int, ...]
    freq_GHz: NDArray[np.float64]
    gamma: NDArray[np.complex128]

    def __post_init__(self):
        f = np.asarray(self.freq_GHz, dtype=float)
        g = np.asarray(self.gamma, dtype=complex)
        object.__setattr__(self, "freq_GHz", f)
        object.__setattr__(self, "gamma", g)
        object.__setattr__(self, "type_ids", tuple(int(t) for t in self.type_ids))
        if len(set(self.type_ids)) != len(self.type_ids):
            raise TableError("duplicate type ids")
        if f.ndim != 1 or f.size < 2 or np.any(np.diff(f) <= 0):
            raise TableError("frequencies must be strictly increasing with at least two samples")
        if g.shape != (len(self.type_ids), f.size):
            raise RaggedGridError(f"gamma shape {g.shape} does not match types x frequencies")
        bad = np.argwhere(np.abs(g) > 1.0 + PASSIVITY_TOL)
        if bad.size:
            i, j = bad[0]
            raise PassivityError(
                f"|gamma| = {abs(g[i, j]):.6g} > 1 for type {self.type_ids[i]} at {f[j]:.6g} GHz"
            )

    @classmethod
    def from_records(cls, records, line_numbers=None) -> "PhaseTable":
        """Build from ``(type_id, freq_GHz, gamma)`` rows sorted by type then frequency.

        ``line_numbers`` (parallel to ``records``) only feeds error messages.
        """
        records = list(records)
        if line_numbers is None:
            line_numbers = range(1, len(records) + 1)
        by_type: dict[int, list] = {}
        prev = None
        for (tid, f, g), ln in zip(records, line_numbers):
            tid = int(tid)
            if abs(g) > 1.0 + PASSIVITY_TOL:
                raise PassivityError(f"row {ln}: |gamma| = {abs(g):.6g} exceeds 1 (passive cell)")
            if prev is not None and (tid, f) <= prev:
                raise TableError(f"row {ln}: rows must be sorted by (type_id, freq_GHz) without repeats")
            prev = (tid, f)
            by_type.setdefault(tid, []).append((float(f), complex(g)))
        if not by_type:
            raise TableError("empty phase table")
        ids = list(by_type)
        freqs = [np.array([r[0] for r in by_type[t]]) for t in ids]
        ref = freqs[0]
        for t, fr in zip(ids, freqs):
            if fr.shape != ref.shape or np.any(fr != ref):
                missing = np.setdiff1d(ref, fr)
                extra = np.setdiff1d(fr, ref)
                raise RaggedGridError(
                    f"type {t} frequency grid differs from type {ids[0]}"
                    f" (missing {missing.tolist()}, extra {extra.tolist()})"
                )
        gam = np.array([[r[1] for r in by_type[t]] for t in ids])
        return cls(tuple(ids), ref, gam)

    def records(self):
        for i, t in enumerate(self.type_ids):
            for f, g in zip(self.freq_GHz, self.gamma[i]):
                yield t, float(f), complex(g)

    def __len__(self):
        return self.gamma.size

    def row(self, type_id: int) -> int:
        try:
            return self.type_ids.index(int(type_id))
        except ValueError:
            raise CoverageError(f"unknown type_id {type_id}; table has {list(self.type_ids)}") from None

    def interpolate(self, type_id: int, freq_GHz: ArrayLike):
        """Complex Gamma by linear interpolation of real and imaginary parts."""
        i = self.row(type_id)
        f = np.asarray(freq_GHz, dtype=float)
        lo, hi = self.freq_GHz[0], self.freq_GHz[-1]
        if np.any((f < lo) | (f > hi)):
            raise CoverageError(f"frequency outside table range [{lo:.6g}, {hi:.6g}] GHz")
        g = np.interp(f, self.freq_GHz, self.gamma[i].real) + 1j * np.interp(f, self.freq_GHz, self.gamma[i].imag)
        if np.any(np.abs(g) > 1.0 + PASSIVITY_TOL):
            raise PassivityError("interpolated |gamma| exceeds 1")
        return g if g.ndim else complex(g)


def tabulated_reflection(table: PhaseTable, type_id: int, freq_GHz: float) -> ReflectionSample:
    return ReflectionSample(float(freq_GHz), complex(table.interpolate(type_id, float(freq_GHz))))


class SurrogateProvider:
    """Reflection of a palette of cells from the analytic surrogate model."""

    def __init__(self, palette: Sequence[UnitCellSpec]):
        self.palette = tuple(palette)
        if not self.palette:
            raise ValidationError("empty palette")

    @property
    def n_types(self) -> int:
        return len(self.palette)

    def gammas(self, freq_GHz: ArrayLike, inc: IncidenceSpec = NORMAL) -> NDArray[np.complex128]:
        f = np.atleast_1d(np.asarray(freq_GHz, dtype=float))
        return np.array([reflection_coefficient(c, f, inc) for c in self.palette], dtype=complex).reshape(len(self.palette), f.size)


class TableProvider:
    """Reflection from a :class:`PhaseTable`; palette index ``i`` maps to ``type_ids[i]``.

    A table carries a single incidence condition, so ``inc`` is accepted for
    interface compatibility and otherwise ignored.
    """

    def __init__(self, table: PhaseTable, type_ids: Sequence[int] | None = None):
        self.table = table
        self.type_ids = tuple(table.type_ids if type_ids is None else type_ids)
        for t in self.type_ids:
            table.row(t)

    @property
    def n_types(self) -> int:
        return len(self.type_ids)

    def gammas(self, freq_GHz: ArrayLike, inc: IncidenceSpec = NORMAL) -> NDArray[np.complex128]:
        f = np.atleast_1d(np.asarray(freq_GHz, dtype=float))
        return np.array([self.table.interpolate(t, f) for t in self.type_ids], dtype=complex)


class ConstantProvider:
    """Frequency- and angle-independent reflection per type (e.g. PEC: -1)."""

    def __init__(self, gammas: Sequence[complex]):
        self.values = np.asarray(gammas, dtype=complex)

    @property
    def n_types(self) -> int:
        return self.values.size

    def gammas(self, freq_GHz: ArrayLike, inc: IncidenceSpec = NORMAL) -> NDArray[np.complex128]:
        f = np.atleast_1d(np.asarray(freq_GHz, dtype=float))
        return np.repeat(self.values[:, None], f.size, axis=1)


REFERENCE_GAPS_MM = (0.1, 0.55, 1.0, 1.55, 2.05, 2.5, 2.9)


def reference_palette(tan_delta: float = 0.0) -> tuple[UnitCellSpec, ...]:
    """The seven 6 mm cells on 1.6 mm RO4003 (eps_r 3.55), ascending gap."""
    return tuple(UnitCellSpec(6.0, g, 1.6, 3.55, tan_delta) for g in REFERENCE_GAPS_MM)
