import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pgmrcs.cellmodel import (
    ETA0,
    IncidenceSpec,
    PhaseTable,
    SurrogateProvider,
    TableProvider,
    UnitCellSpec,
    find_resonances,
    grid_impedance,
    reference_palette,
    reflection,
    reflection_coefficient,
    resonance_frequency,
    slab_impedance,
    tabulated_reflection,
    wrap_phase_deg,
)
from pgmrcs.errors import CoverageError, GeometryError, NoCrossingError, PassivityError, SlabResonanceError

TE0 = IncidenceSpec(0.0, "TE")
TM0 = IncidenceSpec(0.0, "TM")
TE40 = IncidenceSpec(40.0, "TE")
TM40 = IncidenceSpec(40.0, "TM")

# Frozen from a 40-digit mpmath evaluation of the closed forms (independent of numpy).
GOLDEN_ZG = -37.854975433208557636j  # D=6, g=0.1, eps_r=3.55, 15 GHz, normal
GOLDEN_ZS = 630.3619854469601011j  # d=1.6, eps_r=3.55, 20 GHz, normal
GOLDEN_ZG_TE40 = -140.27011249147122816j  # D=6, g=1, 12 GHz
GOLDEN_ZS_TM40_LOSSY = 1.8958925425157808968 + 466.54135551306300369j  # tan_delta=0.0027, 20 GHz
GOLDEN_GAMMA_TM40_LOSSY = 0.61576102880491497767 - 0.78418269362992116572j  # g=1, 12 GHz
GOLDEN_GAMMA_G29_20 = 0.2644993435616754465 - 0.96438586533370696097j


class TestGeometry:
    @pytest.mark.parametrize("gap", [0.0, -0.1, 6.0, 7.0])
    def test_invalid_gap_rejected(self, gap):
        with pytest.raises(GeometryError):
            UnitCellSpec(6.0, gap)

    @pytest.mark.parametrize("kw", [dict(thickness_d=0.0), dict(eps_r=0.5), dict(tan_delta=-1e-3)])
    def test_invalid_substrate(self, kw):
        with pytest.raises(GeometryError):
            UnitCellSpec(6.0, 1.0, **kw)

    def test_patch_edge(self):
        assert UnitCellSpec(6.0, 0.1).patch_edge == pytest.approx(5.9)

    def test_incidence_bounds(self):
        with pytest.raises(ValueError):
            IncidenceSpec(90.0)
        with pytest.raises(ValueError):
            IncidenceSpec(10.0, "XY")


class TestGridImpedance:
    def test_golden(self):
        z = grid_impedance(UnitCellSpec(6.0, 0.1, 1.6, 3.55), 15.0, TE0)
        assert z.imag < 0
        assert z == pytest.approx(GOLDEN_ZG, rel=1e-12)

    def test_golden_oblique_te(self):
        z = grid_impedance(UnitCellSpec(6.0, 1.0, 1.6, 3.55), 12.0, TE40)
        assert z == pytest.approx(GOLDEN_ZG_TE40, rel=1e-12)

    def test_normal_incidence_te_equals_tm(self):
        cell = UnitCellSpec(6.0, 0.55)
        assert grid_impedance(cell, 21.0, TE0) == grid_impedance(cell, 21.0, TM0)

    def test_vanishing_grid(self):
        assert abs(grid_impedance(UnitCellSpec(6.0, 6.0 - 1e-6), 15.0)) > 1e6 * ETA0
        with pytest.raises(GeometryError):
            grid_impedance(UnitCellSpec(6.0, 6.0 - 1e-9), 15.0)

    def test_purely_reactive(self):
        z = grid_impedance(UnitCellSpec(6.0, 1.0), np.linspace(5, 40, 50))
        assert np.all(z.real == 0) and np.all(z.imag < 0)


class TestSlabImpedance:
    def test_golden(self):
        z = slab_impedance(UnitCellSpec(6.0, 1.0, 1.6, 3.55), 20.0, TE0)
        assert z == pytest.approx(GOLDEN_ZS, rel=1e-12)

    def test_golden_lossy_tm(self):
        z = slab_impedance(UnitCellSpec(6.0, 1.0, 1.6, 3.55, 0.0027), 20.0, TM40)
        assert z == pytest.approx(GOLDEN_ZS_TM40_LOSSY, rel=1e-12)

    def test_low_frequency_short(self):
        z = slab_impedance(UnitCellSpec(), 1e-6, TE0)
        assert abs(z) < 1e-6 * ETA0

    def test_lossless_is_reactive(self):
        f = np.linspace(1, 24, 40)
        for inc in (TE0, TE40, TM40):
            assert np.all(slab_impedance(UnitCellSpec(), f, inc).real == 0.0)

    def test_tangent_pole_guard(self):
        cell = UnitCellSpec()
        f_pole = 299792458.0 / (4 * 1.6e-3 * np.sqrt(3.55)) / 1e9
        with pytest.raises(SlabResonanceError):
            slab_impedance(cell, f_pole, TE0)
        with pytest.raises(SlabResonanceError):
            reflection(cell, f_pole * (1 + 1e-4))
        slab_impedance(cell, f_pole * 1.01, TE0)


class TestReflection:
    @pytest.mark.parametrize("cell", reference_palette(), ids=lambda c: f"g={c.gap_g}")
    def test_lossless_unit_magnitude(self, cell):
        g = reflection_coefficient(cell, np.linspace(10, 35, 251), TE0)
        assert np.max(np.abs(np.abs(g) - 1)) < 1e-6

    def test_golden_gamma(self):
        s = reflection(UnitCellSpec(6.0, 2.9), 20.0)
        assert s.gamma == pytest.approx(GOLDEN_GAMMA_G29_20, rel=1e-12)
        g = reflection_coefficient(UnitCellSpec(6.0, 1.0, 1.6, 3.55, 0.0027), 12.0, TM40)
        assert g == pytest.approx(GOLDEN_GAMMA_TM40_LOSSY, rel=1e-12)

    def test_lossy_is_passive(self):
        cell = UnitCellSpec(tan_delta=0.0027)
        for inc in (TE0, TE40, TM40):
            assert np.all(np.abs(reflection_coefficient(cell, np.linspace(2, 24, 200), inc)) < 1.0)

    def test_pec_limit(self):
        s = reflection(UnitCellSpec(6.0, 1.0), 1e-6)
        assert abs(abs(s.phase_deg) - 180.0) < 1e-3

    def test_te_tm_identical_at_normal(self):
        f = np.linspace(10, 35, 251)
        for cell in reference_palette():
            a = reflection_coefficient(cell, f, TE0)
            b = reflection_coefficient(cell, f, TM0)
            assert np.array_equal(a, b)

    def test_phase_wrapped(self):
        s = reflection(UnitCellSpec(6.0, 0.1), 30.0)
        assert -180.0 < s.phase_deg <= 180.0
        assert s.mag == pytest.approx(1.0, abs=1e-9)

    def test_wrap_phase_deg(self):
        assert wrap_phase_deg(-180.0) == 180.0
        assert wrap_phase_deg(540.0) == 180.0
        np.testing.assert_allclose(wrap_phase_deg([190.0, -190.0, 10.0]), [-170.0, 170.0, 10.0])

    def test_phase_continuous_between_poles(self):
        # slab pole at ~24.86 GHz; check either side on a fine grid
        for lo, hi in ((1.0, 24.8), (24.95, 40.0)):
            f = np.linspace(lo, hi, 4000)
            for cell in reference_palette():
                ph = np.unwrap(np.angle(reflection_coefficient(cell, f)))
                assert np.max(np.abs(np.diff(ph))) < np.radians(5)

    @pytest.mark.parametrize("cell", reference_palette(), ids=lambda c: f"g={c.gap_g}")
    def test_te_more_angle_sensitive_at_resonance(self, cell):
        f0 = resonance_frequency(cell, TE0, 1.0, 24.0)
        p0 = reflection(cell, f0).phase_deg
        d_te = abs(wrap_phase_deg(reflection(cell, f0, TE40).phase_deg - p0))
        d_tm = abs(wrap_phase_deg(reflection(cell, f0, TM40).phase_deg - p0))
        assert d_te >= d_tm


@settings(max_examples=200, deadline=None)
@given(
    gap=st.floats(0.05, 5.9),
    f=st.floats(0.5, 24.0),
    theta=st.floats(0.0, 80.0),
    pol=st.sampled_from(["TE", "TM"]),
)
def test_energy_conservation(gap, f, theta, pol):
    cell = UnitCellSpec(6.0, gap)
    try:
        g = reflection_coefficient(cell, f, IncidenceSpec(theta, pol))
    except SlabResonanceError:
        return
    assert abs(abs(g) - 1.0) < 1e-6


class TestResonance:
    def test_gap_monotonicity(self):
        f0 = [resonance_frequency(c, TE0, 1.0, 24.0) for c in reference_palette()]
        assert np.all(np.diff(f0) > 0)

    def test_ordering_small_vs_large_gap(self):
        lo = resonance_frequency(UnitCellSpec(6.0, 0.1), TE0, 1.0, 24.0)
        hi = resonance_frequency(UnitCellSpec(6.0, 2.9), TE0, 1.0, 24.0)
        assert lo < hi

    def test_converges_to_tolerance(self):
        cell = UnitCellSpec(6.0, 1.55)
        f0 = resonance_frequency(cell, TE0, 5.0, 20.0, max_iter=60)
        assert abs(reflection(cell, f0).phase_deg) < 0.01

    def test_no_crossing(self):
        with pytest.raises(NoCrossingError):
            resonance_frequency(UnitCellSpec(6.0, 0.1), TE0, 10.0, 20.0)

    def test_wrap_is_not_a_crossing(self):
        cell = UnitCellSpec(6.0, 0.1)
        f = np.linspace(25.0, 60.0, 400)
        p = np.degrees(np.angle(reflection_coefficient(cell, f)))
        wraps = np.nonzero(np.abs(np.diff(p)) > 180)[0]
        assert wraps.size, "fixture expects a +/-180 wrap above the slab pole"
        i = wraps[0]
        with pytest.raises(NoCrossingError):
            resonance_frequency(cell, TE0, f[i], f[i + 1])

    def test_find_resonances_skips_wraps(self):
        cell = UnitCellSpec(6.0, 1.0)
        found = find_resonances(cell, np.linspace(1.0, 24.8, 300))
        assert len(found) == 1
        assert found[0] == pytest.approx(resonance_frequency(cell, TE0, 1.0, 24.0), abs=1e-3)


def _table():
    f = np.array([10.0, 11.0, 12.0])
    g = np.array([[1 + 0j, 0 + 1j, -1 + 0j], [0.6 + 0.8j, 0.8 - 0.6j, -0.6 - 0.8j]])
    return PhaseTable((0, 3), f, g)


class TestPhaseTable:
    def test_grid_point_exact(self):
        t = _table()
        for i, tid in enumerate(t.type_ids):
            for j, f in enumerate(t.freq_GHz):
                assert tabulated_reflection(t, tid, f).gamma == t.gamma[i, j]

    def test_midpoint_complex_interpolation(self):
        assert tabulated_reflection(_table(), 0, 10.5).gamma == pytest.approx(0.5 + 0.5j, abs=1e-15)

    def test_out_of_range(self):
        with pytest.raises(CoverageError):
            tabulated_reflection(_table(), 0, 12.5)

    def test_unknown_type(self):
        with pytest.raises(CoverageError):
            tabulated_reflection(_table(), 7, 11.0)

    def test_passivity_rejected(self):
        with pytest.raises(PassivityError):
            PhaseTable((0,), [1.0, 2.0], [[1.2 + 0j, 1.0]])
        with pytest.raises(PassivityError, match="row 3"):
            PhaseTable.from_records([(0, 1.0, 1.0), (0, 2.0, 1.2j)], line_numbers=[2, 3])

    def test_from_records_roundtrip(self):
        t = _table()
        t2 = PhaseTable.from_records(t.records())
        assert t2.type_ids == t.type_ids
        assert np.array_equal(t2.gamma, t.gamma)
        assert len(t2) == 6

    def test_provider_matches_interpolation(self):
        p = TableProvider(_table())
        g = p.gammas([10.0, 10.5])
        assert g.shape == (2, 2)
        assert g[0, 1] == pytest.approx(0.5 + 0.5j)

    def test_table_from_surrogate_matches_surrogate_on_grid(self):
        pal = reference_palette()
        f = np.linspace(10, 20, 11)
        sp = SurrogateProvider(pal)
        tab = TableProvider(PhaseTable(tuple(range(7)), f, sp.gammas(f)))
        assert np.array_equal(tab.gammas(f), sp.gammas(f))
