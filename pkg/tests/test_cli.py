import json
import re
import subprocess
import sys

import numpy as np
import pytest

from pgmrcs.cli import main
from pgmrcs.exportio import read_layout_json, read_pattern_csv, read_phase_table, read_spectrum_csv
from pgmrcs.layout import ModulationSpec, Variant, sinusoid_field
from pgmrcs.metrics import REFERENCE_WEIGHTS

REF_W = list(REFERENCE_WEIGHTS.counts)


def run(*argv):
    return main([str(a) for a in argv])


def write_json(path, obj):
    path.write_text(json.dumps(obj))
    return path


@pytest.fixture
def weights_file(tmp_path):
    return write_json(tmp_path / "w.json", REF_W)


@pytest.fixture
def ref_layout_file(tmp_path, weights_file):
    assert run("layout", "--weights", weights_file, "--out-dir", tmp_path / "lay") == 0
    return tmp_path / "lay" / "layout.json"


class TestCellSweep:
    def test_all_types(self, tmp_path, capsys):
        cfg = write_json(tmp_path / "c.json", {"grid": {"f_start": 5, "f_stop": 35, "n_points": 301}})
        assert run("cell-sweep", "--all", "--config", cfg, "--out-dir", tmp_path / "o") == 0
        out = tmp_path / "o"
        assert sorted(p.name for p in out.glob("cell_*.csv")) == [f"cell_{i}.csv" for i in range(7)]
        assert len(read_phase_table(out / "phase_table.csv")) == 7 * 301
        res = [float(m) for m in re.findall(r"resonance ([\d.]+) GHz", capsys.readouterr().out)]
        assert len(res) == 7 and all(a < b for a, b in zip(res, res[1:]))
        man = json.loads((out / "manifest.json").read_text())
        assert set(man["artifacts"]) == {f"cell_{i}.csv" for i in range(7)} | {"phase_table.csv"}

    def test_unknown_type(self, tmp_path, capsys):
        assert run("cell-sweep", "--type", 99, "--out-dir", tmp_path / "o") == 2
        assert "unknown cell type 99" in capsys.readouterr().err
        assert not (tmp_path / "o").exists()

    def test_single_type(self, tmp_path):
        assert run("cell-sweep", "--type", 3, "--out-dir", tmp_path / "o") == 0
        assert [p.name for p in sorted((tmp_path / "o").glob("*.csv"))] == ["cell_3.csv"]

    def test_te_tm_identical_at_normal(self, tmp_path):
        assert run("cell-sweep", "--pol", "TE", "--out-dir", tmp_path / "te") == 0
        assert run("cell-sweep", "--pol", "TM", "--out-dir", tmp_path / "tm") == 0
        for i in range(7):
            assert (tmp_path / "te" / f"cell_{i}.csv").read_bytes() == (tmp_path / "tm" / f"cell_{i}.csv").read_bytes()

    def test_slab_pole_is_numerical_error(self, tmp_path, capsys):
        assert run("cell-sweep", "--theta-inc", 15, "--out-dir", tmp_path / "o") == 3
        assert "pole" in capsys.readouterr().err
        assert not (tmp_path / "o").exists()

    def test_bad_angle(self, tmp_path):
        assert run("cell-sweep", "--theta-inc", 90, "--out-dir", tmp_path / "o") == 2


class TestLayout:
    def test_reference_histogram(self, ref_layout_file):
        lay = read_layout_json(ref_layout_file)
        assert tuple(lay.counts()) == REFERENCE_WEIGHTS.counts
        svg = (ref_layout_file.parent / "layout.svg").read_text()
        assert svg.count("<rect") == 1601

    def test_deficit(self, tmp_path, capsys):
        w = REF_W.copy()
        w[0] -= 1
        assert run("layout", "--weights", write_json(tmp_path / "w.json", w), "--out-dir", tmp_path / "o") == 2
        err = capsys.readouterr().err
        assert "1599" in err and "deficit 1" in err
        assert not (tmp_path / "o").exists()

    def test_quadrant_symmetric(self, tmp_path):
        field = sinusoid_field(40, 40, 6.0, ModulationSpec(24.0, 0.0, Variant.QUADRANT_SYMMETRIC))
        sizes = np.unique(field, return_counts=True)[1]
        b = np.linspace(0, sizes.size, 8).astype(int)
        w = [int(sizes[x:y].sum()) for x, y in zip(b, b[1:])]
        wf = write_json(tmp_path / "w.json", {"weights": w})
        assert run("layout", "--weights", wf, "--variant", "quadrant_symmetric", "--out-dir", tmp_path / "o") == 0
        g = read_layout_json(tmp_path / "o" / "layout.json").type_grid
        assert np.array_equal(g, g[:, ::-1]) and np.array_equal(g, g[::-1, :])

    def test_weights_from_config(self, tmp_path):
        cfg = write_json(tmp_path / "c.json", {"weights": REF_W})
        assert run("layout", "--config", cfg, "--out-dir", tmp_path / "o") == 0

    def test_no_weights(self, tmp_path):
        assert run("layout", "--out-dir", tmp_path / "o") == 2

    def test_missing_weights_file(self, tmp_path):
        assert run("layout", "--weights", tmp_path / "nope.json", "--out-dir", tmp_path / "o") == 4


class TestRcs:
    def test_mono_normal(self, tmp_path, ref_layout_file):
        assert run("rcs", "--layout", ref_layout_file, "--out-dir", tmp_path / "m") == 0
        spec = read_spectrum_csv(tmp_path / "m" / "spectrum.csv")
        assert len(spec) == 251 and np.all(spec.rcsr_dB <= 0)
        band = json.loads((tmp_path / "m" / "bands.json").read_text())
        assert set(band) >= {"f_lo", "f_hi", "fractional_bw_percent"}

    def test_bistatic_lobes(self, tmp_path, ref_layout_file, capsys):
        assert run("rcs", "--layout", ref_layout_file, "--mode", "bistatic", "--freq", 18, "--freq", 31.1, "--out-dir", tmp_path / "b") == 0
        lobes = [float(x) for x in re.findall(r"strongest lobe (-?[\d.]+) deg", capsys.readouterr().out)]
        assert abs(abs(lobes[0]) - 44.0) <= 3 and abs(abs(lobes[1]) - 23.7) <= 3
        pat = read_pattern_csv(tmp_path / "b" / "pattern_18GHz.csv")
        assert len(pat) == 721

    def test_bistatic_needs_freq(self, tmp_path, ref_layout_file):
        assert run("rcs", "--layout", ref_layout_file, "--mode", "bistatic", "--out-dir", tmp_path / "b") == 2

    def test_missing_layout(self, tmp_path):
        assert run("rcs", "--layout", tmp_path / "none.json", "--out-dir", tmp_path / "b") == 4
        assert run("rcs", "--out-dir", tmp_path / "b") == 2

    def test_ingested_table_matches_surrogate(self, tmp_path, ref_layout_file):
        assert run("cell-sweep", "--out-dir", tmp_path / "s") == 0
        cfg = write_json(tmp_path / "c.json", {"phase_table": "s/phase_table.csv"})
        assert run("rcs", "--config", cfg, "--layout", ref_layout_file, "--out-dir", tmp_path / "t") == 0
        assert run("rcs", "--layout", ref_layout_file, "--out-dir", tmp_path / "u") == 0
        a = read_spectrum_csv(tmp_path / "t" / "spectrum.csv").rcsr_dB
        b = read_spectrum_csv(tmp_path / "u" / "spectrum.csv").rcsr_dB
        # the table stores 6 significant digits, so levels agree to rounding except in deep nulls
        assert np.allclose(a[b > -40], b[b > -40], atol=1e-3)

    def test_table_missing_type(self, tmp_path, ref_layout_file):
        assert run("cell-sweep", "--type", 0, "--out-dir", tmp_path / "s") == 0
        cfg = write_json(tmp_path / "c.json", {"phase_table": "s/cell_0.csv"})
        assert run("rcs", "--config", cfg, "--layout", ref_layout_file, "--out-dir", tmp_path / "t") == 2
        assert not (tmp_path / "t").exists()


class TestOptimize:
    def _cfg(self, tmp_path, **extra):
        return write_json(tmp_path / "c.json", {"ga": {"generations": 30, "population_size": 24}, **extra})

    def test_same_seed_identical(self, tmp_path):
        cfg = self._cfg(tmp_path)
        for d in ("a", "b"):
            assert run("optimize", "--config", cfg, "--seed", 5, "--out-dir", tmp_path / d) == 0
        for name in ("ga_report.json", "weights.json", "spectrum_best.csv", "spectrum_uniform.csv"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
        rep = json.loads((tmp_path / "a" / "ga_report.json").read_text())
        assert rep["seed"] == 5 and rep["config"]["rng_seed"] == 5
        assert rep["best_fitness"] <= rep["uniform_fitness"]
        assert sum(rep["best_weights"]) == 1600 and len(rep["history"]) == 30

    def test_bandwidth_objective(self, tmp_path):
        assert run("optimize", "--config", self._cfg(tmp_path), "--objective", "bandwidth", "--out-dir", tmp_path / "o") == 0
        rep = json.loads((tmp_path / "o" / "ga_report.json").read_text())
        assert rep["objective"] == "bandwidth" and rep["best_fitness"] <= rep["uniform_fitness"]

    def test_two_type_matches_exhaustive(self, tmp_path):
        cfg = self._cfg(tmp_path, palette={"gaps_mm": [0.55, 2.5]}, ga={"generations": 60})
        assert run("optimize", "--config", cfg, "--out-dir", tmp_path / "o") == 0
        rep = json.loads((tmp_path / "o" / "ga_report.json").read_text())
        assert rep["best_fitness"] == rep["exhaustive_best_fitness"]

    def test_jobs_do_not_change_output(self, tmp_path):
        cfg = self._cfg(tmp_path)
        assert run("optimize", "--config", cfg, "--out-dir", tmp_path / "s") == 0
        assert run("optimize", "--config", cfg, "--jobs", 4, "--out-dir", tmp_path / "p") == 0
        assert (tmp_path / "s" / "ga_report.json").read_bytes() == (tmp_path / "p" / "ga_report.json").read_bytes()


class TestGlobal:
    def test_bad_config_field(self, tmp_path, capsys):
        cfg = write_json(tmp_path / "c.json", {"grid": {"f_start": 10, "f_stop": 35, "n_points": 1}})
        assert run("cell-sweep", "--config", cfg, "--out-dir", tmp_path / "o") == 2
        assert "'grid" in capsys.readouterr().err
        assert not (tmp_path / "o").exists()

    def test_missing_config(self, tmp_path):
        assert run("cell-sweep", "--config", tmp_path / "none.json") == 4

    def test_pipeline_reproducible(self, tmp_path):
        """Same config and seed: every artifact byte-identical; manifests differ only in time and out_dir."""
        cfg = write_json(tmp_path / "c.json", {"ga": {"generations": 20, "population_size": 16}})
        for d in ("r1", "r2"):
            o = tmp_path / d
            assert run("cell-sweep", "--config", cfg, "--out-dir", o / "sweep") == 0
            assert run("optimize", "--config", cfg, "--seed", 3, "--out-dir", o / "opt") == 0
            assert run("layout", "--config", cfg, "--weights", o / "opt" / "weights.json", "--out-dir", o / "lay") == 0
            assert run("rcs", "--config", cfg, "--layout", o / "lay" / "layout.json", "--out-dir", o / "mono") == 0
            assert run("rcs", "--config", cfg, "--layout", o / "lay" / "layout.json", "--mode", "bistatic", "--freq", 18, "--out-dir", o / "bi") == 0
        files = sorted(p.relative_to(tmp_path / "r1") for p in (tmp_path / "r1").rglob("*") if p.is_file())
        assert len(files) > 15
        for rel in files:
            a, b = (tmp_path / "r1" / rel), (tmp_path / "r2" / rel)
            if rel.name == "manifest.json":
                ma, mb = json.loads(a.read_text()), json.loads(b.read_text())
                assert ma["artifacts"] == mb["artifacts"] and ma["seed"] == mb["seed"]
            else:
                assert a.read_bytes() == b.read_bytes(), rel

    def test_module_entry_point(self):
        r = subprocess.run([sys.executable, "-m", "pgmrcs", "--version"], capture_output=True, text=True)
        assert r.returncode == 0 and "pgmrcs" in r.stdout

    def test_usage_error_exit_2(self):
        with pytest.raises(SystemExit) as ei:
            main(["rcs", "--mode", "sideways"])
        assert ei.value.code == 2
