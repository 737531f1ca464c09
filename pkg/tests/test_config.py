import json

import pytest

from pgmrcs.cellmodel import REFERENCE_GAPS_MM, Polarization
from pgmrcs.config import RunConfig, load_config
from pgmrcs.errors import BudgetError, ValidationError
from pgmrcs.layout import Variant
from pgmrcs.metrics import REFERENCE_WEIGHTS
from pgmrcs.scatter import Observation


def test_defaults():
    cfg = RunConfig.from_dict({})
    assert [c.gap_g for c in cfg.palette] == list(REFERENCE_GAPS_MM)
    assert (cfg.grid.f_start, cfg.grid.f_stop, cfg.grid.n_points) == (10.0, 35.0, 251)
    assert cfg.array.n_cells == 1600 and cfg.modulation.period_mm == 24.0
    assert cfg.objective.band == (11.3, 32.3) and cfg.observation is Observation.SPECULAR
    assert cfg == RunConfig()


def test_round_trip():
    d = {
        "palette": {"gaps_mm": [0.5, 1.5, 2.5], "tan_delta": 0.0027},
        "incidence": {"theta_deg": 40, "polarization": "tm"},
        "modulation": {"variant": "QUADRANT_SYMMETRIC", "phase_rad": 1.0},
        "array": {"P": 10, "Q": 12},
        "weights": [40, 40, 40],
        "ga": {"rng_seed": 7, "generations": 5},
        "scatter": {"observation": "backscatter", "element": "cosine"},
    }
    cfg = RunConfig.from_dict(d)
    assert cfg.incidence.polarization is Polarization.TM
    assert cfg.modulation.variant is Variant.QUADRANT_SYMMETRIC
    assert cfg.palette[1].tan_delta == 0.0027
    assert RunConfig.from_dict(json.loads(json.dumps(cfg.to_dict()))) == cfg


def test_palette_as_cell_list():
    cfg = RunConfig.from_dict({"palette": [{"gap_mm": 1.0}, {"gap_mm": 2.0, "eps_r": 3.55}]})
    assert len(cfg.palette) == 2


@pytest.mark.parametrize(
    "d,field",
    [
        ({"bogus": 1}, "bogus"),
        ({"grid": {"f_start": 10, "f_stop": 35, "n_points": 1}}, "grid"),
        ({"grid": {"f_start": 10}}, "grid"),
        ({"grid": {"f_start": 10, "f_stop": 35, "n_points": 251, "step": 1}}, "grid.step"),
        ({"incidence": {"theta_deg": 95}}, "incidence.theta_deg"),
        ({"incidence": {"polarization": "XX"}}, "incidence.polarization"),
        ({"palette": {"gaps_mm": [2.0, 1.0]}}, "palette.gaps_mm"),
        ({"palette": {"gaps_mm": [1.0]}}, "palette"),
        ({"palette": {"gaps_mm": [1.0, 6.5]}}, "palette"),
        ({"ga": {"population_size": 1}}, "ga.population_size"),
        ({"array": {"P": 0}}, "array.P"),
        ({"objective": {"kind": "maximin"}}, "objective.kind"),
        ({"objective": {"band": [5, 40]}}, "objective.band"),
        ({"scatter": {"theta_step_deg": 0.7}}, "scatter.theta_step_deg"),
        ({"scatter": {"observation": "sideways"}}, "scatter.observation"),
        ({"modulation": {"variant": "diagonal"}}, "modulation.variant"),
        ({"weights": [1600]}, "weights"),
        ({"layout": 3}, "layout"),
    ],
)
def test_field_level_errors(d, field):
    with pytest.raises(ValidationError) as ei:
        RunConfig.from_dict(d)
    assert f"'{field}" in str(ei.value)


def test_weights_budget():
    w = list(REFERENCE_WEIGHTS.counts)
    w[0] -= 1
    with pytest.raises(BudgetError, match="deficit 1"):
        RunConfig.from_dict({"weights": w})
    with pytest.raises(ValidationError, match="3 entries"):
        RunConfig.from_dict({"weights": [800, 400, 400]})


def test_min_count_budget():
    with pytest.raises(ValidationError, match="ga.min_count"):
        RunConfig.from_dict({"ga": {"min_count": 300}})


def test_load_relative_paths(tmp_path):
    sub = tmp_path / "cfg"
    sub.mkdir()
    (sub / "run.json").write_text(json.dumps({"phase_table": "pt.csv"}))
    cfg = load_config(sub / "run.json")
    assert cfg.resolve(cfg.phase_table) == sub / "pt.csv"


def test_load_bad_json(tmp_path):
    (tmp_path / "c.json").write_text("{not json")
    with pytest.raises(ValidationError, match="not valid JSON"):
        load_config(tmp_path / "c.json")


def test_overrides_win():
    cfg = RunConfig().with_overrides(out_dir="x", grid=None)
    assert cfg.out_dir == "x" and cfg.grid == RunConfig().grid
