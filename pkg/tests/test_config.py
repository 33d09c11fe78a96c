import math
from pathlib import Path

import pytest
import yaml

from cwpcn.config import ConfigError, load_config, parse_config, parse_quantity

DATA = Path(__file__).parent / "data"


def base(**sections):
    doc = {"schema_version": 1, "scenario": {"preset": "case1"}}
    doc.update(sections)
    return doc


@pytest.mark.parametrize("text,kind,expected", [
    ("-90 dBm", "power", 1e-12),
    ("-60dBm", "power", 1e-9),
    ("0.1 W", "power", 0.1),
    ("100 mW", "power", 0.1),
    (0.5, "power", 0.5),
    ("-20 dB", "gain", 0.01),
    ("3", "gain", 3.0),
])
def test_quantities(text, kind, expected):
    assert parse_quantity(text, "x", kind) == pytest.approx(expected, rel=1e-12)


@pytest.mark.parametrize("text,kind", [("1 dB", "power"), ("1 W", "gain"), ("fast", "power"),
                                       (True, "power"), ([1], "gain"), ("inf", "gain")])
def test_bad_quantities(text, kind):
    with pytest.raises(ConfigError) as exc:
        parse_quantity(text, "radio.p_max", kind)
    assert exc.value.field == "radio.p_max"


def test_example_config_loads():
    spec = load_config(DATA / "case1.yaml")
    scn = spec.scenario
    assert scn.ap_position == 100.0
    assert scn.noise_ap == pytest.approx(1e-12) and scn.noise_pr == pytest.approx(1e-12)
    assert scn.gamma_itc == pytest.approx(1e-9)
    assert scn.ref_attenuation == pytest.approx(0.01)
    assert spec.instance is None


def test_schema_version_mandatory():
    with pytest.raises(ConfigError) as exc:
        parse_config({"scenario": {"preset": "case1"}})
    assert exc.value.field == "schema_version"
    with pytest.raises(ConfigError):
        parse_config(base(schema_version=2))


@pytest.mark.parametrize("doc,field", [
    (base(radio={"eta": 1.5}), "radio.eta"),
    (base(radio={"noise": "-90 dBm", "noise_ap": 1e-12}), "radio.noise"),
    (base(radio={"colour": 1}), "radio.colour"),
    (base(scenario={"preset": "case7"}), "scenario.preset"),
    (base(scenario={"preset": "case1", "fading": "rician"}), "scenario.fading"),
    (base(scenario={"preset": "case1", "trials": 0}), "scenario.trials"),
    (base(scenario={"ap_position": 100}), "scenario.cu_positions"),
    (base(sweep={"p_max": []}), "sweep.p_max"),
    (base(sweep={"models": ["interweave"]}), "sweep.models"),
    (base(allocation={"tau": 0.5}), "allocation"),
    (base(allocation={"tau": 2, "e": [0]}), "allocation.tau"),
    ({"schema_version": 1}, "scenario"),
    ({"schema_version": 1, "bogus": 1, "scenario": {"preset": "case1"}}, "<root>.bogus"),
    ([1, 2], "<root>"),
])
def test_errors_name_field(doc, field):
    with pytest.raises(ConfigError) as exc:
        parse_config(doc)
    assert exc.value.field == field
    assert str(exc.value).startswith(field)


def test_uncapped_gamma():
    spec = parse_config(base(radio={"gamma_itc": None}))
    assert math.isinf(spec.scenario.gamma_itc)


def test_explicit_instance():
    spec = load_config(DATA / "verify_bad.yaml")
    assert spec.instance.k == 2
    assert spec.instance.eta.tolist() == [0.8, 0.8]
    assert spec.allocation["e"] == [4e-6, 0.0]


def test_instance_length_mismatch():
    doc = yaml.safe_load(open(DATA / "verify_bad.yaml"))
    doc["instance"]["h_cu_pr"] = [1e-3]
    with pytest.raises(ConfigError) as exc:
        parse_config(doc)
    assert exc.value.field == "instance.h_cu_pr"


def test_grids():
    spec = load_config(DATA / "region_small.yaml")
    assert spec.gamma_grid[0] == 0.0 and spec.gamma_grid[-1] is None
    assert spec.gamma_grid[1] == pytest.approx(1e-15)
    assert spec.rbar_grid == [0, 2, 4, 6, 8, 10]


def test_invalid_yaml(tmp_path):
    p = tmp_path / "c.yaml"
    p.write_text("schema_version: [1\n")
    with pytest.raises(ConfigError):
        load_config(p)
