"""YAML run configuration: parsing, unit conversion and validation.

Physical quantities may be plain numbers (linear units: watts, linear gain)
or strings with a unit suffix: ``"-90 dBm"``, ``"-20 dB"``, ``"0.1 W"``,
``"100 mW"``.  Conversion to linear units happens once, here.

Layout::

    schema_version: 1
    scenario:            # optional when an explicit ``instance`` is given
      preset: case1      # case1 | case2 | case3, or give positions below
      ap_position: 100
      cu_positions: [96, 95, 105, 110, 115]
      pt_position: 0
      pr_position: 200
      pathloss_exponent: 3
      ref_attenuation: -20 dB
      ref_distance: 1
      fading: none       # none | rayleigh
      seed: 0
      trials: 2000
    radio:
      p_primary: 0.1 W
      p_max: 1 W
      noise: -90 dBm     # or noise_ap / noise_pr separately
      eta: 0.8
      gamma_itc: -60 dBm # null means uncapped
      r_bar: 5
    instance:            # optional explicit channel gains (linear)
      h_ap_pr: 1.0e-8
      ...
    sweep:
      gamma_grid: [...]  # region, underlay side
      rbar_grid: [...]   # region, overlay side
      p_max: [10 W, 100 W]
      alpha: [2, 3, 4, 5]
      models: [underlay, overlay]
    allocation:          # for ``verify``
      model: underlay
      tau: 0.5
      e: [...]
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import yaml

from .model import NetworkInstance
from .sim import CASE_AP_POSITION, Scenario, db_to_linear, dbm_to_watt, preset

__all__ = ["ConfigError", "RunSpec", "SCHEMA_VERSION", "load_config", "parse_config",
           "parse_quantity"]

SCHEMA_VERSION = 1

_QUANTITY = re.compile(r"^\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)\s*(dBm|dB|W|mW)?\s*$")
_MODELS = ("underlay", "overlay")


class ConfigError(ValueError):
    """Schema or value error; ``field`` names the offending config key."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


def parse_quantity(value: Any, field: str, kind: str = "power") -> float:
    """Convert a number or unit-suffixed string to a linear float.

    ``kind`` is ``"power"`` (W, mW, dBm) or ``"gain"`` (dB).  Bare numbers
    are taken as already linear.
    """
    if isinstance(value, bool):
        raise ConfigError(field, "expected a number, got a boolean")
    if isinstance(value, (int, float)):
        x = float(value)
    elif isinstance(value, str):
        m = _QUANTITY.match(value)
        if not m:
            raise ConfigError(field, f"cannot parse quantity {value!r}")
        num, unit = float(m.group(1)), m.group(2)
        allowed = {"power": (None, "W", "mW", "dBm"), "gain": (None, "dB")}[kind]
        if unit not in allowed:
            raise ConfigError(field, f"unit {unit!r} not valid for a {kind}")
        if unit == "dBm":
            x = dbm_to_watt(num)
        elif unit == "dB":
            x = db_to_linear(num)
        elif unit == "mW":
            x = num * 1e-3
        else:
            x = num
    else:
        raise ConfigError(field, f"expected a number or quantity string, got {type(value).__name__}")
    if not math.isfinite(x):
        raise ConfigError(field, "must be finite")
    return x


def _positive(x: float, field: str) -> float:
    if not x > 0:
        raise ConfigError(field, "must be positive")
    return x


def _nonneg(x: float, field: str) -> float:
    if not x >= 0:
        raise ConfigError(field, "must be nonnegative")
    return x


def _mapping(doc: dict, key: str, required: bool = False) -> dict:
    sub = doc.get(key)
    if sub is None:
        if required:
            raise ConfigError(key, "section is required")
        return {}
    if not isinstance(sub, dict):
        raise ConfigError(key, "must be a mapping")
    return sub


def _check_keys(section: dict, allowed: set, prefix: str):
    for key in section:
        if key not in allowed:
            raise ConfigError(f"{prefix}.{key}", "unknown key")


def _int(value, field: str, lo: int, hi: int | None = None) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(field, "must be an integer")
    if value < lo or (hi is not None and value > hi):
        raise ConfigError(field, f"must lie in [{lo}, {hi if hi is not None else 'inf'}]")
    return value


def _grid(values, field: str, kind: str | None, allow_null: bool = False) -> list:
    if not isinstance(values, list) or not values:
        raise ConfigError(field, "must be a nonempty list")
    out = []
    for i, v in enumerate(values):
        name = f"{field}[{i}]"
        if v is None and allow_null:
            out.append(None)
        elif kind is None:
            out.append(_nonneg(parse_quantity(v, name, "gain"), name))
        else:
            out.append(_nonneg(parse_quantity(v, name, kind), name))
    return out


_RADIO_KEYS = {"p_primary", "p_max", "noise", "noise_ap", "noise_pr", "eta", "gamma_itc", "r_bar"}
_SCENARIO_KEYS = {"preset", "ap_position", "cu_positions", "pt_position", "pr_position",
                  "pathloss_exponent", "ref_attenuation", "ref_distance", "fading", "seed",
                  "trials"}
_INSTANCE_KEYS = {"h_ap_pr", "h_ap_cu", "h_cu_pr", "g_pt_pr", "g_pt_cu", "g_pt_ap"}
_SWEEP_KEYS = {"gamma_grid", "rbar_grid", "p_max", "alpha", "models"}
_ALLOC_KEYS = {"model", "tau", "e", "param"}
_TOP_KEYS = {"schema_version", "scenario", "radio", "instance", "sweep", "allocation"}


def _radio(doc: dict) -> dict:
    radio = _mapping(doc, "radio")
    _check_keys(radio, _RADIO_KEYS, "radio")
    out = {}
    for key in ("p_primary", "p_max"):
        if key in radio:
            out[key] = _nonneg(parse_quantity(radio[key], f"radio.{key}"), f"radio.{key}")
    if "noise" in radio:
        if "noise_ap" in radio or "noise_pr" in radio:
            raise ConfigError("radio.noise", "give either noise or noise_ap/noise_pr")
        n = _positive(parse_quantity(radio["noise"], "radio.noise"), "radio.noise")
        out["noise_ap"] = out["noise_pr"] = n
    for key in ("noise_ap", "noise_pr"):
        if key in radio:
            out[key] = _positive(parse_quantity(radio[key], f"radio.{key}"), f"radio.{key}")
    if "eta" in radio:
        eta = parse_quantity(radio["eta"], "radio.eta", "gain")
        if not 0 < eta <= 1:
            raise ConfigError("radio.eta", "must lie in (0, 1]")
        out["eta"] = eta
    if "gamma_itc" in radio:
        g = radio["gamma_itc"]
        out["gamma_itc"] = math.inf if g is None else _nonneg(
            parse_quantity(g, "radio.gamma_itc"), "radio.gamma_itc")
    if "r_bar" in radio:
        out["r_bar"] = _nonneg(parse_quantity(radio["r_bar"], "radio.r_bar", "gain"),
                               "radio.r_bar")
    return out


def _scenario(doc: dict, radio: dict) -> Scenario:
    sc = dict(_mapping(doc, "scenario"))
    _check_keys(sc, _SCENARIO_KEYS, "scenario")
    kw: dict = {}
    for key in ("pt_position", "pr_position", "ap_position", "pathloss_exponent",
                "ref_distance"):
        if key in sc:
            kw[key] = parse_quantity(sc[key], f"scenario.{key}", "gain")
    if "ref_attenuation" in sc:
        kw["ref_attenuation"] = _positive(
            parse_quantity(sc["ref_attenuation"], "scenario.ref_attenuation", "gain"),
            "scenario.ref_attenuation")
    if "cu_positions" in sc:
        cu = sc["cu_positions"]
        if not isinstance(cu, list) or not cu:
            raise ConfigError("scenario.cu_positions", "must be a nonempty list")
        kw["cu_positions"] = tuple(parse_quantity(x, f"scenario.cu_positions[{i}]", "gain")
                                   for i, x in enumerate(cu))
    if "fading" in sc:
        if sc["fading"] not in ("none", "rayleigh"):
            raise ConfigError("scenario.fading", "must be one of none, rayleigh")
        kw["fading"] = sc["fading"]
    if "seed" in sc:
        kw["seed"] = _int(sc["seed"], "scenario.seed", 0, 2 ** 64 - 1)
    if "trials" in sc:
        kw["trials"] = _int(sc["trials"], "scenario.trials", 1)
    kw.update(radio)
    name = sc.get("preset")
    try:
        if name is not None:
            if name not in CASE_AP_POSITION:
                raise ConfigError("scenario.preset",
                                  f"must be one of {', '.join(sorted(CASE_AP_POSITION))}")
            base = preset(name)
            return base.replace(**kw)
        for key in ("ap_position", "cu_positions"):
            if key not in kw:
                raise ConfigError(f"scenario.{key}", "required when no preset is given")
        return Scenario(**kw)
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError("scenario", str(exc)) from None


def _instance(doc: dict, scn: Scenario) -> NetworkInstance | None:
    if "instance" not in doc:
        return None
    inst = _mapping(doc, "instance")
    _check_keys(inst, _INSTANCE_KEYS, "instance")
    values: dict = {}
    for key in _INSTANCE_KEYS:
        if key not in inst:
            raise ConfigError(f"instance.{key}", "required")
        v = inst[key]
        if key in ("h_ap_cu", "h_cu_pr", "g_pt_cu"):
            if not isinstance(v, list) or not v:
                raise ConfigError(f"instance.{key}", "must be a nonempty list")
            values[key] = [_nonneg(parse_quantity(x, f"instance.{key}[{i}]", "gain"),
                                   f"instance.{key}[{i}]") for i, x in enumerate(v)]
        else:
            values[key] = _nonneg(parse_quantity(v, f"instance.{key}", "gain"),
                                  f"instance.{key}")
    k = len(values["h_ap_cu"])
    for key in ("h_cu_pr", "g_pt_cu"):
        if len(values[key]) != k:
            raise ConfigError(f"instance.{key}", f"must have {k} entries like h_ap_cu")
    return NetworkInstance(p_primary=scn.p_primary, p_max=scn.p_max, noise_ap=scn.noise_ap,
                           noise_pr=scn.noise_pr, eta=scn.eta, **values)


@dataclass(frozen=True)
class RunSpec:
    """Validated configuration, all quantities linear."""

    scenario: Scenario
    instance: NetworkInstance | None = None
    gamma_grid: list | None = None
    rbar_grid: list | None = None
    p_max_grid: list = field(default_factory=lambda: [10.0, 100.0])
    alpha_grid: list = field(default_factory=lambda: [2.0, 3.0, 4.0, 5.0])
    models: tuple = _MODELS
    allocation: dict | None = None


def parse_config(doc: Any) -> RunSpec:
    if not isinstance(doc, dict):
        raise ConfigError("<root>", "config must be a mapping")
    _check_keys(doc, _TOP_KEYS, "<root>")
    if "schema_version" not in doc:
        raise ConfigError("schema_version", "is mandatory")
    if doc["schema_version"] != SCHEMA_VERSION:
        raise ConfigError("schema_version", f"unsupported version {doc['schema_version']!r}; "
                          f"expected {SCHEMA_VERSION}")
    radio = _radio(doc)
    if "scenario" not in doc and "instance" not in doc:
        raise ConfigError("scenario", "a scenario or an instance section is required")
    if "scenario" in doc:
        scn = _scenario(doc, radio)
    else:
        # explicit gains only: positions are irrelevant but the radio block is reused
        scn = preset("case1").replace(**radio)
    inst = _instance(doc, scn)

    sweep = _mapping(doc, "sweep")
    _check_keys(sweep, _SWEEP_KEYS, "sweep")
    kw: dict = {}
    if "gamma_grid" in sweep:
        kw["gamma_grid"] = _grid(sweep["gamma_grid"], "sweep.gamma_grid", "power",
                                 allow_null=True)
    if "rbar_grid" in sweep:
        kw["rbar_grid"] = _grid(sweep["rbar_grid"], "sweep.rbar_grid", None)
    if "p_max" in sweep:
        kw["p_max_grid"] = _grid(sweep["p_max"], "sweep.p_max", "power")
    if "alpha" in sweep:
        kw["alpha_grid"] = [_positive(a, f"sweep.alpha[{i}]") for i, a in
                            enumerate(_grid(sweep["alpha"], "sweep.alpha", None))]
    if "models" in sweep:
        models = sweep["models"]
        if not isinstance(models, list) or not models or any(m not in _MODELS for m in models):
            raise ConfigError("sweep.models", "must be a nonempty list of underlay, overlay")
        kw["models"] = tuple(models)

    if "allocation" in doc:
        alloc = _mapping(doc, "allocation")
        _check_keys(alloc, _ALLOC_KEYS, "allocation")
        model = alloc.get("model", "underlay")
        if model not in _MODELS:
            raise ConfigError("allocation.model", "must be underlay or overlay")
        if "tau" not in alloc or "e" not in alloc:
            raise ConfigError("allocation", "needs tau and e")
        tau = parse_quantity(alloc["tau"], "allocation.tau", "gain")
        if not 0 <= tau <= 1:
            raise ConfigError("allocation.tau", "must lie in [0, 1]")
        e = alloc["e"]
        if not isinstance(e, list) or not e:
            raise ConfigError("allocation.e", "must be a nonempty list")
        e = [_nonneg(parse_quantity(x, f"allocation.e[{i}]", "gain"), f"allocation.e[{i}]")
             for i, x in enumerate(e)]
        param = alloc.get("param")
        if param is not None:
            kind = "power" if model == "underlay" else "gain"
            param = _nonneg(parse_quantity(param, "allocation.param", kind), "allocation.param")
        kw["allocation"] = {"model": model, "tau": tau, "e": e, "param": param}
    return RunSpec(scenario=scn, instance=inst, **kw)


def load_config(path: str | Path) -> RunSpec:
    """Read and validate a YAML config.  I/O errors propagate as ``OSError``."""
    text = Path(path).read_text(encoding="utf-8")
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError("<root>", f"invalid YAML: {exc}") from None
    return parse_config(doc)
