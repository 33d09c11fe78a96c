"""JSON Schema of the records the CLI emits in ``--format json``."""

from __future__ import annotations

_NUM = {"type": "number"}
_NUM_OR_NULL = {"type": ["number", "null"]}

SOLVE_RECORD = {
    "type": "object",
    "required": ["model", "param", "tau", "e", "throughput", "primary_rate", "p_c",
                 "interference", "gamma0"],
    "properties": {
        "model": {"enum": ["underlay", "overlay"]},
        "param": _NUM_OR_NULL,
        "tau": {"type": "number", "minimum": 0, "maximum": 1},
        "e": {"type": "array", "items": {"type": "number", "minimum": 0}, "minItems": 1},
        "throughput": {"type": "number", "minimum": 0},
        "primary_rate": {"type": "number", "minimum": 0},
        "p_c": {"type": "number", "minimum": 0},
        "interference": {"type": "number", "minimum": 0},
        "gamma0": _NUM_OR_NULL,
    },
    "additionalProperties": False,
}

RATE_POINT = {
    "type": "object",
    "required": ["param", "r_primary", "r_secondary"],
    "properties": {"param": _NUM_OR_NULL, "r_primary": _NUM, "r_secondary": _NUM},
    "additionalProperties": False,
}

MC_RECORD = {
    "type": "object",
    "required": ["model", "param", "value", "mean", "stderr", "trials", "infeasible"],
    "properties": {
        "model": {"enum": ["underlay", "overlay"]},
        "param": _NUM_OR_NULL,
        "value": _NUM_OR_NULL,
        "mean": _NUM,
        "stderr": {"type": "number", "minimum": 0},
        "trials": {"type": "integer", "minimum": 1},
        "infeasible": {"type": "integer", "minimum": 0},
    },
    "additionalProperties": False,
}

VERIFY_RECORD = {
    "type": "object",
    "required": ["model", "param", "feasible", "violations", "throughput", "primary_rate",
                 "kkt_max_residual"],
    "properties": {
        "model": {"enum": ["underlay", "overlay"]},
        "param": _NUM_OR_NULL,
        "feasible": {"type": "boolean"},
        "violations": {"type": "array", "items": {"type": "string"}},
        "throughput": _NUM,
        "primary_rate": _NUM,
        "kkt_max_residual": _NUM_OR_NULL,
    },
    "additionalProperties": False,
}

RESULT_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "cwpcn result",
    "type": "object",
    "required": ["schema_version", "command", "records"],
    "properties": {
        "schema_version": {"const": 1},
        "command": {"enum": ["solve-underlay", "solve-overlay", "region", "sweep-pmax",
                             "sweep-alpha", "montecarlo", "verify"]},
        "records": {"type": "array"},
    },
    "allOf": [
        {"if": {"properties": {"command": {"enum": ["solve-underlay", "solve-overlay"]}}},
         "then": {"properties": {"records": {"items": SOLVE_RECORD}}}},
        {"if": {"properties": {"command": {"const": "region"}}},
         "then": {"properties": {"records": {"items": {
             "type": "object", "required": ["model", "points"],
             "properties": {"model": {"enum": ["underlay", "overlay"]},
                            "points": {"type": "array", "items": RATE_POINT}}}}}}},
        {"if": {"properties": {"command": {"enum": ["sweep-pmax", "sweep-alpha", "montecarlo"]}}},
         "then": {"properties": {"records": {"items": MC_RECORD}}}},
        {"if": {"properties": {"command": {"const": "verify"}}},
         "then": {"properties": {"records": {"items": VERIFY_RECORD}}}},
    ],
}
