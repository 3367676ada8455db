"""Run configuration: a TOML file validated against a JSON schema.

One file describes one job on one system; see ``configs/`` for an example
per system.  Unknown keys are rejected at every level.
"""
from __future__ import annotations

import copy
import sys
from dataclasses import dataclass
from pathlib import Path

import jsonschema

from .errors import ConfigError

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

_NUM = {"type": "number"}
_POS = {"type": "number", "exclusiveMinimum": 0}

_PROFILE = {
    "type": "object",
    "required": ["kind"],
    "additionalProperties": False,
    "properties": {"kind": {"enum": ["paraboloid", "quartic", "cosh"]},
                   "c": _NUM, "c2": _NUM, "c4": _NUM},
}

PARAM_SCHEMAS = {
    "disk": {"m": _POS, "r": _POS, "g": _POS},
    "routh_sphere": {"m": _POS, "r": _POS, "g": _POS, "offset_a": _POS, "I1": _POS,
                     "I3": _POS},
    "surface_ball": {"m": _POS, "r": _POS, "g": _POS, "M": _POS, "profile": _PROFILE},
    "cylinder": {"m": _POS, "r": _POS, "g": _POS, "M": _POS, "rho": _POS},
}
OPTIONAL_PARAMS = {"surface_ball": {"denominator": {"enum": ["squared", "printed"]}}}

SCHEMA = {
    "type": "object",
    "required": ["system", "params"],
    "additionalProperties": False,
    "properties": {
        "system": {"enum": sorted(PARAM_SCHEMAS)},
        "variant": {"enum": ["reduced4", "extended5"]},
        "params": {"type": "object"},
        "initial": {
            "type": "object", "required": ["state"], "additionalProperties": False,
            "properties": {"state": {"type": "array", "items": _NUM, "minItems": 4,
                                     "maxItems": 5},
                           "theta0": _NUM},
        },
        "integrator": {
            "type": "object", "additionalProperties": False,
            "properties": {
                "method": {"enum": ["rk4", "adaptive"]},
                "t_end": _POS, "dt": _POS, "rtol": _POS, "atol": _POS,
                "dt_min": _POS, "dt_max": _POS,
                "monitors": {"type": "array", "uniqueItems": True,
                             "items": {"enum": ["energy", "phi", "casimirs",
                                                "hamiltonian_residual"]}},
                "casimir_base": _NUM,
            },
        },
        "verify": {
            "type": "object", "additionalProperties": False,
            "properties": {
                "samples": {"type": "integer", "minimum": 1},
                "seed": {"type": "integer", "minimum": 0},
                "variants": {"type": "array", "uniqueItems": True,
                             "items": {"enum": ["reduced4", "extended5"]}},
                "tolerances": {"type": "object", "additionalProperties": _POS},
                "include_heisenberg": {"type": "boolean"},
                "inject_sign_flip": {"type": "boolean"},
            },
        },
        "rank_scan": {
            "type": "object", "additionalProperties": False, "required": ["base"],
            "properties": {
                "base": {"type": "array", "items": _NUM, "minItems": 4, "maxItems": 5},
                "axes": {"type": "object", "additionalProperties": {
                    "type": "array", "items": [_NUM, _NUM, {"type": "integer", "minimum": 1}],
                    "minItems": 3, "maxItems": 3}},
                "tol": _POS,
            },
        },
        "output": {
            "type": "object", "additionalProperties": False,
            "properties": {"dir": {"type": "string"}, "prefix": {"type": "string"}},
        },
    },
}


def param_schema(system: str) -> dict:
    props = dict(PARAM_SCHEMAS[system], **OPTIONAL_PARAMS.get(system, {}))
    return {"type": "object", "required": sorted(PARAM_SCHEMAS[system]),
            "additionalProperties": False, "properties": props}


def _fail(err: jsonschema.ValidationError, prefix=()):
    path = "/".join(str(p) for p in (*prefix, *err.absolute_path)) or "<root>"
    raise ConfigError(f"config error at {path}: {err.message}")


def validate(raw: dict) -> dict:
    """Schema-check a parsed config; raises :class:`ConfigError` naming the key."""
    err = jsonschema.exceptions.best_match(jsonschema.Draft7Validator(SCHEMA).iter_errors(raw))
    if err is not None:
        _fail(err)
    err = jsonschema.exceptions.best_match(
        jsonschema.Draft7Validator(param_schema(raw["system"])).iter_errors(raw["params"]))
    if err is not None:
        _fail(err, ("params",))
    if raw["system"] == "cylinder" and raw.get("variant", "reduced4") != "reduced4":
        raise ConfigError("config error at variant: the cylinder has only reduced4")
    return raw


@dataclass(frozen=True)
class RunConfig:
    raw: dict
    source: str = ""

    @property
    def system(self) -> str:
        return self.raw["system"]

    @property
    def variant(self) -> str:
        return self.raw.get("variant", "reduced4")

    @property
    def params(self) -> dict:
        return copy.deepcopy(self.raw["params"])

    def section(self, name: str) -> dict:
        return copy.deepcopy(self.raw.get(name, {}))

    @property
    def prefix(self) -> str:
        return self.section("output").get("prefix") or Path(self.source).stem or self.system


def loads(text: str, source: str = "") -> RunConfig:
    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"config is not valid TOML: {exc}") from None
    return RunConfig(validate(raw), source)


def load(path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    return loads(text, str(path))
