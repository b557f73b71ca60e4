"""Scenario files: JSON documents describing object, apparatus, coupling and run options.

See README.md for the full key list.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import jsonschema
import numpy as np

from ringmeas.model import ApparatusSpec, CouplingSpec, ObjectSpec

ROUTES = ("chi_exact", "chi_mc", "subalgebra", "two_apparatus")

_number = {"type": "number"}
_entry = {"anyOf": [_number, {"type": "array", "items": _number, "minItems": 2, "maxItems": 2}]}
_matrix = {"type": "array", "minItems": 1, "items": {"type": "array", "minItems": 1, "items": _entry}}

SCHEMA = {
    "type": "object",
    "required": ["object", "apparatus", "coupling"],
    "additionalProperties": False,
    "properties": {
        "object": {
            "type": "object",
            "required": ["x", "n", "rho_s"],
            "additionalProperties": False,
            "properties": {
                "x": {"type": "array", "minItems": 1, "items": _number},
                "n": {"type": "array", "minItems": 1, "items": {"type": "integer"}},
                "a": {"type": "number", "exclusiveMinimum": 0},
                "projector_basis": {"anyOf": [{"const": "computational"}, _matrix]},
                "ranks": {"type": "array", "items": {"type": "integer", "minimum": 1}},
                "rho_s": _matrix,
            },
        },
        "apparatus": {
            "type": "object",
            "required": ["m", "w0", "K"],
            "additionalProperties": False,
            "properties": {
                "L": {"type": "number", "exclusiveMinimum": 0},
                "hbar": {"type": "number", "exclusiveMinimum": 0},
                "m": {"type": "integer", "minimum": 0},
                "w0": {"type": "array", "minItems": 1, "items": _number},
                "K": {"type": "integer", "minimum": 0},
            },
        },
        "coupling": {
            "type": "object",
            "required": ["gamma"],
            "additionalProperties": False,
            "properties": {
                "gamma": _number,
                "lambda": _number,
                "allow_nonstandard_shift": {"type": "boolean"},
            },
        },
        "run": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "route": {"enum": list(ROUTES)},
                "mc_samples": {"type": "integer", "minimum": 1},
                "seed": {"type": "integer", "minimum": 0},
                "qgrid_points": {"type": "integer", "minimum": 1},
                "outcome": {"type": "integer", "minimum": 0},
                "out": {"type": "string"},
            },
        },
        "appendix": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"c": {"type": "number", "exclusiveMinimum": 0}},
        },
    },
}


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunOptions:
    route: str = "chi_exact"
    mc_samples: int = 1000
    seed: int | None = None
    qgrid_points: int | None = None
    outcome: int | None = None
    out: str | None = None


@dataclass(frozen=True)
class ScenarioConfig:
    obj: ObjectSpec
    app: ApparatusSpec
    cpl: CouplingSpec
    rho_s: np.ndarray
    standard_shift: bool = True
    run: RunOptions = field(default_factory=RunOptions)
    jump: float | None = None

    def with_run(self, **changes) -> "ScenarioConfig":
        changes = {k: v for k, v in changes.items() if v is not None}
        return replace(self, run=replace(self.run, **changes))


def _complex_matrix(rows) -> np.ndarray:
    width = {len(r) for r in rows}
    if len(width) != 1:
        raise ConfigError("matrix rows must have equal length")
    return np.array([[complex(*e) if isinstance(e, list) else complex(e) for e in r] for r in rows])


def parse_config(text: str, source: str = "<config>") -> ScenarioConfig:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        lines = text.splitlines()
        context = lines[exc.lineno - 1] if 0 < exc.lineno <= len(lines) else ""
        raise ConfigError(f"{source}:{exc.lineno}:{exc.colno}: {exc.msg}\n    {context}") from exc
    try:
        jsonschema.validate(data, SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"{source}: schema error at {where}: {exc.message}") from exc
    o, a, c = data["object"], data["apparatus"], data["coupling"]
    basis = o.get("projector_basis", "computational")
    obj = ObjectSpec.from_basis(
        o["x"], o["n"], a=o.get("a", 1.0), ranks=o.get("ranks"),
        basis=None if basis == "computational" else _complex_matrix(basis))
    app = ApparatusSpec(m=a["m"], w0=a["w0"], K=a["K"], L=a.get("L", 2 * math.pi),
                        hbar=a.get("hbar", 1.0))
    cpl = CouplingSpec(gamma=c["gamma"], lam=c.get("lambda", 0.0))
    rho_s = _complex_matrix(o["rho_s"])
    if rho_s.shape != (obj.d, obj.d):
        raise ConfigError(f"{source}: object.rho_s must be {obj.d}x{obj.d}, got {rho_s.shape}")
    run = RunOptions(**data.get("run", {}))
    return ScenarioConfig(obj, app, cpl, rho_s,
                          standard_shift=not c.get("allow_nonstandard_shift", False),
                          run=run, jump=data.get("appendix", {}).get("c"))


def load_config(path) -> ScenarioConfig:
    path = Path(path)
    return parse_config(path.read_text(), str(path))
