"""JSON run configuration: schema, validation and conversion to parameter objects."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import jsonschema

from .errors import DomainError
from .noise import NoiseSpectrum
from .params import ChargeQubitParams, CouplerParams
from .sweep import VariationSpec

_POS = {"type": "number", "exclusiveMinimum": 0}

_QUBIT = {
    "type": "object",
    "additionalProperties": False,
    "required": ["E_c", "E_J"],
    "properties": {
        "E_c": _POS,
        "E_J": _POS,
        "n_g": {"type": "number"},
        "flux": {"type": "number", "minimum": 0, "maximum": 0.5},
    },
}

_SPECTRUM = {
    "oneOf": [
        {
            "type": "object",
            "additionalProperties": False,
            "required": ["variant", "S0"],
            "properties": {"variant": {"const": "white"}, "S0": {"type": "number", "minimum": 0}},
        },
        {
            "type": "object",
            "additionalProperties": False,
            "required": ["variant", "alpha", "cutoff"],
            "properties": {
                "variant": {"const": "ohmic"},
                "alpha": {"type": "number", "minimum": 0},
                "cutoff": _POS,
            },
        },
        {
            "type": "object",
            "additionalProperties": False,
            "required": ["variant", "A", "omega_ir", "omega_uv"],
            "properties": {
                "variant": {"const": "one_over_f"},
                "A": {"type": "number", "minimum": 0},
                "omega_ir": _POS,
                "omega_uv": _POS,
            },
        },
    ]
}

SCHEMA: dict[str, Any] = {
    "type": "object",
    "additionalProperties": False,
    "required": ["topology", "N", "qubits", "coupler"],
    "properties": {
        "topology": {"enum": ["chain", "common"]},
        "N": {"type": "integer", "minimum": 1},
        "qubits": {"oneOf": [_QUBIT, {"type": "array", "items": _QUBIT, "minItems": 1}]},
        "coupler": {
            "type": "object",
            "additionalProperties": False,
            "required": ["variant"],
            "properties": {
                "variant": {"enum": ["large_jj", "common_inductance"]},
                "E_J0": {"oneOf": [_POS, {"type": "array", "items": _POS}]},
                "L": _POS,
                "common_flux": {"type": "number", "minimum": 0, "maximum": 0.5},
            },
        },
        "calibration": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "g_target": _POS,
                "tune_bias": {"type": "boolean"},
                "tol": _POS,
            },
        },
        "variations": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "E_J": {"type": "number", "minimum": 0, "maximum": 0.5},
                "E_J0": {"type": "number", "minimum": 0, "maximum": 0.5},
                "L": {"type": "number", "minimum": 0, "maximum": 0.5},
                "distribution": {"enum": ["gaussian", "uniform"]},
                "samples": {"type": "integer", "minimum": 1},
                "seed": {"type": "integer"},
                "truncation": _POS,
                "with_bias": {"enum": [True, False, "both"]},
                "method": {"enum": ["auto", "diagonal", "dense"]},
            },
        },
        "noise": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "spectrum": _SPECTRUM,
                "epsilon_ratio": {"type": "number", "minimum": 0},
                "qubit_T2_ns": _POS,
                "t_s_ns": _POS,
            },
        },
    },
}


class ConfigError(DomainError):
    """Configuration failed validation; ``pointer`` locates the offending key."""

    def __init__(self, message: str, pointer: str = "/"):
        super().__init__(f"{pointer}: {message}")
        self.pointer = pointer


@dataclass
class NoiseOptions:
    spectrum: NoiseSpectrum | None = None
    epsilon_ratio: float | None = None
    qubit_T2_ns: float | None = None
    t_s_ns: float | None = None


@dataclass
class RunConfig:
    topology: str
    n: int
    qubits: list[ChargeQubitParams]
    couplers: list[CouplerParams]
    g_target: float | None = None
    tune_bias: bool = True
    tol: float = 1e-9
    variations: VariationSpec | None = None
    with_bias: bool | str = "both"
    method: str = "auto"
    noise: NoiseOptions | None = None
    raw: dict = field(default_factory=dict, repr=False)

    @property
    def coupler(self) -> CouplerParams:
        return self.couplers[0]


def _pointer(path) -> str:
    return "/" + "/".join(str(p) for p in path)


def parse_config(doc: dict, *, seed: int | None = None) -> RunConfig:
    validator = jsonschema.Draft202012Validator(SCHEMA)
    errors = sorted(validator.iter_errors(doc), key=lambda e: list(e.absolute_path))
    if errors:
        # oneOf failures report on the parent; dig to the most specific cause
        err = errors[0]
        while err.context:
            err = min(err.context, key=lambda e: -len(e.absolute_path))
        raise ConfigError(err.message, _pointer(err.absolute_path))

    topology, n = doc["topology"], doc["N"]
    qraw = doc["qubits"]
    if isinstance(qraw, list):
        if len(qraw) != n:
            raise ConfigError(f"{len(qraw)} qubit entries for N = {n}", "/qubits")
    else:
        qraw = [qraw] * n
    try:
        qubits = [ChargeQubitParams(**q) for q in qraw]
    except DomainError as exc:
        raise ConfigError(str(exc), "/qubits") from exc

    c = doc["coupler"]
    if topology == "chain":
        if c["variant"] != "large_jj":
            raise ConfigError("chain topology needs a large_jj coupler", "/coupler/variant")
        if "E_J0" not in c:
            raise ConfigError("large_jj coupler needs E_J0", "/coupler")
        e0 = c["E_J0"]
        e0 = e0 if isinstance(e0, list) else [e0] * max(n - 1, 0)
        if len(e0) != max(n - 1, 0):
            raise ConfigError(f"{len(e0)} E_J0 values for {n - 1} couplers", "/coupler/E_J0")
        couplers = [CouplerParams.large_jj(v) for v in e0]
    else:
        if c["variant"] != "common_inductance":
            raise ConfigError("common topology needs a common_inductance coupler", "/coupler/variant")
        if "L" not in c:
            raise ConfigError("common_inductance coupler needs L (nH)", "/coupler")
        couplers = [CouplerParams.common_inductance(c["L"], c.get("common_flux", 0.0))]

    cal = doc.get("calibration", {})
    cfg = RunConfig(
        topology=topology,
        n=n,
        qubits=qubits,
        couplers=couplers,
        g_target=cal.get("g_target"),
        tune_bias=cal.get("tune_bias", True),
        tol=cal.get("tol", 1e-9),
        raw=doc,
    )
    if "variations" in doc:
        v = dict(doc["variations"])
        cfg.with_bias = v.pop("with_bias", "both")
        cfg.method = v.pop("method", "auto")
        if seed is not None:
            v["seed"] = seed
        cfg.variations = VariationSpec(**v)
    if "noise" in doc:
        nz = doc["noise"]
        try:
            spectrum = NoiseSpectrum.from_dict(nz["spectrum"]) if "spectrum" in nz else None
        except DomainError as exc:
            raise ConfigError(str(exc), "/noise/spectrum") from exc
        cfg.noise = NoiseOptions(
            spectrum, nz.get("epsilon_ratio"), nz.get("qubit_T2_ns"), nz.get("t_s_ns")
        )
    return cfg


def load_config(path: str | Path, *, seed: int | None = None) -> RunConfig:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc}") from exc
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    return parse_config(doc, seed=seed)
