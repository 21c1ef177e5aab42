"""Run configuration: one JSON document, schema-checked before anything runs.

    {
      "circuit": {"n_modes": 1, "gates": [...], "init": "random"},
      "target":  {"kind": "ClassicalGaussian", "mu": [0], "sigma": [1], "count": 10000, "seed": 0},
      "train":   {"learning_rate": 0.05, "max_iterations": 60, ..., "kernel": {...}},
      "grad_check": {"t": 0.01, "gaussian_shift": 0.001},
      "output_dir": "runs/example"
    }
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from pathlib import Path

import jsonschema
import numpy as np

from .circuit import TRAINING_SHIFTS, Circuit
from .datasets import TargetSpec
from .errors import FormatError
from .fock import FockConfig
from .gates import GATE_PARAMS
from .kernels import COMBINERS, KERNEL_KINDS, KernelSpec
from .trainer import UPDATE_MODES, TrainConfig, initialize

_num = {"type": "number"}
_pos = {"type": "number", "exclusiveMinimum": 0}
_int1 = {"type": "integer", "minimum": 1}
_int2 = {"type": "integer", "minimum": 2}

_GATE = {
    "type": "object",
    "additionalProperties": False,
    "required": ["kind", "params", "modes"],
    "properties": {
        "kind": {"enum": sorted(GATE_PARAMS)},
        "params": {"type": "object", "additionalProperties": _num},
        "modes": {"type": "array", "items": {"type": "integer", "minimum": 0},
                  "minItems": 1, "maxItems": 2},
        "trainable": {"type": "array", "items": {"type": "boolean"}},
    },
}

_CIRCUIT = {
    "type": "object",
    "additionalProperties": False,
    "required": ["n_modes", "gates"],
    "properties": {
        "n_modes": _int1,
        "gates": {"type": "array", "items": _GATE},
        "init": {"enum": ["random", "given"]},
    },
}

_KERNEL = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "kind": {"enum": list(KERNEL_KINDS)},
        "sigma": {"anyOf": [_pos, {"type": "null"}]},
        "cutoff": _int2,
        "combiner": {"enum": list(COMBINERS)},
        "hbar": _pos,
        "norm_floor": {"type": "number", "minimum": 0, "maximum": 1},
    },
}

_SHIFTS = {
    "type": "object",
    "additionalProperties": False,
    "properties": {k: _pos for k in ("displacement", "squeezing", "angle", "nongaussian")},
}

_TRANSMISSIVITY = {"type": "number", "minimum": 0, "maximum": 1}

_TRAIN = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "learning_rate": _pos,
        "max_iterations": _int1,
        "m_model": _int2,
        "n_data": _int2,
        "r_shift": _int1,
        "s_shift": _int1,
        "seed": {"type": "integer", "minimum": 0, "maximum": 2**64 - 1},
        "noise": {"anyOf": [{"type": "null"}, _TRANSMISSIVITY,
                            {"type": "array", "items": _TRANSMISSIVITY}]},
        "kernel": _KERNEL,
        "convergence_window": _int1,
        "convergence_tol": {"type": "number", "minimum": 0},
        "update_mode": {"enum": list(UPDATE_MODES)},
        "reuse_model_samples": {"type": "boolean"},
        "shifts": _SHIFTS,
        "cutoff": _int2,
        "norm_floor": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
    },
}

_TARGET = {
    "type": "object",
    "additionalProperties": False,
    "required": ["kind"],
    "properties": {
        "kind": {"enum": ["ClassicalGaussian", "QuantumCircuit"]},
        "mu": {"type": "array", "items": _num, "minItems": 1},
        "sigma": {"type": "array", "items": _pos, "minItems": 1},
        "circuit": _CIRCUIT,
        "count": _int1,
        "seed": {"type": "integer", "minimum": 0},
    },
}

_GRAD_CHECK = {
    "type": "object",
    "additionalProperties": False,
    "properties": {"t": _pos, "gaussian_shift": _pos},
}

SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["circuit"],
    "properties": {
        "circuit": _CIRCUIT,
        "target": _TARGET,
        "train": _TRAIN,
        "grad_check": _GRAD_CHECK,
        "output_dir": {"type": "string", "minLength": 1},
    },
}


class ConfigError(ValueError):
    """Invalid run configuration; the CLI maps it to exit code 2."""


@dataclass(frozen=True)
class RunConfig:
    circuit: Circuit
    target: TargetSpec
    train: TrainConfig
    grad_t: float
    grad_gaussian_shift: float
    output_dir: Path
    raw: dict


def _circuit(d: dict, name: str) -> Circuit:
    for g in d["gates"]:
        expected = set(GATE_PARAMS[g["kind"]])
        if set(g["params"]) != expected:
            raise ConfigError(f"{name}: {g['kind']} needs params {sorted(expected)}, got {sorted(g['params'])}")
    try:
        return Circuit.from_dict(d, name)
    except (ValueError, IndexError) as exc:
        raise ConfigError(f"{name}: {exc}") from exc


def _train(d: dict, n_modes: int) -> TrainConfig:
    d = dict(d)
    kernel = KernelSpec(**d.pop("kernel", {}))
    shifts = replace(TRAINING_SHIFTS, **d.pop("shifts", {}))
    fock = FockConfig(cutoff=d.pop("cutoff", 7), norm_floor=d.pop("norm_floor", 0.99))
    noise = d.pop("noise", None)
    if noise is not None:
        noise = [float(noise)] * n_modes if np.isscalar(noise) else list(noise)
        if len(noise) != n_modes:
            raise ConfigError(f"train.noise: {len(noise)} transmissivities for {n_modes} modes")
        noise = tuple(noise)
    return TrainConfig(noise=noise, kernel=kernel, shifts=shifts, fock=fock, **d)


def parse(raw: dict) -> RunConfig:
    try:
        jsonschema.validate(raw, SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"config {where}: {exc.message}") from exc
    circuit = _circuit(raw["circuit"], "circuit")
    try:
        train = _train(raw.get("train", {}), circuit.n_modes)
        t = dict(raw.get("target", {"kind": "ClassicalGaussian"}))
        if t["kind"] == "QuantumCircuit":
            if "circuit" not in t:
                raise ConfigError("target: QuantumCircuit needs a circuit")
            t["circuit"] = _circuit(t["circuit"], "target.circuit")
        else:
            t.setdefault("mu", [0.0] * circuit.n_modes)
            t.setdefault("sigma", [1.0] * circuit.n_modes)
        target = TargetSpec(fock=train.fock, **t)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    if target.n_modes != circuit.n_modes:
        raise ConfigError(f"target has {target.n_modes} dimensions, circuit has {circuit.n_modes} modes")
    if raw["circuit"].get("init", "random") == "random":
        circuit = initialize(circuit, np.random.default_rng([train.seed, 1]))
    gc = raw.get("grad_check", {})
    out = Path(raw.get("output_dir", "cvbm_out"))
    return RunConfig(circuit, target, train, float(gc.get("t", 0.01)),
                     float(gc.get("gaussian_shift", 1e-3)), out, raw)


def load(path) -> RunConfig:
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: invalid JSON: {exc}") from exc
    return parse(raw)
