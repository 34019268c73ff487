"""Experiment presets and the hierarchical TOML configuration format.

A configuration file groups ``ExperimentConfig`` fields into sections::

    kind = "sweep"            # or "generalization"
    master_seed = 7

    [reservoir]
    n_qubits = 5
    h_values = [0.1]

    [inputs]
    epsilons = [0.0, 0.2]

Overrides are ``section.field=value`` or bare ``field=value`` strings whose
value is parsed as a TOML literal (falling back to a plain string).
"""

from __future__ import annotations

import dataclasses
import json
from pathlib import Path
from typing import Any

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .experiment import ConfigError, ExperimentConfig

KINDS = ("sweep", "generalization")

SECTIONS: dict[str, tuple[str, ...]] = {
    "reservoir": ("n_qubits", "coupling_scale", "h_values", "reservoir_ensemble", "fixed_reservoir_state"),
    "dynamics": ("delta_t_values",),
    "inputs": ("epsilons", "input_qubits_train", "input_qubits_test", "noise_ensemble"),
    "measurement": ("shots", "correlation_orders", "include_bias"),
    "training": ("n_train", "n_test", "realizations", "ridge", "calibration_index", "allow_underdetermined"),
}
TOP_LEVEL = ("kind", "master_seed")
_FIELD_SECTION = {f: s for s, fields in SECTIONS.items() for f in fields}

H_GRID = tuple(float(v) for v in np.geomspace(0.01, 2.0, 20))
DT_GRID = tuple(float(v) for v in np.geomspace(0.1, 50.0, 20))

PRESETS: dict[str, dict[str, Any]] = {
    "fig1-scatter": {"kind": "sweep", "epsilons": [0.0, 0.2, 0.5, 0.9]},
    "fig2-h-sweep": {"kind": "sweep", "h_values": list(H_GRID), "epsilons": [0.0, 0.2, 0.5]},
    "fig3-dt-sweep": {"kind": "sweep", "delta_t_values": list(DT_GRID), "epsilons": [0.0, 0.5, 0.9]},
    "fig4-shots": {
        "kind": "sweep",
        "delta_t_values": list(DT_GRID),
        "epsilons": [0.2],
        "shots": [1000, 5000, 15000, "exact"],
    },
    "fig5-generalization": {"kind": "generalization", "n_qubits": 7, "input_qubits_test": [3, 4]},
    "figA1-extended": {
        "kind": "sweep",
        "h_values": list(H_GRID),
        "epsilons": [0.2, 0.5, 0.9],
        "correlation_orders": ["local-z", "local-plus-zz"],
    },
}
# presets whose records carry (target, prediction) scatter points
SCATTER_PRESETS = ("fig1-scatter", "fig5-generalization")

QUICK = {"realizations": 3, "n_train": 40, "n_test": 40}


@dataclasses.dataclass(frozen=True)
class ResolvedConfig:
    kind: str
    experiment: ExperimentConfig
    preset: str | None = None

    @property
    def scatter(self) -> bool:
        return self.preset in SCATTER_PRESETS or self.kind == "generalization"


def _jsonable(value):
    if isinstance(value, tuple):
        return [_jsonable(v) for v in value]
    if hasattr(value, "value"):  # enums
        return value.value
    if dataclasses.is_dataclass(value):  # ShotPlan
        return value.n_measurements if value.n_measurements is not None else "exact"
    return value


def config_to_dict(resolved: ResolvedConfig) -> dict[str, Any]:
    """Hierarchical plain-data echo of a resolved configuration."""
    exp = resolved.experiment
    out: dict[str, Any] = {"kind": resolved.kind, "master_seed": exp.master_seed}
    for section, fields in SECTIONS.items():
        out[section] = {f: _jsonable(getattr(exp, f)) for f in fields}
    return out


def _flatten(tree: dict[str, Any], flat: dict[str, Any], where: str = "") -> None:
    for key, value in tree.items():
        key = key.replace("-", "_")
        path = f"{where}{key}"
        if key in SECTIONS and isinstance(value, dict):
            for sub, v in value.items():
                sub = sub.replace("-", "_")
                if _FIELD_SECTION.get(sub) != key:
                    raise ConfigError(f"{path}.{sub}: unknown key")
                flat[sub] = v
        elif key in TOP_LEVEL or key in _FIELD_SECTION:
            flat[key] = value
        else:
            raise ConfigError(f"{path}: unknown key")


def _build(flat: dict[str, Any], preset: str | None) -> ResolvedConfig:
    flat = dict(flat)
    kind = flat.pop("kind", "sweep")
    if kind not in KINDS:
        raise ConfigError(f"kind: expected one of {KINDS}, got {kind!r}")
    for key in ("h_values", "delta_t_values", "epsilons", "shots", "correlation_orders", "input_qubits_test"):
        if key in flat and not isinstance(flat[key], (list, tuple)):
            flat[key] = [flat[key]]
    try:
        exp = ExperimentConfig(**flat)
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid value: {exc}") from exc
    if kind == "sweep" and exp.input_qubits_test != (exp.input_qubits_train,):
        raise ConfigError("inputs.input_qubits_test: sweeps must test on the training input size")
    return ResolvedConfig(kind, exp, preset)


def parse_value(text: str):
    try:
        return tomllib.loads(f"v = {text}")["v"]
    except tomllib.TOMLDecodeError:
        return text


def apply_overrides(flat: dict[str, Any], overrides) -> None:
    for item in overrides or ():
        if "=" not in item:
            raise ConfigError(f"{item}: override must look like key=value")
        key, text = item.split("=", 1)
        parts = key.strip().replace("-", "_").split(".")
        tree: dict[str, Any] = {}
        node = tree
        for p in parts[:-1]:
            node = node.setdefault(p, {})
        node[parts[-1]] = parse_value(text.strip())
        _flatten(tree, flat)


def load_tree(path: str | Path) -> dict[str, Any]:
    """Read a TOML configuration or the ``config`` echo of a JSON result record."""
    path = Path(path)
    try:
        if path.suffix == ".json":
            return json.loads(path.read_text(encoding="utf-8"))["config"]
        return tomllib.loads(path.read_text(encoding="utf-8"))
    except (OSError, KeyError, json.JSONDecodeError, tomllib.TOMLDecodeError) as exc:
        raise ConfigError(f"{path}: cannot read configuration ({exc})") from exc


def parse_config(source: str, overrides=(), seed: int | None = None, quick: bool = False) -> ResolvedConfig:
    """Resolve a preset name or config path plus overrides into a validated config.

    Precedence, lowest first: built-in defaults, preset or file, ``--quick``
    scaling, ``overrides``, ``seed``.
    """
    flat: dict[str, Any] = {}
    preset = None
    if source in PRESETS:
        preset = source
        _flatten(PRESETS[source], flat)
    else:
        _flatten(load_tree(source), flat)
    if quick:
        flat.update(QUICK)
    apply_overrides(flat, overrides)
    if seed is not None:
        flat["master_seed"] = seed
    return _build(flat, preset)
