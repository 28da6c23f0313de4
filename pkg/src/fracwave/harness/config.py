"""Experiment configuration: YAML file, JSON schema, typed dataclasses."""
from __future__ import annotations

import copy
import hashlib
import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import jsonschema
import numpy as np
import yaml

from ..errors import ConfigError, ModelError
from ..model import DampingModel, Excitation, SampledProfile, validate_excitation, validate_model

_NUM = {"type": "number"}
_NUM_LIST = {"type": "array", "items": _NUM}

_MODEL = {
    "type": "object",
    "additionalProperties": False,
    "required": ["big_lambda"],
    "properties": {
        "big_lambda": {"type": "number", "exclusiveMinimum": 0},
        "alphas": _NUM_LIST,
        "bs": _NUM_LIST,
        "betas": _NUM_LIST,
        "gammas": _NUM_LIST,
        "ds": _NUM_LIST,
        "eigenvalue": {"type": "number", "exclusiveMinimum": 0},
    },
}

SCHEMA: dict = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "fracwave experiment",
    "type": "object",
    "additionalProperties": False,
    "required": ["model", "excitation", "sampling"],
    "properties": {
        "name": {"type": "string"},
        "model": _MODEL,
        "excitation": {
            "type": "object",
            "additionalProperties": False,
            "required": ["kind"],
            "properties": {
                "kind": {"enum": ["u0", "u1", "u2", "source"]},
                "mode_coefficient": _NUM,
                "observation_weight": _NUM,
                "sigma": {
                    "oneOf": [
                        {"const": "constant"},
                        {
                            "type": "object",
                            "additionalProperties": False,
                            "required": ["times", "values"],
                            "properties": {"times": _NUM_LIST, "values": _NUM_LIST},
                        },
                    ]
                },
            },
        },
        "sampling": {
            "type": "object",
            "additionalProperties": False,
            "required": ["t_min", "t_max", "count"],
            "properties": {
                "grid": {"enum": ["uniform", "geometric"]},
                "t_min": {"type": "number", "minimum": 0},
                "t_max": {"type": "number", "exclusiveMinimum": 0},
                "count": {"type": "integer", "minimum": 2},
                "endpoint": {"type": "boolean"},
            },
        },
        "data": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"trace": {"type": "string"}},
        },
        "noise": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "level": {"type": "number", "minimum": 0},
                "seed": {"type": "integer"},
            },
        },
        "method": {
            "type": "object",
            "additionalProperties": False,
            "required": ["name", "initial"],
            "properties": {
                "name": {"enum": ["fulltime", "largetime", "smalltime", "peel"]},
                "initial": {
                    "type": "object",
                    "additionalProperties": False,
                    "properties": {
                        "big_lambda": {"type": "number", "exclusiveMinimum": 0},
                        "alphas": _NUM_LIST,
                        "bs": _NUM_LIST,
                    },
                },
                "options": {"type": "object"},
                "laplace": {
                    "type": "object",
                    "additionalProperties": False,
                    "properties": {
                        "s_min": {"type": "number", "exclusiveMinimum": 0},
                        "s_max": {"type": "number", "exclusiveMinimum": 0},
                        "count": {"type": "integer", "minimum": 2},
                        "scheme": {"enum": ["linear", "cubic"]},
                    },
                },
            },
        },
        "outputs": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "dir": {"type": "string"},
                "trace": {"type": "string"},
                "laplace": {"type": "string"},
                "report": {"type": "string"},
                "table": {"type": "string"},
                "plot": {"type": "string"},
                "render": {"type": "boolean"},
            },
        },
    },
}


@dataclass(frozen=True)
class Sampling:
    t_min: float
    t_max: float
    count: int
    grid: str = "uniform"
    endpoint: bool = True

    def times(self) -> np.ndarray:
        if self.grid == "geometric":
            if self.t_min <= 0:
                raise ConfigError("geometric sampling needs t_min > 0")
            return np.geomspace(self.t_min, self.t_max, self.count, endpoint=self.endpoint)
        return np.linspace(self.t_min, self.t_max, self.count, endpoint=self.endpoint)


@dataclass(frozen=True)
class Noise:
    level: float = 0.0
    seed: int = 0


@dataclass(frozen=True)
class LaplaceGrid:
    s_min: float = 0.5
    s_max: float = 16.0
    count: int = 24
    scheme: str = "cubic"

    def abscissae(self) -> np.ndarray:
        return np.geomspace(self.s_min, self.s_max, self.count)


@dataclass(frozen=True)
class MethodConfig:
    name: str
    initial: DampingModel
    options: dict = field(default_factory=dict)
    laplace: LaplaceGrid = LaplaceGrid()


@dataclass(frozen=True)
class Outputs:
    dir: str = "out"
    trace: str = "trace.csv"
    laplace: str = "laplace.csv"
    report: str = "report.json"
    table: str = "report.txt"
    plot: str = "plot.csv"
    render: bool = False


@dataclass(frozen=True)
class ExperimentConfig:
    model: DampingModel
    excitation: Excitation
    sampling: Sampling
    noise: Noise = Noise()
    method: Optional[MethodConfig] = None
    outputs: Outputs = Outputs()
    name: str = "experiment"
    data_trace: Optional[str] = None
    raw: dict = field(default_factory=dict, compare=False, repr=False)

    @property
    def digest(self) -> str:
        return config_digest(self.raw)


class _Loader(yaml.SafeLoader):
    """Safe loader that also reads 1e5 and 2.0e5 as floats (YAML 1.2 style)."""


_FLOAT = re.compile(
    r"""^(?:[-+]?(?:[0-9][0-9_]*)\.[0-9_]*(?:[eE][-+]?[0-9]+)?
    |[-+]?(?:[0-9][0-9_]*)(?:[eE][-+]?[0-9]+)
    |\.[0-9_]+(?:[eE][-+]?[0-9]+)?
    |[-+]?\.(?:inf|Inf|INF)
    |\.(?:nan|NaN|NAN))$""",
    re.X,
)
_Loader.yaml_implicit_resolvers = {k: list(v) for k, v in yaml.SafeLoader.yaml_implicit_resolvers.items()}
_Loader.add_implicit_resolver("tag:yaml.org,2002:float", _FLOAT, list("-+0123456789."))


def config_digest(raw: dict) -> str:
    payload = json.dumps(raw, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(payload.encode()).hexdigest()


def _line_of(root, path) -> Optional[int]:
    """1-based source line of the YAML node at ``path`` (deepest match)."""
    node = root
    line = None if node is None else node.start_mark.line + 1
    for key in path:
        if isinstance(node, yaml.MappingNode):
            nxt = next((v for k, v in node.value if k.value == key), None)
        elif isinstance(node, yaml.SequenceNode) and isinstance(key, int) and key < len(node.value):
            nxt = node.value[key]
        else:
            nxt = None
        if nxt is None:
            break
        node = nxt
        line = node.start_mark.line + 1
    return line


def _model(d: dict) -> DampingModel:
    return DampingModel.from_arrays(
        d["big_lambda"],
        d.get("alphas", ()),
        d.get("bs", ()),
        betas=d.get("betas"),
        gammas=d.get("gammas", ()),
        ds=d.get("ds", ()),
        eigenvalue=d.get("eigenvalue"),
    )


def _excitation(d: dict) -> Excitation:
    sigma = d.get("sigma")
    if isinstance(sigma, dict):
        sigma = SampledProfile(tuple(sigma["times"]), tuple(sigma["values"]))
    return Excitation(d["kind"], d.get("mode_coefficient", 1.0), d.get("observation_weight", 1.0), sigma)


def _resolve(path: Optional[str], source: str) -> Optional[str]:
    """Relative data paths are taken relative to the config file."""
    if path is None or Path(path).is_absolute() or source.startswith("<"):
        return path
    return str(Path(source).parent / path)


def parse_config(text: str, source: str = "<config>", seed: Optional[int] = None) -> ExperimentConfig:
    """Parse and validate YAML text.  ``seed`` overrides noise.seed."""
    try:
        root = yaml.compose(text, Loader=_Loader)
        raw = yaml.load(text, Loader=_Loader)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f"{source}:{mark.line + 1}" if mark is not None else source
        raise ConfigError(f"{where}: invalid YAML: {exc}") from exc
    if raw is None:
        raise ConfigError(f"{source}:1: empty configuration")
    errors = sorted(jsonschema.Draft202012Validator(SCHEMA).iter_errors(raw), key=lambda e: list(e.absolute_path))
    if errors:
        err = errors[0]
        line = _line_of(root, list(err.absolute_path))
        where = "/".join(map(str, err.absolute_path)) or "<root>"
        raise ConfigError(f"{source}:{line or 1}: {where}: {err.message}")
    raw = copy.deepcopy(raw)
    if seed is not None:
        raw.setdefault("noise", {})["seed"] = int(seed)
    try:
        model = validate_model(_model(raw["model"]))
        exc = validate_excitation(_excitation(raw["excitation"]), model)
    except (ModelError, TypeError, ValueError) as exc:
        raise ConfigError(f"{source}:{_line_of(root, ['model']) or 1}: model: {exc}") from exc
    try:
        method = None
        if "method" in raw:
            m = raw["method"]
            init = dict(m["initial"])
            init.setdefault("big_lambda", raw["model"]["big_lambda"])
            if "eigenvalue" in raw["model"]:
                init["eigenvalue"] = raw["model"]["eigenvalue"]
            method = MethodConfig(m["name"], _model(init), dict(m.get("options", {})), LaplaceGrid(**m.get("laplace", {})))
        cfg = ExperimentConfig(
            model=model,
            excitation=exc,
            sampling=Sampling(**raw["sampling"]),
            noise=Noise(**raw.get("noise", {})),
            method=method,
            outputs=Outputs(**raw.get("outputs", {})),
            name=raw.get("name", Path(source).stem),
            data_trace=_resolve(raw.get("data", {}).get("trace"), source),
            raw=raw,
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{source}:1: {exc}") from exc
    return cfg


def load_config(path, seed: Optional[int] = None) -> ExperimentConfig:
    path = Path(path)
    return parse_config(path.read_text(), str(path), seed)
