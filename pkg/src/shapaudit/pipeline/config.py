"""Audit configuration: a nested YAML document resolved into :class:`PipelineConfig`."""

import hashlib
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

import yaml

from ..exceptions import ConfigError
from ..explain import ENGINES
from ..models.zoo import default_zoo
from ..synth import SynthSpec

EXAMPLE_CONFIG = """\
# Dataset: either a CSV file ...
data:
  path: pva.csv
  target: diameter
# ... or a synthetic generator (remove `data` to use it)
# synth: {n: 96, weights: [5, 0.5, 0.25, 0.1], noise: 0.1, seed: 7}
seed: 0
zoo:
  models: default          # or a list of model names
  overrides: {}            # e.g. {ridge: {alpha: 2.0}}
cv:
  k: 5
  shuffle: true
shap:
  engine: auto             # auto | exact | kernel | tree
  background: full         # full | sample:<m>
  kernel_budget: null      # null means full enumeration for d <= 12
reliability:
  thresholds: [0.25, 0.75]
  top_k: [1, 2, 3]
  std_ddof: 0
n_jobs: 1
output_dir: audit_out
"""


@dataclass(frozen=True)
class PipelineConfig:
    data_path: str = None
    target: str = None
    synth: SynthSpec = None
    seed: int = 0
    models: tuple = None  # None means the full default zoo
    overrides: dict = field(default_factory=dict)
    k: int = 5
    shuffle: bool = True
    engine: str = "auto"
    background: str = "full"
    kernel_budget: object = None
    thresholds: tuple = (0.25, 0.75)
    top_k: tuple = (1, 2, 3)
    std_ddof: int = 0
    n_jobs: int = 1
    output_dir: str = "audit_out"
    base_dir: str = "."

    def __post_init__(self):
        if (self.data_path is None) == (self.synth is None):
            raise ConfigError("configure exactly one of `data` or `synth`")
        if self.data_path is not None and not self.target:
            raise ConfigError("`data.target` is required with `data.path`")
        if int(self.k) < 2:
            raise ConfigError(f"cv.k must be >= 2, got {self.k}")
        if self.engine not in ENGINES:
            raise ConfigError(f"shap.engine must be one of {ENGINES}")
        lo, hi = self.thresholds
        if not lo < hi:
            raise ConfigError(f"reliability.thresholds must be increasing, got {self.thresholds}")
        if self.background != "full":
            if not self.background.startswith("sample:") or not self.background[7:].isdigit() or int(self.background[7:]) < 1:
                raise ConfigError(f"shap.background must be 'full' or 'sample:<m>', got {self.background!r}")
        if int(self.n_jobs) < 1:
            raise ConfigError("n_jobs must be >= 1")
        known = {s.name for s in default_zoo()}
        requested = set(self.models or ()) | set(self.overrides)
        unknown = sorted(requested - known)
        if unknown:
            raise ConfigError(f"unknown model names {unknown}; run `audit zoo list`")
        if self.models is not None and len(self.models) < 2:
            raise ConfigError("select at least 2 models")
        for name, params in self.overrides.items():
            if not isinstance(params, dict):
                raise ConfigError(f"overrides for {name!r} must be a mapping")
        self.specs()  # validates override hyperparameter names

    def specs(self):
        zoo = default_zoo()
        if self.models is not None:
            by_name = {s.name: s for s in zoo}
            zoo = [by_name[n] for n in self.models]
        return [s.with_overrides(self.overrides[s.name]) if s.name in self.overrides else s for s in zoo]

    @property
    def resolved_data_path(self):
        path = Path(self.data_path)
        return path if path.is_absolute() else Path(self.base_dir) / path

    def to_dict(self):
        """Fully resolved settings, JSON-serialisable, without the base directory."""
        out = {
            "data": {"path": self.data_path, "target": self.target} if self.data_path else None,
            "synth": _synth_dict(self.synth) if self.synth else None,
            "seed": self.seed,
            "zoo": {
                "models": [s.name for s in self.specs()],
                "overrides": {k: _jsonable(v) for k, v in sorted(self.overrides.items())},
            },
            "cv": {"k": self.k, "shuffle": self.shuffle},
            "shap": {"engine": self.engine, "background": self.background, "kernel_budget": self.kernel_budget},
            "reliability": {
                "thresholds": list(self.thresholds),
                "top_k": list(self.top_k),
                "std_ddof": self.std_ddof,
            },
            "output_dir": self.output_dir,
        }
        return out

    def digest(self):
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()


def _jsonable(value):
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return value


def _synth_dict(spec):
    d = asdict(spec)
    d["weights"] = list(spec.weights)
    d["interactions"] = [list(t) for t in spec.interactions]
    return d


def _section(raw, key):
    value = raw.get(key) or {}
    if not isinstance(value, dict):
        raise ConfigError(f"`{key}` must be a mapping")
    return value


def _parse_synth(raw):
    try:
        return SynthSpec(
            n=int(raw["n"]),
            weights=tuple(float(w) for w in raw["weights"]),
            interactions=tuple((int(j), int(l), float(w)) for j, l, w in raw.get("interactions", [])),
            noise_std=float(raw.get("noise", raw.get("noise_std", 0.0))),
            seed=int(raw.get("seed", 0)),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"invalid synth section: {exc}") from exc


def config_from_dict(raw, base_dir="."):
    if not isinstance(raw, dict):
        raise ConfigError("config root must be a mapping")
    allowed = {"data", "synth", "seed", "zoo", "cv", "shap", "reliability", "n_jobs", "output_dir"}
    extra = sorted(set(raw) - allowed)
    if extra:
        raise ConfigError(f"unknown config keys {extra}")
    data = raw.get("data")
    synth = _parse_synth(raw["synth"]) if raw.get("synth") else None
    zoo = _section(raw, "zoo")
    cv = _section(raw, "cv")
    shap = _section(raw, "shap")
    rel = _section(raw, "reliability")
    models = zoo.get("models", "default")
    if models == "default" or models is None:
        models = None
    elif isinstance(models, list):
        models = tuple(str(m) for m in models)
    else:
        raise ConfigError("zoo.models must be 'default' or a list of names")
    overrides = zoo.get("overrides") or {}
    if not isinstance(overrides, dict):
        raise ConfigError("zoo.overrides must be a mapping")
    overrides = {
        name: {k: tuple(v) if isinstance(v, list) else v for k, v in (params or {}).items()}
        if isinstance(params, dict) else params
        for name, params in overrides.items()
    }
    try:
        return PipelineConfig(
            data_path=data.get("path") if isinstance(data, dict) else None,
            target=data.get("target") if isinstance(data, dict) else None,
            synth=synth,
            seed=int(raw.get("seed", 0)),
            models=models,
            overrides=overrides,
            k=int(cv.get("k", 5)),
            shuffle=bool(cv.get("shuffle", True)),
            engine=str(shap.get("engine", "auto")),
            background=str(shap.get("background", "full")),
            kernel_budget=shap.get("kernel_budget"),
            thresholds=tuple(float(t) for t in rel.get("thresholds", (0.25, 0.75))),
            top_k=tuple(int(k) for k in rel.get("top_k", (1, 2, 3))),
            std_ddof=int(rel.get("std_ddof", 0)),
            n_jobs=int(raw.get("n_jobs", 1)),
            output_dir=str(raw.get("output_dir", "audit_out")),
            base_dir=str(base_dir),
        )
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"invalid config value: {exc}") from exc


def load_config(path):
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    try:
        raw = yaml.safe_load(path.read_text(encoding="utf-8"))
    except yaml.YAMLError as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from exc
    return config_from_dict(raw or {}, base_dir=path.parent)
