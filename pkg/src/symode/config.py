"""Run configuration: a strict JSON schema with field-path error messages.

Unknown keys are rejected everywhere, and every reported problem names the
offending path (e.g. ``search.optim.t1_iters``), so a malformed file fails
before any computation starts.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .dataio import NORMALIZATION_MODES
from .epidemic import ModelKind
from .errors import ConfigError
from .expressions import TYPE1, TYPE2
from .optimize import OptimConfig
from .search import SearchConfig

_EPI_RATE_KEYS = ("beta", "gamma", "mu", "sigma", "nu_rate", "delta", "n_pop")


@dataclass
class DataConfig:
    """Synthetic data generation protocol."""

    n_trajectories: int = 200
    steps: int = 250
    dt: float = 0.2
    train_fraction: float = 0.5
    normalize_init: bool = True


@dataclass
class NormalizationConfig:
    mode: str = "by_max_total"
    constant: float = None


@dataclass
class RunConfig:
    mode: str = "synthetic"
    seed: int = 0
    output_dir: str = "results"
    model_kind: str = "sir"
    model_params: dict = field(default_factory=dict)
    data: DataConfig = field(default_factory=DataConfig)
    input_csv: str = None
    train_days: int = 85
    real_dt: float = 1.0
    normalization: NormalizationConfig = field(default_factory=NormalizationConfig)
    search: SearchConfig = field(default_factory=SearchConfig)

    def to_dict(self):
        doc = {
            "mode": self.mode,
            "seed": self.seed,
            "output_dir": self.output_dir,
            "search": {
                "epochs": self.search.epochs,
                "batch_size": self.search.batch_size,
                "pool_capacity": self.search.pool_capacity,
                "nu": self.search.nu,
                "epsilon": self.search.epsilon,
                "controller_lr": self.search.controller_lr,
                "templates": (self.search.templates
                              if isinstance(self.search.templates, str)
                              else list(self.search.templates)),
                "optim": {
                    "t1_iters": self.search.optim.t1_iters,
                    "t2_iters": self.search.optim.t2_iters,
                    "t3_iters": self.search.optim.t3_iters,
                    "lr_first": self.search.optim.lr_first,
                    "lr_finetune": self.search.optim.lr_finetune,
                    "grad_tol": self.search.optim.grad_tol,
                    "armijo_c": self.search.optim.armijo_c,
                    "backtrack_factor": self.search.optim.backtrack_factor,
                },
            },
        }
        if self.mode == "synthetic":
            doc["model"] = {"kind": self.model_kind, "params": dict(self.model_params)}
            doc["data"] = {
                "n_trajectories": self.data.n_trajectories,
                "steps": self.data.steps,
                "dt": self.data.dt,
                "train_fraction": self.data.train_fraction,
                "normalize_init": self.data.normalize_init,
            }
        else:
            doc["input_csv"] = self.input_csv
            doc["train_days"] = self.train_days
            doc["dt"] = self.real_dt
            doc["normalization"] = {"mode": self.normalization.mode,
                                    "constant": self.normalization.constant}
        return doc


def _require_mapping(value, path):
    if not isinstance(value, dict):
        raise ConfigError(f"{path}: expected an object")
    return value


def _reject_unknown(mapping, allowed, path):
    unknown = sorted(set(mapping) - set(allowed))
    if unknown:
        raise ConfigError(f"{path or 'config'}: unknown keys {unknown}")


def _get_typed(mapping, key, kind, path, default):
    if key not in mapping:
        return default
    value = mapping[key]
    if kind is float and isinstance(value, int) and not isinstance(value, bool):
        value = float(value)
    if kind is int and isinstance(value, bool):
        raise ConfigError(f"{path}.{key}: expected {kind.__name__}")
    if not isinstance(value, kind):
        raise ConfigError(f"{path}.{key}: expected {kind.__name__}")
    return value


def _check(condition, message):
    if not condition:
        raise ConfigError(message)


def _parse_optim(mapping, path):
    allowed = ("t1_iters", "t2_iters", "t3_iters", "lr_first", "lr_finetune",
               "grad_tol", "armijo_c", "backtrack_factor")
    _reject_unknown(mapping, allowed, path)
    defaults = OptimConfig()
    kwargs = {}
    for key in allowed:
        kind = int if key.endswith("iters") else float
        kwargs[key] = _get_typed(mapping, key, kind, path, getattr(defaults, key))
    try:
        return OptimConfig(**kwargs)
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from None


def _parse_search(mapping, path):
    allowed = ("epochs", "batch_size", "pool_capacity", "nu", "epsilon",
               "controller_lr", "templates", "optim")
    _reject_unknown(mapping, allowed, path)
    defaults = SearchConfig()
    templates = mapping.get("templates", defaults.templates)
    if isinstance(templates, list):
        _check(all(isinstance(t, str) for t in templates),
               f"{path}.templates: expected template-kind strings")
        templates = [t.lower() for t in templates]
        bad = [t for t in templates if t not in (TYPE1, TYPE2)]
    elif isinstance(templates, str):
        templates = templates.lower()
        bad = [] if templates in (TYPE1, TYPE2) else [templates]
    else:
        raise ConfigError(f"{path}.templates: expected a string or list")
    _check(not bad, f"{path}.templates: unknown template kinds {bad}")
    optim = _parse_optim(_require_mapping(mapping.get("optim", {}),
                                          f"{path}.optim"), f"{path}.optim")
    try:
        return SearchConfig(
            epochs=_get_typed(mapping, "epochs", int, path, defaults.epochs),
            batch_size=_get_typed(mapping, "batch_size", int, path,
                                  defaults.batch_size),
            pool_capacity=_get_typed(mapping, "pool_capacity", int, path,
                                     defaults.pool_capacity),
            nu=_get_typed(mapping, "nu", float, path, defaults.nu),
            epsilon=_get_typed(mapping, "epsilon", float, path, defaults.epsilon),
            controller_lr=_get_typed(mapping, "controller_lr", float, path,
                                     defaults.controller_lr),
            templates=templates,
            optim=optim,
        )
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from None


def run_config_from_dict(doc):
    """Validate a raw JSON document and build a RunConfig."""
    _require_mapping(doc, "config")
    mode = doc.get("mode")
    _check(mode in ("synthetic", "real"),
           "mode: expected 'synthetic' or 'real'")
    common = ("mode", "seed", "output_dir", "search")
    if mode == "synthetic":
        _reject_unknown(doc, common + ("model", "data"), "")
    else:
        _reject_unknown(doc, common + ("input_csv", "train_days", "dt",
                                       "normalization"), "")
    cfg = RunConfig(mode=mode)
    cfg.seed = _get_typed(doc, "seed", int, "", 0)
    _check(cfg.seed >= 0, "seed: must be >= 0")
    cfg.output_dir = _get_typed(doc, "output_dir", str, "", "results")
    cfg.search = _parse_search(_require_mapping(doc.get("search", {}), "search"),
                               "search")

    if mode == "synthetic":
        model = _require_mapping(doc.get("model", {}), "model")
        _reject_unknown(model, ("kind", "params"), "model")
        kind = _get_typed(model, "kind", str, "model", "sir").lower()
        _check(kind in [m.value for m in ModelKind],
               f"model.kind: unknown model {kind!r}")
        cfg.model_kind = kind
        params = _require_mapping(model.get("params", {}), "model.params")
        _reject_unknown(params, _EPI_RATE_KEYS, "model.params")
        cfg.model_params = {k: _get_typed(params, k, float, "model.params", None)
                            for k in params}
        data = _require_mapping(doc.get("data", {}), "data")
        allowed = ("n_trajectories", "steps", "dt", "train_fraction",
                   "normalize_init")
        _reject_unknown(data, allowed, "data")
        dc = DataConfig(
            n_trajectories=_get_typed(data, "n_trajectories", int, "data", 200),
            steps=_get_typed(data, "steps", int, "data", 250),
            dt=_get_typed(data, "dt", float, "data", 0.2),
            train_fraction=_get_typed(data, "train_fraction", float, "data", 0.5),
            normalize_init=_get_typed(data, "normalize_init", bool, "data", True),
        )
        _check(dc.n_trajectories >= 2, "data.n_trajectories: must be >= 2")
        _check(dc.steps >= 1, "data.steps: must be >= 1")
        _check(dc.dt > 0, "data.dt: must be > 0")
        _check(0 < dc.train_fraction < 1,
               "data.train_fraction: must lie in (0, 1)")
        cfg.data = dc
    else:
        cfg.input_csv = _get_typed(doc, "input_csv", str, "", None)
        _check(cfg.input_csv, "input_csv: required in real mode")
        cfg.train_days = _get_typed(doc, "train_days", int, "", 85)
        _check(cfg.train_days >= 2, "train_days: must be >= 2")
        cfg.real_dt = _get_typed(doc, "dt", float, "", 1.0)
        _check(cfg.real_dt > 0, "dt: must be > 0")
        norm = _require_mapping(doc.get("normalization", {}), "normalization")
        _reject_unknown(norm, ("mode", "constant"), "normalization")
        nm = _get_typed(norm, "mode", str, "normalization", "by_max_total")
        _check(nm in NORMALIZATION_MODES,
               f"normalization.mode: expected one of {NORMALIZATION_MODES}")
        constant = norm.get("constant")
        if constant is not None:
            constant = _get_typed(norm, "constant", float, "normalization", None)
            _check(constant > 0, "normalization.constant: must be > 0")
        _check(nm != "by_constant" or constant is not None,
               "normalization.constant: required for by_constant mode")
        cfg.normalization = NormalizationConfig(nm, constant)
    return cfg


def load_run_config(path):
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"{path}: no such config file")
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from None
    return run_config_from_dict(doc)
