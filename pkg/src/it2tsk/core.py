"""Shared types, configuration and model (de)serialization.

Coefficient vectors everywhere use the augmented layout ``[b_1, ..., b_m, b_0]``
so that a prediction is ``augment(x) @ zeta`` with the intercept last.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

MODEL_FORMAT = "it2tsk-model"
MODEL_VERSION = 1


class ConfigError(ValueError):
    """A configuration field violates its invariant."""


class ModelFileError(ValueError):
    """A model file is unreadable, corrupted or of an unsupported version."""


def augment(X):
    """Append a column of ones to a 2-D input matrix (or a 1-D row)."""
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        return np.append(X, 1.0)
    return np.hstack([X, np.ones((X.shape[0], 1))])


@dataclass(frozen=True)
class Dataset:
    inputs: np.ndarray
    targets: np.ndarray

    def __post_init__(self):
        X = np.asarray(self.inputs, dtype=float)
        y = np.asarray(self.targets, dtype=float).ravel()
        if X.ndim == 1:
            X = X[:, None]
        if X.ndim != 2 or X.shape[0] < 1 or X.shape[1] < 1:
            raise ValueError(f"inputs must be a non-empty n x m matrix, got shape {X.shape}")
        if y.shape[0] != X.shape[0]:
            raise ValueError(f"{X.shape[0]} input rows but {y.shape[0]} targets")
        if not np.all(np.isfinite(X)):
            raise ValueError("inputs contain non-finite values")
        if not np.all(np.isfinite(y)):
            raise ValueError("targets contain non-finite values")
        X.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "inputs", X)
        object.__setattr__(self, "targets", y)

    @property
    def n(self) -> int:
        return self.inputs.shape[0]

    @property
    def m(self) -> int:
        return self.inputs.shape[1]

    def subset(self, idx) -> "Dataset":
        return Dataset(self.inputs[idx], self.targets[idx])


@dataclass(frozen=True)
class SGDConfig:
    learning_rate: float = 1e-2
    max_epochs: int = 200
    batch_size: int = 32
    seed: int = 0
    # inverse-time decay per epoch: lr / (1 + lr_decay * epoch)
    lr_decay: float = 0.0


@dataclass(frozen=True)
class Config:
    c: int = 4
    m1: float = 1.5
    m2: float = 7.0
    lam: float = 0.0
    alpha: float = 0.5
    eta: float = 3.14
    epsilon: float = 1e-4
    max_outer_iters: int = 100
    # SGD epochs run on every coefficient vector per outer partition iteration
    partition_epochs: int = 10
    sgd: SGDConfig = field(default_factory=SGDConfig)
    consequent_sgd: SGDConfig = field(
        default_factory=lambda: SGDConfig(learning_rate=0.1, max_epochs=200, batch_size=32)
    )
    # epochs without relative best-loss improvement > epsilon before the consequent fit stops
    consequent_patience: int = 100

    @classmethod
    def from_dict(cls, d: dict) -> "Config":
        d = dict(d)
        if "lambda" in d:
            d["lam"] = d.pop("lambda")
        for key in ("sgd", "consequent_sgd"):
            if key in d and isinstance(d[key], dict):
                d[key] = SGDConfig(**d[key])
        unknown = set(d) - set(cls.__dataclass_fields__)
        if unknown:
            raise ConfigError(f"unknown config fields: {sorted(unknown)}")
        return cls(**d)

    def to_dict(self) -> dict:
        return asdict(self)

    def with_(self, **changes) -> "Config":
        return replace(self, **changes)


def _check_sgd(name: str, s: SGDConfig) -> None:
    if not (s.learning_rate > 0 and math.isfinite(s.learning_rate)):
        raise ConfigError(f"{name}.learning_rate must be > 0, got {s.learning_rate}")
    if int(s.max_epochs) != s.max_epochs or s.max_epochs < 1:
        raise ConfigError(f"{name}.max_epochs must be an integer >= 1, got {s.max_epochs}")
    if int(s.batch_size) != s.batch_size or s.batch_size < 1:
        raise ConfigError(f"{name}.batch_size must be an integer >= 1, got {s.batch_size}")
    if s.lr_decay < 0:
        raise ConfigError(f"{name}.lr_decay must be >= 0, got {s.lr_decay}")


def validate_config(cfg: Config) -> Config:
    """Return ``cfg`` unchanged if every invariant holds, else raise ConfigError."""
    if int(cfg.c) != cfg.c or cfg.c < 1:
        raise ConfigError(f"c must be an integer >= 1, got {cfg.c}")
    if not cfg.m1 > 1:
        raise ConfigError(f"m1 must be > 1 (exponent 2/(m1-1) undefined), got {cfg.m1}")
    if not cfg.m2 > 1:
        raise ConfigError(f"m2 must be > 1 (exponent 2/(m2-1) undefined), got {cfg.m2}")
    if not cfg.m1 < cfg.m2:
        raise ConfigError(f"m1 must be < m2, got m1={cfg.m1}, m2={cfg.m2}")
    if not cfg.lam >= 0:
        raise ConfigError(f"lambda must be >= 0, got {cfg.lam}")
    if not 0 <= cfg.alpha <= 1:
        raise ConfigError(f"alpha must lie in [0, 1], got {cfg.alpha}")
    if not cfg.eta > 0:
        raise ConfigError(f"eta must be > 0, got {cfg.eta}")
    if not cfg.epsilon > 0:
        raise ConfigError(f"epsilon must be > 0, got {cfg.epsilon}")
    if int(cfg.max_outer_iters) != cfg.max_outer_iters or cfg.max_outer_iters < 1:
        raise ConfigError(f"max_outer_iters must be an integer >= 1, got {cfg.max_outer_iters}")
    if cfg.partition_epochs < 1:
        raise ConfigError(f"partition_epochs must be >= 1, got {cfg.partition_epochs}")
    if cfg.consequent_patience < 1:
        raise ConfigError(f"consequent_patience must be >= 1, got {cfg.consequent_patience}")
    _check_sgd("sgd", cfg.sgd)
    _check_sgd("consequent_sgd", cfg.consequent_sgd)
    return cfg


@dataclass(frozen=True)
class CoefficientInterval:
    upper: np.ndarray
    lower: np.ndarray

    def __post_init__(self):
        up = np.array(self.upper, dtype=float)
        lo = np.array(self.lower, dtype=float)
        if up.shape != lo.shape or up.ndim != 1:
            raise ValueError(f"coefficient vectors differ in shape: {up.shape} vs {lo.shape}")
        if not (np.all(np.isfinite(up)) and np.all(np.isfinite(lo))):
            raise ValueError("coefficient vectors must be finite")
        up.setflags(write=False)
        lo.setflags(write=False)
        object.__setattr__(self, "upper", up)
        object.__setattr__(self, "lower", lo)


@dataclass(frozen=True)
class Normalization:
    """Per-column min/max recorded at fit time; constant columns map to 0."""

    x_min: np.ndarray
    x_max: np.ndarray
    y_min: float
    y_max: float

    @property
    def constant_columns(self) -> np.ndarray:
        return np.asarray(self.x_max) == np.asarray(self.x_min)

    @property
    def constant_target(self) -> bool:
        return self.y_max == self.y_min

    def apply_inputs(self, X):
        X = np.asarray(X, dtype=float)
        span = np.asarray(self.x_max) - np.asarray(self.x_min)
        safe = np.where(span == 0, 1.0, span)
        out = (X - self.x_min) / safe
        return np.where(span == 0, 0.0, out)

    def invert_inputs(self, Z):
        Z = np.asarray(Z, dtype=float)
        span = np.asarray(self.x_max) - np.asarray(self.x_min)
        return Z * span + self.x_min

    def apply_targets(self, y):
        y = np.asarray(y, dtype=float)
        if self.constant_target:
            return np.zeros_like(y)
        return (y - self.y_min) / (self.y_max - self.y_min)

    def invert_targets(self, t):
        return np.asarray(t, dtype=float) * (self.y_max - self.y_min) + self.y_min

    def apply(self, data: Dataset) -> Dataset:
        return Dataset(self.apply_inputs(data.inputs), self.apply_targets(data.targets))

    def invert(self, data: Dataset) -> Dataset:
        return Dataset(self.invert_inputs(data.inputs), self.invert_targets(data.targets))


@dataclass(frozen=True)
class Rule:
    """One fitted rule.

    ``zeta`` is the type-reduced partition hyperplane, ``zeta_upper``/``zeta_lower``
    the interval it came from.  The antecedent statistics are kept for both ends
    of the interval since prediction needs both firing bounds.
    """

    zeta: np.ndarray
    zeta_upper: np.ndarray
    zeta_lower: np.ndarray
    theta: np.ndarray
    v_upper: float
    sigma_upper: float
    v_lower: float
    sigma_lower: float

    def __post_init__(self):
        for name in ("zeta", "zeta_upper", "zeta_lower", "theta"):
            arr = np.array(getattr(self, name), dtype=float)
            if arr.ndim != 1 or not np.all(np.isfinite(arr)):
                raise ValueError(f"rule field {name} must be a finite vector")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        for name in ("v_upper", "sigma_upper", "v_lower", "sigma_lower"):
            val = float(getattr(self, name))
            if not math.isfinite(val) or val < 0:
                raise ValueError(f"rule field {name} must be finite and >= 0, got {val}")
            object.__setattr__(self, name, val)
        if self.sigma_upper <= 0 or self.sigma_lower <= 0:
            raise ValueError("rule sigma values must be > 0 (floored at fit time)")
        sizes = {len(self.zeta), len(self.zeta_upper), len(self.zeta_lower), len(self.theta)}
        if len(sizes) != 1:
            raise ValueError("rule vectors differ in length")


@dataclass(frozen=True)
class TSKModel:
    rules: tuple
    alpha: float
    eta: float
    normalization: Normalization | None = None
    converged: bool = True

    def __post_init__(self):
        rules = tuple(self.rules)
        if len(rules) < 1:
            raise ValueError("a model needs at least one rule")
        sizes = {len(r.theta) for r in rules}
        if len(sizes) != 1:
            raise ValueError("rules disagree on input dimension")
        if not 0 <= self.alpha <= 1:
            raise ValueError(f"alpha must lie in [0, 1], got {self.alpha}")
        if not self.eta > 0:
            raise ValueError(f"eta must be > 0, got {self.eta}")
        object.__setattr__(self, "rules", rules)

    @property
    def c(self) -> int:
        return len(self.rules)

    @property
    def m(self) -> int:
        return len(self.rules[0].theta) - 1

    def stacked(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.rules], dtype=float)


def _vec(values) -> list:
    return [float(v) for v in values]


def model_to_dict(model: TSKModel) -> dict:
    out = {
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "coefficient_layout": "[b_1..b_m, b_0]",
        "alpha": float(model.alpha),
        "eta": float(model.eta),
        "converged": bool(model.converged),
        "rules": [
            {
                "zeta": _vec(r.zeta),
                "zeta_upper": _vec(r.zeta_upper),
                "zeta_lower": _vec(r.zeta_lower),
                "theta": _vec(r.theta),
                "v_upper": r.v_upper,
                "sigma_upper": r.sigma_upper,
                "v_lower": r.v_lower,
                "sigma_lower": r.sigma_lower,
            }
            for r in model.rules
        ],
        "normalization": None,
    }
    nz = model.normalization
    if nz is not None:
        out["normalization"] = {
            "x_min": _vec(nz.x_min),
            "x_max": _vec(nz.x_max),
            "y_min": float(nz.y_min),
            "y_max": float(nz.y_max),
        }
    return out


def model_from_dict(d: dict) -> TSKModel:
    if not isinstance(d, dict) or d.get("format") != MODEL_FORMAT:
        raise ModelFileError("not an it2tsk model file")
    if d.get("version") != MODEL_VERSION:
        raise ModelFileError(
            f"unsupported model version {d.get('version')!r} (expected {MODEL_VERSION})"
        )
    try:
        rules = [Rule(**r) for r in d["rules"]]
        nz = d.get("normalization")
        norm = None
        if nz is not None:
            norm = Normalization(
                np.array(nz["x_min"], dtype=float),
                np.array(nz["x_max"], dtype=float),
                float(nz["y_min"]),
                float(nz["y_max"]),
            )
        return TSKModel(
            rules=tuple(rules),
            alpha=float(d["alpha"]),
            eta=float(d["eta"]),
            normalization=norm,
            converged=bool(d.get("converged", True)),
        )
    except (KeyError, TypeError) as exc:
        raise ModelFileError(f"corrupted model file: {exc!r}") from exc
    except ValueError as exc:
        raise ModelFileError(f"model file violates an invariant: {exc}") from exc


def save_model(model: TSKModel, path) -> None:
    # json writes floats with repr(), which round-trips binary64 exactly
    Path(path).write_text(json.dumps(model_to_dict(model), indent=2) + "\n")


def load_model(path) -> TSKModel:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ModelFileError(f"cannot read model file {path}: {exc}") from exc
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelFileError(f"corrupted model file {path}: {exc}") from exc
    return model_from_dict(d)
