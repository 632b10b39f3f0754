"""Experiment configuration, loaded from and echoed back to JSON."""

from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

from ..model import LinearNetwork, init_balanced, init_gaussian, init_identity
from ..objective import Dataset, LpObjective
from ..optim.adaptive import DEFAULTS as ADAPTIVE_DEFAULTS
from .data import load_ethanol, synth_gaussian, synth_illcond

DATA_ENV = "OVERPARAM_DATA"
PROBLEMS = ("synth_gaussian", "synth_illcond", "uci_ethanol")
INITS = ("gaussian", "identity", "balanced")
OPTIMIZERS = ("gd", "e2e", "adagrad", "adadelta", "adam")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ProblemSpec:
    kind: str
    params: dict = field(default_factory=dict)


@dataclass(frozen=True)
class ModelSpec:
    depth: int = 1
    hidden: tuple[int, ...] = ()
    init: str = "gaussian"
    std: float = 0.01
    offset: float = 1.0


@dataclass(frozen=True)
class OptimizerSpec:
    kind: str = "gd"
    eta: float = 1e-3
    lam: float = 0.0
    hyper: dict = field(default_factory=dict)


@dataclass(frozen=True)
class ExperimentConfig:
    problem: ProblemSpec
    p: int = 2
    model: ModelSpec = ModelSpec()
    optimizer: OptimizerSpec = OptimizerSpec()
    iters: int = 1000
    seed: int = 0
    delta: float = 1e-3
    delta_mode: str = "relative"
    label: str | None = None
    timing: bool = False

    def __post_init__(self):
        if self.problem.kind not in PROBLEMS:
            raise ConfigError(f"unknown problem {self.problem.kind!r}; choose from {PROBLEMS}")
        if int(self.p) != self.p or self.p < 2 or self.p % 2:
            raise ConfigError(f"p must be an even integer >= 2, got {self.p}")
        if self.model.depth < 1:
            raise ConfigError("model depth must be >= 1")
        if len(self.model.hidden) != self.model.depth - 1:
            raise ConfigError(
                f"depth {self.model.depth} needs {self.model.depth - 1} hidden widths, got {list(self.model.hidden)}"
            )
        if any(h < 1 for h in self.model.hidden):
            raise ConfigError("hidden widths must be positive")
        if self.model.init not in INITS:
            raise ConfigError(f"unknown init {self.model.init!r}; choose from {INITS}")
        if self.optimizer.kind not in OPTIMIZERS:
            raise ConfigError(f"unknown optimizer {self.optimizer.kind!r}; choose from {OPTIMIZERS}")
        if self.optimizer.kind in ADAPTIVE_DEFAULTS:
            unknown = set(self.optimizer.hyper) - set(ADAPTIVE_DEFAULTS[self.optimizer.kind])
            if unknown:
                raise ConfigError(f"unknown {self.optimizer.kind} hyperparameters {sorted(unknown)}")
        elif self.optimizer.hyper:
            raise ConfigError(f"{self.optimizer.kind} takes no extra hyperparameters")
        if not self.optimizer.eta > 0 or self.optimizer.lam < 0:
            raise ConfigError("eta must be > 0 and lam >= 0")
        if self.iters < 0:
            raise ConfigError("iters must be >= 0")
        if self.delta_mode not in ("relative", "absolute") or not self.delta > 0:
            raise ConfigError("delta must be > 0 with delta_mode 'relative' or 'absolute'")

    def with_rate(self, eta: float) -> "ExperimentConfig":
        return replace(self, optimizer=replace(self.optimizer, eta=float(eta)))

    def to_dict(self) -> dict:
        out = asdict(self)
        out["problem"] = {"kind": self.problem.kind, **self.problem.params}
        out["model"]["hidden"] = list(self.model.hidden)
        return out

    @classmethod
    def from_dict(cls, raw: dict) -> "ExperimentConfig":
        try:
            raw = dict(raw)
            prob = dict(raw.pop("problem"))
            problem = ProblemSpec(prob.pop("kind"), prob)
            model = raw.pop("model", {})
            model = ModelSpec(**{**model, "hidden": tuple(model.get("hidden", ()))})
            optimizer = OptimizerSpec(**raw.pop("optimizer", {}))
            return cls(problem=problem, model=model, optimizer=optimizer, **raw)
        except (KeyError, TypeError) as exc:
            raise ConfigError(f"malformed config: {exc}") from None

    @classmethod
    def from_json(cls, path) -> "ExperimentConfig":
        try:
            with open(path, encoding="utf-8") as fh:
                raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON ({exc})") from None
        return cls.from_dict(raw)

    @property
    def widths(self) -> tuple[int, ...]:
        return (self.input_dim, *self.model.hidden, 1)

    @property
    def input_dim(self) -> int:
        kind, params = self.problem.kind, self.problem.params
        if kind == "synth_gaussian":
            return int(params["d"])
        if kind == "synth_illcond":
            return 2
        return 128


def resolve_data_path(path: str | None, data_root: str | None = None) -> Path:
    """Relative dataset paths resolve against ``--data``, then ``$OVERPARAM_DATA``."""
    root = data_root or os.environ.get(DATA_ENV)
    if path is None:
        if root is None:
            raise ConfigError(f"no dataset path: pass --data or set {DATA_ENV}")
        return Path(root)
    p = Path(path)
    if not p.is_absolute() and root is not None:
        return Path(root) / p
    return p


def build_dataset(config: ExperimentConfig, data_root: str | None = None) -> Dataset:
    params = config.problem.params
    if config.problem.kind == "synth_gaussian":
        return synth_gaussian(
            int(params["d"]), int(params["m"]), int(params.get("seed", config.seed)),
            float(params.get("scale", 1.0)), float(params.get("noise", 0.1)),
        )
    if config.problem.kind == "synth_illcond":
        return synth_illcond(float(params["y1"]), float(params["y2"]))
    return load_ethanol(resolve_data_path(params.get("path"), data_root))


def build_objective(config: ExperimentConfig, data_root: str | None = None) -> LpObjective:
    return LpObjective(build_dataset(config, data_root), config.p)


def build_network(config: ExperimentConfig, input_dim: int | None = None) -> LinearNetwork:
    d = input_dim if input_dim is not None else config.input_dim
    widths = (d, *config.model.hidden, 1)
    m = config.model
    if m.init == "gaussian":
        return init_gaussian(widths, m.std, config.seed)
    if m.init == "identity":
        return init_identity(widths, m.std, m.offset, config.seed)
    return init_balanced(widths, m.std, config.seed)
