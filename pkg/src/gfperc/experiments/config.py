"""Experiment configuration: one flat dataclass, JSON round trip, canonical hash."""
from __future__ import annotations

import dataclasses
import hashlib
import json
import math
from dataclasses import dataclass, field
from typing import Any

from ..kernels import Kernel

EXPERIMENTS = (
    "validate-kernel", "sample", "crossing", "fkg", "qi-fields", "qi-vectors", "ns-density",
    "concentration", "one-arm", "tassion", "pivotal-scaling", "mesh-uniformity", "kac-rice",
    "duality-audit",
)

# keys that change how a run executes but not what it computes
EXECUTION_KEYS = ("threads", "out", "format", "plot", "timing")


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    experiment: str = "crossing"
    kernel: dict = field(default_factory=lambda: {"family": "bargmann_fock"})
    epsilon: float = 0.25
    p: float = 0.0
    s: list = field(default_factory=lambda: [4.0, 8.0, 16.0, 32.0])
    r: float = 1.0
    rho: list = field(default_factory=lambda: [1.0])
    d: list = field(default_factory=lambda: [5.0, 10.0, 15.0, 20.0])
    alpha: list | None = None
    beta: float | None = None
    square: float = 5.0
    window: float = 8.0
    gap: float = 8.0
    epsilons: list = field(default_factory=lambda: [1.0, 0.5, 0.25, 0.125])
    levels: list = field(default_factory=lambda: [-0.5, 0.0, 0.5])
    rel_eps: float = 0.2
    tiles_per_side: int = 4
    cases: int = 20
    dim: int = 4
    mc: int = 200_000
    t_nodes: int = 8
    length: float = math.pi
    direction: list = field(default_factory=lambda: [1.0, 0.0])
    spacing: float = 1e-3
    replicas: int = 4000
    seed: int = 0
    threads: int = 1
    out: str = "results"
    format: str = "csv"
    plot: bool = False
    timing: bool = False

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {self.experiment!r}")
        if int(self.replicas) < 1:
            raise ConfigError("replicas must be >= 1")
        if not self.epsilon > 0 or any(not e > 0 for e in self.epsilons):
            raise ConfigError("mesh must be positive")
        if int(self.threads) < 1:
            raise ConfigError("threads must be >= 1")
        if not 0 <= int(self.seed) < 2 ** 64:
            raise ConfigError("seed must be an unsigned 64-bit integer")
        if self.format not in ("csv", "json"):
            raise ConfigError("format must be csv or json")
        if not 0 <= self.rel_eps < 1:
            raise ConfigError("rel_eps must lie in [0, 1)")
        Kernel.from_dict(self.kernel)

    @property
    def kernel_obj(self) -> Kernel:
        return Kernel.from_dict(self.kernel)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        return cls(**data)

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def replace(self, **changes: Any) -> "ExperimentConfig":
        return self.from_dict({**self.to_dict(), **changes})

    def canonical(self) -> str:
        d = {k: v for k, v in self.to_dict().items() if k not in EXECUTION_KEYS}
        return json.dumps(d, sort_keys=True, separators=(",", ":"))

    def hash(self) -> str:
        return hashlib.sha256(self.canonical().encode()).hexdigest()


# per-experiment defaults applied before user overrides
DEFAULTS: dict[str, dict] = {
    "crossing": {"s": [4.0, 8.0, 16.0], "rho": [1.0, 2.0]},
    "fkg": {"s": [4.0, 8.0]},
    "qi-fields": {"replicas": 20000, "d": [0.0, 5.0, 10.0, 15.0, 20.0]},
    "ns-density": {"epsilon": 0.2, "s": [10.0, 20.0, 40.0], "replicas": 400},
    "concentration": {"epsilon": 0.2, "s": [10.0, 20.0, 40.0], "replicas": 400,
                      "tiles_per_side": 2},
    "one-arm": {"replicas": 8000},
    "tassion": {"s": [8.0, 16.0], "replicas": 2000},
    "pivotal-scaling": {"epsilons": [0.4, 0.2, 0.1], "replicas": 1000},
    "mesh-uniformity": {"s": [8.0], "rho": [2.0]},
    "kac-rice": {"replicas": 10000},
    "duality-audit": {"s": [8.0], "rho": [1.0, 2.0], "replicas": 500},
    "qi-vectors": {"replicas": 1},
    "sample": {"replicas": 1, "s": [8.0]},
    "validate-kernel": {"replicas": 1},
}


def default_config(experiment: str, **overrides) -> ExperimentConfig:
    if experiment not in EXPERIMENTS:
        raise ConfigError(f"unknown experiment {experiment!r}")
    return ExperimentConfig.from_dict({"experiment": experiment, **DEFAULTS.get(experiment, {}),
                                       **overrides})
