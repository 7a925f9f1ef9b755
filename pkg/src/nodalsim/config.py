"""Experiment configuration, presets, and derived RNG streams."""
from __future__ import annotations

import hashlib
import random
from dataclasses import dataclass, field, asdict
from typing import Optional

from .adversary import AttackKind
from .topology import Topology, build_figure1, generate_topology

TOPOLOGY_KINDS = ("figure1", "figure1-redundant", "generated")

BASELINE = "BASELINE"
PROTOCOL = "PROTOCOL"
MODES = (BASELINE, PROTOCOL)


class ConfigError(Exception):
    pass


@dataclass
class GeneratedSpec:
    n: int = 4
    u: int = 8
    l: int = 16
    o: int = 32
    redundancy_factor: float = 1.0


@dataclass
class SimConfig:
    topology: str = "generated"
    generated: GeneratedSpec = field(default_factory=GeneratedSpec)
    ticks: int = 60
    messages_per_trial: int = 64
    critical_fraction: float = 0.1
    duplication_budget: int = 45
    rate_tap: float = 0.0005
    rate_corrupt: float = 0.0006
    rate_sever: float = 0.0007
    duration_min: int = 1
    duration_max: int = 5
    criticality_weighted_attacks: bool = False
    consistent_corruption: bool = True
    max_retries: int = 3
    trials: int = 100
    seed: int = 1

    def validate(self) -> "SimConfig":
        if self.topology not in TOPOLOGY_KINDS:
            raise ConfigError(f"unknown topology {self.topology!r}; "
                              f"expected one of {TOPOLOGY_KINDS}")
        for name in ("ticks", "messages_per_trial", "trials"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1")
        for name in ("critical_fraction", "rate_tap", "rate_corrupt",
                     "rate_sever"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ConfigError(f"{name} must be in [0,1], got {v}")
        if self.duplication_budget < 0:
            raise ConfigError("duplication_budget must be non-negative")
        if self.max_retries < 0:
            raise ConfigError("max_retries must be non-negative")
        if self.duration_min < 1 or self.duration_max < self.duration_min:
            raise ConfigError("bad attack duration range")
        g = self.generated
        if min(g.n, g.u, g.l, g.o) < 1:
            raise ConfigError("generated node counts must be >= 1")
        if not 0.0 <= g.redundancy_factor <= 1.0:
            raise ConfigError("redundancy_factor must be in [0,1]")
        return self

    @property
    def rates(self) -> dict[AttackKind, float]:
        return {AttackKind.TAP: self.rate_tap,
                AttackKind.CORRUPT: self.rate_corrupt,
                AttackKind.SEVER: self.rate_sever}

    @property
    def duration_range(self) -> tuple[int, int]:
        return (self.duration_min, self.duration_max)

    def build_topology(self) -> Topology:
        if self.topology == "figure1":
            return build_figure1(False)
        if self.topology == "figure1-redundant":
            return build_figure1(True)
        g = self.generated
        return generate_topology(g.n, g.u, g.l, g.o, g.redundancy_factor,
                                 self.seed)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "SimConfig":
        data = dict(data)
        gen = data.pop("generated", None)
        unknown = set(data) - {f for f in cls.__dataclass_fields__}
        if unknown:
            raise ConfigError(f"unknown config fields: {sorted(unknown)}")
        cfg = cls(**data)
        if gen is not None:
            cfg.generated = GeneratedSpec(**gen)
        return cfg.validate()


# Calibrated defaults reproducing the reference comparison at desk scale.
PRESETS: dict[str, dict] = {
    "paper-like": {},  # the SimConfig defaults above
    "figure1": {
        "topology": "figure1-redundant",
        "messages_per_trial": 32,
        "duplication_budget": 24,
    },
}


def preset_config(name: str, **overrides) -> SimConfig:
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; available: {sorted(PRESETS)}")
    data = dict(PRESETS[name])
    data.update(overrides)
    return SimConfig.from_dict(data)


def derive_stream(seed: int, trial_index: int, label: str) -> random.Random:
    """Independent per-trial RNG stream keyed by (seed, trial, purpose)."""
    material = f"{seed}:{trial_index}:{label}".encode()
    return random.Random(int.from_bytes(hashlib.sha256(material).digest()[:8],
                                        "big"))
