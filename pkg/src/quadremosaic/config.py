"""Run configuration shared by all CLI commands (JSON on disk)."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

from .isp import IspConfig
from .metrics import MetricParams, config_fingerprint
from .remosaic import registry_lookup
from .sim import DEFAULT_GAINS, DEFAULT_K_READ, DEFAULT_K_SHOT, NoiseParams


@dataclass(frozen=True)
class NoiseConfig:
    k_shot: float = DEFAULT_K_SHOT
    k_read: float = DEFAULT_K_READ
    gains: tuple[float, ...] = DEFAULT_GAINS
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "gains", tuple(float(g) for g in self.gains))
        for g in self.gains:
            NoiseParams(g, self.k_shot, self.k_read, self.seed)  # validates ranges

    def params(self, gain_db: float) -> NoiseParams:
        return NoiseParams(gain_db, self.k_shot, self.k_read, self.seed)


@dataclass(frozen=True)
class RunConfig:
    noise: NoiseConfig = field(default_factory=NoiseConfig)
    isp: IspConfig = field(default_factory=IspConfig)
    metrics: MetricParams = field(default_factory=MetricParams)
    algorithm: str = "interp"
    options: dict = field(default_factory=dict)

    def __post_init__(self):
        registry_lookup(self.algorithm)

    @classmethod
    def from_dict(cls, d: dict) -> RunConfig:
        unknown = set(d) - {"noise", "isp", "metrics", "algorithm", "options"}
        if unknown:
            raise ValueError(f"unknown config sections: {sorted(unknown)}")
        isp = dict(d.get("isp", {}))
        if "wb_gains" in isp:
            isp["wb_gains"] = tuple(isp["wb_gains"])
        return cls(
            noise=NoiseConfig(**d.get("noise", {})),
            isp=IspConfig(**isp),
            metrics=MetricParams(**d.get("metrics", {})),
            algorithm=d.get("algorithm", "interp"),
            options=dict(d.get("options", {})),
        )

    @classmethod
    def load(cls, path: Path | None) -> RunConfig:
        if path is None:
            return cls()
        return cls.from_dict(json.loads(Path(path).read_text()))

    def to_dict(self) -> dict:
        noise = asdict(self.noise)
        noise["gains"] = list(self.noise.gains)
        return {"noise": noise, "isp": self.isp.to_dict(), "metrics": asdict(self.metrics),
                "algorithm": self.algorithm, "options": dict(self.options)}

    def fingerprint(self) -> str:
        return config_fingerprint(self.isp, self.metrics, {"noise": self.to_dict()["noise"]})
