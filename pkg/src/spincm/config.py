"""Run-time configuration shared by the CLI and the verification suite."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .phase import EPS_COLL, EPS_CONSTR
from .verify import DEFAULT_THRESHOLDS, SuiteConfig


@dataclass
class Config:
    """Tolerances, integrator defaults and contour-oracle settings."""

    eps_coll: float = EPS_COLL
    eps_constr: float = EPS_CONSTR
    dt: float = 1e-3
    method: str = "RK4"
    contour_nodes: int = 256
    radius_factor: float = 2.0
    thresholds: dict = field(default_factory=lambda: dict(DEFAULT_THRESHOLDS))

    def __post_init__(self):
        for name in ("eps_coll", "eps_constr", "dt", "radius_factor"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        for key, val in self.thresholds.items():
            if val <= 0:
                raise ValueError(f"threshold {key} must be positive")

    def suite_config(self) -> SuiteConfig:
        return SuiteConfig(dt=self.dt, thresholds=dict(self.thresholds))

    @classmethod
    def load(cls, path) -> "Config":
        with open(path) as fh:
            data = json.load(fh)
        thresholds = dict(DEFAULT_THRESHOLDS)
        thresholds.update(data.pop("thresholds", {}))
        return cls(thresholds=thresholds, **data)
