"""Run records shared by the sequential algorithms.

Serialization is deterministic (sorted keys, exact float repr) so that two
runs with the same seed and configuration produce byte-identical JSON; wall
times are excluded from the default serialization for that reason.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

STOP_ALL_CLASSIFIED = "all-classified"
STOP_TOLERANCE_CAP = "tolerance-round-cap"
STOP_BUDGET = "budget-exhausted"


def _jsonable(obj):
    if isinstance(obj, np.ndarray):
        return [float(v) for v in obj.ravel()]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return obj


@dataclass
class RoundHistory:
    """State recorded at the end of one sampling round."""

    t: int
    delta_t: float
    design: np.ndarray
    objective_value: float
    n_samples: int
    cumulative_samples: int
    estimates: dict
    newly_good: list[int]
    newly_bad: list[int]
    active_after: list
    declared_above: list[int]
    wall_ms: float = 0.0

    def to_dict(self, include_timing=False) -> dict:
        doc = {
            "t": self.t,
            "delta_t": self.delta_t,
            "design": _jsonable(self.design),
            "objective_value": self.objective_value,
            "n_samples": self.n_samples,
            "cumulative_samples": self.cumulative_samples,
            "estimates": _jsonable(self.estimates),
            "newly_good": list(self.newly_good),
            "newly_bad": list(self.newly_bad),
            "active_after": _jsonable(self.active_after),
            "declared_above": list(self.declared_above),
        }
        if include_timing:
            doc["wall_ms"] = self.wall_ms
        return doc


@dataclass
class RunResult:
    """Final classification plus the per-round history of a run.

    ``returned`` is the default return set (everything never declared below);
    ``good`` and ``bad`` are the confidently classified sides.
    """

    good: list[int]
    bad: list[int]
    returned: list[int]
    rounds: list[RoundHistory]
    total_samples: int
    stop_reason: str
    n_arms: int
    extra: dict = field(default_factory=dict)

    def to_dict(self, include_timing=False) -> dict:
        return {
            "good": list(self.good),
            "bad": list(self.bad),
            "returned": list(self.returned),
            "rounds": [r.to_dict(include_timing) for r in self.rounds],
            "total_samples": self.total_samples,
            "stop_reason": self.stop_reason,
            "n_arms": self.n_arms,
            "extra": _jsonable(self.extra),
        }

    def to_json(self, include_timing=False) -> str:
        return json.dumps(self.to_dict(include_timing), sort_keys=True)
