"""Synthetic ground-truth instances and budgeted noisy sampling oracles.

Generators:

* ``gp_draw``      - f sampled from a zero-mean process with the RBF kernel
                     on a 1-d or 2-d uniform grid in [0, 1]^d
* ``cosine_1d``    - f(x) = cos(freq * x) on a 1-d grid (misspecified for RBF)
* ``cosine_sine_2d`` - f(x, y) = cos(2 pi x) sin(2 pi y) on a 2-d grid
* ``soare``        - the hard linear-bandit geometry: e1, e2, and a cluster
                     of arms at angle ~pi/4 whose first coordinate carries f
* ``explicit_linear`` - arbitrary points with a known linear parameter
* ``bandit``       - standard basis arms with given means

Thresholds are explicit (alpha), quantile (alpha placed between order
statistics so that a fixed fraction is strictly above), or implicit
(epsilon, threshold (1-eps) max f).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import rng as rng_mod
from .errors import BudgetExhaustedError, InvalidInputError
from .kernels import ArmSet, KernelSpec

DEFAULT_LENGTHSCALE = 0.1


@dataclass(frozen=True)
class InstanceSpec:
    """A recipe for one synthetic instance: generator, parameters, threshold."""

    kind: str
    params: dict = field(default_factory=dict)
    threshold: tuple[str, float] = ("explicit", 0.0)

    def __post_init__(self):
        mode, value = self.threshold
        if mode not in ("explicit", "quantile", "implicit"):
            raise InvalidInputError(f"unknown threshold mode {mode!r}")
        object.__setattr__(self, "threshold", (mode, float(value)))

    @classmethod
    def gp_draw(cls, lengthscale=DEFAULT_LENGTHSCALE, grid=200, threshold=("quantile", 0.9),
                amplitude=None):
        """Zero-mean draw with the RBF kernel; ``amplitude`` rescales the draw
        so max |f| equals it (keeping the signal bound at a known value)."""
        params = {"lengthscale": lengthscale, "grid": grid}
        if amplitude is not None:
            params["amplitude"] = float(amplitude)
        return cls("gp_draw", params, threshold)

    @classmethod
    def cosine_1d(cls, freq=8 * math.pi, n_points=700, lengthscale=DEFAULT_LENGTHSCALE,
                  threshold=("quantile", 0.7)):
        return cls(
            "cosine_1d",
            {"freq": freq, "n_points": n_points, "lengthscale": lengthscale},
            threshold,
        )

    @classmethod
    def cosine_sine_2d(cls, grid=(30, 30), lengthscale=0.2, threshold=("explicit", 0.0)):
        return cls("cosine_sine_2d", {"grid": tuple(grid), "lengthscale": lengthscale}, threshold)

    @classmethod
    def soare(cls, n=100, d=25, xi_range=0.2, threshold=("explicit", 0.5)):
        return cls("soare", {"n": n, "d": d, "xi_range": xi_range}, threshold)

    @classmethod
    def explicit_linear(cls, theta, points, threshold=("explicit", 0.0)):
        return cls(
            "explicit_linear",
            {"theta": [float(v) for v in theta],
             "points": [[float(v) for v in row] for row in np.atleast_2d(points)]},
            threshold,
        )

    @classmethod
    def bandit(cls, means, threshold=("implicit", 0.5)):
        return cls("bandit", {"means": [float(v) for v in means]}, threshold)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "params": _plain(self.params), "threshold": list(self.threshold)}

    @classmethod
    def from_dict(cls, data: dict) -> "InstanceSpec":
        thr = data.get("threshold", ["explicit", 0.0])
        return cls(data["kind"], dict(data.get("params", {})), (thr[0], float(thr[1])))


def _plain(obj):
    if isinstance(obj, dict):
        return {k: _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


class Environment:
    """Ground truth plus a budgeted, seeded noisy observation oracle.

    An Environment is exclusively owned by one run: the budget counter and
    the noise stream are mutable state.
    """

    def __init__(self, arms: ArmSet, true_f, noise_std: float, seed: int,
                 budget: int | None = None, signal_bound: float | None = None,
                 spec: InstanceSpec | None = None):
        self.arms = arms
        self.true_f = np.asarray(true_f, dtype=float)
        if self.true_f.shape != (arms.n_arms,):
            raise InvalidInputError("true_f length must match the arm set")
        if noise_std < 0:
            raise InvalidInputError("noise_std must be nonnegative")
        self.noise_std = float(noise_std)
        self.seed = int(seed)
        self.budget = None if budget is None else int(budget)
        if signal_bound is None:
            signal_bound = float(np.ceil(np.max(np.abs(self.true_f)))) or 1.0
        self.signal_bound = float(signal_bound)
        self.spec = spec
        self.samples_used = 0
        self._noise = rng_mod.stream(self.seed, "noise")

    @property
    def remaining(self) -> float:
        if self.budget is None:
            return math.inf
        return self.budget - self.samples_used

    def _charge(self, count: int):
        if self.budget is not None and self.samples_used + count > self.budget:
            raise BudgetExhaustedError(
                f"requested {count} observations with {self.remaining} remaining"
            )
        self.samples_used += count

    def observe(self, arm: int) -> float:
        """One noisy value f(arm) + sigma * g; counts against the budget."""
        if not 0 <= arm < self.arms.n_arms:
            raise InvalidInputError(f"arm index {arm} out of range")
        self._charge(1)
        noise = self._noise.standard_normal() if self.noise_std > 0 else 0.0
        return float(self.true_f[arm] + self.noise_std * noise)

    def observe_many(self, arm_indices) -> np.ndarray:
        """Vectorized draws for a sequence of arm indices, one budget unit each."""
        idx = np.asarray(arm_indices, dtype=int)
        if idx.size and (idx.min() < 0 or idx.max() >= self.arms.n_arms):
            raise InvalidInputError("arm index out of range")
        self._charge(int(idx.size))
        out = self.true_f[idx].astype(float)
        if self.noise_std > 0 and idx.size:
            out = out + self.noise_std * self._noise.standard_normal(idx.size)
        return out

    def to_json(self) -> str:
        doc = {
            "points": self.arms.points.tolist(),
            "kernel": self.arms.kernel.to_dict(),
            "true_f": self.true_f.tolist(),
            "noise_std": self.noise_std,
            "seed": self.seed,
            "budget": self.budget,
            "signal_bound": self.signal_bound,
            "spec": self.spec.to_dict() if self.spec is not None else None,
        }
        return json.dumps(doc, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "Environment":
        doc = json.loads(text)
        arms = ArmSet(np.asarray(doc["points"]), KernelSpec.from_dict(doc["kernel"]))
        spec = InstanceSpec.from_dict(doc["spec"]) if doc.get("spec") else None
        return cls(
            arms,
            np.asarray(doc["true_f"]),
            doc["noise_std"],
            doc["seed"],
            doc.get("budget"),
            doc.get("signal_bound"),
            spec,
        )


def _grid_points(grid) -> np.ndarray:
    if isinstance(grid, int):
        return np.linspace(0.0, 1.0, grid).reshape(-1, 1)
    nx, ny = grid
    xs = np.arange(1, nx + 1) / nx
    ys = np.arange(1, ny + 1) / ny
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    return np.column_stack([gx.ravel(), gy.ravel()])


def generate(spec: InstanceSpec, seed: int, noise_std: float = 1.0,
             budget: int | None = None, signal_bound: float | None = None) -> Environment:
    """Materialize an instance deterministically from (spec, seed)."""
    gen = rng_mod.stream(seed, "instance")
    kind = spec.kind
    p = spec.params

    if kind == "gp_draw":
        pts = _grid_points(p.get("grid", 200))
        kernel = KernelSpec.squared_exponential(p.get("lengthscale", DEFAULT_LENGTHSCALE))
        arms = ArmSet(pts, kernel)
        gram = arms.gram
        n = arms.n_arms
        jitter = 1e-8 * np.trace(gram) / n
        chol = np.linalg.cholesky(gram + jitter * np.eye(n))
        f = chol @ gen.standard_normal(n)
        if "amplitude" in p:
            f *= p["amplitude"] / np.max(np.abs(f))
    elif kind == "cosine_1d":
        pts = np.linspace(0.0, 1.0, int(p.get("n_points", 700))).reshape(-1, 1)
        kernel = KernelSpec.squared_exponential(p.get("lengthscale", DEFAULT_LENGTHSCALE))
        arms = ArmSet(pts, kernel)
        f = np.cos(p.get("freq", 8 * math.pi) * pts[:, 0])
    elif kind == "cosine_sine_2d":
        pts = _grid_points(tuple(p.get("grid", (30, 30))))
        kernel = KernelSpec.squared_exponential(p.get("lengthscale", 0.2))
        arms = ArmSet(pts, kernel)
        f = np.cos(2 * math.pi * pts[:, 0]) * np.sin(2 * math.pi * pts[:, 1])
    elif kind == "soare":
        n, d = int(p.get("n", 100)), int(p.get("d", 25))
        if n < 2 or d < 2:
            raise InvalidInputError("soare instance needs n >= 2 and d >= 2")
        xi_range = float(p.get("xi_range", 0.2))
        pts = np.zeros((n, d))
        pts[0, 0] = 1.0
        pts[1, 1] = 1.0
        xi = gen.uniform(-xi_range, xi_range, size=n - 2)
        angle = (math.pi / 4.0) * (1.0 + xi)
        pts[2:, 0] = np.cos(angle)
        pts[2:, 1] = np.sin(angle)
        arms = ArmSet(pts, KernelSpec.linear())
        f = pts[:, 0].copy()
    elif kind == "explicit_linear":
        pts = np.asarray(p["points"], dtype=float)
        theta = np.asarray(p["theta"], dtype=float)
        arms = ArmSet(pts, KernelSpec.linear())
        f = arms.points @ theta
    elif kind == "bandit":
        means = np.asarray(p["means"], dtype=float)
        arms = ArmSet(np.eye(means.shape[0]), KernelSpec.linear())
        f = means.copy()
    else:
        raise InvalidInputError(f"unknown instance kind {kind!r}")

    return Environment(arms, f, noise_std, seed, budget, signal_bound, spec)


def resolve_threshold(true_f, threshold: tuple[str, float]) -> tuple[str, float]:
    """Turn a quantile threshold into an explicit alpha between order statistics."""
    mode, value = threshold
    f = np.asarray(true_f, dtype=float)
    if mode == "quantile":
        if not 0 < value < 1:
            raise InvalidInputError("quantile must be in (0, 1)")
        n = f.shape[0]
        k = min(max(int(round(value * n)), 1), n - 1)
        ordered = np.sort(f)
        return ("explicit", float(0.5 * (ordered[k - 1] + ordered[k])))
    return (mode, value)


@dataclass(frozen=True)
class TruthSummary:
    """Ground-truth target set, per-arm gaps, and the minimum gap."""

    members: tuple[int, ...]
    gaps: np.ndarray
    delta_min: float
    threshold_value: float
    degenerate: bool


def true_sets_and_gaps(env: Environment, threshold: tuple[str, float] | None = None) -> TruthSummary:
    """Target set and gap profile for an explicit, quantile, or implicit threshold."""
    thr = threshold if threshold is not None else env.spec.threshold
    mode, value = resolve_threshold(env.true_f, thr)
    f = env.true_f
    if mode == "explicit":
        level = value
        members = np.flatnonzero(f > level)
        gaps = np.abs(f - level)
    elif mode == "implicit":
        eps = value
        if not 0 < eps < 1:
            raise InvalidInputError("epsilon must be in (0, 1)")
        level = (1.0 - eps) * f.max()
        members = np.flatnonzero(f >= level)
        gaps = np.abs(f - level)
    else:  # pragma: no cover - resolve_threshold removes quantile
        raise InvalidInputError(f"unresolved threshold mode {mode!r}")
    delta_min = float(gaps.min())
    return TruthSummary(
        members=tuple(int(i) for i in members),
        gaps=gaps,
        delta_min=delta_min,
        threshold_value=float(level),
        degenerate=bool(delta_min == 0.0),
    )
