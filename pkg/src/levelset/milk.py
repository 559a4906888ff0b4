"""Pairwise elimination for an implicit (relative-to-max) threshold (MILK).

Membership above the implicit level (1 - eps) * max f is equivalent to every
scaled difference f(x) - (1 - eps) f(x') being nonnegative, so the algorithm
tracks ordered arm pairs: a confidently negative pair sends its first arm to
the rejected set and retires every pair touching that arm, a confidently
positive pair is retired alone, and an arm is accepted once no pair with it
in first position remains.  Designs, sample counts, and margins follow the
same round-doubling schedule as the explicit algorithm, over the difference
directions of the still-active pairs.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import rng as rng_mod
from .design import DesignProblem, FWConfig, frank_wolfe_design
from .errors import BudgetExhaustedError, InvalidInputError
from .kernels import ArmSet, FeatureCombo
from .melk import round_cap
from .results import (
    STOP_ALL_CLASSIFIED,
    STOP_BUDGET,
    STOP_TOLERANCE_CAP,
    RoundHistory,
    RunResult,
)
from .robust import rips


@dataclass(frozen=True)
class MilkConfig:
    """Inputs of the implicit-threshold algorithm (see MelkConfig for shared knobs)."""

    epsilon: float
    delta: float = 0.1
    gamma: float = 1e-7
    gamma_schedule: str = "fixed"
    beta_tilde: float = 0.0
    signal_bound: float = 1.0
    noise_std: float = 1.0
    fw: FWConfig = field(default_factory=FWConfig)
    max_rounds: int = 60

    def __post_init__(self):
        if not 0 < self.epsilon < 1:
            raise InvalidInputError("epsilon must be in (0, 1)")
        if not 0 < self.delta < 1:
            raise InvalidInputError("delta must be in (0, 1)")
        if self.beta_tilde < 0:
            raise InvalidInputError("beta_tilde must be nonnegative")
        if self.gamma < 0:
            raise InvalidInputError("gamma must be nonnegative")
        if self.gamma_schedule not in ("fixed", "decay"):
            raise InvalidInputError(f"unknown gamma schedule {self.gamma_schedule!r}")


class PairSet:
    """Active ordered pairs (i, j), i != j; self-pairs are never tracked.

    (i, j) and (j, i) are distinct.  Supports the two removal modes of the
    elimination loop and reports which arms have exhausted their
    first-coordinate pairs.
    """

    def __init__(self, n_arms: int):
        if n_arms < 1:
            raise InvalidInputError("need at least one arm")
        self.n_arms = n_arms
        self.active = np.ones((n_arms, n_arms), dtype=bool)
        np.fill_diagonal(self.active, False)

    def pairs(self) -> list[tuple[int, int]]:
        rows, cols = np.nonzero(self.active)
        return [(int(i), int(j)) for i, j in zip(rows, cols)]

    def is_active(self, i: int, j: int) -> bool:
        return bool(self.active[i, j])

    def remove_pair(self, i: int, j: int):
        self.active[i, j] = False

    def remove_arm_everywhere(self, i: int):
        self.active[i, :] = False
        self.active[:, i] = False

    def first_coordinate_count(self, i: int) -> int:
        return int(self.active[i, :].sum())

    def second_coordinate_count(self, i: int) -> int:
        return int(self.active[:, i].sum())

    def __len__(self):
        return int(self.active.sum())


def y_eps(arms: ArmSet, pairs, epsilon: float) -> list[FeatureCombo]:
    """Difference combos phi(i) - (1 - eps) phi(j), coefficients merged if i = j."""
    if not 0 < epsilon < 1:
        raise InvalidInputError("epsilon must be in (0, 1)")
    out = []
    for i, j in pairs:
        if not (0 <= i < arms.n_arms and 0 <= j < arms.n_arms):
            raise InvalidInputError(f"pair ({i}, {j}) out of range")
        out.append(FeatureCombo.difference(i, j, 1.0 - epsilon))
    return out


def membership_check(true_f, epsilon: float, arm: int) -> bool:
    """Ground-truth membership: f(arm) >= (1 - eps) max f.

    Equivalent to f(arm) - (1 - eps) f(x') >= 0 for every x', since the
    comparison against the maximizer is the binding one.
    """
    f = np.asarray(true_f, dtype=float)
    if not 0 <= arm < f.shape[0]:
        raise InvalidInputError("arm index out of range")
    if not 0 < epsilon < 1:
        raise InvalidInputError("epsilon must be in (0, 1)")
    return bool(f[arm] >= (1.0 - epsilon) * f.max())


def implicit_declared_above(good, active_arms, pair_set, pair_estimates) -> list[int]:
    """Metric-only completion: accepted arms plus active arms whose remaining
    first-coordinate pairs all currently estimate nonnegative."""
    out = set(good)
    for arm in active_arms:
        vals = [
            pair_estimates[(arm, j)]
            for j in range(pair_set.n_arms)
            if pair_set.is_active(arm, j) and (arm, j) in pair_estimates
        ]
        if vals and min(vals) >= 0.0:
            out.add(arm)
        elif not vals:
            out.add(arm)
    return sorted(out)


def run_milk(arms: ArmSet, oracle, cfg: MilkConfig, seed: int) -> RunResult:
    """Run the implicit-threshold pairwise elimination loop."""
    n = arms.n_arms
    draw_rng = rng_mod.stream(seed, "milk", "draws")
    pair_set = PairSet(n)
    good: set[int] = set()
    bad: set[int] = set()
    pair_estimates: dict[tuple[int, int], float] = {}
    rounds: list[RoundHistory] = []
    cap = min(round_cap(cfg.beta_tilde), cfg.max_rounds)
    stop_reason = STOP_BUDGET
    noise_var = cfg.signal_bound**2 + cfg.noise_std**2
    total = 0
    t = 1

    # A singleton domain has no pairs: its only arm is accepted outright.
    for arm in range(n):
        if pair_set.first_coordinate_count(arm) == 0:
            good.add(arm)

    while len(good) + len(bad) < n and t <= cap:
        start = time.perf_counter()
        delta_t = cfg.delta / (2.0 * t * t)
        gamma_t = cfg.gamma if cfg.gamma_schedule == "fixed" else cfg.gamma / (10.0 * t)
        pairs = pair_set.pairs()
        targets = tuple(y_eps(arms, pairs, cfg.epsilon))
        problem = DesignProblem(arms, targets, gamma_t)
        lam, g_value, _ = frank_wolfe_design(problem, cfg.fw)
        q_t = 16.0 * 4.0**t * g_value * noise_var * math.log(2.0 * t * t * n * n / cfg.delta)
        n_t = int(math.ceil(max(q_t, 2.0 * math.log(n / cfg.delta))))

        if oracle.remaining < n_t:
            stop_reason = STOP_BUDGET
            break
        try:
            table = rips(
                arms, targets, lam, gamma_t, n_t, delta_t, oracle, draw_rng,
                signal_bound=cfg.signal_bound, noise_std=cfg.noise_std,
            )
        except BudgetExhaustedError:
            stop_reason = STOP_BUDGET
            break

        margin = 2.0 * 2.0**-t
        for local, pair in enumerate(pairs):
            pair_estimates[pair] = table.values[local]

        # Downward removals first: a confidently negative pair rejects its
        # first arm and retires every pair containing it, in either position.
        newly_bad = []
        for i, j in pairs:
            if pair_estimates[(i, j)] < -margin and i not in bad:
                bad.add(i)
                newly_bad.append(i)
        for arm in newly_bad:
            pair_set.remove_arm_everywhere(arm)
        # Upward removals retire single pairs.
        for i, j in pairs:
            if pair_set.is_active(i, j) and pair_estimates[(i, j)] > margin:
                pair_set.remove_pair(i, j)
        # Acceptance is evaluated after all of the round's removals.
        newly_good = []
        for arm in range(n):
            if arm in good or arm in bad:
                continue
            if pair_set.first_coordinate_count(arm) == 0:
                good.add(arm)
                newly_good.append(arm)

        total += n_t
        active_arms = [a for a in range(n) if a not in good and a not in bad]
        rounds.append(
            RoundHistory(
                t=t,
                delta_t=delta_t,
                design=lam.weights,
                objective_value=g_value,
                n_samples=n_t,
                cumulative_samples=total,
                estimates={f"{i},{j}": pair_estimates[(i, j)] for i, j in pairs},
                newly_good=sorted(newly_good),
                newly_bad=sorted(newly_bad),
                active_after=[list(p) for p in pair_set.pairs()],
                declared_above=implicit_declared_above(
                    good, active_arms, pair_set, pair_estimates
                ),
                wall_ms=(time.perf_counter() - start) * 1e3,
            )
        )
        t += 1

    if len(good) + len(bad) == n:
        stop_reason = STOP_ALL_CLASSIFIED
    elif t > round_cap(cfg.beta_tilde):
        stop_reason = STOP_TOLERANCE_CAP

    return RunResult(
        good=sorted(good),
        bad=sorted(bad),
        returned=sorted(set(range(n)) - bad),
        rounds=rounds,
        total_samples=total,
        stop_reason=stop_reason,
        n_arms=n,
    )
