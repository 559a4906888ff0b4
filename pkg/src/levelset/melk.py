"""Phased design-sample-estimate-eliminate for an explicit threshold (MELK).

Each round computes a minimax design over the still-active arms, draws a
round-doubling number of samples from it, robustly estimates every active
arm's value, and classifies arms whose estimate clears the threshold by the
current margin 2 * 2^-t.  The loop stops when everything is classified or
the round cap implied by the user tolerance is reached.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import rng as rng_mod
from .design import Design, DesignProblem, FWConfig, frank_wolfe_design, beta_bar
from .errors import BudgetExhaustedError, InvalidInputError
from .kernels import ArmSet, FeatureCombo
from .results import (
    STOP_ALL_CLASSIFIED,
    STOP_BUDGET,
    STOP_TOLERANCE_CAP,
    RoundHistory,
    RunResult,
)
from .robust import rips


@dataclass(frozen=True)
class MelkConfig:
    """Inputs of the explicit-threshold algorithm.

    gamma_schedule "fixed" uses gamma as given; "decay" uses gamma / (10 * i)
    at the i-th design computation.  beta_tilde = 0 removes the round cap
    (max_rounds remains as a safety net, reported as budget exhaustion).
    batch_size switches to the batched variant: draw that many samples from
    the design each round and eliminate with posterior confidence intervals
    of half-width batch_beta_sqrt * posterior std.
    """

    alpha: float
    delta: float = 0.1
    gamma: float = 1e-7
    gamma_schedule: str = "fixed"
    beta_tilde: float = 0.0
    signal_bound: float = 1.0
    noise_std: float = 1.0
    fw: FWConfig = field(default_factory=FWConfig)
    batch_size: int | None = None
    batch_beta_sqrt: float = 3.0
    max_rounds: int = 60

    def __post_init__(self):
        if not 0 < self.delta < 1:
            raise InvalidInputError("delta must be in (0, 1)")
        if self.beta_tilde < 0:
            raise InvalidInputError("beta_tilde must be nonnegative")
        if not self.signal_bound > 0:
            raise InvalidInputError("signal_bound must be positive")
        if self.gamma < 0:
            raise InvalidInputError("gamma must be nonnegative")
        if self.gamma_schedule not in ("fixed", "decay"):
            raise InvalidInputError(f"unknown gamma schedule {self.gamma_schedule!r}")


def round_cap(beta_tilde: float) -> float:
    """Largest round index allowed by the tolerance; inf when beta_tilde = 0."""
    if beta_tilde == 0:
        return math.inf
    return math.ceil(math.log2(4.0 / beta_tilde))


def declared_above(good, active, estimates, level) -> list[int]:
    """Metric-only completion of a partial run: classified-good arms plus
    active arms whose current estimate sits at or above the threshold."""
    out = set(good)
    for arm in active:
        if estimates.get(arm, -math.inf) >= level:
            out.add(arm)
    return sorted(out)


def run_melk(arms: ArmSet, oracle, cfg: MelkConfig, seed: int) -> RunResult:
    """Run the explicit-threshold elimination loop to completion.

    Deterministic given (cfg, seed, oracle seed).  Budget exhaustion inside a
    round returns the partial result accumulated so far.
    """
    if cfg.batch_size is not None:
        return _run_melk_batched(arms, oracle, cfg, seed)

    n = arms.n_arms
    draw_rng = rng_mod.stream(seed, "melk", "draws")
    good: set[int] = set()
    bad: set[int] = set()
    active = list(range(n))
    estimates: dict[int, float] = {}
    rounds: list[RoundHistory] = []
    cap = min(round_cap(cfg.beta_tilde), cfg.max_rounds)
    stop_reason = STOP_TOLERANCE_CAP if round_cap(cfg.beta_tilde) < 1 else STOP_BUDGET
    noise_var = cfg.signal_bound**2 + cfg.noise_std**2
    total = 0
    t = 1
    n_designs = 0

    while len(good) + len(bad) < n and t <= cap:
        start = time.perf_counter()
        delta_t = cfg.delta / (2.0 * t * t)
        n_designs += 1
        gamma_t = cfg.gamma if cfg.gamma_schedule == "fixed" else cfg.gamma / (10.0 * n_designs)
        problem = DesignProblem(
            arms, tuple(FeatureCombo.arm(i) for i in active), gamma_t
        )
        lam, g_value, _ = frank_wolfe_design(problem, cfg.fw)
        q_t = 16.0 * 4.0**t * g_value * noise_var * math.log(2.0 * t * t * n * n / cfg.delta)
        n_t = int(math.ceil(max(q_t, 2.0 * math.log(n / cfg.delta))))

        if oracle.remaining < n_t:
            stop_reason = STOP_BUDGET
            break
        try:
            table = rips(
                arms, problem.targets, lam, gamma_t, n_t, delta_t, oracle, draw_rng,
                signal_bound=cfg.signal_bound, noise_std=cfg.noise_std,
            )
        except BudgetExhaustedError:
            stop_reason = STOP_BUDGET
            break

        margin = 2.0 * 2.0**-t
        newly_good, newly_bad = [], []
        for local, arm in enumerate(active):
            w_val = table.values[local]
            estimates[arm] = w_val
            if w_val < cfg.alpha - margin:
                bad.add(arm)
                newly_bad.append(arm)
            elif w_val > cfg.alpha + margin:
                good.add(arm)
                newly_good.append(arm)
        round_estimates = {str(arm): estimates[arm] for arm in active}
        active = [a for a in active if a not in good and a not in bad]
        total += n_t
        rounds.append(
            RoundHistory(
                t=t,
                delta_t=delta_t,
                design=lam.weights,
                objective_value=g_value,
                n_samples=n_t,
                cumulative_samples=total,
                estimates=round_estimates,
                newly_good=sorted(newly_good),
                newly_bad=sorted(newly_bad),
                active_after=list(active),
                declared_above=declared_above(good, active, estimates, cfg.alpha),
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


def _run_melk_batched(arms: ArmSet, oracle, cfg: MelkConfig, seed: int) -> RunResult:
    """Batched variant: fixed draws per design, posterior-interval elimination."""
    from .gp_baselines import GPPosterior

    n = arms.n_arms
    draw_rng = rng_mod.stream(seed, "melk", "draws")
    posterior = GPPosterior(arms, max(cfg.noise_std, 1e-6) ** 2)
    good: set[int] = set()
    bad: set[int] = set()
    active = list(range(n))
    rounds: list[RoundHistory] = []
    stop_reason = STOP_BUDGET
    total = 0
    t = 1

    while len(good) + len(bad) < n and t <= cfg.max_rounds:
        start = time.perf_counter()
        gamma_t = cfg.gamma if cfg.gamma_schedule == "fixed" else cfg.gamma / (10.0 * t)
        problem = DesignProblem(
            arms, tuple(FeatureCombo.arm(i) for i in active), gamma_t
        )
        lam, g_value, _ = frank_wolfe_design(problem, cfg.fw)
        n_t = min(cfg.batch_size, int(oracle.remaining))
        if n_t <= 0:
            stop_reason = STOP_BUDGET
            break
        idx = draw_rng.choice(n, size=n_t, p=lam.weights / lam.weights.sum())
        ys = oracle.observe_many(idx)
        for arm, y in zip(idx, ys):
            posterior = posterior.update(int(arm), float(y))
        total += n_t

        width = cfg.batch_beta_sqrt * np.sqrt(np.maximum(posterior.var, 0.0))
        newly_good, newly_bad = [], []
        for arm in active:
            if posterior.mu[arm] + width[arm] < cfg.alpha:
                bad.add(arm)
                newly_bad.append(arm)
            elif posterior.mu[arm] - width[arm] > cfg.alpha:
                good.add(arm)
                newly_good.append(arm)
        estimates = {str(a): float(posterior.mu[a]) for a in active}
        active = [a for a in active if a not in good and a not in bad]
        rounds.append(
            RoundHistory(
                t=t,
                delta_t=cfg.delta,
                design=lam.weights,
                objective_value=g_value,
                n_samples=n_t,
                cumulative_samples=total,
                estimates=estimates,
                newly_good=sorted(newly_good),
                newly_bad=sorted(newly_bad),
                active_after=list(active),
                declared_above=declared_above(
                    good, active, {a: float(posterior.mu[a]) for a in active}, cfg.alpha
                ),
                wall_ms=(time.perf_counter() - start) * 1e3,
            )
        )
        t += 1

    if len(good) + len(bad) == n:
        stop_reason = STOP_ALL_CLASSIFIED
    return RunResult(
        good=sorted(good),
        bad=sorted(bad),
        returned=sorted(set(range(n)) - bad),
        rounds=rounds,
        total_samples=total,
        stop_reason=stop_reason,
        n_arms=n,
    )


@dataclass(frozen=True)
class GuaranteeReport:
    """Containment checks of a finished run against the tolerance floor."""

    beta_bar: float
    missing_from_returned: tuple[int, ...]
    excess_in_returned: tuple[int, ...]
    missing_from_good: tuple[int, ...]
    excess_in_good: tuple[int, ...]

    @property
    def ok(self) -> bool:
        return not (self.missing_from_returned or self.excess_in_returned)


def melk_classification_guarantee_check(
    result: RunResult,
    arms: ArmSet,
    true_f,
    cfg: MelkConfig,
    theta_norm: float = 0.0,
    h: float = 0.0,
) -> GuaranteeReport:
    """Check both containments of the returned set, and the good-set variant.

    The returned set must contain every arm with f >= alpha + beta_bar and
    nothing with f < alpha - beta_tilde - beta_bar; the good set must contain
    every arm with f >= alpha + beta_tilde + beta_bar and nothing with
    f < alpha - beta_bar.
    """
    f = np.asarray(true_f, dtype=float)
    bb = beta_bar(arms, f, theta_norm, h, cfg.gamma, ("explicit", cfg.alpha), cfg.fw)
    returned = set(result.returned)
    good = set(result.good)
    must_return = {i for i in range(arms.n_arms) if f[i] >= cfg.alpha + bb}
    may_return = {i for i in range(arms.n_arms) if f[i] >= cfg.alpha - cfg.beta_tilde - bb}
    must_good = {
        i for i in range(arms.n_arms) if f[i] >= cfg.alpha + cfg.beta_tilde + bb
    }
    may_good = {i for i in range(arms.n_arms) if f[i] >= cfg.alpha - bb}
    return GuaranteeReport(
        beta_bar=bb,
        missing_from_returned=tuple(sorted(must_return - returned)),
        excess_in_returned=tuple(sorted(returned - may_return)),
        missing_from_good=tuple(sorted(must_good - good)),
        excess_in_good=tuple(sorted(good - may_good)),
    )
