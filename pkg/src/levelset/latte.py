"""Fixed-budget identification of all arms above an implicit threshold (LATTE).

The budget T is split into three equal phases: (1) round-based gap
elimination that keeps a shrinking active set and ends with a near-optimal
arm, (2) pure exploitation of that arm to pin down the threshold
(1 - eps) * mu_hat, and (3) anytime-parameter-free thresholding pulls
against the estimated threshold.  The returned set is every arm whose final
empirical mean clears the threshold.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInputError

_E = math.e


def apt_index(pulls: int, mean_hat: float, tau: float, gamma_apt: float) -> float:
    """sqrt(N) * (|mu_hat - tau| + gamma); defined as 0 at N = 0 to force a pull."""
    if pulls < 0:
        raise InvalidInputError("pull count cannot be negative")
    if pulls == 0:
        return 0.0
    return math.sqrt(pulls) * (abs(mean_hat - tau) + gamma_apt)


def h2_omega(means, epsilon: float, omega: float) -> float:
    """Clipped thresholding complexity: max_i i / max(gap_(i), omega)^2.

    Gaps are distances to the implicit threshold (1 - eps) * max mean,
    clipped below at omega and sorted increasingly; i is 1-based rank.
    """
    if not omega > 0:
        raise InvalidInputError("omega must be positive")
    mu = np.asarray(means, dtype=float)
    gaps = np.abs(mu - (1.0 - epsilon) * mu.max())
    clipped = np.sort(np.maximum(gaps, omega))
    ranks = np.arange(1, mu.size + 1)
    return float(np.max(ranks / clipped**2))


@dataclass(frozen=True)
class BanditInstance:
    """Unstructured means, noise level, budget, and the implicit tolerance."""

    means: tuple[float, ...]
    noise_std: float
    budget: int
    epsilon: float
    apt_tolerance: float = 0.0
    additive_threshold: bool = False

    def __post_init__(self):
        object.__setattr__(self, "means", tuple(float(m) for m in self.means))
        if not all(math.isfinite(m) for m in self.means):
            raise InvalidInputError("means must be finite")
        if not 0 < self.epsilon < 1:
            raise InvalidInputError("epsilon must be in (0, 1)")
        if self.apt_tolerance < 0:
            raise InvalidInputError("apt_tolerance must be nonnegative")
        if self.budget < 3 * len(self.means):
            raise InvalidInputError("budget must cover at least three pulls per arm")

    @property
    def n_arms(self) -> int:
        return len(self.means)

    def true_good_set(self) -> tuple[int, ...]:
        mu = np.asarray(self.means)
        level = (1.0 - self.epsilon) * mu.max()
        return tuple(int(i) for i in np.flatnonzero(mu >= level))


@dataclass
class LatteTrace:
    """Per-phase diagnostics of one run."""

    phase1_rounds: list[dict] = field(default_factory=list)
    chosen_arm: int = -1
    threshold: float = float("nan")
    pulls: list[int] = field(default_factory=list)
    means_hat: list[float] = field(default_factory=list)
    phase_samples: tuple[int, int, int] = (0, 0, 0)


@dataclass
class LatteResult:
    """Selected set plus the trace; serializes deterministically."""

    selected: list[int]
    trace: LatteTrace
    total_samples: int

    def to_json(self) -> str:
        doc = {
            "selected": list(self.selected),
            "chosen_arm": self.trace.chosen_arm,
            "threshold": self.trace.threshold,
            "pulls": list(self.trace.pulls),
            "means_hat": list(self.trace.means_hat),
            "phase1_rounds": self.trace.phase1_rounds,
            "phase_samples": list(self.trace.phase_samples),
            "total_samples": self.total_samples,
        }
        return json.dumps(doc, sort_keys=True)


class _Pulls:
    """Running per-arm pull counts and means against a sampling oracle."""

    def __init__(self, n_arms: int, oracle):
        self.counts = np.zeros(n_arms, dtype=int)
        self.sums = np.zeros(n_arms)
        self.oracle = oracle
        self.total = 0

    def pull(self, arm: int, times: int = 1):
        if times <= 0:
            return
        ys = self.oracle.observe_many(np.full(times, arm, dtype=int))
        self.counts[arm] += times
        self.sums[arm] += float(np.sum(ys))
        self.total += times

    def mean(self, arm: int) -> float:
        if self.counts[arm] == 0:
            return 0.0
        return float(self.sums[arm] / self.counts[arm])

    def means(self) -> np.ndarray:
        out = np.zeros_like(self.sums)
        seen = self.counts > 0
        out[seen] = self.sums[seen] / self.counts[seen]
        return out


def _phase1_schedule(budget_total: int, n_arms: int):
    """Round count, per-round cumulative pull targets, and widths.

    The doubling schedule pulls each active arm to N_m = ceil(psi 2^{m-1}
    ln(T 2^{-m} / 3)) cumulative draws in round m, with psi sized backward so
    that even with no eliminations phase 1 stays within its third of the
    budget; C_m = sqrt(psi ln(T 2^{-m} / 3) / (2 N_m)).
    """
    phase_budget = budget_total // 3
    n_rounds = max(1, math.ceil(0.5 * math.log2(budget_total / (3.0 * _E))))
    log_terms = [
        max(math.log(budget_total * 2.0**-m / 3.0), 1e-6) for m in range(1, n_rounds + 1)
    ]
    psi = phase_budget / (n_arms * 2.0 ** (n_rounds - 1) * log_terms[-1])
    targets = [
        int(math.ceil(psi * 2.0 ** (m - 1) * log_terms[m - 1]))
        for m in range(1, n_rounds + 1)
    ]
    # Cumulative targets must be nondecreasing even for tiny budgets.
    for m in range(1, n_rounds):
        targets[m] = max(targets[m], targets[m - 1])
    widths = [
        math.sqrt(psi * log_terms[m - 1] / (2.0 * max(targets[m - 1], 1)))
        for m in range(1, n_rounds + 1)
    ]
    return n_rounds, targets, widths, phase_budget


def run_latte(instance: BanditInstance, oracle, seed: int = 0) -> LatteResult:
    """Run the three phases and return every arm estimated above the threshold.

    Deterministic given the oracle's seed; ``seed`` is accepted for interface
    parity with the other runners.
    """
    del seed
    k = instance.n_arms
    t_total = instance.budget
    counter = _Pulls(k, oracle)
    trace = LatteTrace()

    # Phase 1: gap elimination on a doubling schedule.
    n_rounds, targets, widths, phase1_budget = _phase1_schedule(t_total, k)
    active = list(range(k))
    gap_guess = 1.0
    used_before = counter.total
    for m in range(1, n_rounds + 1):
        budget_left = phase1_budget - (counter.total - used_before)
        if budget_left <= 0:
            break
        if len(active) == 1:
            counter.pull(active[0], budget_left)
            break
        target = targets[m - 1]
        for arm in active:
            budget_left = phase1_budget - (counter.total - used_before)
            if budget_left <= 0:
                break
            need = target - int(counter.counts[arm])
            counter.pull(arm, min(need, budget_left))
        means = counter.means()
        bound = max(means[a] for a in active) - widths[m - 1]
        survivors = [a for a in active if means[a] + widths[m - 1] >= bound]
        trace.phase1_rounds.append(
            {
                "round": m,
                "gap_guess": gap_guess,
                "target_pulls": target,
                "width": widths[m - 1],
                "active_before": list(active),
                "eliminated": [a for a in active if a not in survivors],
            }
        )
        active = survivors
        gap_guess /= 2.0
    # Spend any schedule slack round-robin over the survivors so that phase 1
    # always consumes exactly its third.
    arm_cycle = 0
    while counter.total - used_before < phase1_budget:
        counter.pull(active[arm_cycle % len(active)], 1)
        arm_cycle += 1
    phase1_used = counter.total - used_before
    means = counter.means()
    chosen = int(active[int(np.argmax(means[active]))])
    trace.chosen_arm = chosen

    # Phase 2: exploit the chosen arm to estimate the threshold.
    phase2_budget = t_total // 3
    counter.pull(chosen, phase2_budget)
    mu_hat = counter.mean(chosen)
    if instance.additive_threshold:
        threshold = mu_hat - instance.epsilon
    else:
        threshold = (1.0 - instance.epsilon) * mu_hat
    trace.threshold = float(threshold)

    # Phase 3: APT pulls against the frozen threshold; the integer-division
    # remainder lands here.
    phase3_budget = t_total - phase1_budget - phase2_budget
    used_before = counter.total
    for arm in range(k):
        if counter.total - used_before >= phase3_budget:
            break
        if counter.counts[arm] == 0:
            counter.pull(arm, 1)
    while counter.total - used_before < phase3_budget:
        indices = [
            apt_index(int(counter.counts[a]), counter.mean(a), threshold,
                      instance.apt_tolerance)
            for a in range(k)
        ]
        counter.pull(int(np.argmin(indices)), 1)

    final_means = counter.means()
    selected = [int(i) for i in np.flatnonzero(final_means >= threshold)]
    trace.pulls = [int(c) for c in counter.counts]
    trace.means_hat = [float(v) for v in final_means]
    trace.phase_samples = (phase1_used, phase2_budget, counter.total - used_before)
    return LatteResult(selected=selected, trace=trace, total_samples=counter.total)
