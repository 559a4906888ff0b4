"""Experimental design objectives, Frank-Wolfe minimization, and diagnostics.

The design objective over a probability vector w on the arms is

    g(w; V; gamma) = max_{v in V} s_v * <v, (A(w) + gamma I)^{-1} v>

for targets V given as feature combos, with optional per-target scales s_v
(all 1 by default).  Targets may additionally be grouped, in which case a
group contributes the minimum of its members and the objective is the max
over groups; this covers the gap-weighted oracle allocation for the implicit
problem, whose below-threshold term carries an inner minimum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateInstanceError, InvalidInputError
from .kernels import ArmSet, FeatureCombo, combo_matrix, make_info_operator


@dataclass(frozen=True)
class Design:
    """A probability vector over arms: nonnegative, summing to one."""

    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float).copy()
        if w.ndim != 1:
            raise InvalidInputError("design weights must be a vector")
        if (w < 0).any():
            raise InvalidInputError("design weights must be nonnegative")
        total = w.sum()
        if abs(total - 1.0) > 1e-9:
            raise InvalidInputError(f"design weights sum to {total!r}, not 1")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    def __len__(self):
        return self.weights.shape[0]


def design_weights(lam) -> np.ndarray:
    """Coerce a Design or raw vector to a validated weight array."""
    if isinstance(lam, Design):
        return lam.weights
    return Design(np.asarray(lam, dtype=float)).weights


@dataclass(frozen=True)
class FWConfig:
    """Frank-Wolfe controls.

    step_rule is "harmonic" (1/(t+2)) or "fixed" (requires step_size in
    (0, 1]); init is "uniform" or "vertex" (then init_vertex picks the
    starting corner).  Iteration stops early once the linearized-improvement
    gap stays below stop_tol * value for stop_patience consecutive steps.
    """

    max_iters: int = 500
    step_rule: str = "harmonic"
    step_size: float | None = None
    init: str = "uniform"
    init_vertex: int = 0
    stop_tol: float = 1e-9
    stop_patience: int = 5

    def __post_init__(self):
        if self.max_iters < 1:
            raise InvalidInputError("max_iters must be >= 1")
        if self.step_rule not in ("harmonic", "fixed"):
            raise InvalidInputError(f"unknown step rule {self.step_rule!r}")
        if self.step_rule == "fixed":
            if self.step_size is None or not 0 < self.step_size <= 1:
                raise InvalidInputError("fixed step rule needs step_size in (0, 1]")
        if self.init not in ("uniform", "vertex"):
            raise InvalidInputError(f"unknown init {self.init!r}")


@dataclass(frozen=True)
class DesignProblem:
    """Targets and regularization for one design solve."""

    arms: ArmSet
    targets: tuple[FeatureCombo, ...]
    gamma: float
    target_weights: tuple[float, ...] | None = None
    target_groups: tuple[tuple[int, ...], ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "targets", tuple(self.targets))
        if not self.targets:
            raise InvalidInputError("design problem needs at least one target")
        if self.gamma < 0:
            raise InvalidInputError("gamma must be nonnegative")
        if self.gamma == 0 and self.arms.kernel.kind != "linear":
            raise InvalidInputError("gamma = 0 is only allowed with the linear kernel")
        if self.target_weights is not None:
            tw = tuple(float(t) for t in self.target_weights)
            if len(tw) != len(self.targets):
                raise InvalidInputError("target_weights length mismatch")
            if any(t <= 0 for t in tw):
                raise InvalidInputError("target weights must be positive")
            object.__setattr__(self, "target_weights", tw)
        if self.target_groups is not None:
            groups = tuple(tuple(int(i) for i in g) for g in self.target_groups)
            seen = [i for g in groups for i in g]
            if sorted(seen) != list(range(len(self.targets))):
                raise InvalidInputError("target_groups must partition the target indices")
            object.__setattr__(self, "target_groups", groups)

    def coefficient_matrix(self) -> np.ndarray:
        return combo_matrix(self.targets, self.arms.n_arms)


def _scaled_values(problem: DesignProblem, quads: np.ndarray) -> np.ndarray:
    if problem.target_weights is None:
        return quads
    return quads * np.asarray(problem.target_weights)


def _objective_from_quads(problem: DesignProblem, quads: np.ndarray) -> tuple[float, int]:
    """Objective value and the index of the active target (lowest-index ties)."""
    scaled = _scaled_values(problem, quads)
    if problem.target_groups is None:
        j = int(np.argmax(scaled))
        return float(scaled[j]), j
    best_val = -math.inf
    best_j = -1
    for group in problem.target_groups:
        idx = np.asarray(group)
        local = int(np.argmin(scaled[idx]))
        val = float(scaled[idx[local]])
        if val > best_val:
            best_val = val
            best_j = int(idx[local])
    return best_val, best_j


def design_objective(problem: DesignProblem, lam) -> tuple[float, int]:
    """Evaluate g(lam) and report which target attains the max."""
    w = design_weights(lam)
    op = make_info_operator(problem.arms, w, problem.gamma)
    quads = op.diag_quadforms(problem.coefficient_matrix())
    return _objective_from_quads(problem, quads)


def frank_wolfe_design(problem: DesignProblem, config: FWConfig | None = None):
    """Minimize the design objective over the simplex with Frank-Wolfe.

    Returns (design, value, iterations).  The reported design is the best
    iterate encountered, so the value never exceeds the initial objective.
    """
    cfg = config or FWConfig()
    n = problem.arms.n_arms
    coeffs = problem.coefficient_matrix()
    scales = (
        np.ones(len(problem.targets))
        if problem.target_weights is None
        else np.asarray(problem.target_weights)
    )

    if cfg.init == "uniform":
        lam = np.full(n, 1.0 / n)
    else:
        if not 0 <= cfg.init_vertex < n:
            raise InvalidInputError("init_vertex out of range")
        lam = np.zeros(n)
        lam[cfg.init_vertex] = 1.0

    best_lam = lam.copy()
    best_value = math.inf
    calm_steps = 0
    iters = 0

    for t in range(cfg.max_iters):
        iters = t + 1
        op = make_info_operator(problem.arms, lam, problem.gamma)
        quads = op.diag_quadforms(coeffs)
        value, j_star = _objective_from_quads(problem, quads)
        if value < best_value:
            best_value = value
            best_lam = lam.copy()

        # Subgradient of the active target's scaled quadform:
        # d/dw_i = -s * <v, A^{-1} phi(x_i)>^2.
        cross = op.cross_with_arms(coeffs[:, [j_star]])[0]
        grad = -scales[j_star] * cross**2
        vertex = int(np.argmin(grad))
        gap = float(lam @ grad - grad[vertex])

        if gap <= cfg.stop_tol * max(abs(value), 1e-300):
            calm_steps += 1
            if calm_steps >= cfg.stop_patience:
                break
        else:
            calm_steps = 0

        eta = cfg.step_size if cfg.step_rule == "fixed" else 1.0 / (t + 2.0)
        lam *= 1.0 - eta
        lam[vertex] += eta

    # Final iterate may beat the last recorded best.
    final_value, _ = design_objective(problem, lam / lam.sum())
    if final_value < best_value:
        best_value = final_value
        best_lam = lam / lam.sum()

    best_lam = np.maximum(best_lam, 0.0)
    best_lam /= best_lam.sum()
    return Design(best_lam), float(best_value), iters


def _true_values(arms: ArmSet, theta_star=None, true_f=None) -> np.ndarray:
    if true_f is not None:
        f = np.asarray(true_f, dtype=float)
        if f.shape != (arms.n_arms,):
            raise InvalidInputError("true_f length does not match arm set")
        return f
    if theta_star is None:
        raise InvalidInputError("need either theta_star or true_f")
    if isinstance(theta_star, FeatureCombo):
        return arms.gram @ theta_star.dense(arms.n_arms)
    theta = np.asarray(theta_star, dtype=float)
    if arms.kernel.kind != "linear":
        raise InvalidInputError("a raw theta vector is only meaningful for the linear kernel")
    if theta.shape != (arms.dim,):
        raise InvalidInputError("theta dimension does not match arms")
    return arms.points @ theta


def _implicit_pair_structure(f: np.ndarray, epsilon: float):
    n = f.shape[0]
    member = f >= (1.0 - epsilon) * f.max()
    pairs = [(i, j) for i in range(n) for j in range(n) if i != j]
    gaps = np.array([f[i] - (1.0 - epsilon) * f[j] for i, j in pairs])
    return member, pairs, gaps


def oracle_allocation(
    arms: ArmSet,
    theta_star=None,
    objective: tuple[str, float] = ("explicit", 0.0),
    gamma: float = 0.0,
    config: FWConfig | None = None,
    true_f=None,
) -> Design:
    """Gap-weighted optimal allocation computed from the true function values.

    Diagnostic use only: requires ground truth (theta_star or true_f).  For
    ("explicit", alpha) it minimizes max_x |phi(x)|^2_{inv} / (f(x)-alpha)^2;
    for ("implicit", eps) it minimizes the larger of the two pairwise terms,
    where below-threshold arms take the minimum over comparison arms.
    """
    f = _true_values(arms, theta_star, true_f)
    kind, param = objective
    if kind == "explicit":
        gaps = f - float(param)
        if np.any(gaps == 0):
            raise DegenerateInstanceError("an arm sits exactly on the threshold")
        targets = tuple(FeatureCombo.arm(i) for i in range(arms.n_arms))
        weights = tuple(1.0 / g**2 for g in gaps)
        groups = None
    elif kind == "implicit":
        eps = float(param)
        if not 0 < eps < 1:
            raise InvalidInputError("epsilon must be in (0, 1)")
        member, pairs, gaps = _implicit_pair_structure(f, eps)
        if np.any(gaps == 0):
            raise DegenerateInstanceError("a pair difference is exactly zero")
        targets = tuple(FeatureCombo.difference(i, j, 1.0 - eps) for i, j in pairs)
        weights = tuple(1.0 / g**2 for g in gaps)
        by_first: dict[int, list[int]] = {}
        for idx, (i, _) in enumerate(pairs):
            by_first.setdefault(i, []).append(idx)
        groups = []
        for i in range(arms.n_arms):
            if i not in by_first:
                continue
            if member[i]:
                groups.extend((idx,) for idx in by_first[i])
            else:
                groups.append(tuple(by_first[i]))
        groups = tuple(groups)
    else:
        raise InvalidInputError(f"unknown objective kind {kind!r}")

    problem = DesignProblem(arms, targets, gamma, weights, groups)
    lam, _, _ = frank_wolfe_design(problem, config)
    return lam


def _threshold_gap_targets(arms: ArmSet, f: np.ndarray, objective):
    kind, param = objective
    if kind == "explicit":
        targets = [FeatureCombo.arm(i) for i in range(arms.n_arms)]
        gaps = np.abs(f - float(param))
    elif kind == "implicit":
        eps = float(param)
        _, pairs, signed = _implicit_pair_structure(f, eps)
        targets = [FeatureCombo.difference(i, j, 1.0 - eps) for i, j in pairs]
        gaps = np.abs(signed)
    else:
        raise InvalidInputError(f"unknown objective kind {kind!r}")
    return targets, gaps


def beta_bar(
    arms: ArmSet,
    true_f,
    theta_norm: float,
    h: float,
    gamma: float,
    objective: tuple[str, float],
    config: FWConfig | None = None,
) -> float:
    """Smallest tolerance beta at which misspecification stops hurting.

    Computes min{ beta > 0 : 4(sqrt(gamma)*theta_norm + h) *
    (2 + sqrt(min_w max_{|gap|<=beta} quadform)) <= beta }.  The left side is
    piecewise constant between consecutive distinct gap values, so the scan
    walks those breakpoints exactly rather than bisecting; math.inf is
    returned when nothing at the instance's scale satisfies the inequality.
    """
    if theta_norm < 0 or h < 0:
        raise InvalidInputError("theta_norm and h must be nonnegative")
    f = np.asarray(true_f, dtype=float)
    rough = math.sqrt(max(gamma, 0.0)) * theta_norm + h
    if rough == 0.0:
        return 0.0

    targets, gaps = _threshold_gap_targets(arms, f, objective)
    edges = [0.0] + [float(g) for g in np.unique(gaps) if g > 0] + [math.inf]
    upper = max(16.0 * rough, 4.0 * (np.max(np.abs(f)) + float(gaps.max(initial=0.0))))

    for lo, hi in zip(edges[:-1], edges[1:]):
        active = [t for t, g in zip(targets, gaps) if g <= lo + 1e-15]
        if not active:
            design_value = 0.0
        else:
            problem = DesignProblem(arms, tuple(active), gamma)
            _, design_value, _ = frank_wolfe_design(problem, config)
        lhs = 4.0 * rough * (2.0 + math.sqrt(max(design_value, 0.0)))
        candidate = max(lo, lhs)
        if candidate < hi:
            return candidate if candidate <= upper else math.inf
    return math.inf
