"""Acceptance suite: one test per primary criterion, each printing a
PASS/FAIL line with its runtime.  Run with `pytest tests/test_acceptance.py -v -s`
to see the lines as they complete."""

import itertools
import math
import time

import numpy as np
import pytest

import levelset as ls
from levelset import rng as rng_mod
from levelset.design import DesignProblem, design_objective
from levelset.gp_baselines import GPPosterior, lse_imp_linear_trajectory
from conftest import gram_space_quadform, random_combo, simplex_grid


def report(name, ok, started, detail=""):
    status = "PASS" if ok else "FAIL"
    print(f"\nACCEPTANCE {name}: {status} ({time.time() - started:.1f}s) {detail}")
    assert ok, f"{name} failed: {detail}"


def test_criterion_kernel_trick_equivalence():
    started = time.time()
    rng = np.random.default_rng(101)
    worst = 0.0
    for trial in range(100):
        n = int(rng.integers(2, 21))
        d = int(rng.integers(1, 6))
        pts = rng.normal(size=(n, d))
        kernel = (
            ls.KernelSpec.linear()
            if trial % 2 == 0
            else ls.KernelSpec.squared_exponential(float(rng.uniform(0.3, 2.0)))
        )
        arms = ls.ArmSet(pts, kernel)
        weights = rng.dirichlet(np.ones(n))
        gamma = float(rng.choice([1e-3, 0.1, 1.0]))
        u = random_combo(rng, n)
        v = random_combo(rng, n)
        got = ls.reg_inv_quadform(arms, u, v, weights, gamma)
        want = gram_space_quadform(arms, u.dense(n), v.dense(n), weights, gamma)
        worst = max(worst, abs(got - want) / (1.0 + abs(want)))
    report("kernel-trick equivalence", worst <= 1e-8, started, f"worst rel {worst:.2e}")


def test_criterion_frank_wolfe_design_optimality():
    started = time.time()
    rng = np.random.default_rng(202)
    worst = 0.0
    for trial in range(20):
        n = int(rng.integers(2, 4))
        d = int(rng.integers(2, 4))
        pts = rng.normal(size=(n, d))
        kernel = (
            ls.KernelSpec.linear()
            if trial % 2 == 0
            else ls.KernelSpec.squared_exponential(1.0)
        )
        arms = ls.ArmSet(pts, kernel)
        problem = DesignProblem(
            arms, tuple(ls.FeatureCombo.arm(i) for i in range(n)), 0.05
        )
        _, value, _ = ls.frank_wolfe_design(problem, ls.FWConfig(max_iters=500))
        best = min(design_objective(problem, w)[0] for w in simplex_grid(n, 0.02))
        worst = max(worst, value / best)
    report("frank-wolfe design optimality", worst <= 1.05, started,
           f"worst ratio {worst:.4f}")


def test_criterion_robust_estimator_deviation_bound():
    started = time.time()
    n, sigma, delta, gamma, tau = 10, 0.5, 0.1, 0.01, 400
    pts = np.linspace(0.0, 1.0, n).reshape(-1, 1)
    arms = ls.ArmSet(pts, ls.KernelSpec.squared_exponential(0.4))
    rng = np.random.default_rng(303)
    coeff = rng.normal(size=n) * 0.4
    f = arms.gram @ coeff
    f = f / np.max(np.abs(f)) * 0.8  # keep |f| <= B = 1, representable (h = 0)
    coeff = np.linalg.solve(arms.gram + 1e-12 * np.eye(n), f)
    theta_norm = math.sqrt(coeff @ arms.gram @ coeff)

    targets = [ls.FeatureCombo.arm(i) for i in range(n)]
    lam, _, _ = ls.frank_wolfe_design(
        DesignProblem(arms, tuple(targets), gamma), ls.FWConfig(max_iters=300)
    )
    norms = np.array([
        math.sqrt(gram_space_quadform(arms, t.dense(n), t.dense(n), lam.weights, gamma))
        for t in targets
    ])
    bound = (
        2.0 * math.sqrt(gamma) * theta_norm
        + 4.0 * math.sqrt((1.0 + sigma**2) * math.log(2 * n / delta) / tau)
    )
    trials, hits = 500, 0
    for t in range(trials):
        env = ls.Environment(arms, f, sigma, seed=5000 + t, signal_bound=1.0)
        draws = rng_mod.stream(5000 + t, "acceptance-rips")
        table = ls.rips(arms, targets, lam, gamma, tau, delta, env, draws)
        err = max(abs(table.values[j] - f[j]) / norms[j] for j in range(n))
        hits += err <= bound
    report("robust estimator deviation bound", hits / trials >= 1 - delta, started,
           f"{hits}/{trials} within bound")


def test_criterion_explicit_pac_on_hard_linear_instance():
    started = time.time()
    spec = ls.InstanceSpec.soare(n=30, d=10, threshold=("explicit", 0.5))
    wins = 0
    for seed in range(25):
        env = ls.generate(spec, seed, noise_std=1.0)
        truth = ls.true_sets_and_gaps(env)
        cfg = ls.MelkConfig(alpha=0.5, delta=0.1, gamma=1e-7, noise_std=1.0,
                            signal_bound=1.0)
        result = ls.run_melk(env.arms, env, cfg, seed)
        wins += tuple(result.returned) == truth.members
    report("explicit threshold PAC recovery", wins >= 23, started, f"{wins}/25 exact")


def test_criterion_explicit_noiseless_exactness():
    started = time.time()
    rng = np.random.default_rng(404)
    checked = 0
    trial = 0
    while checked < 10 and trial < 60:
        trial += 1
        n, d = 6, 3
        pts = rng.normal(size=(n, d))
        pts /= np.linalg.norm(pts, axis=1, keepdims=True)
        theta = rng.normal(size=d)
        ordered = np.sort(pts @ theta)
        spacing = np.diff(ordered)
        cut = int(np.argmax(spacing))
        if spacing[cut] < 0.25:
            continue
        alpha = float(0.5 * (ordered[cut] + ordered[cut + 1]))
        spec = ls.InstanceSpec.explicit_linear(theta, pts, ("explicit", alpha))
        env = ls.generate(spec, trial, noise_std=0.0)
        truth = ls.true_sets_and_gaps(env)
        cfg = ls.MelkConfig(alpha=alpha, delta=0.1, gamma=0.0, noise_std=0.0,
                            signal_bound=env.signal_bound, beta_tilde=0.0)
        result = ls.run_melk(env.arms, env, cfg, seed=trial)
        if set(result.returned) != set(truth.members):
            report("explicit noiseless exactness", False, started,
                   f"instance {trial} misclassified")
        checked += 1
    report("explicit noiseless exactness", checked == 10, started,
           f"{checked}/10 instances exact")


def test_criterion_allocation_converges_to_oracle():
    started = time.time()
    alpha = 0.09  # the grid surface has ~40 arms at a common gap scale here
    spec = ls.InstanceSpec.cosine_sine_2d(grid=(10, 10), lengthscale=0.2,
                                          threshold=("explicit", alpha))
    env = ls.generate(spec, 0, noise_std=0.2, signal_bound=1.0)
    cfg = ls.MelkConfig(alpha=alpha, delta=0.1, gamma=1e-6, noise_std=0.2,
                        signal_bound=1.0, beta_tilde=0.0)
    result = ls.run_melk(env.arms, env, cfg, 0)
    weighted = np.zeros(env.arms.n_arms)
    mass = 0.0
    for r in result.rounds:
        weighted += 4.0**r.t * np.asarray(r.design)
        mass += 4.0**r.t
    weighted /= mass
    oracle = ls.oracle_allocation(
        env.arms, true_f=env.true_f, objective=("explicit", alpha),
        gamma=1e-6, config=ls.FWConfig(max_iters=2000),
    )
    tv = 0.5 * np.abs(weighted - oracle.weights).sum()
    report("allocation converges to oracle", tv <= 0.15, started,
           f"TV {tv:.3f} over {len(result.rounds)} rounds")


def first_sustained(samples, values):
    best = None
    for s, v in zip(reversed(samples), reversed(values)):
        if v == 1.0:
            best = s
        else:
            break
    return best if best is not None else math.inf


def test_criterion_implicit_beats_interval_baseline():
    started = time.time()
    spec = ls.InstanceSpec.soare(n=30, d=10, threshold=("implicit", 0.5))
    sigma = 0.5
    milk_times = []
    for seed in range(25):
        env = ls.generate(spec, seed, noise_std=sigma)
        truth = set(ls.true_sets_and_gaps(env).members)
        cfg = ls.MilkConfig(epsilon=0.5, delta=0.1, gamma=1e-7, noise_std=sigma,
                            signal_bound=1.0)
        result = ls.run_milk(env.arms, env, cfg, seed)
        goods: set = set()
        samples, values = [], []
        for r in result.rounds:
            goods |= set(r.newly_good)
            samples.append(r.cumulative_samples)
            values.append(ls.f1_score(goods, truth))
        milk_times.append(first_sustained(samples, values))
    milk_median = float(np.median(milk_times))
    assert math.isfinite(milk_median)

    # The interval baseline with its theoretical widths, censored at the
    # pairwise algorithm's median (censoring only understates its time).
    cap = int(milk_median) + 1
    lse_times = []
    for seed in range(25):
        env = ls.generate(spec, seed, noise_std=sigma)
        truth = set(ls.true_sets_and_gaps(env).members)
        out = lse_imp_linear_trajectory(env, 0.5, cap, gamma=1e-7, delta=0.1,
                                        truth_above=truth)
        steps = list(range(1, out["used"] + 1))
        t_hit = first_sustained(steps, list(out["f1_classified"]))
        lse_times.append(min(t_hit, cap + 1))
    lse_median = float(np.median(lse_times))
    ok = milk_median < lse_median
    report("implicit design beats interval baseline", ok, started,
           f"median-to-F1: pairwise {milk_median:.0f} vs interval >= {lse_median:.0f}")


def test_criterion_membership_equivalence_exhaustive():
    started = time.time()
    levels = [-1.0, -0.4, 0.05, 0.3, 0.62, 1.0]
    rng = np.random.default_rng(505)
    checked = 0
    for n in range(1, 6):
        if n <= 3:
            value_sets = itertools.product(levels, repeat=n)
        else:
            value_sets = (rng.uniform(-1, 1, size=n) for _ in range(200))
        for f in value_sets:
            f = np.asarray(f, dtype=float)
            for eps in (0.1, 0.5):
                for arm in range(n):
                    direct = ls.membership_check(f, eps, arm)
                    pairwise = all(f[arm] - (1 - eps) * f[j] >= 0 for j in range(n))
                    if direct != pairwise:
                        report("pairwise membership equivalence", False, started,
                               f"mismatch f={f} eps={eps} arm={arm}")
                    checked += 1
    report("pairwise membership equivalence", True, started, f"{checked} checks")


def test_criterion_fixed_budget_recovery():
    started = time.time()
    means = (1.0, 0.8, 0.55, 0.45, 0.2)
    instance = ls.BanditInstance(means=means, noise_std=0.25, budget=6000, epsilon=0.5)
    assert min(abs(m - 0.5) for m in means) >= math.sqrt(3 * math.e / 6000)
    wins = 0
    for seed in range(200):
        env = ls.generate(ls.InstanceSpec.bandit(list(means)), seed, noise_std=0.25)
        result = ls.run_latte(instance, env, seed)
        wins += result.selected == [0, 1, 2]
    report("fixed-budget recovery", wins >= 160, started, f"{wins}/200 exact")


def test_criterion_gp_posterior_oracle_equivalence():
    started = time.time()
    rng = np.random.default_rng(606)
    worst_post = 0.0
    worst_look = 0.0
    for _ in range(50):
        n = int(rng.integers(3, 12))
        pts = np.sort(rng.uniform(0, 1, size=n)).reshape(-1, 1)
        arms = ls.ArmSet(pts, ls.KernelSpec.squared_exponential(float(rng.uniform(0.1, 0.5))))
        noise_var = float(rng.uniform(0.05, 1.0))
        gp = GPPosterior(arms, noise_var)
        n_obs = int(rng.integers(1, 6))
        obs = [(int(rng.integers(n)), float(rng.normal())) for _ in range(n_obs)]
        for arm, y in obs:
            gp = gp.update(arm, y)
        idx = [o[0] for o in obs]
        y = np.array([o[1] for o in obs])
        gram = arms.gram
        sys_mat = gram[np.ix_(idx, idx)] + noise_var * np.eye(len(idx))
        k_obs = gram[idx, :]
        mu = k_obs.T @ np.linalg.solve(sys_mat, y)
        var = np.diag(gram - k_obs.T @ np.linalg.solve(sys_mat, k_obs))
        worst_post = max(worst_post, float(np.max(np.abs(gp.mu - mu))))
        worst_post = max(worst_post, float(np.max(np.abs(gp.var - var))))
        target = int(rng.integers(n))
        sampled = int(rng.integers(n))
        realized = gp.update(sampled, float(rng.normal())).var[target]
        worst_look = max(worst_look, abs(gp.lookahead_variance(target, sampled) - realized))
    ok = worst_post <= 1e-8 and worst_look <= 1e-8
    report("gp posterior oracle equivalence", ok, started,
           f"posterior {worst_post:.2e}, lookahead {worst_look:.2e}")


def test_criterion_run_determinism():
    started = time.time()
    mismatches = []

    def twice(label, runner):
        a, b = runner(), runner()
        if a != b:
            mismatches.append(label)

    melk_spec = ls.InstanceSpec.explicit_linear(
        [1.0, 0.0], [[1, 0], [0, 1], [0.8, 0.6]], ("explicit", 0.5))

    def run_melk_once():
        env = ls.generate(melk_spec, 2, noise_std=0.5)
        cfg = ls.MelkConfig(alpha=0.5, delta=0.1, gamma=1e-7, noise_std=0.5,
                            signal_bound=1.0)
        return ls.run_melk(env.arms, env, cfg, 2).to_json()

    twice("melk", run_melk_once)

    milk_spec = ls.InstanceSpec.explicit_linear(
        [1.0, 0.0], [[1, 0], [0.9, 0.1], [0.2, 0.3]], ("implicit", 0.2))

    def run_milk_once():
        env = ls.generate(milk_spec, 3, noise_std=0.5)
        cfg = ls.MilkConfig(epsilon=0.2, delta=0.1, gamma=1e-7, noise_std=0.5,
                            signal_bound=1.0)
        return ls.run_milk(env.arms, env, cfg, 3).to_json()

    twice("milk", run_milk_once)

    def run_latte_once():
        inst = ls.BanditInstance(means=(1.0, 0.8, 0.55, 0.45, 0.2), noise_std=0.25,
                                 budget=900, epsilon=0.5)
        env = ls.generate(ls.InstanceSpec.bandit([1.0, 0.8, 0.55, 0.45, 0.2]), 4,
                          noise_std=0.25)
        return ls.run_latte(inst, env, 4).to_json()

    twice("latte", run_latte_once)

    gp_spec = ls.InstanceSpec.gp_draw(lengthscale=0.2, grid=15,
                                      threshold=("quantile", 0.7))
    for policy in ("straddle", "lse", "truvar", "lse_imp"):
        def run_baseline_once(policy=policy):
            env = ls.generate(gp_spec, 6, noise_std=0.4)
            truth = ls.true_sets_and_gaps(env)
            threshold = (("implicit", 0.3) if policy == "lse_imp"
                         else ("explicit", truth.threshold_value))
            cfg = ls.BaselineConfig(threshold=threshold, budget=40, noise_std=0.4)
            target = set(ls.true_sets_and_gaps(env, threshold).members)
            return ls.run_baseline(env.arms, env, policy, cfg,
                                   truth_above=target).to_json()

        twice(f"baseline-{policy}", run_baseline_once)

    report("run determinism", not mismatches, started,
           f"mismatches: {mismatches or 'none'}")
