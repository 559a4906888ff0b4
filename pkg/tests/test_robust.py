import math

import numpy as np
import pytest

import levelset as ls
from levelset import rng as rng_mod
from levelset.robust import catoni_mean_batch


def test_constant_samples_return_the_constant():
    params = ls.RobustMeanParams(0.05, 1.0)
    assert ls.catoni_mean([5.0] * 40, params) == pytest.approx(5.0, abs=1e-9)


def test_symmetric_samples_return_zero():
    params = ls.RobustMeanParams(0.05, 1.0)
    assert ls.catoni_mean([-1.0, 1.0] * 50, params) == pytest.approx(0.0, abs=1e-9)


def test_estimate_stays_in_sample_hull(rng):
    params = ls.RobustMeanParams(0.1, 2.0)
    for _ in range(20):
        z = rng.normal(size=60) * rng.uniform(0.1, 5)
        est = ls.catoni_mean(z, params)
        assert z.min() - 1e-12 <= est <= z.max() + 1e-12


def test_shift_equivariance(rng):
    params = ls.RobustMeanParams(0.05, 1.5)
    z = rng.normal(size=80)
    base = ls.catoni_mean(z, params)
    for shift in (-3.0, 0.7, 12.0):
        assert ls.catoni_mean(z + shift, params) == pytest.approx(
            base + shift, abs=1e-9
        )


def test_insufficient_samples_rejected():
    params = ls.RobustMeanParams(0.01, 1.0)  # needs > 2 ln(200) ~ 10.6 samples
    with pytest.raises(ls.InsufficientSamplesError):
        ls.catoni_mean([1.0] * 10, params)


def test_parameter_validation():
    with pytest.raises(ls.InvalidInputError):
        ls.RobustMeanParams(0.0, 1.0)
    with pytest.raises(ls.InvalidInputError):
        ls.RobustMeanParams(0.1, 0.0)
    with pytest.raises(ls.InvalidInputError):
        catoni_mean_batch(np.ones((1, 30)), 0.1, np.array([-1.0]))


def test_batch_agrees_with_scalar(rng):
    z = rng.normal(size=(4, 50)) + np.arange(4)[:, None]
    vb = np.array([1.0, 2.0, 0.5, 3.0])
    batch = catoni_mean_batch(z, 0.05, vb)
    for row in range(4):
        single = ls.catoni_mean(z[row], ls.RobustMeanParams(0.05, vb[row]))
        assert batch[row] == pytest.approx(single, abs=1e-9)


def test_deviation_bound_monte_carlo():
    # 1000 trials of 200 draws from N(0.3, 1); the sub-Gaussian deviation
    # bound 2 sqrt(vb * 2 ln(2/delta') / n) must hold in at least 95%.
    delta_prime = 0.05
    var_bound = 1.09  # second moment of N(0.3, 1)
    n = 200
    bound = 2 * math.sqrt(var_bound * 2 * math.log(2 / delta_prime) / n)
    gen = rng_mod.stream(11, "catoni-mc")
    hits = 0
    trials = 1000
    z = gen.normal(0.3, 1.0, size=(trials, n))
    roots = catoni_mean_batch(z, delta_prime, np.full(trials, var_bound))
    hits = int(np.sum(np.abs(roots - 0.3) <= bound))
    assert hits / trials >= 0.95


def _two_arm_environment(seed):
    spec = ls.InstanceSpec.explicit_linear([0.7, 0.2], np.eye(2), ("explicit", 0.5))
    return ls.generate(spec, seed, noise_std=0.0)


def test_noiseless_two_arm_estimates():
    # Seed chosen so the 64 draws split evenly; the per-arm inverse propensity
    # samples are then two-valued and the robust mean lands on the true f.
    arms = ls.ArmSet(np.eye(2), ls.KernelSpec.linear())
    env = _two_arm_environment(22)
    draws = rng_mod.stream(22, "test-draws")
    table = ls.rips(
        arms,
        [ls.FeatureCombo.arm(0), ls.FeatureCombo.arm(1)],
        [0.5, 0.5],
        1e-7,
        64,
        0.05,
        env,
        draws,
    )
    assert table.values[0] == pytest.approx(0.7, abs=1e-3)
    assert table.values[1] == pytest.approx(0.2, abs=1e-3)
    assert table.tau == 64


def test_zero_signal_bounded_by_deviation_term(rng):
    # theta = 0 environment: estimates must sit inside the noise deviation
    # term of the guarantee (no signal, no misspecification).
    n = 4
    pts = rng.normal(size=(n, 2))
    arms = ls.ArmSet(pts, ls.KernelSpec.squared_exponential(1.0))
    env = ls.Environment(arms, np.zeros(n), 0.5, seed=3, signal_bound=1.0)
    draws = rng_mod.stream(3, "test-draws")
    targets = [ls.FeatureCombo.arm(i) for i in range(n)]
    lam = np.full(n, 0.25)
    tau, delta, gamma = 4000, 0.1, 0.05
    table = ls.rips(arms, targets, lam, gamma, tau, delta, env, draws)
    bound = 4 * math.sqrt((1.0 + 0.25) * math.log(2 * n / delta) / tau)
    from conftest import gram_space_quadform

    for j, target in enumerate(targets):
        norm = math.sqrt(
            gram_space_quadform(arms, target.dense(n), target.dense(n), lam, gamma)
        )
        assert abs(table.values[j]) <= bound * norm


def test_sample_accounting_is_exact():
    arms = ls.ArmSet(np.eye(3), ls.KernelSpec.linear())
    env = ls.generate(
        ls.InstanceSpec.explicit_linear([1, 0, 0.5], np.eye(3)), 0, noise_std=0.3
    )
    draws = rng_mod.stream(0, "acct")
    before = env.samples_used
    ls.rips(arms, [ls.FeatureCombo.arm(i) for i in range(3)], np.full(3, 1 / 3),
            1e-6, 100, 0.1, env, draws)
    assert env.samples_used - before == 100


def test_rips_requires_enough_samples():
    arms = ls.ArmSet(np.eye(2), ls.KernelSpec.linear())
    env = _two_arm_environment(0)
    draws = rng_mod.stream(0, "few")
    with pytest.raises(ls.InsufficientSamplesError):
        ls.rips(arms, [ls.FeatureCombo.arm(0)], [0.5, 0.5], 1e-6, 3, 0.01, env, draws)


def test_rips_deterministic_given_streams():
    arms = ls.ArmSet(np.eye(2), ls.KernelSpec.linear())
    values = []
    for _ in range(2):
        env = _two_arm_environment(5)
        draws = rng_mod.stream(5, "det")
        table = ls.rips(arms, [ls.FeatureCombo.arm(0)], [0.5, 0.5], 1e-6, 64, 0.1,
                        env, draws)
        values.append(table.values[0])
    assert values[0] == values[1]


def test_deviation_bound_well_specified_monte_carlo(rng):
    # Reduced version of the guarantee check: RBF instance with the truth in
    # the span of the features (h = 0), moderate noise; the normalized error
    # must stay below the theoretical deviation in at least 1 - delta of runs.
    n = 6
    pts = np.linspace(0, 1, n).reshape(-1, 1)
    arms = ls.ArmSet(pts, ls.KernelSpec.squared_exponential(0.4))
    coeff = rng.normal(size=n) * 0.4
    f = arms.gram @ coeff
    f = f / np.max(np.abs(f)) * 0.8
    coeff = np.linalg.solve(arms.gram + 1e-10 * np.eye(n), f)
    theta_norm = math.sqrt(coeff @ arms.gram @ coeff)
    sigma, delta, gamma, tau = 0.5, 0.1, 0.01, 400
    targets = [ls.FeatureCombo.arm(i) for i in range(n)]
    from levelset.design import DesignProblem
    lam, _, _ = ls.frank_wolfe_design(
        DesignProblem(arms, tuple(targets), gamma), ls.FWConfig(max_iters=200)
    )
    from conftest import gram_space_quadform

    norms = np.array([
        math.sqrt(gram_space_quadform(arms, t.dense(n), t.dense(n), lam.weights, gamma))
        for t in targets
    ])
    bound = (
        2 * math.sqrt(gamma) * theta_norm
        + 4 * math.sqrt((1 + sigma**2) * math.log(2 * n / delta) / tau)
    )
    trials, hits = 120, 0
    for t in range(trials):
        env = ls.Environment(arms, f, sigma, seed=1000 + t, signal_bound=1.0)
        draws = rng_mod.stream(1000 + t, "mc-draws")
        table = ls.rips(arms, targets, lam, gamma, tau, delta, env, draws)
        err = max(abs(table.values[j] - f[j]) / norms[j] for j in range(n))
        hits += err <= bound
    assert hits / trials >= 1 - delta
