import math

import numpy as np
import pytest

import levelset as ls


def bandit_env(means, seed=0, noise=0.0):
    return ls.generate(ls.InstanceSpec.bandit(list(means)), seed, noise_std=noise)


def test_apt_index_arithmetic():
    assert ls.apt_index(4, 0.8, 0.5, 0.1) == pytest.approx(0.8)
    assert ls.apt_index(7, 0.5, 0.5, 0.0) == 0.0
    assert ls.apt_index(16, 0.8, 0.5, 0.1) == pytest.approx(2 * ls.apt_index(4, 0.8, 0.5, 0.1))
    assert ls.apt_index(0, 1.0, 0.0, 0.0) == 0.0
    with pytest.raises(ls.InvalidInputError):
        ls.apt_index(-1, 0.0, 0.0, 0.0)


def test_h2_omega_hand_example():
    assert ls.h2_omega([1.0, 0.5], 0.4, 0.05) == pytest.approx(100.0)


def test_h2_omega_uniform_clipping():
    means = [1.0, 0.999, 0.998, 1.001]
    value = ls.h2_omega(means, 0.001, omega=0.5)
    assert value == pytest.approx(len(means) / 0.25)


def test_h2_omega_single_arm():
    mu, eps = 0.8, 0.3
    gap = eps * mu
    assert ls.h2_omega([mu], eps, 0.05) == pytest.approx(1.0 / max(gap, 0.05) ** 2)


def test_instance_validation():
    with pytest.raises(ls.InvalidInputError):
        ls.BanditInstance(means=(1.0, 0.5), noise_std=0.1, budget=5, epsilon=0.5)
    with pytest.raises(ls.InvalidInputError):
        ls.BanditInstance(means=(1.0,), noise_std=0.1, budget=100, epsilon=1.5)


def test_noiseless_recovery():
    inst = ls.BanditInstance(means=(1.0, 0.9, 0.1), noise_std=0.0, budget=300,
                             epsilon=0.5)
    result = ls.run_latte(inst, bandit_env((1.0, 0.9, 0.1)))
    assert result.selected == [0, 1]
    assert result.trace.chosen_arm == 0
    assert result.trace.threshold == pytest.approx(0.5)


def test_single_arm_is_always_selected():
    inst = ls.BanditInstance(means=(0.7,), noise_std=0.2, budget=60, epsilon=0.5)
    result = ls.run_latte(inst, bandit_env((0.7,), noise=0.2))
    assert result.selected == [0]


def test_budget_consumed_exactly():
    for budget in (300, 301, 302):
        inst = ls.BanditInstance(means=(1.0, 0.4, 0.2), noise_std=0.3,
                                 budget=budget, epsilon=0.5)
        result = ls.run_latte(inst, bandit_env((1.0, 0.4, 0.2), seed=2, noise=0.3))
        assert result.total_samples == budget
        phase1, phase2, phase3 = result.trace.phase_samples
        assert phase1 == budget // 3
        assert phase2 == budget // 3
        assert phase3 == budget - 2 * (budget // 3)


def test_phase1_never_drops_best_arm_noiseless():
    inst = ls.BanditInstance(means=(0.9, 0.7, 0.5, 0.1), noise_std=0.0,
                             budget=600, epsilon=0.4)
    result = ls.run_latte(inst, bandit_env((0.9, 0.7, 0.5, 0.1)))
    for rnd in result.trace.phase1_rounds:
        assert 0 not in rnd["eliminated"]
    assert result.trace.chosen_arm == 0


def test_phase3_concentrates_on_smallest_gap_noiseless():
    # Threshold 0.5; arm 2 (mean 0.55) is closest and must receive the most
    # phase-3 pulls under exact means.
    means = (1.0, 0.8, 0.55, 0.2)
    inst = ls.BanditInstance(means=means, noise_std=0.0, budget=1200, epsilon=0.5)
    result = ls.run_latte(inst, bandit_env(means))
    pulls = np.asarray(result.trace.pulls)
    phase12 = {result.trace.chosen_arm}
    # Compare phase-3 shares: subtract the doubling-phase pulls by rerunning
    # with a budget that ends right before phase 3 is impossible, so instead
    # use the pull counts of arms untouched by phases 1-2 elimination.
    apt_gaps = np.abs(np.asarray(means) - result.trace.threshold)
    closest = int(np.argmin(apt_gaps))
    others = [i for i in range(4) if i != closest and i != result.trace.chosen_arm]
    assert all(pulls[closest] >= pulls[i] for i in others)


def test_selected_set_is_threshold_cut_of_final_means():
    means = (1.0, 0.6, 0.4)
    inst = ls.BanditInstance(means=means, noise_std=0.2, budget=900, epsilon=0.5)
    result = ls.run_latte(inst, bandit_env(means, seed=5, noise=0.2))
    mu_hat = np.asarray(result.trace.means_hat)
    expected = [int(i) for i in np.flatnonzero(mu_hat >= result.trace.threshold)]
    assert result.selected == expected


def test_additive_threshold_variant():
    means = (1.0, 0.9, 0.1)
    inst = ls.BanditInstance(means=means, noise_std=0.0, budget=300, epsilon=0.3,
                             additive_threshold=True)
    result = ls.run_latte(inst, bandit_env(means))
    assert result.trace.threshold == pytest.approx(0.7)


def test_determinism_byte_identical():
    means = (1.0, 0.8, 0.55, 0.45, 0.2)
    runs = []
    for _ in range(2):
        inst = ls.BanditInstance(means=means, noise_std=0.25, budget=900, epsilon=0.5)
        runs.append(ls.run_latte(inst, bandit_env(means, seed=11, noise=0.25)).to_json())
    assert runs[0] == runs[1]


def test_moderate_noise_recovery_rate():
    # Smaller rehearsal of the acceptance setup.
    means = (1.0, 0.8, 0.55, 0.45, 0.2)
    inst_proto = dict(means=means, noise_std=0.25, budget=6000, epsilon=0.5)
    wins = 0
    for seed in range(20):
        inst = ls.BanditInstance(**inst_proto)
        result = ls.run_latte(inst, bandit_env(means, seed=seed, noise=0.25))
        wins += result.selected == [0, 1, 2]
    assert wins >= 16


def test_true_good_set_helper():
    inst = ls.BanditInstance(means=(1.0, 0.8, 0.55, 0.45, 0.2), noise_std=0.25,
                             budget=6000, epsilon=0.5)
    assert inst.true_good_set() == (0, 1, 2)
    omega = math.sqrt(3 * math.e / inst.budget)
    gaps = np.abs(np.asarray(inst.means) - 0.5)
    assert gaps.min() >= omega  # the regime the fixed-budget analysis needs
