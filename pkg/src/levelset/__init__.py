"""Adaptive experimental design for level set estimation on finite arm sets.

The library covers: kernel machinery for regularized inverse quadratic forms,
minimax (G-optimal style) designs via Frank-Wolfe, robust inverse-propensity
estimation, phased elimination algorithms for explicit and implicit
thresholds, interval-based Gaussian-process baselines, a fixed-budget
thresholding bandit, synthetic environments, and a CSV experiment harness.
"""

from .design import Design, DesignProblem, FWConfig, beta_bar, design_objective, frank_wolfe_design, oracle_allocation
from .environments import Environment, InstanceSpec, generate, resolve_threshold, true_sets_and_gaps
from .errors import (
    BudgetExhaustedError,
    DegenerateInstanceError,
    InsufficientSamplesError,
    InvalidInputError,
    LevelSetError,
    NumericalError,
    RankDeficiencyError,
    SchemaError,
)
from .gp_baselines import (
    BaselineConfig,
    BaselineState,
    GPPosterior,
    LinearTheoryModel,
    acquire_next,
    classify_step,
    run_baseline,
)
from .harness import ExperimentConfig, f1_score, run_experiment, summarize
from .kernels import ArmSet, FeatureCombo, KernelSpec, dense_inv_quadform, kernel_eval, reg_inv_quadform
from .latte import BanditInstance, LatteResult, apt_index, h2_omega, run_latte
from .melk import MelkConfig, melk_classification_guarantee_check, run_melk
from .milk import MilkConfig, PairSet, membership_check, run_milk, y_eps
from .results import RoundHistory, RunResult
from .robust import EstimateTable, RobustMeanParams, catoni_mean, rips

__all__ = [
    "ArmSet",
    "BanditInstance",
    "BaselineConfig",
    "BaselineState",
    "BudgetExhaustedError",
    "DegenerateInstanceError",
    "Design",
    "DesignProblem",
    "Environment",
    "EstimateTable",
    "ExperimentConfig",
    "FWConfig",
    "FeatureCombo",
    "GPPosterior",
    "InstanceSpec",
    "InsufficientSamplesError",
    "InvalidInputError",
    "KernelSpec",
    "LatteResult",
    "LevelSetError",
    "LinearTheoryModel",
    "MelkConfig",
    "MilkConfig",
    "NumericalError",
    "PairSet",
    "RankDeficiencyError",
    "RobustMeanParams",
    "RoundHistory",
    "RunResult",
    "SchemaError",
    "acquire_next",
    "apt_index",
    "beta_bar",
    "catoni_mean",
    "classify_step",
    "dense_inv_quadform",
    "design_objective",
    "f1_score",
    "frank_wolfe_design",
    "generate",
    "h2_omega",
    "kernel_eval",
    "melk_classification_guarantee_check",
    "membership_check",
    "oracle_allocation",
    "reg_inv_quadform",
    "resolve_threshold",
    "rips",
    "run_baseline",
    "run_experiment",
    "run_latte",
    "run_melk",
    "run_milk",
    "summarize",
    "true_sets_and_gaps",
    "y_eps",
]
