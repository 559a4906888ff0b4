"""Experiment orchestration: algorithm x instance x seed grids to CSV.

A single JSON document describes one experiment: the instance recipe, the
algorithm and its parameters, the seeds, and the sample checkpoints at which
to score the declared set.  Output rows follow a fixed, versioned schema and
are byte-identical across re-runs apart from the wall-time column.
"""

from __future__ import annotations

import csv
import io
import json
import math
import multiprocessing
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .design import FWConfig, oracle_allocation
from .environments import Environment, InstanceSpec, generate, resolve_threshold, true_sets_and_gaps
from .errors import InvalidInputError, SchemaError
from .gp_baselines import POLICIES, BaselineConfig, run_baseline
from .latte import BanditInstance, run_latte
from .melk import MelkConfig, run_melk
from .milk import MilkConfig, run_milk

SCHEMA_VERSION = 1
METRIC_COLUMNS = [
    "schema_version",
    "algorithm",
    "instance",
    "seed",
    "checkpoint_samples",
    "f1",
    "n_good",
    "n_bad",
    "n_active",
    "round",
    "wall_time_ms",
]
SUMMARY_COLUMNS = [
    "schema_version",
    "algorithm",
    "instance",
    "checkpoint_samples",
    "f1_mean",
    "f1_stderr",
    "n_seeds",
]
ALGORITHMS = ("melk", "milk", "latte", "baseline")


def f1_score(predicted, truth) -> float:
    """Harmonic mean of precision and recall of the declared set.

    Both sets empty counts as a perfect (vacuous) answer; exactly one empty
    scores zero.
    """
    pred = set(predicted)
    true = set(truth)
    if not pred and not true:
        return 1.0
    if not pred or not true:
        return 0.0
    hits = len(pred & true)
    if hits == 0:
        return 0.0
    precision = hits / len(pred)
    recall = hits / len(true)
    return 2.0 * precision * recall / (precision + recall)


def _fmt(value) -> str:
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


@dataclass(frozen=True)
class ExperimentConfig:
    """One experiment: instance, algorithm, seeds, checkpoints, output."""

    instance: InstanceSpec
    algorithm: str
    algorithm_params: dict = field(default_factory=dict)
    seeds: tuple[int, ...] = (0,)
    checkpoints: tuple[int, ...] = ()
    noise_std: float = 1.0
    budget: int | None = None
    signal_bound: float | None = None
    jobs: int = 1
    export_allocations: bool = False
    label: str = ""

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise SchemaError(f"algorithm.name: unknown algorithm {self.algorithm!r}")
        if not self.seeds:
            raise SchemaError("seeds: need at least one seed")
        cps = tuple(int(c) for c in self.checkpoints)
        if any(b <= a for a, b in zip(cps, cps[1:])):
            raise SchemaError("checkpoints: must be strictly increasing")
        object.__setattr__(self, "checkpoints", cps)
        object.__setattr__(self, "seeds", tuple(int(s) for s in self.seeds))

    @property
    def instance_label(self) -> str:
        return self.label or self.instance.kind

    @classmethod
    def from_dict(cls, doc: dict) -> "ExperimentConfig":
        try:
            inst = InstanceSpec.from_dict(doc["instance"])
        except KeyError as exc:
            raise SchemaError(f"instance: missing field {exc}") from exc
        except (InvalidInputError, TypeError, ValueError) as exc:
            raise SchemaError(f"instance: {exc}") from exc
        algo = doc.get("algorithm")
        if not isinstance(algo, dict) or "name" not in algo:
            raise SchemaError("algorithm: need an object with a 'name' field")
        known = {
            "instance", "algorithm", "seeds", "checkpoints", "noise_std",
            "budget", "signal_bound", "jobs", "export_allocations", "label",
        }
        for key in doc:
            if key not in known:
                raise SchemaError(f"{key}: unknown top-level field")
        return cls(
            instance=inst,
            algorithm=str(algo["name"]),
            algorithm_params=dict(algo.get("params", {})),
            seeds=tuple(doc.get("seeds", [0])),
            checkpoints=tuple(doc.get("checkpoints", [])),
            noise_std=float(doc.get("noise_std", 1.0)),
            budget=doc.get("budget"),
            signal_bound=doc.get("signal_bound"),
            jobs=int(doc.get("jobs", 1)),
            export_allocations=bool(doc.get("export_allocations", False)),
            label=str(doc.get("label", "")),
        )

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"config: not valid JSON ({exc})") from exc
        if not isinstance(doc, dict):
            raise SchemaError("config: top level must be an object")
        return cls.from_dict(doc)


def _fw_config(params: dict) -> FWConfig:
    fw = params.get("fw", {})
    return _build(FWConfig, **fw) if isinstance(fw, dict) else fw


def _build(ctor, **kwargs):
    try:
        return ctor(**kwargs)
    except TypeError as exc:
        raise SchemaError(f"algorithm.params: {exc}") from exc


def _threshold_for_algorithm(cfg: ExperimentConfig, env: Environment):
    return resolve_threshold(env.true_f, cfg.instance.threshold)


def _run_single(cfg: ExperimentConfig, seed: int):
    """One seeded run; returns (metric rows, allocation rows or None)."""
    env = generate(
        cfg.instance, seed, noise_std=cfg.noise_std,
        budget=cfg.budget, signal_bound=cfg.signal_bound,
    )
    truth = true_sets_and_gaps(env)
    truth_set = set(truth.members)
    params = dict(cfg.algorithm_params)
    fw = _fw_config(params)
    params.pop("fw", None)
    mode, level = _threshold_for_algorithm(cfg, env)
    started = time.perf_counter()
    alloc_rows = None

    if cfg.algorithm == "melk":
        if mode != "explicit":
            raise SchemaError("algorithm: melk needs an explicit or quantile threshold")
        mcfg = _build(
            MelkConfig, alpha=level, noise_std=cfg.noise_std, fw=fw,
            signal_bound=env.signal_bound, **params,
        )
        result = run_melk(env.arms, env, mcfg, seed)
        rows = _phased_rows(cfg, seed, result, truth_set, started)
        if cfg.export_allocations:
            alloc_rows = _allocation_rows(cfg, env, result, mcfg)
    elif cfg.algorithm == "milk":
        if mode != "implicit":
            raise SchemaError("algorithm: milk needs an implicit threshold")
        icfg = _build(
            MilkConfig, epsilon=level, noise_std=cfg.noise_std, fw=fw,
            signal_bound=env.signal_bound, **params,
        )
        result = run_milk(env.arms, env, icfg, seed)
        rows = _phased_rows(cfg, seed, result, truth_set, started)
    elif cfg.algorithm == "latte":
        if mode != "implicit":
            raise SchemaError("algorithm: latte needs an implicit threshold")
        if cfg.budget is None:
            raise SchemaError("budget: latte needs a fixed budget")
        params.pop("fw", None)
        instance = _build(
            BanditInstance, means=tuple(env.true_f), noise_std=cfg.noise_std,
            budget=cfg.budget, epsilon=level, **params,
        )
        result = run_latte(instance, env, seed)
        rows = _latte_rows(cfg, seed, result, truth_set, env.arms.n_arms, started)
    else:
        policy = params.pop("policy", None)
        if policy not in POLICIES:
            raise SchemaError(f"algorithm.params.policy: need one of {POLICIES}")
        if cfg.budget is None:
            raise SchemaError("budget: baselines need a budget")
        bcfg = _build(
            BaselineConfig, threshold=(mode, level), budget=cfg.budget,
            noise_std=cfg.noise_std, signal_bound=env.signal_bound, **params,
        )
        result = run_baseline(env.arms, env, policy, bcfg, seed, truth_above=truth_set)
        rows = _baseline_rows(cfg, seed, policy, result, truth_set, started)
    return rows, alloc_rows


def _algorithm_name(cfg: ExperimentConfig, policy: str | None = None) -> str:
    if cfg.algorithm == "baseline":
        return f"baseline-{policy}"
    return cfg.algorithm


def _checkpoints(cfg: ExperimentConfig, total: int) -> list[int]:
    return list(cfg.checkpoints) if cfg.checkpoints else [total]


def _phased_rows(cfg, seed, result, truth_set, started):
    wall_ms = (time.perf_counter() - started) * 1e3
    rows = []
    n = result.n_arms
    for checkpoint in _checkpoints(cfg, result.total_samples):
        done = [r for r in result.rounds if r.cumulative_samples <= checkpoint]
        if done:
            last = done[-1]
            declared = set(last.declared_above)
            n_good = sum(len(r.newly_good) for r in done)
            n_bad = sum(len(r.newly_bad) for r in done)
            round_idx = last.t
        else:
            declared, n_good, n_bad, round_idx = set(), 0, 0, 0
        rows.append({
            "schema_version": SCHEMA_VERSION,
            "algorithm": _algorithm_name(cfg),
            "instance": cfg.instance_label,
            "seed": seed,
            "checkpoint_samples": checkpoint,
            "f1": f1_score(declared, truth_set),
            "n_good": n_good,
            "n_bad": n_bad,
            "n_active": n - n_good - n_bad,
            "round": round_idx,
            "wall_time_ms": wall_ms,
        })
    return rows


def _baseline_rows(cfg, seed, policy, result, truth_set, started):
    wall_ms = (time.perf_counter() - started) * 1e3
    samples = result.extra.get("trajectory_samples", [])
    declared_axis = result.extra.get("trajectory_declared", [])
    n_good_axis = result.extra.get("trajectory_n_good", [])
    n_bad_axis = result.extra.get("trajectory_n_bad", [])
    n = result.n_arms
    rows = []
    for checkpoint in _checkpoints(cfg, result.total_samples):
        pos = int(np.searchsorted(np.asarray(samples), checkpoint, side="right")) - 1
        if pos >= 0:
            declared = set(declared_axis[pos])
            n_good, n_bad = n_good_axis[pos], n_bad_axis[pos]
            round_idx = samples[pos]
        else:
            declared, n_good, n_bad, round_idx = set(), 0, 0, 0
        rows.append({
            "schema_version": SCHEMA_VERSION,
            "algorithm": _algorithm_name(cfg, policy),
            "instance": cfg.instance_label,
            "seed": seed,
            "checkpoint_samples": checkpoint,
            "f1": f1_score(declared, truth_set),
            "n_good": n_good,
            "n_bad": n_bad,
            "n_active": n - n_good - n_bad,
            "round": round_idx,
            "wall_time_ms": wall_ms,
        })
    return rows


def _latte_rows(cfg, seed, result, truth_set, n_arms, started):
    wall_ms = (time.perf_counter() - started) * 1e3
    rows = []
    final = set(result.selected)
    for checkpoint in _checkpoints(cfg, result.total_samples):
        finished = checkpoint >= result.total_samples
        declared = final if finished else set()
        rows.append({
            "schema_version": SCHEMA_VERSION,
            "algorithm": _algorithm_name(cfg),
            "instance": cfg.instance_label,
            "seed": seed,
            "checkpoint_samples": checkpoint,
            "f1": f1_score(declared, truth_set),
            "n_good": len(declared),
            "n_bad": (n_arms - len(declared)) if finished else 0,
            "n_active": 0 if finished else n_arms,
            "round": 3 if finished else 0,
            "wall_time_ms": wall_ms,
        })
    return rows


def _allocation_rows(cfg, env: Environment, result, mcfg: MelkConfig):
    """Per-round designs, the 4^t-weighted total, and the oracle allocation."""
    rows = []
    pts = env.arms.points
    n = env.arms.n_arms

    def emit(weights, round_idx):
        for i in range(n):
            rows.append([i, *pts[i].tolist(), float(weights[i]), round_idx])

    weighted = np.zeros(n)
    mass = 0.0
    for rnd in result.rounds:
        emit(rnd.design, rnd.t)
        weighted += 4.0**rnd.t * np.asarray(rnd.design)
        mass += 4.0**rnd.t
    if mass > 0:
        emit(weighted / mass, -1)
    lam = oracle_allocation(
        env.arms, true_f=env.true_f, objective=("explicit", mcfg.alpha),
        gamma=mcfg.gamma, config=mcfg.fw,
    )
    emit(lam.weights, -2)
    return rows


def run_experiment(cfg: ExperimentConfig, out_dir) -> dict:
    """Run all seeds, write metrics (and allocation) CSVs, return the paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    results = []
    if cfg.jobs > 1 and len(cfg.seeds) > 1:
        # Spawned workers: forking is unsafe once the accelerated kernels have
        # initialized their threading layer.
        ctx = multiprocessing.get_context("spawn")
        with ProcessPoolExecutor(max_workers=cfg.jobs, mp_context=ctx) as pool:
            results = list(pool.map(_run_single_star, [(cfg, s) for s in cfg.seeds]))
    else:
        results = [_run_single(cfg, s) for s in cfg.seeds]

    rows = [row for row_list, _ in results for row in row_list]
    rows.sort(key=lambda r: (r["algorithm"], r["seed"], r["checkpoint_samples"]))
    metrics_path = out / "metrics.csv"
    write_metrics(rows, metrics_path)
    paths = {"metrics": str(metrics_path)}

    for (_, alloc), seed in zip(results, cfg.seeds):
        if alloc is None:
            continue
        path = out / f"allocations_seed{seed}.csv"
        write_allocations(alloc, env_dim(cfg), path)
        paths[f"allocations_seed{seed}"] = str(path)
    return paths


def env_dim(cfg: ExperimentConfig) -> int:
    env = generate(cfg.instance, cfg.seeds[0], noise_std=0.0)
    return env.arms.dim


def _run_single_star(args):
    return _run_single(*args)


def write_metrics(rows, path):
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(METRIC_COLUMNS)
        for row in rows:
            writer.writerow([_fmt(row[c]) for c in METRIC_COLUMNS])


def read_metrics(path):
    with open(path, newline="") as handle:
        reader = csv.reader(handle)
        header = next(reader)
        if header != METRIC_COLUMNS:
            missing = [c for c in METRIC_COLUMNS if c not in header]
            extra = [c for c in header if c not in METRIC_COLUMNS]
            raise SchemaError(f"metrics csv: missing columns {missing}, unexpected {extra}")
        rows = []
        for record in reader:
            row = dict(zip(header, record))
            row["schema_version"] = int(row["schema_version"])
            row["seed"] = int(row["seed"])
            row["checkpoint_samples"] = int(row["checkpoint_samples"])
            row["f1"] = float(row["f1"])
            row["n_good"] = int(row["n_good"])
            row["n_bad"] = int(row["n_bad"])
            row["n_active"] = int(row["n_active"])
            row["round"] = int(row["round"])
            row["wall_time_ms"] = float(row["wall_time_ms"])
            rows.append(row)
        return rows


def write_allocations(rows, dim, path):
    header = ["arm_index", *[f"x{i}" for i in range(dim)], "weight", "round"]
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def read_allocations(path):
    with open(path, newline="") as handle:
        reader = csv.reader(handle)
        header = next(reader)
        if header[0] != "arm_index" or header[-2:] != ["weight", "round"]:
            raise SchemaError("allocations csv: unexpected header")
        rows = []
        for record in reader:
            rows.append(
                [int(record[0])]
                + [float(v) for v in record[1:-1]]
                + [int(record[-1])]
            )
        return rows


def determinism_digest(path) -> str:
    """SHA-256 of the metrics CSV with the wall-time column blanked."""
    import hashlib

    rows = read_metrics(path)
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow([c for c in METRIC_COLUMNS if c != "wall_time_ms"])
    for row in rows:
        writer.writerow([_fmt(row[c]) for c in METRIC_COLUMNS if c != "wall_time_ms"])
    return hashlib.sha256(buf.getvalue().encode()).hexdigest()


def summarize(csv_paths, out_path):
    """Aggregate mean and standard error of F1 per (algorithm, checkpoint)."""
    rows = []
    for path in csv_paths:
        rows.extend(read_metrics(path))
    groups: dict[tuple, list[float]] = {}
    for row in rows:
        key = (row["algorithm"], row["instance"], row["checkpoint_samples"])
        groups.setdefault(key, []).append(row["f1"])
    out_rows = []
    for key in sorted(groups):
        values = np.asarray(groups[key])
        stderr = 0.0 if values.size < 2 else float(values.std(ddof=1) / math.sqrt(values.size))
        out_rows.append({
            "schema_version": SCHEMA_VERSION,
            "algorithm": key[0],
            "instance": key[1],
            "checkpoint_samples": key[2],
            "f1_mean": float(values.mean()),
            "f1_stderr": stderr,
            "n_seeds": int(values.size),
        })
    with open(out_path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(SUMMARY_COLUMNS)
        for row in out_rows:
            writer.writerow([_fmt(row[c]) for c in SUMMARY_COLUMNS])
    return out_rows
