"""Command-line entry points.

Subcommands:

* ``run``               - execute an experiment config, write metric CSVs
* ``summarize``         - aggregate metric CSVs into mean/stderr per checkpoint
* ``design-solve``      - standalone Frank-Wolfe design for a target set
* ``env-generate``      - materialize an instance to a replayable JSON document
* ``oracle-allocation`` - gap-weighted oracle design for a generated instance

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .design import DesignProblem, FWConfig, frank_wolfe_design, oracle_allocation
from .environments import InstanceSpec, generate, resolve_threshold
from .errors import DegenerateInstanceError, InvalidInputError, NumericalError, SchemaError
from .harness import ExperimentConfig, run_experiment, summarize, write_allocations
from .kernels import ArmSet, FeatureCombo, KernelSpec
from .milk import y_eps

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


def _load_json(path: str) -> dict:
    try:
        with open(path) as handle:
            return json.load(handle)
    except FileNotFoundError as exc:
        raise SchemaError(f"config: file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise SchemaError(f"config: invalid JSON in {path}: {exc}") from exc


def _cmd_run(args) -> int:
    doc = _load_json(args.config)
    if args.seeds:
        doc["seeds"] = [int(s) for s in args.seeds.split(",")]
    if args.jobs is not None:
        doc["jobs"] = args.jobs
    cfg = ExperimentConfig.from_dict(doc)
    paths = run_experiment(cfg, args.out)
    for name, path in sorted(paths.items()):
        print(f"{name}: {path}")
    return EXIT_OK


def _cmd_summarize(args) -> int:
    out = Path(args.out)
    if out.is_dir():
        out = out / "summary.csv"
    summarize(args.inputs, out)
    print(f"summary: {out}")
    return EXIT_OK


def _arms_from_doc(doc: dict) -> tuple[ArmSet, dict]:
    if "instance" in doc:
        spec = InstanceSpec.from_dict(doc["instance"])
        env = generate(spec, int(doc.get("seed", 0)), noise_std=0.0)
        return env.arms, {"true_f": env.true_f, "spec": spec}
    arms_doc = doc.get("arms")
    if not isinstance(arms_doc, dict) or "points" not in arms_doc:
        raise SchemaError("arms: need {'points': ..., 'kernel': ...} or an instance")
    kernel = KernelSpec.from_dict(arms_doc.get("kernel", {"kind": "linear"}))
    return ArmSet(np.asarray(arms_doc["points"], dtype=float), kernel), {}


def _targets_from_doc(doc: dict, arms: ArmSet):
    spec = doc.get("targets", "arms")
    if spec == "arms":
        return tuple(FeatureCombo.arm(i) for i in range(arms.n_arms))
    if isinstance(spec, dict) and "pairs" in spec:
        eps = float(spec["pairs"])
        pairs = [(i, j) for i in range(arms.n_arms) for j in range(arms.n_arms) if i != j]
        return tuple(y_eps(arms, pairs, eps))
    if isinstance(spec, list):
        return tuple(FeatureCombo({int(i): float(c) for i, c in combo}) for combo in spec)
    raise SchemaError("targets: expected 'arms', {'pairs': eps}, or a combo list")


def _cmd_design_solve(args) -> int:
    doc = _load_json(args.config)
    arms, _ = _arms_from_doc(doc)
    targets = _targets_from_doc(doc, arms)
    fw = FWConfig(**doc.get("fw", {}))
    problem = DesignProblem(arms, targets, float(doc.get("gamma", 0.0)))
    lam, value, iters = frank_wolfe_design(problem, fw)
    out = {
        "weights": [float(w) for w in lam.weights],
        "value": value,
        "iterations": iters,
    }
    Path(args.out).write_text(json.dumps(out, sort_keys=True, indent=2))
    print(f"design: {args.out} (value {value:.6g}, {iters} iterations)")
    return EXIT_OK


def _cmd_env_generate(args) -> int:
    doc = _load_json(args.config)
    spec = InstanceSpec.from_dict(doc["instance"]) if "instance" in doc else None
    if spec is None:
        raise SchemaError("instance: required")
    env = generate(
        spec, int(doc.get("seed", 0)),
        noise_std=float(doc.get("noise_std", 1.0)),
        budget=doc.get("budget"),
        signal_bound=doc.get("signal_bound"),
    )
    Path(args.out).write_text(env.to_json())
    print(f"environment: {args.out} ({env.arms.n_arms} arms, dim {env.arms.dim})")
    return EXIT_OK


def _cmd_oracle_allocation(args) -> int:
    doc = _load_json(args.config)
    arms, info = _arms_from_doc(doc)
    if "true_f" not in info:
        raise SchemaError("instance: oracle allocation needs a generated instance")
    objective = doc.get("objective")
    if not (isinstance(objective, list) and len(objective) == 2):
        spec: InstanceSpec = info["spec"]
        objective = list(resolve_threshold(info["true_f"], spec.threshold))
    mode, value = objective[0], float(objective[1])
    mode, value = resolve_threshold(info["true_f"], (mode, value))
    lam = oracle_allocation(
        arms, true_f=info["true_f"], objective=(mode, value),
        gamma=float(doc.get("gamma", 0.0 if arms.kernel.kind == "linear" else 1e-6)),
        config=FWConfig(**doc.get("fw", {})),
    )
    rows = [
        [i, *arms.points[i].tolist(), float(lam.weights[i]), -2]
        for i in range(arms.n_arms)
    ]
    write_allocations(rows, arms.dim, args.out)
    print(f"oracle allocation: {args.out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="levelset", description="Level set estimation experiment harness"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run an experiment config")
    p_run.add_argument("--config", required=True)
    p_run.add_argument("--out", required=True)
    p_run.add_argument("--seeds", help="comma-separated override of the config seeds")
    p_run.add_argument("--jobs", type=int, help="seed-level process parallelism")
    p_run.set_defaults(func=_cmd_run)

    p_sum = sub.add_parser("summarize", help="aggregate metric CSVs")
    p_sum.add_argument("--in", dest="inputs", nargs="+", required=True)
    p_sum.add_argument("--out", required=True)
    p_sum.set_defaults(func=_cmd_summarize)

    p_des = sub.add_parser("design-solve", help="standalone Frank-Wolfe design")
    p_des.add_argument("--config", required=True)
    p_des.add_argument("--out", required=True)
    p_des.set_defaults(func=_cmd_design_solve)

    p_env = sub.add_parser("env-generate", help="materialize an instance to JSON")
    p_env.add_argument("--config", required=True)
    p_env.add_argument("--out", required=True)
    p_env.set_defaults(func=_cmd_env_generate)

    p_ora = sub.add_parser("oracle-allocation", help="gap-weighted oracle design")
    p_ora.add_argument("--config", required=True)
    p_ora.add_argument("--out", required=True)
    p_ora.set_defaults(func=_cmd_oracle_allocation)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (SchemaError, InvalidInputError, DegenerateInstanceError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
