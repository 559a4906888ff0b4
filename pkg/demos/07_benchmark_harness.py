"""Walkthrough: the experiment harness and its CSV artifacts.

Builds an experiment config in code, runs it over seeds, summarizes, and
exports the per-round allocation data used by the heatmap plots.  The same
flow is available from the command line:

    levelset run --config exp.json --out results/
    levelset summarize --in results/metrics.csv --out results/
    plot-f1 --in results/summary.csv --out f1.png        (frontend package)
    plot-alloc --in results/allocations_seed0.csv --out alloc.png
"""

import json
import tempfile
from pathlib import Path

import levelset as ls

doc = {
    "instance": {
        "kind": "gp_draw",
        "params": {"lengthscale": 0.2, "grid": 40, "amplitude": 0.9},
        "threshold": ["quantile", 0.8],
    },
    "noise_std": 0.5,
    "budget": 250,
    "algorithm": {"name": "baseline", "params": {"policy": "lse"}},
    "seeds": [0, 1, 2, 3],
    "checkpoints": [50, 150, 250],
    "label": "gp-demo",
}

out = Path(tempfile.mkdtemp(prefix="levelset-demo-"))
cfg = ls.ExperimentConfig.from_dict(doc)
paths = ls.run_experiment(cfg, out)
print("metrics at:", paths["metrics"])
rows = ls.summarize([paths["metrics"]], out / "summary.csv")
for row in rows:
    print(f"  {row['algorithm']} @ {row['checkpoint_samples']:>4} samples: "
          f"F1 {row['f1_mean']:.3f} +/- {row['f1_stderr']:.3f}")

doc["algorithm"] = {"name": "melk", "params": {"gamma": 1e-6}}
doc["seeds"] = [0]
doc["checkpoints"] = [10_000_000]
doc["budget"] = None
doc["export_allocations"] = True
cfg = ls.ExperimentConfig.from_dict(doc)
paths = ls.run_experiment(cfg, out / "melk")
print("\nallocation export:", paths["allocations_seed0"])
print("rows tagged round=-1 hold the doubling-weighted total, round=-2 the oracle")
