"""Allocation heatmaps over 2-d grids: per-round panels plus totals."""

from __future__ import annotations

import argparse
import math

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .io import PlotDataError, read_allocation_csv, read_environment_json

_PANEL_TITLES = {-1: "doubling-weighted total", -2: "oracle"}


def _grid_layout(coords):
    xs = sorted({c[0] for c in coords})
    ys = sorted({c[1] for c in coords})
    return xs, ys


def plot_allocation_heatmap(alloc_path, out_path, truth_path=None, threshold=None):
    """One panel per round, then the weighted total and the oracle design.

    Cell color is exactly the design weight from the CSV.  When a replayable
    environment document is given, the level set boundary (values against
    ``threshold``) is overlaid as a contour.  Only 2-d grids are supported.
    """
    rows, dim = read_allocation_csv(alloc_path)
    if dim != 2:
        raise PlotDataError(f"allocation heatmap needs 2-d coordinates, got dim {dim}")

    panels: dict[int, list] = {}
    for row in rows:
        panels.setdefault(row["round"], []).append(row)
    order = sorted(k for k in panels if k >= 0) + [k for k in (-1, -2) if k in panels]

    coords = [r["coords"] for r in rows]
    xs, ys = _grid_layout(coords)
    x_index = {v: i for i, v in enumerate(xs)}
    y_index = {v: i for i, v in enumerate(ys)}

    truth_grid = None
    if truth_path is not None:
        doc = read_environment_json(truth_path)
        truth_grid = np.full((len(ys), len(xs)), np.nan)
        for point, value in zip(doc["points"], doc["true_f"]):
            truth_grid[y_index[point[1]], x_index[point[0]]] = value

    n_panels = len(order)
    n_cols = min(4, n_panels)
    n_rows = math.ceil(n_panels / n_cols)
    fig, axes = plt.subplots(n_rows, n_cols, figsize=(3.2 * n_cols, 3.0 * n_rows),
                             squeeze=False)
    vmax = max(r["weight"] for r in rows)
    for slot, tag in enumerate(order):
        ax = axes[slot // n_cols][slot % n_cols]
        grid = np.zeros((len(ys), len(xs)))
        for row in panels[tag]:
            grid[y_index[row["coords"][1]], x_index[row["coords"][0]]] = row["weight"]
        ax.imshow(grid, origin="lower", vmin=0.0, vmax=vmax, cmap="viridis",
                  extent=(min(xs), max(xs), min(ys), max(ys)), aspect="auto")
        if truth_grid is not None and threshold is not None:
            ax.contour(xs, ys, truth_grid, levels=[threshold], colors="black",
                       linewidths=1.0)
        ax.set_title(_PANEL_TITLES.get(tag, f"round {tag}"), fontsize=9)
        ax.set_xticks([])
        ax.set_yticks([])
    for slot in range(n_panels, n_rows * n_cols):
        axes[slot // n_cols][slot % n_cols].axis("off")
    fig.tight_layout()
    fig.savefig(out_path)
    return fig


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="plot-alloc",
                                     description="allocation heatmaps from an export CSV")
    parser.add_argument("--in", dest="input", required=True)
    parser.add_argument("--out", required=True)
    parser.add_argument("--truth", help="environment JSON for the boundary overlay")
    parser.add_argument("--threshold", type=float, help="level for the overlay contour")
    args = parser.parse_args(argv)
    try:
        plot_allocation_heatmap(args.input, args.out, args.truth, args.threshold)
    except (PlotDataError, FileNotFoundError) as exc:
        print(f"error: {exc}")
        return 2
    print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
