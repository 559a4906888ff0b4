"""F1-versus-samples curves with standard-error bands."""

from __future__ import annotations

import argparse

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from .io import PlotDataError, read_summary_csv


def plot_f1_curves(summary_paths, out_path, title: str | None = None):
    """One curve per algorithm with a +/- 1 stderr band; renders exactly the
    CSV values (no recomputation).  Returns the figure for inspection."""
    if isinstance(summary_paths, (str, bytes)) or hasattr(summary_paths, "__fspath__"):
        summary_paths = [summary_paths]
    rows = []
    for path in summary_paths:
        rows.extend(read_summary_csv(path))

    series: dict[str, list] = {}
    for row in rows:
        series.setdefault(row["algorithm"], []).append(row)

    fig, ax = plt.subplots(figsize=(6, 4))
    for algorithm in sorted(series):
        pts = sorted(series[algorithm], key=lambda r: r["checkpoint_samples"])
        xs = [r["checkpoint_samples"] for r in pts]
        ys = [r["f1_mean"] for r in pts]
        errs = [r["f1_stderr"] for r in pts]
        ax.plot(xs, ys, marker="o", label=algorithm)
        ax.fill_between(
            xs,
            [y - e for y, e in zip(ys, errs)],
            [y + e for y, e in zip(ys, errs)],
            alpha=0.2,
        )
    ax.set_xlabel("samples")
    ax.set_ylabel("F1 of the declared set")
    ax.set_ylim(-0.02, 1.02)
    if title:
        ax.set_title(title)
    ax.legend()
    fig.tight_layout()
    fig.savefig(out_path)
    return fig


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="plot-f1",
                                     description="F1 curves from summary CSVs")
    parser.add_argument("--in", dest="inputs", nargs="+", required=True)
    parser.add_argument("--out", required=True)
    parser.add_argument("--title")
    args = parser.parse_args(argv)
    try:
        plot_f1_curves(args.inputs, args.out, args.title)
    except (PlotDataError, FileNotFoundError) as exc:
        print(f"error: {exc}")
        return 2
    print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
