"""Render the report analyses as figures next to the CSV data."""

from __future__ import annotations

import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from .reports import FrequencyBin


def save_bias_figure(rows: list[dict], path: str | os.PathLike, conventional_only: bool = True) -> None:
    """Horizontal bar chart of per-pair conditional-visor differences."""
    rows = [r for r in rows if r["delta"] is not None and (r["in_conventional_figure"] or not conventional_only)]
    fig, ax = plt.subplots(figsize=(7, 0.6 * max(len(rows), 4) + 1))
    labels = [r["pair"].replace("/", " vs ") for r in rows]
    deltas = [r["delta"] for r in rows]
    y = range(len(rows))
    ax.barh(y, deltas, color="#4878d0", label="evaluated run")
    if rows and "baseline_delta" in rows[0]:
        base = [r["baseline_delta"] or 0.0 for r in rows]
        ax.barh([i + 0.35 for i in y], base, height=0.3, color="#d65f5f", label="baseline")
        ax.legend()
    ax.axvline(0, color="black", linewidth=0.8)
    ax.set_yticks(list(y), labels)
    ax.set_xlabel("conditional visor difference (first minus second, pct points)")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_frequency_figure(
    bins: list[FrequencyBin], path: str | os.PathLike, baseline_bins: list[FrequencyBin] | None = None
) -> None:
    """Conditional visor against triplet frequency, log-scaled x axis."""
    fig, ax = plt.subplots(figsize=(7, 4.5))

    def series(bs: list[FrequencyBin]):
        xs, ys = [], []
        for b in bs:
            v = b.counts.visor_cond_percent
            if v is None or b.n_triplets == 0:
                continue
            center = b.lo if b.hi == float("inf") else (b.lo + b.hi) / 2
            xs.append(max(center, 0.5))  # zero bin plotted at 0.5
            ys.append(v)
        return xs, ys

    xs, ys = series(bins)
    ax.plot(xs, ys, marker="o", color="#4878d0", label="evaluated run")
    if baseline_bins is not None:
        bx, by = series(baseline_bins)
        ax.plot(bx, by, marker="s", color="#d65f5f", label="baseline")
        ax.legend()
    ax.set_xscale("log")
    ax.set_xlabel("triplet frequency in the reference corpus")
    ax.set_ylabel("conditional visor (%)")
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_per_relation_figure(rows: list[dict], path: str | os.PathLike) -> None:
    """Bar chart of conditional visor per relation, grouped by type."""
    rows = [r for r in rows if r["visor_cond"] is not None]
    fig, ax = plt.subplots(figsize=(9, 4.5))
    colors = {"projective": "#4878d0", "topological": "#6acc64", "scale": "#d65f5f"}
    x = range(len(rows))
    ax.bar(x, [r["visor_cond"] for r in rows], color=[colors[r["type"]] for r in rows])
    if any(r.get("delta") is not None for r in rows):
        for i, r in enumerate(rows):
            if r.get("delta") is not None:
                ax.annotate(f"{r['delta']:+.1f}", (i, r["visor_cond"]), ha="center",
                            va="bottom", fontsize=8)
    ax.set_xticks(list(x), [r["relation"] for r in rows], rotation=45, ha="right")
    ax.set_ylabel("conditional visor (%)")
    handles = [plt.Rectangle((0, 0), 1, 1, color=c) for c in colors.values()]
    ax.legend(handles, colors.keys())
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
