"""Plot-ready analyses over evaluation reports.

Everything here emits columnar rows (and CSV files) with fixed one-decimal
percentage formatting and sorted keys, so identical inputs produce
byte-identical outputs.
"""

from __future__ import annotations

import csv
import os
import random
import warnings
from dataclasses import dataclass

from .errors import ValidationError
from .geometry import OPPOSITE_PAIRS, RELATION_ORDER, Relation, relation_type
from .manifest import atomic_write
from .metrics import EvalReport, MetricCounts
from .triplets import SpatialTriplet, TripletTable, _sort_key

DEFAULT_BIN_EDGES = (1, 10, 100, 1000, 10_000, 100_000)

# The opposite-pair bias figure conventionally omits the symmetric
# overlapping/separated pair; it is still emitted, just flagged.
FIGURE_PAIRS = tuple(
    (a, b) for a, b in OPPOSITE_PAIRS if a is not Relation.OVERLAPPING
)


def fmt_pct(value: float | None) -> str:
    return "" if value is None else f"{value:.1f}"


def _check_same_captions(report: EvalReport, baseline: EvalReport | None) -> None:
    if baseline is None:
        return
    if report.caption_digest != baseline.caption_digest:
        raise ValidationError(
            "evaluation and baseline cover different caption sets "
            f"({report.caption_count} vs {baseline.caption_count} captions, digests differ)"
        )


def per_relation_table(report: EvalReport, baseline: EvalReport | None = None) -> list[dict]:
    """Conditional-visor row per relation, with delta against a baseline run."""
    _check_same_captions(report, baseline)
    rows = []
    for relation in RELATION_ORDER:
        counts = report.per_relation.get(relation)
        value = counts.visor_cond_percent if counts else None
        row = {
            "relation": relation.value,
            "type": relation_type(relation),
            "n_images": counts.n_images if counts else 0,
            "n_oa": counts.n_oa if counts else 0,
            "visor_cond": value,
        }
        if baseline is not None:
            base_counts = baseline.per_relation.get(relation)
            base = base_counts.visor_cond_percent if base_counts else None
            row["baseline_visor_cond"] = base
            row["delta"] = (value - base) if value is not None and base is not None else None
        rows.append(row)
    return rows


def render_per_relation_text(rows: list[dict]) -> str:
    """Aligned-text table with the "(+x.x)" delta style."""
    lines = [f"{'type':<12} {'relation':<12} {'visor_cond':>10}  delta"]
    for row in rows:
        cell = fmt_pct(row["visor_cond"]) or "-"
        delta = ""
        if row.get("delta") is not None:
            delta = f"({row['delta']:+.1f})"
        lines.append(f"{row['type']:<12} {row['relation']:<12} {cell:>10}  {delta}")
    return "\n".join(lines) + "\n"


def bias_table(report: EvalReport, baseline: EvalReport | None = None) -> list[dict]:
    """Conditional-visor difference for each opposite pair (all seven, the
    six conventional figure pairs flagged)."""
    _check_same_captions(report, baseline)

    def pair_delta(rep: EvalReport, first: Relation, second: Relation):
        a = rep.per_relation.get(first)
        b = rep.per_relation.get(second)
        va = a.visor_cond_percent if a else None
        vb = b.visor_cond_percent if b else None
        delta = (va - vb) if va is not None and vb is not None else None
        return va, vb, delta

    rows = []
    for first, second in OPPOSITE_PAIRS:
        va, vb, delta = pair_delta(report, first, second)
        row = {
            "pair": f"{first.value}/{second.value}",
            "first": first.value,
            "second": second.value,
            "visor_cond_first": va,
            "visor_cond_second": vb,
            "delta": delta,
            "in_conventional_figure": (first, second) in FIGURE_PAIRS,
        }
        if baseline is not None:
            _, _, base_delta = pair_delta(baseline, first, second)
            row["baseline_delta"] = base_delta
        rows.append(row)
    return rows


@dataclass
class FrequencyBin:
    label: str
    lo: float  # inclusive
    hi: float  # exclusive; inf for the overflow bin
    counts: MetricCounts
    n_triplets: int

    def as_row(self) -> dict:
        return {
            "bin": self.label,
            "lo": self.lo,
            "hi": self.hi,
            "n_triplets": self.n_triplets,
            "n_images": self.counts.n_images,
            "n_oa": self.counts.n_oa,
            "n_visor": self.counts.n_visor,
            "visor_cond": self.counts.visor_cond_percent,
        }


def frequency_correlation(
    report: EvalReport,
    freq: TripletTable,
    edges: tuple[int, ...] = DEFAULT_BIN_EDGES,
) -> list[FrequencyBin]:
    """Pool per-triplet outcomes into log-frequency bins.

    Bin values are pooled ratios (sum of visor counts over sum of oa counts),
    not means of per-triplet ratios, so the bins recompose to the overall
    conditional visor exactly. Triplets absent from the frequency table land
    in a dedicated zero bin; counts beyond the last edge go to an open bin.
    """
    if any(b <= a for a, b in zip(edges, edges[1:])):
        raise ValidationError(f"bin edges must be strictly increasing: {edges}")
    bins = [FrequencyBin("0", 0, 1, MetricCounts(), 0)]
    for lo, hi in zip(edges, edges[1:]):
        bins.append(FrequencyBin(f"[{lo},{hi})", lo, hi, MetricCounts(), 0))
    bins.append(FrequencyBin(f">={edges[-1]}", edges[-1], float("inf"), MetricCounts(), 0))

    def locate(count: int) -> FrequencyBin:
        if count < edges[0]:
            return bins[0]
        for b in bins[1:]:
            if b.lo <= count < b.hi:
                return b
        raise AssertionError("unreachable")

    for triplet, counts in report.per_triplet.items():
        b = locate(freq.count(triplet))
        b.counts.merge(counts)
        b.n_triplets += 1
    return bins


def sample_qualitative_triplets(
    freq: TripletTable, lo: int, hi: int, n: int, seed: int
) -> list[SpatialTriplet]:
    """Uniform sample of triplets whose corpus count lies in [lo, hi]."""
    if lo >= hi:
        raise ValidationError(f"need lo < hi, got [{lo}, {hi}]")
    eligible = sorted((t for t, c in freq.items() if lo <= c <= hi), key=_sort_key)
    if len(eligible) <= n:
        if len(eligible) < n:
            warnings.warn(
                f"only {len(eligible)} triplets occur between {lo} and {hi}; requested {n}"
            )
        return eligible
    rng = random.Random(seed)
    return sorted(rng.sample(eligible, n), key=_sort_key)


def _write_csv(path: str | os.PathLike, fieldnames: list[str], rows: list[dict],
               header_comment: str | None = None) -> None:
    with atomic_write(path) as fh:
        if header_comment:
            fh.write(f"# {header_comment}\n")
        writer = csv.DictWriter(fh, fieldnames=fieldnames, lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow(row)


def write_per_relation_csv(rows: list[dict], path: str | os.PathLike, comment: str | None = None) -> None:
    fieldnames = list(rows[0].keys()) if rows else []
    out = []
    for row in rows:
        row = dict(row)
        for key in ("visor_cond", "baseline_visor_cond", "delta"):
            if key in row:
                row[key] = fmt_pct(row[key])
        out.append(row)
    _write_csv(path, fieldnames, out, comment)


def write_bias_csv(rows: list[dict], path: str | os.PathLike, comment: str | None = None) -> None:
    fieldnames = list(rows[0].keys()) if rows else []
    out = []
    for row in rows:
        row = dict(row)
        for key in ("visor_cond_first", "visor_cond_second", "delta", "baseline_delta"):
            if key in row:
                row[key] = fmt_pct(row[key])
        out.append(row)
    _write_csv(path, fieldnames, out, comment)


def write_frequency_csv(bins: list[FrequencyBin], path: str | os.PathLike, comment: str | None = None) -> None:
    rows = []
    for b in bins:
        row = b.as_row()
        row["visor_cond"] = fmt_pct(row["visor_cond"])
        rows.append(row)
    fieldnames = list(rows[0].keys())
    _write_csv(path, fieldnames, rows, comment)
