"""Delimited report output and figure rendering.

Reports are plain CSV: one per-conversation table, one aggregate table,
one long-format table feeding the boxplots, and a statistics table with
the rank-correlation and significance results. Figures (method boxplots
and per-conversation laughter scatterplots) are rendered to files next to
the CSVs.
"""

from __future__ import annotations

import csv
import math
from collections import defaultdict
from pathlib import Path
from typing import Optional, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from . import metrics

METHOD_ORDER = ("bayes", "agglo", "kmedoids", "bestcluster", "hybrid")

PER_CONVERSATION_FIELDS = ("id", "method", "pk", "wd", "k_window",
                           "n_segments", "skipped")


def write_per_conversation(rows: Sequence[dict], path: Path) -> None:
    with open(path, "w", newline="") as handle:
        writer = csv.DictWriter(handle, fieldnames=PER_CONVERSATION_FIELDS,
                                extrasaction="ignore")
        writer.writeheader()
        for row in rows:
            writer.writerow(_format_row(row))


def _format_row(row: dict) -> dict:
    out = dict(row)
    for key in ("pk", "wd"):
        if key in out and out[key] is not None:
            out[key] = f"{out[key]:.6f}"
    return out


def aggregate(rows: Sequence[dict]) -> list[dict]:
    """Mean and (sample) standard deviation of pk/wd per method."""
    by_method: dict[str, dict[str, list[float]]] = defaultdict(
        lambda: {"pk": [], "wd": []})
    for row in rows:
        if row.get("pk") is None or row.get("skipped"):
            continue
        by_method[row["method"]]["pk"].append(row["pk"])
        by_method[row["method"]]["wd"].append(row["wd"])
    out = []
    for method in METHOD_ORDER:
        if method not in by_method:
            continue
        pks, wds = by_method[method]["pk"], by_method[method]["wd"]
        out.append({"method": method, "n": len(pks),
                    "mean_pk": _mean(pks), "std_pk": _std(pks),
                    "mean_wd": _mean(wds), "std_wd": _std(wds)})
    return out


def _mean(xs: list[float]) -> float:
    return sum(xs) / len(xs)


def _std(xs: list[float]) -> float:
    if len(xs) < 2:
        return 0.0
    m = _mean(xs)
    return math.sqrt(sum((x - m) ** 2 for x in xs) / (len(xs) - 1))


def write_aggregate(rows: Sequence[dict], path: Path) -> None:
    with open(path, "w", newline="") as handle:
        writer = csv.DictWriter(handle, fieldnames=(
            "method", "n", "mean_pk", "std_pk", "mean_wd", "std_wd"))
        writer.writeheader()
        for row in aggregate(rows):
            writer.writerow({k: (f"{v:.6f}" if isinstance(v, float) else v)
                             for k, v in row.items()})


def write_long_format(rows: Sequence[dict], path: Path) -> None:
    """Boxplot-ready long format: one (id, method, metric, value) per line."""
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(("id", "method", "metric", "value"))
        for row in rows:
            if row.get("pk") is None or row.get("skipped"):
                continue
            writer.writerow((row["id"], row["method"], "pk",
                             f"{row['pk']:.6f}"))
            writer.writerow((row["id"], row["method"], "wd",
                             f"{row['wd']:.6f}"))


def compute_stats(rows: Sequence[dict],
                  significance_test: str = "wilcoxon") -> list[dict]:
    """Pairwise method statistics over conversations evaluated by both
    methods: Spearman's rho on segment counts, paired test on pk."""
    by_method: dict[str, dict[str, dict]] = defaultdict(dict)
    for row in rows:
        if row.get("skipped"):
            continue
        by_method[row["method"]][row["id"]] = row
    methods = [m for m in METHOD_ORDER if m in by_method]
    out = []
    for pos, method_a in enumerate(methods):
        for method_b in methods[pos + 1:]:
            ids = sorted(set(by_method[method_a]) & set(by_method[method_b]))
            if len(ids) < 6:
                continue
            seg_a = [by_method[method_a][i]["n_segments"] for i in ids]
            seg_b = [by_method[method_b][i]["n_segments"] for i in ids]
            pk_a = [by_method[method_a][i].get("pk") for i in ids]
            pk_b = [by_method[method_b][i].get("pk") for i in ids]
            entry = {"method_a": method_a, "method_b": method_b,
                     "n": len(ids), "rho_segments": None, "p_value_pk": None,
                     "significant": None}
            try:
                entry["rho_segments"] = metrics.spearman_rho(seg_a, seg_b)
            except metrics.MetricError:
                pass
            if all(x is not None for x in pk_a + pk_b):
                sig = metrics.paired_significance(pk_a, pk_b,
                                                 test=significance_test)
                entry["p_value_pk"] = sig.p_value
                entry["significant"] = sig.significant and not sig.degenerate
            out.append(entry)
    return out


def write_stats(rows: Sequence[dict], path: Path,
                significance_test: str = "wilcoxon") -> None:
    with open(path, "w", newline="") as handle:
        writer = csv.DictWriter(handle, fieldnames=(
            "method_a", "method_b", "n", "rho_segments", "p_value_pk",
            "significant"))
        writer.writeheader()
        for row in compute_stats(rows, significance_test):
            writer.writerow({k: (f"{v:.6f}" if isinstance(v, float) else v)
                             for k, v in row.items()})


def render_boxplots(rows: Sequence[dict], out_dir: Path) -> list[Path]:
    """One boxplot per metric comparing the methods, mirroring the report
    tables; returns the written paths."""
    paths = []
    for metric in ("pk", "wd"):
        data, labels = [], []
        by_method = defaultdict(list)
        for row in rows:
            if row.get(metric) is not None and not row.get("skipped"):
                by_method[row["method"]].append(row[metric])
        for method in METHOD_ORDER:
            if by_method.get(method):
                labels.append(method)
                data.append(by_method[method])
        if not data:
            continue
        fig, ax = plt.subplots(figsize=(6, 4))
        ax.boxplot(data)
        ax.set_xticks(range(1, len(labels) + 1), labels=labels)
        ax.set_ylabel(metric)
        ax.set_title(f"{metric} by method")
        fig.tight_layout()
        path = out_dir / f"boxplot_{metric}.png"
        fig.savefig(path, dpi=120)
        plt.close(fig)
        paths.append(path)
    return paths


def render_laughter_scatter(points: Sequence[int],
                            labels: Optional[Sequence[int]],
                            path: Path, title: str = "") -> Path:
    """Laughter turn index vs. occurrence sequence, colored by cluster."""
    fig, ax = plt.subplots(figsize=(6, 4))
    xs = list(range(1, len(points) + 1))
    if labels is None:
        ax.scatter(xs, points, s=24)
    else:
        ax.scatter(xs, points, s=24, c=labels, cmap="tab10")
    ax.set_xlabel("sequence of laughter turns")
    ax.set_ylabel("laughter turn index in conversation")
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path
