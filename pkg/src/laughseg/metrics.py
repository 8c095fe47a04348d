"""Segmentation evaluation: Pk, WindowDiff, and aggregate statistics."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from scipy import stats as _scipy_stats

from .segcore import Segmentation


class MetricError(Exception):
    pass


@dataclass(frozen=True)
class EvalResult:
    pk: float
    wd: float
    k_window: int
    n_units: int

    @property
    def combined(self) -> float:
        return self.pk + self.wd


def window_width(ref: Segmentation) -> int:
    """Window size: half the mean reference segment length, rounded half
    up, floored at 1."""
    mean_len = ref.n_units / ref.n_segments
    return max(1, math.floor(0.5 * mean_len + 0.5))


def _segment_ids(seg: Segmentation) -> list[int]:
    ids = []
    sid = 0
    bset = set(seg.boundaries)
    for unit in range(1, seg.n_units + 1):
        ids.append(sid)
        if unit in bset:
            sid += 1
    return ids


def _check_pair(ref: Segmentation, hyp: Segmentation, k: int) -> int:
    if ref.n_units != hyp.n_units:
        raise MetricError(
            f"unit counts differ: ref {ref.n_units}, hyp {hyp.n_units}")
    m = ref.n_units
    if not 1 <= k <= m - 1:
        raise MetricError(f"window width {k} out of range for M={m}")
    return m


def pk(ref: Segmentation, hyp: Segmentation, k: int) -> float:
    """Pk: fraction of unit pairs (i, i+k) whose same-segment status
    disagrees between reference and hypothesis, over i = 1..M-k."""
    m = _check_pair(ref, hyp, k)
    ref_ids, hyp_ids = _segment_ids(ref), _segment_ids(hyp)
    disagreements = 0
    for i in range(m - k):
        ref_same = ref_ids[i] == ref_ids[i + k]
        hyp_same = hyp_ids[i] == hyp_ids[i + k]
        if ref_same != hyp_same:
            disagreements += 1
    return disagreements / (m - k)


def window_diff(ref: Segmentation, hyp: Segmentation, k: int) -> float:
    """WindowDiff: fraction of positions i = 1..M-k where the number of
    boundaries inside (i, i+k] differs between reference and hypothesis."""
    m = _check_pair(ref, hyp, k)
    ref_cum = _cumulative_boundaries(ref)
    hyp_cum = _cumulative_boundaries(hyp)
    differing = 0
    for i in range(1, m - k + 1):
        if (ref_cum[i + k] - ref_cum[i]) != (hyp_cum[i + k] - hyp_cum[i]):
            differing += 1
    return differing / (m - k)


def _cumulative_boundaries(seg: Segmentation) -> list[int]:
    """cum[j] = number of boundaries <= j, for j in 0..n_units."""
    cum = [0] * (seg.n_units + 1)
    for b in seg.boundaries:
        cum[b] += 1
    for j in range(1, len(cum)):
        cum[j] += cum[j - 1]
    return cum


def evaluate(ref: Segmentation, hyp: Segmentation,
             k: int | None = None) -> EvalResult:
    """Pk and WindowDiff with the window derived from the reference unless
    given."""
    if k is None:
        k = window_width(ref)
        k = min(k, ref.n_units - 1)
    return EvalResult(pk=pk(ref, hyp, k), wd=window_diff(ref, hyp, k),
                      k_window=k, n_units=ref.n_units)


def to_word_units(seg: Segmentation, tokens_per_unit: Sequence[int],
                  method: str | None = None) -> Segmentation:
    """Re-express a turn-level segmentation over word units.

    A boundary after turn b becomes a boundary after the cumulative token
    count through turn b. Boundaries that collapse onto 0 or the final
    word (via empty turns) are dropped; duplicates are merged.
    """
    if len(tokens_per_unit) != seg.n_units:
        raise MetricError(
            f"{len(tokens_per_unit)} token counts for {seg.n_units} units")
    total = sum(tokens_per_unit)
    if total < 2:
        raise MetricError("word-level evaluation needs at least 2 tokens")
    cum = [0]
    for count in tokens_per_unit:
        cum.append(cum[-1] + count)
    word_boundaries = sorted({cum[b] for b in seg.boundaries
                              if 0 < cum[b] < total})
    return Segmentation(n_units=total, boundaries=tuple(word_boundaries),
                        method=method or seg.method)


def spearman_rho(a: Sequence[float], b: Sequence[float]) -> float:
    """Spearman rank correlation with average ranks for ties."""
    if len(a) != len(b):
        raise MetricError(f"length mismatch: {len(a)} vs {len(b)}")
    if len(a) < 2:
        raise MetricError("need at least 2 observations")
    if len(set(a)) == 1 or len(set(b)) == 1:
        raise MetricError("correlation undefined for a constant vector")
    return float(_scipy_stats.spearmanr(a, b).statistic)


@dataclass(frozen=True)
class SignificanceResult:
    p_value: float
    significant: bool       # at the 0.05 level
    degenerate: bool        # all paired differences were zero
    test: str


def paired_significance(a: Sequence[float], b: Sequence[float],
                        test: str = "wilcoxon",
                        alpha: float = 0.05) -> SignificanceResult:
    """Two-sided paired test between per-conversation score vectors.

    Default is the Wilcoxon signed-rank test with zero differences
    dropped; test="ttest" switches to a paired t-test.
    """
    if len(a) != len(b):
        raise MetricError(f"length mismatch: {len(a)} vs {len(b)}")
    if len(a) < 6:
        raise MetricError("need at least 6 paired observations")
    diffs = [x - y for x, y in zip(a, b)]
    if all(d == 0 for d in diffs):
        return SignificanceResult(p_value=1.0, significant=False,
                                  degenerate=True, test=test)
    if test == "wilcoxon":
        res = _scipy_stats.wilcoxon(a, b, zero_method="wilcox",
                                    alternative="two-sided")
    elif test == "ttest":
        res = _scipy_stats.ttest_rel(a, b)
    else:
        raise MetricError(f"unknown test {test!r}")
    p = float(res.pvalue)
    return SignificanceResult(p_value=p, significant=p < alpha,
                              degenerate=False, test=test)
