"""Lexical-cohesion segmentation by Dirichlet-multinomial scoring + DP.

Each segment's bag of words is scored by its log marginal likelihood
under a multinomial with a symmetric Dirichlet prior; the optimal
K-segmentation maximizes the summed score via dynamic programming.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.special import gammaln

from .segcore import Segmentation, validate


class BayesSegError(Exception):
    pass


STOPWORDS = frozenset("""
a about above after again against all am an and any are aren as at be because
been before being below between both but by can cannot could couldn did didn
do does doesn doing don down during each few for from further had hadn has
hasn have haven having he her here hers herself him himself his how i if in
into is isn it its itself just ll m me mightn more most mustn my myself no
nor not now o of off on once only or other our ours ourselves out over own
re s same shan she should shouldn so some such t than that the their theirs
them themselves then there these they this those through to too under until
up ve very was wasn we were weren what when where which while who whom why
will with won would wouldn y yeah yes you your yours yourself yourselves
uh um hm hmm mm mmm oh ok okay well like know mean right really gonna gotta
kinda sorta
""".split())


@dataclass(frozen=True, eq=False)
class UnitSequence:
    """Ordered bags of word tokens (one per turn) over a shared vocabulary.

    `prefix_counts[t]` holds cumulative token counts for units 1..t, so a
    span's count vector is one subtraction. Empty units are retained to
    keep boundary indices aligned with the transcript.
    """
    vocabulary: tuple[str, ...]
    prefix_counts: np.ndarray = field(repr=False)   # (n_units + 1, V) int array

    @property
    def n_units(self) -> int:
        return self.prefix_counts.shape[0] - 1

    @classmethod
    def from_token_bags(cls, bags: Sequence[Sequence[str]],
                        remove_stopwords: bool = True) -> "UnitSequence":
        if not bags:
            raise BayesSegError("no units given")
        filtered = [[tok for tok in bag
                     if not (remove_stopwords and tok in STOPWORDS)]
                    for bag in bags]
        vocab = sorted({tok for bag in filtered for tok in bag})
        ids = {tok: i for i, tok in enumerate(vocab)}
        counts = np.zeros((len(bags) + 1, len(vocab)), dtype=np.int64)
        for t, bag in enumerate(filtered, start=1):
            row = counts[t]
            for tok in bag:
                row[ids[tok]] += 1
        np.cumsum(counts, axis=0, out=counts)
        return cls(vocabulary=tuple(vocab), prefix_counts=counts)

    @classmethod
    def from_transcript(cls, transcript,
                        remove_stopwords: bool = True) -> "UnitSequence":
        return cls.from_token_bags([turn.tokens for turn in transcript.turns],
                                   remove_stopwords=remove_stopwords)

    def slice(self, start: int, end: int) -> "UnitSequence":
        """Sub-sequence covering units start..end (1-based, inclusive),
        keeping the full vocabulary so scores stay comparable."""
        if not 1 <= start <= end <= self.n_units:
            raise BayesSegError(f"bad span {start}..{end} of {self.n_units}")
        block = self.prefix_counts[start - 1:end + 1] - self.prefix_counts[start - 1]
        return UnitSequence(vocabulary=self.vocabulary, prefix_counts=block)

    def span_counts(self, start: int, end: int) -> np.ndarray:
        if not 1 <= start <= end <= self.n_units:
            raise BayesSegError(f"bad span {start}..{end} of {self.n_units}")
        return self.prefix_counts[end] - self.prefix_counts[start - 1]


def segment_score(seq: UnitSequence, start: int, end: int,
                  theta0: float = 0.1) -> float:
    """Log marginal likelihood of the bag of words in units start..end
    (1-based, inclusive) under a symmetric-Dirichlet multinomial.

    With V the vocabulary size, N the span's token total and n_w the
    per-word counts:
        lnG(V*t0) - lnG(N + V*t0) + sum_{n_w > 0} [lnG(n_w + t0) - lnG(t0)]
    An empty span scores 0 by convention.
    """
    if theta0 <= 0:
        raise BayesSegError(f"theta0 must be positive, got {theta0}")
    counts = seq.span_counts(start, end)
    return _score_from_counts(counts, theta0)


def _score_from_counts(counts: np.ndarray, theta0: float) -> float:
    total = int(counts.sum())
    if total == 0:
        return 0.0
    v = counts.shape[0]
    nonzero = counts[counts > 0]
    return float(gammaln(v * theta0) - gammaln(total + v * theta0)
                 + gammaln(nonzero + theta0).sum()
                 - nonzero.shape[0] * gammaln(theta0))


class _SpanScores:
    """Lazy cache of segment scores keyed by (start, end), 1-based inclusive."""

    def __init__(self, seq: UnitSequence, theta0: float):
        self.seq = seq
        self.theta0 = theta0
        self._cache: dict[tuple[int, int], float] = {}

    def __call__(self, start: int, end: int) -> float:
        key = (start, end)
        score = self._cache.get(key)
        if score is None:
            score = segment_score(self.seq, start, end, self.theta0)
            self._cache[key] = score
        return score


def dp_segment(seq: UnitSequence, k: int, theta0: float = 0.1) -> Segmentation:
    """Exact optimal K-segmentation by dynamic programming.

    Maximizes the summed segment score; among equal-scoring optima returns
    the lexicographically smallest boundary vector.
    """
    boundaries, _ = dp_segment_scored(seq, k, theta0)
    return boundaries


def dp_segment_scored(seq: UnitSequence, k: int,
                      theta0: float = 0.1) -> tuple[Segmentation, float]:
    t_units = seq.n_units
    if not 1 <= k <= t_units:
        raise BayesSegError(f"k={k} out of range for {t_units} units")
    score = _SpanScores(seq, theta0)

    # best[t][j]: optimal score segmenting units t+1..T into j segments
    neg_inf = float("-inf")
    best = [[neg_inf] * (k + 1) for _ in range(t_units + 1)]
    best[t_units][0] = 0.0
    for t in range(t_units - 1, -1, -1):
        max_j = min(k, t_units - t)
        for j in range(1, max_j + 1):
            acc = neg_inf
            # first segment is units t+1..e
            for e in range(t + 1, t_units - j + 2):
                tail = best[e][j - 1]
                if tail == neg_inf:
                    continue
                value = score(t + 1, e) + tail
                if value > acc:
                    acc = value
            best[t][j] = acc

    total = best[0][k]
    # reconstruct left-to-right, taking the smallest cut that attains the
    # optimum (exact float equality: the optimum was computed from these
    # same sums)
    cuts = []
    t, j = 0, k
    while j > 1:
        target = best[t][j]
        for e in range(t + 1, t_units - j + 2):
            if score(t + 1, e) + best[e][j - 1] == target:
                cuts.append(e)
                t, j = e, j - 1
                break
        else:
            raise BayesSegError("DP reconstruction failed")  # unreachable
    return (validate(Segmentation(n_units=t_units, boundaries=tuple(cuts),
                                  method="bayes")),
            total)


def total_score(seq: UnitSequence, seg: Segmentation,
                theta0: float = 0.1) -> float:
    """Summed segment score of a full segmentation (the DP objective)."""
    if seg.n_units != seq.n_units:
        raise BayesSegError(
            f"segmentation covers {seg.n_units} units, sequence has "
            f"{seq.n_units}")
    edges = (0,) + seg.boundaries + (seg.n_units,)
    total = 0.0
    # sum right-to-left to mirror the DP's fold order exactly
    for start, end in reversed(list(zip(edges, edges[1:]))):
        total = segment_score(seq, start + 1, end, theta0) + total
    return total


@dataclass(frozen=True)
class ScanEntry:
    k: int
    segmentation: Segmentation
    score: float                    # total DP objective
    pk: Optional[float] = None
    wd: Optional[float] = None

    @property
    def combined(self) -> Optional[float]:
        if self.pk is None or self.wd is None:
            return None
        return self.pk + self.wd


@dataclass(frozen=True)
class ScanResult:
    k: int
    segmentation: Segmentation
    entries: tuple[ScanEntry, ...]


def scan_k(seq: UnitSequence, k_max: int = 20, theta0: float = 0.1,
           selector: str = "likelihood",
           ref: Optional[Segmentation] = None) -> ScanResult:
    """Run dp_segment for K = 1..k_max and pick one segmentation.

    selector="likelihood" keeps the maximal total score (reference-free);
    selector="oracle" keeps the minimal Pk + WindowDiff against `ref`.
    Ties go to the smaller K.
    """
    from . import metrics  # local import to avoid a cycle at module load

    if k_max > seq.n_units:
        k_max = seq.n_units
    if k_max < 1:
        raise BayesSegError(f"k_max must be >= 1, got {k_max}")
    if selector not in ("likelihood", "oracle"):
        raise BayesSegError(f"unknown selector {selector!r}")
    if selector == "oracle":
        if ref is None:
            raise BayesSegError("oracle selector requires a reference")
        if ref.n_units != seq.n_units:
            raise BayesSegError(
                f"reference covers {ref.n_units} units, sequence has "
                f"{seq.n_units}")

    entries = []
    for k in range(1, k_max + 1):
        seg, total = dp_segment_scored(seq, k, theta0)
        if selector == "oracle":
            result = metrics.evaluate(ref, seg)
            entries.append(ScanEntry(k=k, segmentation=seg, score=total,
                                     pk=result.pk, wd=result.wd))
        else:
            entries.append(ScanEntry(k=k, segmentation=seg, score=total))

    if selector == "oracle":
        chosen = min(entries, key=lambda e: (e.combined, e.k))
    else:
        chosen = max(entries, key=lambda e: (e.score, -e.k))
    return ScanResult(k=chosen.k, segmentation=chosen.segmentation,
                      entries=tuple(entries))
