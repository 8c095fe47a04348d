"""Four-stage pipeline: cluster, optimize, pick the best cluster, hybridize.

Both laughter clusterings run on the same turn indices; the agglomerative
path is optimized by boundary clumping, the K-medoids path by scanning K
against the reference; the winner seeds the lexical-cohesion refinement.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional

from . import bayesseg, clustering, metrics, segcore
from .segcore import Segmentation
from .transcript import ReferenceSegmentation, Transcript, extract_laughter


class PipelineError(Exception):
    pass


class NoLaughterError(PipelineError):
    """The laughter-based methods are not applicable to this conversation."""


@dataclass(frozen=True)
class PipelineConfig:
    selector: str = "oracle"            # oracle | likelihood
    theta0: float = 0.1
    k_max: int = 20
    k_init: int = 10
    inconsistency_depth: int = 2
    metric_unit: str = "turn"           # turn | word
    stopwords: bool = True
    significance_test: str = "wilcoxon"

    def __post_init__(self):
        if self.selector not in ("oracle", "likelihood"):
            raise PipelineError(f"unknown selector {self.selector!r}")
        if self.metric_unit not in ("turn", "word"):
            raise PipelineError(f"unknown metric unit {self.metric_unit!r}")
        if not 1 < self.k_init < 20:
            raise PipelineError(f"k_init must satisfy 1 < k_init < 20, "
                                f"got {self.k_init}")


_CONFIG_PARSERS = {
    "selector": str,
    "theta0": float,
    "k_max": int,
    "k_init": int,
    "inconsistency_depth": int,
    "metric_unit": str,
    "stopwords": lambda v: v.lower() in ("1", "true", "yes", "on"),
    "significance_test": str,
}


def parse_config(text: str) -> PipelineConfig:
    """Parse the flat key = value config format (''#'' starts a comment)."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise PipelineError(f"config line {lineno}: expected key = value")
        key, _, value = (part.strip() for part in line.partition("="))
        if key not in _CONFIG_PARSERS:
            raise PipelineError(f"config line {lineno}: unknown key {key!r}")
        try:
            values[key] = _CONFIG_PARSERS[key](value)
        except ValueError as exc:
            raise PipelineError(
                f"config line {lineno}: bad value for {key}: {exc}") from exc
    return PipelineConfig(**values)


@dataclass(frozen=True)
class CandidateEntry:
    segmentation: Segmentation
    pk: Optional[float]
    wd: Optional[float]
    combined: float
    note: str


@dataclass(frozen=True)
class CandidateLog:
    entries: tuple[CandidateEntry, ...]
    selected: int

    @property
    def best(self) -> CandidateEntry:
        return self.entries[self.selected]


def _select(entries: list[CandidateEntry]) -> CandidateLog:
    """Argmin of combined score, ties by pk then by earliest entry."""
    best = 0
    for i, entry in enumerate(entries[1:], start=1):
        incumbent = entries[best]
        key = (entry.combined, entry.pk if entry.pk is not None else 0.0)
        best_key = (incumbent.combined,
                    incumbent.pk if incumbent.pk is not None else 0.0)
        if key < best_key:
            best = i
    return CandidateLog(entries=tuple(entries), selected=best)


class _Scorer:
    """Evaluates candidate segmentations per the configured mode.

    Oracle mode scores Pk + WindowDiff against the reference (lower is
    better). Likelihood mode scores the negated DP objective so that the
    same argmin convention applies without a reference.
    """

    def __init__(self, config: PipelineConfig,
                 ref: Optional[ReferenceSegmentation],
                 n_units: int,
                 seq: Optional[bayesseg.UnitSequence] = None,
                 tokens_per_unit: Optional[list[int]] = None):
        self.config = config
        self.seq = seq
        self.tokens_per_unit = tokens_per_unit
        self.ref_seg = None
        if ref is not None:
            self.ref_seg = Segmentation(n_units=n_units,
                                        boundaries=ref.boundaries,
                                        method="reference")

    def evaluate(self, hyp: Segmentation) -> Optional[metrics.EvalResult]:
        if self.ref_seg is None:
            return None
        ref, cand = self.ref_seg, hyp
        if self.config.metric_unit == "word":
            ref = metrics.to_word_units(ref, self.tokens_per_unit)
            cand = metrics.to_word_units(cand, self.tokens_per_unit)
        return metrics.evaluate(ref, cand)

    def entry(self, hyp: Segmentation, note: str) -> CandidateEntry:
        if self.config.selector == "oracle":
            if self.ref_seg is None:
                raise PipelineError("oracle mode requires a reference")
            result = self.evaluate(hyp)
            return CandidateEntry(segmentation=hyp, pk=result.pk,
                                  wd=result.wd, combined=result.combined,
                                  note=note)
        score = bayesseg.total_score(self.seq, hyp, self.config.theta0)
        return CandidateEntry(segmentation=hyp, pk=None, wd=None,
                              combined=-score, note=note)


def optimize_agglo(t: Transcript,
                   config: PipelineConfig = PipelineConfig()) -> Segmentation:
    """Agglomerative path: laughter -> clump -> linkage -> cutoff -> boundaries."""
    laughter = extract_laughter(t)
    if not laughter:
        raise NoLaughterError(f"{t.id}: no laughter turns")
    clumped = segcore.clump(laughter)
    tree = clustering.linkage_average(clumped)
    cut = clustering.cut_by_inconsistency(tree,
                                          depth=config.inconsistency_depth)
    return segcore.clusters_to_segmentation(cut, clumped, len(t),
                                            method="agglo")


def optimize_kmedoids(t: Transcript, ref: ReferenceSegmentation,
                      config: PipelineConfig = PipelineConfig()
                      ) -> tuple[Segmentation, CandidateLog]:
    """K-medoids path: scan K from k_init outward, pick the argmin score.

    Scan order is k_init, then descending to 2, then ascending below
    min(k_max, laughter count); candidates are evaluated against the
    reference, so this optimizer requires one.
    """
    if ref is None:
        raise PipelineError("optimize_kmedoids requires a reference")
    laughter = extract_laughter(t)
    if len(laughter) < 2:
        raise NoLaughterError(
            f"{t.id}: need >= 2 laughter turns, found {len(laughter)}")
    scorer = _Scorer(config, ref, len(t),
                     tokens_per_unit=[len(turn.tokens) for turn in t.turns])

    n_points = len(laughter)
    upper = min(config.k_max, n_points)
    ks = ([config.k_init]
          + list(range(config.k_init - 1, 1, -1))
          + list(range(config.k_init + 1, upper)))
    seen = set()
    entries = []
    for k in ks:
        if k in seen or not 2 <= k <= n_points:
            continue
        seen.add(k)
        state = clustering.kmedoids(laughter, k)
        seg = segcore.clusters_to_segmentation(
            state.to_clustering(), laughter, len(t), method="kmedoids")
        result = scorer.evaluate(seg)
        entries.append(CandidateEntry(segmentation=seg, pk=result.pk,
                                      wd=result.wd, combined=result.combined,
                                      note=f"K={k}"))
    if not entries:
        raise NoLaughterError(f"{t.id}: no feasible K for {n_points} points")
    log = _select(entries)
    return log.best.segmentation, log


@dataclass(frozen=True)
class BestClusterResult:
    segmentation: Segmentation
    winner: str                     # "agglo" | "kmedoids"
    agglo_eval: metrics.EvalResult
    kmedoids_eval: metrics.EvalResult
    kmedoids_log: CandidateLog


def best_cluster(t: Transcript, ref: ReferenceSegmentation,
                 config: PipelineConfig = PipelineConfig()) -> BestClusterResult:
    """Pick the better of the two optimized clusterings (tie: agglomerative)."""
    scorer = _Scorer(config, ref, len(t),
                     tokens_per_unit=[len(turn.tokens) for turn in t.turns])
    agglo_seg = optimize_agglo(t, config)
    kmed_seg, kmed_log = optimize_kmedoids(t, ref, config)
    agglo_eval = scorer.evaluate(agglo_seg)
    kmed_eval = scorer.evaluate(kmed_seg)
    if kmed_eval.combined < agglo_eval.combined:
        winner, seg = "kmedoids", kmed_seg
    else:
        winner, seg = "agglo", agglo_seg
    seg = replace(seg, method="bestcluster")
    return BestClusterResult(segmentation=seg, winner=winner,
                             agglo_eval=agglo_eval, kmedoids_eval=kmed_eval,
                             kmedoids_log=kmed_log)


def hybridize(t: Transcript, ref: Optional[ReferenceSegmentation],
              base: Segmentation,
              config: PipelineConfig = PipelineConfig(),
              seq: Optional[bayesseg.UnitSequence] = None
              ) -> tuple[Segmentation, CandidateLog]:
    """Refine a clustering-based segmentation with the Bayesian segmenter.

    Candidates: the base itself; the base with each segment's interior
    re-cut by the DP segmenter at every feasible K; and, when the best
    single-segment refinement is not in the final segment, merged spans
    that keep the refined segment's left edge fixed and absorb following
    boundaries before re-cutting. The candidate with the minimal score
    wins; the full log is returned.
    """
    segcore.validate(base)
    if base.n_units != len(t):
        raise PipelineError(
            f"base covers {base.n_units} units, transcript has {len(t)}")
    if seq is None:
        seq = bayesseg.UnitSequence.from_transcript(
            t, remove_stopwords=config.stopwords)
    tokens_per_unit = [len(turn.tokens) for turn in t.turns]
    scorer = _Scorer(config, ref, len(t), seq=seq,
                     tokens_per_unit=tokens_per_unit)

    m = len(t)
    edges = (0,) + base.boundaries + (m,)
    n_segments = len(edges) - 1
    entries = [scorer.entry(base, "base")]

    refine_segment_of: list[int] = []   # segment index per refinement entry
    for i in range(n_segments):
        left, right = edges[i], edges[i + 1]
        span_len = right - left
        if span_len < 2:
            continue
        sub = seq.slice(left + 1, right)
        for k in range(2, min(config.k_max, span_len) + 1):
            subseg = bayesseg.dp_segment(sub, k, config.theta0)
            interior = tuple(left + b for b in subseg.boundaries)
            cand = replace(base,
                           boundaries=tuple(sorted(set(base.boundaries)
                                                   | set(interior))),
                           method="hybrid")
            entries.append(scorer.entry(
                cand, f"refine segment {i + 1} into {k}"))
            refine_segment_of.append(i)

    # merge phase: only when the best refinement is not in the last segment
    if len(entries) > 1:
        refinements = entries[1:]
        best_pos = min(range(len(refinements)),
                       key=lambda p: (refinements[p].combined,
                                      refinements[p].pk or 0.0, p))
        i_star = refine_segment_of[best_pos]
        if i_star < n_segments - 1:
            left = edges[i_star]
            # merged spans run from the refined segment's left edge to each
            # following boundary n_j (j <= s-1), never into the final unit
            for j in range(i_star + 1, n_segments):
                right = edges[j]
                if right <= left + 1:
                    continue
                kept = tuple(b for b in base.boundaries
                             if not left < b < right)
                span_len = right - left
                sub = seq.slice(left + 1, right)
                for k in range(1, min(config.k_max, span_len) + 1):
                    subseg = bayesseg.dp_segment(sub, k, config.theta0)
                    interior = tuple(left + b for b in subseg.boundaries)
                    cand = replace(base,
                                   boundaries=tuple(sorted(set(kept)
                                                           | set(interior))),
                                   method="hybrid")
                    entries.append(scorer.entry(
                        cand,
                        f"merge segments {i_star + 1}..{j + 1}, re-cut "
                        f"into {k}"))

    log = _select(entries)
    chosen = replace(log.best.segmentation, method="hybrid")
    return segcore.validate(chosen), log


@dataclass(frozen=True)
class MethodOutcome:
    method: str
    segmentation: Optional[Segmentation] = None
    eval_result: Optional[metrics.EvalResult] = None
    skipped: Optional[str] = None       # reason, when the method did not run
    candidate_log: Optional[CandidateLog] = None


@dataclass(frozen=True)
class PipelineResult:
    transcript_id: str
    outcomes: dict[str, MethodOutcome]
    bestcluster_winner: Optional[str] = None

    def rows(self) -> list[dict]:
        """Per-method report rows (id, method, pk, wd, k, n_segments)."""
        out = []
        for method in ("agglo", "kmedoids", "bestcluster", "bayes", "hybrid"):
            outcome = self.outcomes[method]
            row = {"id": self.transcript_id, "method": method}
            if outcome.skipped:
                row["skipped"] = outcome.skipped
            else:
                row["n_segments"] = outcome.segmentation.n_segments
                if outcome.eval_result is not None:
                    row.update(pk=outcome.eval_result.pk,
                               wd=outcome.eval_result.wd,
                               k_window=outcome.eval_result.k_window)
            out.append(row)
        return out


def run_pipeline(t: Transcript, ref: Optional[ReferenceSegmentation],
                 config: PipelineConfig = PipelineConfig()) -> PipelineResult:
    """Run every method on one conversation and evaluate what can be evaluated.

    Oracle mode needs a reference. In likelihood (reference-free) mode the
    K-medoids path cannot run, so the hybrid refines the agglomerative
    segmentation instead, and pk/wd fields are absent.
    """
    if config.selector == "oracle" and ref is None:
        raise PipelineError("oracle mode requires a reference segmentation")
    seq = bayesseg.UnitSequence.from_transcript(
        t, remove_stopwords=config.stopwords)
    tokens_per_unit = [len(turn.tokens) for turn in t.turns]
    scorer = _Scorer(config, ref, len(t), seq=seq,
                     tokens_per_unit=tokens_per_unit)
    outcomes: dict[str, MethodOutcome] = {}
    winner = None

    def record(method, seg=None, skipped=None, log=None):
        outcomes[method] = MethodOutcome(
            method=method, segmentation=seg,
            eval_result=scorer.evaluate(seg) if seg is not None else None,
            skipped=skipped, candidate_log=log)

    # laughter-clustering paths
    base = None
    try:
        if config.selector == "oracle":
            agglo_seg = optimize_agglo(t, config)
            record("agglo", agglo_seg)
            kmed_seg, kmed_log = optimize_kmedoids(t, ref, config)
            record("kmedoids", kmed_seg, log=kmed_log)
            bc = best_cluster(t, ref, config)
            record("bestcluster", bc.segmentation, log=bc.kmedoids_log)
            winner = bc.winner
            base = bc.segmentation
        else:
            base = optimize_agglo(t, config)
            record("agglo", base)
            record("kmedoids", skipped="requires a reference (oracle mode)")
            record("bestcluster", skipped="requires a reference (oracle mode)")
    except NoLaughterError as exc:
        for method in ("agglo", "kmedoids", "bestcluster"):
            if method not in outcomes:
                record(method, skipped=str(exc))

    # lexical-cohesion baseline
    scan = bayesseg.scan_k(seq, k_max=config.k_max, theta0=config.theta0,
                           selector=config.selector,
                           ref=scorer.ref_seg)
    record("bayes", scan.segmentation)

    # hybrid
    if base is None:
        record("hybrid", skipped=outcomes["bestcluster"].skipped
               or outcomes["agglo"].skipped or "no clustering base")
    else:
        hybrid_seg, hybrid_log = hybridize(t, ref, base, config, seq=seq)
        record("hybrid", hybrid_seg, log=hybrid_log)

    return PipelineResult(transcript_id=t.id, outcomes=outcomes,
                          bestcluster_winner=winner)
