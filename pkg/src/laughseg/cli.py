"""Command-line front end: ingest, synth, segment, eval."""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path

from . import __version__, hybrid, report, segcore, transcript
from .hybrid import NoLaughterError, PipelineConfig, PipelineError
from .transcript import TranscriptError


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (TranscriptError, PipelineError,
            segcore.SegmentationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="laughseg",
        description="Topic segmentation of conversations from laughter "
                    "cues, hybridized with lexical-cohesion Bayesian "
                    "segmentation.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_ingest = sub.add_parser(
        "ingest", help="normalize raw transcripts into a corpus directory")
    p_ingest.add_argument("inputs", nargs="+", type=Path,
                          help="transcript files or directories")
    p_ingest.add_argument("--format", choices=("mrt", "jsonl"),
                          default="mrt")
    p_ingest.add_argument("-o", "--out", type=Path, required=True)
    p_ingest.set_defaults(func=cmd_ingest)

    p_synth = sub.add_parser(
        "synth", help="generate a synthetic corpus with references")
    p_synth.add_argument("-o", "--out", type=Path, required=True)
    p_synth.add_argument("--conversations", type=int, default=20)
    p_synth.add_argument("--turns", type=int, default=100)
    p_synth.add_argument("--topics", type=int, default=4)
    p_synth.add_argument("--shared-prob", type=float, default=1.0)
    p_synth.add_argument("--noise", type=float, default=0.0)
    p_synth.add_argument("--seed", type=int, default=0)
    p_synth.set_defaults(func=cmd_synth)

    p_segment = sub.add_parser(
        "segment", help="segment a normalized corpus with one method")
    p_segment.add_argument("--corpus", type=Path, required=True)
    p_segment.add_argument("--method", required=True,
                           choices=("agglo", "kmedoids", "bestcluster",
                                    "bayes", "hybrid", "all"))
    p_segment.add_argument("-o", "--out", type=Path, required=True)
    _add_config_flags(p_segment)
    p_segment.add_argument("--workers", type=int,
                           default=os.cpu_count() or 1)
    p_segment.set_defaults(func=cmd_segment)

    p_eval = sub.add_parser(
        "eval", help="evaluate segmentations and write CSV reports "
                     "and figures")
    p_eval.add_argument("--corpus", type=Path, required=True)
    p_eval.add_argument("--segmentations", type=Path, required=True,
                        help="directory holding *.seg.json files")
    p_eval.add_argument("-o", "--out", type=Path, required=True)
    p_eval.add_argument("--significance-test", default="wilcoxon",
                        choices=("wilcoxon", "ttest"))
    p_eval.add_argument("--no-figures", action="store_true",
                        help="skip rendering boxplot/scatter figures")
    p_eval.set_defaults(func=cmd_eval)

    return parser


def _add_config_flags(sub_parser) -> None:
    sub_parser.add_argument("--config", type=Path,
                            help="flat key = value config file")
    sub_parser.add_argument("--oracle", dest="selector",
                            action="store_const", const="oracle")
    sub_parser.add_argument("--likelihood", dest="selector",
                            action="store_const", const="likelihood")
    sub_parser.add_argument("--theta0", type=float)
    sub_parser.add_argument("--k-max", type=int)
    sub_parser.add_argument("--k-init", type=int)
    sub_parser.add_argument("--depth", type=int, dest="inconsistency_depth")
    sub_parser.add_argument("--metric-unit", choices=("turn", "word"))
    sub_parser.add_argument("--seed", type=int, default=0,
                            help="recorded in the run manifest")


def load_pipeline_config(args) -> PipelineConfig:
    config = (hybrid.parse_config(args.config.read_text())
              if args.config else PipelineConfig())
    overrides = {key: getattr(args, key) for key in
                 ("selector", "theta0", "k_max", "k_init",
                  "inconsistency_depth", "metric_unit")
                 if getattr(args, key, None) is not None}
    return replace(config, **overrides)


# ---------------------------------------------------------------------------

def cmd_ingest(args) -> int:
    files = []
    for item in args.inputs:
        if item.is_dir():
            suffix = ".mrt" if args.format == "mrt" else ".jsonl"
            files.extend(sorted(item.glob(f"*{suffix}")))
        else:
            files.append(item)
    if not files:
        print("error: no input files found", file=sys.stderr)
        return 2
    args.out.mkdir(parents=True, exist_ok=True)
    errors = []
    for path in files:
        try:
            data = path.read_bytes()
            t = (transcript.parse_mrt(data, transcript_id=path.stem)
                 if args.format == "mrt"
                 else transcript.parse_jsonl(data, transcript_id=path.stem))
            (args.out / f"{t.id}.jsonl").write_bytes(
                transcript.serialize_jsonl(t))
            laughter = transcript.extract_laughter(t)
            (args.out / f"{t.id}.laughter.json").write_text(
                json.dumps({"id": t.id, "laughter_turns": laughter},
                           sort_keys=True) + "\n")
        except TranscriptError as exc:
            errors.append({"file": str(path), "error": str(exc)})
            print(f"error: {path}: {exc}", file=sys.stderr)
    if errors:
        (args.out / "errors.json").write_text(
            json.dumps(errors, sort_keys=True, indent=2) + "\n")
        return 1
    return 0


def cmd_synth(args) -> int:
    config = transcript.SynthConfig(n_turns=args.turns,
                                    n_topics=args.topics,
                                    shared_laughter_prob=args.shared_prob,
                                    solo_noise_rate=args.noise)
    args.out.mkdir(parents=True, exist_ok=True)
    for i in range(args.conversations):
        cid = f"synth{i:03d}"
        t, ref = transcript.synthesize(config, seed=args.seed + i,
                                       transcript_id=cid)
        (args.out / f"{cid}.jsonl").write_bytes(transcript.serialize_jsonl(t))
        (args.out / f"{cid}.ref.json").write_bytes(
            transcript.serialize_reference(ref))
    manifest = {"tool_version": __version__, "seed": args.seed,
                "conversations": args.conversations,
                "config": {"turns": args.turns, "topics": args.topics,
                           "shared_prob": args.shared_prob,
                           "noise": args.noise}}
    (args.out / "manifest.json").write_text(
        json.dumps(manifest, sort_keys=True, indent=2) + "\n")
    return 0


def load_corpus(corpus_dir: Path):
    """Load (transcript, reference-or-None) pairs from a normalized corpus."""
    pairs = []
    for path in sorted(corpus_dir.glob("*.jsonl")):
        t = transcript.parse_jsonl(path.read_bytes(), transcript_id=path.stem)
        ref_path = corpus_dir / f"{path.stem}.ref.json"
        ref = (transcript.parse_reference(ref_path.read_bytes())
               if ref_path.exists() else None)
        pairs.append((t, ref))
    if not pairs:
        raise TranscriptError(f"no transcripts in {corpus_dir}")
    return pairs


def _segment_one(item):
    t, ref, method, config = item
    flags = []
    outputs = {}
    try:
        result = hybrid.run_pipeline(t, ref, config)
    except PipelineError as exc:
        return t.id, {}, [], [{"id": t.id, "error": str(exc)}]
    methods = (("agglo", "kmedoids", "bestcluster", "bayes", "hybrid")
               if method == "all" else (method,))
    for name in methods:
        outcome = result.outcomes[name]
        if outcome.skipped:
            flags.append({"id": t.id, "method": name,
                          "flag": outcome.skipped})
            continue
        outputs[name] = (outcome.segmentation, outcome.candidate_log)
    return t.id, outputs, flags, []


def cmd_segment(args) -> int:
    config = load_pipeline_config(args)
    pairs = load_corpus(args.corpus)
    if config.selector == "oracle":
        missing = [t.id for t, ref in pairs if ref is None]
        if missing:
            print(f"error: oracle mode but no reference for: "
                  f"{', '.join(missing)}", file=sys.stderr)
            return 2
    args.out.mkdir(parents=True, exist_ok=True)

    work = [(t, ref, args.method, config) for t, ref in pairs]
    if args.workers > 1 and len(work) > 1:
        with ProcessPoolExecutor(max_workers=args.workers) as pool:
            results = list(pool.map(_segment_one, work))
    else:
        results = [_segment_one(item) for item in work]

    all_flags, all_errors = [], []
    for cid, outputs, flags, errors in results:
        for name, (seg, log) in sorted(outputs.items()):
            (args.out / f"{cid}.{name}.seg.json").write_bytes(
                segcore.to_json(seg))
            if log is not None:
                _write_candidate_log(args.out / f"{cid}.{name}.candidates.json",
                                     log)
        all_flags.extend(flags)
        all_errors.extend(errors)

    manifest = {"tool_version": __version__, "seed": args.seed,
                "corpus": str(args.corpus), "method": args.method,
                "config": _config_snapshot(config),
                "flags": sorted(all_flags, key=lambda f: (f["id"], f["method"])),
                "errors": sorted(all_errors, key=lambda e: e["id"])}
    (args.out / "manifest.json").write_text(
        json.dumps(manifest, sort_keys=True, indent=2) + "\n")
    if all_errors:
        print(json.dumps(all_errors), file=sys.stderr)
        return 1
    return 0


def _config_snapshot(config: PipelineConfig) -> dict:
    return {"selector": config.selector, "theta0": config.theta0,
            "k_max": config.k_max, "k_init": config.k_init,
            "inconsistency_depth": config.inconsistency_depth,
            "metric_unit": config.metric_unit,
            "stopwords": config.stopwords,
            "significance_test": config.significance_test}


def _write_candidate_log(path: Path, log: hybrid.CandidateLog) -> None:
    entries = [{"boundaries": list(e.segmentation.boundaries),
                "pk": e.pk, "wd": e.wd, "combined": e.combined,
                "note": e.note}
               for e in log.entries]
    path.write_text(json.dumps({"entries": entries,
                                "selected": log.selected},
                               sort_keys=True) + "\n")


def cmd_eval(args) -> int:
    from . import metrics

    pairs = load_corpus(args.corpus)
    refs = {}
    for t, ref in pairs:
        if ref is None:
            print(f"error: no reference for {t.id}", file=sys.stderr)
            return 2
        refs[t.id] = segcore.Segmentation(n_units=len(t),
                                          boundaries=ref.boundaries,
                                          method="reference")

    seg_files = sorted(args.segmentations.glob("*.seg.json"))
    if not seg_files:
        print(f"error: no *.seg.json files in {args.segmentations}",
              file=sys.stderr)
        return 2
    rows = []
    errors = []
    for path in seg_files:
        cid, method = path.name.rsplit(".seg.json", 1)[0].rsplit(".", 1)
        if cid not in refs:
            errors.append({"file": str(path),
                           "error": f"no reference for id {cid!r}"})
            continue
        hyp = segcore.from_json(path.read_bytes())
        result = metrics.evaluate(refs[cid], hyp)
        rows.append({"id": cid, "method": method, "pk": result.pk,
                     "wd": result.wd, "k_window": result.k_window,
                     "n_segments": hyp.n_segments})

    args.out.mkdir(parents=True, exist_ok=True)
    rows.sort(key=lambda r: (r["id"], r["method"]))
    report.write_per_conversation(rows, args.out / "per_conversation.csv")
    report.write_aggregate(rows, args.out / "aggregate.csv")
    report.write_long_format(rows, args.out / "boxplot_data.csv")
    report.write_stats(rows, args.out / "stats.csv",
                       significance_test=args.significance_test)
    if not args.no_figures:
        report.render_boxplots(rows, args.out)
        for t, _ in pairs:
            laughter = transcript.extract_laughter(t)
            if laughter:
                report.render_laughter_scatter(
                    laughter, None, args.out / f"{t.id}.laughter.png",
                    title=t.id)
    if errors:
        (args.out / "errors.json").write_text(
            json.dumps(errors, sort_keys=True, indent=2) + "\n")
        print(json.dumps(errors), file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
