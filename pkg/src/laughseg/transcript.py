"""Conversation transcripts, laughter events, and synthetic corpus generation."""

from __future__ import annotations

import io
import json
import re
from dataclasses import dataclass, field
from enum import Enum
from random import Random
from typing import Iterable, Optional
from xml.etree import ElementTree


class TranscriptError(Exception):
    """Malformed or invalid transcript input."""


class VocalSoundKind(str, Enum):
    LAUGH = "laugh"
    BREATH_LAUGH = "breath-laugh"
    LAUGH_BREATH = "laugh-breath"
    WHILE_TALKING_LAUGH = "while-talking-laugh"
    OTHER = "other"


def classify_vocal_sound(raw_description: str) -> VocalSoundKind:
    """Map a raw annotation description to its kind.

    Matching is case-insensitive. Only the bare "laugh" marker counts as
    LAUGH; laughing-while-talking and breath variants get their own kinds
    so downstream extraction can exclude them.
    """
    desc = raw_description.strip().lower()
    if desc == "laugh":
        return VocalSoundKind.LAUGH
    if "while talking" in desc:
        return VocalSoundKind.WHILE_TALKING_LAUGH
    if "breath-laugh" in desc:
        return VocalSoundKind.BREATH_LAUGH
    if "laugh-breath" in desc:
        return VocalSoundKind.LAUGH_BREATH
    if "breath" in desc:
        return VocalSoundKind.BREATH_LAUGH
    return VocalSoundKind.OTHER


@dataclass(frozen=True)
class VocalSound:
    kind: VocalSoundKind
    raw_description: str = ""

    @classmethod
    def from_description(cls, raw_description: str) -> "VocalSound":
        return cls(kind=classify_vocal_sound(raw_description),
                   raw_description=raw_description)


_TOKEN_SPLIT = re.compile(r"[^0-9a-z]+")


def tokenize(text: str) -> tuple[str, ...]:
    """Lowercase and split on non-alphanumeric characters, dropping empties."""
    return tuple(tok for tok in _TOKEN_SPLIT.split(text.lower()) if tok)


@dataclass(frozen=True)
class Turn:
    index: int                      # 1-based, consecutive within a conversation
    speaker: str
    text: str
    tokens: tuple[str, ...]
    vocal_sounds: tuple[VocalSound, ...] = ()
    start_time: Optional[float] = None
    end_time: Optional[float] = None

    def has_laugh(self) -> bool:
        return any(vs.kind is VocalSoundKind.LAUGH for vs in self.vocal_sounds)


@dataclass(frozen=True)
class ReferenceSegmentation:
    """After-turn boundary indices; boundary b cuts between turns b and b+1."""
    boundaries: tuple[int, ...]

    def __post_init__(self):
        bs = self.boundaries
        if list(bs) != sorted(set(bs)):
            raise TranscriptError(f"boundaries not strictly increasing: {bs}")
        if bs and bs[0] < 1:
            raise TranscriptError(f"boundary below 1: {bs[0]}")


@dataclass(frozen=True)
class Transcript:
    id: str
    turns: tuple[Turn, ...]
    reference: Optional[ReferenceSegmentation] = None

    def __post_init__(self):
        if not self.turns:
            raise TranscriptError(f"{self.id}: transcript has no turns")
        for pos, turn in enumerate(self.turns, start=1):
            if turn.index != pos:
                raise TranscriptError(
                    f"{self.id}: turn index {turn.index} at position {pos}; "
                    f"indices must be consecutive from 1")
        if self.reference is not None and self.reference.boundaries:
            m = len(self.turns)
            if self.reference.boundaries[-1] > m - 1:
                raise TranscriptError(
                    f"{self.id}: reference boundary "
                    f"{self.reference.boundaries[-1]} out of range for M={m}")

    def __len__(self) -> int:
        return len(self.turns)


def extract_laughter(t: Transcript) -> list[int]:
    """Indices of turns carrying a bare "laugh" vocal sound.

    Breath and while-talking variants are excluded; a turn with several
    laugh events appears once. Result is strictly increasing; may be empty.
    """
    return [turn.index for turn in t.turns if turn.has_laugh()]


# ---------------------------------------------------------------------------
# MRT subset parsing

def parse_mrt(data: bytes, transcript_id: str = "") -> Transcript:
    """Parse the supported MRT markup subset into a Transcript.

    Recognized elements: <Transcript>, <Turn> (attributes StartTime,
    ENDTIME, Participant), and inline <VocalSound Description="...">
    interleaved with turn text. Other attributes are ignored. Turns are
    numbered 1..M in document order.
    """
    try:
        root = ElementTree.parse(io.BytesIO(data)).getroot()
    except ElementTree.ParseError as exc:
        line = exc.position[0] if exc.position else "?"
        raise TranscriptError(f"malformed markup at line {line}: {exc}") from exc

    if transcript_id == "":
        transcript_id = root.get("Session", root.get("session", "unnamed"))

    turns = []
    for elem in root.iter("Turn"):
        index = len(turns) + 1
        speaker = elem.get("Participant", "")
        start = _opt_float(elem.get("StartTime"))
        end = _opt_float(elem.get("ENDTIME"))
        sounds = []
        parts = [elem.text or ""]
        for child in elem:
            if child.tag == "VocalSound":
                sounds.append(VocalSound.from_description(
                    child.get("Description", "")))
            parts.append(child.tail or "")
        text = " ".join(p.strip() for p in parts if p.strip())
        turns.append(Turn(index=index, speaker=speaker, text=text,
                          tokens=tokenize(text), vocal_sounds=tuple(sounds),
                          start_time=start, end_time=end))
    if not turns:
        raise TranscriptError(f"{transcript_id or 'input'}: no Turn elements")
    return Transcript(id=transcript_id, turns=tuple(turns))


def _opt_float(value):
    return None if value is None else float(value)


# ---------------------------------------------------------------------------
# Line-delimited format

def parse_jsonl(data: bytes, transcript_id: str = "") -> Transcript:
    """Parse the line-delimited transcript format (one JSON object per line)."""
    turns = []
    for lineno, raw in enumerate(data.decode("utf-8").splitlines(), start=1):
        if not raw.strip():
            continue
        try:
            rec = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise TranscriptError(f"line {lineno}: invalid JSON: {exc}") from exc
        for key in ("index", "speaker", "text"):
            if key not in rec:
                raise TranscriptError(f"line {lineno}: missing field '{key}'")
        sounds = []
        for vs in rec.get("vocal_sounds", []):
            if "kind" not in vs:
                raise TranscriptError(
                    f"line {lineno}: vocal_sounds entry missing 'kind'")
            try:
                kind = VocalSoundKind(vs["kind"])
            except ValueError as exc:
                raise TranscriptError(
                    f"line {lineno}: unknown vocal sound kind "
                    f"{vs['kind']!r}") from exc
            sounds.append(VocalSound(kind=kind,
                                     raw_description=vs.get("raw_description", "")))
        expected = len(turns) + 1
        if rec["index"] != expected:
            raise TranscriptError(
                f"line {lineno}: field 'index' is {rec['index']}, expected "
                f"{expected} (indices must be consecutive from 1)")
        turns.append(Turn(index=rec["index"], speaker=rec["speaker"],
                          text=rec["text"], tokens=tokenize(rec["text"]),
                          vocal_sounds=tuple(sounds),
                          start_time=rec.get("start_time"),
                          end_time=rec.get("end_time")))
    if not turns:
        raise TranscriptError("no records in input")
    return Transcript(id=transcript_id or "unnamed", turns=tuple(turns))


def serialize_jsonl(t: Transcript) -> bytes:
    """Serialize a Transcript to the line-delimited format (round-trips parse_jsonl)."""
    lines = []
    for turn in t.turns:
        rec = {"index": turn.index, "speaker": turn.speaker, "text": turn.text}
        if turn.vocal_sounds:
            rec["vocal_sounds"] = [
                {"kind": vs.kind.value, "raw_description": vs.raw_description}
                for vs in turn.vocal_sounds]
        if turn.start_time is not None:
            rec["start_time"] = turn.start_time
        if turn.end_time is not None:
            rec["end_time"] = turn.end_time
        lines.append(json.dumps(rec, sort_keys=True))
    return ("\n".join(lines) + "\n").encode("utf-8")


def parse_reference(data: bytes) -> ReferenceSegmentation:
    rec = json.loads(data.decode("utf-8"))
    if "boundaries" not in rec:
        raise TranscriptError("reference file missing 'boundaries'")
    return ReferenceSegmentation(boundaries=tuple(rec["boundaries"]))


def serialize_reference(ref: ReferenceSegmentation) -> bytes:
    return (json.dumps({"boundaries": list(ref.boundaries)},
                       sort_keys=True) + "\n").encode("utf-8")


# ---------------------------------------------------------------------------
# Synthetic corpora

@dataclass(frozen=True)
class SynthConfig:
    n_turns: int = 100
    n_topics: int = 4
    shared_laughter_prob: float = 1.0   # chance a topic boundary gets a laughter pair
    solo_noise_rate: float = 0.0        # per-turn chance of an isolated laugh
    vocab_per_topic: int = 25
    mixing_rate: float = 0.1            # chance a token comes from the shared pool
    tokens_per_turn: int = 8
    n_speakers: int = 4
    min_segment_len: int = 3


def synthesize(config: SynthConfig, seed: int,
               transcript_id: str = "synth") -> tuple[Transcript, ReferenceSegmentation]:
    """Generate a deterministic synthetic conversation with planted topics.

    Each topic draws from its own disjoint word pool (plus a small shared
    pool at the mixing rate). At each planted boundary b, with probability
    `shared_laughter_prob` the two turns (b-1, b) both receive a laugh
    event; solo laugh noise is sprinkled elsewhere at `solo_noise_rate`.
    """
    m, topics = config.n_turns, config.n_topics
    if topics < 1 or topics * config.min_segment_len > m:
        raise TranscriptError(
            f"infeasible config: {topics} topics of >= "
            f"{config.min_segment_len} turns do not fit in {m} turns")
    rng = Random(seed)

    boundaries = _draw_boundaries(rng, m, topics, config.min_segment_len)
    topic_of = _topic_assignment(m, boundaries)

    shared_pool = [f"common{j}" for j in range(max(5, config.vocab_per_topic // 3))]
    pools = [[f"topic{i}word{j}" for j in range(config.vocab_per_topic)]
             for i in range(topics)]

    laugh_turns = set()
    for b in boundaries:
        if rng.random() < config.shared_laughter_prob:
            laugh_turns.update((b - 1, b))
    boundary_zone = set(boundaries) | {b - 1 for b in boundaries} | {b + 1 for b in boundaries}
    for i in range(1, m + 1):
        if i not in boundary_zone and rng.random() < config.solo_noise_rate:
            laugh_turns.add(i)

    speakers = [chr(ord("A") + i % 26) for i in range(config.n_speakers)]
    turns = []
    for i in range(1, m + 1):
        pool = pools[topic_of[i - 1]]
        words = [rng.choice(shared_pool) if rng.random() < config.mixing_rate
                 else rng.choice(pool)
                 for _ in range(config.tokens_per_turn)]
        text = " ".join(words)
        sounds = ((VocalSound(VocalSoundKind.LAUGH, "laugh"),)
                  if i in laugh_turns else ())
        turns.append(Turn(index=i, speaker=rng.choice(speakers), text=text,
                          tokens=tokenize(text), vocal_sounds=sounds))
    ref = ReferenceSegmentation(boundaries=tuple(boundaries))
    return Transcript(id=transcript_id, turns=tuple(turns), reference=ref), ref


def _draw_boundaries(rng: Random, m: int, topics: int, min_len: int) -> list[int]:
    if topics == 1:
        return []
    # rejection-free draw: pick segment lengths >= min_len summing to m
    slack = m - topics * min_len
    cuts = sorted(rng.sample(range(slack + topics - 1), topics - 1)) if slack + topics - 1 >= topics - 1 else []
    lengths = []
    prev = -1
    for c in cuts:
        lengths.append(c - prev - 1)
        prev = c
    lengths.append(slack + topics - 2 - prev)
    lengths = [min_len + extra for extra in lengths]
    boundaries = []
    acc = 0
    for seg_len in lengths[:-1]:
        acc += seg_len
        boundaries.append(acc)
    return boundaries


def _topic_assignment(m: int, boundaries: Iterable[int]) -> list[int]:
    topic_of = []
    topic = 0
    bset = set(boundaries)
    for i in range(1, m + 1):
        topic_of.append(topic)
        if i in bset:
            topic += 1
    return topic_of
