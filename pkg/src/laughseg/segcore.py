"""Linear segmentations, boundary clumping, and cluster-to-boundary conversion."""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Sequence

from .clustering import Clustering


class SegmentationError(Exception):
    pass


METHODS = ("agglo", "kmedoids", "bestcluster", "bayes", "hybrid", "reference")


@dataclass(frozen=True)
class Segmentation:
    """Partition of turns 1..n_units into contiguous segments.

    `boundaries` holds strictly increasing after-turn indices in
    [1, n_units - 1]; segment count is len(boundaries) + 1.
    """
    n_units: int
    boundaries: tuple[int, ...]
    method: str = "reference"

    @property
    def n_segments(self) -> int:
        return len(self.boundaries) + 1

    def segment_lengths(self) -> list[int]:
        edges = (0,) + self.boundaries + (self.n_units,)
        return [b - a for a, b in zip(edges, edges[1:])]


def check(seg: Segmentation) -> list[str]:
    """All invariant violations of a Segmentation, empty when valid."""
    problems = []
    if seg.n_units < 1:
        problems.append(f"n_units must be >= 1, got {seg.n_units}")
    if seg.method not in METHODS:
        problems.append(f"unknown method tag {seg.method!r}")
    seen = set()
    for b in seg.boundaries:
        if b in seen:
            problems.append(f"duplicate boundary {b}")
        seen.add(b)
        if b < 1:
            problems.append(f"boundary {b} below 1")
        elif b >= seg.n_units:
            problems.append(f"boundary {b} not below n_units={seg.n_units}")
    for a, b in zip(seg.boundaries, seg.boundaries[1:]):
        if b < a:
            problems.append(f"boundaries out of order at {b}")
    return problems


def validate(seg: Segmentation) -> Segmentation:
    """Raise SegmentationError listing every violated invariant."""
    problems = check(seg)
    if problems:
        raise SegmentationError("; ".join(problems))
    return seg


def clump(indices: Sequence[int]) -> list[int]:
    """Collapse each maximal run of consecutive integers to its last element.

    [5, 6, 7, 20, 21, 40] -> [7, 21, 40]. Input must be strictly
    increasing; output is strictly increasing, a subset of the input, and
    the operation is idempotent.
    """
    out = []
    for pos, value in enumerate(indices):
        if pos + 1 == len(indices) or indices[pos + 1] != value + 1:
            out.append(value)
    return out


def clusters_to_segmentation(clustering: Clustering, points: Sequence[int],
                             n_units: int, method: str = "agglo") -> Segmentation:
    """Turn laughter clusters into topic boundaries.

    Each cluster with >= 2 members marks shared laughter and emits a
    boundary after its maximum turn index; singletons (solo laughter) emit
    nothing. A boundary at or past the final unit is dropped.
    """
    if points and n_units < max(points):
        raise SegmentationError(
            f"n_units={n_units} smaller than max point {max(points)}")
    if len(clustering.labels) != len(points):
        raise SegmentationError(
            f"clustering covers {len(clustering.labels)} positions for "
            f"{len(points)} points")
    boundaries = set()
    for member_positions in clustering.members():
        if len(member_positions) >= 2:
            b = max(points[pos] for pos in member_positions)
            if b < n_units:
                boundaries.add(b)
    return validate(Segmentation(n_units=n_units,
                                 boundaries=tuple(sorted(boundaries)),
                                 method=method))


def to_json(seg: Segmentation) -> bytes:
    return (json.dumps({"n_units": seg.n_units,
                        "boundaries": list(seg.boundaries),
                        "method": seg.method}, sort_keys=True) + "\n").encode()


def from_json(data: bytes) -> Segmentation:
    rec = json.loads(data.decode("utf-8"))
    try:
        seg = Segmentation(n_units=rec["n_units"],
                           boundaries=tuple(rec["boundaries"]),
                           method=rec.get("method", "reference"))
    except KeyError as exc:
        raise SegmentationError(f"missing field {exc}") from exc
    return validate(seg)
