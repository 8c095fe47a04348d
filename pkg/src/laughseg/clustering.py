"""1-D clustering of laughter turn indices.

Two methods: agglomerative hierarchical clustering with an
inconsistency-coefficient cutoff, and K-medoids with most-central
initialization and alternating refinement. Both are deterministic: every
tie is broken toward the smaller value or node id.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence


class ClusteringError(Exception):
    pass


@dataclass(frozen=True)
class LinkageTree:
    """Agglomerative merge history.

    Leaves are node ids 1..n_leaves (in input order); the k-th merge
    (0-based position k in `merges`) creates node id n_leaves + 1 + k.
    Each merge is (left_id, right_id, height) with left_id < right_id.
    """
    n_leaves: int
    merges: tuple[tuple[int, int, float], ...]


@dataclass(frozen=True)
class Clustering:
    """Cluster labels 1..k for each input position, plus a method tag."""
    labels: tuple[int, ...]
    k: int
    method: str

    def members(self) -> list[list[int]]:
        """Positions (0-based) per cluster, ordered by label."""
        out: list[list[int]] = [[] for _ in range(self.k)]
        for pos, lab in enumerate(self.labels):
            out[lab - 1].append(pos)
        return out


@dataclass(frozen=True)
class MedoidState:
    medoids: tuple[float, ...]
    labels: tuple[int, ...]
    cost: float
    n_iterations: int
    cost_history: tuple[float, ...] = ()

    def to_clustering(self) -> Clustering:
        return Clustering(labels=self.labels, k=len(self.medoids),
                          method="kmedoids")


def linkage_average(points: Sequence[float]) -> LinkageTree:
    """Average-linkage agglomerative clustering of 1-D points.

    Inter-cluster distance is the mean of all pairwise |x_i - x_j|.
    At each step the pair with minimal distance merges; ties break by the
    smaller (left id, right id).
    """
    n = len(points)
    if n == 0:
        raise ClusteringError("linkage_average needs at least one point")
    # active clusters: id -> (sum of member values, member count)
    active: dict[int, tuple[float, int]] = {
        i + 1: (float(points[i]), 1) for i in range(n)}
    # pairwise average distance in 1-D is not just |mean difference|, so keep
    # explicit members for the distance computation
    members: dict[int, list[float]] = {i + 1: [float(points[i])] for i in range(n)}
    merges = []
    next_id = n + 1
    while len(active) > 1:
        best = None
        ids = sorted(active)
        for ai in range(len(ids)):
            for bi in range(ai + 1, len(ids)):
                a, b = ids[ai], ids[bi]
                ma, mb = members[a], members[b]
                d = sum(abs(x - y) for x in ma for y in mb) / (len(ma) * len(mb))
                key = (d, a, b)
                if best is None or key < best:
                    best = key
        d, a, b = best
        merges.append((a, b, d))
        members[next_id] = members.pop(a) + members.pop(b)
        del active[a], active[b]
        active[next_id] = (0.0, 0)
        next_id += 1
    return LinkageTree(n_leaves=n, merges=tuple(merges))


def inconsistency(tree: LinkageTree, depth: int = 2) -> list[float]:
    """Per-merge inconsistency coefficients.

    For merge k with height h_k, take the heights of all merges within
    `depth` levels below and including k; the coefficient is
    (h_k - mean) / sample_std, or 0 when the std is 0 (including the
    single-link case).
    """
    if depth < 1:
        raise ClusteringError(f"depth must be >= 1, got {depth}")
    n = tree.n_leaves
    coeffs = []
    for k, (_, _, height) in enumerate(tree.merges):
        heights = _link_heights_below(tree, n + 1 + k, depth)
        mean = sum(heights) / len(heights)
        if len(heights) < 2:
            coeffs.append(0.0)
            continue
        var = sum((h - mean) ** 2 for h in heights) / (len(heights) - 1)
        std = math.sqrt(var)
        coeffs.append(0.0 if std == 0.0 else (height - mean) / std)
    return coeffs


def _link_heights_below(tree: LinkageTree, node_id: int, depth: int) -> list[float]:
    heights: list[float] = []
    stack = [(node_id, 1)]
    while stack:
        nid, level = stack.pop()
        if nid <= tree.n_leaves or level > depth:
            continue
        left, right, height = tree.merges[nid - tree.n_leaves - 1]
        heights.append(height)
        stack.append((left, level + 1))
        stack.append((right, level + 1))
    return heights


def cut_by_inconsistency(tree: LinkageTree, depth: int = 2,
                         cutoff_override: float | None = None) -> Clustering:
    """Cut a linkage tree at floor(max inconsistency).

    Clusters are the maximal subtrees whose internal merges all have
    coefficient <= cutoff. With cutoff 0 and a fully consistent tree this
    yields a single cluster. Labels are assigned 1..k by smallest leaf
    position.
    """
    n = tree.n_leaves
    if n == 1:
        return Clustering(labels=(1,), k=1, method="agglo")
    coeffs = inconsistency(tree, depth)
    cutoff = math.floor(max(coeffs)) if cutoff_override is None else cutoff_override

    leaf_sets: dict[int, list[int]] = {i + 1: [i] for i in range(n)}
    consistent: dict[int, bool] = {}
    for k, (left, right, _) in enumerate(tree.merges):
        nid = n + 1 + k
        leaf_sets[nid] = leaf_sets[left] + leaf_sets[right]
        consistent[nid] = (coeffs[k] <= cutoff
                           and consistent.get(left, True)
                           and consistent.get(right, True))

    clusters: list[list[int]] = []
    stack = [n + len(tree.merges)]  # root id
    while stack:
        nid = stack.pop()
        if nid <= n or consistent[nid]:
            clusters.append(sorted(leaf_sets[nid]))
        else:
            left, right, _ = tree.merges[nid - n - 1]
            stack.extend((left, right))
    clusters.sort(key=lambda c: c[0])
    labels = [0] * n
    for lab, cluster in enumerate(clusters, start=1):
        for pos in cluster:
            labels[pos] = lab
    return Clustering(labels=tuple(labels), k=len(clusters), method="agglo")


def park_jun_init(points: Sequence[float], k: int) -> list[float]:
    """Initial medoids: the k points with smallest total L1 distance to all
    others (the "most middle" objects), ties toward the smaller value."""
    n = len(points)
    if not 1 <= k <= n:
        raise ClusteringError(f"k={k} out of range for {n} points")
    totals = [(sum(abs(x - y) for y in points), x) for x in points]
    totals.sort()
    return sorted(x for _, x in totals[:k])


def kmedoids(points: Sequence[float], k: int,
             initial_medoids: Sequence[float] | None = None) -> MedoidState:
    """K-medoids on 1-D values with L1 cost and alternating refinement.

    Starts from the most-central initialization, then alternates
    (a) assigning each point to its nearest medoid (tie: lower medoid) and
    (b) moving each medoid to the member minimizing the within-cluster L1
    sum (tie: lower value), until the assignment is stable.
    """
    n = len(points)
    if not 1 <= k <= n:
        raise ClusteringError(f"k={k} out of range for {n} points")
    xs = [float(x) for x in points]
    medoids = (sorted(float(m) for m in initial_medoids)
               if initial_medoids is not None else park_jun_init(xs, k))
    if len(set(medoids)) != k:
        raise ClusteringError("initial medoids must be k distinct values")

    labels: tuple[int, ...] = ()
    history = []
    max_iterations = n * k + 1
    for iteration in range(1, max_iterations + 1):
        new_labels = tuple(_nearest(medoids, x) for x in xs)
        if new_labels == labels:
            break
        labels = new_labels
        centers = [_l1_center([x for x, lab in zip(xs, labels)
                               if lab == c + 1]) for c in range(k)]
        medoids = [m if c is None else c for c, m in zip(centers, medoids)]
        history.append(sum(abs(x - medoids[lab - 1])
                           for x, lab in zip(xs, labels)))
    cost = sum(abs(x - medoids[lab - 1]) for x, lab in zip(xs, labels))
    return MedoidState(medoids=tuple(medoids), labels=labels, cost=cost,
                       n_iterations=iteration, cost_history=tuple(history))


def _nearest(medoids: Sequence[float], x: float) -> int:
    best = min(range(len(medoids)),
               key=lambda c: (abs(x - medoids[c]), medoids[c]))
    return best + 1


def _l1_center(members: list[float]) -> float | None:
    """Member minimizing the within-cluster L1 sum; tie toward lower value."""
    if not members:
        return None
    return min(sorted(members),
               key=lambda m: sum(abs(m - y) for y in members))
