import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from laughseg.clustering import Clustering
from laughseg.segcore import (Segmentation, SegmentationError, check, clump,
                              clusters_to_segmentation, from_json, to_json,
                              validate)
from conftest import BMR026_CLUSTERS, BMR026_LAUGHTER, BMR026_TURNS

increasing = st.lists(st.integers(1, 400), min_size=0, max_size=200,
                      unique=True).map(sorted)


class TestClump:
    def test_runs_collapse_to_last(self):
        assert clump([5, 6, 7, 20, 21, 40]) == [7, 21, 40]

    def test_no_adjacency_unchanged(self):
        assert clump([3, 10, 50]) == [3, 10, 50]

    def test_empty(self):
        assert clump([]) == []

    def test_single(self):
        assert clump([9]) == [9]

    def test_whole_run(self):
        assert clump([1, 2, 3, 4, 5]) == [5]

    @given(increasing)
    @settings(max_examples=200, deadline=None)
    def test_properties(self, xs):
        out = clump(xs)
        assert out == clump(out)                      # idempotent
        assert set(out) <= set(xs)                    # subset
        assert len(out) <= len(xs)
        assert out == sorted(out)
        if xs:
            assert out[-1] == xs[-1]                  # last element kept
        # every maximal run's last element survives, nothing else
        expected = [x for i, x in enumerate(xs)
                    if i + 1 == len(xs) or xs[i + 1] != x + 1]
        assert out == expected


def partition_to_clustering(partition, points):
    position = {p: i for i, p in enumerate(points)}
    labels = [0] * len(points)
    for lab, cluster in enumerate(partition, start=1):
        for value in cluster:
            labels[position[value]] = lab
    return Clustering(labels=tuple(labels), k=len(partition), method="agglo")


class TestClustersToSegmentation:
    def test_reference_partition_boundaries(self):
        clustering = partition_to_clustering(BMR026_CLUSTERS, BMR026_LAUGHTER)
        seg = clusters_to_segmentation(clustering, BMR026_LAUGHTER,
                                       BMR026_TURNS)
        assert seg.boundaries == (34, 109, 159, 175, 187, 237, 341)

    def test_singleton_cluster_no_boundary(self):
        clustering = Clustering(labels=(1,), k=1, method="agglo")
        seg = clusters_to_segmentation(clustering, [7], 20)
        assert seg.boundaries == ()
        assert seg.n_segments == 1

    def test_boundary_at_final_unit_clamped(self):
        clustering = Clustering(labels=(1, 1), k=1, method="agglo")
        seg = clusters_to_segmentation(clustering, [8, 10], 10)
        assert seg.boundaries == ()

    def test_m_too_small_rejected(self):
        clustering = Clustering(labels=(1, 1), k=1, method="agglo")
        with pytest.raises(SegmentationError):
            clusters_to_segmentation(clustering, [8, 10], 9)

    def test_label_count_mismatch_rejected(self):
        clustering = Clustering(labels=(1, 1), k=1, method="agglo")
        with pytest.raises(SegmentationError):
            clusters_to_segmentation(clustering, [8], 9)

    def test_at_most_k_boundaries_all_cluster_maxima(self):
        partition = [[1, 2], [10], [20, 30], [40, 41, 42]]
        points = sorted(x for c in partition for x in c)
        clustering = partition_to_clustering(partition, points)
        seg = clusters_to_segmentation(clustering, points, 50)
        assert len(seg.boundaries) <= clustering.k
        maxima = {max(c) for c in partition}
        assert set(seg.boundaries) <= maxima


class TestValidate:
    def test_ok(self):
        seg = Segmentation(n_units=8, boundaries=(2, 5), method="agglo")
        assert validate(seg) is seg
        assert seg.n_segments == 3
        assert seg.segment_lengths() == [2, 3, 3]

    def test_duplicate_flagged(self):
        problems = check(Segmentation(n_units=9, boundaries=(3, 3)))
        assert any("duplicate" in p for p in problems)

    def test_boundary_at_m_flagged(self):
        problems = check(Segmentation(n_units=8, boundaries=(8,)))
        assert any("not below" in p for p in problems)

    def test_boundary_zero_flagged(self):
        problems = check(Segmentation(n_units=8, boundaries=(0, 2)))
        assert any("below 1" in p for p in problems)

    def test_unknown_method_flagged(self):
        problems = check(Segmentation(n_units=8, boundaries=(), method="zig"))
        assert any("method" in p for p in problems)

    def test_validate_raises_with_all_violations(self):
        with pytest.raises(SegmentationError) as err:
            validate(Segmentation(n_units=5, boundaries=(0, 0, 7)))
        message = str(err.value)
        assert "below 1" in message and "not below" in message


class TestSerialization:
    def test_round_trip(self):
        seg = Segmentation(n_units=12, boundaries=(4, 9), method="hybrid")
        assert from_json(to_json(seg)) == seg

    def test_invalid_rejected_on_parse(self):
        bad = b'{"n_units": 5, "boundaries": [9], "method": "agglo"}'
        with pytest.raises(SegmentationError):
            from_json(bad)
