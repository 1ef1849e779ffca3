import pytest
from hypothesis import given
from hypothesis import strategies as st

from teeplan import (
    ChunkSpec,
    Placement,
    Segment,
    ValidationError,
    expand_placement,
    validate_resource_graph,
)

from conftest import make_graph


def test_chunk_spec_requires_at_least_one_frame():
    assert ChunkSpec(1).n == 1
    with pytest.raises(ValidationError):
        ChunkSpec(0)


class TestResourceGraphValidation:
    def test_two_host_setup_is_ok(self, two_host_graph):
        assert validate_resource_graph(two_host_graph).ok

    def test_single_trusted_device_without_links_is_ok(self):
        graph = make_graph([("TEE_1", True, "hostA")])
        assert validate_resource_graph(graph).ok

    def test_zero_bandwidth_is_flagged(self):
        graph = make_graph(
            [("TEE_1", True, "hostA"), ("TEE_2", True, "hostB")],
            links={("hostA", "hostB"): 0, ("hostB", "hostA"): 30},
        )
        result = validate_resource_graph(graph)
        assert not result.ok
        assert any("non-positive bandwidth" in v for v in result.violations)

    def test_duplicate_ids_are_flagged(self):
        graph = make_graph([("TEE_1", True, "hostA"), ("TEE_1", False, "hostA")])
        result = validate_resource_graph(graph)
        assert any("duplicate device id" in v for v in result.violations)

    def test_missing_link_between_hosts_is_flagged(self):
        graph = make_graph(
            [("TEE_1", True, "hostA"), ("TEE_2", True, "hostB")],
            links={("hostA", "hostB"): 30},  # reverse direction missing
        )
        result = validate_resource_graph(graph)
        assert any("missing bandwidth" in v for v in result.violations)

    def test_trusted_untrusted_partition_is_total(self, two_host_graph):
        ids = {d.id for d in two_host_graph.devices}
        assert two_host_graph.trusted_ids | two_host_graph.untrusted_ids == ids
        assert not two_host_graph.trusted_ids & two_host_graph.untrusted_ids


class TestPlacement:
    def test_expand_single_segment(self):
        p = Placement((Segment(1, 3, "TEE_1"),))
        assert expand_placement(p, 3) == ("TEE_1", "TEE_1", "TEE_1")

    def test_expand_two_segments(self):
        p = Placement((Segment(1, 2, "TEE_1"), Segment(3, 4, "TEE_2")))
        assert expand_placement(p, 4) == ("TEE_1", "TEE_1", "TEE_2", "TEE_2")

    def test_unmerged_equal_device_segments_rejected(self):
        with pytest.raises(ValidationError, match="unmerged adjacent equal-device"):
            Placement((Segment(1, 1, "TEE_1"), Segment(2, 2, "TEE_1")))

    def test_gap_rejected(self):
        with pytest.raises(ValidationError, match="not contiguous"):
            Placement((Segment(1, 2, "TEE_1"), Segment(4, 5, "TEE_2")))

    def test_overlap_rejected(self):
        with pytest.raises(ValidationError, match="not contiguous"):
            Placement((Segment(1, 3, "TEE_1"), Segment(3, 4, "TEE_2")))

    def test_must_start_at_layer_one(self):
        with pytest.raises(ValidationError, match="start at layer 1"):
            Placement((Segment(2, 3, "TEE_1"),))

    def test_expand_checks_coverage(self):
        p = Placement((Segment(1, 3, "TEE_1"),))
        with pytest.raises(ValidationError, match="covers 1..3"):
            p.expand(5)

    @given(
        st.lists(st.sampled_from(["a", "b", "c"]), min_size=1, max_size=12)
    )
    def test_from_vector_expand_round_trip(self, vector):
        p = Placement.from_vector(vector)
        assert list(p.expand(len(vector))) == vector
        # canonical: re-segmenting the expansion is the identity
        assert Placement.from_vector(p.expand(len(vector))) == p

    @given(
        st.lists(st.sampled_from(["a", "b", "c"]), min_size=1, max_size=12)
    )
    def test_segments_partition_layer_range(self, vector):
        p = Placement.from_vector(vector)
        covered = [x for seg in p.segments for x in seg.layers]
        assert covered == list(range(1, len(vector) + 1))
