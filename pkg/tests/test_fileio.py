import json

import pytest

from teeplan import Placement, Segment
from teeplan.fileio import (
    ParseError,
    bytes_per_sec_to_mbps,
    dumps,
    load_profile,
    load_resources,
    mbps_to_bytes_per_sec,
    ms_to_seconds,
    placement_from_dict,
    placement_to_dict,
    profile_from_dict,
    profile_to_dict,
    resources_from_dict,
    resources_to_dict,
    seconds_to_ms,
)
from teeplan.profiles import BUILTIN_NAMES, builtin_path, load_builtin

PROFILE_DOC = {
    "name": "sample",
    "frame": {"height": 224, "width": 224, "channels": 3},
    "bytes_per_element": 4,
    "layers": [
        {
            "index": 1,
            "kind": "conv",
            "kernel": 7,
            "stride": 2,
            "padding": 3,
            "out_channels": 8,
            "exec_time_ms": {"TEE_1": 140.0, "E_2": 46.1482},
        },
        {"index": 2, "kind": "relu", "exec_time_ms": {"TEE_1": 10.0, "E_2": 3.5}},
        {
            "index": 3,
            "kind": "fc",
            "output_length": 10,
            "output_bytes": 40,
            "resolution": [1, 1],
            "exec_time_ms": {"TEE_1": 60.0, "E_2": 20.0},
        },
    ],
}

RESOURCES_DOC = {
    "devices": [
        {"id": "TEE_1", "trusted": True, "host": "edge1"},
        {"id": "E_2", "trusted": False, "host": "edge2"},
    ],
    "links": [
        {"from": "edge1", "to": "edge2", "mbps": 30.0},
        {"from": "edge2", "to": "edge1", "mbps": 12.5},
    ],
}


class TestUnitConversions:
    def test_mbps_is_exactly_125000_bytes_per_sec(self):
        assert mbps_to_bytes_per_sec(1) == 125_000
        assert mbps_to_bytes_per_sec(30.0) == 3_750_000
        assert bytes_per_sec_to_mbps(3_750_000) == 30.0

    def test_ms_round_trips_through_seconds(self):
        for ms in (140.0, 0.001, 46.1482, 2.5, 5000.0, 3.0):
            assert seconds_to_ms(ms_to_seconds(ms)) == ms


class TestProfileRoundTrip:
    def test_parse_serialize_parse_is_identity(self):
        net = profile_from_dict(PROFILE_DOC)
        again = profile_from_dict(json.loads(dumps(profile_to_dict(net))))
        assert again == net

    def test_serialization_is_idempotent(self):
        net = profile_from_dict(PROFILE_DOC)
        once = dumps(profile_to_dict(net))
        twice = dumps(profile_to_dict(profile_from_dict(json.loads(once))))
        assert once == twice

    def test_overrides_survive(self):
        net = profile_from_dict(PROFILE_DOC)
        assert net.layers[2].explicit_output_bytes == 40
        assert net.layers[2].explicit_resolution == (1, 1)

    def test_missing_field_diagnostics(self):
        with pytest.raises(ParseError, match="missing field 'kind'"):
            profile_from_dict(
                {
                    "frame": {"height": 4, "width": 4, "channels": 1},
                    "layers": [{"index": 1, "exec_time_ms": {"a": 1}}],
                }
            )
        with pytest.raises(ParseError, match="unknown kind"):
            profile_from_dict(
                {
                    "frame": {"height": 4, "width": 4, "channels": 1},
                    "layers": [{"index": 1, "kind": "warp", "exec_time_ms": {"a": 1}}],
                }
            )


class TestResourcesRoundTrip:
    def test_parse_serialize_parse_is_identity(self):
        graph = resources_from_dict(RESOURCES_DOC)
        again = resources_from_dict(json.loads(dumps(resources_to_dict(graph))))
        assert again == graph
        assert graph.bandwidth[("edge1", "edge2")] == 3_750_000
        assert graph.bandwidth[("edge2", "edge1")] == 1_562_500

    def test_intra_host_bandwidth_round_trips(self):
        doc = dict(RESOURCES_DOC, intra_host_mbps=800)
        graph = resources_from_dict(doc)
        assert graph.intra_host_bandwidth == 100_000_000
        assert resources_to_dict(graph)["intra_host_mbps"] == 800.0

    def test_duplicate_link_rejected(self):
        doc = dict(RESOURCES_DOC)
        doc["links"] = RESOURCES_DOC["links"] + [RESOURCES_DOC["links"][0]]
        with pytest.raises(ParseError, match="duplicate entry"):
            resources_from_dict(doc)


class TestPlacementDocs:
    def test_round_trip(self):
        p = Placement((Segment(1, 6, "TEE_1"), Segment(7, 10, "TEE_2")))
        assert placement_from_dict(placement_to_dict(p)) == p

    def test_accepts_plan_json_shape(self):
        p = Placement((Segment(1, 2, "TEE_1"),))
        wrapped = {"best": {**placement_to_dict(p), "t_chunk_ns": 5}, "n": 3}
        assert placement_from_dict(wrapped) == p

    def test_non_canonical_segments_rejected(self):
        with pytest.raises(ParseError, match="unmerged"):
            placement_from_dict(
                {
                    "segments": [
                        {"layers": [1, 2], "device": "TEE_1"},
                        {"layers": [3, 4], "device": "TEE_1"},
                    ]
                }
            )


class TestBundledProfiles:
    def test_all_builtins_load_and_validate(self):
        from teeplan import validate_resource_graph

        for name in BUILTIN_NAMES:
            net, graph = load_builtin(name)
            assert net.m >= 5
            assert validate_resource_graph(graph).ok

    def test_bundled_files_are_in_canonical_form(self):
        # the files on disk are byte-identical to their own re-serialization
        for name in BUILTIN_NAMES:
            path = builtin_path(name, "profile")
            with open(path, encoding="utf-8") as f:
                text = f.read()
            assert dumps(profile_to_dict(load_profile(path))) == text
            path = builtin_path(name, "resources")
            with open(path, encoding="utf-8") as f:
                text = f.read()
            assert dumps(resources_to_dict(load_resources(path))) == text
