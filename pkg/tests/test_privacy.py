import pytest

from teeplan import (
    Placement,
    PolicyMode,
    PrivacyPolicy,
    Segment,
    ValidationError,
    admissible,
    check_c1,
    check_c2,
    propagate_shapes,
)

from conftest import opaque_chain

# 4 layers: outputs 30x30 until layer 2, 14x14 from layer 3 on
TIMES = {"TEE_1": [0.1] * 4, "TEE_2": [0.1] * 4, "E_1": [0.1] * 4, "E_2": [0.1] * 4}
RES = [(30, 30), (30, 30), (14, 14), (14, 14)]


@pytest.fixture
def net():
    return opaque_chain(TIMES, RES)


@pytest.fixture
def sigs(net):
    return propagate_shapes(net)


POLICY = PrivacyPolicy(delta=20)


def seg(*pairs):
    return Placement(tuple(Segment(a, b, d) for a, b, d in pairs))


class TestC1:
    def test_all_on_one_enclave(self, two_host_graph):
        assert check_c1(seg((1, 4, "TEE_1")), two_host_graph)

    def test_two_enclaves(self, two_host_graph):
        assert check_c1(seg((1, 2, "TEE_1"), (3, 4, "TEE_2")), two_host_graph)

    def test_any_untrusted_member_fails(self, two_host_graph):
        assert not check_c1(seg((1, 3, "TEE_1"), (4, 4, "E_2")), two_host_graph)

    def test_unknown_device_is_structural_error(self, two_host_graph):
        with pytest.raises(ValidationError, match="unknown device"):
            check_c1(seg((1, 4, "GHOST")), two_host_graph)


class TestC2:
    def test_raw_frame_on_untrusted_is_a_violation(self, two_host_graph, sigs):
        report = check_c2(seg((1, 4, "E_1")), two_host_graph, sigs, POLICY)
        assert 1 in report.violating_layers
        assert report.max_similarity == 224

    def test_sub_threshold_handoff_is_clean(self, two_host_graph, sigs):
        # layer 4's input is layer 3's 14x14 output
        report = check_c2(seg((1, 3, "TEE_1"), (4, 4, "E_2")), two_host_graph, sigs, POLICY)
        assert report.violating_layers == ()
        assert report.max_similarity == 14

    def test_all_trusted_is_vacuous(self, two_host_graph, sigs):
        report = check_c2(seg((1, 2, "TEE_1"), (3, 4, "TEE_2")), two_host_graph, sigs, POLICY)
        assert report.violating_layers == ()
        assert report.max_similarity == 0

    def test_boundary_resolution_is_strict(self, two_host_graph, sigs):
        # input to layer 3 is 30x30: not strictly below 30
        at30 = PrivacyPolicy(delta=30)
        report = check_c2(seg((1, 2, "TEE_1"), (3, 4, "E_2")), two_host_graph, sigs, at30)
        assert 3 in report.violating_layers
        clean = check_c2(
            seg((1, 2, "TEE_1"), (3, 4, "E_2")), two_host_graph, sigs, PrivacyPolicy(delta=31)
        )
        assert clean.violating_layers == ()


class TestAdmissible:
    def test_two_enclave_split_under_both_modes(self, two_host_graph, sigs):
        p = seg((1, 2, "TEE_1"), (3, 4, "TEE_2"))
        for mode in PolicyMode:
            assert admissible(p, two_host_graph, sigs, PrivacyPolicy(delta=20, mode=mode))

    def test_sub_threshold_split_depends_on_mode(self, two_host_graph, sigs):
        p = seg((1, 3, "TEE_1"), (4, 4, "E_2"))
        assert admissible(p, two_host_graph, sigs, PrivacyPolicy(mode=PolicyMode.C2_ALLOWED))
        assert not admissible(p, two_host_graph, sigs, PrivacyPolicy(mode=PolicyMode.C1_ONLY))

    def test_monotone_in_delta(self, two_host_graph, sigs):
        p = seg((1, 2, "TEE_1"), (3, 4, "E_2"))
        admitted = [
            delta
            for delta in range(1, 200)
            if admissible(p, two_host_graph, sigs, PrivacyPolicy(delta=delta))
        ]
        # once admissible, stays admissible for every larger threshold
        assert admitted == list(range(admitted[0], 200)) if admitted else True
        assert admitted and admitted[0] == 31

    def test_trusted_placement_admissible_at_any_threshold(self, two_host_graph, sigs):
        p = seg((1, 4, "TEE_1"))
        for delta in (1, 2, 20, 1000):
            assert admissible(p, two_host_graph, sigs, PrivacyPolicy(delta=delta))

    def test_report_ignores_which_enclave_holds_trusted_layers(self, two_host_graph, sigs):
        a = seg((1, 3, "TEE_1"), (4, 4, "E_2"))
        b = seg((1, 2, "TEE_1"), (3, 3, "TEE_2"), (4, 4, "E_2"))
        ra = check_c2(a, two_host_graph, sigs, POLICY)
        rb = check_c2(b, two_host_graph, sigs, POLICY)
        assert ra == rb
