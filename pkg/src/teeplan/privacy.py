"""Admissibility checks for candidate placements.

A placement is admissible when every layer runs inside an enclave (the
trusted-only rule), or, when the policy allows it, every layer handed to an
untrusted device only ever sees inputs whose resolution is strictly below
the threshold on both axes (the dissimilarity rule).
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .model import Placement, ResourceGraph, ValidationError
from .shapes import LayerSignature, input_resolution


class PolicyMode(str, Enum):
    C1_ONLY = "c1"
    C2_ALLOWED = "c2"


@dataclass(frozen=True)
class PrivacyPolicy:
    """Resolution threshold in pixels per axis plus the admissibility mode."""

    delta: int = 20
    mode: PolicyMode = PolicyMode.C2_ALLOWED

    def __post_init__(self) -> None:
        if self.delta < 1:
            raise ValidationError(f"delta must be >= 1, got {self.delta}")


@dataclass(frozen=True)
class LeakageReport:
    """Worst-case exposure of a placement to untrusted devices.

    ``max_similarity`` is the largest input-resolution axis over layers
    placed on untrusted devices (0 when there are none);
    ``violating_layers`` lists the layers whose input is not strictly below
    the threshold on both axes.
    """

    max_similarity: int
    violating_layers: tuple[int, ...] = ()


def check_c1(placement: Placement, graph: ResourceGraph) -> bool:
    """True iff every layer is placed on a trusted device."""
    return all(graph.is_trusted(seg.device) for seg in placement.segments)


def check_c2(
    placement: Placement,
    graph: ResourceGraph,
    signatures: list[LayerSignature],
    policy: PrivacyPolicy,
) -> LeakageReport:
    """Audit what each untrusted device gets to see.

    For every layer on an untrusted device, the input to that layer (the
    producing layer's output; the raw frame for layer 1) must be strictly
    below ``delta`` on both axes.
    """
    vector = placement.expand(len(signatures))
    max_sim = 0
    violators: list[int] = []
    for x, device_id in enumerate(vector, start=1):
        if graph.is_trusted(device_id):
            continue
        h, w = input_resolution(signatures, x)
        max_sim = max(max_sim, h, w)
        if not (h < policy.delta and w < policy.delta):
            violators.append(x)
    return LeakageReport(max_similarity=max_sim, violating_layers=tuple(violators))


def admissible(
    placement: Placement,
    graph: ResourceGraph,
    signatures: list[LayerSignature],
    policy: PrivacyPolicy,
) -> bool:
    """A placement needs to satisfy at least one of the two privacy rules."""
    if check_c1(placement, graph):
        return True
    if policy.mode is not PolicyMode.C2_ALLOWED:
        return False
    return not check_c2(placement, graph, signatures, policy).violating_layers
