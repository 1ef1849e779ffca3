"""Analytic chunk-completion-time model for a placed, pipelined layer chain.

A placement decomposes into an alternating sequence of compute and transmit
stages.  With every frame available at time zero and each stage serving one
frame at a time, a chunk of n frames completes in

    sum(L_k) + (n - 1) * max(L_k)

over all stage latencies L_k: the first frame pays the full pipeline once,
then each further frame is released at the pace of the slowest stage.  For
a two-stage split whose first stage dominates this collapses to
n*L_1 + L_rest, and t_chunk(n)/n tends to the bottleneck latency as the
chunk grows.

All latencies are held in integer nanoseconds so the model and the
discrete-event simulator agree bit-for-bit; seconds-facing accessors divide
by 1e9.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .model import NetworkProfile, Placement, ResourceGraph, ValidationError
from .shapes import LayerSignature

NS_PER_SEC = 1_000_000_000

#: Per-boundary decryption cost inside the receiving enclave (2.5 ms).
DEFAULT_CRYPTO_OVERHEAD_S = 0.0025


def sec_to_ns(seconds: float) -> int:
    """Convert seconds to integer nanoseconds, rounding to nearest."""
    return round(seconds * NS_PER_SEC)


def ns_to_sec(ns: int) -> float:
    return ns / NS_PER_SEC


def transmit_ns(nbytes: int, bandwidth: float) -> int:
    """Transfer time for ``nbytes`` at ``bandwidth`` bytes/sec, nearest ns."""
    if bandwidth <= 0:
        raise ValidationError(f"non-positive bandwidth {bandwidth}")
    numerator = nbytes * NS_PER_SEC
    if isinstance(bandwidth, int) or float(bandwidth).is_integer():
        b = int(bandwidth)
        return (numerator + b // 2) // b
    return round(numerator / bandwidth)


class StageKind(str, Enum):
    COMPUTE = "compute"
    TRANSMIT = "transmit"


@dataclass(frozen=True)
class Stage:
    """One pipeline stage: a compute segment on a device, or a link transfer."""

    kind: StageKind
    latency_ns: int
    device: str | None = None  # compute stages
    link: tuple[str, str] | None = None  # (src_host, dst_host) for transmit stages
    layer_range: tuple[int, int] | None = None
    data_bytes: int | None = None

    def __post_init__(self) -> None:
        if self.latency_ns < 0:
            raise ValidationError("stage latency must be >= 0")
        if self.kind is StageKind.COMPUTE and self.device is None:
            raise ValidationError("compute stage needs a device")
        if self.kind is StageKind.TRANSMIT and self.link is None:
            raise ValidationError("transmit stage needs a (src_host, dst_host) link")

    @property
    def latency(self) -> float:
        return ns_to_sec(self.latency_ns)

    def label(self) -> str:
        if self.kind is StageKind.COMPUTE:
            return str(self.device)
        assert self.link is not None
        return f"{self.link[0]}->{self.link[1]}"


@dataclass(frozen=True)
class StagePlan:
    """Alternating compute/transmit stages; first and last are compute.

    ``crypto_overhead_ns`` records the per-boundary decryption cost that
    :func:`decompose` folded into receiving compute stages.
    """

    stages: tuple[Stage, ...]
    crypto_overhead_ns: int = sec_to_ns(DEFAULT_CRYPTO_OVERHEAD_S)

    def __post_init__(self) -> None:
        if not self.stages:
            raise ValidationError("stage plan has no stages")
        if self.stages[0].kind is not StageKind.COMPUTE:
            raise ValidationError("first stage must be a compute stage")
        if self.stages[-1].kind is not StageKind.COMPUTE:
            raise ValidationError("last stage must be a compute stage")
        for a, b in zip(self.stages, self.stages[1:]):
            if a.kind is StageKind.TRANSMIT and b.kind is StageKind.TRANSMIT:
                raise ValidationError("transmit stages must sit between compute stages")

    @property
    def latencies_ns(self) -> tuple[int, ...]:
        return tuple(stage.latency_ns for stage in self.stages)


def compute_plan(latencies_s: list[float] | tuple[float, ...], device: str = "dev") -> StagePlan:
    """Build a bare plan straight from stage latencies in seconds (test/CLI aid)."""
    stages = tuple(
        Stage(StageKind.COMPUTE, sec_to_ns(lat), device=f"{device}{i}")
        for i, lat in enumerate(latencies_s)
    )
    return StagePlan(stages)


def segment_compute_ns(net: NetworkProfile, start: int, end: int, device_id: str) -> int:
    """Sum of per-layer execution times on ``device_id``, each rounded to ns."""
    total = 0
    for x in range(start, end + 1):
        layer = net.layers[x - 1]
        try:
            t = layer.exec_time[device_id]
        except KeyError:
            raise ValidationError(
                f"missing exec_time for layer {x} on device {device_id!r}"
            ) from None
        total += sec_to_ns(t)
    return total


def _boundary_transmit(
    graph: ResourceGraph, src_dev: str, dst_dev: str, nbytes: int
) -> Stage | None:
    src_host = graph.host_of(src_dev)
    dst_host = graph.host_of(dst_dev)
    if src_host == dst_host:
        if graph.intra_host_bandwidth is None:
            return None
        bw: float = graph.intra_host_bandwidth
    else:
        link = graph.link_bandwidth(src_host, dst_host)
        if link is None:
            raise ValidationError(
                f"missing bandwidth for crossed host pair ({src_host!r}, {dst_host!r})"
            )
        bw = link
    return Stage(
        StageKind.TRANSMIT,
        transmit_ns(nbytes, bw),
        link=(src_host, dst_host),
        data_bytes=nbytes,
    )


def decompose(
    placement: Placement,
    graph: ResourceGraph,
    signatures: list[LayerSignature],
    net: NetworkProfile,
    crypto_overhead: float = DEFAULT_CRYPTO_OVERHEAD_S,
) -> StagePlan:
    """Turn a placement into its pipeline stages.

    One compute stage per segment; one transmit stage per inter-host
    boundary carrying the producing layer's output bytes.  Data leaving an
    enclave for another enclave must be decrypted on arrival, so the
    receiving compute stage is charged ``crypto_overhead`` once per such
    boundary; hand-offs to untrusted devices arrive in the clear (the
    dissimilarity rule already allows exposure) and cost nothing extra.
    """
    placement.expand(net.m)  # rejects coverage gaps up front
    if len(signatures) != net.m:
        raise ValidationError("signatures do not cover the network")
    overhead_ns = sec_to_ns(crypto_overhead)
    stages: list[Stage] = []
    prev_device: str | None = None
    for seg in placement.segments:
        device = graph.device(seg.device)  # raises on unknown device
        latency = segment_compute_ns(net, seg.start, seg.end, seg.device)
        if prev_device is not None:
            out_bytes = signatures[seg.start - 2].output_bytes
            transmit = _boundary_transmit(graph, prev_device, seg.device, out_bytes)
            if transmit is not None:
                stages.append(transmit)
            if graph.is_trusted(prev_device) and device.trusted:
                latency += overhead_ns
        stages.append(
            Stage(StageKind.COMPUTE, latency, device=seg.device, layer_range=(seg.start, seg.end))
        )
        prev_device = seg.device
    return StagePlan(tuple(stages), crypto_overhead_ns=overhead_ns)


def single_frame_latency_ns(plan: StagePlan) -> int:
    return sum(plan.latencies_ns)


def single_frame_latency(plan: StagePlan) -> float:
    """End-to-end latency of one frame: the sum of all stage latencies."""
    return ns_to_sec(single_frame_latency_ns(plan))


def chunk_completion_ns(plan: StagePlan, n: int) -> int:
    if n < 1:
        raise ValidationError(f"chunk size must be >= 1, got {n}")
    latencies = plan.latencies_ns
    return sum(latencies) + (n - 1) * max(latencies)


def chunk_completion(plan: StagePlan, n: int) -> float:
    """Completion time of n frames: sum(L_k) + (n-1) * max(L_k)."""
    return ns_to_sec(chunk_completion_ns(plan, n))


def bottleneck(plan: StagePlan) -> tuple[int, float]:
    """Index and latency of the slowest stage; ties go to the lowest index."""
    latencies = plan.latencies_ns
    idx = max(range(len(latencies)), key=lambda i: (latencies[i], -i))
    return idx, ns_to_sec(latencies[idx])
