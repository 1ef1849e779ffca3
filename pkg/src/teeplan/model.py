"""Domain types shared by the planner, cost model, and simulator.

A network is a linear chain of layers; devices are partitioned into a
trusted set (enclaves) and an untrusted set (plain CPUs/GPUs).  A placement
assigns every layer to a device as an ordered list of contiguous segments.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import Mapping, Sequence


class ValidationError(Exception):
    """Structurally invalid input: bad placement, unknown device, missing data."""


class ShapeError(ValidationError):
    """Shape arithmetic produced an impossible tensor dimension."""


class InfeasiblePolicyError(Exception):
    """No candidate placement satisfies the active privacy policy."""


class LayerKind(str, Enum):
    CONV = "conv"
    POOL = "pool"
    RELU = "relu"
    FC = "fc"
    SOFTMAX = "softmax"
    OTHER = "other"


@dataclass(frozen=True)
class LayerSpec:
    """One layer of the chain plus its measured per-device cost.

    ``exec_time`` maps a device id to seconds per frame and already includes
    the time to encrypt the layer's output on that device.  ``kernel``,
    ``stride`` and ``padding`` are required for conv/pool layers;
    ``output_length`` for fc layers.  ``explicit_output_bytes`` and
    ``explicit_resolution`` override the shape-derived values, e.g. for
    flattened branchy architectures whose merge semantics the shape
    propagator cannot express.
    """

    index: int
    kind: LayerKind
    exec_time: Mapping[str, float]
    kernel: int | None = None
    stride: int | None = None
    padding: int | None = None
    out_channels: int | None = None
    output_length: int | None = None
    explicit_output_bytes: int | None = None
    explicit_resolution: tuple[int, int] | None = None

    def __post_init__(self) -> None:
        if self.index < 1:
            raise ValidationError(f"layer index must be >= 1, got {self.index}")
        if not self.exec_time:
            raise ValidationError(f"layer {self.index}: empty exec_time map")
        for dev, t in self.exec_time.items():
            if t <= 0:
                raise ValidationError(
                    f"layer {self.index}: non-positive exec_time {t} on {dev!r}"
                )
        if self.kind in (LayerKind.CONV, LayerKind.POOL):
            if self.kernel is None or self.stride is None or self.padding is None:
                raise ValidationError(
                    f"layer {self.index}: {self.kind.value} requires kernel, stride and padding"
                )
            if self.kernel < 1 or self.stride < 1 or self.padding < 0:
                raise ValidationError(
                    f"layer {self.index}: bad shape params k={self.kernel} "
                    f"s={self.stride} p={self.padding}"
                )
            if self.kind is LayerKind.CONV and self.out_channels is None:
                raise ValidationError(f"layer {self.index}: conv requires out_channels")
        if self.kind is LayerKind.FC:
            if self.output_length is None or self.output_length < 1:
                raise ValidationError(f"layer {self.index}: fc requires output_length >= 1")
        if self.explicit_resolution is not None:
            h, w = self.explicit_resolution
            if h < 1 or w < 1:
                raise ValidationError(f"layer {self.index}: resolution override must be >= 1x1")
        if self.explicit_output_bytes is not None and self.explicit_output_bytes < 1:
            raise ValidationError(f"layer {self.index}: output_bytes override must be >= 1")


@dataclass(frozen=True)
class NetworkProfile:
    """An ordered chain of layers plus the input frame geometry.

    The application graph is restricted to a linear chain: layer x feeds
    layer x+1 and nothing else.  Branching models must be flattened with
    explicit per-layer overrides before they reach the planner.
    """

    layers: tuple[LayerSpec, ...]
    input_height: int
    input_width: int
    input_channels: int
    bytes_per_element: int = 4
    name: str = "network"

    def __post_init__(self) -> None:
        if not self.layers:
            raise ValidationError("network has no layers")
        for pos, layer in enumerate(self.layers, start=1):
            if layer.index != pos:
                raise ValidationError(
                    f"layer indices must be consecutive 1..M; position {pos} has index {layer.index}"
                )
        if min(self.input_height, self.input_width, self.input_channels) < 1:
            raise ValidationError("input frame dimensions must be >= 1")
        if self.bytes_per_element < 1:
            raise ValidationError("bytes_per_element must be >= 1")

    @property
    def m(self) -> int:
        return len(self.layers)


@dataclass(frozen=True)
class ChunkSpec:
    """A batch of n consecutive frames over which one placement decision holds."""

    n: int

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValidationError(f"chunk size must be >= 1, got {self.n}")


@dataclass(frozen=True)
class Device:
    """A compute resource; a TEE and its co-located plain processor share a host."""

    id: str
    trusted: bool
    host: str


@dataclass(frozen=True)
class ResourceGraph:
    """Devices plus directed inter-host bandwidth in bytes per second.

    Transfers between devices on the same host take zero time unless
    ``intra_host_bandwidth`` is set.  The constructor is deliberately
    tolerant; call :func:`validate_resource_graph` to surface violations.
    """

    devices: tuple[Device, ...]
    bandwidth: Mapping[tuple[str, str], float] = field(default_factory=dict)
    intra_host_bandwidth: float | None = None

    @cached_property
    def _by_id(self) -> dict[str, Device]:
        return {d.id: d for d in self.devices}

    @cached_property
    def hosts(self) -> tuple[str, ...]:
        seen: dict[str, None] = {}
        for d in self.devices:
            seen.setdefault(d.host, None)
        return tuple(seen)

    @cached_property
    def trusted_ids(self) -> frozenset[str]:
        return frozenset(d.id for d in self.devices if d.trusted)

    @cached_property
    def untrusted_ids(self) -> frozenset[str]:
        return frozenset(d.id for d in self.devices if not d.trusted)

    def device(self, device_id: str) -> Device:
        try:
            return self._by_id[device_id]
        except KeyError:
            raise ValidationError(f"unknown device {device_id!r}") from None

    def is_trusted(self, device_id: str) -> bool:
        return self.device(device_id).trusted

    def host_of(self, device_id: str) -> str:
        return self.device(device_id).host

    def link_bandwidth(self, src_host: str, dst_host: str) -> float | None:
        return self.bandwidth.get((src_host, dst_host))


@dataclass(frozen=True)
class ValidationResult:
    ok: bool
    violations: tuple[str, ...] = ()


def validate_resource_graph(graph: ResourceGraph) -> ValidationResult:
    """Check a resource graph, returning violations as data rather than raising."""
    violations: list[str] = []
    seen: set[str] = set()
    for d in graph.devices:
        if not d.id:
            violations.append("empty device id")
        if d.id in seen:
            violations.append(f"duplicate device id {d.id!r}")
        seen.add(d.id)
        if not d.host:
            violations.append(f"device {d.id!r}: empty host")
    if not graph.devices:
        violations.append("no devices")
    hosts = set(graph.hosts)
    for (src, dst), bw in graph.bandwidth.items():
        if src not in hosts or dst not in hosts:
            violations.append(f"bandwidth entry ({src!r}, {dst!r}) references unknown host")
        if bw <= 0:
            violations.append(f"non-positive bandwidth on ({src!r}, {dst!r})")
    for src in graph.hosts:
        for dst in graph.hosts:
            if src != dst and (src, dst) not in graph.bandwidth:
                violations.append(f"missing bandwidth between hosts {src!r} and {dst!r}")
    if graph.intra_host_bandwidth is not None and graph.intra_host_bandwidth <= 0:
        violations.append("non-positive intra-host bandwidth")
    return ValidationResult(ok=not violations, violations=tuple(violations))


@dataclass(frozen=True)
class Segment:
    """Layers ``start..end`` (1-based, inclusive) assigned to one device."""

    start: int
    end: int
    device: str

    def __post_init__(self) -> None:
        if self.start < 1 or self.end < self.start:
            raise ValidationError(f"bad segment range {self.start}..{self.end}")

    @property
    def layers(self) -> range:
        return range(self.start, self.end + 1)


@dataclass(frozen=True)
class Placement:
    """A canonical assignment of the layer chain to devices.

    Segments must cover 1..M contiguously in order, and adjacent segments
    must sit on distinct devices; equal-device neighbours have to be merged
    (see :meth:`from_vector`) so each candidate has exactly one
    representation.
    """

    segments: tuple[Segment, ...]

    def __post_init__(self) -> None:
        if not self.segments:
            raise ValidationError("placement has no segments")
        if self.segments[0].start != 1:
            raise ValidationError("placement must start at layer 1")
        prev = self.segments[0]
        for seg in self.segments[1:]:
            if seg.start != prev.end + 1:
                raise ValidationError(
                    f"segments not contiguous: {prev.start}..{prev.end} then {seg.start}..{seg.end}"
                )
            if seg.device == prev.device:
                raise ValidationError("unmerged adjacent equal-device segments")
            prev = seg

    @classmethod
    def from_vector(cls, devices: Sequence[str]) -> "Placement":
        """Build the canonical placement from a per-layer device vector."""
        if not devices:
            raise ValidationError("empty device vector")
        segments: list[Segment] = []
        start = 1
        for x in range(2, len(devices) + 1):
            if devices[x - 1] != devices[x - 2]:
                segments.append(Segment(start, x - 1, devices[x - 2]))
                start = x
        segments.append(Segment(start, len(devices), devices[-1]))
        return cls(tuple(segments))

    @property
    def num_layers(self) -> int:
        return self.segments[-1].end

    @property
    def device_sequence(self) -> tuple[str, ...]:
        return tuple(seg.device for seg in self.segments)

    def expand(self, m: int) -> tuple[str, ...]:
        if self.segments[-1].end != m:
            raise ValidationError(
                f"placement covers 1..{self.segments[-1].end}, expected 1..{m}"
            )
        out: list[str] = []
        for seg in self.segments:
            out.extend([seg.device] * (seg.end - seg.start + 1))
        return tuple(out)

    def device_of(self, layer_index: int) -> str:
        for seg in self.segments:
            if seg.start <= layer_index <= seg.end:
                return seg.device
        raise ValidationError(f"layer {layer_index} not covered by placement")


def expand_placement(placement: Placement, m: int) -> tuple[str, ...]:
    """Per-layer device vector of ``placement`` over a chain of ``m`` layers."""
    return placement.expand(m)
