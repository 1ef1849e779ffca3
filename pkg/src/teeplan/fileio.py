"""JSON file formats for network profiles, resource graphs, and placements.

Files carry milliseconds and megabits per second; the in-memory model works
in seconds and bytes per second, with all arithmetic downstream done in
integer nanoseconds.  Conversions are exact: 1 Mbps = 125000 bytes/sec, and
millisecond values round-trip through round(ms * 1e6) nanoseconds.

Profile document::

    {
      "name": "...",
      "frame": {"height": 224, "width": 224, "channels": 3},
      "bytes_per_element": 4,
      "layers": [
        {"index": 1, "kind": "conv", "kernel": 11, "stride": 4, "padding": 2,
         "out_channels": 96, "exec_time_ms": {"TEE_1": 140.0, "E_2": 48.0}},
        {"index": 2, "kind": "fc", "output_length": 1000, "exec_time_ms": {...},
         "output_bytes": 4000, "resolution": [1, 1]}
      ]
    }

Resource document::

    {
      "devices": [{"id": "TEE_1", "trusted": true, "host": "edge1"}, ...],
      "links": [{"from": "edge1", "to": "edge2", "mbps": 30.0}, ...],
      "intra_host_mbps": null
    }

Placement document::

    {"segments": [{"layers": [1, 6], "device": "TEE_1"}, ...]}

``load_placement`` also accepts the JSON emitted by ``plan --json`` (the
segments under the ``best`` key).
"""

from __future__ import annotations

import json
from typing import Any

from .model import (
    Device,
    LayerKind,
    LayerSpec,
    NetworkProfile,
    Placement,
    ResourceGraph,
    Segment,
    ValidationError,
)

MBPS_TO_BYTES_PER_SEC = 125_000


class ParseError(ValidationError):
    """Malformed input document; the message names the offending field."""


def ms_to_seconds(ms: float) -> float:
    return round(ms * 1e6) / 1e9


def seconds_to_ms(seconds: float) -> float:
    return round(seconds * 1e9) / 1e6


def mbps_to_bytes_per_sec(mbps: float) -> float:
    bw = mbps * MBPS_TO_BYTES_PER_SEC
    return int(bw) if float(bw).is_integer() else bw


def bytes_per_sec_to_mbps(bw: float) -> float:
    return bw / MBPS_TO_BYTES_PER_SEC


def _require(doc: dict, key: str, where: str) -> Any:
    if key not in doc:
        raise ParseError(f"{where}: missing field {key!r}")
    return doc[key]


def _as_int(value: Any, where: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ParseError(f"{where}: expected integer, got {value!r}")
    return value


# ---------------------------------------------------------------------------
# profiles


def profile_from_dict(doc: dict) -> NetworkProfile:
    frame = _require(doc, "frame", "profile")
    layers_doc = _require(doc, "layers", "profile")
    if not isinstance(layers_doc, list) or not layers_doc:
        raise ParseError("profile: 'layers' must be a non-empty list")
    layers = []
    for i, entry in enumerate(layers_doc, start=1):
        where = f"layer {entry.get('index', i)}"
        kind_name = _require(entry, "kind", where)
        try:
            kind = LayerKind(kind_name)
        except ValueError:
            raise ParseError(f"{where}: unknown kind {kind_name!r}") from None
        exec_ms = _require(entry, "exec_time_ms", where)
        if not isinstance(exec_ms, dict) or not exec_ms:
            raise ParseError(f"{where}: 'exec_time_ms' must be a non-empty object")
        exec_time = {dev: ms_to_seconds(float(ms)) for dev, ms in exec_ms.items()}
        padding = entry.get("padding")
        if padding is None and kind in (LayerKind.CONV, LayerKind.POOL):
            padding = 0
        resolution = entry.get("resolution")
        if resolution is not None:
            resolution = (int(resolution[0]), int(resolution[1]))
        try:
            layers.append(
                LayerSpec(
                    index=_as_int(_require(entry, "index", where), where),
                    kind=kind,
                    exec_time=exec_time,
                    kernel=entry.get("kernel"),
                    stride=entry.get("stride"),
                    padding=padding,
                    out_channels=entry.get("out_channels"),
                    output_length=entry.get("output_length"),
                    explicit_output_bytes=entry.get("output_bytes"),
                    explicit_resolution=resolution,
                )
            )
        except ValidationError as exc:
            raise ParseError(f"{where}: {exc}") from None
    try:
        return NetworkProfile(
            layers=tuple(layers),
            input_height=_as_int(_require(frame, "height", "frame"), "frame.height"),
            input_width=_as_int(_require(frame, "width", "frame"), "frame.width"),
            input_channels=_as_int(_require(frame, "channels", "frame"), "frame.channels"),
            bytes_per_element=_as_int(doc.get("bytes_per_element", 4), "bytes_per_element"),
            name=str(doc.get("name", "network")),
        )
    except ValidationError as exc:
        raise ParseError(f"profile: {exc}") from None


def profile_to_dict(net: NetworkProfile) -> dict:
    layers = []
    for layer in net.layers:
        entry: dict[str, Any] = {"index": layer.index, "kind": layer.kind.value}
        for key, value in (
            ("kernel", layer.kernel),
            ("stride", layer.stride),
            ("padding", layer.padding),
            ("out_channels", layer.out_channels),
            ("output_length", layer.output_length),
            ("output_bytes", layer.explicit_output_bytes),
        ):
            if value is not None:
                entry[key] = value
        if layer.explicit_resolution is not None:
            entry["resolution"] = list(layer.explicit_resolution)
        entry["exec_time_ms"] = {
            dev: seconds_to_ms(layer.exec_time[dev]) for dev in sorted(layer.exec_time)
        }
        layers.append(entry)
    return {
        "name": net.name,
        "frame": {
            "height": net.input_height,
            "width": net.input_width,
            "channels": net.input_channels,
        },
        "bytes_per_element": net.bytes_per_element,
        "layers": layers,
    }


# ---------------------------------------------------------------------------
# resource graphs


def resources_from_dict(doc: dict) -> ResourceGraph:
    devices_doc = _require(doc, "devices", "resources")
    if not isinstance(devices_doc, list) or not devices_doc:
        raise ParseError("resources: 'devices' must be a non-empty list")
    devices = []
    for entry in devices_doc:
        where = f"device {entry.get('id', '?')}"
        trusted = _require(entry, "trusted", where)
        if not isinstance(trusted, bool):
            raise ParseError(f"{where}: 'trusted' must be a boolean")
        devices.append(
            Device(
                id=str(_require(entry, "id", where)),
                trusted=trusted,
                host=str(_require(entry, "host", where)),
            )
        )
    devices.sort(key=lambda d: d.id)
    bandwidth: dict[tuple[str, str], float] = {}
    for entry in doc.get("links", []):
        where = "link"
        src = str(_require(entry, "from", where))
        dst = str(_require(entry, "to", where))
        if (src, dst) in bandwidth:
            raise ParseError(f"link: duplicate entry for ({src!r}, {dst!r})")
        bandwidth[(src, dst)] = mbps_to_bytes_per_sec(float(_require(entry, "mbps", where)))
    intra = doc.get("intra_host_mbps")
    return ResourceGraph(
        devices=tuple(devices),
        bandwidth=bandwidth,
        intra_host_bandwidth=None if intra is None else mbps_to_bytes_per_sec(float(intra)),
    )


def resources_to_dict(graph: ResourceGraph) -> dict:
    doc: dict[str, Any] = {
        "devices": [
            {"id": d.id, "trusted": d.trusted, "host": d.host}
            for d in sorted(graph.devices, key=lambda d: d.id)
        ],
        "links": [
            {"from": src, "to": dst, "mbps": bytes_per_sec_to_mbps(bw)}
            for (src, dst), bw in sorted(graph.bandwidth.items())
        ],
    }
    if graph.intra_host_bandwidth is not None:
        doc["intra_host_mbps"] = bytes_per_sec_to_mbps(graph.intra_host_bandwidth)
    return doc


# ---------------------------------------------------------------------------
# placements


def placement_from_dict(doc: dict) -> Placement:
    if "segments" not in doc and "best" in doc:
        doc = doc["best"]  # accept `plan --json` output directly
    segments_doc = _require(doc, "segments", "placement")
    if not isinstance(segments_doc, list) or not segments_doc:
        raise ParseError("placement: 'segments' must be a non-empty list")
    segments = []
    for entry in segments_doc:
        layers = _require(entry, "layers", "segment")
        if not isinstance(layers, list) or len(layers) != 2:
            raise ParseError("segment: 'layers' must be [start, end]")
        try:
            segments.append(
                Segment(
                    _as_int(layers[0], "segment.layers"),
                    _as_int(layers[1], "segment.layers"),
                    str(_require(entry, "device", "segment")),
                )
            )
        except ValidationError as exc:
            raise ParseError(f"segment: {exc}") from None
    try:
        return Placement(tuple(segments))
    except ValidationError as exc:
        raise ParseError(f"placement: {exc}") from None


def placement_to_dict(placement: Placement) -> dict:
    return {
        "segments": [
            {"layers": [seg.start, seg.end], "device": seg.device}
            for seg in placement.segments
        ]
    }


# ---------------------------------------------------------------------------
# disk helpers


def _load_json(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as f:
            doc = json.load(f)
    except FileNotFoundError:
        raise ParseError(f"no such file: {path}") from None
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: line {exc.lineno}: {exc.msg}") from None
    if not isinstance(doc, dict):
        raise ParseError(f"{path}: top level must be a JSON object")
    return doc


def dumps(doc: dict) -> str:
    return json.dumps(doc, indent=2) + "\n"


def load_profile(path: str) -> NetworkProfile:
    return profile_from_dict(_load_json(path))


def save_profile(path: str, net: NetworkProfile) -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write(dumps(profile_to_dict(net)))


def load_resources(path: str) -> ResourceGraph:
    return resources_from_dict(_load_json(path))


def save_resources(path: str, graph: ResourceGraph) -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write(dumps(resources_to_dict(graph)))


def load_placement(path: str) -> Placement:
    return placement_from_dict(_load_json(path))


def save_placement(path: str, placement: Placement) -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write(dumps(placement_to_dict(placement)))
