"""Tensor-shape propagation through the layer chain.

Derives each layer's output size in bytes and the spatial resolution of a
single feature map, which downstream privacy checks use as the
dissimilarity proxy: once a layer's output drops below a threshold
resolution, its content is treated as unidentifiable.
"""

from __future__ import annotations

from dataclasses import dataclass

from .model import LayerKind, LayerSpec, NetworkProfile, ShapeError


@dataclass(frozen=True)
class TensorShape:
    height: int
    width: int
    channels: int

    def __post_init__(self) -> None:
        if min(self.height, self.width, self.channels) < 1:
            raise ShapeError(f"tensor dimensions must be >= 1, got {self}")


@dataclass(frozen=True)
class LayerSignature:
    """Shape facts for one layer: input/output shape, output bytes, resolution.

    ``resolution`` is the (height, width) of one feature map in the layer's
    output grid; explicit per-layer overrides take precedence over the
    shape-derived values.
    """

    layer_index: int
    input_shape: TensorShape
    output_shape: TensorShape
    output_bytes: int
    resolution: tuple[int, int]


def conv_output_dim(size: int, kernel: int, stride: int, padding: int) -> int:
    """Sliding-window output size: floor((size + 2*padding - kernel) / stride) + 1."""
    return (size + 2 * padding - kernel) // stride + 1


def _output_shape(layer: LayerSpec, inp: TensorShape) -> TensorShape:
    if layer.kind in (LayerKind.CONV, LayerKind.POOL):
        assert layer.kernel is not None and layer.stride is not None
        assert layer.padding is not None
        h = conv_output_dim(inp.height, layer.kernel, layer.stride, layer.padding)
        w = conv_output_dim(inp.width, layer.kernel, layer.stride, layer.padding)
        if h < 1 or w < 1:
            raise ShapeError(
                f"layer {layer.index} ({layer.kind.value}) consumes input below 1 pixel: "
                f"{inp.height}x{inp.width} -> {h}x{w}"
            )
        if layer.kind is LayerKind.CONV:
            channels = layer.out_channels
        else:
            channels = layer.out_channels if layer.out_channels is not None else inp.channels
        assert channels is not None
        return TensorShape(h, w, channels)
    if layer.kind is LayerKind.FC:
        assert layer.output_length is not None
        return TensorShape(1, 1, layer.output_length)
    # relu, softmax, and opaque layers preserve shape
    return inp


def propagate_shapes(net: NetworkProfile) -> list[LayerSignature]:
    """Signatures for layers 1..M; layer x+1's input equals layer x's output."""
    shape = TensorShape(net.input_height, net.input_width, net.input_channels)
    signatures: list[LayerSignature] = []
    for layer in net.layers:
        out = _output_shape(layer, shape)
        if layer.explicit_output_bytes is not None:
            nbytes = layer.explicit_output_bytes
        else:
            nbytes = out.height * out.width * out.channels * net.bytes_per_element
        resolution = layer.explicit_resolution or (out.height, out.width)
        signatures.append(LayerSignature(layer.index, shape, out, nbytes, resolution))
        shape = out
    return signatures


def resolution_profile(signatures: list[LayerSignature]) -> list[tuple[int, tuple[int, int]]]:
    """Per-layer output resolution, in layer order."""
    return [(sig.layer_index, sig.resolution) for sig in signatures]


def input_resolution(signatures: list[LayerSignature], layer_index: int) -> tuple[int, int]:
    """Resolution of the tensor entering ``layer_index``.

    For layer 1 this is the raw frame resolution and can never be
    overridden; for later layers it is the producing layer's (possibly
    overridden) output resolution.
    """
    if layer_index < 1 or layer_index > len(signatures):
        raise ShapeError(f"layer {layer_index} outside 1..{len(signatures)}")
    if layer_index == 1:
        frame = signatures[0].input_shape
        return (frame.height, frame.width)
    return signatures[layer_index - 2].resolution
