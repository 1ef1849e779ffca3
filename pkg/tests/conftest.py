"""Shared builders for tests: canned graphs, chain profiles, random instances."""

from __future__ import annotations

import random

import pytest

from teeplan import (
    Device,
    LayerKind,
    LayerSpec,
    NetworkProfile,
    PolicyMode,
    PrivacyPolicy,
    ResourceGraph,
    TreeConfig,
)

MBPS = 125_000  # bytes/sec per megabit


def make_graph(devices, links=None, intra=None) -> ResourceGraph:
    """devices: list of (id, trusted, host); links: {(src, dst): mbps}."""
    bandwidth = {pair: mbps * MBPS for pair, mbps in (links or {}).items()}
    return ResourceGraph(
        devices=tuple(Device(i, t, h) for i, t, h in devices),
        bandwidth=bandwidth,
        intra_host_bandwidth=None if intra is None else intra * MBPS,
    )


@pytest.fixture
def two_host_graph() -> ResourceGraph:
    """The canonical setup: an enclave and a plain processor on each of two
    hosts, 30 Mbps each way between the hosts."""
    return make_graph(
        [
            ("TEE_1", True, "hostA"),
            ("E_1", False, "hostA"),
            ("TEE_2", True, "hostB"),
            ("E_2", False, "hostB"),
        ],
        links={("hostA", "hostB"): 30, ("hostB", "hostA"): 30},
    )


def opaque_chain(
    exec_times: dict[str, list[float]],
    resolutions: list[tuple[int, int]] | None = None,
    output_bytes: list[int] | None = None,
    frame: tuple[int, int, int] = (224, 224, 3),
) -> NetworkProfile:
    """A chain of opaque layers with explicit per-layer overrides.

    ``exec_times`` maps device id to a list of per-layer seconds; all lists
    must share one length.
    """
    m = len(next(iter(exec_times.values())))
    layers = []
    for x in range(1, m + 1):
        layers.append(
            LayerSpec(
                index=x,
                kind=LayerKind.OTHER,
                exec_time={dev: times[x - 1] for dev, times in exec_times.items()},
                explicit_resolution=None if resolutions is None else resolutions[x - 1],
                explicit_output_bytes=None if output_bytes is None else output_bytes[x - 1],
            )
        )
    return NetworkProfile(
        layers=tuple(layers),
        input_height=frame[0],
        input_width=frame[1],
        input_channels=frame[2],
    )


def random_instance(rng: random.Random):
    """A small random planning instance for oracle and fuzz tests.

    Returns (net, graph, policy, config).  Device d0 is always trusted and
    is the tree's start; a random crossing layer marks where output
    resolutions drop below the threshold.
    """
    num_devices = rng.randint(2, 4)
    num_hosts = rng.randint(1, num_devices)
    hosts = [f"h{i}" for i in range(num_hosts)]
    devices = []
    for i in range(num_devices):
        trusted = True if i == 0 else rng.random() < 0.5
        devices.append((f"d{i}", trusted, rng.choice(hosts)))
    used_hosts = {h for _, _, h in devices}
    links = {}
    for src in used_hosts:
        for dst in used_hosts:
            if src != dst:
                links[(src, dst)] = rng.randint(5, 200)
    graph = make_graph(devices, links)

    m = rng.randint(2, 8)
    crossing = rng.randint(1, m)  # first layer whose output is sub-threshold
    ids = [d[0] for d in devices]
    exec_times = {dev: [rng.uniform(0.001, 0.5) for _ in range(m)] for dev in ids}
    resolutions = [(30, 30) if x < crossing else (10, 10) for x in range(1, m + 1)]
    out_bytes = [rng.randint(1_000, 2_000_000) for _ in range(m)]
    net = opaque_chain(exec_times, resolutions, out_bytes)

    mode = PolicyMode.C1_ONLY if rng.random() < 0.2 else PolicyMode.C2_ALLOWED
    policy = PrivacyPolicy(delta=20, mode=mode)
    all_ids = tuple(sorted(ids))
    config = TreeConfig(start_device="d0", level_devices=(all_ids, all_ids))
    return net, graph, policy, config
