"""Placement search: enumerate the candidate tree, cost every path, pick the best.

The search space is a level-structured tree rooted at a trusted start
device: level k's device sets say where the k-th hand-off may go, every
split point between layers is considered at every level boundary, and each
root-to-node path that covers the whole chain is one candidate placement.
For the default two-host configuration this keeps the candidate count at
O(M^2) for an M-layer network.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, replace
from math import comb
from typing import Iterable, Mapping, Sequence

from .cost import (
    DEFAULT_CRYPTO_OVERHEAD_S,
    chunk_completion_ns,
    decompose,
    ns_to_sec,
    sec_to_ns,
    transmit_ns,
)
from .model import (
    InfeasiblePolicyError,
    NetworkProfile,
    Placement,
    ResourceGraph,
    Segment,
    ValidationError,
    validate_resource_graph,
)
from .privacy import PolicyMode, PrivacyPolicy, check_c2, admissible
from .shapes import LayerSignature, input_resolution, propagate_shapes

DEFAULT_ORACLE_LAYER_BOUND = 10
DEFAULT_REPLAN_TOLERANCE = 0.2


@dataclass(frozen=True)
class TreeConfig:
    """Shape of the placement tree.

    ``level_devices[k]`` holds the devices allowed for the (k+2)-th segment
    of a path; paths may stop early once the chain is covered.  With
    ``require_return_to_start`` an extra final level sends the tail of the
    chain back to the start device.
    """

    start_device: str
    level_devices: tuple[tuple[str, ...], ...]
    require_return_to_start: bool = False

    def __post_init__(self) -> None:
        for level, devices in enumerate(self.level_devices, start=2):
            if not devices:
                raise ValidationError(f"empty device set at tree level {level}")
            if len(set(devices)) != len(devices):
                raise ValidationError(f"duplicate device at tree level {level}")

    def effective_levels(self) -> tuple[tuple[str, ...], ...]:
        if self.require_return_to_start:
            return self.level_devices + ((self.start_device,),)
        return self.level_devices


def default_tree_config(graph: ResourceGraph, start_device: str | None = None) -> TreeConfig:
    """Two-host default: start enclave, then any other device, then a remote
    untrusted accelerator for the tail."""
    start = _resolve_start(graph, start_device)
    level2 = tuple(sorted(d.id for d in graph.devices if d.id != start))
    start_host = graph.host_of(start)
    level3 = tuple(
        sorted(d.id for d in graph.devices if not d.trusted and d.host != start_host)
    )
    levels = [lvl for lvl in (level2, level3) if lvl]
    return TreeConfig(start_device=start, level_devices=tuple(levels))


def _resolve_start(graph: ResourceGraph, start_device: str | None) -> str:
    if start_device is not None:
        if not graph.is_trusted(start_device):
            raise ValidationError(f"start device {start_device!r} is not trusted")
        return start_device
    trusted = sorted(graph.trusted_ids)
    if not trusted:
        raise InfeasiblePolicyError(
            "infeasible under policy: no trusted device to start processing on"
        )
    return trusted[0]


def device_sequences(config: TreeConfig) -> list[tuple[str, ...]]:
    """All device sequences the tree permits, adjacent duplicates pruned."""
    sequences: list[tuple[str, ...]] = [(config.start_device,)]
    frontier: list[tuple[str, ...]] = [(config.start_device,)]
    for level in config.effective_levels():
        next_frontier: list[tuple[str, ...]] = []
        for prefix in frontier:
            for device in level:
                if device == prefix[-1]:
                    continue
                seq = prefix + (device,)
                sequences.append(seq)
                next_frontier.append(seq)
        frontier = next_frontier
    return sequences


def candidate_count_bound(m: int, config: TreeConfig) -> int:
    """Exact combinatorial ceiling: split-point choices times level degrees."""
    bound = 0
    degree = 1
    levels = config.effective_levels()
    for depth in range(1, len(levels) + 2):
        bound += comb(m - 1, depth - 1) * degree
        if depth - 1 < len(levels):
            degree *= len(levels[depth - 1])
    return bound


def enumerate_candidates(
    net: NetworkProfile, graph: ResourceGraph, config: TreeConfig
) -> list[Placement]:
    """Every canonical placement reachable through the configured tree.

    The whole-network-on-start placement is always present; a sequence of
    k devices contributes one candidate per choice of k-1 ordered split
    points over the M-1 layer boundaries.
    """
    if not graph.is_trusted(config.start_device):
        raise ValidationError(f"start device {config.start_device!r} is not trusted")
    for level in config.effective_levels():
        for device in level:
            graph.device(device)  # raises on unknown ids
    m = net.m
    candidates: list[Placement] = []
    for seq in device_sequences(config):
        k = len(seq)
        if k > m:
            continue
        for splits in itertools.combinations(range(1, m), k - 1):
            bounds = (0,) + splits + (m,)
            segments = tuple(
                Segment(bounds[i] + 1, bounds[i + 1], seq[i]) for i in range(k)
            )
            candidates.append(Placement(segments))
    assert len(candidates) <= candidate_count_bound(m, config)
    return candidates


@dataclass(frozen=True)
class CandidateEvaluation:
    """One costed candidate: predicted chunk time, leakage proxy, admissibility."""

    placement: Placement
    t_chunk_ns: int
    sim: int
    admissible: bool

    @property
    def t_chunk(self) -> float:
        return ns_to_sec(self.t_chunk_ns)

    def sort_key(self) -> tuple[int, int, tuple[str, ...]]:
        return (self.t_chunk_ns, len(self.placement.segments), self.placement.device_sequence)


@dataclass(frozen=True)
class StrategyRow:
    name: str
    t_chunk_ns: int | None
    speedup: float | None
    placement: Placement | None = None
    note: str = ""

    @property
    def t_chunk_ms(self) -> float | None:
        return None if self.t_chunk_ns is None else self.t_chunk_ns / 1e6


@dataclass(frozen=True)
class PlanReport:
    """Chosen placement plus the full audit trail and the planning inputs."""

    best: CandidateEvaluation
    all_candidates: tuple[CandidateEvaluation, ...]
    n: int
    policy: PrivacyPolicy
    config: TreeConfig | None
    net: NetworkProfile
    graph: ResourceGraph
    crypto_overhead: float
    strategy_rows: tuple[StrategyRow, ...] | None = None

    @property
    def candidate_count(self) -> int:
        return len(self.all_candidates)


def evaluate(
    candidate: Placement,
    net: NetworkProfile,
    graph: ResourceGraph,
    signatures: list[LayerSignature],
    policy: PrivacyPolicy,
    n: int,
    crypto_overhead: float = DEFAULT_CRYPTO_OVERHEAD_S,
) -> CandidateEvaluation:
    """Cost one candidate via the stage decomposition and privacy checks."""
    plan_ = decompose(candidate, graph, signatures, net, crypto_overhead)
    leakage = check_c2(candidate, graph, signatures, policy)
    return CandidateEvaluation(
        placement=candidate,
        t_chunk_ns=chunk_completion_ns(plan_, n),
        sim=leakage.max_similarity,
        admissible=admissible(candidate, graph, signatures, policy),
    )


class _Evaluator:
    """Prefix-sum fast path for scoring many candidates over one instance.

    Produces results identical to :func:`evaluate`: per-layer times are
    rounded to nanoseconds individually before summing, exactly as the
    stage decomposition does.
    """

    def __init__(
        self,
        net: NetworkProfile,
        graph: ResourceGraph,
        signatures: list[LayerSignature],
        policy: PrivacyPolicy,
        crypto_overhead: float,
    ) -> None:
        self.net = net
        self.graph = graph
        self.policy = policy
        self.overhead_ns = sec_to_ns(crypto_overhead)
        m = net.m
        self.out_bytes = [sig.output_bytes for sig in signatures]
        self.in_res = [input_resolution(signatures, x) for x in range(1, m + 1)]
        self.trusted: dict[str, bool] = {}
        self.host: dict[str, str] = {}
        self._sum_prefix: dict[str, list[int]] = {}
        self._miss_prefix: dict[str, list[int]] = {}
        self._transmit_cache: dict[tuple[str, str, int], int | None] = {}

    def _device(self, device_id: str) -> None:
        if device_id in self.trusted:
            return
        dev = self.graph.device(device_id)
        self.trusted[device_id] = dev.trusted
        self.host[device_id] = dev.host
        sums = [0]
        missing = [0]
        for layer in self.net.layers:
            t = layer.exec_time.get(device_id)
            sums.append(sums[-1] + (0 if t is None else sec_to_ns(t)))
            missing.append(missing[-1] + (1 if t is None else 0))
        self._sum_prefix[device_id] = sums
        self._miss_prefix[device_id] = missing

    def _segment_ns(self, device_id: str, start: int, end: int) -> int:
        miss = self._miss_prefix[device_id]
        if miss[end] - miss[start - 1]:
            raise ValidationError(
                f"missing exec_time for layer "
                f"{next(x for x in range(start, end + 1) if miss[x] > miss[x - 1])} "
                f"on device {device_id!r}"
            )
        sums = self._sum_prefix[device_id]
        return sums[end] - sums[start - 1]

    def _transmit_ns(self, src_dev: str, dst_dev: str, boundary: int) -> int | None:
        key = (src_dev, dst_dev, boundary)
        cached = self._transmit_cache.get(key, -1)
        if cached != -1:
            return cached
        src_host, dst_host = self.host[src_dev], self.host[dst_dev]
        nbytes = self.out_bytes[boundary - 1]
        result: int | None
        if src_host == dst_host:
            intra = self.graph.intra_host_bandwidth
            result = None if intra is None else transmit_ns(nbytes, intra)
        else:
            link = self.graph.link_bandwidth(src_host, dst_host)
            if link is None:
                raise ValidationError(
                    f"missing bandwidth for crossed host pair ({src_host!r}, {dst_host!r})"
                )
            result = transmit_ns(nbytes, link)
        self._transmit_cache[key] = result
        return result

    def evaluate(self, candidate: Placement, n: int) -> CandidateEvaluation:
        total = 0
        worst = 0
        sim = 0
        all_trusted = True
        c2_ok = True
        delta = self.policy.delta
        prev: str | None = None
        for seg in candidate.segments:
            self._device(seg.device)
            latency = self._segment_ns(seg.device, seg.start, seg.end)
            if prev is not None:
                tr = self._transmit_ns(prev, seg.device, seg.start - 1)
                if tr is not None:
                    total += tr
                    if tr > worst:
                        worst = tr
                if self.trusted[prev] and self.trusted[seg.device]:
                    latency += self.overhead_ns
            if not self.trusted[seg.device]:
                all_trusted = False
                for x in range(seg.start, seg.end + 1):
                    h, w = self.in_res[x - 1]
                    if h > sim:
                        sim = h
                    if w > sim:
                        sim = w
                    if h >= delta or w >= delta:
                        c2_ok = False
            total += latency
            if latency > worst:
                worst = latency
            prev = seg.device
        ok = all_trusted or (self.policy.mode is PolicyMode.C2_ALLOWED and c2_ok)
        return CandidateEvaluation(
            placement=candidate,
            t_chunk_ns=total + (n - 1) * worst,
            sim=sim,
            admissible=ok,
        )


def _require_valid_graph(graph: ResourceGraph) -> None:
    result = validate_resource_graph(graph)
    if not result.ok:
        raise ValidationError("invalid resource graph: " + "; ".join(result.violations))


def _pick_best(evaluations: Iterable[CandidateEvaluation]) -> CandidateEvaluation:
    best: CandidateEvaluation | None = None
    for ev in evaluations:
        if not ev.admissible:
            continue
        if best is None or ev.sort_key() < best.sort_key():
            best = ev
    if best is None:
        raise InfeasiblePolicyError("infeasible under policy: no admissible placement")
    return best


def plan(
    net: NetworkProfile,
    graph: ResourceGraph,
    policy: PrivacyPolicy,
    n: int,
    config: TreeConfig | None = None,
    crypto_overhead: float = DEFAULT_CRYPTO_OVERHEAD_S,
) -> PlanReport:
    """Pick the admissible placement with the smallest predicted chunk time.

    Ties break toward fewer segments, then the lexicographically smaller
    device sequence, so identical inputs always yield identical reports.
    """
    if n < 1:
        raise ValidationError(f"chunk size must be >= 1, got {n}")
    _require_valid_graph(graph)
    if config is None:
        config = default_tree_config(graph)
    signatures = propagate_shapes(net)
    evaluator = _Evaluator(net, graph, signatures, policy, crypto_overhead)
    evaluations = tuple(
        evaluator.evaluate(c, n) for c in enumerate_candidates(net, graph, config)
    )
    best = _pick_best(evaluations)
    return PlanReport(
        best=best,
        all_candidates=evaluations,
        n=n,
        policy=policy,
        config=config,
        net=net,
        graph=graph,
        crypto_overhead=crypto_overhead,
    )


def brute_force_plan(
    net: NetworkProfile,
    graph: ResourceGraph,
    policy: PrivacyPolicy,
    n: int,
    device_orders: Sequence[Sequence[str]],
    max_layers: int = DEFAULT_ORACLE_LAYER_BOUND,
    crypto_overhead: float = DEFAULT_CRYPTO_OVERHEAD_S,
) -> PlanReport:
    """Exhaustive oracle over explicit device sequences, for small instances.

    Unlike :func:`plan` this scores every candidate through the full stage
    decomposition, so agreement between the two validates both the tree
    enumeration and the fast evaluation path.
    """
    if net.m > max_layers:
        raise ValidationError(
            f"instance with {net.m} layers exceeds oracle bound {max_layers}"
        )
    _require_valid_graph(graph)
    signatures = propagate_shapes(net)
    m = net.m
    seen: set[tuple[str, ...]] = set()
    evaluations: list[CandidateEvaluation] = []
    for order in device_orders:
        seq = tuple(order)
        if seq in seen or len(seq) > m:
            continue
        seen.add(seq)
        if any(a == b for a, b in zip(seq, seq[1:])):
            continue  # not a canonical segment sequence
        for splits in itertools.combinations(range(1, m), len(seq) - 1):
            bounds = (0,) + splits + (m,)
            segments = tuple(
                Segment(bounds[i] + 1, bounds[i + 1], seq[i]) for i in range(len(seq))
            )
            evaluations.append(
                evaluate(Placement(segments), net, graph, signatures, policy, n, crypto_overhead)
            )
    best = _pick_best(evaluations)
    return PlanReport(
        best=best,
        all_candidates=tuple(evaluations),
        n=n,
        policy=policy,
        config=None,
        net=net,
        graph=graph,
        crypto_overhead=crypto_overhead,
    )


def _fastest_untrusted(net: NetworkProfile, graph: ResourceGraph) -> str | None:
    """The accelerator: the untrusted device with the lowest whole-chain time."""
    best: tuple[float, str] | None = None
    for dev in sorted(graph.untrusted_ids):
        total = 0.0
        for layer in net.layers:
            t = layer.exec_time.get(dev)
            if t is None:
                break
            total += t
        else:
            if best is None or (total, dev) < best:
                best = (total, dev)
    return None if best is None else best[1]


def strategy_compare(
    net: NetworkProfile,
    graph: ResourceGraph,
    policy: PrivacyPolicy,
    n: int,
    start_device: str | None = None,
    crypto_overhead: float = DEFAULT_CRYPTO_OVERHEAD_S,
) -> list[StrategyRow]:
    """Score the standard partitioning strategies against the single-enclave
    baseline: everything in one enclave, single-frame-optimal (no
    pipelining), one enclave plus one accelerator, enclaves only, and the
    full search.  The speedup column is t_chunk(1 TEE) / t_chunk(strategy).
    """
    _require_valid_graph(graph)
    start = _resolve_start(graph, start_device)
    signatures = propagate_shapes(net)

    single = Placement((Segment(1, net.m, start),))
    base_eval = evaluate(single, net, graph, signatures, policy, n, crypto_overhead)
    base_ns = base_eval.t_chunk_ns
    rows = [StrategyRow("1 TEE", base_ns, 1.0, placement=single)]

    def scored(name: str, config: TreeConfig | None, plan_n: int) -> StrategyRow:
        try:
            report = plan(net, graph, policy, plan_n, config, crypto_overhead)
        except InfeasiblePolicyError:
            return StrategyRow(name, None, None, note="skipped: infeasible under policy")
        chosen = report.best.placement
        if plan_n != n:
            rescored = evaluate(chosen, net, graph, signatures, policy, n, crypto_overhead)
            t_ns = rescored.t_chunk_ns
        else:
            t_ns = report.best.t_chunk_ns
        return StrategyRow(name, t_ns, base_ns / t_ns, placement=chosen)

    full_config = default_tree_config(graph, start)
    rows.append(scored("No pipelining", full_config, plan_n=1))

    accelerator = _fastest_untrusted(net, graph)
    if accelerator is None:
        rows.append(StrategyRow("1 TEE & 1 GPU", None, None, note="skipped: device absent"))
    else:
        rows.append(
            scored("1 TEE & 1 GPU", TreeConfig(start, ((accelerator,),)), plan_n=n)
        )

    other_tees = tuple(sorted(graph.trusted_ids - {start}))
    if not other_tees:
        rows.append(StrategyRow("2 TEEs", None, None, note="skipped: device absent"))
    else:
        rows.append(scored("2 TEEs", TreeConfig(start, (other_tees,)), plan_n=n))

    rows.append(scored("Proposed", full_config, plan_n=n))
    return rows


@dataclass(frozen=True)
class ReplanResult:
    triggered: bool
    report: PlanReport
    old_reevaluated: CandidateEvaluation | None = None


def replan_if_deviation(
    current: PlanReport,
    observed_exec_times: Mapping[int, float],
    tolerance: float = DEFAULT_REPLAN_TOLERANCE,
) -> ReplanResult:
    """Re-run the planner when observed layer times drift past ``tolerance``.

    ``observed_exec_times`` maps every layer index to the time measured on
    the device it is currently placed on.  When any layer deviates from its
    profiled time by more than the relative tolerance, the profile is
    rebuilt with the observed numbers and planning repeats; the previous
    placement stays in the refreshed candidate set, so the new optimum can
    only match or beat it.
    """
    net = current.net
    vector = current.best.placement.expand(net.m)
    for x in range(1, net.m + 1):
        if x not in observed_exec_times:
            raise ValidationError(f"observed times missing placed layer {x}")
    triggered = False
    for x, device in enumerate(vector, start=1):
        profiled = net.layers[x - 1].exec_time[device]
        observed = observed_exec_times[x]
        if abs(observed - profiled) / profiled > tolerance:
            triggered = True
            break
    if not triggered:
        return ReplanResult(triggered=False, report=current)

    new_layers = []
    for x, layer in enumerate(net.layers, start=1):
        times = dict(layer.exec_time)
        times[vector[x - 1]] = observed_exec_times[x]
        new_layers.append(replace(layer, exec_time=times))
    new_net = replace(net, layers=tuple(new_layers))
    new_report = plan(
        new_net, current.graph, current.policy, current.n, current.config, current.crypto_overhead
    )
    old_reevaluated = evaluate(
        current.best.placement,
        new_net,
        current.graph,
        propagate_shapes(new_net),
        current.policy,
        current.n,
        current.crypto_overhead,
    )
    return ReplanResult(triggered=True, report=new_report, old_reevaluated=old_reevaluated)
