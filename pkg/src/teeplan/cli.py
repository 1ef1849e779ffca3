"""Command-line interface: shapes | plan | simulate | report.

Exit codes: 0 success, 2 parse/validation error, 3 infeasible policy.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Any, Sequence

from . import profiles
from .cost import decompose
from .fileio import (
    ParseError,
    load_placement,
    load_profile,
    load_resources,
    placement_to_dict,
)
from .model import (
    InfeasiblePolicyError,
    NetworkProfile,
    ValidationError,
    validate_resource_graph,
)
from .pipesim import simulate, write_trace
from .planner import TreeConfig, plan, strategy_compare
from .privacy import PolicyMode, PrivacyPolicy, admissible
from .shapes import propagate_shapes

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_INFEASIBLE = 3


def _resolve(path: str, role: str) -> str:
    """Accept a real path or the name of a bundled synthetic profile."""
    if os.path.exists(path):
        return path
    if path in profiles.BUILTIN_NAMES:
        return profiles.builtin_path(path, role)
    raise ParseError(
        f"no such file: {path} (built-in names: {', '.join(profiles.BUILTIN_NAMES)})"
    )


def _policy(args: argparse.Namespace) -> PrivacyPolicy:
    return PrivacyPolicy(delta=args.delta, mode=PolicyMode(args.mode))


def _parse_tree(spec: str) -> TreeConfig:
    """Tree spec syntax: START/dev1,dev2/dev3 (levels separated by '/')."""
    parts = [p for p in spec.split("/") if p]
    if not parts:
        raise ParseError(f"empty tree spec {spec!r}")
    levels = tuple(tuple(x for x in part.split(",") if x) for part in parts[1:])
    try:
        return TreeConfig(start_device=parts[0], level_devices=levels)
    except ValidationError as exc:
        raise ParseError(f"bad tree spec {spec!r}: {exc}") from None


def _validated_graph(path: str):
    graph = load_resources(path)
    result = validate_resource_graph(graph)
    if not result.ok:
        raise ParseError("invalid resource graph: " + "; ".join(result.violations))
    return graph


def _print_table(headers: list[str], rows: list[list[str]]) -> None:
    widths = [max(len(headers[i]), *(len(r[i]) for r in rows)) if rows else len(headers[i])
              for i in range(len(headers))]
    print("  ".join(h.ljust(widths[i]) for i, h in enumerate(headers)))
    for row in rows:
        print("  ".join(cell.ljust(widths[i]) for i, cell in enumerate(row)))


# ---------------------------------------------------------------------------
# shapes


def shapes_rows(net: NetworkProfile, device: str | None = None) -> list[dict[str, Any]]:
    """Per-layer shape facts plus the cumulative time fraction on ``device``.

    Defaults to the slowest device by whole-chain time, which is where the
    enclave-resident prefix cost is the interesting quantity.
    """
    signatures = propagate_shapes(net)
    if device is None:
        totals: dict[str, float] = {}
        for layer in net.layers:
            for dev, t in layer.exec_time.items():
                totals[dev] = totals.get(dev, 0.0) + t
        complete = {d: t for d, t in totals.items()
                    if all(d in l.exec_time for l in net.layers)}
        if not complete:
            raise ValidationError("no device has exec times for every layer")
        device = max(sorted(complete), key=lambda d: complete[d])
    total = sum(layer.exec_time[device] for layer in net.layers)
    rows = []
    cumulative = 0.0
    for layer, sig in zip(net.layers, signatures):
        cumulative += layer.exec_time[device]
        rows.append(
            {
                "index": layer.index,
                "kind": layer.kind.value,
                "output_shape": f"{sig.output_shape.height}x{sig.output_shape.width}"
                f"x{sig.output_shape.channels}",
                "output_bytes": sig.output_bytes,
                "resolution": f"{sig.resolution[0]}x{sig.resolution[1]}",
                "cumulative_fraction": cumulative / total,
                "device": device,
            }
        )
    return rows


def cmd_shapes(args: argparse.Namespace) -> int:
    net = load_profile(_resolve(args.profile, "profile"))
    rows = shapes_rows(net, args.device)
    print(f"profile: {net.name}   time column: {rows[0]['device']}")
    _print_table(
        ["layer", "kind", "output", "bytes", "resolution", "cum-time"],
        [
            [
                str(r["index"]),
                r["kind"],
                r["output_shape"],
                str(r["output_bytes"]),
                r["resolution"],
                f"{r['cumulative_fraction']:.4f}",
            ]
            for r in rows
        ],
    )
    return EXIT_OK


# ---------------------------------------------------------------------------
# plan


def _plan_report_doc(report) -> dict:
    best = report.best
    doc: dict[str, Any] = {
        "best": {
            **placement_to_dict(best.placement),
            "t_chunk_ns": best.t_chunk_ns,
            "t_chunk_s": best.t_chunk,
            "max_similarity": best.sim,
        },
        "n": report.n,
        "delta": report.policy.delta,
        "mode": report.policy.mode.value,
        "crypto_overhead_ms": report.crypto_overhead * 1e3,
        "crypto_note": "decryption charged to the receiving enclave stage",
        "candidate_count": report.candidate_count,
        "candidates": [
            {
                **placement_to_dict(ev.placement),
                "t_chunk_ns": ev.t_chunk_ns,
                "max_similarity": ev.sim,
                "admissible": ev.admissible,
            }
            for ev in report.all_candidates
        ],
    }
    return doc


def cmd_plan(args: argparse.Namespace) -> int:
    net = load_profile(_resolve(args.profile, "profile"))
    graph = _validated_graph(_resolve(args.resources, "resources"))
    config = _parse_tree(args.tree) if args.tree else None
    report = plan(net, graph, _policy(args), args.n, config)
    if args.json:
        print(json.dumps(_plan_report_doc(report), indent=2))
        return EXIT_OK
    best = report.best
    print(f"profile: {net.name}   n={report.n}   delta={report.policy.delta}   "
          f"mode={report.policy.mode.value}")
    print(f"candidates evaluated: {report.candidate_count}")
    _print_table(
        ["layers", "device"],
        [[f"{seg.start}..{seg.end}", seg.device] for seg in best.placement.segments],
    )
    print(f"predicted chunk completion: {best.t_chunk:.6f} s ({best.t_chunk_ns} ns)")
    print(f"max leakage proxy: {best.sim} px")
    print("note: decryption charged to the receiving enclave stage "
          f"({report.crypto_overhead * 1e3:g} ms per enclave-to-enclave boundary)")
    return EXIT_OK


# ---------------------------------------------------------------------------
# simulate


def cmd_simulate(args: argparse.Namespace) -> int:
    net = load_profile(_resolve(args.profile, "profile"))
    graph = _validated_graph(_resolve(args.resources, "resources"))
    placement = load_placement(args.placement)
    if placement.num_layers != net.m:
        raise ParseError(
            f"placement covers {placement.num_layers} layers, profile has {net.m}"
        )
    signatures = propagate_shapes(net)
    policy = _policy(args)
    if not admissible(placement, graph, signatures, policy) and not args.allow_violating:
        raise InfeasiblePolicyError(
            "placement violates the active policy (use --allow-violating to simulate anyway)"
        )
    stage_plan = decompose(placement, graph, signatures, net)
    result = simulate(stage_plan, args.n)
    if args.trace:
        write_trace(args.trace, stage_plan, result)
    if args.json:
        doc = {
            "completion_ns": result.completion_ns,
            "completion_s": result.completion,
            "n": args.n,
            "stages": [
                {
                    "kind": st.kind.value,
                    "where": st.label(),
                    "latency_ns": st.latency_ns,
                    "busy": result.per_stage_busy[i],
                }
                for i, st in enumerate(stage_plan.stages)
            ],
        }
        print(json.dumps(doc, indent=2))
        return EXIT_OK
    print(f"measured completion: {result.completion:.6f} s ({result.completion_ns} ns)")
    _print_table(
        ["stage", "kind", "where", "latency_s", "busy"],
        [
            [
                str(i),
                st.kind.value,
                st.label(),
                f"{st.latency:.6f}",
                f"{result.per_stage_busy[i]:.4f}",
            ]
            for i, st in enumerate(stage_plan.stages)
        ],
    )
    if args.trace:
        print(f"trace written to {args.trace}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# report


def cmd_report(args: argparse.Namespace) -> int:
    net = load_profile(_resolve(args.profile, "profile"))
    graph = _validated_graph(_resolve(args.resources, "resources"))
    rows = strategy_compare(net, graph, _policy(args), args.n)
    if args.csv:
        print("strategy,t_chunk_ms,speedup,note")
        for row in rows:
            t = "" if row.t_chunk_ms is None else f"{row.t_chunk_ms:.3f}"
            s = "" if row.speedup is None else f"{row.speedup:.4f}"
            print(f"{row.name},{t},{s},{row.note}")
        return EXIT_OK
    print(f"profile: {net.name}   n={args.n}   delta={args.delta}   mode={args.mode}")
    _print_table(
        ["strategy", "t_chunk_ms", "speedup", "placement / note"],
        [
            [
                row.name,
                "-" if row.t_chunk_ms is None else f"{row.t_chunk_ms:.3f}",
                "-" if row.speedup is None else f"{row.speedup:.2f}x",
                row.note
                or " ".join(
                    f"{seg.device}[{seg.start}-{seg.end}]"
                    for seg in (row.placement.segments if row.placement else ())
                ),
            ]
            for row in rows
        ],
    )
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="teeplan",
        description="Privacy-aware layer placement across enclaves and accelerators. "
        "Profile/resource arguments accept file paths or built-in names "
        f"({', '.join(profiles.BUILTIN_NAMES)}).",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_policy_flags(p: argparse.ArgumentParser) -> None:
        p.add_argument("--delta", type=int, default=20,
                       help="resolution threshold in pixels per axis (default 20)")
        p.add_argument("--mode", choices=[m.value for m in PolicyMode], default="c2",
                       help="c1: enclaves only; c2: sub-threshold hand-off allowed (default)")

    p_shapes = sub.add_parser("shapes", help="per-layer shapes, bytes, and resolutions")
    p_shapes.add_argument("profile")
    p_shapes.add_argument("--device", help="device whose cumulative time to report")
    p_shapes.set_defaults(func=cmd_shapes)

    p_plan = sub.add_parser("plan", help="choose the best admissible placement")
    p_plan.add_argument("profile")
    p_plan.add_argument("resources")
    p_plan.add_argument("--n", type=int, default=1000, help="frames per chunk (default 1000)")
    add_policy_flags(p_plan)
    p_plan.add_argument("--tree", help="tree spec START/dev1,dev2/dev3 (default: derived)")
    p_plan.add_argument("--json", action="store_true", help="machine-readable output")
    p_plan.set_defaults(func=cmd_plan)

    p_sim = sub.add_parser("simulate", help="discrete-event run of a placement")
    p_sim.add_argument("profile")
    p_sim.add_argument("resources")
    p_sim.add_argument("placement", help="placement JSON (or `plan --json` output)")
    p_sim.add_argument("--n", type=int, default=1000, help="frames per chunk (default 1000)")
    add_policy_flags(p_sim)
    p_sim.add_argument("--trace", help="write per-event CSV trace to this path")
    p_sim.add_argument("--allow-violating", action="store_true",
                       help="simulate even if the placement violates the policy")
    p_sim.add_argument("--json", action="store_true", help="machine-readable output")
    p_sim.set_defaults(func=cmd_simulate)

    p_rep = sub.add_parser("report", help="strategy comparison table")
    p_rep.add_argument("profile")
    p_rep.add_argument("resources")
    p_rep.add_argument("--n", type=int, default=1000, help="frames per chunk (default 1000)")
    add_policy_flags(p_rep)
    p_rep.add_argument("--csv", action="store_true", help="CSV output")
    p_rep.set_defaults(func=cmd_report)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ParseError, ValidationError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except InfeasiblePolicyError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE


if __name__ == "__main__":
    raise SystemExit(main())
