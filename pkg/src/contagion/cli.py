"""Command-line entry points.

All subcommands exchange networks via the canonical directory layout:
events.csv (window,u,v,offset_sec,duration_sec) plus meta.json.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import graph, harness, ingest, netgen
from .interventions import alternating_pods, random_attendance, spatial_pods, \
    temporal_dilation
from .seeding import rng as seeded_rng


def _cmd_generate(args):
    params = netgen.from_target_density(args.density, args.p_vanish,
                                        args.steps_per_window)
    spec = netgen.GenSpec(node_count=args.nodes, window_count=args.windows,
                          params=params, seed=args.seed,
                          step_seconds=args.step_seconds)
    net = netgen.generate(spec)
    graph.write_network(net, args.out)
    series = graph.density_series(net)
    with open(Path(args.out) / "density_series.csv", "w", encoding="utf-8") as fh:
        fh.write("window,density\n")
        for tau, d in enumerate(series):
            fh.write(f"{tau},{d:.6f}\n")
    print(f"wrote {net!r} to {args.out} "
          f"(mean density {series.mean():.4f})")


def _cmd_transform(args):
    net = graph.read_network(args.inp)
    rng = seeded_rng(args.seed)
    if args.policy == "spatial":
        pods = spatial_pods(net, args.k, rng)
        for i, pod in enumerate(pods):
            graph.write_network(pod, Path(args.out) / f"pod{i}")
        print(f"wrote {len(pods)} pod networks to {args.out}")
        return
    if args.policy == "dilate":
        out_net = temporal_dilation(net, args.k)
    elif args.policy == "alternate":
        out_net = alternating_pods(net, rng)
    elif args.policy == "attendance":
        out_net = random_attendance(net, args.fraction, rng)
    else:
        raise SystemExit(f"unknown policy: {args.policy}")
    graph.write_network(out_net, args.out)
    print(f"wrote {out_net!r} to {args.out}")


def _cmd_ingest(args):
    config = ingest.IngestConfig(scan_interval=args.scan_interval,
                                 rssi_threshold=args.rssi_min,
                                 window_length=args.window_sec,
                                 max_gap=args.max_gap)
    records = ingest.parse_scans(args.inp)
    result = ingest.build_network(records, config)
    graph.write_network(result.network, args.out)
    import json
    with open(Path(args.out) / "node_map.json", "w", encoding="utf-8") as fh:
        json.dump({str(k): v for k, v in result.node_map.items()}, fh, indent=2)
        fh.write("\n")
    print(f"ingested {len(records)} records into {result.network!r}")


def _cmd_synth_cns(args):
    spec = ingest.SyntheticCnsSpec(node_count=args.nodes, days=args.days,
                                   seed=args.seed)
    meetings = ingest.synthesize_meetings(spec)
    records = ingest.meetings_to_scans(meetings, spec.scan_interval)
    ingest.write_scans_csv(records, args.out)
    print(f"wrote {len(records)} scan records "
          f"({len(meetings)} meetings) to {args.out}")


def _catalog(args):
    overrides = {}
    for name in ("node_count", "window_count", "iterations",
                 "cns_nodes", "cns_days", "pool_size"):
        value = getattr(args, name, None)
        if value is not None:
            overrides[name] = value
    return harness.builtin_scenarios(scale=args.scale,
                                     master_seed=args.master_seed, **overrides)


def _cmd_list_scenarios(args):
    for name, sc in _catalog(args).items():
        kind = f"sweep({sc.sweep.param})" if sc.sweep else "single"
        print(f"{name:26s} {kind:16s} {sc.description}")


def _cmd_simulate(args):
    scenario = _pick_scenario(args)
    if scenario.sweep is not None:
        result = harness.run_sweep(scenario, workers=args.workers)
        harness.write_sweep_result(result, args.out)
        print(f"{scenario.name}: medians "
              + " ".join(f"{m:.3f}" for m in result.medians()))
    else:
        result = harness.run_scenario(scenario, workers=args.workers)
        harness.write_scenario_result(result, args.out)
        print(f"{scenario.name}: mean final infected fraction "
              f"{result.mean_final:.4f} (se {result.se_final:.4f})")


def _cmd_sweep(args):
    scenario = _pick_scenario(args)
    if scenario.sweep is None:
        raise SystemExit(f"scenario {scenario.name} has no sweep axis")
    result = harness.run_sweep(scenario, workers=args.workers)
    harness.write_sweep_result(result, args.out)
    print(f"{scenario.name}: medians "
          + " ".join(f"{m:.3f}" for m in result.medians()))


def _cmd_stats(args):
    net = graph.read_network(args.inp)
    act = graph.activity_potential(net, args.group_size)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "activity.csv", "w", encoding="utf-8") as fh:
        fh.write("activity,node_count\n")
        for value, count in act.histogram().items():
            fh.write(f"{value},{count}\n")
    durations = np.concatenate(
        [g.duration for g in net.windows if g.n_events]) if net.n_events else \
        np.empty(0, dtype=np.int64)
    from collections import Counter
    hist = Counter((durations // 60).tolist())
    with open(out / "durations.csv", "w", encoding="utf-8") as fh:
        fh.write("duration_min,count\n")
        for minutes in sorted(hist):
            fh.write(f"{minutes},{hist[minutes]}\n")
    print(f"wrote activity.csv and durations.csv to {args.out}")


def _pick_scenario(args):
    catalog = _catalog(args)
    if args.scenario not in catalog:
        raise SystemExit(f"unknown scenario {args.scenario!r}; "
                         f"try: {', '.join(catalog)}")
    return catalog[args.scenario]


def _add_scenario_args(p):
    p.add_argument("--scenario", required=True)
    p.add_argument("--scale", choices=[harness.DESK, harness.PAPER],
                   default=harness.DESK)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--master-seed", type=int, default=2022)
    p.add_argument("--out", required=True)
    for name in ("node-count", "window-count", "iterations",
                 "cns-nodes", "cns-days", "pool-size"):
        p.add_argument(f"--{name}", type=int, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="contagion",
        description="Temporal-network contagion simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="generate a temporal random network")
    p.add_argument("--nodes", type=int, required=True)
    p.add_argument("--windows", type=int, required=True)
    p.add_argument("--density", type=float, required=True)
    p.add_argument("--p-vanish", type=float, default=0.8)
    p.add_argument("--steps-per-window", type=int, default=288)
    p.add_argument("--step-seconds", type=int, default=300)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_generate)

    p = sub.add_parser("transform", help="apply a distancing policy")
    p.add_argument("--policy", required=True,
                   choices=["spatial", "dilate", "alternate", "attendance"])
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--fraction", type=float, default=0.5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_transform)

    p = sub.add_parser("ingest", help="build a network from proximity scans")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--scan-interval", type=int, default=300)
    p.add_argument("--rssi-min", type=int, default=None)
    p.add_argument("--window-sec", type=int, default=86400)
    p.add_argument("--max-gap", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_ingest)

    p = sub.add_parser("synth-cns", help="write synthetic proximity scans")
    p.add_argument("--nodes", type=int, default=100)
    p.add_argument("--days", type=int, default=28)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_synth_cns)

    p = sub.add_parser("simulate", help="run a built-in scenario")
    _add_scenario_args(p)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("sweep", help="run a sweep scenario")
    _add_scenario_args(p)
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("list-scenarios", help="show the scenario catalog")
    p.add_argument("--scale", choices=[harness.DESK, harness.PAPER],
                   default=harness.DESK)
    p.add_argument("--master-seed", type=int, default=2022)
    p.set_defaults(func=_cmd_list_scenarios)

    p = sub.add_parser("stats", help="activity and duration histograms")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--group-size", type=int, default=1)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_stats)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    args.func(args)
    return 0


if __name__ == "__main__":
    sys.exit(main())
