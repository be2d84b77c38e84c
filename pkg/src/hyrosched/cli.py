"""Command-line front end: batch experiment runner for the full pipeline
(generate -> solve -> replay -> export -> score/repair -> report).

Exit codes: 0 success; 2 usage errors (bad flags); 3 unreadable files or
schema mismatches; 1 anything else.  Seed-parallel subcommands read the
worker count from the HYROSCHED_WORKERS environment variable (default 1).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import graphio, repair as repair_mod, replay, scenario as scn_mod
from .channel import load_channel_config
from .milp import build_model, check_feasibility, export_lp, solve_bnb
from .milp.solver import (
    ScheduleSolution,
    SolverLimits,
    solution_from_json,
    solution_to_json,
)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_USAGE = 2
EXIT_FILE = 3


def _workers() -> int:
    try:
        return max(1, int(os.environ.get("HYROSCHED_WORKERS", "1")))
    except ValueError:
        return 1


def _map_seeds(fn, seeds):
    """Run fn over seeds, preserving order; parallel when workers > 1."""
    w = _workers()
    if w == 1:
        return [fn(s) for s in seeds]
    with ThreadPoolExecutor(max_workers=w) as pool:
        return list(pool.map(fn, seeds))


def _gen_config(args) -> scn_mod.GenConfig:
    kwargs = {}
    if getattr(args, "channel_config", None):
        rf, owc = load_channel_config(args.channel_config)
        kwargs["rf"] = rf
        kwargs["owc"] = owc
    if getattr(args, "load", None) is not None:
        kwargs["packets_per_device"] = args.load
    return scn_mod.GenConfig(
        n_nodes=args.nodes, n_aps=args.aps, horizon=args.horizon, **kwargs
    )


def _limits(args) -> SolverLimits:
    return SolverLimits(
        node_cap=args.node_cap, time_cap_s=args.time_cap_s, gap=args.gap
    )


def _solve_scenario(scn, args) -> ScheduleSolution:
    model = build_model(scn, alpha1=args.alpha1, alpha2=args.alpha2, omega=args.omega)
    return solve_bnb(model, _limits(args))


def _add_solver_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--node-cap", type=int, default=1000,
                   help="branch-and-bound node budget (default 1000)")
    p.add_argument("--time-cap-s", type=float, default=None,
                   help="wall-clock budget per solve in seconds")
    p.add_argument("--gap", type=float, default=0.0,
                   help="stop when the absolute objective gap reaches this")
    p.add_argument("--alpha1", type=float, default=0.35)
    p.add_argument("--alpha2", type=float, default=0.65)
    p.add_argument("--omega", type=int, default=None,
                   help="per-device technology switching cap (default horizon//2)")


def _add_instance_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--nodes", type=int, default=3, help="IoT node count")
    p.add_argument("--aps", type=int, default=2, help="access point count")
    p.add_argument("--horizon", type=int, default=10, help="steps per scenario")
    p.add_argument("--load", type=int, default=None,
                   help="target generated packets per device (default 100)")
    p.add_argument("--channel-config", default=None,
                   help="key=value file overriding channel parameters")


# ---------------------------------------------------------------------------
# Subcommands


def cmd_generate(args) -> int:
    scn = scn_mod.generate(_gen_config(args), args.seed)
    if args.blockages:
        scn = scn_mod.apply_blockages(
            scn, args.blockage_seed, owc_prob=args.owc_block_prob,
            rf_prob=args.rf_block_prob)
    scn_mod.save_scenario(scn, args.out)
    print(f"wrote scenario seed={args.seed} devices={scn.n_devices} "
          f"messages={len(scn.messages)} -> {args.out}")
    return EXIT_OK


def cmd_solve(args) -> int:
    scn = scn_mod.load_scenario(args.scenario)
    if args.rf_only:
        scn = scn_mod.rf_only(scn)
    model = build_model(scn, alpha1=args.alpha1, alpha2=args.alpha2, omega=args.omega)
    if args.lp_out:
        with open(args.lp_out, "w", encoding="utf-8") as fh:
            fh.write(export_lp(model))
    sol = solve_bnb(model, _limits(args))
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write(solution_to_json(sol))
    print(f"objective={sol.objective:.9g} nodes={sol.stats.nodes} "
          f"optimal={sol.stats.optimal} gap={sol.stats.gap:.4g} -> {args.out}")
    return EXIT_OK


def cmd_replay(args) -> int:
    scn = scn_mod.load_scenario(args.scenario)
    if args.rf_only:
        scn = scn_mod.rf_only(scn)
    with open(args.solution, encoding="utf-8") as fh:
        sol = solution_from_json(fh.read())
    trace = replay.simulate(scn, sol, omega=args.omega)
    report = replay.rates_and_energy(trace)
    text = replay.metrics_to_csv([(f"seed {scn.seed}", report)])
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    if args.trace_out:
        with open(args.trace_out, "w", encoding="utf-8") as fh:
            json.dump({
                "residual_j": trace.residual_j.tolist(),
                "deliveries": trace.deliveries,
                "active_peer": trace.active_peer.tolist(),
                "active_tech": trace.active_tech.tolist(),
                "s": trace.s.tolist(),
                "expired": trace.expired,
            }, fh, indent=1)
    print(text, end="")
    return EXIT_OK


def _pipeline_one(seed: int, args):
    """generate -> solve -> replay for one seed; returns (scn, sol, trace)."""
    scn = scn_mod.generate(_gen_config(args), seed)
    sol = _solve_scenario(scn, args)
    trace = replay.simulate(scn, sol, omega=args.omega)
    return scn, sol, trace


def cmd_export_dataset(args) -> int:
    seeds = range(args.seed_start, args.seed_start + args.seeds)
    results = _map_seeds(lambda s: _pipeline_one(s, args), seeds)
    snapshots = []
    for _, _, trace in results:
        snapshots.extend(graphio.snapshots_for_trace(trace))
    graphio.write_dataset(snapshots, args.out)
    print(f"wrote {len(snapshots)} snapshots ({args.seeds} scenarios) -> {args.out}")
    return EXIT_OK


def _snapshot_key(dataset):
    """Index input snapshots of a dataset by (seed, step)."""
    return {(s.seed, s.step): s for s in dataset if s.kind == "input"}


def cmd_repair(args) -> int:
    dataset = graphio.read_dataset(args.dataset)
    inputs = _snapshot_key(dataset)
    preds = graphio.read_predictions(args.predictions)
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write(json.dumps({"schema": "hyrosched-repaired-labels", "version": 1}) + "\n")
        for seed, step, probs in preds:
            snap = inputs.get((seed, step))
            if snap is None:
                raise ValueError(f"no input snapshot for seed={seed} step={step}")
            labels = repair_mod.top2_repair(probs, snap.availability(), snap.n_devices)
            fh.write(json.dumps({
                "seed": seed, "step": step, "labels": labels.tolist()
            }) + "\n")
    print(f"repaired {len(preds)} snapshots -> {args.out}")
    return EXIT_OK


def cmd_score(args) -> int:
    dataset = graphio.read_dataset(args.dataset)
    inputs = _snapshot_key(dataset)
    recorded = {(s.seed, s.step): s for s in dataset if s.kind == "recorded"}
    preds = graphio.read_predictions(args.predictions)
    correct_before = correct_after = total = 0
    feasible_after = 0
    for seed, step, probs in preds:
        snap = inputs.get((seed, step))
        truth_snap = recorded.get((seed, step))
        if snap is None or truth_snap is None:
            raise ValueError(f"dataset lacks snapshots for seed={seed} step={step}")
        avail = snap.availability()
        truth = np.array([
            graphio.augment_label(int(avail[e]), int(truth_snap.labels[e]))
            for e in range(len(avail))
        ])
        hard = probs.argmax(axis=1)
        repaired = repair_mod.top2_repair(probs, avail, snap.n_devices)
        chosen = np.array([graphio.decode_label(int(c))[1] for c in repaired])
        if not repair_mod.detect_violations(chosen, avail, snap.n_devices):
            feasible_after += 1
        correct_before += int((hard == truth).sum())
        correct_after += int((repaired == truth).sum())
        total += len(truth)
    print(f"accuracy_before_repair,{correct_before / total:.6f}")
    print(f"accuracy_after_repair,{correct_after / total:.6f}")
    print(f"feasibility_rate_after_repair,{feasible_after / len(preds):.6f}")
    return EXIT_OK


def _compare_rows(args, seeds):
    configs = []
    if args.hybrid:
        configs.append(("hybrid", False))
    if args.rf_only:
        configs.append(("rf-only", True))

    def run(seed):
        scn = scn_mod.generate(_gen_config(args), seed)
        rows = []
        for name, restrict in configs:
            variant = scn_mod.rf_only(scn) if restrict else scn
            sol = _solve_scenario(variant, args)
            report = replay.rates_and_energy(replay.simulate(variant, sol, omega=args.omega))
            rows.append((f"seed {seed} {name}", report))
        return rows

    return [row for rows in _map_seeds(run, seeds) for row in rows]


def cmd_compare(args) -> int:
    if not (args.hybrid or args.rf_only):
        args.hybrid = args.rf_only = True
    seeds = range(args.seed_start, args.seed_start + args.seeds)
    rows = _compare_rows(args, seeds)
    text = replay.metrics_to_csv(rows)
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write(text)
    by_config: dict[str, list[replay.MetricsReport]] = {}
    for label, report in rows:
        by_config.setdefault(label.split()[-1], []).append(report)
    for name, reports in by_config.items():
        print(f"{name}: mean M-AoI {np.mean([r.m_aoi for r in reports]):.4f}, "
              f"mean rate {np.mean([r.successful_transmission_rate for r in reports]):.4f}, "
              f"mean energy {np.mean([r.total_energy_j for r in reports]):.3e} J")
    print(f"wrote {len(rows)} rows -> {args.out}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    values = [int(v) for v in args.values.split(",")]
    seeds = range(args.seed_start, args.seed_start + args.seeds)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow([args.param] + replay.CSV_FIELDS)

    for value in values:
        def run(seed, value=value):
            kwargs = {"n_aps": args.aps, "horizon": args.horizon}
            if args.param == "load":
                kwargs["n_nodes"] = args.nodes
                kwargs["packets_per_device"] = value
            else:  # nodes
                kwargs["n_nodes"] = value
            scn = scn_mod.generate(scn_mod.GenConfig(**kwargs), seed)
            sol = _solve_scenario(scn, args)
            return replay.rates_and_energy(replay.simulate(scn, sol, omega=args.omega))

        for seed, report in zip(seeds, _map_seeds(run, seeds)):
            writer.writerow([value, f"seed {seed}",
                             f"{report.m_aoi:.12g}", f"{report.p_aoi:.12g}",
                             f"{report.successful_transmission_rate:.12g}",
                             f"{report.total_energy_j:.12g}",
                             f"{report.energy_per_bit_j:.12g}",
                             report.packets_exchanged,
                             max(report.switch_count, default=0)])
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write(buf.getvalue())
    print(f"swept {args.param} over {values} -> {args.out}")
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hyrosched",
        description="Scheduling experiments for hybrid RF-optical IoT networks",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="generate a scenario file")
    _add_instance_flags(p)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--blockages", action="store_true",
                   help="overlay link blockage events")
    p.add_argument("--blockage-seed", type=int, default=0)
    p.add_argument("--owc-block-prob", type=float, default=0.2)
    p.add_argument("--rf-block-prob", type=float, default=0.2)
    p.set_defaults(fn=cmd_generate)

    p = sub.add_parser("solve", help="solve a scenario file")
    p.add_argument("--scenario", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--lp-out", default=None, help="also export the model as LP text")
    p.add_argument("--rf-only", action="store_true",
                   help="forbid optical links before solving")
    _add_solver_flags(p)
    p.set_defaults(fn=cmd_solve)

    p = sub.add_parser("replay", help="replay a solution and report metrics")
    p.add_argument("--scenario", required=True)
    p.add_argument("--solution", required=True)
    p.add_argument("--out", default=None, help="metrics CSV path")
    p.add_argument("--trace-out", default=None, help="per-step trace dump (JSON)")
    p.add_argument("--rf-only", action="store_true")
    p.add_argument("--omega", type=int, default=None)
    p.set_defaults(fn=cmd_replay)

    p = sub.add_parser("export-dataset",
                       help="generate+solve+replay seeds and write graph snapshots")
    _add_instance_flags(p)
    p.add_argument("--seeds", type=int, default=5)
    p.add_argument("--seed-start", type=int, default=0)
    p.add_argument("--out", required=True)
    _add_solver_flags(p)
    p.set_defaults(fn=cmd_export_dataset)

    p = sub.add_parser("repair", help="repair predicted probabilities into feasible labels")
    p.add_argument("--predictions", required=True)
    p.add_argument("--dataset", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_repair)

    p = sub.add_parser("score", help="accuracy and feasibility of prediction files")
    p.add_argument("--predictions", required=True)
    p.add_argument("--dataset", required=True)
    p.set_defaults(fn=cmd_score)

    p = sub.add_parser("compare", help="hybrid vs RF-only metric tables over seeds")
    _add_instance_flags(p)
    p.add_argument("--seeds", type=int, default=50)
    p.add_argument("--seed-start", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--hybrid", action="store_true", help="include the hybrid configuration")
    p.add_argument("--rf-only", action="store_true", help="include the RF-only configuration")
    _add_solver_flags(p)
    p.set_defaults(fn=cmd_compare)

    p = sub.add_parser("sweep", help="vary load or node count and report metrics")
    _add_instance_flags(p)
    p.add_argument("--param", choices=("load", "nodes"), required=True)
    p.add_argument("--values", required=True, help="comma-separated values")
    p.add_argument("--seeds", type=int, default=10)
    p.add_argument("--seed-start", type=int, default=0)
    p.add_argument("--out", required=True)
    _add_solver_flags(p)
    p.set_defaults(fn=cmd_sweep)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        return args.fn(args)
    except (FileNotFoundError, PermissionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FILE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FILE
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
