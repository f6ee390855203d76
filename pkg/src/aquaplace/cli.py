"""Command-line driver: generate, analyze, build, solve, evaluate, replan.

Every command reads and writes JSON documents with a schema field; the only
timestamp lives under the "meta" key so reruns with the same seed produce
identical content otherwise. Failures print a single JSON line to stderr
and exit nonzero. Report-producing commands also render figures next to
the data files unless --no-figures is given.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from datetime import datetime, timezone
from pathlib import Path

from . import centrality as centrality_mod
from . import plots
from .anneal import Schedule, get_solver, histogram
from .errors import AquaplaceError, SchemaError
from .network import Network, generate_grid_network, load_network, save_network, to_document
from .placement import (
    Hyperparams,
    Session,
    build_placement_qubo,
    create_session,
    mark,
    placement_registry,
    random_baseline,
    replan,
    report_to_document,
    result_to_document,
    session_from_document,
    session_to_document,
    solve_placement,
    unmark,
)
from .qubo import to_document as qubo_to_document

EVALUATION_SCHEMA = "evaluation/1"
HISTOGRAM_SCHEMA = "histogram/1"

DEFAULT_BINS = 30
DEFAULT_TRIALS = 10_000


def _now_iso() -> str:
    return datetime.now(timezone.utc).isoformat()


def _write_json(path: Path, document: dict) -> None:
    payload = dict(document)
    payload["meta"] = {"created": _now_iso()}
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    print(f"wrote {path}")


def _read_json(path: Path) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def _load_centrality(path: Path) -> centrality_mod.CentralityMap:
    return centrality_mod.from_document(_read_json(path))


def _hyperparams_from_args(args: argparse.Namespace) -> Hyperparams:
    return Hyperparams(
        s=args.sensors,
        A=args.weight_a,
        B=args.weight_b,
        C=args.weight_c,
        D=args.weight_d,
        E=args.weight_e,
        mode=args.mode,
        f_model=args.cost_model,
    )


def _schedule_from_args(args: argparse.Namespace) -> Schedule:
    return Schedule(
        t_hot=args.t_hot,
        t_cold=args.t_cold,
        sweeps=args.sweeps,
        runs=args.runs,
        seed=args.seed,
    )


def _write_histogram_files(energies, bins: int, csv_path: Path, figure_path: Path | None) -> None:
    table = histogram(energies, bins)
    csv_path.parent.mkdir(parents=True, exist_ok=True)
    with open(csv_path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["center", "density"])
        for center, density in zip(table.centers, table.densities):
            writer.writerow([repr(float(center)), repr(float(density))])
    print(f"wrote {csv_path}")
    if figure_path is not None:
        plots.plot_histogram(table, figure_path)
        print(f"wrote {figure_path}")


def _maybe_plot(enabled: bool, net: Network, render, path: Path) -> None:
    if not enabled:
        return
    if not net.has_coords:
        print("figure skipped: network has no coordinates")
        return
    render(path)
    print(f"wrote {path}")


# -- subcommands -----------------------------------------------------------


def cmd_generate(args: argparse.Namespace) -> int:
    net = generate_grid_network(
        size=args.size,
        seed=args.seed,
        inaccessible_fraction=args.inaccessible,
        industrial_fraction=args.industrial,
        pipe_length=args.pipe_length,
    )
    save_network(net, args.out)
    print(f"wrote {args.out}")
    _maybe_plot(args.figures, net, lambda p: plots.plot_network(net, p),
                args.out.with_suffix(".png"))
    print(f"generated {len(net.real_nodes())} nodes, {len(net.real_edges())} pipes")
    return 0


def cmd_centrality(args: argparse.Namespace) -> int:
    net = load_network(args.network, lenient=args.lenient)
    weights = centrality_mod.tailored_centrality(net)
    _write_json(args.out, centrality_mod.to_document(weights))
    _maybe_plot(args.figures, net, lambda p: plots.plot_centrality(net, weights, p),
                args.out.with_suffix(".png"))
    return 0


def cmd_build(args: argparse.Namespace) -> int:
    net = load_network(args.network, lenient=args.lenient)
    weights = _load_centrality(args.centrality)
    hp = _hyperparams_from_args(args)
    session = _load_session(args.session) if args.session else None
    model = build_placement_qubo(net, weights, hp, session)
    _write_json(args.out, qubo_to_document(model))
    print(f"model: {len(model.registry)} variables, "
          f"{sum(1 for c in model.linear if c != 0.0)} linear, "
          f"{len(model.quadratic)} quadratic terms")
    return 0


def cmd_solve(args: argparse.Namespace) -> int:
    net = load_network(args.network, lenient=args.lenient)
    weights = _load_centrality(args.centrality)
    hp = _hyperparams_from_args(args)
    schedule = _schedule_from_args(args)
    session = _load_session(args.session) if args.session else None
    solver = get_solver(args.solver, schedule, max_vars=args.max_vars)
    report, result = solve_placement(net, weights, hp, schedule,
                                     session=session, solver=solver)
    out = args.out_dir
    _write_json(out / "report.json", report_to_document(report))
    _write_json(out / "result.json", result_to_document(result, placement_registry(net)))
    figure = (out / "histogram.png") if args.figures else None
    _write_histogram_files(result.energies(), args.bins, out / "histogram.csv", figure)
    _maybe_plot(args.figures, net, lambda p: plots.plot_placement(net, report, p),
                out / "placement.png")
    ok = "satisfied" if report.constraint_satisfied else "VIOLATED"
    print(f"best energy {report.energy:.6g} | {report.sensor_count} sensors "
          f"({report.accessible_count} accessible) | "
          f"coverage {100.0 * report.demand_coverage:.2f}% | constraint {ok}")
    return 0


def cmd_evaluate(args: argparse.Namespace) -> int:
    net = load_network(args.network, lenient=args.lenient)
    report_doc = _read_json(args.report)
    if "selected" not in report_doc:
        raise SchemaError("report document: missing key 'selected'")
    chosen = set(report_doc["selected"])
    unknown = [i for i in sorted(chosen) if i not in net.nodes]
    if unknown:
        raise SchemaError(f"report selects unknown node '{unknown[0]}'")
    total = sum(n.demand for n in net.real_nodes())
    coverage = sum(n.demand for n in net.real_nodes() if n.id in chosen) / total
    accessible = sum(1 for n in net.real_nodes() if n.id in chosen and n.accessible)
    mean, stddev = random_baseline(net, len(chosen), args.trials, args.seed)
    document = {
        "schema": EVALUATION_SCHEMA,
        "sensor_count": len(chosen),
        "accessible_count": accessible,
        "demand_coverage": coverage,
        "baseline": {"mean": mean, "stddev": stddev,
                     "trials": args.trials, "seed": args.seed},
        "advantage": coverage - mean,
    }
    if args.out:
        _write_json(args.out, document)
    print(f"coverage {100.0 * coverage:.2f}% vs random baseline "
          f"{100.0 * mean:.2f}% (stddev {100.0 * stddev:.2f}%, {args.trials} trials); "
          f"{accessible}/{len(chosen)} sensors accessible")
    return 0


def cmd_replan(args: argparse.Namespace) -> int:
    net = load_network(args.network, lenient=args.lenient)
    weights = _load_centrality(args.centrality)
    if args.session.exists():
        session = _load_session(args.session)
    else:
        session = create_session(_hyperparams_from_args(args),
                                 session_id=args.session.stem)
        print(f"created session {session.id}")
    for node_id in args.unmark:
        unmark(session, node_id)
    for spec_text in args.mark:
        node_id, _, status = spec_text.partition("=")
        if not node_id or not status:
            raise SchemaError(f"bad --mark '{spec_text}': expected NODE=STATUS")
        mark(session, net, node_id, status)
    schedule = _schedule_from_args(args)
    solver = get_solver(args.solver, schedule, max_vars=args.max_vars)
    report, result = replan(session, net, weights, schedule, solver=solver)
    _write_json(args.session, session_to_document(session))
    out = args.out_dir
    _write_json(out / "report.json", report_to_document(report))
    _write_json(out / "result.json", result_to_document(result, placement_registry(net)))
    _maybe_plot(args.figures, net, lambda p: plots.plot_placement(net, report, p),
                out / "placement.png")
    print(f"best energy {report.energy:.6g} | {report.sensor_count} sensors | "
          f"installed {sorted(session.installed)} | rejected {sorted(session.rejected)}")
    return 0


def cmd_histogram(args: argparse.Namespace) -> int:
    document = _read_json(args.result)
    if "energies" not in document:
        raise SchemaError("result document: missing key 'energies'")
    figure = args.out.with_suffix(".png") if args.figures else None
    _write_histogram_files(document["energies"], args.bins, args.out, figure)
    return 0


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import create_app

    app = create_app(network_path=args.network, data_dir=args.data_dir,
                     seed=args.seed, max_workers=args.workers)
    uvicorn.run(app, host=args.bind, port=args.port, log_level="warning")
    return 0


def _load_session(path: Path) -> Session:
    return session_from_document(_read_json(path))


# -- parser ----------------------------------------------------------------


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--seed", type=int, default=0,
                        help="seed for every random choice in this command (default 0)")
    parser.add_argument("--no-figures", dest="figures", action="store_false",
                        help="skip rendering figures")


def _add_network(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--network", type=Path, required=True,
                        help="network document (JSON)")
    parser.add_argument("--lenient", action="store_true",
                        help="ignore unknown keys when parsing the network")


def _add_hyperparams(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("model weights")
    group.add_argument("--sensors", type=int, default=5,
                       help="number of sensors s (default 5)")
    group.add_argument("--weight-a", type=float, default=1.0,
                       help="cover-term weight A (default 1)")
    group.add_argument("--weight-b", type=float, default=30.0,
                       help="cardinality weight B (default 30)")
    group.add_argument("--weight-c", type=float, default=5.0,
                       help="demand-cost weight C (default 5)")
    group.add_argument("--weight-d", type=float, default=1.0,
                       help="accessibility-cost weight D (default 1)")
    group.add_argument("--weight-e", type=float, default=None,
                       help="pin/forbid weight E (default 10*B)")
    group.add_argument("--mode", choices=["equality", "at_most"], default="equality",
                       help="cardinality constraint mode (default equality)")
    group.add_argument("--cost-model", choices=["linear", "exponential"],
                       default="linear", help="demand discount shape (default linear)")


def _add_schedule(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("annealing schedule")
    group.add_argument("--runs", type=int, default=100,
                       help="independent annealing runs (default 100)")
    group.add_argument("--sweeps", type=int, default=1000,
                       help="sweeps per run (default 1000)")
    group.add_argument("--t-hot", type=float, default=None,
                       help="starting temperature (default: probe the model)")
    group.add_argument("--t-cold", type=float, default=None,
                       help="final temperature (default: t-hot / 1000)")
    group.add_argument("--solver", choices=["sa", "exact"], default="sa",
                       help="sa = simulated annealing, exact = exhaustive (small models)")
    group.add_argument("--max-vars", type=int, default=24,
                       help="variable ceiling for the exact solver (default 24)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="aquaplace",
        description="Pressure-sensor placement on water networks via annealed "
                    "binary optimization.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write a synthetic grid network")
    p.add_argument("--out", type=Path, required=True, help="network document to write")
    p.add_argument("--size", type=int, default=5, help="grid side length (default 5)")
    p.add_argument("--inaccessible", type=float, default=0.3,
                   help="fraction of junctions marked inaccessible (default 0.3)")
    p.add_argument("--industrial", type=float, default=0.2,
                   help="fraction of junctions given industrial demand (default 0.2)")
    p.add_argument("--pipe-length", type=float, default=100.0,
                   help="grid pipe length (default 100)")
    _add_common(p)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("centrality", help="compute tailored edge centrality")
    _add_network(p)
    p.add_argument("--out", type=Path, required=True, help="centrality document to write")
    _add_common(p)
    p.set_defaults(func=cmd_centrality)

    p = sub.add_parser("build", help="assemble the placement model document")
    _add_network(p)
    p.add_argument("--centrality", type=Path, required=True,
                   help="centrality document from the centrality command")
    p.add_argument("--out", type=Path, required=True, help="model document to write")
    p.add_argument("--session", type=Path, default=None,
                   help="session document whose marks pin/forbid nodes")
    _add_hyperparams(p)
    _add_common(p)
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("solve", help="optimize a placement and write reports")
    _add_network(p)
    p.add_argument("--centrality", type=Path, required=True,
                   help="centrality document from the centrality command")
    p.add_argument("--out-dir", type=Path, required=True,
                   help="directory for report, result, histogram, and figures")
    p.add_argument("--session", type=Path, default=None,
                   help="session document whose marks pin/forbid nodes")
    p.add_argument("--bins", type=int, default=DEFAULT_BINS,
                   help=f"histogram bins (default {DEFAULT_BINS})")
    _add_hyperparams(p)
    _add_schedule(p)
    _add_common(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("evaluate", help="compare a report against random placement")
    _add_network(p)
    p.add_argument("--report", type=Path, required=True, help="report document to score")
    p.add_argument("--trials", type=int, default=DEFAULT_TRIALS,
                   help=f"random baseline draws (default {DEFAULT_TRIALS})")
    p.add_argument("--out", type=Path, default=None,
                   help="write the evaluation document here")
    _add_common(p)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("replan", help="apply field marks and re-optimize")
    _add_network(p)
    p.add_argument("--centrality", type=Path, required=True,
                   help="centrality document from the centrality command")
    p.add_argument("--session", type=Path, required=True,
                   help="session document; created with the given weights if absent")
    p.add_argument("--out-dir", type=Path, required=True,
                   help="directory for report, result, and figures")
    p.add_argument("--mark", action="append", default=[], metavar="NODE=STATUS",
                   help="mark a node installed or rejected (repeatable)")
    p.add_argument("--unmark", action="append", default=[], metavar="NODE",
                   help="clear a node's mark before applying new ones (repeatable)")
    _add_hyperparams(p)
    _add_schedule(p)
    _add_common(p)
    p.set_defaults(func=cmd_replan)

    p = sub.add_parser("histogram", help="bin a result's energies into a density table")
    p.add_argument("--result", type=Path, required=True, help="result document to bin")
    p.add_argument("--out", type=Path, required=True, help="CSV density table to write")
    p.add_argument("--bins", type=int, default=DEFAULT_BINS,
                   help=f"histogram bins (default {DEFAULT_BINS})")
    _add_common(p)
    p.set_defaults(func=cmd_histogram)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--network", type=Path, required=True, help="network document to serve")
    p.add_argument("--bind", default="127.0.0.1", help="bind address (default 127.0.0.1)")
    p.add_argument("--port", type=int, default=8765, help="port (default 8765)")
    p.add_argument("--data-dir", type=Path, default=Path("aquaplace-data"),
                   help="persistence directory (default ./aquaplace-data)")
    p.add_argument("--workers", type=int, default=None,
                   help="solver worker bound (default: available parallelism)")
    p.add_argument("--seed", type=int, default=0,
                   help="seed for every random choice in this command (default 0)")
    p.set_defaults(func=cmd_serve, figures=False, lenient=False)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (AquaplaceError, OSError, json.JSONDecodeError) as exc:
        line = json.dumps({"error": type(exc).__name__, "message": str(exc)})
        print(line, file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
