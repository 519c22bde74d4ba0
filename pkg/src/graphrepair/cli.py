"""Command line entry points.

Subcommands:

* ``run``        batch repair with the gold-standard oracle; writes
                 clusters.csv, report.jsonl, model.json and per-repetition
                 audit logs into the output directory.
* ``experiment`` budgets x strategies x noise-ratios grid; writes one
                 JSON-lines report.
* ``synth``      generate a synthetic dataset (records/edges/gold CSVs).
* ``export-features`` dump the deduplicated feature matrix as CSV.
* ``serve``      start the interactive labeling HTTP service.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import dataset_io
from .active_learning import Strategy
from .errors import GraphRepairError
from .evaluation import cell_report, run_cell, run_experiment
from .synthetic import generate_dataset


def _strategy(text: str) -> Strategy:
    try:
        return Strategy(text)
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"unknown strategy {text!r}; choose from "
            f"{', '.join(s.value for s in Strategy)}"
        ) from None


def _add_dataset_args(parser: argparse.ArgumentParser, require_gold: bool) -> None:
    parser.add_argument("--records", required=True, help="records.csv path")
    parser.add_argument("--edges", required=True, help="edges.csv path")
    parser.add_argument("--gold", required=require_gold, help="gold.csv path")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="graphrepair",
        description="Repair entity-resolution clusters from similarity graphs.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="batch repair with the gold oracle")
    _add_dataset_args(run_p, require_gold=True)
    run_p.add_argument("--budget", type=int, required=True)
    run_p.add_argument("--iter-budget", type=int, default=20)
    run_p.add_argument("--k", type=int, default=100)
    run_p.add_argument("--strategy", type=_strategy, default=Strategy.BOOTSTRAP_EXT)
    run_p.add_argument("--seed", type=int, default=0)
    run_p.add_argument("--noise", type=float, default=0.0)
    run_p.add_argument("--threshold", type=float, default=None)
    run_p.add_argument("--repetitions", type=int, default=1)
    run_p.add_argument("--dataset-name", default=None)
    run_p.add_argument("--out", required=True, help="output directory")

    exp_p = sub.add_parser("experiment", help="run a budgets x strategies x noise grid")
    _add_dataset_args(exp_p, require_gold=True)
    exp_p.add_argument("--budgets", required=True, help="comma-separated budgets")
    exp_p.add_argument(
        "--strategies",
        default="bootstrap,bootstrap-ext",
        help="comma-separated strategies",
    )
    exp_p.add_argument("--noise-ratios", default="0", help="comma-separated ratios")
    exp_p.add_argument("--iter-budget", type=int, default=20)
    exp_p.add_argument("--k", type=int, default=100)
    exp_p.add_argument("--seed", type=int, default=0)
    exp_p.add_argument("--threshold", type=float, default=None)
    exp_p.add_argument("--repetitions", type=int, default=3)
    exp_p.add_argument("--dataset-name", default=None)
    exp_p.add_argument("--out", required=True, help="report JSON-lines path")

    synth_p = sub.add_parser("synth", help="generate a synthetic dataset")
    synth_p.add_argument("--out", required=True, help="output directory")
    synth_p.add_argument("--entities", type=int, default=200)
    synth_p.add_argument("--sources", type=int, default=5)
    synth_p.add_argument("--duplicate-ratio", type=float, default=0.5)
    synth_p.add_argument("--corruption", type=float, default=0.2)
    synth_p.add_argument("--edge-threshold", type=float, default=0.55)
    synth_p.add_argument("--seed", type=int, default=0)

    feat_p = sub.add_parser("export-features", help="dump the feature matrix CSV")
    _add_dataset_args(feat_p, require_gold=False)
    feat_p.add_argument("--threshold", type=float, default=None)
    feat_p.add_argument("--out", required=True, help="feature matrix CSV path")

    serve_p = sub.add_parser("serve", help="start the labeling HTTP service")
    serve_p.add_argument("--state-dir", default=None)
    serve_p.add_argument("--host", default="127.0.0.1")
    serve_p.add_argument("--port", type=int, default=8765)

    return parser


def _cmd_run(args) -> int:
    records = dataset_io.load_records(args.records)
    graph = dataset_io.load_edges(args.edges, records)
    gold = dataset_io.load_gold(args.gold)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    audit_paths = [out / f"audit_rep{i}.jsonl" for i in range(args.repetitions)]
    runs = run_cell(
        records,
        graph,
        gold,
        budget=args.budget,
        strategy=args.strategy,
        noise_ratio=args.noise,
        threshold=args.threshold,
        iter_budget=args.iter_budget,
        k=args.k,
        seed=args.seed,
        repetitions=args.repetitions,
        audit_paths=audit_paths,
    )
    dataset_name = args.dataset_name or Path(args.records).stem
    report = cell_report(
        dataset_name,
        runs,
        budget=args.budget,
        strategy=args.strategy,
        noise_ratio=args.noise,
        threshold=args.threshold,
    )
    dataset_io.write_report(out / "report.jsonl", [report])
    dataset_io.write_clusters(out / "clusters.csv", runs[0].repair.assignments)
    if runs[0].run_result.model is not None:
        runs[0].run_result.model.save(out / "model.json")
    print(
        f"repaired f1={report['f1']:.4f} baseline_f1={report['baseline_f1']:.4f} "
        f"({args.repetitions} repetition(s); outputs in {out})"
    )
    return 0


def _cmd_experiment(args) -> int:
    records = dataset_io.load_records(args.records)
    graph = dataset_io.load_edges(args.edges, records)
    gold = dataset_io.load_gold(args.gold)
    budgets = [int(x) for x in args.budgets.split(",") if x]
    strategies = [_strategy(x) for x in args.strategies.split(",") if x]
    ratios = [float(x) for x in args.noise_ratios.split(",") if x]
    reports = run_experiment(
        records,
        graph,
        gold,
        budgets=budgets,
        strategies=strategies,
        noise_ratios=ratios,
        repetitions=args.repetitions,
        iter_budget=args.iter_budget,
        k=args.k,
        seed=args.seed,
        threshold=args.threshold,
        dataset=args.dataset_name or Path(args.records).stem,
    )
    dataset_io.write_report(args.out, reports)
    print(f"wrote {len(reports)} report rows to {args.out}")
    return 0


def _cmd_synth(args) -> int:
    dataset = generate_dataset(
        n_entities=args.entities,
        n_sources=args.sources,
        duplicate_ratio=args.duplicate_ratio,
        corruption=args.corruption,
        seed=args.seed,
        edge_threshold=args.edge_threshold,
    )
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    dataset_io.write_records(out / "records.csv", dataset.records)
    dataset_io.write_edges(out / "edges.csv", dataset.graph)
    dataset_io.write_gold(out / "gold.csv", dataset.gold)
    print(
        f"wrote {len(dataset.records)} records, {dataset.graph.edge_count} edges "
        f"to {out}"
    )
    return 0


def _cmd_export_features(args) -> int:
    from .pipeline import prepare

    records = dataset_io.load_records(args.records)
    graph = dataset_io.load_edges(args.edges, records)
    data = prepare(records, graph, threshold=args.threshold)
    data.space.export_matrix(args.out)
    print(f"wrote {len(data.space)} unique vectors to {args.out}")
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    app = create_app(state_dir=args.state_dir)
    uvicorn.run(app, host=args.host, port=args.port)
    return 0


_COMMANDS = {
    "run": _cmd_run,
    "experiment": _cmd_experiment,
    "synth": _cmd_synth,
    "export-features": _cmd_export_features,
    "serve": _cmd_serve,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except GraphRepairError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
