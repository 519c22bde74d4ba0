"""Acceptance suite: one test per release criterion, each printing a
PASS line and enforcing its stated tolerance and runtime bound."""

import json
import time

import numpy as np
import pytest

from graphrepair.active_learning import SelectionConfig, Strategy, run, write_audit
from graphrepair.cli import main
from graphrepair.ensemble import uncertainty
from graphrepair.evaluation import pairwise_prf, run_cell, run_experiment
from graphrepair.features import build_features
from graphrepair.graph import Cluster, connected_components, prune_weak_edges, source_map
from graphrepair.metrics import betweenness, bridges, closeness, clustering_coefficient, pagerank
from graphrepair.oracles import GoldOracle
from graphrepair.repair import EdgePartition, repair_cluster
from graphrepair.synthetic import generate_dataset

from conftest import random_connected_cluster
from test_evaluation import all_partitions, oracle_prf
from test_metrics import (
    oracle_betweenness,
    oracle_bridges,
    oracle_closeness,
    oracle_clustering_coefficient,
)
from test_repair import random_partition_case


def _ok(name):
    print(f"\nACCEPTANCE {name}: PASS")


def test_criterion_uncertainty_equation():
    start = time.perf_counter()
    assert uncertainty(0.5) == 0.25
    assert uncertainty(0.0) == 0.0
    assert uncertainty(1.0) == 0.0
    rng = np.random.default_rng(1)
    for p in rng.random(1000):
        assert uncertainty(float(p)) == pytest.approx(uncertainty(float(1 - p)), abs=1e-12)
        assert uncertainty(float(p)) <= 0.25
    elapsed = time.perf_counter() - start
    assert elapsed < 1.0, f"uncertainty suite took {elapsed:.2f}s"
    _ok("uncertainty-equation")


def test_criterion_metric_oracle_equivalence():
    start = time.perf_counter()
    rng = np.random.default_rng(2024)
    for _ in range(200):
        n = int(rng.integers(2, 9))
        cluster = random_connected_cluster(rng, n)

        node_bt, edge_bt = betweenness(cluster)
        exp_node, exp_edge = oracle_betweenness(cluster)
        for rid in cluster.member_ids:
            assert abs(node_bt[rid] - exp_node[rid]) < 1e-9
        for pair in cluster.edge_pairs():
            assert abs(edge_bt[pair] - exp_edge[pair]) < 1e-9

        close = closeness(cluster)
        for rid, expected in oracle_closeness(cluster).items():
            assert abs(close[rid] - expected) < 1e-9

        coeff = clustering_coefficient(cluster)
        for rid, expected in oracle_clustering_coefficient(cluster).items():
            assert abs(coeff[rid] - expected) < 1e-9

        assert bridges(cluster) == oracle_bridges(cluster)
        assert abs(sum(pagerank(cluster).values()) - 1.0) < 1e-8
    elapsed = time.perf_counter() - start
    assert elapsed < 30.0, f"metric equivalence took {elapsed:.2f}s"
    _ok("metric-oracle-equivalence")


def test_criterion_support_trace():
    em = [
        ("r1", "r2"),
        ("r1", "r3"),
        ("r2", "r4"),
        ("r3", "r4"),
        ("r4", "r5"),
        ("r5", "r6"),
    ]
    nm = [("r3", "r5")]
    cluster = Cluster(0, [f"r{i}" for i in range(1, 7)], {p: 0.8 for p in em + nm})
    result = repair_cluster(
        cluster, EdgePartition(frozenset(em), frozenset(nm))
    )
    assert sorted(result.clusters) == [("r1", "r2", "r3", "r4"), ("r5", "r6")]
    tie = [
        ev
        for ev in result.trace
        if ev.record_id == "r4" and ev.action == "keep" and ev.iteration == 1
    ]
    assert len(tie) == 1 and tie[0].support == 1 and tie[0].other_support == 1
    r2 = [ev for ev in result.trace if ev.record_id == "r2" and ev.action == "assign"]
    assert len(r2) == 1 and r2[0].support == 2 and r2[0].iteration == 2
    _ok("support-trace")


def test_criterion_repair_partition_properties():
    start = time.perf_counter()
    rng = np.random.default_rng(4040)
    for _ in range(500):
        n = int(rng.integers(2, 13))
        cluster, partition = random_partition_case(rng, n)
        result = repair_cluster(cluster, partition)
        flat = sorted(rid for group in result.clusters for rid in group)
        assert flat == list(cluster.member_ids)
        assert not result.cap_triggered
        by_record = {
            rid: i for i, group in enumerate(result.clusters) for rid in group
        }
        for u, v in partition.non_match:
            assert by_record[u] != by_record[v]
    elapsed = time.perf_counter() - start
    assert elapsed < 30.0, f"repair properties took {elapsed:.2f}s"
    _ok("repair-partition-properties")


def test_criterion_pairwise_f1_oracle():
    rng = np.random.default_rng(606)
    for n in range(1, 7):
        ids = [f"r{i}" for i in range(n)]
        for partition in all_partitions(ids):
            gold = {rid: f"e{int(rng.integers(0, max(1, n - 1)))}" for rid in ids}
            report = pairwise_prf(partition, gold)
            p, r, f1, tp, fp, fn = oracle_prf(partition, gold)
            assert (report.precision, report.recall, report.f1) == (p, r, f1)
            assert (
                report.true_positives,
                report.false_positives,
                report.false_negatives,
            ) == (tp, fp, fn)
    _ok("pairwise-f1-oracle")


E2E = dict(n_entities=200, n_sources=5, duplicate_ratio=0.5, corruption=0.2, seed=1)
E2E_SEED = 7


@pytest.fixture(scope="module")
def e2e_dataset():
    return generate_dataset(**E2E)


def test_criterion_end_to_end_improvement(e2e_dataset):
    start = time.perf_counter()
    means = {}
    for strategy in (Strategy.BOOTSTRAP, Strategy.BOOTSTRAP_EXT):
        runs = run_cell(
            e2e_dataset.records,
            e2e_dataset.graph,
            e2e_dataset.gold,
            budget=500,
            strategy=strategy,
            iter_budget=20,
            k=100,
            seed=E2E_SEED,
            repetitions=3,
        )
        for i, cell in enumerate(runs):
            assert cell.report.f1 > cell.baseline.f1, (
                f"{strategy.value} repetition {i}: repaired {cell.report.f1:.4f} "
                f"did not beat baseline {cell.baseline.f1:.4f}"
            )
        means[strategy] = sum(c.report.f1 for c in runs) / len(runs)
    assert means[Strategy.BOOTSTRAP_EXT] >= means[Strategy.BOOTSTRAP] - 0.05, (
        f"extended mean {means[Strategy.BOOTSTRAP_EXT]:.4f} fell more than 0.05 "
        f"below bootstrap mean {means[Strategy.BOOTSTRAP]:.4f}"
    )
    elapsed = time.perf_counter() - start
    assert elapsed < 300.0, f"end-to-end improvement took {elapsed:.1f}s"
    _ok(
        "end-to-end-improvement "
        f"(bootstrap {means[Strategy.BOOTSTRAP]:.4f}, "
        f"ext {means[Strategy.BOOTSTRAP_EXT]:.4f})"
    )


def test_criterion_noise_degradation(e2e_dataset):
    kwargs = dict(
        budgets=[500],
        strategies=[Strategy.BOOTSTRAP_EXT],
        repetitions=3,
        iter_budget=20,
        k=100,
        seed=E2E_SEED,
        dataset="synthetic",
    )
    no_noise = run_experiment(
        e2e_dataset.records, e2e_dataset.graph, e2e_dataset.gold,
        noise_ratios=[0.0], **kwargs
    )
    grid = run_experiment(
        e2e_dataset.records, e2e_dataset.graph, e2e_dataset.gold,
        noise_ratios=[0.0, 0.25, 0.5], **kwargs
    )
    by_ratio = {row["noise_ratio"]: row for row in grid}
    assert json.dumps(no_noise[0], sort_keys=True) == json.dumps(
        by_ratio[0.0], sort_keys=True
    ), "ratio-0 report must be bit-identical to the no-noise report"
    assert by_ratio[0.5]["f1"] < by_ratio[0.0]["f1"], (
        f"noise 0.5 mean F1 {by_ratio[0.5]['f1']:.4f} is not below "
        f"clean mean F1 {by_ratio[0.0]['f1']:.4f}"
    )
    degradation = by_ratio[0.0]["f1"] - by_ratio[0.5]["f1"]
    _ok(
        "noise-degradation "
        f"(clean {by_ratio[0.0]['f1']:.4f}, at-0.5 {by_ratio[0.5]['f1']:.4f}, "
        f"drop {degradation:.4f}; at-0.25 {by_ratio[0.25]['f1']:.4f})"
    )


def test_criterion_cli_determinism(tmp_path):
    dataset = tmp_path / "dataset"
    assert (
        main(
            [
                "synth",
                "--out", str(dataset),
                "--entities", "60",
                "--sources", "3",
                "--duplicate-ratio", "0.5",
                "--corruption", "0.2",
                "--seed", "23",
            ]
        )
        == 0
    )
    outs = []
    for name in ("first", "second"):
        out = tmp_path / name
        code = main(
            [
                "run",
                "--records", str(dataset / "records.csv"),
                "--edges", str(dataset / "edges.csv"),
                "--gold", str(dataset / "gold.csv"),
                "--budget", "100",
                "--iter-budget", "20",
                "--k", "50",
                "--strategy", "bootstrap-ext",
                "--seed", "42",
                "--out", str(out),
            ]
        )
        assert code == 0
        outs.append(out)
    first, second = outs
    assert (first / "clusters.csv").read_bytes() == (second / "clusters.csv").read_bytes()
    assert (first / "report.jsonl").read_bytes() == (second / "report.jsonl").read_bytes()
    _ok("cli-determinism")


def test_criterion_budget_accounting(tmp_path):
    dataset = generate_dataset(60, 3, 0.4, 0.2, seed=31)
    sources = source_map(dataset.records)
    clusters = connected_components(prune_weak_edges(dataset.graph, sources))
    space = build_features(clusters, sources)
    assert len(space) > 40
    config = SelectionConfig(
        budget=40, iter_budget=20, strategy=Strategy.BOOTSTRAP_EXT, k=20, seed=3
    )
    audit_path = tmp_path / "audit.jsonl"
    result = run(clusters, space, GoldOracle(dataset.gold), config, audit_path=audit_path)
    lines = [json.loads(l) for l in audit_path.read_text().splitlines() if l.strip()]
    assert len(lines) == 40, f"expected 40 oracle calls, audit has {len(lines)}"
    iterations = sorted({rec["iteration"] for rec in lines})
    assert iterations == [0, 1], f"expected 2 iterations, audit shows {iterations}"
    counts = {it: sum(1 for rec in lines if rec["iteration"] == it) for it in iterations}
    assert counts == {0: 20, 1: 20}
    assert len(result.training) == 40
    _ok("budget-accounting")
