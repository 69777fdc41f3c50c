"""Reproduction report and file-based reporting for the WBC case study.

The reproduction report is the structured comparison between a fresh
pipeline run and the reference tables: ingestion counts, discovered boxes
against the reference geometry, reference-rule replay counts, joined-rule
coverage, and reassigned mini-rule error counts.  Geometry comparisons skip
the box whose reference corners are flagged unreliable.

`write_report` materializes the whole run into a directory: delimited
outputs (CSV / JSONL) next to matplotlib figures.
"""

from __future__ import annotations

import csv
import json
import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from .boxes import DiscoveryConfig, DiscoveryTrace, discover
from .crossval import CVReport
from .dataset import LabeledDataset, class_counts
from .mapping import MappingMode, encode
from .reference import (
    EXPECTED_CLASS_COUNTS,
    EXPECTED_TOTAL,
    REFERENCE_BOXES,
    REFERENCE_JOINED_COVERAGE,
    REFERENCE_REASSIGNED,
    REFERENCE_RULES,
    REFERENCE_TOP4_COVERED,
    reference_ruleset,
)
from .rules import (
    CoverageIndex,
    Rule,
    RuleSet,
    evaluate,
    from_trace,
    join,
    sequential_assignments,
)
from . import storage


def _match(expected, actual) -> dict:
    return {"expected": expected, "actual": actual, "matches": expected == actual}


def reproduction_report(
    ds: LabeledDataset,
    mode: MappingMode,
    trace: DiscoveryTrace,
    graphs,
) -> dict:
    """Compare one discovery run and the reference tables, field by field."""
    counts = class_counts(ds)
    rs = from_trace(trace, graphs)
    metrics = evaluate(rs, graphs, ds.labels)
    supports = sorted((s.stats.support for s in trace.steps), reverse=True)
    top4 = sum(supports[:4])

    report: dict = {
        "ingestion": {
            "total": _match(EXPECTED_TOTAL, len(ds)),
            "per_class": _match(EXPECTED_CLASS_COUNTS, counts),
        },
        "discovery": {
            "boxes": _match(len(REFERENCE_BOXES), len(trace.steps)),
            "all_boxes_pure": all(s.stats.purity == 1.0 for s in trace.steps),
            "covered": metrics.covered,
            "total": len(ds),
            "full_coverage": metrics.covered == len(ds),
            "top4_covered": _match(REFERENCE_TOP4_COVERED, top4),
            "top4_share": top4 / len(ds) if len(ds) else None,
        },
    }

    # geometry: does any discovered box match each reference box exactly?
    discovered = {s.box.corners for s in trace.steps}
    geometry = {}
    for bid, rb in REFERENCE_BOXES.items():
        if rb.corners_unreliable:
            geometry[bid] = {"skipped": "reference corners unreliable"}
            continue
        geometry[bid] = {
            "reference": list(rb.box.corners),
            "found": rb.box.corners in discovered,
        }
    report["reference_geometry"] = geometry

    # replay the reference rules on the real data
    ref = reference_ruleset()
    preds = sequential_assignments(ref, [g for g in graphs])
    fired: dict[str, int] = {}
    for p in preds:
        if p.rule_id:
            fired[p.rule_id] = fired.get(p.rule_id, 0) + 1
    report["reference_rule_replay"] = {
        rid: _match(count, fired.get(rid, 0)) for rid, _t, _p, _n, count in REFERENCE_RULES
    }

    # joined-rule coverage targets over reference geometry
    joined_checks = {}
    boxes = {bid: rb.box for bid, rb in REFERENCE_BOXES.items()}
    r13 = RuleSet(
        rules=[Rule(id="R1,3", target="benign", positive=("B1", "B3"))], boxes=boxes
    )
    joined_checks["R1,3"] = _match(
        REFERENCE_JOINED_COVERAGE["R1,3"],
        sum(1 for p in sequential_assignments(r13, graphs) if not p.refused),
    )
    r135 = RuleSet(
        rules=[
            Rule(
                id="R1,3,5",
                target="benign",
                positive=("B1", "B3"),
                else_branch=Rule(id="R5", target="malignant", positive=("B5",)),
            )
        ],
        boxes=boxes,
    )
    joined_checks["R1,3,5"] = _match(
        REFERENCE_JOINED_COVERAGE["R1,3,5"],
        sum(1 for p in sequential_assignments(r135, graphs) if not p.refused),
    )
    report["joined_coverage"] = joined_checks

    # reassigned mini-rule raw counts over reference geometry
    index = CoverageIndex(boxes, graphs)
    reassigned = {}
    for rid, (dom_count, off_count) in REFERENCE_REASSIGNED.items():
        bid = "B" + rid[1:-1]
        raw = index.by_box[bid]
        by_class: dict[str, int] = {}
        for i in raw:
            name = ds.labels[i].name
            by_class[name] = by_class.get(name, 0) + 1
        ordered = sorted(by_class.items(), key=lambda kv: -kv[1])
        dom = ordered[0][1] if ordered else 0
        off = sum(v for _k, v in ordered[1:])
        reassigned[rid] = _match([dom_count, off_count], [dom, off])
    report["reassigned_counts"] = reassigned

    deviations = []

    def walk(prefix: str, node):
        if isinstance(node, dict):
            if set(node) == {"expected", "actual", "matches"}:
                if not node["matches"]:
                    deviations.append(prefix)
                return
            for key, sub in node.items():
                walk(f"{prefix}.{key}" if prefix else key, sub)

    walk("", report)
    report["deviations"] = deviations
    return report


def _rule_rows(rs: RuleSet, metrics) -> list[dict]:
    rows = []
    for rule in rs.rules:
        entry = metrics.per_rule.get(rule.id, {})
        rows.append(
            {
                "rule": rule.id,
                "target": rule.target,
                "positive": "|".join(rule.positive),
                "negated": "|".join(rule.negated),
                "fired": entry.get("fired", 0),
                "correct": entry.get("correct", 0),
                "precision": entry.get("precision"),
            }
        )
    return rows


def _coverage_figure(path: str, rows: list[dict], colors: dict[str, str]) -> None:
    fig, ax = plt.subplots(figsize=(8, 4.5))
    names = [r["rule"] for r in rows]
    fired = [r["fired"] for r in rows]
    bar_colors = [colors.get(r["target"], "steelblue") for r in rows]
    ax.bar(names, fired, color=bar_colors)
    ax.set_xlabel("rule")
    ax.set_ylabel("cases fired")
    ax.set_title("Per-rule coverage")
    ax.tick_params(axis="x", rotation=60)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def _cumulative_figure(path: str, rows: list[dict], total: int) -> None:
    fig, ax = plt.subplots(figsize=(8, 4.5))
    cum = []
    acc = 0
    for r in rows:
        acc += r["fired"]
        cum.append(100.0 * acc / total if total else 0.0)
    ax.plot(range(1, len(cum) + 1), cum, marker="o")
    ax.set_xlabel("rules applied")
    ax.set_ylabel("% of cases covered")
    ax.set_ylim(0, 105)
    ax.set_title("Cumulative coverage")
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def _cv_figure(path: str, report: CVReport) -> None:
    fig, ax = plt.subplots(figsize=(8, 4.5))
    folds = [f.fold for f in report.folds]
    accs = [100.0 * f.accuracy if f.accuracy is not None else 0.0 for f in report.folds]
    ax.bar(folds, accs, color="steelblue")
    ax.set_xlabel("fold")
    ax.set_ylabel("accuracy on decided cases (%)")
    ax.set_ylim(0, 105)
    ax.set_title("Cross-validation fold accuracy")
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def write_report(
    outdir: str,
    ds: LabeledDataset,
    mode: MappingMode,
    dcfg: DiscoveryConfig | None = None,
    cv_report: CVReport | None = None,
) -> dict:
    """Run the pipeline and write delimited outputs plus figures to a
    directory.  Returns the reproduction report dict."""
    os.makedirs(outdir, exist_ok=True)
    dcfg = dcfg or DiscoveryConfig()
    graphs = [encode(p.values, mode) for p in ds.points]
    trace = discover(graphs, ds.labels, dcfg)
    rs = from_trace(trace, graphs)
    joined = join(rs, graphs)
    metrics = evaluate(rs, graphs, ds.labels)

    storage.write_trace(os.path.join(outdir, "trace.jsonl"), trace)
    storage.write_ruleset(os.path.join(outdir, "ruleset.jsonl"), rs)
    storage.write_ruleset(os.path.join(outdir, "ruleset_joined.jsonl"), joined)

    rows = _rule_rows(rs, metrics)
    with open(os.path.join(outdir, "rules.csv"), "w", newline="") as fh:
        writer = csv.DictWriter(
            fh,
            fieldnames=["rule", "target", "positive", "negated", "fired", "correct", "precision"],
        )
        writer.writeheader()
        writer.writerows(rows)

    report = reproduction_report(ds, mode, trace, graphs)
    with open(os.path.join(outdir, "reproduction_report.json"), "w") as fh:
        json.dump(report, fh, indent=2)

    colors = {lab.name: lab.color for lab in ds.classes}
    _coverage_figure(os.path.join(outdir, "rule_coverage.png"), rows, colors)
    _cumulative_figure(os.path.join(outdir, "cumulative_coverage.png"), rows, len(ds))
    if cv_report is not None:
        with open(os.path.join(outdir, "cv_report.json"), "w") as fh:
            json.dump(cv_report.to_dict(), fh, indent=2)
        with open(os.path.join(outdir, "cv_folds.csv"), "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["fold", "size", "decided", "correct", "refused", "accuracy"])
            for f in cv_report.folds:
                writer.writerow([f.fold, f.size, f.decided, f.correct, f.refused, f.accuracy])
        _cv_figure(os.path.join(outdir, "cv_folds.png"), cv_report)
    return report
