import json
import os
import xml.etree.ElementTree as ET

import pytest

from inline2d import storage
from inline2d.boxes import DiscoveryConfig, discover
from inline2d.cli import main
from inline2d.rules import from_trace


def run(argv):
    return main(argv)


def test_map_writes_graph_dump(tmp_path, capsys):
    out = tmp_path / "graphs.jsonl"
    assert run(["map", "--wbc", "--mode", "partial-dynamic", "--out", str(out)]) == 0
    graphs, labels, ids = storage.read_graphs(out)
    assert len(graphs) == 683
    assert "683 cases" in capsys.readouterr().out


def test_pipeline_composition_matches_in_process(tmp_path, wbc, wbc_graphs):
    graphs_file = tmp_path / "graphs.jsonl"
    trace_file = tmp_path / "trace.jsonl"
    rules_file = tmp_path / "rules.jsonl"
    assert run(["map", "--wbc", "--out", str(graphs_file)]) == 0
    assert run(
        [
            "discover",
            "--graphs", str(graphs_file),
            "--trace-out", str(trace_file),
            "--ruleset-out", str(rules_file),
        ]
    ) == 0
    from_files = storage.read_trace(trace_file)
    direct = discover(wbc_graphs, wbc.labels, DiscoveryConfig())
    assert [s.box.corners for s in from_files.steps] == [s.box.corners for s in direct.steps]
    rs_files = storage.read_ruleset(rules_file)
    rs_direct = from_trace(direct, wbc_graphs)
    assert rs_files.rules == rs_direct.rules


def test_discover_deterministic_bytes(tmp_path):
    outs = []
    for tag in ("a", "b"):
        trace_file = tmp_path / f"trace_{tag}.jsonl"
        rules_file = tmp_path / f"rules_{tag}.jsonl"
        assert run(
            ["discover", "--wbc", "--trace-out", str(trace_file), "--ruleset-out", str(rules_file)]
        ) == 0
        outs.append((trace_file.read_bytes(), rules_file.read_bytes()))
    assert outs[0] == outs[1]


def test_classify_and_prune_and_join(tmp_path, capsys):
    trace_file = tmp_path / "trace.jsonl"
    rules_file = tmp_path / "rules.jsonl"
    run(["discover", "--wbc", "--trace-out", str(trace_file), "--ruleset-out", str(rules_file)])
    capsys.readouterr()  # drop the discover output

    preds_file = tmp_path / "preds.jsonl"
    assert run(
        ["classify", "--ruleset", str(rules_file), "--wbc", "--predictions-out", str(preds_file)]
    ) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["covered"] == 683
    assert payload["accuracy_decided"] == 1.0
    ids, preds = storage.read_predictions(preds_file)
    assert len(ids) == 683

    joined_file = tmp_path / "joined.jsonl"
    assert run(["join", "--ruleset", str(rules_file), "--wbc", "--out", str(joined_file)]) == 0
    joined = storage.read_ruleset(joined_file)
    assert len(joined) <= 683

    pruned_file = tmp_path / "pruned.jsonl"
    assert run(
        [
            "prune", "--ruleset", str(rules_file), "--wbc",
            "--strategy", "refuse", "--threshold", "7", "--out", str(pruned_file),
        ]
    ) == 0
    pruned = storage.read_ruleset(pruned_file)
    assert len(pruned) < len(storage.read_ruleset(rules_file))


def test_classify_empty_ruleset_refuses_everything(tmp_path, capsys):
    empty = tmp_path / "empty.jsonl"
    empty.write_text("")
    assert run(["classify", "--ruleset", str(empty), "--wbc"]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["covered"] == 0
    assert payload["refusal_fraction"] == 1.0


def test_cv_seeded_byte_identical(tmp_path):
    reports = []
    for tag in ("a", "b"):
        out = tmp_path / f"cv_{tag}.json"
        assert run(
            ["cv", "--wbc", "--k", "10", "--seed", "7", "--adversarial", "mini-box", "--out", str(out)]
        ) == 0
        reports.append(out.read_bytes())
    assert reports[0] == reports[1]


def test_render_svg_to_file(tmp_path):
    out = tmp_path / "scene.svg"
    trace_file = tmp_path / "trace.jsonl"
    rules_file = tmp_path / "rules.jsonl"
    run(["discover", "--wbc", "--trace-out", str(trace_file), "--ruleset-out", str(rules_file)])
    assert run(
        [
            "render", "--wbc", "--mirrored", "--overlay-trace", str(trace_file),
            "--sample-limit", "50", "--out", str(out),
        ]
    ) == 0
    root = ET.fromstring(out.read_text())
    assert root.tag.endswith("svg")


def test_report_writes_outputs(tmp_path):
    outdir = tmp_path / "report"
    assert run(["report", "--wbc", "--outdir", str(outdir)]) == 0
    names = set(os.listdir(outdir))
    assert {
        "trace.jsonl",
        "ruleset.jsonl",
        "ruleset_joined.jsonl",
        "rules.csv",
        "reproduction_report.json",
        "rule_coverage.png",
        "cumulative_coverage.png",
    } <= names
    report = json.loads((outdir / "reproduction_report.json").read_text())
    assert report["ingestion"]["total"]["matches"]
    assert report["discovery"]["full_coverage"]


def test_config_file_presets_flags(tmp_path):
    cfg = tmp_path / "run.toml"
    trace_file = tmp_path / "t.jsonl"
    rules_file = tmp_path / "r.jsonl"
    cfg.write_text(
        f'[discover]\nwbc = true\ntrace_out = "{trace_file}"\nruleset_out = "{rules_file}"\n'
        "min_pure_support = 8\n"
    )
    assert run(["--config", str(cfg), "discover"]) == 0
    assert trace_file.exists() and rules_file.exists()


def test_config_rejects_unknown_keys(tmp_path):
    cfg = tmp_path / "run.toml"
    cfg.write_text("[discover]\nbogus_flag = 1\n")
    assert run(["--config", str(cfg), "discover"]) == 1


def test_bad_flags_exit_2():
    with pytest.raises(SystemExit) as exc:
        main(["discover", "--nope"])
    assert exc.value.code == 2


def test_missing_file_exit_1(tmp_path, capsys):
    assert run(["classify", "--ruleset", str(tmp_path / "nope.jsonl"), "--wbc"]) == 1
    assert "inline2d:" in capsys.readouterr().err


def test_dataset_flags_required(capsys):
    assert run(["discover", "--trace-out", "/tmp/x", "--ruleset-out", "/tmp/y"]) == 1
    assert "--data" in capsys.readouterr().err
