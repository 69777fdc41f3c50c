"""Command-line pipeline: map, discover, classify, join, prune, cv, render,
report, serve.

Each stage reads and writes the line-delimited interchange files, so stages
can be chained across processes with results identical to one in-process
run.  A TOML config file can preset any flag (command line wins); the only
randomness anywhere is the cross-validation fold seed, which is an explicit
flag.  INLINE2D_LOG controls verbosity.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

try:
    import tomllib
except ModuleNotFoundError:  # pragma: no cover - python 3.10
    import tomli as tomllib

from . import storage
from .boxes import DiscoveryConfig, discover
from .crossval import CVConfig, run_cv
from .dataset import DatasetError, LabeledDataset, class_counts, load_csv, load_wbc
from .mapping import MappingMode, encode
from .render import BoxOverlay, RenderOptions, render_scene
from .report import write_report
from .rules import evaluate, from_trace, join, prune, ruleset_to_text, sequential_assignments

log = logging.getLogger("inline2d")

MODE_NAMES = {
    "sequential": "ilc_sequential",
    "collocated": "ilc_collocated",
    "generic": "ilc_generic",
    "static": "ilc2_static",
    "partial-dynamic": "ilc2_partial_dynamic",
    "full-dynamic": "ilc2_full_dynamic",
    "weighted": "ilc2_weighted",
}


class CliError(Exception):
    """Fatal CLI problem; message goes to stderr, exit code 1."""


def _parse_floats(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(v) for v in text.split(",") if v.strip() != "")
    except ValueError:
        raise CliError(f"expected comma-separated numbers, got {text!r}") from None


def build_mode(args) -> MappingMode:
    kind = MODE_NAMES[args.mode]
    offsets = _parse_floats(args.offsets) if getattr(args, "offsets", None) else None
    weights = _parse_floats(args.weights) if getattr(args, "weights", None) else None
    return MappingMode(kind=kind, offsets=offsets, weights=weights)


def load_dataset(args) -> LabeledDataset:
    if getattr(args, "wbc", False):
        return load_wbc()
    if not getattr(args, "data", None):
        raise CliError("give --data CSV or --wbc")
    label_map = None
    if getattr(args, "label_map", None):
        label_map = {}
        for pair in args.label_map:
            if "=" not in pair:
                raise CliError(f"--label-map wants RAW=NAME, got {pair!r}")
            raw, name = pair.split("=", 1)
            label_map[raw] = name
    try:
        return load_csv(
            args.data,
            label_column=args.label_column,
            drop_columns=tuple(args.drop_column or ()),
            id_column=args.id_column,
            label_map=label_map,
        )
    except DatasetError as exc:
        raise CliError(str(exc)) from exc


def _dataset_graphs(args):
    ds = load_dataset(args)
    mode = build_mode(args)
    graphs = [encode(p.values, mode) for p in ds.points]
    ids = [p.id or str(i) for i, p in enumerate(ds.points)]
    return ds, mode, graphs, ids


def _add_dataset_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--data", help="CSV with header row")
    p.add_argument("--wbc", action="store_true", help="use the bundled WBC benchmark")
    p.add_argument("--label-column", default="class")
    p.add_argument("--id-column", default=None)
    p.add_argument("--drop-column", action="append", default=[])
    p.add_argument("--label-map", action="append", default=[], metavar="RAW=NAME")


def _add_mode_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--mode", choices=sorted(MODE_NAMES), default="partial-dynamic")
    p.add_argument("--weights", help="comma-separated weights (weighted mode)")
    p.add_argument("--offsets", help="comma-separated offsets (sequential/generic)")


def _add_discovery_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--pitch", type=float, default=0.5)
    p.add_argument("--max-cells-x", type=int, default=40)
    p.add_argument("--max-cells-y", type=int, default=24)
    p.add_argument("--min-pure-support", type=int, default=8)
    p.add_argument("--mini-threshold", type=int, default=7)


def _discovery_config(args) -> DiscoveryConfig:
    return DiscoveryConfig(
        pitch=args.pitch,
        max_box_cells_x=args.max_cells_x,
        max_box_cells_y=args.max_cells_y,
        min_pure_support=args.min_pure_support,
        mini_threshold=args.mini_threshold,
    )


def _graphs_from_args(args):
    """Graphs either from a dump file or by mapping a dataset."""
    if getattr(args, "graphs", None):
        return storage.read_graphs(args.graphs)
    ds, _mode, graphs, ids = _dataset_graphs(args)
    return graphs, list(ds.labels), ids


def cmd_map(args) -> int:
    ds, mode, graphs, ids = _dataset_graphs(args)
    storage.write_graphs(args.out, graphs, ds.labels, ids)
    counts = class_counts(ds)
    log.info("mapped %d cases: %s", len(ds), counts)
    print(f"wrote {args.out}: {len(ds)} cases, classes {counts}")
    return 0


def cmd_discover(args) -> int:
    graphs, labels, ids = _graphs_from_args(args)
    cfg = _discovery_config(args)
    trace = discover(graphs, labels, cfg)
    rs = from_trace(trace, graphs)
    storage.write_trace(args.trace_out, trace)
    storage.write_ruleset(args.ruleset_out, rs)
    metrics = evaluate(rs, graphs, labels)
    print(
        f"{len(trace)} boxes, coverage {metrics.covered}/{len(graphs)}, "
        f"decided-case accuracy "
        f"{'-' if metrics.accuracy_decided is None else f'{metrics.accuracy_decided:.4f}'}"
    )
    print(ruleset_to_text(rs))
    return 0


def cmd_classify(args) -> int:
    rs = storage.read_ruleset(args.ruleset)
    graphs, labels, ids = _graphs_from_args(args)
    preds = sequential_assignments(rs, graphs)
    if args.predictions_out:
        storage.write_predictions(args.predictions_out, ids, preds)
    metrics = evaluate(rs, graphs, labels)
    out = {
        "cases": len(graphs),
        "covered": metrics.covered,
        "refused": metrics.refused,
        "coverage_fraction": metrics.coverage_fraction,
        "refusal_fraction": metrics.refusal_fraction,
        "accuracy_decided": metrics.accuracy_decided,
    }
    print(json.dumps(out, indent=2))
    return 0


def cmd_join(args) -> int:
    rs = storage.read_ruleset(args.ruleset)
    graphs, _labels, _ids = _graphs_from_args(args)
    joined = join(rs, graphs)
    storage.write_ruleset(args.out, joined)
    print(f"{len(rs)} rules -> {len(joined)} rules")
    print(ruleset_to_text(joined))
    return 0


def cmd_prune(args) -> int:
    rs = storage.read_ruleset(args.ruleset)
    graphs, labels, _ids = _graphs_from_args(args)
    pruned = prune(rs, graphs, labels, threshold=args.threshold, strategy=args.strategy)
    storage.write_ruleset(args.out, pruned)
    print(f"{len(rs)} rules -> {len(pruned)} rules ({args.strategy})")
    print(ruleset_to_text(pruned))
    return 0


def cmd_cv(args) -> int:
    ds = load_dataset(args)
    mode = build_mode(args)
    dcfg = _discovery_config(args)
    cfg = CVConfig(
        k=args.k,
        seed=args.seed,
        stratified=not args.no_stratify,
        adversarial="mini_box_fold" if args.adversarial == "mini-box" else "none",
    )
    strategy = None if args.strategy == "none" else args.strategy
    report = run_cv(ds, mode, dcfg, cfg, prune_strategy=strategy)
    if args.out:
        with open(args.out, "w") as fh:
            json.dump(report.to_dict(), fh, indent=2)
            fh.write("\n")
    print(report.to_table())
    return 0


def cmd_render(args) -> int:
    ds = load_dataset(args)
    mode = build_mode(args)
    overlays = []
    if args.overlay_trace:
        trace = storage.read_trace(args.overlay_trace)
        for step in trace.steps:
            color = "blue" if step.target == ds.classes[0].name else "black"
            overlays.append(BoxOverlay(box=step.box, stroke=color, label=step.box.id))
    options = RenderOptions(
        mode=mode,
        mirrored=args.mirrored,
        boxes=tuple(overlays),
        width=args.width,
        height=args.height,
        sample_limit=args.sample_limit,
    )
    svg = render_scene(ds, options)
    if args.out == "-":
        sys.stdout.write(svg)
    else:
        with open(args.out, "w") as fh:
            fh.write(svg)
        print(f"wrote {args.out}")
    return 0


def cmd_report(args) -> int:
    ds = load_dataset(args)
    mode = build_mode(args)
    dcfg = _discovery_config(args)
    cv_report = None
    if args.with_cv:
        cv_report = run_cv(ds, mode, dcfg, CVConfig(k=args.k, seed=args.seed))
    rep = write_report(args.outdir, ds, mode, dcfg, cv_report=cv_report)
    n_dev = len(rep["deviations"])
    print(f"report written to {args.outdir} ({n_dev} reference deviations)")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(), host=args.host, port=args.port, log_level="info")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="inline2d",
        description="2-D machine learning in inline coordinates",
    )
    parser.add_argument("--config", help="TOML file presetting flags per subcommand")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("map", help="dataset -> graph dump")
    _add_dataset_flags(p)
    _add_mode_flags(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_map)

    p = sub.add_parser("discover", help="graphs -> trace + ruleset")
    p.add_argument("--graphs", help="graph dump from `map`")
    _add_dataset_flags(p)
    _add_mode_flags(p)
    _add_discovery_flags(p)
    p.add_argument("--trace-out", required=True)
    p.add_argument("--ruleset-out", required=True)
    p.set_defaults(func=cmd_discover)

    p = sub.add_parser("classify", help="ruleset + cases -> predictions + metrics")
    p.add_argument("--ruleset", required=True)
    p.add_argument("--graphs")
    _add_dataset_flags(p)
    _add_mode_flags(p)
    p.add_argument("--predictions-out")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("join", help="merge rules without changing predictions")
    p.add_argument("--ruleset", required=True)
    p.add_argument("--graphs")
    _add_dataset_flags(p)
    _add_mode_flags(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_join)

    p = sub.add_parser("prune", help="handle mini rules by refusal or reassignment")
    p.add_argument("--ruleset", required=True)
    p.add_argument("--graphs")
    _add_dataset_flags(p)
    _add_mode_flags(p)
    p.add_argument("--strategy", choices=["refuse", "reassign"], default="refuse")
    p.add_argument("--threshold", type=int, default=7)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_prune)

    p = sub.add_parser("cv", help="stratified k-fold cross-validation")
    _add_dataset_flags(p)
    _add_mode_flags(p)
    _add_discovery_flags(p)
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--no-stratify", action="store_true")
    p.add_argument("--adversarial", choices=["none", "mini-box"], default="none")
    p.add_argument("--strategy", choices=["refuse", "reassign", "none"], default="refuse")
    p.add_argument("--out")
    p.set_defaults(func=cmd_cv)

    p = sub.add_parser("render", help="SVG scene of a dataset")
    _add_dataset_flags(p)
    _add_mode_flags(p)
    p.add_argument("--mirrored", action="store_true")
    p.add_argument("--overlay-trace", help="draw the boxes of a trace file")
    p.add_argument("--width", type=int, default=960)
    p.add_argument("--height", type=int, default=540)
    p.add_argument("--sample-limit", type=int)
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("report", help="full run -> figures + delimited outputs")
    _add_dataset_flags(p)
    _add_mode_flags(p)
    _add_discovery_flags(p)
    p.add_argument("--outdir", required=True)
    p.add_argument("--with-cv", action="store_true")
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("serve", help="interactive discovery HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(func=cmd_serve)
    return parser


def _apply_config(parser: argparse.ArgumentParser, argv: list[str]) -> list[str]:
    """Preset subcommand defaults from a TOML file; CLI flags still win."""
    if "--config" not in argv:
        return argv
    idx = argv.index("--config")
    try:
        path = argv[idx + 1]
    except IndexError:
        parser.error("--config needs a path")
    try:
        with open(path, "rb") as fh:
            config = tomllib.load(fh)
    except (OSError, tomllib.TOMLDecodeError) as exc:
        raise CliError(f"cannot load config {path}: {exc}") from exc
    command = next((a for a in argv if not a.startswith("-") and a != path), None)
    section = config.get(command, {}) if command else {}
    for action in parser._subparsers._group_actions:  # noqa: SLF001 - argparse internals
        if command in getattr(action, "choices", {}):
            sub = action.choices[command]
            known = {a.dest for a in sub._actions}
            unknown = set(section) - known
            if unknown:
                raise CliError(f"unknown config keys for {command}: {sorted(unknown)}")
            sub.set_defaults(**section)
            for sub_action in sub._actions:
                if sub_action.dest in section:
                    sub_action.required = False
    return argv


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    level = os.environ.get("INLINE2D_LOG", "warning").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING))
    parser = build_parser()
    try:
        argv = _apply_config(parser, argv)
        args = parser.parse_args(argv)
        return args.func(args)
    except CliError as exc:
        print(f"inline2d: {exc}", file=sys.stderr)
        return 1
    except (storage.StorageError, DatasetError, OSError, ValueError) as exc:
        print(f"inline2d: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
