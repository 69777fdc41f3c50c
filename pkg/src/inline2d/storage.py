"""Line-delimited JSON interchange for graphs, traces, rulesets, models and
predictions.

Every writer pairs with a reader that reconstructs the objects exactly; the
CLI chains stages through these files.  Records carry a "type" field where a
file mixes kinds (ruleset files hold the box table plus the ordered rules).
Serialization is insertion-ordered and timestamp-free so identical inputs
produce identical bytes.
"""

from __future__ import annotations

import json

from .boxes import Box, BoxStats, DiscoveryConfig, DiscoveryTrace, TraceStep
from .dataset import ClassLabel
from .linear import ConjunctiveModel, LinearModel
from .mapping import PolylineGraph
from .rules import Prediction, Rule, RuleSet


class StorageError(ValueError):
    """Raised for malformed interchange files."""


def _dump(obj: dict) -> str:
    return json.dumps(obj, separators=(",", ":"), allow_nan=False)


def _read_lines(path) -> list[dict]:
    out = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                out.append(json.loads(line))
            except json.JSONDecodeError as exc:
                raise StorageError(f"{path}:{lineno}: bad JSON ({exc})") from exc
    return out


# -- graphs -------------------------------------------------------------------


def write_graphs(path, graphs: list[PolylineGraph], labels: list[ClassLabel], ids: list[str]) -> None:
    with open(path, "w") as fh:
        for g, lab, cid in zip(graphs, labels, ids):
            fh.write(
                _dump(
                    {
                        "id": cid,
                        "label": lab.name,
                        "color": lab.color,
                        "nodes": [[x, y] for x, y in g.nodes],
                        "padded": g.padded,
                        "source_dim": g.source_dim,
                    }
                )
                + "\n"
            )


def read_graphs(path) -> tuple[list[PolylineGraph], list[ClassLabel], list[str]]:
    graphs, labels, ids = [], [], []
    for rec in _read_lines(path):
        try:
            graphs.append(
                PolylineGraph(
                    nodes=tuple((x, y) for x, y in rec["nodes"]),
                    padded=rec["padded"],
                    source_dim=rec["source_dim"],
                )
            )
            labels.append(ClassLabel(name=rec["label"], color=rec.get("color", "gray")))
            ids.append(rec["id"])
        except KeyError as exc:
            raise StorageError(f"graph record missing field {exc}") from exc
    return graphs, labels, ids


# -- discovery traces -----------------------------------------------------------


def dumps_trace(trace: DiscoveryTrace) -> str:
    cfg = trace.config
    lines = [
        _dump(
            {
                "type": "meta",
                "class_order": trace.class_order,
                "pitch": cfg.pitch,
                "max_box_cells_x": cfg.max_box_cells_x,
                "max_box_cells_y": cfg.max_box_cells_y,
                "min_pure_support": cfg.min_pure_support,
                "mini_threshold": cfg.mini_threshold,
            }
        )
    ]
    for step in trace.steps:
        lines.append(
            _dump(
                {
                    "type": "step",
                    "box": {
                        "id": step.box.id,
                        "x1": step.box.x1,
                        "x2": step.box.x2,
                        "y1": step.box.y1,
                        "y2": step.box.y2,
                    },
                    "target": step.target,
                    "phase": step.phase,
                    "counts": step.stats.per_class,
                    "support": step.stats.support,
                    "purity": step.stats.purity,
                    "removed_ids": list(step.removed_ids),
                }
            )
        )
    return "\n".join(lines) + "\n"


def write_trace(path, trace: DiscoveryTrace) -> None:
    with open(path, "w") as fh:
        fh.write(dumps_trace(trace))


def read_trace(path) -> DiscoveryTrace:
    records = _read_lines(path)
    if not records or records[0].get("type") != "meta":
        raise StorageError("trace file must start with a meta record")
    meta = records[0]
    trace = DiscoveryTrace(
        steps=[],
        class_order=list(meta["class_order"]),
        config=DiscoveryConfig(
            pitch=meta["pitch"],
            max_box_cells_x=meta["max_box_cells_x"],
            max_box_cells_y=meta["max_box_cells_y"],
            min_pure_support=meta["min_pure_support"],
            mini_threshold=meta["mini_threshold"],
        ),
    )
    for rec in records[1:]:
        if rec.get("type") != "step":
            raise StorageError(f"unexpected trace record type {rec.get('type')!r}")
        b = rec["box"]
        trace.steps.append(
            TraceStep(
                box=Box(x1=b["x1"], x2=b["x2"], y1=b["y1"], y2=b["y2"], id=b["id"]),
                target=rec["target"],
                stats=BoxStats.from_counts(dict(rec["counts"])),
                removed_ids=tuple(rec["removed_ids"]),
                phase=rec["phase"],
            )
        )
    return trace


# -- rulesets -------------------------------------------------------------------


def _rule_to_obj(rule: Rule) -> dict:
    obj = {
        "id": rule.id,
        "target": rule.target,
        "positive": list(rule.positive),
        "negated": list(rule.negated),
        "else": _rule_to_obj(rule.else_branch) if rule.else_branch else None,
    }
    if rule.note:
        obj["note"] = rule.note
    if rule.provenance is not None:
        obj["provenance"] = rule.provenance
    return obj


def _rule_from_obj(obj: dict) -> Rule:
    return Rule(
        id=obj["id"],
        target=obj["target"],
        positive=tuple(obj["positive"]),
        negated=tuple(obj["negated"]),
        else_branch=_rule_from_obj(obj["else"]) if obj.get("else") else None,
        note=obj.get("note", ""),
        provenance=obj.get("provenance"),
    )


def dumps_ruleset(rs: RuleSet) -> str:
    lines = [
        _dump({"type": "box", "id": bid, "x1": box.x1, "x2": box.x2, "y1": box.y1, "y2": box.y2})
        for bid, box in rs.boxes.items()
    ]
    lines += [_dump({"type": "rule", **_rule_to_obj(rule)}) for rule in rs.rules]
    return "\n".join(lines) + "\n"


def write_ruleset(path, rs: RuleSet) -> None:
    with open(path, "w") as fh:
        fh.write(dumps_ruleset(rs))


def read_ruleset(path) -> RuleSet:
    boxes: dict[str, Box] = {}
    rules: list[Rule] = []
    for rec in _read_lines(path):
        kind = rec.get("type")
        if kind == "box":
            boxes[rec["id"]] = Box(
                x1=rec["x1"], x2=rec["x2"], y1=rec["y1"], y2=rec["y2"], id=rec["id"]
            )
        elif kind == "rule":
            rules.append(_rule_from_obj(rec))
        else:
            raise StorageError(f"unexpected ruleset record type {kind!r}")
    return RuleSet(rules=rules, boxes=boxes)


# -- linear models ----------------------------------------------------------------


def _linear_to_obj(model: LinearModel) -> dict:
    return {
        "angle": model.angle,
        "selector": model.selector,
        "threshold": model.threshold,
        "target": model.target,
        "mode": model.mode,
        "target_above": model.target_above,
        "alternative": model.alternative,
    }


def write_models(path, models: list[LinearModel | ConjunctiveModel]) -> None:
    with open(path, "w") as fh:
        for m in models:
            if isinstance(m, ConjunctiveModel):
                fh.write(
                    _dump(
                        {
                            "type": "conjunction",
                            "target": m.target,
                            "components": [_linear_to_obj(c) for c in m.components],
                        }
                    )
                    + "\n"
                )
            else:
                fh.write(_dump({"type": "linear", **_linear_to_obj(m)}) + "\n")


def read_models(path) -> list[LinearModel | ConjunctiveModel]:
    out: list[LinearModel | ConjunctiveModel] = []
    for rec in _read_lines(path):
        kind = rec.get("type")
        if kind == "linear":
            rec.pop("type")
            out.append(LinearModel(**rec))
        elif kind == "conjunction":
            comps = tuple(LinearModel(**c) for c in rec["components"])
            out.append(ConjunctiveModel(components=comps, target=rec["target"]))
        else:
            raise StorageError(f"unexpected model record type {kind!r}")
    return out


# -- predictions ------------------------------------------------------------------


def write_predictions(path, ids: list[str], preds: list[Prediction]) -> None:
    with open(path, "w") as fh:
        for cid, p in zip(ids, preds):
            fh.write(
                _dump({"id": cid, "outcome": p.outcome, "rule": p.rule_id}) + "\n"
            )


def read_predictions(path) -> tuple[list[str], list[Prediction]]:
    ids, preds = [], []
    for rec in _read_lines(path):
        ids.append(rec["id"])
        preds.append(Prediction(outcome=rec["outcome"], rule_id=rec.get("rule")))
    return ids, preds
