"""Hierarchical box rules: construction from traces, simplification, joining,
pruning, classification, and evaluation.

A rule fires on a case when some positive box covers its graph and no negated
box does.  Rules are evaluated in order; the first decision wins and cases
matching nothing are refused (never assigned a majority class).  Negated
boxes encode the cases earlier rules already claimed, which makes the rules
of one trace order-independent among themselves; joining exploits that to
merge rules without changing a single prediction.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from .boxes import Box, DiscoveryTrace, covers
from .dataset import ClassLabel
from .mapping import PolylineGraph


class RuleError(ValueError):
    """Raised for malformed rules or dangling box references."""


@dataclass(frozen=True)
class Rule:
    id: str
    target: str
    positive: tuple[str, ...]
    negated: tuple[str, ...] = ()
    else_branch: "Rule | None" = None
    provenance: int | None = None
    note: str = ""

    def __post_init__(self) -> None:
        if not self.positive:
            raise RuleError(f"rule {self.id} has no positive box")


@dataclass
class RuleSet:
    """Ordered rules over a shared box table; order is evaluation precedence."""

    rules: list[Rule] = field(default_factory=list)
    boxes: dict[str, Box] = field(default_factory=dict)

    def __post_init__(self) -> None:
        ids = [r.id for r in self.rules]
        if len(ids) != len(set(ids)):
            raise RuleError("duplicate rule ids")
        for rule in self.rules:
            for ref in self._box_refs(rule):
                if ref not in self.boxes:
                    raise RuleError(f"rule {rule.id} references unknown box {ref}")

    @staticmethod
    def _box_refs(rule: Rule):
        yield from rule.positive
        yield from rule.negated
        if rule.else_branch is not None:
            yield from RuleSet._box_refs(rule.else_branch)

    def __len__(self) -> int:
        return len(self.rules)

    def rule(self, rule_id: str) -> Rule:
        for r in self.rules:
            if r.id == rule_id:
                return r
        raise RuleError(f"no rule {rule_id}")


@dataclass(frozen=True)
class Prediction:
    outcome: str | None  # class name, or None when refused
    rule_id: str | None = None

    @property
    def refused(self) -> bool:
        return self.outcome is None


@dataclass(frozen=True)
class RuleMetrics:
    per_rule: dict[str, dict]
    covered: int
    refused: int
    correct: int
    coverage_fraction: float
    refusal_fraction: float
    accuracy_decided: float | None


def _in_any(graph: PolylineGraph, box_ids, boxes: dict[str, Box]) -> bool:
    for bid in box_ids:
        try:
            box = boxes[bid]
        except KeyError:
            raise RuleError(f"dangling box reference {bid}") from None
        if covers(box, graph):
            return True
    return False


def _eval_rule(rule: Rule, graph: PolylineGraph, boxes: dict[str, Box]) -> Prediction | None:
    in_pos = _in_any(graph, rule.positive, boxes)
    if in_pos:
        if not _in_any(graph, rule.negated, boxes):
            return Prediction(outcome=rule.target, rule_id=rule.id)
        return None
    if rule.else_branch is not None:
        return _eval_rule(rule.else_branch, graph, boxes)
    return None


def classify(graph: PolylineGraph, rs: RuleSet) -> Prediction:
    """First-match sequential classification; refusal when nothing fires.

    The else branch of a rule is consulted only when the case lies outside
    the rule's positive region (an explicit negation block moves on to the
    next rule instead)."""
    for rule in rs.rules:
        result = _eval_rule(rule, graph, rs.boxes)
        if result is not None:
            return result
    return Prediction(outcome=None, rule_id=None)


def classify_all(graphs, rs: RuleSet) -> list[Prediction]:
    return [classify(g, rs) for g in graphs]


class CoverageIndex:
    """Per-box covered-case sets for fast set-algebra rule replay."""

    def __init__(self, boxes: dict[str, Box], graphs: list[PolylineGraph]):
        self.n = len(graphs)
        self.by_box: dict[str, frozenset[int]] = {
            bid: frozenset(i for i, g in enumerate(graphs) if covers(box, g))
            for bid, box in boxes.items()
        }

    def union(self, ids) -> set[int]:
        out: set[int] = set()
        for bid in ids:
            out |= self.by_box[bid]
        return out


def sequential_assignments(rs: RuleSet, graphs) -> list[Prediction]:
    """Set-replay of classify_all; used by evaluate/join so big datasets stay
    cheap.  Agrees with per-case classification by construction (tested)."""
    index = CoverageIndex(rs.boxes, graphs)
    out: list[Prediction | None] = [None] * len(graphs)
    remaining = set(range(len(graphs)))

    def apply(rule: Rule, available: set[int]):
        pos = index.union(rule.positive)
        direct = (pos - index.union(rule.negated)) & available
        for i in direct:
            out[i] = Prediction(outcome=rule.target, rule_id=rule.id)
        decided = set(direct)
        if rule.else_branch is not None:
            decided |= apply(rule.else_branch, available - pos)
        return decided

    for rule in rs.rules:
        remaining -= apply(rule, remaining)
    for i in range(len(graphs)):
        if out[i] is None:
            out[i] = Prediction(outcome=None, rule_id=None)
    return out


def from_trace(trace: DiscoveryTrace, graphs=None) -> RuleSet:
    """One rule per accepted box, in trace order.

    Negations carry every earlier box; when graphs are supplied they are
    filtered to predecessors that actually share covered cases with the
    rule's own box, which reproduces the compact published shape without
    changing a single fired case."""
    boxes = {s.box.id: s.box for s in trace.steps}
    index = CoverageIndex(boxes, graphs) if graphs is not None else None
    rules: list[Rule] = []
    for k, step in enumerate(trace.steps):
        earlier = [trace.steps[j].box.id for j in range(k)]
        if index is not None:
            own = index.by_box[step.box.id]
            earlier = [bid for bid in earlier if index.by_box[bid] & own]
        rules.append(
            Rule(
                id=f"R{k + 1}",
                target=step.target,
                positive=(step.box.id,),
                negated=tuple(earlier),
                provenance=k,
            )
        )
    return RuleSet(rules=rules, boxes=boxes)


def simplify(rule: Rule, rs: RuleSet, graphs) -> Rule:
    """Drop negated boxes that exclude no additional case of the rule's
    positive coverage, given the negations that remain.

    Greedy in negation order; each drop provably leaves the fired-case set
    unchanged on the supplied dataset context."""
    if not rule.negated:
        return rule
    index = CoverageIndex(
        {bid: rs.boxes[bid] for bid in set(rule.positive) | set(rule.negated)}, graphs
    )
    pos = index.union(rule.positive)
    kept = list(rule.negated)
    for bid in list(rule.negated):
        others = set()
        for o in kept:
            if o != bid:
                others |= index.by_box[o]
        if pos & index.by_box[bid] <= others:
            kept.remove(bid)
    if tuple(kept) == rule.negated:
        return rule
    return replace(rule, negated=tuple(kept))


def simplify_ruleset(rs: RuleSet, graphs) -> RuleSet:
    return RuleSet(rules=[simplify(r, rs, graphs) for r in rs.rules], boxes=dict(rs.boxes))


def _predictions_equal(a: list[Prediction], b: list[Prediction]) -> bool:
    return all(x.outcome == y.outcome for x, y in zip(a, b))


def join(rs: RuleSet, graphs) -> RuleSet:
    """Merge rules without changing any prediction on the supplied dataset.

    Same-class rules with bare positive boxes (no negations, no else) merge
    into one union rule at the earliest position; rules of the opposite class
    conditioned on all of a merged rule's boxes fold into its else branch.
    Every transformation is verified against the current predictions and
    reverted if any case would change outcome."""
    baseline = sequential_assignments(rs, graphs)
    current = RuleSet(rules=list(rs.rules), boxes=dict(rs.boxes))

    def verified(candidate: RuleSet) -> bool:
        return _predictions_equal(sequential_assignments(candidate, graphs), baseline)

    # step 1: union same-class bare rules
    by_class: dict[str, list[Rule]] = {}
    for rule in current.rules:
        if not rule.negated and rule.else_branch is None:
            by_class.setdefault(rule.target, []).append(rule)
    for cls, group in by_class.items():
        while len(group) > 1:
            head, tail = group[0], group[1:]
            merged_pos = head.positive + tuple(b for r in tail for b in r.positive)
            merged = Rule(
                id="R" + ",".join(r.id.lstrip("R") for r in [head] + tail),
                target=cls,
                positive=merged_pos,
            )
            rules = [merged if r.id == head.id else r for r in current.rules if r.id not in {t.id for t in tail}]
            candidate = RuleSet(rules=rules, boxes=dict(current.boxes))
            if verified(candidate):
                current = candidate
                group = [merged]
                break
            # drop the last member and retry a smaller union
            group = [head] + tail[:-1]
        by_class[cls] = group

    # steps 2-3: fold conditioned opposite-class rules into else branches
    for parent in list(current.rules):
        if parent.negated or parent.else_branch is not None:
            continue
        parent_boxes = set(parent.positive)
        for other in list(current.rules):
            if other.id == parent.id or other.target == parent.target:
                continue
            if other.else_branch is not None or not parent_boxes <= set(other.negated):
                continue
            child = Rule(
                id=other.id,
                target=other.target,
                positive=other.positive,
                negated=tuple(b for b in other.negated if b not in parent_boxes),
            )
            folded = Rule(
                id=parent.id + "," + other.id.lstrip("R"),
                target=parent.target,
                positive=parent.positive,
                else_branch=child,
            )
            rules = [folded if r.id == parent.id else r for r in current.rules if r.id != other.id]
            candidate = RuleSet(rules=rules, boxes=dict(current.boxes))
            if verified(candidate):
                current = candidate
                parent = folded
                break  # depth stays <= 2: one else branch per parent
    return current


def prune(
    rs: RuleSet,
    graphs,
    labels: list[ClassLabel],
    threshold: int | None = None,
    strategy: str = "refuse",
) -> RuleSet:
    """Handle rules whose fired coverage is at most `threshold`.

    refuse   - remove them; their training cases fall through to refusal.
    reassign - strip their negations, retarget to the dominant class of the
               box's full-dataset coverage, and record the error counts in
               the rule note (id gains an M suffix)."""
    if strategy not in ("refuse", "reassign"):
        raise RuleError(f"unknown prune strategy {strategy!r}")
    tau = 7 if threshold is None else threshold
    if tau < 0:
        raise RuleError("threshold must be >= 0")
    preds = sequential_assignments(rs, graphs)
    fired: dict[str, int] = {}
    for p in preds:
        if p.rule_id is not None:
            fired[p.rule_id] = fired.get(p.rule_id, 0) + 1

    def all_ids(rule: Rule):
        yield rule.id
        if rule.else_branch is not None:
            yield from all_ids(rule.else_branch)

    index = CoverageIndex(rs.boxes, graphs)
    out: list[Rule] = []
    for rule in rs.rules:
        total = sum(fired.get(rid, 0) for rid in all_ids(rule))
        if total > tau:
            out.append(rule)
            continue
        if strategy == "refuse":
            continue
        raw = index.union(rule.positive)
        counts: dict[str, int] = {}
        for i in raw:
            counts[labels[i].name] = counts.get(labels[i].name, 0) + 1
        dominant = max(counts, key=lambda c: counts[c]) if counts else rule.target
        note = " / ".join(f"{counts.get(c, 0)} {c}" for c in sorted(counts))
        out.append(
            Rule(
                id=rule.id + "M",
                target=dominant,
                positive=rule.positive,
                negated=(),
                provenance=rule.provenance,
                note=note,
            )
        )
    return RuleSet(rules=out, boxes=dict(rs.boxes))


def evaluate(rs: RuleSet, graphs, labels: list[ClassLabel]) -> RuleMetrics:
    """Sequential-evaluation metrics: per-rule precision and coverage plus
    decided-case accuracy, coverage fraction, and refusal fraction."""
    preds = sequential_assignments(rs, graphs)
    per_rule: dict[str, dict] = {}

    def seed(rule: Rule):
        per_rule[rule.id] = {"target": rule.target, "fired": 0, "correct": 0}
        if rule.else_branch is not None:
            seed(rule.else_branch)

    for rule in rs.rules:
        seed(rule)
    covered = refused = correct = 0
    for pred, lab in zip(preds, labels):
        if pred.refused:
            refused += 1
            continue
        covered += 1
        entry = per_rule.get(pred.rule_id)
        if entry is not None:
            entry["fired"] += 1
            if pred.outcome == lab.name:
                entry["correct"] += 1
        if pred.outcome == lab.name:
            correct += 1
    for entry in per_rule.values():
        entry["precision"] = entry["correct"] / entry["fired"] if entry["fired"] else None
    total = len(graphs)
    return RuleMetrics(
        per_rule=per_rule,
        covered=covered,
        refused=refused,
        correct=correct,
        coverage_fraction=covered / total if total else 0.0,
        refusal_fraction=refused / total if total else 1.0,
        accuracy_decided=correct / covered if covered else None,
    )


def rule_to_text(rule: Rule, depth: int = 0) -> str:
    """Readable rendering: if x ∈ B1 ∪ B3 & x ∉ B2 ⇒ benign (else ...)."""
    pos = " ∪ ".join(rule.positive)
    text = f"if x ∈ {pos}"
    if rule.negated:
        text += " & x ∉ " + " ∪ ".join(rule.negated)
    text += f" ⇒ x ∈ {rule.target}"
    if rule.note:
        text += f"  [{rule.note}]"
    if rule.else_branch is not None:
        text += f" (else {rule_to_text(rule.else_branch, depth + 1)})"
    return text


def ruleset_to_text(rs: RuleSet) -> str:
    return "\n".join(f"{r.id}: {rule_to_text(r)}" for r in rs.rules)
