"""Reference results for the Wisconsin Breast Cancer case study.

The benchmark has an established reference solution: thirteen pure boxes over
the partial-dynamic mapping, the hierarchical rules built from them, their
simplified and joined forms, and the error counts of the reassigned mini
rules.  The reproduction report compares a fresh discovery run against these
tables; the exact geometry depends on undocumented preprocessing of the
source data, so mismatches are reported, never asserted.

B10's published corners duplicate B7's and are flagged unreliable; the
fixture substitutes the adjacent cell row above so the rule structure stays
exercisable, and geometry comparisons skip B10 entirely.
"""

from __future__ import annotations

from dataclasses import dataclass

from .boxes import Box
from .dataset import ClassLabel
from .mapping import PolylineGraph
from .rules import Rule, RuleSet

BENIGN = "benign"
MALIGNANT = "malignant"

EXPECTED_TOTAL = 683
EXPECTED_CLASS_COUNTS = {BENIGN: 444, MALIGNANT: 239}


@dataclass(frozen=True)
class ReferenceBox:
    box: Box
    target: str
    reported_cases: int
    corners_unreliable: bool = False


# corner table of the reference boxes (x1, x2, y1, y2), reported hierarchical
# case counts, and target class
REFERENCE_BOXES: dict[str, ReferenceBox] = {
    "B1": ReferenceBox(Box(15.0, 20.5, 1.0, 1.5, id="B1"), BENIGN, 382),
    "B2": ReferenceBox(Box(23.5, 39.5, 8.5, 10.0, id="B2"), MALIGNANT, 166),
    "B3": ReferenceBox(Box(1.0, 3.5, 0.5, 2.0, id="B3"), BENIGN, 28),
    "B4": ReferenceBox(Box(20.0, 22.5, 6.0, 6.5, id="B4"), MALIGNANT, 26),
    "B5": ReferenceBox(Box(9.5, 10.0, 5.0, 6.5, id="B5"), MALIGNANT, 14),
    "B6": ReferenceBox(Box(16.0, 21.0, 0.5, 2.0, id="B6"), BENIGN, 18),
    "B7": ReferenceBox(Box(17.5, 18.5, 3.0, 3.5, id="B7"), MALIGNANT, 23),
    "B8": ReferenceBox(Box(14.5, 17.0, 2.5, 3.0, id="B8"), BENIGN, 7),
    "B9": ReferenceBox(Box(28.5, 29.0, 2.5, 3.5, id="B9"), BENIGN, 4),
    # published corners for B10 duplicate B7's; repaired one cell row up
    "B10": ReferenceBox(Box(17.5, 18.5, 4.0, 4.5, id="B10"), MALIGNANT, 10, corners_unreliable=True),
    "B11": ReferenceBox(Box(14.5, 15.5, 5.0, 6.0, id="B11"), BENIGN, 4),
    "B12": ReferenceBox(Box(26.5, 27.0, 7.0, 7.5, id="B12"), BENIGN, 1),
    "B13": ReferenceBox(Box(28.0, 28.5, 0.5, 9.5, id="B13"), MALIGNANT, 10),
}

# hierarchical rules in the reference table's order (benign block, then
# malignant block); reported fired-case counts alongside
REFERENCE_RULES: list[tuple[str, str, tuple[str, ...], tuple[str, ...], int]] = [
    ("R1", BENIGN, ("B1",), (), 382),
    ("R3", BENIGN, ("B3",), (), 28),
    ("R6", BENIGN, ("B6",), ("B2", "B4", "B5"), 18),
    ("R8", BENIGN, ("B8",), ("B2", "B4", "B5", "B7", "B10", "B13"), 7),
    ("R9", BENIGN, ("B9",), ("B2", "B4", "B5", "B7", "B10", "B13"), 4),
    ("R11", BENIGN, ("B11",), ("B2", "B4", "B5"), 4),
    ("R12", BENIGN, ("B12",), ("B2", "B4", "B5", "B7", "B10"), 1),
    ("R2", MALIGNANT, ("B2",), (), 166),
    ("R4", MALIGNANT, ("B4",), (), 26),
    ("R5", MALIGNANT, ("B5",), ("B1", "B3"), 14),
    ("R7", MALIGNANT, ("B7",), ("B1", "B3", "B6"), 13),
    ("R10", MALIGNANT, ("B10",), ("B3", "B6", "B8", "B9"), 10),
    # the reference table prints the positive box as B11; read as B13
    ("R13", MALIGNANT, ("B13",), ("B1", "B3", "B6", "B8", "B9", "B11", "B12"), 10),
]

# simplified forms: negated boxes each s-rule drops from its full form
REFERENCE_SIMPLIFICATIONS: dict[str, frozenset[str]] = {
    "R5": frozenset({"B3"}),
    "R7": frozenset({"B1"}),
    "R8": frozenset({"B13"}),
    "R9": frozenset({"B10", "B13"}),
}

# joined-rule coverage targets
REFERENCE_JOINED_COVERAGE = {"R1,3": 410, "R1,3,5": 424}

# reassigned mini rules: (dominant class count, off-class count)
REFERENCE_REASSIGNED = {
    "R9M": (47, 4),
    "R11M": (28, 4),
    "R12M": (52, 1),
}

REFERENCE_TOP4_COVERED = 602  # B1-B4 rule coverage over all 683 cases


def reference_ruleset() -> RuleSet:
    """The reference rule hierarchy over the reference box table."""
    boxes = {bid: rb.box for bid, rb in REFERENCE_BOXES.items()}
    rules = [
        Rule(id=rid, target=target, positive=pos, negated=neg)
        for rid, target, pos, neg, _count in REFERENCE_RULES
    ]
    return RuleSet(rules=rules, boxes=boxes)


def _center(box: Box) -> tuple[float, float]:
    return ((box.x1 + box.x2) / 2, (box.y1 + box.y2) / 2)


def simplification_context() -> tuple[list[PolylineGraph], list[ClassLabel]]:
    """A constructed dataset realizing the documented coverage relations the
    simplified reference rules depend on.

    Each case is a small graph with one node at the center of every box it
    must be covered by: the kept negations each exclude a case the others do
    not, and the dropped negations exclude nothing from their rule's positive
    region.  Exercises simplify() against the reference drop sets without
    depending on unreproducible source preprocessing."""
    memberships: list[tuple[tuple[str, ...], str]] = [
        (("B5", "B1"), MALIGNANT),   # keeps B1 in R5
        (("B7", "B3"), MALIGNANT),   # keeps B3 in R7
        (("B7", "B6"), MALIGNANT),   # keeps B6 in R7
        (("B8", "B2"), BENIGN),      # keeps B2 in R8
        (("B8", "B4"), BENIGN),      # keeps B4 in R8
        (("B8", "B5"), BENIGN),      # keeps B5 in R8
        (("B8", "B7"), BENIGN),      # keeps B7 in R8
        (("B8", "B10"), BENIGN),     # keeps B10 in R8
        (("B9", "B2"), BENIGN),      # keeps B2 in R9
        (("B9", "B4"), BENIGN),      # keeps B4 in R9
        (("B9", "B5"), BENIGN),      # keeps B5 in R9
        (("B9", "B7"), BENIGN),      # keeps B7 in R9
        (("B1",), BENIGN),
        (("B3",), BENIGN),
        (("B6",), BENIGN),
        (("B2",), MALIGNANT),
        (("B4",), MALIGNANT),
        (("B13",), MALIGNANT),
    ]
    graphs: list[PolylineGraph] = []
    labels: list[ClassLabel] = []
    for boxes_in, cls in memberships:
        nodes = tuple(_center(REFERENCE_BOXES[bid].box) for bid in boxes_in)
        if len(nodes) == 1:
            nodes = nodes + nodes  # graphs carry at least two nodes
        graphs.append(PolylineGraph(nodes=nodes, padded=False, source_dim=len(nodes) * 2))
        labels.append(ClassLabel(name=cls, color="green" if cls == BENIGN else "red"))
    return graphs, labels
