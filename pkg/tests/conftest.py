import random

import pytest

from inline2d import DiscoveryConfig, MappingMode, discover, encode, load_wbc


@pytest.fixture(scope="session")
def wbc():
    return load_wbc()


@pytest.fixture(scope="session")
def wbc_graphs(wbc):
    mode = MappingMode.partial_dynamic()
    return [encode(p.values, mode) for p in wbc.points]


@pytest.fixture(scope="session")
def wbc_trace(wbc, wbc_graphs):
    return discover(wbc_graphs, wbc.labels, DiscoveryConfig())


def random_integer_dataset(rng: random.Random, n_cases: int, dim: int, hi: int = 10):
    """Random labeled integer points, the shape discovery oracles work on."""
    from inline2d import ClassLabel, NDPoint

    points, labels = [], []
    for i in range(n_cases):
        values = tuple(float(rng.randint(0, hi)) for _ in range(dim))
        points.append(NDPoint(values=values, id=str(i)))
        labels.append(ClassLabel(name=rng.choice(["a", "b"]), color="gray"))
    return points, labels


def random_ruleset(rng: random.Random):
    """Arbitrary (not trace-derived) ruleset over a small grid-aligned world."""
    from inline2d import Box, Rule, RuleSet

    n_boxes = rng.randint(2, 6)
    boxes = {}
    for i in range(n_boxes):
        x1 = rng.randint(0, 8)
        y1 = rng.randint(0, 8)
        boxes[f"B{i + 1}"] = Box(
            x1, x1 + rng.randint(1, 3), y1, y1 + rng.randint(1, 3), id=f"B{i + 1}"
        )
    ids = list(boxes)
    rules = []
    for i, bid in enumerate(ids):
        earlier = ids[:i]
        rng.shuffle(earlier)
        negated = tuple(earlier[: rng.randint(0, len(earlier))])
        rules.append(
            Rule(
                id=f"R{i + 1}",
                target=rng.choice(["green", "red"]),
                positive=(bid,),
                negated=negated,
            )
        )
    return RuleSet(rules=rules, boxes=boxes)
