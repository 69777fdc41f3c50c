"""Projection-line classification and minimal regression over graph nodes.

A projection line at angle theta turns one selected node per case into a
scalar; a threshold on that scalar gives a one-sided classifier (decides only
the target class, stays silent otherwise) or a two-sided one (target versus
everything else).  When one halfspace cannot isolate the target class purely,
conjunctions of one-sided components carve the region the way intersecting
halfplanes do.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .mapping import PolylineGraph

ENDPOINT = "endpoint"


class LinearModelError(ValueError):
    """Raised for bad selectors, degenerate fits, or missing classes."""


@dataclass(frozen=True)
class LinearModel:
    """Halfspace test on one projected node.

    Fires the target class when the projection falls on the target side of
    the threshold; two_sided models assign the alternative class to the other
    side, one_sided models stay silent there.
    """

    angle: float
    selector: str | int
    threshold: float
    target: str
    mode: str  # "one_sided" | "two_sided"
    target_above: bool = True
    alternative: str | None = None

    def __post_init__(self) -> None:
        if not 0.0 <= self.angle < math.pi:
            raise LinearModelError("angle must lie in [0, pi)")
        if self.mode not in ("one_sided", "two_sided"):
            raise LinearModelError(f"unknown mode {self.mode!r}")
        if self.mode == "two_sided" and self.alternative is None:
            raise LinearModelError("two_sided models need an alternative class")

    def side(self, value: float) -> bool:
        return value > self.threshold if self.target_above else value < self.threshold

    def predict(self, graph: PolylineGraph) -> str | None:
        value = project(graph, self.angle, self.selector)
        if self.side(value):
            return self.target
        return self.alternative if self.mode == "two_sided" else None


@dataclass(frozen=True)
class ConjunctiveModel:
    """All components must agree before the target class is asserted."""

    components: tuple[LinearModel, ...]
    target: str

    def __post_init__(self) -> None:
        if not self.components:
            raise LinearModelError("conjunction needs at least one component")

    def predict(self, graph: PolylineGraph) -> str | None:
        for comp in self.components:
            if not comp.side(project(graph, comp.angle, comp.selector)):
                return None
        return self.target


def project(graph: PolylineGraph, angle: float, selector: str | int = ENDPOINT) -> float:
    """Dot product of the selected node with the unit direction of `angle`."""
    nodes = graph.nodes
    if selector == ENDPOINT:
        idx = len(nodes) - 1
    else:
        idx = int(selector)
        if not 0 <= idx < len(nodes):
            raise LinearModelError(f"node selector {selector} out of range")
    nx, ny = nodes[idx]
    return nx * math.cos(angle) + ny * math.sin(angle)


def _candidate_thresholds(values: list[float]) -> list[float]:
    distinct = sorted(set(values))
    cands = [distinct[0] - 1.0]
    cands += [(a + b) / 2.0 for a, b in zip(distinct, distinct[1:])]
    cands.append(distinct[-1] + 1.0)
    return cands


def _margin(t: float, values: list[float]) -> float:
    return min(abs(v - t) for v in values)


@dataclass(frozen=True)
class ThresholdFit:
    threshold: float
    target_above: bool
    decided: int
    correct: int
    accuracy: float | None
    covered_target: int


def fit_threshold(
    projections: list[tuple[float, str]],
    target: str,
    mode: str = "two_sided",
) -> ThresholdFit:
    """Best threshold over the midpoints of adjacent distinct projections
    (plus sentinels past both ends).

    two_sided maximizes decided-case accuracy; one_sided maximizes target
    coverage at precision 1.0.  Both orientations of the halfspace are
    considered; ties prefer larger margin, then the smaller threshold, then
    target-above.
    """
    if mode not in ("one_sided", "two_sided"):
        raise LinearModelError(f"unknown mode {mode!r}")
    if not projections:
        raise LinearModelError("no projections")
    values = [v for v, _ in projections]
    labels = [c for _, c in projections]
    n_target = sum(1 for c in labels if c == target)
    if mode == "two_sided" and (n_target == 0 or n_target == len(labels)):
        raise LinearModelError("two_sided fit needs both classes present")

    best: tuple | None = None
    best_fit: ThresholdFit | None = None
    for t in _candidate_thresholds(values):
        for above in (True, False):
            if mode == "two_sided":
                correct = sum(
                    1
                    for v, c in projections
                    if ((v > t) if above else (v < t)) == (c == target)
                )
                covered_t = sum(
                    1 for v, c in projections if c == target and ((v > t) if above else (v < t))
                )
                decided = len(projections)
                score = correct / decided
            else:
                side = [(v, c) for v, c in projections if ((v > t) if above else (v < t))]
                if any(c != target for _, c in side):
                    continue  # impure halfspace is not a one_sided candidate
                correct = covered_t = len(side)
                decided = len(side)
                score = covered_t
            key = (-score, -_margin(t, values), t, not above)
            if best is None or key < best:
                best = key
                best_fit = ThresholdFit(
                    threshold=t,
                    target_above=above,
                    decided=decided,
                    correct=correct,
                    accuracy=correct / decided if decided else None,
                    covered_target=covered_t,
                )
    if best_fit is None:
        # one_sided with no pure halfspace anywhere: cover nothing
        t = max(values) + 1.0
        best_fit = ThresholdFit(
            threshold=t, target_above=True, decided=0, correct=0, accuracy=None, covered_target=0
        )
    return best_fit


def angle_grid(steps: int = 180) -> list[float]:
    return [i * math.pi / steps for i in range(steps)]


def fit_model(
    graphs: list[PolylineGraph],
    labels: list[str],
    target: str,
    angles: list[float] | None = None,
    selectors: tuple = (ENDPOINT,),
    mode: str = "two_sided",
) -> LinearModel | ConjunctiveModel:
    """Grid-search angles and node selectors for the best single model;
    one_sided fits may grow into a conjunction when intersecting a second
    halfspace lifts pure coverage above the best single component."""
    if angles is None:
        angles = angle_grid()
    if not angles:
        raise LinearModelError("empty angle grid")
    others = sorted({c for c in labels if c != target})
    alternative = others[0] if others else None

    def single(mode_: str) -> tuple[LinearModel, ThresholdFit] | None:
        best = None
        for theta in angles:
            for sel in selectors:
                proj = [(project(g, theta, sel), c) for g, c in zip(graphs, labels)]
                try:
                    fit = fit_threshold(proj, target, mode_)
                except LinearModelError:
                    continue
                score = fit.accuracy if mode_ == "two_sided" else fit.covered_target
                if score is None:
                    score = -1.0
                key = (-score, theta, fit.threshold)
                if best is None or key < best[0]:
                    model = LinearModel(
                        angle=theta,
                        selector=sel,
                        threshold=fit.threshold,
                        target=target,
                        mode=mode_,
                        target_above=fit.target_above,
                        alternative=alternative if mode_ == "two_sided" else None,
                    )
                    best = (key, model, fit)
        return None if best is None else (best[1], best[2])

    if mode == "two_sided":
        found = single("two_sided")
        if found is None:
            raise LinearModelError("no feasible two_sided model")
        return found[0]

    found = single("one_sided")
    base_model, base_fit = found if found else (None, None)
    base_coverage = base_fit.covered_target if base_fit else 0

    conj = _fit_conjunction(graphs, labels, target, angles, selectors)
    if conj is not None:
        covered = sum(1 for g in graphs if conj.predict(g) == target)
        if covered > base_coverage:
            return conj
    if base_model is None:
        raise LinearModelError("no pure one_sided halfspace exists")
    return base_model


def _fit_conjunction(
    graphs, labels, target, angles, selectors, max_components: int = 4
) -> ConjunctiveModel | None:
    """Greedy intersection: start from the halfspace covering the most target
    cases (impurity allowed), then repeatedly add the component that removes
    the most off-target cases while keeping every covered target case."""
    idx_all = set(range(len(graphs)))

    def halfspace_cases(theta, sel, t, above) -> set[int]:
        out = set()
        for i in idx_all:
            v = project(graphs[i], theta, sel)
            if (v > t) if above else (v < t):
                out.add(i)
        return out

    # opening component: keep every target case, maximal (necessarily all)
    best_open = None
    for theta in angles:
        for sel in selectors:
            proj = [(project(g, theta, sel), i) for i, g in enumerate(graphs)]
            tvals = [v for v, i in proj if labels[i] == target]
            if not tvals:
                return None
            for above in (True, False):
                t = min(tvals) - 1e-9 if above else max(tvals) + 1e-9
                covered = halfspace_cases(theta, sel, t, above)
                off = sum(1 for i in covered if labels[i] != target)
                key = (off, theta, t)
                if best_open is None or key < best_open[0]:
                    best_open = (key, LinearModel(
                        angle=theta, selector=sel, threshold=t, target=target,
                        mode="one_sided", target_above=above))
    if best_open is None:
        return None
    components = [best_open[1]]
    current = halfspace_cases(
        best_open[1].angle, best_open[1].selector, best_open[1].threshold, best_open[1].target_above
    )

    while len(components) < max_components:
        off_cases = {i for i in current if labels[i] != target}
        if not off_cases:
            break
        tgt_cases = {i for i in current if labels[i] == target}
        best_add = None
        for theta in angles:
            for sel in selectors:
                vals = {i: project(graphs[i], theta, sel) for i in current}
                tvals = [vals[i] for i in tgt_cases]
                for above in (True, False):
                    t = min(tvals) - 1e-9 if above else max(tvals) + 1e-9
                    removed = sum(
                        1 for i in off_cases if not ((vals[i] > t) if above else (vals[i] < t))
                    )
                    if removed == 0:
                        continue
                    key = (-removed, theta, t)
                    if best_add is None or key < best_add[0]:
                        best_add = (key, LinearModel(
                            angle=theta, selector=sel, threshold=t, target=target,
                            mode="one_sided", target_above=above))
        if best_add is None:
            return None  # stuck impure
        components.append(best_add[1])
        comp = best_add[1]
        current &= halfspace_cases(comp.angle, comp.selector, comp.threshold, comp.target_above)
    if any(labels[i] != target for i in current):
        return None
    return ConjunctiveModel(components=tuple(components), target=target)


def regress(
    graphs: list[PolylineGraph],
    targets: list[float],
    angle: float,
    selector: str | int = ENDPOINT,
) -> tuple[float, float, float]:
    """Ordinary least squares of targets on projection values:
    (slope, intercept, rmse)."""
    if len(graphs) != len(targets):
        raise LinearModelError("graphs and targets must be the same length")
    x = np.array([project(g, angle, selector) for g in graphs], dtype=float)
    t = np.array(targets, dtype=float)
    if len(set(x.tolist())) < 2:
        raise LinearModelError("need at least two distinct projections")
    slope, intercept = np.polyfit(x, t, 1)
    pred = slope * x + intercept
    rmse = float(np.sqrt(np.mean((pred - t) ** 2)))
    return float(slope), float(intercept), rmse
