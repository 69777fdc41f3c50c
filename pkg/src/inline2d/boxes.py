"""Grid-based discovery of high-purity boxes over polyline graphs.

A box covers a case when any node of the case's graph lies inside it (all
four edges closed).  Discovery lays a fixed-pitch grid over the populated
area and alternates two regimes:

* pure sweep - while some class still has a pure box covering at least
  `min_pure_support` active cases, accept the maximum-support pure box for
  each class in turn and retire its cases;
* ranked     - afterwards, rank every remaining candidate rectangle by
  (purity desc, support desc, area asc, corner order) and accept through a
  selector (headless runs take the top entry) until no candidate covers an
  active case.

Case sets are tracked as integer bitmasks, which keeps a full Wisconsin
Breast Cancer run well under a second.  Every tie is broken by a total
order, so two runs over identical inputs produce identical traces.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from typing import Callable, Iterator

from .dataset import ClassLabel
from .mapping import PolylineGraph

GRID_EPS = 1e-9


class DiscoveryError(ValueError):
    """Raised for invalid configs or inconsistent accept requests."""


@dataclass(frozen=True)
class Box:
    """Axis-aligned closed rectangle in graph units."""

    x1: float
    x2: float
    y1: float
    y2: float
    id: str = ""

    def __post_init__(self) -> None:
        if self.x1 > self.x2 or self.y1 > self.y2:
            raise DiscoveryError(
                f"degenerate box corners ({self.x1},{self.x2},{self.y1},{self.y2})"
            )

    @property
    def corners(self) -> tuple[float, float, float, float]:
        return (self.x1, self.x2, self.y1, self.y2)

    @property
    def area(self) -> float:
        return (self.x2 - self.x1) * (self.y2 - self.y1)


@dataclass(frozen=True)
class BoxStats:
    """Per-class covered-case counts for one box over one active set."""

    per_class: dict[str, int]
    support: int
    purity: float | None
    dominant: str | None

    @classmethod
    def from_counts(cls, per_class: dict[str, int]) -> "BoxStats":
        support = sum(per_class.values())
        if support == 0:
            return cls(per_class=dict(per_class), support=0, purity=None, dominant=None)
        dominant = max(per_class, key=lambda c: per_class[c])
        return cls(
            per_class=dict(per_class),
            support=support,
            purity=per_class[dominant] / support,
            dominant=dominant,
        )


@dataclass(frozen=True)
class DiscoveryConfig:
    pitch: float = 0.5
    max_box_cells_x: int = 40
    max_box_cells_y: int = 24
    min_pure_support: int = 8
    mini_threshold: int = 7

    def __post_init__(self) -> None:
        if self.pitch <= 0:
            raise DiscoveryError("pitch must be positive")
        if self.max_box_cells_x < 1 or self.max_box_cells_y < 1:
            raise DiscoveryError("candidate size bounds must be >= 1 cell")
        if self.min_pure_support < 1:
            raise DiscoveryError("min_pure_support must be >= 1")
        if self.mini_threshold < 0:
            raise DiscoveryError("mini_threshold must be >= 0")


@dataclass(frozen=True)
class TraceStep:
    box: Box
    target: str
    stats: BoxStats
    removed_ids: tuple[int, ...]
    phase: str  # "pure" or "ranked"


@dataclass
class DiscoveryTrace:
    steps: list[TraceStep] = field(default_factory=list)
    class_order: list[str] = field(default_factory=list)
    config: DiscoveryConfig = field(default_factory=DiscoveryConfig)

    def __len__(self) -> int:
        return len(self.steps)

    @property
    def boxes(self) -> list[Box]:
        return [s.box for s in self.steps]

    @property
    def covered_ids(self) -> set[int]:
        out: set[int] = set()
        for s in self.steps:
            out.update(s.removed_ids)
        return out


@dataclass(frozen=True)
class Candidate:
    """A rankable box proposal with its stats over the current active set."""

    box: Box
    stats: BoxStats


def covers(box: Box, graph: PolylineGraph) -> bool:
    """True when any node of the graph lies inside the closed box."""
    return any(
        box.x1 <= nx <= box.x2 and box.y1 <= ny <= box.y2 for nx, ny in graph.nodes
    )


def box_stats(
    box: Box,
    graphs: list[PolylineGraph],
    labels: list[ClassLabel],
    active=None,
) -> BoxStats:
    """Exact per-class coverage counts; each case counts once however many of
    its nodes fall inside.  `active` restricts to a subset of case indices."""
    idx = range(len(graphs)) if active is None else active
    counts: dict[str, int] = {}
    for i in idx:
        if covers(box, graphs[i]):
            name = labels[i].name
            counts[name] = counts.get(name, 0) + 1
    return BoxStats.from_counts(counts)


class GraphGrid:
    """Pitch-aligned occupancy grid over the bounding rectangle of all nodes.

    Nodes sitting exactly on a grid line are charged to both adjacent cells,
    so cell-range coverage is identical to closed-interval membership.
    """

    def __init__(self, graphs: list[PolylineGraph], labels: list[ClassLabel], pitch: float):
        if not graphs:
            raise DiscoveryError("need at least one graph")
        if len(graphs) != len(labels):
            raise DiscoveryError("graphs and labels must be the same length")
        self.pitch = float(pitch)
        self.n_cases = len(graphs)
        xs = [nx for g in graphs for nx, _ in g.nodes]
        ys = [ny for g in graphs for _, ny in g.nodes]
        self.x0 = math.floor(min(xs) / pitch + GRID_EPS) * pitch
        self.y0 = math.floor(min(ys) / pitch + GRID_EPS) * pitch
        self.width = max(1, math.ceil((max(xs) - self.x0) / pitch - GRID_EPS))
        self.height = max(1, math.ceil((max(ys) - self.y0) / pitch - GRID_EPS))

        self.cells: list[list[int]] = [[0] * self.width for _ in range(self.height)]
        for i, g in enumerate(graphs):
            bit = 1 << i
            for nx, ny in g.nodes:
                cx0, cx1 = self._cell_span(nx, self.x0, self.width)
                cy0, cy1 = self._cell_span(ny, self.y0, self.height)
                for j in range(cy0, cy1 + 1):
                    row = self.cells[j]
                    for ii in range(cx0, cx1 + 1):
                        row[ii] |= bit

        self.class_order: list[str] = []
        self.class_masks: dict[str, int] = {}
        for i, lab in enumerate(labels):
            if lab.name not in self.class_masks:
                self.class_masks[lab.name] = 0
                self.class_order.append(lab.name)
            self.class_masks[lab.name] |= 1 << i

    def _cell_span(self, v: float, v0: float, count: int) -> tuple[int, int]:
        t = (v - v0) / self.pitch
        ti = round(t)
        if abs(t - ti) < GRID_EPS:
            lo, hi = ti - 1, ti
        else:
            lo = hi = math.floor(t)
        return max(0, lo), min(count - 1, hi)

    def cell_box(self, i1: int, i2: int, j1: int, j2: int, box_id: str = "") -> Box:
        return Box(
            x1=self.x0 + i1 * self.pitch,
            x2=self.x0 + (i2 + 1) * self.pitch,
            y1=self.y0 + j1 * self.pitch,
            y2=self.y0 + (j2 + 1) * self.pitch,
            id=box_id,
        )

    def box_cells(self, box: Box) -> tuple[int, int, int, int]:
        """Grid index range of a grid-aligned box, clipped to the grid."""
        spans = []
        for lo, hi, v0 in ((box.x1, box.x2, self.x0), (box.y1, box.y2, self.y0)):
            t1 = (lo - v0) / self.pitch
            t2 = (hi - v0) / self.pitch
            if abs(t1 - round(t1)) > GRID_EPS or abs(t2 - round(t2)) > GRID_EPS:
                raise DiscoveryError("box corners must be multiples of the grid pitch")
            spans.append((round(t1), round(t2) - 1))
        (i1, i2), (j1, j2) = spans
        return max(0, i1), min(i2, self.width - 1), max(0, j1), min(j2, self.height - 1)

    def coverage(self, i1: int, i2: int, j1: int, j2: int, active: int) -> int:
        acc = 0
        for j in range(j1, j2 + 1):
            row = self.cells[j]
            for i in range(i1, i2 + 1):
                acc |= row[i]
        return acc & active

    def mask_counts(self, mask: int) -> dict[str, int]:
        return {
            c: (mask & self.class_masks[c]).bit_count()
            for c in self.class_order
            if mask & self.class_masks[c]
        }

    def mask_ids(self, mask: int) -> tuple[int, ...]:
        out = []
        i = 0
        while mask:
            if mask & 1:
                out.append(i)
            mask >>= 1
            i += 1
        return tuple(out)


def enumerate_candidates(
    grid: GraphGrid,
    max_cells_x: int,
    max_cells_y: int,
    active: int | None = None,
) -> Iterator[tuple[Box, int]]:
    """Every grid-aligned rectangle within the size bounds that covers at
    least one active case, with its coverage mask, in deterministic
    (y1, y2, x1, x2) order."""
    act = active if active is not None else (1 << grid.n_cases) - 1
    W, H = grid.width, grid.height
    for j1 in range(H):
        col = [0] * W
        for j2 in range(j1, min(j1 + max_cells_y, H)):
            row = grid.cells[j2]
            for i in range(W):
                if row[i]:
                    col[i] |= row[i] & act
            for i1 in range(W):
                acc = 0
                for i2 in range(i1, min(i1 + max_cells_x, W)):
                    acc |= col[i2]
                    if acc:
                        yield grid.cell_box(i1, i2, j1, j2), acc


def _candidate_key(purity: float, support: int, area_cells: int, i1, j1, i2, j2):
    return (-purity, -support, area_cells, i1, j1, i2, j2)


class DiscoveryEngine:
    """Stepwise discovery over one mapped dataset.

    Drives both the headless `discover` run and the interactive session: the
    ranked candidate list always has the headless pick at index 0, so
    accepting the top candidate to termination replays a headless run.
    """

    def __init__(
        self,
        graphs: list[PolylineGraph],
        labels: list[ClassLabel],
        config: DiscoveryConfig | None = None,
    ):
        self.config = config or DiscoveryConfig()
        self.graphs = list(graphs)
        self.labels = list(labels)
        self.grid = GraphGrid(self.graphs, self.labels, self.config.pitch)
        self.active = (1 << self.grid.n_cases) - 1
        self.trace = DiscoveryTrace(
            steps=[], class_order=list(self.grid.class_order), config=self.config
        )
        self._turn = 0
        self._undo: list[tuple[int, int]] = []

    # -- pure-sweep scan ----------------------------------------------------

    def _best_pure(self, cls: str) -> tuple[int, int, int, int, int] | None:
        """Max-support pure box for `cls`: (support, i1, i2, j1, j2).

        Scans, per y-interval, the maximal column runs free of other-class
        active cases; support is monotone along a clean run, so the best box
        is a full run (or a width-capped window inside one).
        """
        cfg = self.config
        grid = self.grid
        own_all = grid.class_masks[cls] & self.active
        if not own_all:
            return None
        other_all = self.active & ~grid.class_masks[cls]
        W, H = grid.width, grid.height
        best_sup = 0
        best = None

        for j1 in range(H):
            col_own = [0] * W
            col_oth = [0] * W
            for j2 in range(j1, min(j1 + cfg.max_box_cells_y, H)):
                row = grid.cells[j2]
                for i in range(W):
                    m = row[i]
                    if m:
                        col_own[i] |= m & own_all
                        col_oth[i] |= m & other_all
                i = 0
                while i < W:
                    if col_oth[i]:
                        i += 1
                        continue
                    j = i
                    while j < W and not col_oth[j]:
                        j += 1
                    if j - i <= cfg.max_box_cells_x:
                        acc = 0
                        for k in range(i, j):
                            acc |= col_own[k]
                        if acc:
                            sup = acc.bit_count()
                            if sup > best_sup:
                                best_sup, best = sup, (sup, i, j - 1, j1, j2)
                    else:
                        for st in range(i, j - cfg.max_box_cells_x + 1):
                            acc = 0
                            for k in range(st, st + cfg.max_box_cells_x):
                                acc |= col_own[k]
                            sup = acc.bit_count()
                            if sup > best_sup:
                                best_sup = sup
                                best = (sup, st, st + cfg.max_box_cells_x - 1, j1, j2)
                    i = j
        return best

    def _trim(self, i1: int, i2: int, j1: int, j2: int) -> tuple[int, int, int, int]:
        """Shrink a cell range while its active coverage stays identical."""
        cov = self.grid.coverage(i1, i2, j1, j2, self.active)
        changed = True
        while changed:
            changed = False
            if i1 < i2 and self.grid.coverage(i1 + 1, i2, j1, j2, self.active) == cov:
                i1 += 1
                changed = True
            if i1 < i2 and self.grid.coverage(i1, i2 - 1, j1, j2, self.active) == cov:
                i2 -= 1
                changed = True
            if j1 < j2 and self.grid.coverage(i1, i2, j1 + 1, j2, self.active) == cov:
                j1 += 1
                changed = True
            if j1 < j2 and self.grid.coverage(i1, i2, j1, j2 - 1, self.active) == cov:
                j2 -= 1
                changed = True
        return i1, i2, j1, j2

    def _pure_pick(self) -> tuple[str, tuple[int, int, int, int]] | None:
        """Next pure-sweep acceptance honoring the class rotation."""
        classes = self.grid.class_order
        for step in range(len(classes)):
            cls = classes[(self._turn + step) % len(classes)]
            found = self._best_pure(cls)
            if found and found[0] >= self.config.min_pure_support:
                sup, i1, i2, j1, j2 = found
                return cls, self._trim(i1, i2, j1, j2)
        return None

    # -- ranked scan ---------------------------------------------------------

    def _scan_ranked(self) -> Iterator[tuple[tuple, int, int, int, int, int]]:
        """Stream (key, mask, i1, i2, j1, j2) for candidate rectangles under
        the joint order key: purity desc, support desc, area asc, corners asc.

        Rectangles whose coverage equals a smaller contained rectangle's are
        skipped; they can never win a tie because area breaks it first.
        """
        cfg, grid = self.config, self.grid
        act = self.active
        W, H = grid.width, grid.height
        masks = grid.class_masks
        order = grid.class_order
        row_live = [
            any(c & act for c in grid.cells[j]) for j in range(H)
        ]
        for j1 in range(H):
            if not row_live[j1]:
                continue
            col = [0] * W
            for j2 in range(j1, min(j1 + cfg.max_box_cells_y, H)):
                if row_live[j2]:
                    row = grid.cells[j2]
                    for i in range(W):
                        if row[i]:
                            col[i] |= row[i] & act
                elif j2 > j1:
                    continue  # same coverage as (j1, j2-1) with larger area
                for i1 in range(W):
                    if not col[i1]:
                        continue
                    acc = 0
                    for i2 in range(i1, min(i1 + cfg.max_box_cells_x, W)):
                        prev = acc
                        acc |= col[i2]
                        if not acc or (acc == prev and i2 > i1):
                            continue
                        sup = acc.bit_count()
                        dom = max((acc & masks[c]).bit_count() for c in order)
                        key = _candidate_key(
                            dom / sup, sup, (i2 - i1 + 1) * (j2 - j1 + 1), i1, j1, i2, j2
                        )
                        yield key, acc, i1, i2, j1, j2

    def _ranked(self, limit: int) -> list[tuple[tuple, int, int, int, int, int]]:
        """Best `limit` distinct-coverage candidates, best key first."""
        pool = heapq.nsmallest(max(limit * 4, 8), self._scan_ranked(), key=lambda t: t[0])
        out = []
        seen: set[int] = set()
        for item in pool:
            if item[1] in seen:
                continue
            seen.add(item[1])
            out.append(item)
            if len(out) >= limit:
                break
        return out

    # -- public stepping API ---------------------------------------------------

    @property
    def done(self) -> bool:
        return self.active == 0 or self.next_pick() is None

    def next_pick(self) -> Candidate | None:
        """The candidate a headless run would accept next."""
        if self.active == 0:
            return None
        pick = self._pure_pick()
        if pick is not None:
            _, (i1, i2, j1, j2) = pick
            return self._candidate(i1, i2, j1, j2)
        ranked = self._ranked(1)
        if not ranked:
            return None
        _, _, i1, i2, j1, j2 = ranked[0]
        return self._candidate(i1, i2, j1, j2)

    def candidates(self, limit: int = 50) -> list[Candidate]:
        """Ranked proposals; index 0 is always the headless pick."""
        if self.active == 0:
            return []
        out: list[Candidate] = []
        seen: set[tuple[float, float, float, float]] = set()
        pure = self._pure_pick()
        if pure is not None:
            _, (i1, i2, j1, j2) = pure
            top = self._candidate(i1, i2, j1, j2)
            out.append(top)
            seen.add(top.box.corners)
        for _, _, i1, i2, j1, j2 in self._ranked(limit):
            if len(out) >= limit:
                break
            cand = self._candidate(i1, i2, j1, j2)
            if cand.box.corners in seen:
                continue
            seen.add(cand.box.corners)
            out.append(cand)
        return out

    def _candidate(self, i1: int, i2: int, j1: int, j2: int) -> Candidate:
        mask = self.grid.coverage(i1, i2, j1, j2, self.active)
        return Candidate(
            box=self.grid.cell_box(i1, i2, j1, j2),
            stats=BoxStats.from_counts(self.grid.mask_counts(mask)),
        )

    def accept(self, box: Box) -> TraceStep:
        """Accept a box: record the trace step and retire its active cases."""
        i1, i2, j1, j2 = self.grid.box_cells(box)
        mask = self.grid.coverage(i1, i2, j1, j2, self.active)
        if not mask:
            raise DiscoveryError("box covers no active case")
        stats = BoxStats.from_counts(self.grid.mask_counts(mask))
        phase = "pure"
        if stats.purity != 1.0 or stats.support < self.config.min_pure_support:
            phase = "ranked"
        step = TraceStep(
            box=Box(*box.corners, id=f"B{len(self.trace.steps) + 1}"),
            target=stats.dominant,
            stats=stats,
            removed_ids=self.grid.mask_ids(mask),
            phase=phase,
        )
        self._undo.append((self.active, self._turn))
        self.trace.steps.append(step)
        self.active &= ~mask
        # class rotation continues after the class just served
        order = self.grid.class_order
        self._turn = (order.index(stats.dominant) + 1) % len(order)
        return step

    def undo(self) -> None:
        if not self._undo:
            raise DiscoveryError("nothing to undo")
        self.active, self._turn = self._undo.pop()
        self.trace.steps.pop()

    def run(self, selector: Callable[[list[Candidate]], Candidate | None] | None = None) -> DiscoveryTrace:
        """Run to termination.  Without a selector, accept the headless pick
        each step; with one, present ranked candidates and accept its choice
        until it returns None or no candidate remains."""
        while self.active:
            if selector is None:
                pick = self.next_pick()
            else:
                cands = self.candidates()
                pick = selector(cands) if cands else None
            if pick is None:
                break
            self.accept(pick.box)
        return self.trace


def discover(
    graphs: list[PolylineGraph],
    labels: list[ClassLabel],
    config: DiscoveryConfig | None = None,
    selector: Callable[[list[Candidate]], Candidate | None] | None = None,
) -> DiscoveryTrace:
    """Headless discovery (or selector-driven when one is supplied)."""
    if not graphs:
        return DiscoveryTrace(config=config or DiscoveryConfig())
    return DiscoveryEngine(graphs, labels, config).run(selector)
