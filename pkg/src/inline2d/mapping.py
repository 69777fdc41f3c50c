"""Mappings between n-D points and 2-D polyline graphs in inline coordinates.

Two families of modes exist.  Pure inline modes place every attribute value
directly on a horizontal baseline (one node per attribute, all at height 0);
they differ only in the per-attribute baseline offsets.  Paired modes consume
attributes two at a time, one horizontal and one vertical per node, and may
accumulate the running horizontal (partial dynamic), both axes (full
dynamic), or weighted sums of both (weighted).  Paired modes need ceil(n/2)
nodes; an odd trailing attribute is paired with a zero vertical and flagged
so decoding can strip it.

All paired modes with nonzero weights are exactly invertible: `decode` undoes
`encode` with plain sums and differences, no approximation involved.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

PURE_KINDS = ("ilc_sequential", "ilc_collocated", "ilc_generic")
PAIRED_KINDS = (
    "ilc2_static",
    "ilc2_partial_dynamic",
    "ilc2_full_dynamic",
    "ilc2_weighted",
)
ALL_KINDS = PURE_KINDS + PAIRED_KINDS


class MappingError(ValueError):
    """Raised for invalid mode parameters or undecodable graphs."""


@dataclass(frozen=True)
class MappingMode:
    """A named coordinate layout plus its per-attribute parameters.

    offsets apply to ilc_sequential / ilc_generic (baseline start of each
    attribute's axis); weights apply to ilc2_weighted.  Both must match the
    data dimension when present.
    """

    kind: str
    offsets: tuple[float, ...] | None = None
    weights: tuple[float, ...] | None = None

    def __post_init__(self) -> None:
        if self.kind not in ALL_KINDS:
            raise MappingError(f"unknown mapping kind {self.kind!r}")
        if self.offsets is not None:
            object.__setattr__(self, "offsets", tuple(float(o) for o in self.offsets))
        if self.weights is not None:
            ws = tuple(float(w) for w in self.weights)
            if any(not math.isfinite(w) for w in ws):
                raise MappingError("weights must be finite")
            object.__setattr__(self, "weights", ws)

    @classmethod
    def sequential(cls, offsets) -> "MappingMode":
        return cls("ilc_sequential", offsets=tuple(offsets))

    @classmethod
    def collocated(cls) -> "MappingMode":
        return cls("ilc_collocated")

    @classmethod
    def generic(cls, offsets) -> "MappingMode":
        return cls("ilc_generic", offsets=tuple(offsets))

    @classmethod
    def static(cls) -> "MappingMode":
        return cls("ilc2_static")

    @classmethod
    def partial_dynamic(cls) -> "MappingMode":
        return cls("ilc2_partial_dynamic")

    @classmethod
    def full_dynamic(cls) -> "MappingMode":
        return cls("ilc2_full_dynamic")

    @classmethod
    def weighted(cls, weights) -> "MappingMode":
        return cls("ilc2_weighted", weights=tuple(weights))

    @property
    def paired(self) -> bool:
        return self.kind in PAIRED_KINDS


@dataclass(frozen=True)
class PolylineGraph:
    """The 2-D image of one n-D point: an ordered node list.

    `padded` marks that the source dimension was odd and a zero vertical was
    appended to complete the final node.  Node count is ceil(n/2) for paired
    modes and n for pure modes.
    """

    nodes: tuple[tuple[float, float], ...]
    padded: bool = False
    source_dim: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "nodes", tuple((float(x), float(y)) for x, y in self.nodes)
        )

    def __len__(self) -> int:
        return len(self.nodes)


def evenly_spaced_offsets(n: int, span: float) -> tuple[float, ...]:
    """Offsets laying n baseline axes one after another, each `span` wide."""
    return tuple(i * span for i in range(n))


def _check_values(values) -> tuple[float, ...]:
    vals = tuple(float(v) for v in values)
    if len(vals) < 2:
        raise MappingError(f"need dimension >= 2, got {len(vals)}")
    if any(not math.isfinite(v) for v in vals):
        raise MappingError("values must be finite")
    return vals


def encode(values, mode: MappingMode) -> PolylineGraph:
    """Map an n-D value sequence to its polyline graph under `mode`.

    Paired modes use the canonical pairing (x1,x2),(x3,x4),...; odd n pads
    the final pair with a zero vertical and sets the padded flag.
    """
    vals = _check_values(values)
    n = len(vals)

    if not mode.paired:
        if mode.kind == "ilc_collocated":
            offsets = (0.0,) * n
        else:
            if mode.offsets is None:
                raise MappingError(f"{mode.kind} requires offsets")
            if len(mode.offsets) != n:
                raise MappingError(
                    f"offset length {len(mode.offsets)} != dimension {n}"
                )
            offsets = mode.offsets
        nodes = tuple((offsets[i] + vals[i], 0.0) for i in range(n))
        return PolylineGraph(nodes=nodes, padded=False, source_dim=n)

    padded = n % 2 == 1
    seq = vals + ((0.0,) if padded else ())
    if mode.kind == "ilc2_weighted":
        if mode.weights is None:
            raise MappingError("ilc2_weighted requires weights")
        if len(mode.weights) != n:
            raise MappingError(
                f"weight length {len(mode.weights)} != dimension {n}"
            )
        w = mode.weights + ((1.0,) if padded else ())
    else:
        w = None

    nodes = []
    run_x = 0.0
    run_y = 0.0
    for k in range(0, len(seq), 2):
        xv, yv = seq[k], seq[k + 1]
        if mode.kind == "ilc2_static":
            nodes.append((xv, yv))
        elif mode.kind == "ilc2_partial_dynamic":
            run_x += xv
            nodes.append((run_x, yv))
        elif mode.kind == "ilc2_full_dynamic":
            run_x += xv
            run_y += yv
            nodes.append((run_x, run_y))
        else:  # ilc2_weighted: weighted full dynamic
            run_x += w[k] * xv
            run_y += w[k + 1] * yv
            nodes.append((run_x, run_y))
    return PolylineGraph(nodes=tuple(nodes), padded=padded, source_dim=n)


def decode(graph: PolylineGraph, mode: MappingMode) -> tuple[float, ...]:
    """Recover the original n-D values from a graph produced by `encode`.

    Exact inverse for all paired modes (weights must be nonzero) and for
    pure modes with known offsets; the zero pad is stripped.
    """
    nodes = graph.nodes
    if not nodes:
        raise MappingError("empty graph")

    if not mode.paired:
        n = len(nodes)
        if mode.kind == "ilc_collocated":
            offsets = (0.0,) * n
        else:
            if mode.offsets is None:
                raise MappingError(f"{mode.kind} requires offsets to decode")
            if len(mode.offsets) != n:
                raise MappingError("offset length does not match node count")
            offsets = mode.offsets
        return tuple(nodes[i][0] - offsets[i] for i in range(n))

    n = graph.source_dim or len(nodes) * 2
    expected = (n + 1) // 2
    if len(nodes) != expected:
        raise MappingError(
            f"node count {len(nodes)} inconsistent with dimension {n}"
        )
    if mode.kind == "ilc2_weighted":
        if mode.weights is None:
            raise MappingError("ilc2_weighted requires weights to decode")
        if len(mode.weights) != n:
            raise MappingError("weight length does not match dimension")
        if any(w == 0.0 for w in mode.weights):
            raise MappingError("cannot decode with a zero weight")
        w = mode.weights + ((1.0,) if n % 2 else ())
    else:
        w = (1.0,) * (len(nodes) * 2)

    out: list[float] = []
    prev_x = 0.0
    prev_y = 0.0
    for k, (nx, ny) in enumerate(nodes):
        if mode.kind == "ilc2_static":
            xv, yv = nx, ny
        elif mode.kind == "ilc2_partial_dynamic":
            xv, yv = (nx - prev_x) / w[2 * k], ny
            prev_x = nx
        else:  # full dynamic / weighted
            xv = (nx - prev_x) / w[2 * k]
            yv = (ny - prev_y) / w[2 * k + 1]
            prev_x, prev_y = nx, ny
        out.extend((xv, yv))
    if graph.padded:
        out = out[:-1]
    return tuple(out)


def arc_heights(values) -> tuple[float, ...]:
    """Adjacent-value distances |x_i - x_{i+1}|, the arc heights of pure
    inline rendering."""
    vals = _check_values(values)
    return tuple(abs(vals[i] - vals[i + 1]) for i in range(len(vals) - 1))
