"""Deterministic SVG scenes of datasets in inline coordinates.

Paired modes draw one polyline per case; pure baseline modes draw arc chains
whose heights scale with the adjacent-value distances.  With mirroring on,
the second class is flipped below the baseline so the class shapes can be
compared without occlusion; only screen placement flips, the graph
coordinates the learner sees are untouched.  Output is plain SVG 1.1 text
with fixed float formatting, byte-identical across runs for equal inputs.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .boxes import Box
from .dataset import LabeledDataset
from .mapping import MappingMode, PolylineGraph, arc_heights, encode


class RenderError(ValueError):
    """Raised for unmapped classes or impossible canvases."""


@dataclass(frozen=True)
class BoxOverlay:
    box: Box
    stroke: str = "black"
    side: str = "upper"  # which mirrored half the rectangle is drawn on
    label: str = ""


@dataclass(frozen=True)
class RenderOptions:
    mode: MappingMode
    mirrored: bool = False
    boxes: tuple[BoxOverlay, ...] = ()
    width: int = 960
    height: int = 540
    class_colors: dict[str, str] | None = None
    sample_limit: int | None = None
    highlight_ids: frozenset[str] = frozenset()
    arc_height_factor: float = 0.5
    margin: float = 0.05

    def __post_init__(self) -> None:
        if self.width <= 0 or self.height <= 0:
            raise RenderError("canvas must be positive")


@dataclass(frozen=True)
class ViewTransform:
    """Affine graph-to-screen map: uniform scale, y flipped downwards."""

    scale: float
    tx: float
    ty: float

    def to_screen(self, gx: float, gy: float) -> tuple[float, float]:
        return self.tx + self.scale * gx, self.ty - self.scale * gy

    def to_graph(self, sx: float, sy: float) -> tuple[float, float]:
        return (sx - self.tx) / self.scale, (self.ty - sy) / self.scale


def _fmt(v: float) -> str:
    return f"{v:.3f}"


def _case_geometry(ds: LabeledDataset, options: RenderOptions):
    """Per-case drawing primitives in graph coordinates, mirror applied."""
    mirrored_class = None
    classes = ds.classes
    if options.mirrored and len(classes) >= 2:
        mirrored_class = classes[1].name
    limit = options.sample_limit if options.sample_limit is not None else len(ds)
    out = []
    for i, (point, label) in enumerate(zip(ds.points, ds.labels)):
        if i >= limit:
            break
        flip = -1.0 if label.name == mirrored_class else 1.0
        if options.mode.paired:
            graph = encode(point.values, options.mode)
            pts = [(nx, flip * ny) for nx, ny in graph.nodes]
            out.append(("polyline", i, label.name, pts))
        else:
            graph = encode(point.values, options.mode)
            heights = arc_heights(point.values)
            arcs = []
            for k in range(len(graph.nodes) - 1):
                xa = graph.nodes[k][0]
                xb = graph.nodes[k + 1][0]
                h = flip * options.arc_height_factor * heights[k]
                arcs.append((xa, xb, h))
            out.append(("arcs", i, label.name, arcs))
    return out


def view_transform(ds: LabeledDataset, options: RenderOptions) -> ViewTransform:
    """Uniform-scale fit of the scene bounds into the canvas with margins."""
    xs: list[float] = []
    ys: list[float] = [0.0]
    for kind, _i, _c, data in _case_geometry(ds, options):
        if kind == "polyline":
            for gx, gy in data:
                xs.append(gx)
                ys.append(gy)
        else:
            for xa, xb, h in data:
                xs.extend((xa, xb))
                ys.append(h)
    for overlay in options.boxes:
        sign = -1.0 if overlay.side == "lower" else 1.0
        xs.extend((overlay.box.x1, overlay.box.x2))
        ys.extend((sign * overlay.box.y1, sign * overlay.box.y2))
    if not xs:
        xs = [0.0, 1.0]
        ys = [0.0, 1.0]
    x_lo, x_hi = min(xs), max(xs)
    y_lo, y_hi = min(ys), max(ys)
    dx = x_hi - x_lo or 1.0
    dy = y_hi - y_lo or 1.0
    usable_w = options.width * (1 - 2 * options.margin)
    usable_h = options.height * (1 - 2 * options.margin)
    scale = min(usable_w / dx, usable_h / dy)
    tx = options.width / 2 - scale * (x_lo + x_hi) / 2
    ty = options.height / 2 + scale * (y_lo + y_hi) / 2
    return ViewTransform(scale=scale, tx=tx, ty=ty)


def render_scene(ds: LabeledDataset, options: RenderOptions) -> str:
    """SVG document of the dataset with optional box overlays."""
    colors = dict(options.class_colors or {})
    for lab in ds.classes:
        colors.setdefault(lab.name, lab.color)
        if not colors[lab.name]:
            raise RenderError(f"no color for class {lab.name!r}")

    vt = view_transform(ds, options)
    w, h = options.width, options.height
    parts = [
        '<?xml version="1.0" encoding="UTF-8"?>\n'
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{w}" height="{h}" viewBox="0 0 {w} {h}">\n',
        f'<rect x="0" y="0" width="{w}" height="{h}" fill="white"/>\n',
    ]
    # baseline and frame
    bx0, by = vt.to_screen(0.0, 0.0)
    parts.append('<g id="axes">\n')
    parts.append(
        f'<line x1="0" y1="{_fmt(by)}" x2="{w}" y2="{_fmt(by)}" '
        'stroke="#999999" stroke-width="1"/>\n'
    )
    parts.append(
        f'<rect x="0.5" y="0.5" width="{w - 1}" height="{h - 1}" '
        'fill="none" stroke="#cccccc" stroke-width="1"/>\n'
    )
    parts.append("</g>\n")

    parts.append('<g id="cases" fill="none">\n')
    for kind, i, cls, data in _case_geometry(ds, options):
        color = colors[cls]
        case_id = ds.points[i].id
        width = 2.0 if case_id in options.highlight_ids else 0.8
        opacity = "1.0" if case_id in options.highlight_ids else "0.45"
        if kind == "polyline":
            pts = " ".join(
                f"{_fmt(sx)},{_fmt(sy)}" for sx, sy in (vt.to_screen(gx, gy) for gx, gy in data)
            )
            parts.append(
                f'<polyline points="{pts}" stroke="{color}" '
                f'stroke-width="{width}" stroke-opacity="{opacity}"/>\n'
            )
        else:
            path = []
            for xa, xb, arc_h in data:
                sx1, sy1 = vt.to_screen(xa, 0.0)
                sx2, sy2 = vt.to_screen(xb, 0.0)
                if sx1 == sx2:
                    continue
                rx = abs(sx2 - sx1) / 2
                ry = abs(arc_h) * vt.scale
                if ry == 0:
                    path.append(f"M {_fmt(sx1)} {_fmt(sy1)} L {_fmt(sx2)} {_fmt(sy2)}")
                    continue
                # upward arcs sweep one way, mirrored arcs the other
                sweep = 1 if (arc_h > 0) == (sx2 > sx1) else 0
                path.append(
                    f"M {_fmt(sx1)} {_fmt(sy1)} A {_fmt(rx)} {_fmt(ry)} 0 0 {sweep} "
                    f"{_fmt(sx2)} {_fmt(sy2)}"
                )
            if path:
                parts.append(
                    f'<path d="{" ".join(path)}" stroke="{color}" '
                    f'stroke-width="{width}" stroke-opacity="{opacity}"/>\n'
                )
    parts.append("</g>\n")

    parts.append('<g id="boxes" fill="none">\n')
    for overlay in options.boxes:
        sign = -1.0 if overlay.side == "lower" else 1.0
        gx1, gy_top = overlay.box.x1, sign * overlay.box.y2
        gx2, gy_bot = overlay.box.x2, sign * overlay.box.y1
        sx1, sy1 = vt.to_screen(gx1, max(gy_top, gy_bot))
        sx2, sy2 = vt.to_screen(gx2, min(gy_top, gy_bot))
        parts.append(
            f'<rect x="{_fmt(sx1)}" y="{_fmt(sy1)}" width="{_fmt(sx2 - sx1)}" '
            f'height="{_fmt(sy2 - sy1)}" stroke="{overlay.stroke}" stroke-width="1.5"/>\n'
        )
        if overlay.label:
            parts.append(
                f'<text x="{_fmt(sx1 + 2)}" y="{_fmt(sy1 - 3)}" font-size="11" '
                f'fill="{overlay.stroke}" stroke="none">{overlay.label}</text>\n'
            )
    parts.append("</g>\n")
    parts.append("</svg>\n")
    return "".join(parts)
