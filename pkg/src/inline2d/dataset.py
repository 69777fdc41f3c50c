"""Labeled tabular ingestion for the discovery pipeline.

Reads UCI-style CSV files with a header row, a designated label column, and
the conventional "?" missing marker.  Rows containing the marker are dropped
(the only supported policy); everything that survives must be numeric and
finite.  The Wisconsin Breast Cancer benchmark ships with the package and
gets its own convenience loader.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from importlib import resources

MISSING_MARKER = "?"

WBC_LABEL_MAP = {"2": "benign", "4": "malignant"}
WBC_COLORS = {"benign": "green", "malignant": "red"}


class DatasetError(ValueError):
    """Raised for unreadable files, missing columns, or non-numeric cells."""


@dataclass(frozen=True)
class ClassLabel:
    name: str
    color: str = "gray"

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class NDPoint:
    values: tuple[float, ...]
    id: str | None = None

    def __post_init__(self) -> None:
        vals = tuple(float(v) for v in self.values)
        if len(vals) < 2:
            raise DatasetError("points need dimension >= 2")
        if any(not math.isfinite(v) for v in vals):
            raise DatasetError("point values must be finite")
        object.__setattr__(self, "values", vals)

    @property
    def dim(self) -> int:
        return len(self.values)


@dataclass
class LabeledDataset:
    """Parallel points/labels plus attribute names; read-only after build."""

    points: list[NDPoint]
    labels: list[ClassLabel]
    attribute_names: list[str]

    def __post_init__(self) -> None:
        if len(self.points) != len(self.labels):
            raise DatasetError("points and labels must be the same length")
        dims = {p.dim for p in self.points}
        if len(dims) > 1:
            raise DatasetError(f"mixed point dimensions: {sorted(dims)}")
        if self.points and self.points[0].dim != len(self.attribute_names):
            raise DatasetError("attribute names do not match point dimension")

    def __len__(self) -> int:
        return len(self.points)

    @property
    def classes(self) -> list[ClassLabel]:
        """Distinct labels in order of first appearance."""
        seen: dict[str, ClassLabel] = {}
        for lab in self.labels:
            seen.setdefault(lab.name, lab)
        return list(seen.values())


def class_counts(ds: LabeledDataset) -> dict[str, int]:
    """Cases per class name; values sum to len(ds)."""
    counts: dict[str, int] = {}
    for lab in ds.labels:
        counts[lab.name] = counts.get(lab.name, 0) + 1
    return counts


def load_csv(
    path,
    label_column: str,
    missing_policy: str = "drop_row",
    drop_columns: tuple[str, ...] = (),
    id_column: str | None = None,
    label_map: dict[str, str] | None = None,
    label_colors: dict[str, str] | None = None,
) -> LabeledDataset:
    """Load a header-rowed CSV into a LabeledDataset.

    Rows containing the "?" marker in any kept column are dropped under
    drop_row (the only policy).  `drop_columns` are excluded entirely,
    `id_column` is kept as the point id, `label_map` renames raw label values
    and `label_colors` assigns display colors by final label name.
    """
    if missing_policy != "drop_row":
        raise DatasetError(f"unsupported missing policy {missing_policy!r}")
    try:
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None:
                raise DatasetError("no data rows")
            header = list(reader.fieldnames)
            rows = list(reader)
    except OSError as exc:
        raise DatasetError(f"cannot read {path}: {exc}") from exc
    if not rows:
        raise DatasetError("no data rows")
    if label_column not in header:
        raise DatasetError(f"unknown label column {label_column!r}")
    for col in drop_columns:
        if col not in header:
            raise DatasetError(f"unknown drop column {col!r}")

    skipped = set(drop_columns) | {label_column}
    if id_column is not None:
        if id_column not in header:
            raise DatasetError(f"unknown id column {id_column!r}")
        skipped.add(id_column)
    attr_names = [c for c in header if c not in skipped]
    if len(attr_names) < 2:
        raise DatasetError("need at least two attribute columns")

    colors = label_colors or {}
    points: list[NDPoint] = []
    labels: list[ClassLabel] = []
    for lineno, row in enumerate(rows, start=2):
        cells = [row[c] for c in attr_names] + [row[label_column]]
        if any(c is None for c in cells):
            raise DatasetError(f"short row at line {lineno}")
        if any(c.strip() == MISSING_MARKER for c in cells):
            continue
        values = []
        for name in attr_names:
            cell = row[name].strip()
            try:
                values.append(float(cell))
            except ValueError:
                raise DatasetError(
                    f"non-numeric value {cell!r} in column {name!r} at line {lineno}"
                ) from None
        raw_label = row[label_column].strip()
        name = label_map.get(raw_label, raw_label) if label_map else raw_label
        rid = row[id_column].strip() if id_column else str(lineno - 2)
        points.append(NDPoint(values=tuple(values), id=rid))
        labels.append(ClassLabel(name=name, color=colors.get(name, "gray")))
    if not points:
        raise DatasetError("no data rows")
    return LabeledDataset(points=points, labels=labels, attribute_names=attr_names)


def wbc_path() -> str:
    """Filesystem path of the bundled Wisconsin Breast Cancer CSV."""
    return str(resources.files("inline2d").joinpath("data/wbc.csv"))


def load_wbc(path=None) -> LabeledDataset:
    """The 683 complete WBC cases: 9 cytology attributes in UCI file order,
    labels 2/4 mapped to benign (green) / malignant (red)."""
    return load_csv(
        path or wbc_path(),
        label_column="class",
        label_map=WBC_LABEL_MAP,
        label_colors=WBC_COLORS,
    )
