import math

import pytest

from inline2d.dataset import (
    ClassLabel,
    DatasetError,
    LabeledDataset,
    NDPoint,
    class_counts,
    load_csv,
    load_wbc,
)


def write(tmp_path, text, name="data.csv"):
    path = tmp_path / name
    path.write_text(text)
    return path


def test_wbc_counts(wbc):
    assert len(wbc) == 683
    assert class_counts(wbc) == {"benign": 444, "malignant": 239}
    assert wbc.attribute_names[0] == "clump_thickness"
    assert len(wbc.attribute_names) == 9


def test_wbc_colors(wbc):
    colors = {lab.name: lab.color for lab in wbc.classes}
    assert colors == {"benign": "green", "malignant": "red"}


def test_wbc_values_finite_and_integral(wbc):
    for p in wbc.points:
        assert all(math.isfinite(v) for v in p.values)
        assert all(1 <= v <= 10 for v in p.values)


def test_missing_rows_dropped(tmp_path):
    path = write(tmp_path, "a,b,class\n1,2,x\n3,?,y\n5,6,x\n")
    ds = load_csv(path, label_column="class")
    assert len(ds) == 2
    assert [p.values for p in ds.points] == [(1.0, 2.0), (5.0, 6.0)]


def test_empty_file_errors(tmp_path):
    path = write(tmp_path, "")
    with pytest.raises(DatasetError, match="no data rows"):
        load_csv(path, label_column="class")
    header_only = write(tmp_path, "a,b,class\n", name="h.csv")
    with pytest.raises(DatasetError, match="no data rows"):
        load_csv(header_only, label_column="class")


def test_unknown_label_column(tmp_path):
    path = write(tmp_path, "a,b,class\n1,2,x\n")
    with pytest.raises(DatasetError, match="unknown label column"):
        load_csv(path, label_column="wrong")


def test_non_numeric_cell(tmp_path):
    path = write(tmp_path, "a,b,class\n1,oops,x\n")
    with pytest.raises(DatasetError, match="non-numeric"):
        load_csv(path, label_column="class")


def test_unreadable_file(tmp_path):
    with pytest.raises(DatasetError, match="cannot read"):
        load_csv(tmp_path / "missing.csv", label_column="class")


def test_id_and_drop_columns(tmp_path):
    path = write(tmp_path, "rid,a,b,junk,class\nr1,1,2,9,x\nr2,3,4,9,y\n")
    ds = load_csv(path, label_column="class", id_column="rid", drop_columns=("junk",))
    assert ds.attribute_names == ["a", "b"]
    assert [p.id for p in ds.points] == ["r1", "r2"]


def test_label_map_and_colors(tmp_path):
    path = write(tmp_path, "a,b,class\n1,2,2\n3,4,4\n")
    ds = load_csv(
        path,
        label_column="class",
        label_map={"2": "neg", "4": "pos"},
        label_colors={"neg": "green", "pos": "red"},
    )
    assert [l.name for l in ds.labels] == ["neg", "pos"]
    assert ds.labels[0].color == "green"


def test_class_counts_totals(tmp_path):
    path = write(tmp_path, "a,b,class\n" + "".join(f"{i},{i},{'x' if i % 3 else 'y'}\n" for i in range(12)))
    ds = load_csv(path, label_column="class")
    counts = class_counts(ds)
    assert sum(counts.values()) == len(ds)


def test_class_counts_trivia():
    empty = LabeledDataset(points=[], labels=[], attribute_names=["a", "b"])
    assert class_counts(empty) == {}
    single = LabeledDataset(
        points=[NDPoint(values=(1.0, 2.0)) for _ in range(5)],
        labels=[ClassLabel(name="only") for _ in range(5)],
        attribute_names=["a", "b"],
    )
    assert class_counts(single) == {"only": 5}


def test_dataset_invariants():
    with pytest.raises(DatasetError):
        LabeledDataset(points=[NDPoint(values=(1, 2))], labels=[], attribute_names=["a", "b"])
    with pytest.raises(DatasetError):
        NDPoint(values=(1.0,))
    with pytest.raises(DatasetError):
        NDPoint(values=(1.0, float("inf")))


def test_load_wbc_matches_packaged_file(wbc):
    again = load_wbc()
    assert len(again) == len(wbc)
    assert again.points[0].values == wbc.points[0].values
