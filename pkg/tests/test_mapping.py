import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from inline2d.mapping import (
    MappingError,
    MappingMode,
    PolylineGraph,
    arc_heights,
    decode,
    encode,
    evenly_spaced_offsets,
)

PAIRED_MODES = [
    MappingMode.static(),
    MappingMode.partial_dynamic(),
    MappingMode.full_dynamic(),
]

POINT_7D = (1, 2, 3, 5, 3, 4, 2)


def test_partial_dynamic_7d_example():
    g = encode(POINT_7D, MappingMode.partial_dynamic())
    assert g.nodes == ((1, 2), (4, 5), (7, 4), (9, 0))
    assert g.padded
    assert g.source_dim == 7


def test_full_dynamic_7d_example():
    g = encode(POINT_7D, MappingMode.full_dynamic())
    assert g.nodes == ((1, 2), (4, 7), (7, 11), (9, 11))
    assert g.padded


def test_node_count_is_half_dimension_rounded_up():
    g = encode(POINT_7D, MappingMode.partial_dynamic())
    assert len(g.nodes) == 4  # 4 nodes, 3 edges for a 7-D point


def test_unit_weights_reduce_to_full_dynamic():
    rng = random.Random(7)
    for _ in range(50):
        n = rng.randint(2, 12)
        vals = tuple(rng.randint(0, 10) for _ in range(n))
        gw = encode(vals, MappingMode.weighted((1.0,) * n))
        gf = encode(vals, MappingMode.full_dynamic())
        assert gw.nodes == gf.nodes
        assert gw.padded == gf.padded


def test_decode_partial_dynamic_example():
    g = PolylineGraph(nodes=((1, 2), (4, 5), (7, 4), (9, 0)), padded=True, source_dim=7)
    assert decode(g, MappingMode.partial_dynamic()) == (1, 2, 3, 5, 3, 4, 2)


def test_decode_single_node_full_dynamic():
    g = PolylineGraph(nodes=((3.5, 4.25),), padded=False, source_dim=2)
    assert decode(g, MappingMode.full_dynamic()) == (3.5, 4.25)


def test_roundtrip_random_points_all_paired_modes():
    rng = random.Random(42)
    for mode in PAIRED_MODES:
        for _ in range(200):
            n = rng.randint(2, 12)
            vals = tuple(float(rng.randint(0, 20)) for _ in range(n))
            assert decode(encode(vals, mode), mode) == vals


def test_roundtrip_weighted_dyadic_weights():
    rng = random.Random(43)
    for _ in range(200):
        n = rng.randint(2, 12)
        vals = tuple(float(rng.randint(0, 20)) for _ in range(n))
        weights = tuple(rng.choice([0.5, 1.0, 2.0, 4.0]) for _ in range(n))
        mode = MappingMode.weighted(weights)
        assert decode(encode(vals, mode), mode) == vals


@settings(max_examples=150, deadline=None)
@given(
    st.lists(st.integers(min_value=0, max_value=50), min_size=2, max_size=12),
    st.sampled_from(["ilc2_static", "ilc2_partial_dynamic", "ilc2_full_dynamic"]),
)
def test_roundtrip_property(values, kind):
    mode = MappingMode(kind=kind)
    vals = tuple(float(v) for v in values)
    assert decode(encode(vals, mode), mode) == vals


def test_monotone_baseline_for_nonnegative_inputs():
    rng = random.Random(1)
    for mode in (MappingMode.partial_dynamic(), MappingMode.full_dynamic()):
        for _ in range(50):
            vals = tuple(rng.uniform(0, 10) for _ in range(rng.randint(2, 10)))
            xs = [nx for nx, _ in encode(vals, mode).nodes]
            assert all(a <= b for a, b in zip(xs, xs[1:]))


def test_translation_covariance_partial_dynamic():
    base = (2.0, 3.0, 1.0, 5.0, 4.0, 2.0)
    shifted = (base[0] + 2.5,) + base[1:]
    g0 = encode(base, MappingMode.partial_dynamic())
    g1 = encode(shifted, MappingMode.partial_dynamic())
    for (x0, y0), (x1, y1) in zip(g0.nodes, g1.nodes):
        assert x1 == x0 + 2.5
        assert y1 == y0


def test_pure_modes_encode_and_decode():
    vals = (3.0, 1.0, 4.0)
    seq = MappingMode.sequential(evenly_spaced_offsets(3, 10.0))
    g = encode(vals, seq)
    assert g.nodes == ((3.0, 0.0), (11.0, 0.0), (24.0, 0.0))
    assert decode(g, seq) == vals

    col = MappingMode.collocated()
    g2 = encode(vals, col)
    assert g2.nodes == ((3.0, 0.0), (1.0, 0.0), (4.0, 0.0))
    assert decode(g2, col) == vals

    gen = MappingMode.generic((0.0, 5.0, 5.0))
    g3 = encode(vals, gen)
    assert g3.nodes == ((3.0, 0.0), (6.0, 0.0), (9.0, 0.0))
    assert decode(g3, gen) == vals


def test_arc_heights_examples():
    assert arc_heights((1, 2, 3, 5, 3)) == (1, 1, 2, 2)
    assert arc_heights((4, 4, 4)) == (0, 0)
    assert arc_heights((0, 10)) == (10,)


def test_dimension_and_parameter_errors():
    with pytest.raises(MappingError):
        encode((1,), MappingMode.partial_dynamic())
    with pytest.raises(MappingError):
        encode((1, 2, 3), MappingMode.weighted((1.0, 2.0)))
    with pytest.raises(MappingError):
        encode((1, 2, 3), MappingMode.sequential((0.0, 1.0)))
    with pytest.raises(MappingError):
        encode((1, float("nan")), MappingMode.static())
    g = encode((1, 2), MappingMode.weighted((1.0, 0.0)))
    # re-decode with a zero weight must fail
    with pytest.raises(MappingError):
        decode(g, MappingMode.weighted((1.0, 0.0)))


def test_decode_node_count_mismatch():
    g = PolylineGraph(nodes=((1, 2), (3, 4)), padded=False, source_dim=6)
    with pytest.raises(MappingError):
        decode(g, MappingMode.full_dynamic())
