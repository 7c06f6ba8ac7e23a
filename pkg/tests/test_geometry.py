import json
import math

import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from conftest import convex_polygons
from slapmap.errors import AtVertex, Degenerate, InvalidArity, NotExpanding, OutOfFamily, SelfIntersecting, VertexHit
from slapmap.geometry import (
    KITE_LABELS,
    BoundaryPoint,
    build_polygon,
    extract_slap_map,
    has_parallel_facing,
    kite_half_perimeter,
    kite_polygon,
    load_polygon,
    polygon_report,
    regular_polygon,
    slap_project,
    slope_law,
)

SQ3 = math.sqrt(3.0)
TRI = [(0, 0), (1, 0), (0.5, SQ3 / 2)]
SQUARE = [(0, 0), (1, 0), (1, 1), (0, 1)]


def test_square_ccw():
    P = build_polygon(SQUARE)
    assert P.perimeter == 4.0
    assert [tuple(v) for v in P.vertices] == [(0, 0), (1, 0), (1, 1), (0, 1)]


def test_clockwise_square_reversed_keeping_origin():
    P = build_polygon(list(reversed(SQUARE)))
    assert P.perimeter == 4.0
    assert tuple(P.vertices[0]) == (0, 1)
    # counterclockwise after normalisation: positive signed area
    area = sum(a.x * b.y - b.x * a.y for a, b in zip(P.vertices, P.vertices[1:] + P.vertices[:1]))
    assert area > 0


def test_bow_tie_rejected():
    with pytest.raises(SelfIntersecting):
        build_polygon([(0, 0), (1, 1), (1, 0), (0, 1)])


@pytest.mark.parametrize(
    "verts",
    [
        [(0, 0), (0, 0), (1, 0), (0, 1)],
        [(0, 0), (1, 0), (2, 0), (0, 1)],
    ],
)
def test_degenerate(verts):
    with pytest.raises(Degenerate):
        build_polygon(verts)


def test_too_few_vertices():
    with pytest.raises(ValueError):
        build_polygon([(0, 0), (1, 0)])


@pytest.mark.parametrize("d", [3, 4, 5, 9])
def test_regular_perimeter(d):
    P = regular_polygon(d)
    assert P.perimeter == pytest.approx(d, abs=1e-12)
    assert all(s == pytest.approx(1.0, abs=1e-12) for s in P.side_lengths)


def test_regular_needs_three_sides():
    with pytest.raises(InvalidArity):
        regular_polygon(2)


def test_arclength_table():
    P = build_polygon(TRI)
    assert P.cumulative_arclength[0] == 0.0
    assert P.cumulative_arclength[-1] == P.perimeter
    assert P.perimeter == sum(P.side_lengths)
    assert all(a < b for a, b in zip(P.cumulative_arclength, P.cumulative_arclength[1:]))


def test_kite_half_perimeter():
    # (sin 1 + sin 0.5) / sin 1.5
    expected = (math.sin(1.0) + math.sin(0.5)) / math.sin(1.5)
    assert expected == pytest.approx(1.324214, abs=1e-6)
    P = kite_polygon(1.0, 0.5)
    assert P.perimeter / 2 == pytest.approx(expected, abs=1e-12)
    assert kite_half_perimeter(1.0, 0.5) == pytest.approx(expected, abs=1e-15)


def test_kite_mirror_symmetry():
    P = kite_polygon(1.021264, 0.520719)
    xs = sorted(round(v.x, 12) for v in P.vertices)
    ys = sorted(round(v.y, 12) for v in P.vertices)
    assert ys[0] == -ys[-1]
    assert xs[0] == 0.0 and max(xs) == 1.0
    # mirror edges have the same length
    L = P.side_lengths
    assert L[0] == pytest.approx(L[3]) and L[1] == pytest.approx(L[2])


@pytest.mark.parametrize("ab", [(0.7, 0.9), (0.7, 0.5), (1.2, 0.5), (1.0, 0.0)])
def test_kite_out_of_family(ab):
    with pytest.raises(OutOfFamily):
        kite_polygon(*ab)


def test_slap_project_triangle():
    P = build_polygon(TRI)
    q = slap_project(P, BoundaryPoint(0.25, 0))
    assert q.s == pytest.approx(2.5, abs=1e-12)
    assert q.side == 2
    with pytest.raises(VertexHit):
        slap_project(P, 0.5)
    with pytest.raises(AtVertex):
        slap_project(P, 1.0)


def test_slap_project_square_opposite_midpoint():
    P = build_polygon(SQUARE)
    assert slap_project(P, 0.5).s == pytest.approx(2.5, abs=1e-12)


def test_parallel_facing():
    assert has_parallel_facing(build_polygon(SQUARE))
    assert not has_parallel_facing(build_polygon(TRI))
    assert has_parallel_facing(regular_polygon(6))
    assert not has_parallel_facing(regular_polygon(5))


def test_extract_triangle_six_branches():
    f = extract_slap_map(build_polygon(TRI))
    assert len(f.branches) == 6
    assert all(b.slope == pytest.approx(-2.0, abs=1e-12) for b in f.branches)


def test_square_not_expanding():
    with pytest.raises(NotExpanding):
        extract_slap_map(build_polygon(SQUARE))


def test_kite_slope_side0_to_label2(kite_root):
    a, b = kite_root.alpha, kite_root.beta
    P = kite_polygon(a, b)
    f = extract_slap_map(P)
    target = KITE_LABELS.index(2)
    slopes = [abs(br.slope) for br in f.branches if br.tag == (0, target)]
    assert slopes and all(s == pytest.approx(1 / math.cos(2 * b), abs=1e-10) for s in slopes)


def test_polygon_file_roundtrip(tmp_path):
    path = tmp_path / "tri.json"
    path.write_text(json.dumps({"vertices": [list(v) for v in TRI]}))
    P = load_polygon(path)
    rep = polygon_report(P)
    assert rep["perimeter"] == pytest.approx(3.0)
    assert rep["parallel_facing"] is False
    assert len(rep["side_lengths"]) == 3


@settings(max_examples=60, deadline=None)
@given(convex_polygons(), st.floats(0.0, 1.0))
def test_extracted_map_matches_ray_casting(P, u):
    assume(P is not None and not has_parallel_facing(P))
    f = extract_slap_map(P)
    s = u * P.perimeter
    assume(f.nearest_endpoint(s)[1] > 1e-6 * P.perimeter)
    try:
        direct = slap_project(P, s).s
    except VertexHit:
        assume(False)
    got = f.value(s)
    diff = min(abs(got - direct), P.perimeter - abs(got - direct))
    assert diff <= 1e-10 * P.perimeter


@settings(max_examples=60, deadline=None)
@given(convex_polygons())
def test_slope_law(P):
    assume(P is not None and not has_parallel_facing(P))
    f = extract_slap_map(P)
    for br in f.branches:
        i, j = br.tag
        assert abs(br.slope) == pytest.approx(slope_law(P, i, j), rel=1e-10)
        assert abs(br.slope) > 1.0


@settings(max_examples=40, deadline=None)
@given(convex_polygons())
def test_branches_tile_boundary(P):
    assume(P is not None and not has_parallel_facing(P))
    f = extract_slap_map(P)
    assert f.branches[0].lo == 0.0 and f.branches[-1].hi == pytest.approx(P.perimeter)
    for a, b in zip(f.branches, f.branches[1:]):
        assert a.hi == b.lo
    # every vertex is a branch endpoint
    for s in P.cumulative_arclength:
        assert f.nearest_endpoint(s)[1] < 1e-12
