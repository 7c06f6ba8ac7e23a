import math

import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from slapmap.errors import InvalidAngles
from slapmap.ergodic import analyze
from slapmap.geometry import extract_slap_map
from slapmap.triangles import (
    TriangleSpec,
    check_second_iterate_invariance,
    classify,
    predict_triangle,
    right_triangle_markov,
    triangle_from_angles,
    triangle_spec,
)

PI = math.pi


def interior_angles(P):
    out = []
    for i in range(3):
        a, b, c = P.vertices[i - 1], P.vertices[i], P.vertices[(i + 1) % 3]
        u = (a.x - b.x, a.y - b.y)
        v = (c.x - b.x, c.y - b.y)
        out.append(math.acos((u[0] * v[0] + u[1] * v[1]) / (math.hypot(*u) * math.hypot(*v))))
    return out


def test_equilateral():
    P = triangle_from_angles(PI / 3, PI / 3, 1.0)
    assert all(s == pytest.approx(1.0) for s in P.side_lengths)


def test_right_isosceles():
    P = triangle_from_angles(PI / 2, PI / 4, 1.0)
    assert P.side_lengths[0] == pytest.approx(1.0)
    assert sorted(P.side_lengths[1:]) == pytest.approx([math.sqrt(0.5)] * 2)


@pytest.mark.parametrize("a1,a2", [(2, 2), (0, 1), (-0.1, 1.0), (PI, 0.1)])
def test_invalid(a1, a2):
    with pytest.raises(InvalidAngles):
        triangle_from_angles(a1, a2, 1.0)


def test_spec_validation():
    with pytest.raises(InvalidAngles):
        TriangleSpec((1.0, 1.0, 1.0))


@pytest.mark.parametrize(
    "angles,kind",
    [((PI / 3, PI / 3), "acute"), ((PI / 2, PI / 5), "right"), ((1.8, 0.5), "obtuse"), ((0.4, 0.5), "obtuse")],
)
def test_classify(angles, kind):
    assert classify(triangle_spec(*angles)) == kind


def test_predictions():
    assert predict_triangle(triangle_spec(1.1, 1.0)).mixing == "mixing"
    assert predict_triangle(triangle_spec(PI / 2, 0.6)).period_ok(2)
    obtuse = predict_triangle(triangle_spec(1.9, 0.6))
    assert obtuse.period_ok(4) and not obtuse.period_ok(3) and not obtuse.period_ok(1)


@pytest.mark.parametrize("a1,a2", [(PI / 2, PI / 3), (1.8, 0.7)])
def test_second_iterate_invariance(a1, a2):
    assert check_second_iterate_invariance(triangle_from_angles(a1, a2))


def test_invariance_not_for_acute():
    with pytest.raises(ValueError):
        check_second_iterate_invariance(triangle_from_angles(1.1, 1.0))


def test_right_triangle_markov():
    assert right_triangle_markov(triangle_from_angles(PI / 2, PI / 3))
    assert right_triangle_markov(triangle_from_angles(PI / 2, 0.6))


@pytest.mark.parametrize("a1,a2,period", [(1.1, 1.0, 1), (PI / 2, 0.6, 2)])
def test_ulam(a1, a2, period):
    P = triangle_from_angles(a1, a2)
    rep = analyze(extract_slap_map(P), int(3000 * P.perimeter))
    assert rep.count == 1 and rep.periods == [period]


def test_obtuse_even_period():
    P = triangle_from_angles(1.9, 0.6)
    rep = analyze(extract_slap_map(P), int(3000 * P.perimeter))
    assert rep.count == 1 and rep.periods[0] % 2 == 0


@settings(max_examples=100, deadline=None)
@given(st.floats(0.05, PI - 0.1), st.floats(0.05, PI - 0.1), st.floats(0.1, 10))
def test_construction_properties(a1, a2, scale):
    assume(a1 + a2 < PI - 0.05)
    P = triangle_from_angles(a1, a2, scale)
    assert P.side_lengths[0] == pytest.approx(scale)
    assert P.side_lengths[0] >= max(P.side_lengths) * (1 - 1e-12)
    got = sorted(interior_angles(P))
    assert got == pytest.approx(sorted([a1, a2, PI - a1 - a2]), abs=1e-9)


@settings(max_examples=40, deadline=None)
@given(st.floats(PI / 2 + 0.05, PI - 0.2), st.floats(0.05, 0.95))
def test_invariance_property(big, share):
    rest = PI - big
    P = triangle_from_angles(big, rest * share)
    assert check_second_iterate_invariance(P)
