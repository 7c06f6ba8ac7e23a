import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from slapmap.errors import InvalidArity, OutOfRange
from slapmap.lorenz import (
    centrally_symmetric_map,
    m_of_polygon,
    m_of_slope,
    predicted_mixing_components,
    renormalization_tower,
)
from slapmap.pwamap import RIGHT, iterate

R5 = math.sqrt(5.0)


def band(a, m):
    return 2 ** (2 ** (-m - 1)) < a <= 2 ** (2 ** (-m))


@pytest.mark.parametrize("a,m", [(2.0, 0), (R5 - 1, 1), (1.2, 1), (math.sqrt(2), 1), (1.15, 2)])
def test_m_of_slope(a, m):
    assert m_of_slope(a) == m


@pytest.mark.parametrize("a", [1.0, 0.5, 2.0001])
def test_slope_out_of_range(a):
    with pytest.raises(OutOfRange):
        m_of_slope(a)


@pytest.mark.parametrize("d,m", [(3, 0), (5, 1), (7, 2), (9, 3)])
def test_m_of_polygon(d, m):
    assert m_of_polygon(d) == m


def test_m_of_polygon_nine_closed_form():
    value = -math.log2(-math.log2(math.cos(math.pi / 9)))
    assert value == pytest.approx(3.479, abs=1e-3)


@pytest.mark.parametrize("d", [4, 1, 2])
def test_m_of_polygon_arity(d):
    with pytest.raises(InvalidArity):
        m_of_polygon(d)


def test_m_polygon_agrees_with_slope():
    for d in range(3, 100, 2):
        assert m_of_polygon(d) == m_of_slope(1 / math.cos(math.pi / d))


@pytest.mark.parametrize("a,k", [(2.0, 1), (R5 - 1, 2), (1 / math.cos(math.pi / 7), 4)])
def test_predicted_mixing(a, k):
    assert predicted_mixing_components(a) == k


def test_pentagon_tower():
    t = renormalization_tower(R5 - 1)
    assert t.m == 1
    lo, hi = t.intervals[1]
    assert lo == pytest.approx((3 - R5) / 2, abs=1e-12)
    assert hi == pytest.approx((R5 - 1) / 2, abs=1e-12)


def test_trivial_tower():
    t = renormalization_tower(2.0)
    assert t.m == 0 and t.intervals == ((0.0, 1.0),)
    assert t.to_dict() == {"a": 2.0, "m": 0, "intervals": [[0.0, 1.0]]}


def test_heptagon_tower_invariance_by_iteration():
    a = 1 / math.cos(math.pi / 7)
    t = renormalization_tower(a)
    assert len(t.intervals) == 3
    f = centrally_symmetric_map(a)
    for k, (lo, hi) in enumerate(t.intervals):
        assert (lo + hi) / 2 == pytest.approx(0.5, abs=1e-12)
        for i in range(1000):
            x = lo + (hi - lo) * (i + 0.5) / 1000
            y = iterate(f, x, RIGHT, 2**k).points[-1]
            assert lo - 1e-10 <= y <= hi + 1e-10


def test_nested():
    t = renormalization_tower(1.05)
    for (a0, b0), (a1, b1) in zip(t.intervals, t.intervals[1:]):
        assert a0 < a1 < 0.5 < b1 < b0


@settings(max_examples=200, deadline=None)
@given(st.floats(1.0 + 1e-6, 2.0))
def test_band_property(a):
    assert band(a, m_of_slope(a))


@settings(max_examples=60, deadline=None)
@given(st.floats(1.01, 2.0))
def test_tower_validates(a):
    # validate=True checks invariance, the Lorenz shape and slope a**(2**k) at every level
    t = renormalization_tower(a)
    assert len(t.intervals) == t.m + 1
    for lo, hi in t.intervals:
        assert (lo + hi) / 2 == pytest.approx(0.5, abs=1e-12)
