"""Polygons, inward-normal projection and the slap map as an interval map.

The boundary of a polygon is parametrised by arc length starting at the
first input vertex and running counterclockwise.  Side ``i`` joins vertex
``i`` to vertex ``i + 1`` and covers ``[S_i, S_{i+1}]`` where ``S`` is the
cumulative arc-length table.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .errors import (
    AtVertex,
    Degenerate,
    InvalidArity,
    NotExpanding,
    OutOfFamily,
    SelfIntersecting,
    VertexHit,
)
from .pwamap import AffineBranch, PiecewiseAffineMap

VERTEX_TOL = 1e-9  # relative to the perimeter
RAY_EPS = 1e-12  # ignore hits this close to the source point
PARALLEL_TOL = 1e-10


class Point2(NamedTuple):
    x: float
    y: float


class BoundaryPoint(NamedTuple):
    s: float
    side: int


def _cross(ax, ay, bx, by):
    return ax * by - ay * bx


@dataclass(frozen=True, eq=False)
class Polygon:
    vertices: tuple[Point2, ...]
    side_lengths: tuple[float, ...]
    cumulative_arclength: tuple[float, ...]
    perimeter: float

    @property
    def d(self) -> int:
        return len(self.vertices)

    def direction(self, i: int) -> tuple[float, float]:
        """Unit direction of side i."""
        a, b = self.vertices[i], self.vertices[(i + 1) % self.d]
        length = self.side_lengths[i]
        return ((b.x - a.x) / length, (b.y - a.y) / length)

    def normal(self, i: int) -> tuple[float, float]:
        """Inward unit normal of side i (left of the direction, CCW polygon)."""
        ux, uy = self.direction(i)
        return (-uy, ux)

    def side_of(self, s: float) -> int:
        S = self.cumulative_arclength
        s = s % self.perimeter
        i = int(np.searchsorted(S, s, side="right")) - 1
        return min(max(i, 0), self.d - 1)

    def point_at(self, s: float) -> Point2:
        i = self.side_of(s)
        t = (s % self.perimeter) - self.cumulative_arclength[i]
        ux, uy = self.direction(i)
        v = self.vertices[i]
        return Point2(v.x + t * ux, v.y + t * uy)

    def boundary_point(self, s: float) -> BoundaryPoint:
        """Boundary point at arc length s; raises AtVertex at a vertex."""
        s = s % self.perimeter
        tol = VERTEX_TOL * self.perimeter
        S = self.cumulative_arclength
        for v in S:
            if abs(s - v) <= tol:
                raise AtVertex(f"s={s} is a vertex")
        return BoundaryPoint(s, self.side_of(s))

    def to_dict(self) -> dict:
        return {"vertices": [[v.x, v.y] for v in self.vertices]}


def build_polygon(vertices: Sequence[Sequence[float]]) -> Polygon:
    """Validate a vertex list and normalise it to counterclockwise order.

    The first input vertex stays first (it is the arc-length origin).
    """
    pts = [Point2(float(v[0]), float(v[1])) for v in vertices]
    d = len(pts)
    if d < 3:
        raise InvalidArity(f"a polygon needs at least 3 vertices, got {d}")
    if not all(math.isfinite(c) for p in pts for c in p):
        raise Degenerate("non-finite coordinate")
    for k in range(d):
        a, b = pts[k], pts[(k + 1) % d]
        if a == b:
            raise Degenerate(f"vertices {k} and {(k + 1) % d} coincide")

    area2 = sum(_cross(pts[k].x, pts[k].y, pts[(k + 1) % d].x, pts[(k + 1) % d].y) for k in range(d))
    if area2 < 0:
        pts = [pts[0]] + pts[:0:-1]

    for k in range(d):
        p, q, r = pts[k - 1], pts[k], pts[(k + 1) % d]
        ax, ay, bx, by = q.x - p.x, q.y - p.y, r.x - q.x, r.y - q.y
        if abs(_cross(ax, ay, bx, by)) <= 1e-12 * math.hypot(ax, ay) * math.hypot(bx, by):
            raise Degenerate(f"vertices around {k} are collinear")

    for i in range(d):
        for j in range(i + 1, d):
            if j == i + 1 or (i == 0 and j == d - 1):
                continue
            if _segments_intersect(pts[i], pts[(i + 1) % d], pts[j], pts[(j + 1) % d]):
                raise SelfIntersecting(f"edges {i} and {j} intersect")

    lengths = [math.hypot(pts[(k + 1) % d].x - pts[k].x, pts[(k + 1) % d].y - pts[k].y) for k in range(d)]
    cum = [0.0]
    for length in lengths:
        cum.append(cum[-1] + length)
    return Polygon(tuple(pts), tuple(lengths), tuple(cum), cum[-1])


def _orient(p, q, r):
    return _cross(q.x - p.x, q.y - p.y, r.x - p.x, r.y - p.y)


def _segments_intersect(a, b, c, d) -> bool:
    scale = max(abs(v) for p in (a, b, c, d) for v in p) or 1.0
    eps = 1e-12 * scale * scale
    o1, o2 = _orient(a, b, c), _orient(a, b, d)
    o3, o4 = _orient(c, d, a), _orient(c, d, b)

    def on_seg(p, q, r):
        return min(p.x, q.x) - 1e-12 * scale <= r.x <= max(p.x, q.x) + 1e-12 * scale and (
            min(p.y, q.y) - 1e-12 * scale <= r.y <= max(p.y, q.y) + 1e-12 * scale
        )

    if ((o1 > eps and o2 < -eps) or (o1 < -eps and o2 > eps)) and (
        (o3 > eps and o4 < -eps) or (o3 < -eps and o4 > eps)
    ):
        return True
    if abs(o1) <= eps and on_seg(a, b, c):
        return True
    if abs(o2) <= eps and on_seg(a, b, d):
        return True
    if abs(o3) <= eps and on_seg(c, d, a):
        return True
    if abs(o4) <= eps and on_seg(c, d, b):
        return True
    return False


def regular_polygon(d: int) -> Polygon:
    """Regular d-gon with unit sides; side 0 runs along the x axis from the origin."""
    if d < 3:
        raise InvalidArity(f"d must be >= 3, got {d}")
    pts = [(0.0, 0.0)]
    for k in range(d - 1):
        x, y = pts[-1]
        pts.append((x + math.cos(2 * math.pi * k / d), y + math.sin(2 * math.pi * k / d)))
    return build_polygon(pts)


# geometric side index -> edge label of the kite family (mirror pairs share parity)
KITE_LABELS = (0, 1, 3, 2)


def kite_half_perimeter(alpha: float, beta: float) -> float:
    return (math.sin(alpha) + math.sin(beta)) / math.sin(alpha + beta)


def check_kite_family(alpha: float, beta: float) -> None:
    if not (0.0 < beta < math.pi / 4 < alpha and alpha + beta < math.pi / 2):
        raise OutOfFamily(f"(alpha, beta) = ({alpha}, {beta}) violates 0 < beta < pi/4 < alpha, alpha + beta < pi/2")


def kite_polygon(alpha: float, beta: float) -> Polygon:
    """Kite with unit symmetry diagonal from B = (0, 0) to A = (1, 0).

    ``alpha`` and ``beta`` are the half-angles at A and B.  The boundary runs
    B -> C -> A -> C' with C below the diagonal, so arc length 0 is B, the
    vertex C sits at ``c = sin(alpha) / sin(alpha + beta)`` and the mirror
    reflection acts as ``s -> 2 * ell - s``.  Edge labels are ``KITE_LABELS``.
    """
    check_kite_family(alpha, beta)
    c = math.sin(alpha) / math.sin(alpha + beta)
    C = (c * math.cos(beta), -c * math.sin(beta))
    C2 = (c * math.cos(beta), c * math.sin(beta))
    return build_polygon([(0.0, 0.0), C, (1.0, 0.0), C2])


# --- projection -------------------------------------------------------------


def _cast(P: Polygon, i: int, t: float):
    """First boundary hit of the inward normal ray from local position t on side i.

    Returns (j, tau, lam): target side, local position on it, ray parameter.
    """
    ux, uy = P.direction(i)
    nx, ny = -uy, ux
    v = P.vertices[i]
    qx, qy = v.x + t * ux, v.y + t * uy
    L = P.perimeter
    best = None
    for j in range(P.d):
        if j == i:
            continue
        wx, wy = P.direction(j)
        det = _cross(nx, ny, wx, wy)
        if abs(det) < 1e-15:
            continue
        rx, ry = P.vertices[j].x - qx, P.vertices[j].y - qy
        lam = _cross(rx, ry, wx, wy) / det
        tau = _cross(rx, ry, nx, ny) / det
        if lam <= RAY_EPS * L:
            continue
        if -1e-12 * L <= tau <= P.side_lengths[j] + 1e-12 * L:
            if best is None or lam < best[2]:
                best = (j, tau, lam)
    if best is None:
        raise RuntimeError(f"normal ray from side {i} at t={t} never hits the boundary")
    return best


def slap_project(P: Polygon, p: BoundaryPoint | float) -> BoundaryPoint:
    """Image of a boundary point under the slap map."""
    if not isinstance(p, BoundaryPoint):
        p = P.boundary_point(p)
    else:
        P.boundary_point(p.s)
    i = p.side
    t = p.s - P.cumulative_arclength[i]
    j, tau, _ = _cast(P, i, t)
    tol = VERTEX_TOL * P.perimeter
    if tau <= tol or tau >= P.side_lengths[j] - tol:
        raise VertexHit(f"normal ray from s={p.s} hits a vertex of side {j}")
    return BoundaryPoint(P.cumulative_arclength[j] + tau, j)


def _side_pieces(P: Polygon, i: int) -> list[tuple[float, float, int]]:
    """Split side i into local intervals (t0, t1) with a constant first-hit side j."""
    ux, uy = P.direction(i)
    nx, ny = -uy, ux
    v = P.vertices[i]
    length = P.side_lengths[i]
    eps = 1e-12 * P.perimeter
    crit = []
    for k, w in enumerate(P.vertices):
        if k in (i, (i + 1) % P.d):
            continue
        rx, ry = w.x - v.x, w.y - v.y
        if rx * nx + ry * ny <= eps:
            continue
        t = rx * ux + ry * uy
        if eps < t < length - eps:
            crit.append(t)
    ts = [0.0] + sorted(crit) + [length]
    pieces = []
    for t0, t1 in zip(ts, ts[1:]):
        if t1 - t0 <= eps:
            continue
        j = _cast(P, i, 0.5 * (t0 + t1))[0]
        if pieces and pieces[-1][2] == j:
            pieces[-1] = (pieces[-1][0], t1, j)
        else:
            pieces.append((t0, t1, j))
    # absorb slivers dropped above into their neighbour
    fixed = []
    for k, (t0, t1, j) in enumerate(pieces):
        t0 = 0.0 if k == 0 else fixed[-1][1]
        fixed.append((t0, t1, j))
    fixed[-1] = (fixed[-1][0], length, fixed[-1][2])
    return fixed


def has_parallel_facing(P: Polygon) -> bool:
    """True iff some normal segment joins two parallel sides with no other boundary crossing."""
    for i in range(P.d):
        ux, uy = P.direction(i)
        for _, _, j in _side_pieces(P, i):
            wx, wy = P.direction(j)
            if abs(_cross(ux, uy, wx, wy)) < PARALLEL_TOL:
                return True
    return False


def extract_slap_map(P: Polygon) -> PiecewiseAffineMap:
    """The slap map of P as an exact piecewise affine map on [0, perimeter].

    Each branch carries ``tag = (source_side, target_side)``.
    """
    if has_parallel_facing(P):
        raise NotExpanding("polygon has parallel sides facing each other")
    S = P.cumulative_arclength
    branches = []
    for i in range(P.d):
        ux, uy = P.direction(i)
        v = P.vertices[i]
        pieces = _side_pieces(P, i)
        for k, (t0, t1, j) in enumerate(pieces):
            wx, wy = P.direction(j)
            w = P.vertices[j]
            dot = ux * wx + uy * wy
            slope = 1.0 / dot
            offset = (w.x - v.x) * ux + (w.y - v.y) * uy
            intercept = S[j] - (S[i] + offset) * slope
            lo = S[i] if k == 0 else S[i] + t0
            hi = S[i + 1] if k == len(pieces) - 1 else S[i] + t1
            branches.append(AffineBranch(lo, hi, slope, intercept, tag=(i, j)))
    return PiecewiseAffineMap(0.0, P.perimeter, tuple(branches))


def slope_law(P: Polygon, i: int, j: int) -> float:
    """1 / cos(theta_ij) for the angle between the lines of sides i and j."""
    ux, uy = P.direction(i)
    wx, wy = P.direction(j)
    return 1.0 / abs(ux * wx + uy * wy)


# --- file formats -------------------------------------------------------------


def load_polygon(path) -> Polygon:
    with open(path) as fh:
        data = json.load(fh)
    return build_polygon(data["vertices"])


def polygon_report(P: Polygon) -> dict:
    return {
        "vertices": [[v.x, v.y] for v in P.vertices],
        "perimeter": P.perimeter,
        "side_lengths": list(P.side_lengths),
        "parallel_facing": has_parallel_facing(P),
    }
