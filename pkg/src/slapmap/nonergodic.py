"""Convex 3n-gons with n ergodic components, built by intersecting obtuse triangles.

An obtuse isosceles triangle keeps its acip in a thin region around the
segment from the apex to the foot of the altitude.  Rotating n copies by
pi * k / n about the midpoint of that segment leaves each copy's region
inside all the others once the apex angle is wide enough, so each copy
contributes its own invariant set to the intersection.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from shapely import affinity
from shapely.geometry import Polygon as ShapelyPolygon

from .ergodic import ErgodicReport, analyze
from .errors import ConstructionFailed, SlapMapError
from .geometry import Polygon, build_polygon, extract_slap_map, has_parallel_facing

DEFAULT_APEX = 2.2
APEX_STEP = 0.1
APEX_MAX = 3.0
BINS_PER_UNIT = 3000


def apex_schedule(start: float = DEFAULT_APEX, step: float = APEX_STEP, stop: float = APEX_MAX) -> list[float]:
    out = []
    k = 0
    while start + k * step <= stop + 1e-12:
        out.append(round(start + k * step, 10))
        k += 1
    return out


def _dedupe(coords, eps=1e-9):
    out = []
    for p in coords:
        if not out or math.dist(p, out[-1]) > eps:
            out.append(p)
    if len(out) > 1 and math.dist(out[0], out[-1]) <= eps:
        out.pop()
    return out


def _is_convex(P: Polygon) -> bool:
    for i in range(P.d):
        ax, ay = P.direction(i)
        bx, by = P.direction((i + 1) % P.d)
        if ax * by - ay * bx <= 0:
            return False
    return True


def intersect_triangles(n: int, apex: float) -> Polygon:
    """Intersection of n obtuse isosceles triangles (base 2, apex angle ``apex``)."""
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n}")
    if not (math.pi / 2 < apex < math.pi):
        raise ValueError(f"apex angle {apex} is not obtuse")
    h = 1.0 / math.tan(apex / 2)
    tri = ShapelyPolygon([(-1.0, 0.0), (1.0, 0.0), (0.0, h)])
    center = (0.0, h / 2)
    shape = tri
    for k in range(1, n):
        shape = shape.intersection(affinity.rotate(tri, 180.0 * k / n, origin=center))
    if shape.is_empty or shape.geom_type != "Polygon":
        raise ConstructionFailed(f"intersection degenerated at apex {apex}")
    coords = _dedupe(list(shape.exterior.coords)[:-1])
    try:
        P = build_polygon(coords)
    except SlapMapError as exc:
        raise ConstructionFailed(f"apex {apex}: {exc}") from exc
    if P.d != 3 * n:
        raise ConstructionFailed(f"apex {apex}: intersection has {P.d} sides, expected {3 * n}")
    if not _is_convex(P):
        raise ConstructionFailed(f"apex {apex}: intersection is not convex")
    if has_parallel_facing(P):
        raise ConstructionFailed(f"apex {apex}: parallel facing sides")
    return P


@dataclass
class NonErgodicResult:
    n: int
    apex: float
    polygon: Polygon
    report: ErgodicReport
    attempts: list[dict]

    @property
    def ok(self) -> bool:
        return _verified(self.report, self.n)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "apex": self.apex,
            "polygon": self.polygon.to_dict(),
            "attempts": self.attempts,
            "match": self.ok,
            "report": self.report.to_dict(),
        }


def _verified(report: ErgodicReport, n: int) -> bool:
    return (
        report.count == n
        and all(p % 2 == 0 for p in report.periods)
        and not report.unresolved
    )


def build_nonergodic(n: int, apex: float = DEFAULT_APEX, bins_per_unit: int = BINS_PER_UNIT, schedule=None) -> NonErgodicResult:
    """Walk the apex schedule until the 3n-gon shows n components of even period.

    Each attempt is recorded; ConstructionFailed is raised when none works.
    """
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n}")
    attempts = []
    for a in schedule or apex_schedule(apex):
        entry = {"apex": a}
        attempts.append(entry)
        try:
            P = intersect_triangles(n, a)
        except ConstructionFailed as exc:
            entry["outcome"] = str(exc)
            continue
        report = analyze(extract_slap_map(P), max(10, int(bins_per_unit * P.perimeter)))
        entry["components"] = report.count
        entry["periods"] = report.periods
        if _verified(report, n):
            entry["outcome"] = "ok"
            return NonErgodicResult(n, a, P, report, attempts)
        entry["outcome"] = "component count or parity mismatch"
    raise ConstructionFailed(f"no apex angle in the schedule gave {n} components of even period")
