"""Triangles: construction, classification and the acute / non-acute dichotomy."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import InvalidAngles
from .geometry import Polygon, build_polygon, extract_slap_map
from .pwamap import is_markov, power_on

RIGHT_TOL = 1e-10


@dataclass(frozen=True)
class TriangleSpec:
    angles: tuple[float, float, float]
    longest_side_index: int = 0

    def __post_init__(self):
        if any(not (0 < a < math.pi) for a in self.angles):
            raise InvalidAngles(f"angles {self.angles} not in (0, pi)")
        if abs(sum(self.angles) - math.pi) > 1e-10:
            raise InvalidAngles(f"angles {self.angles} do not sum to pi")

    @property
    def largest(self) -> float:
        return max(self.angles)


def _check_angles(a1: float, a2: float) -> None:
    if not (math.isfinite(a1) and math.isfinite(a2) and a1 > 0 and a2 > 0 and a1 + a2 < math.pi):
        raise InvalidAngles(f"need a1, a2 > 0 and a1 + a2 < pi, got ({a1}, {a2})")


def triangle_spec(a1: float, a2: float) -> TriangleSpec:
    _check_angles(a1, a2)
    return TriangleSpec((a1, a2, math.pi - a1 - a2))


def triangle_from_angles(a1: float, a2: float, scale: float = 1.0) -> Polygon:
    """Triangle with angles a1, a2 and pi - a1 - a2.

    The longest side (opposite the largest angle) is side 0, running from the
    origin to (scale, 0); the apex lies above it so the boundary is CCW.
    """
    _check_angles(a1, a2)
    if not scale > 0:
        raise InvalidAngles(f"scale must be positive, got {scale}")
    angles = [a1, a2, math.pi - a1 - a2]
    k = max(range(3), key=lambda i: angles[i])
    left, right = [a for i, a in enumerate(angles) if i != k]
    # law of sines: side from the origin to the apex is opposite `right`
    r = scale * math.sin(right) / math.sin(angles[k])
    apex = (r * math.cos(left), r * math.sin(left))
    return build_polygon([(0.0, 0.0), (scale, 0.0), apex])


def classify(T: TriangleSpec) -> str:
    big = T.largest
    if abs(big - math.pi / 2) <= RIGHT_TOL:
        return "right"
    return "acute" if big < math.pi / 2 else "obtuse"


@dataclass(frozen=True)
class TrianglePrediction:
    ergodic_count: int
    mixing: str  # "mixing" (period 1), "two" (period 2) or "even"

    def period_ok(self, period: int) -> bool:
        if self.mixing == "mixing":
            return period == 1
        if self.mixing == "two":
            return period == 2
        return period >= 2 and period % 2 == 0


def predict_triangle(T: TriangleSpec) -> TrianglePrediction:
    kind = classify(T)
    return TrianglePrediction(1, {"acute": "mixing", "right": "two", "obtuse": "even"}[kind])


def check_second_iterate_invariance(P: Polygon) -> bool:
    """psi^2 maps the longest side I_0 into itself and I_1 ∪ I_2 into itself.

    Checked on the exact images of the branches of psi^2 built from the
    extracted slap map.
    """
    if _largest_angle(P) < math.pi / 2 - RIGHT_TOL:
        raise ValueError("second-iterate invariance is only claimed for non-acute triangles")
    f = extract_slap_map(P)
    split = P.cumulative_arclength[1]
    L = P.perimeter
    eps = f.tol
    for lo, hi in ((0.0, split), (split, L)):
        g = power_on(f, 2, lo, hi)
        for b in g.branches:
            y0, y1 = b.image
            if y0 < lo - eps or y1 > hi + eps:
                return False
    return True


def right_triangle_markov(P: Polygon, tol: float = 1e-9) -> bool:
    """Breakpoint images of the slap map land on breakpoints within tol."""
    return is_markov(extract_slap_map(P), tol)


def _largest_angle(P: Polygon) -> float:
    out = 0.0
    d = P.d
    for i in range(d):
        ux, uy = P.direction((i - 1) % d)
        vx, vy = P.direction(i)
        # interior angle = pi - turning angle
        turn = math.atan2(ux * vy - uy * vx, ux * vx + uy * vy)
        out = max(out, math.pi - turn)
    return out


def triangle_report(a1: float, a2: float, analysis=None) -> dict:
    spec = triangle_spec(a1, a2)
    pred = predict_triangle(spec)
    out = {
        "angles": list(spec.angles),
        "class": classify(spec),
        "predicted": {"ergodic": pred.ergodic_count, "mixing": pred.mixing},
    }
    if classify(spec) != "acute":
        out["second_iterate_invariance"] = check_second_iterate_invariance(triangle_from_angles(a1, a2))
    if classify(spec) == "right":
        out["markov"] = right_triangle_markov(triangle_from_angles(a1, a2))
    return out
