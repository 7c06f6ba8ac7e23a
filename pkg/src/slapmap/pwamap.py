"""Piecewise affine interval maps.

A map is stored as an ordered tuple of affine branches tiling a closed
interval.  Values at breakpoints are never defined on their own: every
query carries a side (``"left"`` or ``"right"``) and returns the one-sided
limit from that side.  Floating comparisons use ``TOL`` scaled by the domain
length.
"""

from __future__ import annotations

import bisect
import csv
import hashlib
import io
import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

from .errors import EmptyDomain, NotInvariant, OutOfDomain

LEFT = "left"
RIGHT = "right"
TOL = 1e-10


def flip(side: str) -> str:
    return RIGHT if side == LEFT else LEFT


def _check_side(side):
    if side not in (LEFT, RIGHT):
        raise ValueError(f"side must be 'left' or 'right', got {side!r}")


@dataclass(frozen=True)
class AffineBranch:
    """x -> slope * x + intercept on [lo, hi].

    ``tag`` is free metadata (the slap map stores its (source, target) side
    pair there) and does not take part in equality.
    """

    lo: float
    hi: float
    slope: float
    intercept: float
    tag: object = field(default=None, compare=False)

    def __call__(self, x):
        return self.slope * x + self.intercept

    @property
    def width(self) -> float:
        return self.hi - self.lo

    @property
    def image(self) -> tuple[float, float]:
        a, b = self(self.lo), self(self.hi)
        return (a, b) if a <= b else (b, a)

    def inverse(self, y):
        return (y - self.intercept) / self.slope


@dataclass(frozen=True)
class PiecewiseAffineMap:
    domain_lo: float
    domain_hi: float
    branches: tuple[AffineBranch, ...]

    def __post_init__(self):
        object.__setattr__(self, "branches", tuple(self.branches))
        if not self.branches:
            raise ValueError("a map needs at least one branch")
        if self.branches[0].lo != self.domain_lo or self.branches[-1].hi != self.domain_hi:
            raise ValueError("branches must start at domain_lo and end at domain_hi")
        for a, b in zip(self.branches, self.branches[1:]):
            if a.hi != b.lo:
                raise ValueError(f"branches do not tile the domain at {a.hi} / {b.lo}")
        for b in self.branches:
            if not b.hi > b.lo:
                raise ValueError(f"empty branch [{b.lo}, {b.hi}]")

    @property
    def length(self) -> float:
        return self.domain_hi - self.domain_lo

    @property
    def tol(self) -> float:
        return TOL * self.length

    @property
    def min_expansion(self) -> float:
        return min(abs(b.slope) for b in self.branches)

    @property
    def is_expanding(self) -> bool:
        return self.min_expansion > 1.0 + TOL

    @property
    def endpoints(self) -> list[float]:
        """All branch endpoints, domain ends included."""
        return [b.lo for b in self.branches] + [self.domain_hi]

    @property
    def breakpoints(self) -> list[float]:
        """Interior branch endpoints."""
        return [b.lo for b in self.branches[1:]]

    def branch_index(self, x: float, side: str = RIGHT) -> int:
        _check_side(side)
        tol = self.tol
        if x < self.domain_lo - tol or x > self.domain_hi + tol:
            raise OutOfDomain(f"{x} outside [{self.domain_lo}, {self.domain_hi}]")
        if side == RIGHT and x >= self.domain_hi:
            raise OutOfDomain(f"no right limit at the right end {self.domain_hi}")
        if side == LEFT and x <= self.domain_lo:
            raise OutOfDomain(f"no left limit at the left end {self.domain_lo}")
        if side == RIGHT:
            i = bisect.bisect_right(self._los, x) - 1
        else:
            i = bisect.bisect_left(self._his, x)
        return min(max(i, 0), len(self.branches) - 1)

    @cached_property
    def _los(self):
        return [b.lo for b in self.branches]

    @cached_property
    def _his(self):
        return [b.hi for b in self.branches]

    @cached_property
    def _endpoints(self):
        return self.endpoints

    def value(self, x: float, side: str = RIGHT) -> float:
        return self.branches[self.branch_index(x, side)](x)

    def nearest_endpoint(self, x: float) -> tuple[float, float]:
        """(endpoint, distance) for the branch endpoint closest to ``x``."""
        pts = self._endpoints
        i = bisect.bisect_left(pts, x)
        best = min((pts[j] for j in (i - 1, i) if 0 <= j < len(pts)), key=lambda p: abs(p - x))
        return best, abs(best - x)

    # serialisation -------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "domain": [self.domain_lo, self.domain_hi],
            "branches": [
                {"lo": b.lo, "hi": b.hi, "slope": b.slope, "intercept": b.intercept}
                for b in self.branches
            ],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "PiecewiseAffineMap":
        lo, hi = data["domain"]
        branches = [
            AffineBranch(float(b["lo"]), float(b["hi"]), float(b["slope"]), float(b["intercept"]))
            for b in data["branches"]
        ]
        return cls(float(lo), float(hi), tuple(branches))

    def digest(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()

    def to_csv(self, xs: Iterable[float]) -> str:
        """Graph samples with columns x, f_left(x), f_right(x).

        Limits that do not exist (outer side at a domain end) are left empty.
        """
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["x", "f_left", "f_right"])
        for x in xs:
            row = [repr(float(x))]
            for side in (LEFT, RIGHT):
                try:
                    row.append(repr(self.value(x, side)))
                except OutOfDomain:
                    row.append("")
            w.writerow(row)
        return buf.getvalue()


def evaluate(f: PiecewiseAffineMap, x: float, side: str = RIGHT) -> float:
    """One-sided limit of ``f`` at ``x``; at non-breakpoints both sides agree."""
    return f.value(x, side)


@dataclass
class Orbit:
    points: list[float]
    sides: list[str]
    branches: list[int]
    breakpoint_hits: list[int] = field(default_factory=list)
    stopped: bool = False

    @property
    def itinerary(self) -> list[int]:
        return list(self.branches)


def iterate(
    f: PiecewiseAffineMap,
    x: float,
    side: str,
    n: int,
    *,
    stop_at_breakpoints: bool = False,
) -> Orbit:
    """Orbit of the one-sided point (x, side) for ``n`` steps.

    The side is carried through every branch (flipped by decreasing ones),
    which is what makes one-sided orbits well defined when an iterate lands
    on a breakpoint.  Such landings are recorded in ``breakpoint_hits``; with
    ``stop_at_breakpoints`` the orbit ends there instead and ``stopped`` is set.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    _check_side(side)
    points, sides, branches = [x], [side], []
    hits = []
    tol = f.tol
    for step in range(n + 1):
        if step > 0:
            end, dist = f.nearest_endpoint(x)
            if dist <= tol:
                hits.append(step)
                x = points[-1] = end
                if stop_at_breakpoints:
                    return Orbit(points, sides, branches, hits, stopped=True)
        branches.append(f.branch_index(x, side))
        if step == n:
            break
        b = f.branches[branches[-1]]
        x = b(x)
        if b.slope < 0:
            side = flip(side)
        points.append(x)
        sides.append(side)
    return Orbit(points, sides, branches, hits)


def compose_along(f: PiecewiseAffineMap, itinerary: Sequence[int]) -> AffineBranch:
    """Composition of the branches of ``f`` along ``itinerary``.

    The first index is the branch containing the starting point, so the
    result applies ``len(itinerary)`` branches.  Its interval is the maximal
    set of starting points that actually follow the itinerary.
    """
    if not itinerary:
        raise ValueError("empty itinerary")
    first = f.branches[itinerary[0]]
    lo, hi = first.lo, first.hi
    slope, icpt = first.slope, first.intercept
    for k in itinerary[1:]:
        nb = f.branches[k]
        x1 = (nb.lo - icpt) / slope
        x2 = (nb.hi - icpt) / slope
        lo, hi = max(lo, min(x1, x2)), min(hi, max(x1, x2))
        if not hi > lo:
            raise EmptyDomain(f"itinerary {list(itinerary)} has no admissible points")
        slope, icpt = nb.slope * slope, nb.slope * icpt + nb.intercept
    return AffineBranch(lo, hi, slope, icpt)


def _merge_equal(pieces, rtol=1e-12):
    out = [pieces[0]]
    for p in pieces[1:]:
        a, b, s, c = out[-1]
        _, b2, s2, c2 = p
        scale = max(1.0, abs(s), abs(c))
        if abs(s - s2) <= rtol * scale and abs(c - c2) <= rtol * scale:
            out[-1] = (a, b2, s, c)
        else:
            out.append(p)
    return out


def power_on(f: PiecewiseAffineMap, n: int, lo: float, hi: float) -> PiecewiseAffineMap:
    """f**n restricted to [lo, hi] as an explicit piecewise affine map.

    Adjacent pieces with identical coefficients are merged, so splits that
    do not produce an actual discontinuity disappear.
    """
    if n < 0:
        raise ValueError("n must be >= 0")
    tol = f.tol
    if lo < f.domain_lo - tol or hi > f.domain_hi + tol or not hi > lo:
        raise OutOfDomain(f"[{lo}, {hi}] not inside the domain of f")
    bps = f.breakpoints
    pieces = [(lo, hi, 1.0, 0.0)]
    for _ in range(n):
        new = []
        for a, b, s, c in pieces:
            ya, yb = s * a + c, s * b + c
            ymin, ymax = min(ya, yb), max(ya, yb)
            cuts = sorted((p - c) / s for p in bps if ymin + tol < p < ymax - tol)
            xs = [a] + [x for x in cuts if a < x < b] + [b]
            for x0, x1 in zip(xs, xs[1:]):
                if not x1 > x0:
                    continue
                ymid = s * (0.5 * (x0 + x1)) + c
                ymid = min(max(ymid, f.domain_lo), f.domain_hi)
                side = LEFT if ymid >= f.domain_hi else RIGHT
                br = f.branches[f.branch_index(ymid, side)]
                new.append((x0, x1, br.slope * s, br.slope * c + br.intercept))
        pieces = _merge_equal(new)
    branches = tuple(AffineBranch(a, b, s, c) for a, b, s, c in pieces)
    return PiecewiseAffineMap(lo, hi, branches)


def restrict_and_rescale(
    f: PiecewiseAffineMap, lo: float, hi: float, iterate: int = 1
) -> PiecewiseAffineMap:
    """Return map f**iterate on [lo, hi], affinely rescaled to [0, 1].

    Raises NotInvariant when f**iterate does not map [lo, hi] into itself.
    """
    g = power_on(f, iterate, lo, hi)
    w = hi - lo
    slack = f.tol
    for b in g.branches:
        y0, y1 = b.image
        if y0 < lo - slack or y1 > hi + slack:
            raise NotInvariant(f"f^{iterate}([{b.lo}, {b.hi}]) = [{y0}, {y1}] leaves [{lo}, {hi}]")
    out = []
    for b in g.branches:
        out.append(AffineBranch((b.lo - lo) / w, (b.hi - lo) / w, b.slope, (b.slope * lo + b.intercept - lo) / w))
    out[0] = AffineBranch(0.0, out[0].hi, out[0].slope, out[0].intercept)
    out[-1] = AffineBranch(out[-1].lo, 1.0, out[-1].slope, out[-1].intercept)
    return PiecewiseAffineMap(0.0, 1.0, tuple(out))


def continuous_runs(f: PiecewiseAffineMap, tol: float | None = None) -> list[list[int]]:
    """Group consecutive branch indices into runs on which f is continuous."""
    tol = f.tol if tol is None else tol
    runs = [[0]]
    for k in range(1, len(f.branches)):
        prev, cur = f.branches[k - 1], f.branches[k]
        if abs(prev(prev.hi) - cur(cur.lo)) <= tol:
            runs[-1].append(k)
        else:
            runs.append([k])
    return runs


def is_lorenz(f: PiecewiseAffineMap, tol: float = TOL) -> bool:
    """Increasing on [0, c) and (c, 1] with f(c-) = 1 and f(c+) = 0 (within tol)."""
    if abs(f.domain_lo) > tol or abs(f.domain_hi - 1.0) > tol:
        return False
    if any(b.slope <= 0 for b in f.branches):
        return False
    runs = continuous_runs(f, max(tol, f.tol))
    if len(runs) != 2:
        return False
    left = f.branches[runs[0][-1]]
    right = f.branches[runs[1][0]]
    return abs(left(left.hi) - 1.0) <= tol and abs(right(right.lo)) <= tol


def is_markov(f: PiecewiseAffineMap, tol: float = 1e-9) -> bool:
    """Every branch image endpoint lands on a branch endpoint (within tol * length)."""
    eps = tol * f.length
    for b in f.branches:
        for y in b.image:
            if f.nearest_endpoint(y)[1] > eps:
                return False
    return True


def mod_one_map(slope: float, center: float = 0.5) -> PiecewiseAffineMap:
    """x -> slope * (x - center) (mod 1) on [0, 1], with the wraps resolved
    into explicit branches."""
    intercept = -slope * center
    y0, y1 = intercept, slope + intercept
    ymin, ymax = min(y0, y1), max(y0, y1)
    cuts = sorted((m - intercept) / slope for m in range(math.floor(ymin) + 1, math.ceil(ymax)))
    xs = [0.0] + [x for x in cuts if 0.0 < x < 1.0] + [1.0]
    branches = []
    for a, b in zip(xs, xs[1:]):
        k = math.floor(slope * (0.5 * (a + b)) + intercept)
        branches.append(AffineBranch(a, b, slope, intercept - k))
    return PiecewiseAffineMap(0.0, 1.0, tuple(branches))


def from_branches(branches: Sequence[AffineBranch]) -> PiecewiseAffineMap:
    return PiecewiseAffineMap(branches[0].lo, branches[-1].hi, tuple(branches))
