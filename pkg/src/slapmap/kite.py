"""Doubling orbits on kites and the bifurcation that splits off ergodic components.

Kites are parametrised by the half-angles (alpha, beta) at the ends of the
unit symmetry diagonal.  Folding the boundary along the mirror gives a
reduced map on [0, ell] with three affine branches:

    psi00: [0, d] -> [0, c]     slope 1/cos(2 beta)
    psi01: [d, c] -> [c, e]     slope 1/cos(alpha - beta)
    psi10: [c, ell] -> [p, q]   slope 1/cos(alpha - beta)

The vertex c (between edges 0 and 1) has a doubling orbit of type (4, 2)
with itinerary ((1,2,0,2,0), (0,3,0,3,0), (0,2,0)) exactly when
Pi(alpha, beta) = (0, 0).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .ergodic import ErgodicReport, analyze
from .errors import (
    NoBifurcationFound,
    NoConvergence,
    OrbitMismatch,
    OutOfBranch,
    OutOfFamily,
    OutOfPiDomain,
    SingularJacobian,
)
from .geometry import KITE_LABELS, check_kite_family, extract_slap_map, kite_polygon
from .pwamap import LEFT, RIGHT, AffineBranch, PiecewiseAffineMap, compose_along, iterate

DEFAULT_GUESS = (1.0, 0.5)
ORBIT_TYPE = (4, 2)
ITINERARY = ((1, 2, 0, 2, 0), (0, 3, 0, 3, 0), (0, 2, 0))
# mirror image: labels swap 0 <-> 2 and 1 <-> 3
MIRROR_LABEL = {0: 2, 1: 3, 2: 0, 3: 1}


@dataclass(frozen=True)
class KiteConstants:
    alpha: float
    beta: float
    ell: float
    c: float
    d: float
    e: float
    p: float
    q: float


def kite_constants(alpha: float, beta: float) -> KiteConstants:
    check_kite_family(alpha, beta)
    sa, sab = math.sin(alpha), math.sin(alpha + beta)
    cam = math.cos(alpha - beta)
    c2b = math.cos(2 * beta)
    ell = (sa + math.sin(beta)) / sab
    c = sa / sab
    d = c2b * sa / sab
    e = (1 + cam - c2b) / cam * sa / sab
    p = math.cos(alpha + beta) * sa / (sab * cam)
    q = math.cos(alpha) / cam
    if not (0 < d < c < ell and p < q):
        raise OutOfFamily(f"kite constants out of order at ({alpha}, {beta})")
    return KiteConstants(alpha, beta, ell, c, d, e, p, q)


@dataclass(frozen=True)
class KiteBranches:
    psi00: AffineBranch
    psi01: AffineBranch
    psi10: AffineBranch

    def __getitem__(self, which: str) -> AffineBranch:
        return {"00": self.psi00, "01": self.psi01, "10": self.psi10}[which]


def kite_branches(alpha: float, beta: float) -> KiteBranches:
    k = kite_constants(alpha, beta)
    s_ab = 1.0 / math.cos(alpha - beta)
    s_2b = 1.0 / math.cos(2 * beta)
    psi00 = AffineBranch(0.0, k.d, s_2b, 0.0, tag="00")
    psi01 = AffineBranch(k.d, k.c, s_ab, (1 - math.cos(2 * beta) * s_ab) * k.c, tag="01")
    psi10 = AffineBranch(k.c, k.ell, s_ab, -k.c * s_ab + math.cos(alpha + beta) * s_ab * k.c, tag="10")
    return KiteBranches(psi00, psi01, psi10)


def branch_eval(B: KiteBranches, which: str, x: float, inverse: bool = False) -> float:
    """Evaluate a reduced branch (or its inverse) after checking the argument."""
    br = B[which]
    eps = 1e-12 * max(1.0, br.hi)
    if inverse:
        lo, hi = br.image
        if not (lo - eps <= x <= hi + eps):
            raise OutOfBranch(f"{x} outside the image [{lo}, {hi}] of psi{which}")
        return br.inverse(x)
    if not (br.lo - eps <= x <= br.hi + eps):
        raise OutOfBranch(f"{x} outside the domain [{br.lo}, {br.hi}] of psi{which}")
    return br(x)


@dataclass(frozen=True)
class PiValue:
    plus: float
    minus: float

    def norm(self) -> float:
        return math.hypot(self.plus, self.minus)

    def as_array(self) -> np.ndarray:
        return np.array([self.plus, self.minus])


def pi_map(alpha: float, beta: float, strict: bool = True) -> PiValue:
    """Pi = (psi00^3 psi10(c) - psi00^-2(c), (psi10 psi01)^2(c) - psi00^-2(c)).

    Every composition is checked against the open domain inequalities;
    OutOfPiDomain carries the 1-based index of the first violated one
    (index 0 is the family constraint itself).  With ``strict=False`` only
    the family constraint is enforced and the branch formulas are used as
    affine extensions past their intervals.
    """
    try:
        k = kite_constants(alpha, beta)
    except OutOfFamily as exc:
        raise OutOfPiDomain(0, str(exc)) from exc
    B = kite_branches(alpha, beta)
    c, d, ell = k.c, k.d, k.ell
    f00, f01, f10 = B.psi00, B.psi01, B.psi10

    def need(index, lo, x, hi):
        if strict and not (lo < x < hi):
            raise OutOfPiDomain(index, f"{lo} < {x} < {hi} fails")

    x = f00.inverse(c)
    need(1, 0.0, x, c)
    target = f00.inverse(x)

    y = f10(c)
    for i in range(3):
        need(2 + i, 0.0, y, d)
        y = f00(y)
    plus = y - target

    z = f01(c)
    need(5, c, z, ell)
    z = f10(z)
    need(6, d, z, c)
    z = f01(z)
    need(7, c, z, ell)
    z = f10(z)
    # Pi_- = 0 puts this point at psi00^-2(c) = c cos^2(2 beta) < d
    need(8, 0.0, z, d)
    minus = z - target
    return PiValue(plus, minus)


def in_pi_domain(alpha: float, beta: float) -> bool:
    try:
        pi_map(alpha, beta)
    except OutOfPiDomain:
        return False
    return True


# --- the same quantity through the full geometric slap map -------------------

_GEOM_OF_LABEL = {label: i for i, label in enumerate(KITE_LABELS)}


def _branch_by_sides(f: PiecewiseAffineMap, i: int, j: int) -> int:
    hits = [k for k, b in enumerate(f.branches) if b.tag == (i, j)]
    if len(hits) != 1:
        raise OrbitMismatch("itinerary", f"no unique branch from side {i} to side {j}")
    return hits[0]


def _label_itinerary_branches(f: PiecewiseAffineMap, labels) -> list[int]:
    sides = [_GEOM_OF_LABEL[lab] for lab in labels]
    return [_branch_by_sides(f, i, j) for i, j in zip(sides, sides[1:])]


def pi_map_geometric(alpha: float, beta: float) -> PiValue:
    """Pi computed from the extracted slap map of kite_polygon(alpha, beta)."""
    P = kite_polygon(alpha, beta)
    f = extract_slap_map(P)
    c = P.cumulative_arclength[1]
    gp, gm, eta = ITINERARY
    plus = compose_along(f, _label_itinerary_branches(f, gp))(c)
    minus = compose_along(f, _label_itinerary_branches(f, gm))(c)
    back = compose_along(f, _label_itinerary_branches(f, eta)).inverse(c)
    return PiValue(plus - back, minus - back)


# --- Newton ---------------------------------------------------------------------


def jacobian_pi(alpha: float, beta: float, h: float = 1e-6, strict: bool = True) -> tuple[np.ndarray, float]:
    """Central finite-difference Jacobian of Pi and its determinant."""
    J = np.empty((2, 2))
    for col, (da, db) in enumerate(((h, 0.0), (0.0, h))):
        fp = pi_map(alpha + da, beta + db, strict).as_array()
        fm = pi_map(alpha - da, beta - db, strict).as_array()
        J[:, col] = (fp - fm) / (2 * h)
    return J, float(np.linalg.det(J))


@dataclass
class NewtonResult:
    alpha: float
    beta: float
    residual: float
    iterations: int
    det: float
    history: list[tuple[float, float]] = field(default_factory=list)


def newton_solve(
    guess: tuple[float, float] = DEFAULT_GUESS,
    tol: float = 1e-12,
    max_iter: int = 100,
    h: float = 1e-6,
) -> NewtonResult:
    """Damped Newton iteration for Pi(alpha, beta) = 0.

    The step is halved while it leaves the domain of Pi or fails to reduce
    |Pi|.  The Jacobian is the finite-difference one of ``jacobian_pi``.
    """
    x = np.array(guess, dtype=float)
    r = pi_map(*x)
    history = [tuple(x)]
    for it in range(max_iter + 1):
        if r.norm() < tol:
            _, det = jacobian_pi(*x, h)
            return NewtonResult(float(x[0]), float(x[1]), r.norm(), it, det, history)
        if it == max_iter:
            break
        J, det = jacobian_pi(*x, h)
        if not math.isfinite(det) or abs(det) < 1e-10:
            raise SingularJacobian(f"det DPi = {det} at {tuple(x)}")
        step = np.linalg.solve(J, r.as_array())
        t = 1.0
        for _ in range(60):
            cand = x - t * step
            try:
                rc = pi_map(*cand)
            except OutOfPiDomain:
                t /= 2
                continue
            if rc.norm() < r.norm() or rc.norm() < tol:
                break
            t /= 2
        else:
            raise NoConvergence(f"line search failed at {tuple(x)}", residual=r.norm())
        x, r = cand, rc
        history.append(tuple(x))
    raise NoConvergence(f"no convergence after {max_iter} iterations", residual=r.norm())


# --- orbit verification on the full polygon -------------------------------------------


def _circ(a: float, b: float, L: float) -> float:
    d = abs(a - b) % L
    return min(d, L - d)


def _labels(f: PiecewiseAffineMap, orbit) -> tuple[int, ...]:
    out = []
    for x, side in zip(orbit.points, orbit.sides):
        i = f.branches[f.branch_index(x, side)].tag[0]
        out.append(KITE_LABELS[i])
    return tuple(out)


@dataclass
class DoublingOrbit:
    vertex: float
    p: float
    plus: list[float]
    minus: list[float]
    eta: list[float]
    itinerary: tuple[tuple[int, ...], tuple[int, ...], tuple[int, ...]]

    @property
    def trace(self) -> list[float]:
        out: list[float] = []
        for x in sorted(self.plus + self.minus + self.eta):
            if not out or x - out[-1] > 1e-9:
                out.append(x)
        return out


def _follow(f, P, vertex, sides, expected, tol):
    """Check the three doubling-orbit conditions from ``vertex``.

    ``sides`` = (side giving gamma_+, side giving gamma_-, side of p whose
    eta-orbit arrives at the vertex along the expected edge).
    """
    k, m = ORBIT_TYPE
    L = P.perimeter
    o_plus = iterate(f, vertex, sides[0], k)
    o_minus = iterate(f, vertex, sides[1], k)
    pp, pm = o_plus.points[-1], o_minus.points[-1]
    if _circ(pp, pm, L) > tol:
        raise OrbitMismatch("condition 1", f"one-sided images differ: {pp} vs {pm}")
    p = 0.5 * (pp + pm)
    o_eta = iterate(f, p, sides[2], m)
    if _circ(o_eta.points[-1], vertex, L) > tol:
        raise OrbitMismatch("condition 2", f"psi^{m}(p) = {o_eta.points[-1]} misses the vertex {vertex}")
    inner = o_plus.points[1:] + o_minus.points[1:] + o_eta.points[1:-1]
    for y in inner:
        if min(_circ(y, s, L) for s in P.cumulative_arclength) <= tol:
            raise OrbitMismatch("condition 3", f"orbit point {y} is a vertex")
    itin = (_labels(f, o_plus), _labels(f, o_minus), _labels(f, o_eta))
    if itin != expected:
        raise OrbitMismatch("itinerary", f"got {itin}, expected {expected}")
    return DoublingOrbit(vertex, p, o_plus.points, o_minus.points, o_eta.points, itin)


@dataclass
class OrbitReport:
    alpha: float
    beta: float
    orbit: DoublingOrbit
    mirror: DoublingOrbit
    separation: float

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "beta": self.beta,
            "type": list(ORBIT_TYPE),
            "p": self.orbit.p,
            "itinerary": [list(g) for g in self.orbit.itinerary],
            "mirror_itinerary": [list(g) for g in self.mirror.itinerary],
            "trace": self.orbit.trace,
            "mirror_trace": self.mirror.trace,
            "separation": self.separation,
            "conditions": {"1": True, "2": True, "3": True},
        }


def verify_doubling_orbit(alpha: float, beta: float, tol: float = 1e-8) -> OrbitReport:
    """Check the doubling orbit O of vertex C and its mirror image O' on the full kite."""
    P = kite_polygon(alpha, beta)
    f = extract_slap_map(P)
    c = P.cumulative_arclength[1]
    c_mirror = P.cumulative_arclength[3]
    orbit = _follow(f, P, c, (RIGHT, LEFT, LEFT), ITINERARY, tol)
    mirrored = tuple(tuple(MIRROR_LABEL[x] for x in g) for g in ITINERARY)
    # the reflection reverses orientation, so the sides swap
    mirror = _follow(f, P, c_mirror, (LEFT, RIGHT, RIGHT), mirrored, tol)
    L = P.perimeter
    sep = min(_circ(a, b, L) for a in orbit.trace for b in mirror.trace)
    if sep <= tol:
        raise OrbitMismatch("disjointness", "O and its mirror image share a point")
    return OrbitReport(alpha, beta, orbit, mirror, sep)


# --- bifurcation ------------------------------------------------------------------------

QUADRANTS = ((-1, 1), (1, -1), (-1, -1), (1, 1))
LOCALIZATION = 0.2
PERIOD = sum(ORBIT_TYPE)


def _localized(comp, trace, L, radius):
    for lo, hi in comp.support:
        if not any(max(_circ(lo, t, L), _circ(hi, t, L)) <= radius for t in trace):
            return False
    return True


@dataclass
class ProbeResult:
    report: ErgodicReport
    quadrant: tuple[int, int] | None
    perturbation: tuple[float, float]
    alpha: float
    beta: float
    pi: PiValue | None
    localized: tuple[int, int] | None
    perimeter: float
    tried: list[dict] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "beta": self.beta,
            "quadrant": list(self.quadrant) if self.quadrant else None,
            "perturbation": list(self.perturbation),
            "pi": [self.pi.plus, self.pi.minus] if self.pi else None,
            "localized_components": list(self.localized) if self.localized else None,
            "perimeter": self.perimeter,
            "tried": self.tried,
            "report": self.report.to_dict(),
        }


def bifurcation_probe(
    alpha0: float,
    beta0: float,
    epsilon: float = 1e-3,
    n: int = 4000,
    radius: float = LOCALIZATION,
) -> ProbeResult:
    """Perturb the kite off the doubling-orbit point and look for split-off components.

    For every sign quadrant of (Pi_+, Pi_-) the parameters move a distance
    ``epsilon`` along J^-1 (s_+, s_-), the full slap map is analysed, and the
    first quadrant showing one period-(k+m) component near O and another
    near O' wins.
    """
    base = verify_doubling_orbit(alpha0, beta0, tol=1e-6)
    if epsilon == 0:
        P = kite_polygon(alpha0, beta0)
        rep = analyze(extract_slap_map(P), n)
        return ProbeResult(rep, None, (0.0, 0.0), alpha0, beta0, pi_map(alpha0, beta0), None, P.perimeter)
    J, _ = jacobian_pi(alpha0, beta0)
    tried = []
    for quad in QUADRANTS:
        step = np.linalg.solve(J, np.array(quad, dtype=float))
        step *= epsilon / np.linalg.norm(step)
        a, b = alpha0 + step[0], beta0 + step[1]
        entry = {"quadrant": list(quad), "alpha": a, "beta": b}
        tried.append(entry)
        try:
            P = kite_polygon(a, b)
            f = extract_slap_map(P)
        except OutOfFamily:
            entry["outcome"] = "out of family"
            continue
        try:
            pv = pi_map(a, b)
        except OutOfPiDomain:
            pv = None
        rep = analyze(f, n)
        L = P.perimeter
        near_o = [k for k, comp in enumerate(rep.components) if comp.period == PERIOD and _localized(comp, base.orbit.trace, L, radius)]
        near_m = [k for k, comp in enumerate(rep.components) if comp.period == PERIOD and _localized(comp, base.mirror.trace, L, radius)]
        pair = next(((i, j) for i in near_o for j in near_m if i != j), None)
        entry["components"] = rep.count
        entry["periods"] = rep.periods
        if pair is not None:
            entry["outcome"] = "split"
            return ProbeResult(rep, quad, (float(step[0]), float(step[1])), a, b, pv, pair, L, tried)
        entry["outcome"] = "no localized pair"
    raise NoBifurcationFound(f"no quadrant at epsilon={epsilon} produced two localized components; try a smaller epsilon")


def solve_report(guess=DEFAULT_GUESS, tol=1e-12, max_iter=100) -> dict:
    res = newton_solve(guess, tol, max_iter)
    orbit = verify_doubling_orbit(res.alpha, res.beta)
    return {
        "alpha": res.alpha,
        "beta": res.beta,
        "det": res.det,
        "residual": res.residual,
        "iterations": res.iterations,
        "orbit": orbit.to_dict(),
    }
