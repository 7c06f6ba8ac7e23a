"""Regular polygons: reduced slap map, skew-product lift and translation constants.

For odd d the slap map of the unit-sided regular d-gon on [0, d] is
conjugate, through H(x, s) = x + s, to the skew product

    F_d(x, s) = (phi_d(x), s + (d // 2) * delta(x)),

where phi_d(x) = -(x - 1/2) / cos(pi/d) (mod 1) is the reduced slap map and
delta is -1 left of 1/2 and +1 right of it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

from .errors import EvenArity, InvalidArity, NotConstant
from .lorenz import m_of_polygon, renormalization_tower
from .pwamap import LEFT, RIGHT, AffineBranch, PiecewiseAffineMap, flip, mod_one_map


def beta(d: int) -> float:
    return math.cos(math.pi / d)


def _check_odd(d: int) -> None:
    if d < 3:
        raise InvalidArity(f"d must be >= 3, got {d}")
    if d % 2 == 0:
        raise EvenArity(f"d={d} is even: the reduced map is the involution 1 - x")


@dataclass(frozen=True)
class ReducedSlap:
    d: int
    beta: float
    map: PiecewiseAffineMap

    @property
    def expansion(self) -> float:
        return 1.0 / self.beta


def reduced_slap(d: int) -> ReducedSlap:
    _check_odd(d)
    b = beta(d)
    return ReducedSlap(d, b, mod_one_map(-1.0 / b, 0.5))


def involution_compose(f: PiecewiseAffineMap) -> PiecewiseAffineMap:
    """x -> 1 - f(x)."""
    return PiecewiseAffineMap(
        f.domain_lo,
        f.domain_hi,
        tuple(AffineBranch(b.lo, b.hi, -b.slope, 1.0 - b.intercept) for b in f.branches),
    )


def lorenz_lift(d: int) -> PiecewiseAffineMap:
    """1 - phi_d(x): the centrally symmetric Lorenz map with slope 1/cos(pi/d)."""
    return involution_compose(reduced_slap(d).map)


class SkewState(NamedTuple):
    x: float
    s: int


def delta(x: float, side: str = RIGHT) -> int:
    if x < 0.5 or (x == 0.5 and side == LEFT):
        return -1
    return 1


def skew_step(d: int, state: SkewState, side: str = RIGHT) -> SkewState:
    phi = reduced_slap(d).map
    x, s = state
    return SkewState(phi.value(x, side), (s + (d // 2) * delta(x, side)) % d)


def skew_orbit(d: int, state: SkewState, n: int, side: str = RIGHT) -> list[SkewState]:
    """n steps of F_d with one-sided propagation through the decreasing branches."""
    phi = reduced_slap(d).map
    out = [state]
    x, s = state
    for _ in range(n):
        b = phi.branches[phi.branch_index(x, side)]
        s = (s + (d // 2) * delta(x, side)) % d
        x = b(x)
        side = flip(side)  # both branches are decreasing
        out.append(SkewState(x, s))
    return out


def conjugation_H(x: float, s: int) -> float:
    return x + s


def conjugation_H_inverse(y: float, d: int) -> SkewState:
    s = math.floor(y)
    if s >= d:
        return SkewState(1.0, d - 1)
    return SkewState(y - s, s)


def alpha_n(d: int, x: float, n: int, side: str = RIGHT) -> int:
    """(d // 2) * sum of delta along the first n points of the phi_d orbit, mod d."""
    states = skew_orbit(d, SkewState(x, 0), n, side)
    return states[-1].s


@dataclass(frozen=True)
class AlphaTable:
    d: int
    constants: tuple[int, ...]


def alpha_constants(d: int, samples: int = 100) -> AlphaTable:
    """a_k with alpha_{2^k}(x) = a_k delta(x) on J_k, k = 0..m(d), as residues mod d.

    Each a_k is measured on ``samples`` interior points of J_k ∩ (1/2, 1] and
    must be constant there; antisymmetry alpha(1 - x) = -alpha(x) is checked
    on the same points.
    """
    _check_odd(d)
    m = m_of_polygon(d)
    tower = renormalization_tower(1.0 / beta(d))
    consts = []
    for k in range(m + 1):
        _, hi = tower.intervals[k]
        n = 2**k
        values = set()
        for i in range(samples):
            x = 0.5 + (hi - 0.5) * (i + 0.5) / samples
            a_plus = alpha_n(d, x, n)
            a_minus = alpha_n(d, 1.0 - x, n)
            if (a_plus + a_minus) % d:
                raise NotConstant(f"d={d}, k={k}: alpha not antisymmetric at x={x}")
            values.add(a_plus)
        if len(values) != 1:
            raise NotConstant(f"d={d}, k={k}: alpha_{n} takes values {sorted(values)} on J_k+")
        consts.append(values.pop())
    return AlphaTable(d, tuple(consts))


def predict_acips(d: int) -> tuple[int, int]:
    """(number of ergodic acips, mixing components of each) for the regular d-gon."""
    _check_odd(d)
    m = m_of_polygon(d)
    return (1 if d in (3, 5) else d, 2**m)


@dataclass(frozen=True)
class PentagonConstants:
    e: float
    b: float
    J: tuple[float, float]
    lift_square_at_b: float


def pentagon_constants() -> PentagonConstants:
    r5 = math.sqrt(5.0)
    e = (3.0 - r5) / 2.0
    b = (9.0 - r5) / 16.0
    lift = lorenz_lift(5)
    y = lift.value(lift.value(b))
    return PentagonConstants(e, b, (e, 1.0 - e), y)


def regular_report(d: int) -> dict:
    _check_odd(d)
    m = m_of_polygon(d)
    ergodic, mixing = predict_acips(d)
    return {
        "d": d,
        "beta": beta(d),
        "m": m,
        "alpha": list(alpha_constants(d).constants),
        "predicted": {"ergodic": ergodic, "mixing": mixing},
    }
