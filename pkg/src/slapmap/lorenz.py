"""Renormalisation of the centrally symmetric Lorenz maps x -> a(x - 1/2) mod 1."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import InvalidArity, NotInvariant, OutOfRange, TowerValidationFailed
from .pwamap import TOL, PiecewiseAffineMap, is_lorenz, mod_one_map, restrict_and_rescale

SQRT2 = math.sqrt(2.0)


def _check_slope(a: float) -> None:
    if not (1.0 < a <= 2.0):
        raise OutOfRange(f"slope a={a} outside (1, 2]")


def centrally_symmetric_map(a: float) -> PiecewiseAffineMap:
    _check_slope(a)
    return mod_one_map(a, 0.5)


def _in_band(a: float, m: int) -> bool:
    return 2.0 ** (2.0 ** (-m - 1)) < a <= 2.0 ** (2.0 ** (-m))


def m_of_slope(a: float) -> int:
    """Unique m >= 0 with 2**(2**(-m-1)) < a <= 2**(2**(-m))."""
    _check_slope(a)
    m = max(0, math.floor(-math.log2(math.log2(a))))
    # the closed form can land one off at band edges; the inequality decides
    for cand in (m, m - 1, m + 1):
        if cand >= 0 and _in_band(a, cand):
            return cand
    raise AssertionError(f"no band found for a={a}")  # pragma: no cover


def m_of_polygon(d: int) -> int:
    """Integer part of -log2(-log2 cos(pi/d)) for odd d >= 3."""
    if d < 3 or d % 2 == 0:
        raise InvalidArity(f"d must be odd and >= 3, got {d}")
    return math.floor(-math.log2(-math.log2(math.cos(math.pi / d))))


def predicted_mixing_components(a: float) -> int:
    return 2 ** m_of_slope(a)


@dataclass(frozen=True)
class LorenzAnalysis:
    a: float
    m: int
    intervals: tuple[tuple[float, float], ...]

    def to_dict(self) -> dict:
        return {"a": self.a, "m": self.m, "intervals": [list(J) for J in self.intervals]}


def renormalization_tower(a: float, validate: bool = True) -> LorenzAnalysis:
    """Nested renormalisation intervals J_0 = [0, 1] ⊃ J_1 ⊃ ... ⊃ J_m.

    At level k the return map f_a**(2**k) on J_k, rescaled to [0, 1], is
    f_{a_k} with a_k = a**(2**k); its next renormalisation interval is
    [1 - a_k/2, a_k/2] in rescaled coordinates.  With ``validate`` every
    level is checked to be invariant and Lorenz with slope a_k.
    """
    m = m_of_slope(a)
    lo, hi = 0.0, 1.0
    intervals = [(lo, hi)]
    ak = a
    for _ in range(m):
        w = hi - lo
        lo, hi = lo + w * (1.0 - ak / 2.0), lo + w * (ak / 2.0)
        intervals.append((lo, hi))
        ak = ak * ak
    tower = LorenzAnalysis(a, m, tuple(intervals))
    if validate:
        validate_tower(tower)
    return tower


def validate_tower(tower: LorenzAnalysis) -> None:
    f = centrally_symmetric_map(tower.a)
    for k, (lo, hi) in enumerate(tower.intervals):
        try:
            g = restrict_and_rescale(f, lo, hi, 2**k)
        except NotInvariant as exc:
            raise TowerValidationFailed(f"level {k}: {exc}") from exc
        ak = tower.a ** (2**k)
        # composing 2**k branches and blowing up by 1/(hi - lo) magnifies roundoff
        tol = max(TOL, 2**k * ak * 1e-15 / (hi - lo))
        if not is_lorenz(g, tol):
            raise TowerValidationFailed(f"level {k}: return map is not a Lorenz map")
        if any(abs(b.slope - ak) > 1e-10 * ak for b in g.branches):
            raise TowerValidationFailed(f"level {k}: slope differs from a**{2**k}")
