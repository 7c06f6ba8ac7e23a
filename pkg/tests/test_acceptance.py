"""Acceptance suite: one PASS/FAIL line per criterion, printed in the summary."""

import io
import math
import time
from contextlib import redirect_stdout

import numpy as np

from slapmap.cli import main
from slapmap.errors import NoBifurcationFound
from slapmap.ergodic import analyze
from slapmap.geometry import extract_slap_map, regular_polygon
from slapmap.kite import ITINERARY, bifurcation_probe, jacobian_pi, newton_solve, pi_map, verify_doubling_orbit
from slapmap.lorenz import renormalization_tower
from slapmap.nonergodic import build_nonergodic
from slapmap.regular import alpha_constants, conjugation_H, pentagon_constants, skew_step, SkewState
from slapmap.triangles import (
    check_second_iterate_invariance,
    predict_triangle,
    triangle_from_angles,
    triangle_spec,
)

HALF_PI = math.pi / 2
EXPECTED_REGULAR = {3: (1, 1), 5: (1, 2), 7: (7, 4), 9: (9, 8), 11: (11, 16)}
# every Ulam report produced here is collected for the hygiene criterion
REPORTS = []


def _analyze_polygon(P, bins):
    report = analyze(extract_slap_map(P), bins)
    REPORTS.append(report)
    return report


def test_regular_polygons(verdict):
    bad = []
    slowest = 0.0
    for d, (count, period) in EXPECTED_REGULAR.items():
        t = time.perf_counter()
        r = _analyze_polygon(regular_polygon(d), 3000 * d)
        slowest = max(slowest, time.perf_counter() - t)
        ok = r.count == count and set(r.periods) == {period} and r.refinement.stable
        if not ok:
            bad.append((d, r.count, r.periods))
    verdict(1, not bad and slowest < 30, f"mismatches {bad}, slowest {slowest:.2f}s")


def test_pentagon_constants(verdict):
    pc = pentagon_constants()
    r5 = math.sqrt(5)
    tower = renormalization_tower(r5 - 1)
    errs = [
        abs(pc.e - (3 - r5) / 2),
        abs(pc.b - (9 - r5) / 16),
        abs(tower.intervals[1][0] - pc.e),
        abs(tower.intervals[1][1] - (1 - pc.e)),
    ]
    verdict(2, max(errs) < 1e-12, f"max error {max(errs):.2e}")


def test_alpha_tables(verdict):
    bad = {}
    for d in (5, 7, 9, 11):
        c = alpha_constants(d).constants
        want = (d // 2, d - 1) + (0,) * (len(c) - 2)
        if c != want:
            bad[d] = c
    verdict(3, not bad, f"mismatching tables {bad}")


def test_conjugation(verdict):
    rng = np.random.default_rng(20240601)
    worst = 0.0
    for d in (3, 5, 7, 9):
        psi = extract_slap_map(regular_polygon(d))
        for x in rng.uniform(0, 1, 10_000):
            for s in range(d):
                lhs = psi.value(conjugation_H(x, s))
                y, t = skew_step(d, SkewState(x, s))
                worst = max(worst, abs(lhs - conjugation_H(y, t)))
    verdict(4, worst < 1e-10, f"max deviation {worst:.2e}")


def _acute(rng):
    while True:
        a1, a2 = rng.uniform(0.1, HALF_PI - 0.02, 2)
        if 0.1 < math.pi - a1 - a2 < HALF_PI - 0.02:
            return a1, a2


def _obtuse(rng):
    big = rng.uniform(HALF_PI + 0.02, math.pi - 0.2)
    a1 = rng.uniform(0.05, math.pi - big - 0.05)
    return a1, math.pi - big - a1


def test_triangles(verdict):
    rng = np.random.default_rng(7)
    cases = [("acute", _acute(rng)) for _ in range(50)]
    cases += [("right", (HALF_PI, rng.uniform(0.1, HALF_PI - 0.1))) for _ in range(20)]
    cases += [("obtuse", _obtuse(rng)) for _ in range(50)]
    t = time.perf_counter()
    bad = []
    for kind, (a1, a2) in cases:
        P = triangle_from_angles(a1, a2)
        r = _analyze_polygon(P, max(10, int(3000 * P.perimeter)))
        pred = predict_triangle(triangle_spec(a1, a2))
        ok = r.count == 1 and all(pred.period_ok(p) for p in r.periods)
        if kind == "acute":
            ok = ok and sum(len(c.cells) for c in r.components) / r.bin_count >= 0.999
        else:
            ok = ok and check_second_iterate_invariance(P)
        if not ok:
            bad.append((kind, a1, a2, r.count, r.periods))
    elapsed = time.perf_counter() - t
    verdict(5, not bad and elapsed < 300, f"{len(bad)} of {len(cases)} failed {bad[:3]}, {elapsed:.1f}s")


def test_kite_root(verdict):
    root = newton_solve((1.0, 0.5))
    v = pi_map(root.alpha, root.beta)
    _, det = jacobian_pi(root.alpha, root.beta)
    rep = verify_doubling_orbit(root.alpha, root.beta)
    ok = (
        max(abs(v.plus), abs(v.minus)) < 1e-12
        and abs(root.alpha - 1.021264) < 1e-5
        and abs(root.beta - 0.520719) < 1e-5
        and abs(det + 24.321933) < 1e-2
        and rep.orbit.itinerary == ITINERARY
    )
    verdict(6, ok, f"alpha {root.alpha:.9f}, beta {root.beta:.9f}, |Pi| {v.norm():.1e}, det {det:.6f}")


def test_bifurcation(verdict):
    root = newton_solve()
    t = time.perf_counter()
    try:
        res = bifurcation_probe(root.alpha, root.beta, 1e-3, 4000)
    except NoBifurcationFound as exc:
        verdict(7, False, f"{exc}; {time.perf_counter() - t:.1f}s")
        return
    periods = res.report.periods
    ok = res.report.count >= 2 and periods.count(6) >= 2 and res.localized and time.perf_counter() - t < 120
    verdict(7, ok, f"quadrant {res.quadrant}, periods {periods}")


def test_nonergodic(verdict):
    details = []
    ok = True
    for n in (2, 3):
        res = build_nonergodic(n)
        REPORTS.append(res.report)
        convex = all(
            res.polygon.direction(i)[0] * res.polygon.direction((i + 1) % res.polygon.d)[1]
            - res.polygon.direction(i)[1] * res.polygon.direction((i + 1) % res.polygon.d)[0]
            > 0
            for i in range(res.polygon.d)
        )
        r = res.report
        this = convex and res.polygon.d == 3 * n and r.count == n and all(p % 2 == 0 for p in r.periods)
        this = this and r.refinement.stable
        ok = ok and this
        details.append(f"n={n} apex {res.apex} periods {r.periods}")
    verdict(8, ok, "; ".join(details))


def _cli(*argv):
    buf = io.StringIO()
    with redirect_stdout(buf):
        code = main(list(argv))
    return code, buf.getvalue()


def test_numerical_hygiene(verdict):
    if not REPORTS:
        for d in (3, 5, 7):
            _analyze_polygon(regular_polygon(d), 3000 * d)
    row = max(r.max_row_error for r in REPORTS)
    dens = all(r.refinement.density_ok for r in REPORTS)
    over = [max(r.refinement.density_tv) / r.refinement.tv_bound for r in REPORTS if not r.refinement.density_ok]
    runs = [_cli("regular", "7"), _cli("regular", "7"), _cli("triangle", "1.0", "1.2"), _cli("triangle", "1.0", "1.2")]
    same = runs[0] == runs[1] and runs[2] == runs[3]
    verdict(
        9,
        row < 1e-12 and dens and same,
        (
            f"{len(REPORTS)} reports, max row error {row:.1e}, "
            f"{len(over)} density checks over the TV bound (worst ratio {max(over, default=0):.2f}), "
            f"deterministic {same}"
        ),
    )
