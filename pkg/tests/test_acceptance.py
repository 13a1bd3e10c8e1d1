"""Acceptance suite: one test per criterion, each printing a single pass/fail line."""

import math
import subprocess
import sys

import numpy as np
import pytest

import oracles
from evtherm.carnot import audit_cycle, build_cycle, feasible_start
from evtherm.core import LOG2, ModelConstants, ObservationPoint, Side, log_evidence, log_volume, log_volume_quadrature, state_at
from evtherm.errors import NoSolutionError
from evtherm.figures import FIG2_LEVELS, PANELS
from evtherm.fisher import FISHER_CONSTANTS, compare_point, compare_series, default_ratio_grid
from evtherm.solvers import (
    Branch,
    isotherm_apex,
    solve_x_for_evidence,
    trace_adiabat,
    trace_isotherm,
    transition_point,
    trp_residual,
)

PATH_SAMPLES = 2048
# E never falls below 2^(R/C_V) at k = 0, so the unit isotherm needs k = -C_V ln 2.
SHIFTED = ModelConstants(entropy_offset_k=-1.5 * LOG2)
DEFAULT = ModelConstants()


def _grid_20x20():
    for n in np.geomspace(1.0, 1000.0, 20):
        for x in np.linspace(0.0, 0.5 * n, 20):
            yield float(n), float(x)


@pytest.fixture(scope="module")
def criterion_cycles():
    """Cycles for (1,2) and (2,4): two start states times expansion ratios {1.5, 2}."""
    out = []
    for e1, e2 in ((1.0, 2.0), (2.0, 4.0)):
        for position in (0.3, 0.8):
            for ratio in (1.5, 2.0):
                start = feasible_start(e1, e2, ratio, SHIFTED, position)
                out.append(((e1, e2, position, ratio), build_cycle(e1, e2, start, ratio, PATH_SAMPLES, SHIFTED)))
    return out


def test_criterion_01_carnot_ratio(criterion, criterion_cycles):
    with criterion(1, "Carnot q1/q2 = e1/e2 = 1/2 and efficiency 1/2") as c:
        worst_a = worst_n = worst_eff = 0.0
        starts = {}
        for (e1, e2, pos, ratio), cyc in criterion_cycles:
            wa, _, wc, _ = (s.w_numeric for s in cyc.strokes)
            worst_a = max(worst_a, abs(cyc.q_ratio - 0.5))
            worst_n = max(worst_n, abs(abs(wc) / wa - 0.5))
            worst_eff = max(worst_eff, abs(cyc.efficiency - 0.5))
            starts.setdefault((e1, e2), set()).add(round(cyc.strokes[0].start.n, 9))
        c.check(worst_a <= 1e-6, "analytic", f"max |q1/q2 - 0.5| = {worst_a:.2e}")
        c.check(worst_n <= 1e-4, "numeric", f"max |q1/q2 - 0.5| = {worst_n:.2e} at {PATH_SAMPLES} samples")
        c.check(worst_eff <= 1e-6, "efficiency", f"max |eta - 0.5| = {worst_eff:.2e}")
        c.check(all(len(s) >= 2 for s in starts.values()), "distinct starts", f"{len(criterion_cycles)} cycles")


def test_criterion_02_universality(criterion, criterion_cycles):
    with criterion(2, "q1/q2 universal across cycles with fixed levels") as c:
        ratios = [cyc.q_ratio for (e1, e2, _, _), cyc in criterion_cycles if (e1, e2) == (2.0, 4.0)]
        # Same levels at k = 0 with other start states.
        for position in (0.2, 0.5, 0.9):
            for ratio in (1.5, 2.0):
                start = feasible_start(2.0, 4.0, ratio, DEFAULT, position)
                ratios.append(build_cycle(2.0, 4.0, start, ratio, 64, DEFAULT).q_ratio)
        spread = max(ratios) - min(ratios)
        c.check(len(ratios) >= 4 and spread <= 2e-6, "(2,4)", f"spread {spread:.2e} over {len(ratios)} cycles")
        ratios_12 = [cyc.q_ratio for (e1, _, _, _), cyc in criterion_cycles if e1 == 1.0]
        cross = max(abs(a - b) for a in ratios_12 for b in ratios)
        c.check(cross <= 2e-6, "(1,2) vs (2,4)", f"max difference {cross:.2e}")


def test_criterion_03_ideal_gas_identity(criterion):
    with criterion(3, "ln P + ln V - ln R - ln E = 0 on a 20x20 grid") as c:
        worst = 0.0
        for n, x in _grid_20x20():
            s = state_at(n, x)
            worst = max(worst, abs(s.log_P_E + s.log_V_E - math.log(DEFAULT.R) - s.log_E))
        c.check(worst <= 1e-12, "identity", f"max residual {worst:.2e}")


def test_criterion_04_volume_oracles(criterion):
    with criterion(4, "incomplete-beta vs quadrature volume; two-sided vs factorial form") as c:
        worst = 0.0
        for n, x in _grid_20x20():
            p = ObservationPoint(n, x)
            worst = max(worst, abs(math.expm1(log_volume(p) - log_volume_quadrature(p))))
        c.check(worst <= 1e-8, "one-sided", f"max rel diff {worst:.2e}")
        two = ModelConstants(side=Side.TWO_SIDED)
        worst2 = 0.0
        for n in range(0, 51):
            for x in range(0, n + 1):
                got = log_volume(ObservationPoint(float(n), float(x)), two)
                worst2 = max(worst2, abs(got - oracles.log_factorial_volume_exact(n, x)))
        c.check(worst2 <= 1e-12, "two-sided", f"max |d ln V| {worst2:.2e} for integer n <= 50")


def test_criterion_05_transition_point(criterion):
    with criterion(5, "transition point vs dense grid, residual, C_V invariance") as c:
        for n in (5.0, 10.0, 50.0, 100.0, 1000.0):
            tp = transition_point(n)
            grid_x = oracles.dense_argmin_x(n, 1e-5)
            c.check(abs(tp.x_star - grid_x) <= 1e-4 * n, f"n={n:g} grid", f"|dx|/n = {abs(tp.x_star - grid_x) / n:.1e}")
            res = trp_residual(n, tp.x_star)
            c.check(abs(res) <= 1e-10, f"n={n:g} residual", f"{res:.1e}")
            alt = transition_point(n, consts=ModelConstants(C_V=0.5))
            c.check(abs(alt.x_star - tp.x_star) <= 1e-10 * n, f"n={n:g} C_V", f"|dx| = {abs(alt.x_star - tp.x_star):.1e}")


def test_criterion_06_figure1_behaviour(criterion):
    with criterion(6, "E rises with n, unimodal in x, x*/n rises with n") as c:
        ns = np.geomspace(0.1, 1e4, 200)
        for r in (0.0, 0.1, 0.2, 0.3):
            le = [log_evidence(float(n), r * float(n)) for n in ns]
            c.check(all(np.diff(le) > 0), f"monotone in n at x/n={r}")
        for n in (10.0, 50.0, 100.0, 500.0, 1000.0):
            le = np.array([log_evidence(n, float(x)) for x in np.linspace(0.0, 0.5 * n, 2001)])
            k = int(np.argmin(le))
            d = np.diff(le)
            ok = 0 < k < len(le) - 1 and np.all(d[:k] < 0) and np.all(d[k:] > 0)
            c.check(bool(ok), f"unimodal at n={n:g}", f"min at x/n={k / 4000:.4f}")
        ratios = [transition_point(n).ratio for n in (10.0, 1e2, 1e3, 1e4)]
        c.check(all(b > a for a, b in zip(ratios, ratios[1:])), "x*/n trend", ", ".join(f"{r:.4f}" for r in ratios))


def test_criterion_07_figure2_behaviour(criterion):
    with criterion(7, "E=2.25 isotherm: P V = E, max n at the branch junction") as c:
        apex = isotherm_apex(2.25)
        trace = trace_isotherm(2.25, 0.02 * apex.n, 1.2 * apex.n, 400)
        worst = max(abs(s.P_E * s.V_E / 2.25 - 1.0) for _, s in trace.samples())
        c.check(worst <= 1e-10, "P V identity", f"max rel residual {worst:.1e}")
        n_max = max(s.point.n for _, s in trace.samples())
        c.check(n_max <= apex.n * (1 + 1e-10), "no state beyond apex", f"traced max n {n_max:.6g} <= {apex.n:.6g}")
        for e in FIG2_LEVELS:
            ap = isotherm_apex(e)
            x_l = solve_x_for_evidence(ap.n, e, Branch.LEFT, tol=1e-9)
            x_r = solve_x_for_evidence(ap.n, e, Branch.RIGHT, tol=1e-9)
            joined = abs(x_l - ap.x_star) <= 1e-4 * ap.n and abs(x_r - ap.x_star) <= 1e-4 * ap.n
            try:
                solve_x_for_evidence(ap.n * (1 + 1e-6), e, Branch.LEFT)
                beyond = False
            except NoSolutionError:
                beyond = True
            c.check(joined and beyond, f"E={e} junction", f"n_max={ap.n:.6g}, x*={ap.x_star:.6g}")


def test_criterion_08_adiabat_invariant(criterion, criterion_cycles):
    with criterion(8, "adiabat invariant and adiabatic work cancellation") as c:
        for s_level in (0.5, 2.0, 5.0):
            path = trace_adiabat(s_level, 1.0, 500.0, 200)
            inv = [math.log(p.E) + DEFAULT.R / DEFAULT.C_V * p.log_V_E for p in path]
            c.check(float(np.std(inv)) <= 1e-10, f"S={s_level}", f"stdev {np.std(inv):.1e}")
        worst = max(abs(cyc.works["B"] + cyc.works["D"]) / abs(cyc.works["B"]) for _, cyc in criterion_cycles)
        c.check(worst <= 1e-8, "W_B + W_D", f"max rel {worst:.1e}")
        c.check(all(audit_cycle(cyc).passed for _, cyc in criterion_cycles), "audits")


def test_criterion_09_fisher(criterion):
    with criterion(9, "Fisher information convergence at C_V = R/2") as c:
        gaps = [compare_point(n, 0.05 * n).relative_gap for n in (50.0, 100.0, 200.0, 400.0)]
        c.check(all(b < a for a, b in zip(gaps, gaps[1:])), "gap decreasing", ", ".join(f"{g:.4f}" for g in gaps))
        # x = 1e-6 n needs n large enough for the closed forms to pass 1e9.
        n = 1e4
        p = compare_point(n, 1e-6 * n)
        c.check(
            math.isfinite(p.e_exact) and p.e_approx > 1e9 and p.fi_over_2pi > 1e9,
            "near x=0",
            f"n={n:g}: E={p.e_exact:.3g}, E_approx={p.e_approx:.3g}, FI/2pi={p.fi_over_2pi:.3g}",
        )
        worst = 0.0
        for n in (10.0, 20.0, 50.0, 100.0, 1e4):
            for row in compare_series(n, default_ratio_grid(), FISHER_CONSTANTS):
                worst = max(worst, abs(row.e_approx / row.fi_over_2pi / ((n + 1) / n) ** 3 - 1.0))
        c.check(worst <= 1e-12, "E_approx / (FI/2pi)", f"max rel {worst:.1e}")


def test_criterion_10_determinism(criterion, tmp_path):
    with criterion(10, "figure output byte-identical across runs") as c:
        for which in PANELS:
            blobs = []
            for run in (1, 2):
                out = tmp_path / f"fig{which}_{run}.csv"
                proc = subprocess.run(
                    [sys.executable, "-m", "evtherm", "figure", which, "--out", str(out)],
                    capture_output=True,
                    text=True,
                )
                if proc.returncode != 0:
                    c.check(False, f"panel {which}", proc.stderr.strip())
                    break
                files = sorted(tmp_path.glob(f"fig{which}_{run}*.csv"))
                blobs.append([f.read_bytes() for f in files])
            if len(blobs) == 2:
                c.check(blobs[0] == blobs[1] and all(blobs[0]), f"panel {which}", f"{len(blobs[0])} file(s)")
