import dataclasses
import math

import pytest

from evtherm.carnot import (
    AuditTolerances,
    audit_cycle,
    build_cycle,
    feasible_start,
    max_cycle_entropy,
    work_numeric,
)
from evtherm.core import LOG2, ModelConstants, ObservationPoint, make_state, state_at
from evtherm.errors import DomainError, InfeasibleTargetError
from evtherm.solvers import Branch, PathSample, adiabat_fold, isotherm_point, solve_x_for_evidence

SHIFTED = ModelConstants(entropy_offset_k=-1.5 * LOG2)


@pytest.fixture(scope="module")
def cycle24():
    start = feasible_start(2.0, 4.0, 2.0)
    return build_cycle(2.0, 4.0, start, 2.0, path_samples=512)


class TestBuild:
    def test_analytic_works(self, cycle24):
        w = cycle24.works
        assert w["A"] == pytest.approx(4.0 * math.log(2.0), rel=1e-10)
        assert w["C"] == pytest.approx(-2.0 * math.log(2.0), rel=1e-10)
        assert w["B"] == pytest.approx(1.5 * (4.0 - 2.0), rel=1e-10)
        assert w["D"] == pytest.approx(-w["B"], rel=1e-10)

    def test_ratio_and_efficiency(self, cycle24):
        assert cycle24.q_ratio == pytest.approx(0.5, abs=1e-9)
        assert cycle24.efficiency == pytest.approx(0.5, abs=1e-9)
        assert cycle24.net_work == pytest.approx(cycle24.q2 - cycle24.q1, abs=1e-12)

    def test_node_levels(self, cycle24):
        a, b, c, d = (s.start for s in cycle24.strokes)
        assert (a.E, b.E) == pytest.approx((4.0, 4.0), rel=1e-10)
        assert (c.E, d.E) == pytest.approx((2.0, 2.0), rel=1e-10)
        assert b.log_V_E - a.log_V_E == pytest.approx(math.log(2.0), abs=1e-10)
        assert c.S_E == pytest.approx(b.S_E, abs=1e-10)
        assert d.S_E == pytest.approx(a.S_E, abs=1e-10)

    def test_paths_stay_on_their_curves(self, cycle24):
        sa, sb, sc, sd = cycle24.strokes
        assert all(p.E == pytest.approx(4.0, rel=1e-9) for p in sa.path)
        assert all(p.E == pytest.approx(2.0, rel=1e-9) for p in sc.path)
        assert all(p.S_E == pytest.approx(sb.start.S_E, abs=1e-9) for p in sb.path)
        assert all(p.S_E == pytest.approx(sd.start.S_E, abs=1e-9) for p in sd.path)

    def test_numeric_works_close(self, cycle24):
        for name, w in cycle24.works.items():
            assert cycle24.works_numeric[name] == pytest.approx(w, rel=1e-4)

    def test_audit_passes(self, cycle24):
        report = audit_cycle(cycle24)
        assert report.passed, report.as_dict()

    def test_reversed(self, cycle24):
        rev = cycle24.reversed()
        assert rev.net_work == pytest.approx(-cycle24.net_work, abs=1e-12)
        assert [s.name for s in rev.strokes] == ["D", "C", "B", "A"]

    def test_shifted_offset_allows_unit_level(self):
        start = feasible_start(1.0, 2.0, 1.5, SHIFTED)
        cycle = build_cycle(1.0, 2.0, start, 1.5, path_samples=256, consts=SHIFTED)
        assert cycle.q_ratio == pytest.approx(0.5, abs=1e-9)

    def test_user_start_on_right_branch(self):
        n = 30.0
        x = solve_x_for_evidence(n, 4.0, Branch.RIGHT)
        cycle = build_cycle(2.0, 4.0, make_state(ObservationPoint(n, x)), 1.2, path_samples=256)
        assert cycle.q_ratio == pytest.approx(0.5, abs=1e-9)


class TestInfeasible:
    def test_unit_level_at_zero_offset(self):
        with pytest.raises(InfeasibleTargetError) as info:
            feasible_start(1.0, 2.0)
        assert info.value.node == "C"

    def test_expansion_too_large(self):
        with pytest.raises(InfeasibleTargetError):
            feasible_start(2.0, 4.0, expansion_ratio=1e6)

    def test_node_named_when_unreachable(self):
        start = feasible_start(2.0, 4.0, 2.0, position=1.0)
        with pytest.raises(InfeasibleTargetError) as info:
            build_cycle(2.0, 4.0, start, 4.0, path_samples=16)
        assert info.value.node in {"B", "C", "D"}

    @pytest.mark.parametrize("e1,e2,r", [(4.0, 2.0, 2.0), (2.0, 2.0, 2.0), (2.0, 4.0, 1.0)])
    def test_argument_validation(self, e1, e2, r):
        start = isotherm_point(4.0, 0.4)
        with pytest.raises(DomainError):
            build_cycle(e1, e2, start, r)

    def test_start_off_isotherm(self):
        with pytest.raises(DomainError):
            build_cycle(2.0, 4.0, state_at(10.0, 3.0), 2.0)


class TestHelpers:
    def test_max_cycle_entropy_matches_fold(self):
        s = max_cycle_entropy(2.0)
        assert adiabat_fold(s).E == pytest.approx(2.0, rel=1e-9)

    def test_work_numeric_on_isotherm(self):
        ratios = [0.5 - 0.15 * i / 400 for i in range(401)]
        path = [PathSample.from_state(isotherm_point(3.0, r)) for r in ratios]
        w = work_numeric(path)
        exact = 3.0 * (path[-1].log_V_E - path[0].log_V_E)
        assert w == pytest.approx(exact, rel=1e-5)

    def test_work_numeric_needs_two_samples(self):
        with pytest.raises(DomainError):
            work_numeric([PathSample.from_state(state_at(1.0, 0.5))])


class TestAudit:
    def test_tampered_stroke_fails(self, cycle24):
        c = cycle24.strokes[2]
        bad = dataclasses.replace(c, w_analytic=c.w_analytic * 1.01)
        tampered = dataclasses.replace(cycle24, strokes=(cycle24.strokes[0], cycle24.strokes[1], bad, cycle24.strokes[3]))
        report = audit_cycle(tampered)
        assert not report.passed
        assert not report.items["q_ratio"].passed

    def test_tolerances_configurable(self, cycle24):
        strict = AuditTolerances(stroke_work=1e-15, q_ratio_numeric=1e-15)
        assert not audit_cycle(cycle24, strict).passed

    def test_report_serializable(self, cycle24):
        d = audit_cycle(cycle24).as_dict()
        assert set(d["q_ratio"]) == {"residual", "tolerance", "passed"}
