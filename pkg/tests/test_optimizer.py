import json
import math

import numpy as np
import pytest

from mcsunflower import optimizer as opt
from mcsunflower.errors import InconsistencyError
from mcsunflower.optimizer import KktMultipliers, OptPoint

CASE2_EXACT = (29 + 20 * math.sqrt(10)) / 729


def test_objective_examples():
    third = 1 / 3
    v, g1, g2 = opt.objective_and_constraints(OptPoint(third, third, third, 0, 0, 0))
    assert v == pytest.approx(1 / 27) and g1 == pytest.approx(third - 1) and g2 == pytest.approx(0)
    assert opt.objective_and_constraints(OptPoint(0.5, 0.5, 0.5, 0.5, 0, 0)) == (0.125, 0.0, 0.0)
    assert opt.objective_and_constraints(OptPoint(0, 0, 0, 0, 0, 0)) == (0, -1, -1)


def test_kkt_residual_examples():
    c1 = opt.solve_case1()
    assert opt.kkt_residual(c1.point, opt.reconstruct_multipliers(c1.point)) <= 1e-12
    zero = OptPoint(0, 0, 0, 0, 0, 0)
    assert opt.kkt_residual(zero, KktMultipliers((0.0,) * 8)) == 0
    assert opt.kkt_residual(OptPoint(1, 1, 1, 0, 0, 0), KktMultipliers((0.0,) * 8)) > 0
    assert opt.kkt_residual(c1.point, KktMultipliers((-1.0,) + (0.0,) * 7)) > 0


def test_case1():
    r = opt.solve_case1()
    assert r.case_label == "CASE1"
    assert r.value == 0.125 and r.point.a == 0.5 and r.extra["x"] == 0.5
    _, g1, g2 = opt.objective_and_constraints(r.point)
    assert abs(g1) <= 1e-15 and abs(g2) <= 1e-15
    assert r.residual <= 1e-10
    mu = r.multipliers.mu
    assert mu[0] == pytest.approx(3 / 20) and mu[1] == pytest.approx(3 / 40)


def test_case2():
    r = opt.solve_case2()
    p = r.point
    assert p.a == pytest.approx(0.462475, abs=1e-6) and p.c == p.a
    assert p.b == pytest.approx(0.591617, abs=1e-6)
    assert r.extra["x"] == pytest.approx(0.516568, abs=1e-6)
    assert r.value == pytest.approx(0.126537, abs=1e-6)
    assert abs(729 * r.value - 20 * math.sqrt(10) - 29) <= 1e-10
    assert abs(r.value - CASE2_EXACT) <= 1e-12
    assert p.e == 0 and r.residual <= 1e-8


def test_case3():
    r = opt.solve_case3()
    p = r.point
    assert 0.130747 <= r.value <= 0.130749
    assert p.a == pytest.approx(0.37478, abs=1e-5)
    assert p.b == pytest.approx(0.590649, abs=1e-6) and p.c == p.b
    assert r.multipliers.lam == pytest.approx(-0.165171, abs=1e-6)
    assert p.d == pytest.approx(0.556078, abs=1e-6) and p.e == p.f == 0
    assert r.extra["system_residual"] <= opt.DEFAULT_TOL
    assert r.value == pytest.approx(p.a * p.b * p.b, rel=1e-15)


@pytest.mark.parametrize("solver", [opt.solve_def_zero, opt.solve_case1, opt.solve_case2,
                                    opt.solve_case3])
def test_reports_feasible_and_kkt(solver):
    r = solver()
    _, g1, g2 = opt.objective_and_constraints(r.point)
    assert g1 <= 1e-12 and g2 <= 1e-12 and min(r.point.as_array()) >= 0
    assert r.constraint_check
    assert r.residual <= 1e-8
    assert r.value == r.point.a * r.point.b * r.point.c
    if r.case_label != "DEF_ZERO":
        assert min(r.multipliers.mu) >= -1e-12


def test_symmetric_point_is_not_kkt_for_full_program():
    r = opt.solve_def_zero()
    full = opt.reconstruct_multipliers(r.point)
    assert opt.kkt_residual(r.point, full) > 1e-3


def test_case_ordering():
    values = [r.value for r in opt.case_reports()]
    assert values[0] == pytest.approx(1 / 27)
    lo, c1, c2, c3 = values
    assert lo + 1e-4 < c1 and c1 + 1e-4 < c2 and c2 + 1e-4 < c3


def test_global():
    g = opt.solve_global()
    assert g.case_label == "CASE3"
    assert g.value == pytest.approx(0.130748, abs=1e-6)
    assert abs(g.extra["direct_value"] - g.value) <= 10 * opt.DEFAULT_TOL
    assert opt.satisfies_original_constraints(g.point)
    p = g.point
    assert p.d + p.e <= p.c and p.e + p.f <= p.a and p.f + p.d <= p.b


def test_direct_never_exceeds():
    best, point, values = opt.direct_maximize(1024)
    assert len(values) == 1024
    assert max(values) <= 0.130749
    assert min(point.as_array()) >= 0
    _, g1, g2 = opt.objective_and_constraints(point)
    assert g1 <= 0 and g2 <= 0


def test_disagreement_raises(monkeypatch):
    monkeypatch.setattr(opt, "direct_maximize", lambda starts: (0.2, opt.solve_case1().point, ()))
    with pytest.raises(InconsistencyError, match="0.2"):
        opt.solve_global()


def test_product_upper_scaled():
    v = opt.product_upper_scaled()
    assert v == 0.13075
    assert 1 / 8 <= v < 8 / 27


def test_grid_bracketing():
    # for fixed (a, b, c) the cheapest way to satisfy the linear constraint puts
    # all of d + e + f on the smallest of a, b, c; that reduces the program exactly
    g = np.arange(0, 1.2 + 1e-9, 0.02)
    a, b, c = np.meshgrid(g, g, g, indexing="ij")
    need = np.maximum(0.0, a + b + c - 1)
    feasible = a * b + b * c + c * a + np.minimum(np.minimum(a, b), c) * need <= 1 + 1e-12
    best = float((a * b * c)[feasible].max())
    assert best <= opt.solve_global().value + 1e-3
    assert best >= 0.125


def test_determinism():
    first = opt.solve_case3().to_json()
    opt.solve_case3.cache_clear()
    assert opt.solve_case3().to_json() == first
    assert opt.solve_case1().to_json() == opt.solve_case1().to_json()


def test_newton_failure_path():
    z, res, ok = opt.damped_newton((0.0, 0.0, 0.0), max_iter=0)
    assert not ok and res > 0


def test_report_json():
    d = json.loads(opt.solve_case3().to_json())
    assert d["case_label"] == "CASE3" and d["schema"] == 1
    assert d["point"]["a"] == 0.37478 and d["value"] == 0.130748
    assert d["lambda"] == -0.165171
