"""The scaled product program behind the k = 3 product bound.

    maximise  abc
    s.t.      ab + bc + ca + ad + be + cf <= 1
              a + b + c - d - e - f       <= 1
              a, b, c, d, e, f >= 0

solved by KKT case analysis, and independently by a multistart local
maximiser over the full six-variable region.
"""
from __future__ import annotations

import functools
import itertools
import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize
from scipy.stats import qmc

from .errors import InconsistencyError

DEFAULT_TOL = 1e-12
CASE_LABELS = ("DEF_ZERO", "CASE1", "CASE2", "CASE3")

# Newton lattice for the third case: a, b on a 21x21 grid in (0, 1), lambda on 11 negatives
_A_GRID = [i / 22 for i in range(1, 22)]
_B_GRID = [j / 22 for j in range(1, 22)]
_LAMBDA_GRID = [-l / 20 for l in range(1, 12)]


@dataclass(frozen=True)
class OptPoint:
    a: float
    b: float
    c: float
    d: float
    e: float
    f: float

    def as_array(self) -> np.ndarray:
        return np.array([self.a, self.b, self.c, self.d, self.e, self.f], dtype=float)

    @classmethod
    def from_array(cls, x) -> OptPoint:
        return cls(*(float(v) for v in x))

    def rounded(self, digits: int = 6) -> dict:
        return {k: round(float(v), digits) for k, v in zip("abcdef", self.as_array())}


@dataclass(frozen=True)
class KktMultipliers:
    mu: tuple[float, ...]
    lam: float | None = None

    def __post_init__(self):
        if len(self.mu) != 8:
            raise ValueError("expected eight multipliers")


@dataclass(frozen=True)
class SolveReport:
    point: OptPoint
    value: float
    case_label: str
    residual: float
    constraint_check: bool
    multipliers: KktMultipliers | None = None
    extra: dict = field(default_factory=dict)

    def to_dict(self, digits: int = 6) -> dict:
        out = {
            "schema": 1,
            "case_label": self.case_label,
            "point": self.point.rounded(digits),
            "value": round(self.value, digits),
            "value_full": self.value,
            "residual": self.residual,
            "constraint_check": self.constraint_check,
        }
        if self.multipliers is not None and self.multipliers.lam is not None:
            out["lambda"] = round(self.multipliers.lam, digits)
        for key, val in self.extra.items():
            out[key] = val
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


# ---------------------------------------------------------------------------
# program pieces


def objective_and_constraints(p: OptPoint) -> tuple[float, float, float]:
    a, b, c, d, e, f = p.as_array()
    value = a * b * c
    g1 = a * b + b * c + c * a + a * d + b * e + c * f - 1
    g2 = a + b + c - d - e - f - 1
    return value, g1, g2


def _gradients(x):
    a, b, c, d, e, f = x
    grad_f = np.array([b * c, c * a, a * b, 0.0, 0.0, 0.0])
    grad_g1 = np.array([b + c + d, a + c + e, a + b + f, a, b, c])
    grad_g2 = np.array([1.0, 1.0, 1.0, -1.0, -1.0, -1.0])
    return grad_f, grad_g1, grad_g2


def kkt_residual(p: OptPoint, m: KktMultipliers, frozen=()) -> float:
    """Max-norm violation of the KKT system at (p, m).

    Covers stationarity, complementary slackness, dual and primal
    feasibility.  Variables listed in ``frozen`` (indices 0..5) are held at
    their value and drop out of stationarity, which gives the KKT system of
    the restricted program.
    """
    x = p.as_array()
    mu = np.asarray(m.mu, dtype=float)
    _, g1, g2 = objective_and_constraints(p)
    grad_f, grad_g1, grad_g2 = _gradients(x)
    stat = grad_f - mu[0] * grad_g1 - mu[1] * grad_g2 + mu[2:]
    stat = np.delete(stat, list(frozen))
    slack = [mu[0] * g1, mu[1] * g2] + list(mu[2:] * x)
    dual = np.maximum(0.0, -mu)
    primal = [max(0.0, g1), max(0.0, g2)] + list(np.maximum(0.0, -x))
    parts = np.concatenate([np.abs(stat), np.abs(slack), dual, primal])
    return float(parts.max())


def reconstruct_multipliers(p: OptPoint, active_tol: float = 1e-9, frozen=(),
                            lam: float | None = None) -> KktMultipliers:
    """Least-squares multipliers for the constraints active at ``p``."""
    x = p.as_array()
    _, g1, g2 = objective_and_constraints(p)
    grad_f, grad_g1, grad_g2 = _gradients(x)
    columns = [grad_g1, grad_g2] + [-np.eye(6)[i] for i in range(6)]
    active = [abs(g1) <= active_tol, abs(g2) <= active_tol]
    active += [x[i] <= active_tol and i not in frozen for i in range(6)]
    idx = [i for i, on in enumerate(active) if on]
    keep = [r for r in range(6) if r not in frozen]
    mu = np.zeros(8)
    if idx:
        mat = np.column_stack([columns[i] for i in idx])[keep]
        sol, *_ = np.linalg.lstsq(mat, grad_f[keep], rcond=None)
        mu[idx] = sol
    return KktMultipliers(tuple(float(v) for v in mu), lam)


def satisfies_original_constraints(p: OptPoint, tol: float = 1e-9) -> bool:
    """d + e <= c, e + f <= a, f + d <= b, which the relaxed program drops."""
    return bool(p.d + p.e <= p.c + tol and p.e + p.f <= p.a + tol and p.f + p.d <= p.b + tol)


def _feasible(p: OptPoint, tol: float) -> bool:
    _, g1, g2 = objective_and_constraints(p)
    return bool(g1 <= tol and g2 <= tol and min(p.as_array()) >= -tol)


def _report(point, label, tol, frozen=(), lam=None, extra=None):
    mult = reconstruct_multipliers(point, frozen=frozen, lam=lam)
    value, _, _ = objective_and_constraints(point)
    return SolveReport(
        point=point,
        value=value,
        case_label=label,
        residual=kkt_residual(point, mult, frozen=frozen),
        constraint_check=_feasible(point, max(tol, 1e-12)),
        multipliers=mult,
        extra=extra or {},
    )


# ---------------------------------------------------------------------------
# cases


def solve_def_zero(tol: float = DEFAULT_TOL) -> SolveReport:
    """d = e = f = 0: the symmetric point a = b = c = 1/3.

    Not a KKT point of the full program (raising d pays off), so the
    residual is that of the program with d, e, f frozen at zero.
    """
    third = 1 / 3
    point = OptPoint(third, third, third, 0.0, 0.0, 0.0)
    return _report(point, "DEF_ZERO", tol, frozen=(3, 4, 5))


def _positive_quadratic_root(qa, qb, qc):
    disc = qb * qb - 4 * qa * qc
    return (-qb + math.sqrt(disc)) / (2 * qa)


def solve_case1(tol: float = DEFAULT_TOL) -> SolveReport:
    """a = b = c, two main constraints tight, x = d + e + f.

    x = 3a - 1 turns 3a^2 + ax = 1 into 6a^2 - a - 1 = 0.  Stationarity in
    a, b, c forces d = e = f = x / 3.
    """
    a = _positive_quadratic_root(6.0, -1.0, -1.0)
    x = 3 * a - 1
    point = OptPoint(a, a, a, x / 3, x / 3, x / 3)
    return _report(point, "CASE1", tol, extra={"x": x})


def solve_case2(tol: float = DEFAULT_TOL) -> SolveReport:
    """e = 0 and a = c; with x = d + f the tight constraints read
    2ab + a^2 + ax = 1 and 2a + b - x = 1.

    Eliminating x gives b = (1 + a - 3a^2) / (3a), so the objective is
    (a + a^2 - 3a^3) / 3, stationary where 9a^2 - 2a - 1 = 0.
    Stationarity in a and c forces d = f.
    """
    a = _positive_quadratic_root(9.0, -2.0, -1.0)
    b = (1 + a - 3 * a * a) / (3 * a)
    x = 2 * a + b - 1
    point = OptPoint(a, b, a, x / 2, 0.0, x / 2)
    return _report(point, "CASE2", tol, extra={"x": x})


def _case3_system(a, b, lam):
    return np.array([
        b * b + 2 * lam * a + 4 * lam * b - lam,
        2 * a * b + 4 * lam * a + 2 * lam * b,
        a * a + 4 * a * b + b * b - a - 1,
    ])


def _case3_jacobian(a, b, lam):
    return np.array([
        [2 * lam, 2 * b + 4 * lam, 2 * a + 4 * b - 1],
        [2 * b + 4 * lam, 2 * a + 2 * lam, 4 * a + 2 * b],
        [2 * a + 4 * b - 1, 4 * a + 2 * b, 0.0],
    ])


def damped_newton(z0, tol: float = DEFAULT_TOL, max_iter: int = 100, halvings: int = 40):
    """Newton on the third-case Lagrange system with step halving.

    Returns (z, residual, converged).
    """
    z = np.array(z0, dtype=float)
    r = _case3_system(*z)
    res = float(np.abs(r).max())
    polish = 3
    for _ in range(max_iter):
        if res < tol:
            polish -= 1
            if polish < 0 or res == 0:
                return z, res, True
        try:
            step = np.linalg.solve(_case3_jacobian(*z), -r)
        except np.linalg.LinAlgError:
            return z, res, False
        scale = 1.0
        for _ in range(halvings + 1):
            trial = z + scale * step
            r_trial = _case3_system(*trial)
            res_trial = float(np.abs(r_trial).max())
            if res_trial < res:
                break
            scale *= 0.5
        else:
            return z, res, res < tol
        z, r, res = trial, r_trial, res_trial
    return z, res, res < tol


@functools.lru_cache(maxsize=8)
def solve_case3(tol: float = DEFAULT_TOL) -> SolveReport:
    """e = f = 0 and b = c; maximise ab^2 on a^2 + 4ab + b^2 - a - 1 = 0
    (d = a + 2b - 1 eliminated) via its Lagrange system.

    Every lattice start is run through damped Newton; among converged roots
    with a, b, d > 0 the one with the largest ab^2 wins.
    """
    best = None
    for a0, b0, l0 in itertools.product(_A_GRID, _B_GRID, _LAMBDA_GRID):
        z, res, ok = damped_newton((a0, b0, l0), tol)
        a, b, lam = (float(v) for v in z)
        if not ok or a <= 0 or b <= 0 or a + 2 * b - 1 <= 0:
            continue
        key = (a * b * b, -a, -b, -lam)
        if best is None or key > best[0]:
            best = (key, a, b, lam, res)
    if best is None:
        raise InconsistencyError("Newton found no admissible root for the third case")
    _, a, b, lam, res = best
    d = a + 2 * b - 1
    point = OptPoint(a, b, b, d, 0.0, 0.0)
    return _report(point, "CASE3", tol, lam=lam, extra={"system_residual": res})


# ---------------------------------------------------------------------------
# independent check and global answer


def _project(x):
    """Clip to the orthant and scale onto the feasible region.

    Both constraint bodies are homogeneous (degree 2 and 1), so shrinking by
    s multiplies them by s^2 and s.
    """
    x = np.maximum(np.asarray(x, dtype=float), 0.0)
    a, b, c, d, e, f = x
    quad = a * b + b * c + c * a + a * d + b * e + c * f
    lin = a + b + c - d - e - f
    scale = 1.0
    if quad > 1:
        scale = min(scale, 1 / math.sqrt(quad))
    if lin > 1:
        scale = min(scale, 1 / lin)
    x = x * scale
    # rounding can leave a hair of violation; shave it off
    while True:
        _, g1, g2 = objective_and_constraints(OptPoint.from_array(x))
        if g1 <= 0 and g2 <= 0:
            return x
        x = x * (1 - 1e-15)


@functools.lru_cache(maxsize=4)
def direct_maximize(starts: int = 1024):
    """Multistart SLSQP over the relaxed six-variable program.

    Starts are the first ``starts`` points of an unscrambled Sobol sequence
    in [0, 1]^6.  Each local optimum is projected back to exact
    feasibility before scoring.  Returns (best value, best point, values).
    """
    pts = qmc.Sobol(d=6, scramble=False).random_base2(max(0, math.ceil(math.log2(starts))))
    pts = pts[:starts]
    cons = [
        {"type": "ineq",
         "fun": lambda x: -objective_and_constraints(OptPoint.from_array(x))[1],
         "jac": lambda x: -_gradients(x)[1]},
        {"type": "ineq",
         "fun": lambda x: -objective_and_constraints(OptPoint.from_array(x))[2],
         "jac": lambda x: -_gradients(x)[2]},
    ]

    def neg(x):
        return -x[0] * x[1] * x[2]

    def neg_grad(x):
        return -_gradients(x)[0]

    best_val, best_x = -1.0, None
    values = []
    for x0 in pts:
        res = minimize(neg, x0, jac=neg_grad, method="SLSQP", bounds=[(0, None)] * 6,
                       constraints=cons, options={"ftol": 1e-16, "maxiter": 500})
        x = _project(res.x)
        val = float(x[0] * x[1] * x[2])
        values.append(val)
        if val > best_val or (val == best_val and tuple(x) < tuple(best_x)):
            best_val, best_x = val, x
    return best_val, OptPoint.from_array(best_x), tuple(values)


def case_reports(tol: float = DEFAULT_TOL) -> list[SolveReport]:
    return [solve_def_zero(tol), solve_case1(tol), solve_case2(tol), solve_case3(tol)]


def solve_global(tol: float = DEFAULT_TOL, starts: int = 1024,
                 agree_tol: float | None = None) -> SolveReport:
    """Best case value, confirmed by the independent multistart maximiser.

    Raises InconsistencyError if the two disagree by more than
    ``agree_tol`` (default 10 * tol).
    """
    if agree_tol is None:
        agree_tol = 10 * tol
    reports = case_reports(tol)
    winner = max(reports, key=lambda r: (r.value, -CASE_LABELS.index(r.case_label)))
    direct_val, direct_pt, _ = direct_maximize(starts)
    if abs(direct_val - winner.value) > agree_tol:
        raise InconsistencyError(
            f"case analysis gives {winner.value!r}, direct search gives {direct_val!r}")
    extra = dict(winner.extra)
    extra.update({
        "direct_value": direct_val,
        "direct_point": direct_pt.rounded(),
        "original_constraints": satisfies_original_constraints(winner.point),
        "case_values": {r.case_label: r.value for r in reports},
    })
    return SolveReport(winner.point, winner.value, winner.case_label, winner.residual,
                       winner.constraint_check and extra["original_constraints"],
                       winner.multipliers, extra)


def product_upper_scaled(tol: float = DEFAULT_TOL) -> float:
    """Leading coefficient of the k = 3 product bound, rounded up at 5 decimals."""
    value = max(r.value for r in case_reports(tol))
    return math.ceil(value * 1e5) / 1e5
