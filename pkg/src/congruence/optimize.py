"""Finite-dimensional search for critical points of W and W'.

A ProfileFamily maps a parameter vector to an immersion chart (perturbed
distance spheres in S^3 or H^3, product tori). ``minimize`` runs a
Nelder-Mead simplex followed by an optional finite-difference Newton polish
with backtracking, recording every evaluation; ``certify_critical`` couples the
harmonicity residual with sampled Hamiltonian first variations.
"""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.optimize import minimize as scipy_minimize

from .errors import GeometryError, NoFeasibleStart
from .functionals import evaluate_functional
from .gauss_map import gauss
from .hminimality import CriticalityReport, first_variation, hminimal_residual
from .hypersurface import ImmersionChart, Surface, analyze
from .surfaces import perturbed_sphere, product_torus
from .variations import random_bump

DEFAULT_BUDGET = 120
GUARD = 1e-3


@dataclass(eq=False)
class ProfileFamily:
    name: str
    builder: Callable[[np.ndarray], ImmersionChart]
    lower: np.ndarray
    upper: np.ndarray
    labels: tuple[str, ...]
    guard: float = GUARD  # minimum relative |det g| off the coordinate poles
    params: dict = field(default_factory=dict)

    @property
    def dim(self) -> int:
        return len(self.lower)

    @property
    def width(self) -> np.ndarray:
        return self.upper - self.lower

    def in_box(self, theta) -> bool:
        theta = np.asarray(theta, dtype=float)
        return bool(np.all(theta >= self.lower) and np.all(theta <= self.upper))

    def build(self, theta) -> ImmersionChart:
        return self.builder(np.asarray(theta, dtype=float))


def perturbed_sphere_family(r: float = 0.7, degrees=(2, 4), bound: float = 0.3, resolution: int = 24,
                            space: str = "S3", guard: float = GUARD) -> ProfileFamily:
    """Zonal distance-sphere profiles r + sum_m theta_m P_m(sin latitude)."""
    degrees = tuple(int(m) for m in degrees)

    def builder(theta):
        return perturbed_sphere(r, resolution=resolution, space=space,
                                coeffs={m: float(c) for m, c in zip(degrees, theta)})

    m = len(degrees)
    return ProfileFamily(f"perturbed_sphere[{space}]", builder, np.full(m, -bound), np.full(m, bound),
                         tuple(f"c{d}" for d in degrees), guard,
                         {"r": r, "degrees": list(degrees), "bound": bound, "resolution": resolution, "space": space})


def product_torus_family(lower: float = 0.2, upper: float = math.pi / 2 - 0.2, resolution: int = 24,
                         guard: float = GUARD) -> ProfileFamily:
    """Product tori S^1(cos a) x S^1(sin a) parameterized by a."""

    def builder(theta):
        return product_torus(float(theta[0]), resolution=resolution)

    return ProfileFamily("product_torus", builder, np.array([lower]), np.array([upper]), ("a",), guard,
                         {"lower": lower, "upper": upper, "resolution": resolution})


FAMILIES = {
    "perturbed_sphere": perturbed_sphere_family,
    "hyperbolic_perturbed_sphere": lambda **kw: perturbed_sphere_family(**{"r": 0.8, **kw, "space": "H3"}),
    "product_torus": product_torus_family,
}


def make_family(name: str, **params) -> ProfileFamily:
    try:
        return FAMILIES[name](**params)
    except KeyError:
        raise ValueError(f"unknown family {name!r}; known: {', '.join(sorted(FAMILIES))}") from None


def immersion_margin(surface: Surface) -> float:
    """Smallest |det g| relative to the largest, over nodes off the end rows of polar axes.

    Returns 0 if any such node lost rank (the pole rows collapse by design).
    """
    grid = surface.chart.grid
    keep = np.ones(grid.shape, dtype=bool)
    for axis, pol in enumerate(grid.polar):
        if pol:
            idx = [slice(None)] * grid.n
            for end in (0, -1):
                idx[axis] = end
                keep[tuple(idx)] = False
    if not np.all(surface.forms.valid[keep]):
        return 0.0
    det = np.abs(np.linalg.det(surface.forms.g))[keep]
    return float(np.min(det) / np.max(det))


@dataclass(eq=False)
class Evaluation:
    theta: np.ndarray
    value: float  # +inf when infeasible
    report: CriticalityReport | None
    feasible: bool
    reason: str = ""

    @property
    def residual(self) -> float:
        return self.report.sup if self.report is not None else math.inf

    @property
    def certified(self) -> bool:
        return self.report is not None and self.report.certified


def evaluate(family: ProfileFamily, theta, which: str = "W", rel_tol: float = 1e-6) -> Evaluation:
    """Score one parameter vector; infeasible points get +inf."""
    theta = np.array(theta, dtype=float)
    if not family.in_box(theta):
        return Evaluation(theta, math.inf, None, False, "outside box")
    try:
        surface = analyze(family.build(theta))
        margin = immersion_margin(surface)
        if margin < family.guard:
            return Evaluation(theta, math.inf, None, False, f"immersion margin {margin:.3g}")
        fld = gauss(surface)
        value = evaluate_functional(surface, which).value
        report = hminimal_residual(fld, rel_tol)
    except GeometryError as exc:
        return Evaluation(theta, math.inf, None, False, f"{type(exc).__name__}: {exc}")
    return Evaluation(theta, float(value), report, True)


@dataclass(eq=False)
class TraceEntry:
    theta: list[float]
    value: float
    residual: float
    accepted: bool
    phase: str


@dataclass(eq=False)
class SearchTrace:
    family: str
    functional: str
    entries: list[TraceEntry] = field(default_factory=list)
    reason: str = ""
    best: Evaluation | None = None

    def record(self, ev: Evaluation, phase: str) -> bool:
        accepted = ev.feasible and (self.best is None or ev.value <= self.best.value)
        self.entries.append(TraceEntry([float(t) for t in ev.theta], ev.value, ev.residual, accepted, phase))
        if accepted:
            self.best = ev
        return accepted

    @property
    def evaluations(self) -> int:
        return len(self.entries)

    def accepted_values(self) -> list[float]:
        return [e.value for e in self.entries if e.accepted]

    def to_dict(self) -> dict:
        b = self.best
        return {
            "family": self.family,
            "functional": self.functional,
            "termination": self.reason,
            "evaluations": self.evaluations,
            "best": None if b is None else {"theta": [float(t) for t in b.theta], "value": b.value,
                                            "residual_sup": b.residual, "certified": b.certified},
            "iterates": [{"theta": e.theta, "value": _finite(e.value), "residual_sup": _finite(e.residual),
                          "accepted": e.accepted, "phase": e.phase} for e in self.entries],
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        m = len(self.entries[0].theta) if self.entries else 0
        w.writerow(["step", "phase"] + [f"theta{i}" for i in range(m)] + ["value", "residual_sup", "accepted"])
        for i, e in enumerate(self.entries):
            w.writerow([i, e.phase] + [repr(t) for t in e.theta] + [repr(e.value), repr(e.residual), int(e.accepted)])
        return buf.getvalue()


def _finite(x: float):
    return x if math.isfinite(x) else None


class _Stop(Exception):
    pass


def _initial_simplex(family: ProfileFamily, theta0, scale: float):
    pts = [theta0.copy()]
    for i in range(family.dim):
        p = theta0.copy()
        step = scale * family.width[i]
        p[i] = p[i] + step if p[i] + step <= family.upper[i] else p[i] - step
        pts.append(p)
    return np.array(pts)


def _fd_newton_direction(f, theta, value, delta):
    """Newton direction from finite differences (gradient direction if the Hessian is not positive).

    The gradient uses the fourth-order five-point stencil, so the polish can
    resolve the minimizer well below the step size; the Hessian only affects
    the rate and uses the three-point stencil.
    """
    m = len(theta)
    E = np.eye(m) * delta[:, None]
    fp = [f(theta + E[i]) for i in range(m)]
    fm = [f(theta - E[i]) for i in range(m)]
    fp2 = [f(theta + 2 * E[i]) for i in range(m)]
    fm2 = [f(theta - 2 * E[i]) for i in range(m)]
    g = np.array([(fm2[i] - 8 * fm[i] + 8 * fp[i] - fp2[i]) / (12 * delta[i]) for i in range(m)])
    H = np.zeros((m, m))
    for i in range(m):
        H[i, i] = (fp[i] - 2 * value + fm[i]) / delta[i] ** 2
        for j in range(i + 1, m):
            fpp = f(theta + E[i] + E[j])
            fmm = f(theta - E[i] - E[j])
            H[i, j] = H[j, i] = (fpp - fp[i] - fp[j] + 2 * value - fm[i] - fm[j] + fmm) / (2 * delta[i] * delta[j])
    if not np.all(np.isfinite(g)) or not np.all(np.isfinite(H)):
        return None
    try:
        if np.all(np.linalg.eigvalsh(H) > 0):
            return -np.linalg.solve(H, g)
    except np.linalg.LinAlgError:
        pass
    return -g


def minimize(family: ProfileFamily, theta0, which: str = "W", budget: int | None = None, polish: bool = True,
             rel_tol: float = 1e-6, simplex_scale: float = 0.05, fd_step: float = 1e-4,
             max_halvings: int = 30, fatol: float = 1e-8) -> SearchTrace:
    """Descend ``which`` over the family from theta0.

    Stops when an evaluation is certified by the harmonicity residual, when the
    evaluation budget is spent, or when neither phase makes progress. Every
    evaluation is recorded; an entry is accepted when it does not increase the
    best value so far, so accepted values are non-increasing.
    """
    budget = DEFAULT_BUDGET if budget is None else int(budget)
    theta0 = np.array(theta0, dtype=float)
    trace = SearchTrace(family.name, which)
    ev0 = evaluate(family, theta0, which, rel_tol)
    if not ev0.feasible:
        raise NoFeasibleStart(f"start {theta0.tolist()} is infeasible ({ev0.reason})")
    trace.record(ev0, "start")
    if ev0.certified:
        trace.reason = "certified"
        return trace
    if budget <= 0:
        trace.reason = "budget"
        return trace

    phase = ["simplex"]

    def f(theta):
        if trace.evaluations >= budget + 1:
            trace.reason = "budget"
            raise _Stop
        ev = evaluate(family, theta, which, rel_tol)
        trace.record(ev, phase[0])
        if ev.certified and ev.value <= trace.best.value:
            trace.reason = "certified"
            raise _Stop
        return ev.value

    try:
        scipy_minimize(f, theta0, method="Nelder-Mead",
                       options={"initial_simplex": _initial_simplex(family, theta0, simplex_scale),
                                "maxfev": budget, "xatol": fd_step * float(np.min(family.width)),
                                "fatol": fatol})
        if not polish:
            trace.reason = "converged"
            return trace
        phase[0] = "polish"
        delta = fd_step * family.width
        while True:
            best = trace.best
            d = _fd_newton_direction(f, best.theta, best.value, delta)
            if d is None or np.all(np.abs(d) <= 1e-14 * family.width):
                break
            t, improved = 1.0, False
            for _ in range(max_halvings):
                cand = best.theta + t * d
                if family.in_box(cand):
                    before = trace.best
                    f(cand)
                    if trace.best is not before and trace.best.value < before.value:
                        improved = True
                        break
                t *= 0.5
            if not improved:
                break
        trace.reason = "stalled"
    except _Stop:
        pass
    return trace


def certify_critical(family_or_chart, theta=None, tol: float | None = None, which: str = "W",
                     n_bumps: int = 20, seed: int = 0, fv_tol: float = 1e-6, rel_tol: float = 1e-6,
                     workers: int = 1) -> tuple[bool, CriticalityReport]:
    """Residual certificate plus seeded Hamiltonian first variations.

    True iff the harmonicity residual is below ``tol`` (default: the scale-aware
    threshold) and every sampled |d/dt functional| is below ``fv_tol``.
    """
    chart = family_or_chart.build(theta) if isinstance(family_or_chart, ProfileFamily) else family_or_chart
    report = hminimal_residual(gauss(analyze(chart)), rel_tol)
    thr = report.threshold if tol is None else float(tol)
    rng = np.random.default_rng(seed)
    bumps = [random_bump(chart, rng) for _ in range(n_bumps)]

    def one(u_fn):
        return first_variation(chart, u_fn, which)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            values = list(pool.map(one, bumps))
    else:
        values = [one(b) for b in bumps]
    report.first_variations = [(f"bump{i}", float(v)) for i, v in enumerate(values)]
    ok = report.sup < thr and all(abs(v) <= fv_tol for v in values)
    report.certified = bool(ok)
    report.threshold = thr
    return bool(ok), report
