import csv
import io
import math

import numpy as np
import pytest

from congruence import surfaces
from congruence.ambient import random_isometry
from congruence.errors import NoFeasibleStart
from congruence.hypersurface import analyze, isometry_image
from congruence.optimize import (
    certify_critical,
    evaluate,
    immersion_margin,
    make_family,
    minimize,
    perturbed_sphere_family,
    product_torus_family,
)


@pytest.fixture(scope="module")
def family():
    return perturbed_sphere_family(resolution=12)


def test_family_box(family):
    assert family.dim == 2 and family.labels == ("c2", "c4")
    assert family.in_box([0.3, -0.3]) and not family.in_box([0.31, 0.0])


def test_sphere_value_and_certificate(family):
    ev = evaluate(family, [0.0, 0.0])
    assert ev.feasible
    assert ev.value == pytest.approx(4 * math.pi, abs=1e-10)
    assert ev.residual <= 1e-8 and ev.certified


def test_perturbed_point_not_certified(family):
    ev = evaluate(family, [0.1, 0.0])
    assert ev.feasible and not ev.certified
    assert ev.value > 4 * math.pi


def test_torus_family_is_flat():
    fam = product_torus_family(resolution=12)
    values = [evaluate(fam, [a]).value for a in np.linspace(fam.lower[0], fam.upper[0], 5)]
    assert max(values) - min(values) < 1e-10
    assert values[0] == pytest.approx(4 * math.pi ** 2, abs=1e-10)


def test_infeasible_marker(family):
    ev = evaluate(family, [1.0, 0.0])
    assert not ev.feasible and ev.value == math.inf and ev.reason == "outside box"
    strict = perturbed_sphere_family(resolution=12, guard=1.5)
    ev = evaluate(strict, [0.0, 0.0])
    assert not ev.feasible and "margin" in ev.reason


def test_immersion_margin_of_sphere():
    m = immersion_margin(analyze(surfaces.geodesic_sphere(0.7, 12)))
    assert 0.0 < m < 1.0


def test_no_feasible_start():
    with pytest.raises(NoFeasibleStart):
        minimize(perturbed_sphere_family(resolution=12, guard=1.5), [0.0, 0.0])


def test_critical_start_stops_immediately(family):
    trace = minimize(family, [0.0, 0.0])
    assert trace.reason == "certified" and trace.evaluations == 1


def test_zero_budget(family):
    trace = minimize(family, [0.1, 0.0], budget=0)
    assert trace.reason == "budget" and trace.evaluations == 1


def test_small_budget_trace(family):
    trace = minimize(family, [0.1, 0.05], budget=6)
    assert trace.reason == "budget"
    assert trace.evaluations == 7
    acc = trace.accepted_values()
    assert all(b <= a for a, b in zip(acc, acc[1:]))
    assert trace.best.value == acc[-1]
    d = trace.to_dict()
    assert d["termination"] == "budget" and len(d["iterates"]) == 7
    rows = list(csv.reader(io.StringIO(trace.to_csv())))
    assert len(rows) == 8


def test_minimize_is_deterministic(family):
    a = minimize(family, [0.1, 0.05], budget=6).to_dict()
    b = minimize(family, [0.1, 0.05], budget=6).to_dict()
    assert a == b


def test_certify_sphere_and_reject_torus():
    ok, rep = certify_critical(surfaces.geodesic_sphere(0.7, 16), n_bumps=3)
    assert ok and len(rep.first_variations) == 3
    ok, rep = certify_critical(surfaces.perturbed_torus(resolution=16), n_bumps=2)
    assert not ok and rep.sup > 1e-2


def test_certify_is_isometry_invariant():
    ch = surfaces.geodesic_sphere(0.7, 16)
    L = random_isometry(ch.cfg.sig, np.random.default_rng(3))
    ok, rep = certify_critical(isometry_image(ch, L), n_bumps=2)
    assert ok and rep.sup < 1e-8


def test_certify_family_point_with_threads(family):
    ok1, r1 = certify_critical(family, [0.0, 0.0], n_bumps=2)
    ok2, r2 = certify_critical(family, [0.0, 0.0], n_bumps=2, workers=2)
    assert ok1 and ok2
    assert r1.first_variations == r2.first_variations


def test_make_family():
    assert make_family("product_torus").labels == ("a",)
    assert make_family("hyperbolic_perturbed_sphere", resolution=12).params["space"] == "H3"
    with pytest.raises(ValueError):
        make_family("cube")
