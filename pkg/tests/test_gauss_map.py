import math

import numpy as np
import pytest

from congruence import surfaces
from congruence.ambient import bivector_inner_matrix, wedge_matrix
from congruence.errors import UmbilicDegeneracy
from congruence.gauss_map import (
    gauss,
    gprime_flatness_residual,
    induced_G,
    induced_Gprime,
    lagrangian_residual,
    pushforward,
    quadric_check,
)
from congruence.hypersurface import analyze

SMALL = [
    ("clifford_torus", {}),
    ("product_torus", {"a": math.pi / 6}),
    ("geodesic_sphere", {"r": 0.7}),
    ("perturbed_sphere", {}),
    ("perturbed_torus", {}),
    ("hyperbolic_geodesic_sphere", {"r": 0.8}),
    ("hyperbolic_tube", {"r": 0.8}),
]


@pytest.fixture(scope="module", params=SMALL, ids=[n for n, _ in SMALL])
def field(request):
    name, params = request.param
    return gauss(analyze(surfaces.examples(name, resolution=12, **params)))


def test_lagrangian_and_quadric(field):
    assert lagrangian_residual(field) <= 1e-10
    assert quadric_check(field) <= 1e-10


def test_gram_matches_raw_bivectors(field):
    # Phi*G from slots equals the flat bivector metric of the raw tangent bivectors
    x, y = field.x[..., None, :], field.y[..., None, :]
    raw = wedge_matrix(x, field.X) + wedge_matrix(y, field.Y)
    gram = bivector_inner_matrix(raw[..., :, None, :, :], raw[..., None, :, :, :], field.cfg.sig)
    m = field.valid
    assert np.max(np.abs(gram - field.gram_G)[m]) < 1e-10


def test_induced_G(field):
    ig = induced_G(field)
    assert ig.identity_deviation <= 1e-10
    assert ig.principal_deviation <= 1e-10


def test_fd_mode_close_to_formula(field):
    fd = gauss(field.surface, mode="fd")
    m = field.valid & fd.valid
    assert np.max(np.abs(fd.X - field.X)[m]) < 0.2


def test_induced_Gprime_on_non_umbilic():
    fld = gauss(analyze(surfaces.perturbed_torus(resolution=12)))
    ig = induced_Gprime(fld)
    assert ig.principal_deviation <= 1e-10


def test_umbilic_sphere_rejects_gprime():
    fld = gauss(analyze(surfaces.geodesic_sphere(0.7, resolution=12)))
    with pytest.raises(UmbilicDegeneracy):
        induced_Gprime(fld)
    with pytest.raises(UmbilicDegeneracy):
        gprime_flatness_residual(fld)


def test_single_node_pushforward():
    s = analyze(surfaces.perturbed_torus(resolution=8))
    _, dphi, _ = s.chart.jets
    idx = (3, 5)
    t = pushforward(s.chart.values[idx], s.normal.N[idx], dphi[idx], s.forms.A[idx], [1.0, 0.0], s.cfg)
    fld = gauss(s)
    assert np.allclose(t.X, fld.X[idx][0], atol=1e-12) and np.allclose(t.Y, fld.Y[idx][0], atol=1e-12)


def test_signature_of_gauss_metric():
    # for the round sphere, Phi*G = (1 + k^2) g is positive definite
    fld = gauss(analyze(surfaces.geodesic_sphere(0.7, resolution=8)))
    pos, neg = fld.signature()
    assert np.all(pos[fld.valid] == 2) and np.all(neg[fld.valid] == 0)
