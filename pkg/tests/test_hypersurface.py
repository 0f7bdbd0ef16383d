import math

import numpy as np
import pytest

from congruence import surfaces
from congruence.ambient import random_isometry
from congruence.errors import UnknownExample
from congruence.hypersurface import (
    Grid,
    analyze,
    intrinsic_curvature,
    isometry_image,
    parallel,
    umbilic_fraction,
)
from congruence.numerics import quadrature_weights

from oracles import hyperbolic_sphere_abs_curvature, sphere_curvatures, torus_curvatures, tube_abs_curvatures


def test_grid_build_and_refine():
    g = Grid.build(("periodic", 0.0, 2 * math.pi, 8), ("polar", -1.0, 1.0, 5))
    assert g.shape == (8, 5) and g.periodic == (True, False) and g.polar == (False, True)
    r = g.refined()
    assert r.shape == (16, 9) and r.polar == g.polar
    assert r.spacing[1] == pytest.approx(g.spacing[1] / 2)
    with pytest.raises(ValueError):
        Grid.build(("bogus", 0, 1, 3))


def test_polar_rule_is_spectral():
    # integrals of G(cos t) sin t over [0, pi] for polynomial G are exact
    n = 17
    w, rule = quadrature_weights(n, math.pi / (n - 1), False, True)
    t = np.linspace(0, math.pi, n)
    assert rule == "polar-sine"
    assert w @ np.sin(t) == pytest.approx(2.0, abs=1e-14)
    assert w @ (np.cos(t) ** 2 * np.sin(t)) == pytest.approx(2 / 3, abs=1e-14)
    assert w @ (np.exp(np.cos(t)) * np.sin(t)) == pytest.approx(math.e - 1 / math.e, abs=1e-13)


@pytest.mark.parametrize("r", [0.3, 0.7, 1.2])
def test_sphere_principal_curvatures(r):
    s = analyze(surfaces.geodesic_sphere(r, resolution=12))
    m = s.spectrum.valid
    assert np.allclose(s.spectrum.k[m], sphere_curvatures(r), atol=1e-10)
    assert umbilic_fraction(s.spectrum) == 1.0
    # the two pole rows collapse and are masked
    assert not np.any(m[0]) and not np.any(m[-1]) and np.all(m[1:-1])


@pytest.mark.parametrize("a", [math.pi / 6, math.pi / 4, math.pi / 3])
def test_torus_principal_curvatures(a):
    s = analyze(surfaces.product_torus(a, resolution=12))
    assert np.allclose(s.spectrum.k, torus_curvatures(a), atol=1e-10)
    assert umbilic_fraction(s.spectrum) == 0.0


def test_hyperbolic_examples():
    s = analyze(surfaces.hyperbolic_geodesic_sphere(0.8, resolution=12))
    m = s.spectrum.valid
    assert np.allclose(np.abs(s.spectrum.k[m]), hyperbolic_sphere_abs_curvature(0.8), atol=1e-10)
    t = analyze(surfaces.hyperbolic_tube(0.8, resolution=12))
    assert np.allclose(np.sort(np.abs(t.spectrum.k), axis=-1)[..., ::-1], tube_abs_curvatures(0.8), atol=1e-10)


def test_gauss_equation():
    # K_intrinsic = 1 + eps k1 k2 for surfaces in space forms of curvature 1
    for ch in (surfaces.perturbed_torus(resolution=16), surfaces.hyperbolic_tube(resolution=16)):
        s = analyze(ch)
        m = s.spectrum.valid
        K = intrinsic_curvature(ch)
        expected = 1 + ch.cfg.epsilon * s.spectrum.k[..., 0] * s.spectrum.k[..., 1]
        assert np.max(np.abs(K[m] - expected[m])) < 1e-8


def test_fd_jets_converge():
    errs = []
    for res in (16, 32):
        ch = surfaces.perturbed_torus(resolution=res)
        k_exact = analyze(ch).spectrum.k
        k_fd = analyze(ch.as_grid()).spectrum.k
        errs.append(np.max(np.abs(k_exact - k_fd)))
    assert errs[0] / errs[1] > 3.5


def test_parallel_shifts_curvature_angle():
    theta = 0.5
    ch = surfaces.product_torus(math.pi / 5, resolution=10)
    s = analyze(ch)
    p = analyze(parallel(ch, s.normal, theta))
    # the parallel normal is d/dtheta of phi_theta
    assert np.allclose(p.normal.N, -math.sin(theta) * ch.values + math.cos(theta) * s.normal.N, atol=1e-12)
    assert np.allclose(np.arctan(p.spectrum.k), np.arctan(torus_curvatures(math.pi / 5)) + theta, atol=1e-10)


def test_isometry_invariance_of_spectrum():
    ch = surfaces.perturbed_sphere(resolution=10)
    L = random_isometry(ch.cfg.sig, np.random.default_rng(0))
    a, b = analyze(ch), analyze(isometry_image(ch, L))
    m = a.spectrum.valid
    assert np.allclose(a.spectrum.k[m], b.spectrum.k[m], atol=1e-9)


def test_unknown_example():
    with pytest.raises(UnknownExample):
        surfaces.examples("klein_bottle")
