import dataclasses

import numpy as np
import pytest

from congruence import jets, surfaces
from congruence.ambient import random_isometry
from congruence.errors import InadmissibleVariation
from congruence.hypersurface import analyze, isometry_image
from congruence.variations import (
    collar_mask,
    constant_family,
    decompose_velocity,
    hamiltonian_residual,
    isometry_family,
    make_hamiltonian_variation,
    normal_derivative_residual,
    normal_velocity_gauss,
    parallel_family,
    random_bump,
    random_generator_family,
    velocity,
)


@pytest.fixture(scope="module")
def torus():
    return surfaces.clifford_torus(24)


def _without_closed_jets(fam):
    return dataclasses.replace(fam, closed_jets=None, max_closed_order=-1)


@pytest.mark.parametrize("t", [0.0, 0.05, -0.1])
def test_hamiltonian_closed_jets_match_autodiff(torus, t):
    fam = make_hamiltonian_variation(torus, random_bump(torus, np.random.default_rng(1)))
    for a, b in zip(fam.jets_at(t, 2), _without_closed_jets(fam).jets_at(t, 2)):
        assert np.max(np.abs(a - b)) < 1e-12


def test_generator_closed_jets_match_autodiff(torus):
    fam = random_generator_family(torus, np.random.default_rng(3))
    a, b = fam.jets_at(0.07, 1), _without_closed_jets(fam).jets_at(0.07, 1)
    assert np.max(np.abs(a[0] - b[0])) < 1e-12
    assert np.max(np.abs(a[1] - b[1])) < 1e-12


def test_families_stay_on_quadric(torus):
    fam = random_generator_family(torus, np.random.default_rng(4))
    for t in (0.1, 0.3):
        assert fam.at(t).quadric_defect() < 1e-12


def test_velocity_split_of_normal_flow(torus):
    u = random_bump(torus, np.random.default_rng(2))
    fam = make_hamiltonian_variation(torus, u)
    split = decompose_velocity(velocity(fam), analyze(torus))
    uv = jets.evaluate(u, torus.grid.nodes()).reshape(torus.grid.shape)
    assert split.reassembly < 1e-12 and split.tangency < 1e-12
    assert np.max(np.abs(split.f - uv)) < 1e-12
    assert np.max(np.abs(split.Y)) < 1e-12


def test_velocity_split_of_generator(torus):
    fam = random_generator_family(torus, np.random.default_rng(5))
    split = decompose_velocity(velocity(fam), analyze(torus))
    assert split.reassembly < 1e-12 and split.tangency < 1e-12
    assert np.max(np.abs(split.Y)) > 1e-3  # genuinely has a tangential part


def test_exact_velocity_matches_difference(torus):
    fam = random_generator_family(torus, np.random.default_rng(6), h_t=1e-4)
    assert np.max(np.abs(velocity(fam) - velocity(fam, exact=False))) < 1e-6


def test_constant_family_has_zero_residual(torus):
    assert hamiltonian_residual(constant_family(torus)).residual == 0.0


@pytest.mark.parametrize("speed", [1.0, -0.5])
def test_parallel_family_is_exactly_hamiltonian(torus, speed):
    assert hamiltonian_residual(parallel_family(torus, speed=speed)).residual < 1e-12


def test_hamiltonian_residual_is_a_time_truncation(torus):
    fam = random_generator_family(torus, np.random.default_rng(2), h_t=1e-3)
    second = hamiltonian_residual(fam).residual
    fourth = hamiltonian_residual(fam, time_order=4).residual
    assert second < 1e-5
    assert fourth < 1e-9
    assert fourth < second


def test_normal_velocity_and_normal_derivative(torus):
    fam = make_hamiltonian_variation(torus, random_bump(torus, np.random.default_rng(1)), h_t=1e-3)
    assert normal_velocity_gauss(fam).deviation < 1e-6
    assert normal_derivative_residual(fam) < 1e-6


def test_isometry_family_is_hamiltonian():
    # no closed-form normal speed: df comes from grid differences, so the residual is O(h^2)
    K = np.random.default_rng(0).normal(size=(4, 4))
    res = []
    for n in (24, 48):
        fam = isometry_family(surfaces.clifford_torus(n), K - K.T, h_t=1e-4)
        assert fam.at(0.3).quadric_defect() < 1e-12
        res.append(hamiltonian_residual(fam).residual)
    assert res[1] < res[0] / 3.5


def test_isometry_family_rejects_symmetric_generator(torus):
    with pytest.raises(ValueError):
        isometry_family(torus, np.eye(4))


def test_collar_on_tube_boundary():
    tube = surfaces.hyperbolic_tube(0.8, 2.0, 16)
    m = collar_mask(tube, 2)
    assert m.any() and not m.all()
    with pytest.raises(InadmissibleVariation):
        make_hamiltonian_variation(tube, lambda u: 1.0 + 0.0 * u[0])
    fam = make_hamiltonian_variation(tube, random_bump(tube, np.random.default_rng(0)), h_t=1e-3)
    assert hamiltonian_residual(fam).residual < 1e-5


def test_closed_surfaces_have_no_collar():
    assert not collar_mask(surfaces.geodesic_sphere(0.7, 16), 2).any()
    assert not collar_mask(surfaces.clifford_torus(16), 2).any()


def test_hamiltonian_residual_invariant_under_isometry():
    rng = np.random.default_rng(9)
    ch = surfaces.geodesic_sphere(0.7, 16)
    L = random_isometry(ch.cfg.sig, rng)
    a = random_generator_family(ch, np.random.default_rng(1), h_t=1e-3)
    b = random_generator_family(isometry_image(ch, L), np.random.default_rng(1), h_t=1e-3)
    # the random field is drawn in ambient coordinates, so only the magnitudes are comparable
    ra, rb = hamiltonian_residual(a).residual, hamiltonian_residual(b).residual
    assert ra < 1e-4 and rb < 1e-4
    assert hamiltonian_residual(parallel_family(isometry_image(ch, L))).residual < 1e-10
