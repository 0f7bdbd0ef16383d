import numpy as np
import pytest

from congruence.ambient import bivector_inner_matrix
from congruence.errors import BasePointMismatch, NotOnQuadric, WrongCausalType
from congruence.geodesic_space import (
    SpaceFormConfig,
    bigJ,
    chart,
    closedness_residual,
    make_geodesic,
    metric_G,
    omega,
    random_geodesic,
    random_tangent,
    scalar_curvature_numeric,
    signature_of,
    slots_from_bivector,
)
from congruence.suites import STRUCTURE_CONFIGS, structure_identities

from oracles import scalar_curvature_target


def test_config_validation():
    SpaceFormConfig(2, 0, 1)
    with pytest.raises(ValueError):
        SpaceFormConfig(2, 0, -1)  # no timelike directions in the round sphere
    with pytest.raises(ValueError):
        SpaceFormConfig(2, 0, 2)


def test_make_geodesic_errors():
    cfg = SpaceFormConfig(2, 0, 1)
    with pytest.raises(NotOnQuadric):
        make_geodesic([2.0, 0, 0, 0], [0, 1.0, 0, 0], cfg)
    with pytest.raises(NotOnQuadric):
        make_geodesic([1.0, 0, 0, 0], [1.0, 1.0, 0, 0], cfg)
    with pytest.raises(WrongCausalType):
        make_geodesic([0, 0, 0, 1.0], [1.0, 0, 0, 0], SpaceFormConfig(2, 1, 1))


@pytest.mark.parametrize("label", sorted(STRUCTURE_CONFIGS))
def test_structure_identities_small_sweep(label):
    worst = structure_identities(STRUCTURE_CONFIGS[label], n_samples=50, seed=3)
    assert max(worst.values()) <= 1e-10, worst


@pytest.mark.parametrize("label", sorted(STRUCTURE_CONFIGS))
def test_metric_is_flat_bivector_metric(label):
    cfg = STRUCTURE_CONFIGS[label]
    rng = np.random.default_rng(0)
    g = random_geodesic(cfg, rng)
    t1, t2 = random_tangent(g, rng), random_tangent(g, rng)
    raw = bivector_inner_matrix(t1.bivector, t2.bivector, cfg.sig)
    assert metric_G(t1, t2) == pytest.approx(float(raw), abs=1e-12)


def test_slots_round_trip():
    cfg = SpaceFormConfig(2, 1, -1)
    rng = np.random.default_rng(2)
    g = random_geodesic(cfg, rng)
    t = random_tangent(g, rng)
    X, Y = slots_from_bivector(t.bivector, g.x, g.y, cfg.epsilon, cfg.sig)
    assert np.allclose(X, t.X, atol=1e-12) and np.allclose(Y, t.Y, atol=1e-12)


def test_base_point_mismatch():
    cfg = SpaceFormConfig(2, 0, 1)
    rng = np.random.default_rng(0)
    g1, g2 = random_geodesic(cfg, rng), random_geodesic(cfg, rng)
    with pytest.raises(BasePointMismatch):
        metric_G(random_tangent(g1, rng), random_tangent(g2, rng))


@pytest.mark.parametrize("label", sorted(STRUCTURE_CONFIGS))
def test_scalar_curvature_and_flat_gprime(label):
    cfg = STRUCTURE_CONFIGS[label]
    ch = chart(random_geodesic(cfg, np.random.default_rng(5)))
    target = scalar_curvature_target(cfg.epsilon, cfg.n)
    assert scalar_curvature_numeric(ch, "G", 1e-2) == pytest.approx(target, rel=1e-3)
    assert abs(scalar_curvature_numeric(ch, "Gprime", 1e-2)) < 1e-8
    assert closedness_residual(ch) < 1e-10


@pytest.mark.parametrize("label,expected", [("L+(S3)", (4, 0)), ("L-(S3_1)", (2, 2)), ("L+(S3_1)", (2, 2))])
def test_metric_signature(label, expected):
    cfg = STRUCTURE_CONFIGS[label]
    ch = chart(random_geodesic(cfg, np.random.default_rng(0)))
    assert signature_of(ch.gram(np.zeros(4))) == expected


@pytest.mark.parametrize("label", sorted(STRUCTURE_CONFIGS))
def test_omega_of_j_pair_is_metric(label):
    # direct slot formula <X1, Y2> - <Y1, X2>, independent of the G-based definition
    cfg = STRUCTURE_CONFIGS[label]
    rng = np.random.default_rng(4)
    g = random_geodesic(cfg, rng)
    t = random_tangent(g, rng)
    jt = bigJ(t)
    e = cfg.sig.eta
    direct = np.sum(e * t.X * jt.Y) - np.sum(e * t.Y * jt.X)
    assert direct == pytest.approx(metric_G(t, t), abs=1e-12)
    assert omega(t, t) == pytest.approx(0.0, abs=1e-14)
