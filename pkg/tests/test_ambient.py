import numpy as np
import pytest

from congruence.ambient import (
    Bivector,
    Signature,
    bivector_inner,
    inner,
    orthogonal_complement,
    orthonormalize,
    random_isometry,
    wedge,
    wedge_matrix,
)
from congruence.errors import DegenerateSubspace, DimensionMismatch

from oracles import gram_det_inner


def test_signature_eta():
    sig = Signature(1, 4)
    assert list(sig.eta) == [-1, 1, 1, 1]
    with pytest.raises(ValueError):
        Signature(5, 4)


def test_inner_broadcasts():
    sig = Signature(1, 4)
    u = np.arange(8.0).reshape(2, 4)
    v = np.ones(4)
    assert np.allclose(inner(u, v, sig), [-0 + 1 + 2 + 3, -4 + 5 + 6 + 7])
    with pytest.raises(DimensionMismatch):
        inner(np.ones(3), np.ones(3), sig)


def test_wedge_antisymmetric():
    rng = np.random.default_rng(1)
    x, y = rng.normal(size=(2, 4))
    m = wedge_matrix(x, y)
    assert np.array_equal(m, -m.T)
    with pytest.raises(ValueError):
        Bivector(np.ones((4, 4)))


@pytest.mark.parametrize("p", [0, 1, 2])
def test_bivector_inner_is_gram_determinant(p):
    rng = np.random.default_rng(p)
    sig = Signature(p, 4)
    for _ in range(20):
        x, y, u, v = rng.normal(size=(4, 4))
        assert bivector_inner(wedge(x, y), wedge(u, v), sig) == pytest.approx(gram_det_inner(x, y, u, v, p), abs=1e-12)


def test_orthonormalize_signs_and_null_direction():
    sig = Signature(1, 3)
    out, signs = orthonormalize([np.array([1.0, 0, 0]), np.array([0.5, 1.0, 0])], sig)
    assert signs == [-1, 1]
    assert abs(inner(out[0], out[1], sig)) < 1e-14
    with pytest.raises(DegenerateSubspace):
        orthonormalize([np.array([1.0, 1.0, 0])], sig)


@pytest.mark.parametrize("p", [0, 1, 3])
def test_orthogonal_complement(p):
    sig = Signature(p, 4)
    rng = np.random.default_rng(p)
    x = rng.normal(size=4)
    y = rng.normal(size=4)
    comp, signs = orthogonal_complement(x, y, sig)
    assert len(comp) == 2
    for c, s in zip(comp, signs):
        assert abs(inner(c, x, sig)) < 1e-10 and abs(inner(c, y, sig)) < 1e-10
        assert inner(c, c, sig) == pytest.approx(s)


def test_random_isometry_preserves_form():
    sig = Signature(1, 4)
    L = random_isometry(sig, np.random.default_rng(0))
    assert np.allclose(L.T @ np.diag(sig.eta) @ L, np.diag(sig.eta), atol=1e-12)
