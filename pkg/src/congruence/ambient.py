"""Pseudo-Euclidean linear algebra on R^{n+2} and its second exterior power.

Vectors are plain numpy arrays whose last axis has length ``sig.dim``; every
pairing broadcasts over leading axes so grid fields can be handled in one call.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import DegenerateSubspace, DimensionMismatch

DEFAULT_TOL = 1e-10


@dataclass(frozen=True)
class Signature:
    """``p`` minus signs followed by ``dim - p`` plus signs."""

    p: int
    dim: int

    def __post_init__(self):
        if not 0 <= self.p <= self.dim:
            raise ValueError(f"need 0 <= p <= dim, got p={self.p}, dim={self.dim}")

    @cached_property
    def eta(self) -> np.ndarray:
        return np.concatenate([-np.ones(self.p), np.ones(self.dim - self.p)])

    def basis(self, i: int) -> np.ndarray:
        e = np.zeros(self.dim)
        e[i] = 1.0
        return e


def _check(sig: Signature, *arrays):
    for a in arrays:
        if np.shape(a)[-1] != sig.dim:
            raise DimensionMismatch(f"expected last axis {sig.dim}, got shape {np.shape(a)}")


def inner(u, v, sig: Signature):
    """<u, v>_p, broadcasting over leading axes."""
    _check(sig, u, v)
    return np.sum(sig.eta * np.asarray(u) * np.asarray(v), axis=-1)


def lower(v, sig: Signature):
    """Index-lowered vector: the Euclidean covector w with w.x = <v, x>_p."""
    return sig.eta * np.asarray(v)


@dataclass(frozen=True)
class Bivector:
    matrix: np.ndarray
    factors: tuple[np.ndarray, np.ndarray] | None = None

    def __post_init__(self):
        m = np.asarray(self.matrix)
        if m.shape[-1] != m.shape[-2]:
            raise DimensionMismatch("bivector matrix must be square")
        if np.any(m + np.swapaxes(m, -1, -2)):
            raise ValueError("bivector matrix must be exactly antisymmetric")

    def __add__(self, other: Bivector) -> Bivector:
        return Bivector(self.matrix + other.matrix)

    def __sub__(self, other: Bivector) -> Bivector:
        return Bivector(self.matrix - other.matrix)

    def __mul__(self, c: float) -> Bivector:
        return Bivector(c * self.matrix)

    __rmul__ = __mul__

    def __neg__(self) -> Bivector:
        return Bivector(-self.matrix)


def wedge_matrix(x, y):
    """x_i y_j - y_i x_j, broadcasting over leading axes."""
    x = np.asarray(x)
    y = np.asarray(y)
    if x.shape[-1] != y.shape[-1]:
        raise DimensionMismatch("wedge factors must have the same dimension")
    return x[..., :, None] * y[..., None, :] - y[..., :, None] * x[..., None, :]


def wedge(x, y) -> Bivector:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return Bivector(wedge_matrix(x, y), factors=(x, y))


def bivector_inner_matrix(a, b, sig: Signature):
    """Flat metric on antisymmetric matrices (bilinear extension of the Gram determinant)."""
    eta = sig.eta
    return 0.5 * np.einsum("...ij,i,j,...ij->...", np.asarray(a), eta, eta, np.asarray(b))


def bivector_inner(a: Bivector, b: Bivector, sig: Signature) -> float:
    if a.matrix.shape[-1] != sig.dim or b.matrix.shape[-1] != sig.dim:
        raise DimensionMismatch("bivector dimension does not match signature")
    return float(bivector_inner_matrix(a.matrix, b.matrix, sig))


def orthonormalize(basis, sig: Signature, tol: float = DEFAULT_TOL):
    """Signature-aware modified Gram-Schmidt.

    Returns the orthonormal vectors and their signs <v_i, v_i> = +-1. A vector
    whose squared norm drops below ``tol`` after projection marks a null
    direction and raises DegenerateSubspace.
    """
    out, signs = [], []
    for v in basis:
        w = np.array(v, dtype=float)
        _check(sig, w)
        for o, s in zip(out, signs):
            w = w - s * inner(w, o, sig) * o
        q = inner(w, w, sig)
        if abs(q) < tol:
            raise DegenerateSubspace(f"squared norm {q:.3e} below tolerance {tol:.1e}")
        out.append(w / np.sqrt(abs(q)))
        signs.append(1 if q > 0 else -1)
    return out, signs


def orthogonal_complement(x, y, sig: Signature, tol: float = DEFAULT_TOL):
    """Orthonormal basis (and signs) of span{x, y}^perp.

    Candidates are the standard basis vectors, tried in order of how much of
    them survives projection, which keeps the choice well conditioned.
    """
    (ox, oy), (sx, sy) = orthonormalize([x, y], sig, tol)
    dim = sig.dim

    def project(v, frame, frame_signs):
        for o, s in zip(frame, frame_signs):
            v = v - s * inner(v, o, sig) * o
        return v

    frame, frame_signs = [ox, oy], [sx, sy]
    out, signs = [], []
    remaining = list(range(dim))
    while len(out) < dim - 2:
        best, best_q, best_i = None, 0.0, None
        for i in remaining:
            w = project(sig.basis(i), frame, frame_signs)
            q = inner(w, w, sig)
            if abs(q) > abs(best_q):
                best, best_q, best_i = w, q, i
        if best is None or abs(best_q) < tol:
            raise DegenerateSubspace("complement contains a null direction")
        remaining.remove(best_i)
        v = best / np.sqrt(abs(best_q))
        s = 1 if best_q > 0 else -1
        frame.append(v)
        frame_signs.append(s)
        out.append(v)
        signs.append(s)
    return out, signs


def random_isometry(sig: Signature, rng: np.random.Generator, scale: float = 0.5) -> np.ndarray:
    """exp of a random element of so(p, dim - p); preserves <.,.>_p exactly up to roundoff."""
    from scipy.linalg import expm

    k = rng.normal(scale=scale, size=(sig.dim, sig.dim))
    k = k - k.T
    return expm(sig.eta[:, None] * k)
