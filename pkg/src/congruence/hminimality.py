"""Hamiltonian minimality of Gauss maps.

The mean curvature of the Gauss map is H = -(eps/n) JJ grad u for the potential
u = sum_i tan_eps^{-1}(k_i), so Phi is Hamiltonian minimal exactly when u is
harmonic for Phi*G. This module computes u, its differential, the
Laplace-Beltrami residual, and first variations of W along Hamiltonian
deformations as an independent check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .ambient import bivector_inner_matrix
from .errors import HorosphericalSingularity, SingularMetric
from .functionals import evaluate_functional, quadrature
from .gauss_map import GaussMapField, gauss
from .geodesic_space import bigJ_slots
from .hypersurface import ImmersionChart, Surface, analyze, gradient_field, hessian_field, shrink_mask
from .numerics import csum

HORO_TOL = 1e-8


def arctan_eps(k, eps: int):
    """tan_eps^{-1}: arctan for eps = 1; artanh for |k| < 1 and arcoth for |k| > 1 when eps = -1."""
    k = np.asarray(k, dtype=float)
    if eps == 1:
        return np.arctan(k)
    small = np.abs(k) < 1
    safe_small = np.where(small, k, 0.0)
    safe_big = np.where(small, 2.0, k)
    with np.errstate(divide="ignore"):
        return np.where(small, np.arctanh(safe_small), np.arctanh(1.0 / safe_big))


@dataclass(eq=False)
class Potential:
    u: np.ndarray
    du: np.ndarray  # coordinate one-form [..., a]
    mask: np.ndarray


def potential(surface, tol: float = HORO_TOL) -> Potential:
    """u = sum tan_eps^{-1}(k_i) and du = tr((I + eps A^2)^{-1} dA).

    The trace equals sum_i dk_i / (1 + eps k_i^2) wherever A is diagonalizable
    and needs no branch choice. dA is taken by grid differences of the
    coordinate shape operator.
    """
    s = surface if isinstance(surface, Surface) else analyze(surface)
    eps = s.cfg.epsilon
    spec = s.spectrum
    n = s.chart.grid.n
    mask = spec.diagonalizable
    if eps == -1 and np.any(mask & np.any(np.abs(np.abs(spec.k) - 1.0) < tol, axis=-1)):
        raise HorosphericalSingularity("a principal curvature has |k| = 1 with eps = -1")
    u = np.where(mask, np.sum(arctan_eps(spec.k, eps), axis=-1), 0.0)
    A = s.forms.A
    M = np.eye(n) + eps * A @ A
    Minv = np.linalg.inv(np.where(mask[..., None, None], M, np.eye(n)))
    dA = gradient_field(A, s.chart.grid)  # [..., a, i, j] after the grid axes
    dA = np.moveaxis(dA, s.chart.grid.n, -3)
    du = np.einsum("...ij,...aji->...a", Minv, dA)
    live = shrink_mask(mask, s.chart.grid)
    return Potential(u, np.where(live[..., None], du, 0.0), live)


def laplacian(du, gram, grid, mask=None) -> tuple[np.ndarray, np.ndarray]:
    """Divergence-form Laplace-Beltrami of a function with differential ``du``.

    (1/sqrt|det G|) d_a (sqrt|det G| G^{ab} du_b), signed inverse, centered
    differences. Returns (field, mask); nodes whose stencil meets a masked or
    sign-changing det G are masked.
    """
    n = grid.n
    det = np.linalg.det(gram)
    good = np.abs(det) > 1e-12 * np.max(np.abs(det))
    if mask is not None:
        good &= mask
    if not np.any(good):
        raise SingularMetric("induced metric is singular on the whole grid")
    sgn = np.sign(np.median(np.sign(det[good])))
    good &= np.sign(det) == sgn
    G = np.where(good[..., None, None], gram, np.eye(n))
    Gi = np.linalg.inv(G)
    vol = np.sqrt(np.abs(np.linalg.det(G)))
    flux = vol[..., None] * np.einsum("...ab,...b->...a", Gi, du)
    div = sum(np.take(gradient_field(flux[..., a], grid), a, axis=-1) for a in range(n))
    live = shrink_mask(good, grid)
    return np.where(live, div / vol, 0.0), live


def laplacian_of_field(u, gram, grid, mask=None):
    """Laplace-Beltrami of a scalar node field (differential by grid differences)."""
    return laplacian(gradient_field(u, grid), gram, grid, mask)


@dataclass(eq=False)
class MeanCurvature:
    X: np.ndarray  # slots of H at each node
    Y: np.ndarray
    mask: np.ndarray


def mean_curvature_gauss(field: GaussMapField, pot: Potential | None = None) -> MeanCurvature:
    """H = -(eps/n) JJ grad u, with grad u the Phi*G gradient, in slots.

    The sign matches the extrinsic mean curvature of Phi computed by brute
    force (see ``mean_curvature_extrinsic``) under the orientation conventions
    of this package.
    """
    pot = potential(field.surface) if pot is None else pot
    eps, n = field.cfg.epsilon, field.grid.n
    mask = field.valid & pot.mask
    Gi = np.linalg.inv(np.where(mask[..., None, None], field.gram_G, np.eye(n)))
    grad = np.einsum("...ab,...b->...a", Gi, pot.du)
    gX = np.einsum("...a,...ad->...d", grad, field.X)
    gY = np.einsum("...a,...ad->...d", grad, field.Y)
    JX, JY = bigJ_slots(gX, gY, eps)
    c = -eps / n
    return MeanCurvature(np.where(mask[..., None], c * JX, 0.0), np.where(mask[..., None], c * JY, 0.0), mask)


def mean_curvature_extrinsic(field: GaussMapField) -> MeanCurvature:
    """Brute-force mean curvature of Phi from grid second derivatives of phi ^ N.

    The second derivatives are projected on the normal space span{JJ Xbar_c}
    with the flat bivector metric (which restricts to G), and traced with the
    inverse of Phi*G.
    """
    eps, sig, n = field.cfg.epsilon, field.cfg.sig, field.grid.n
    D2 = hessian_field(field.bivectors(), field.grid)  # [..., a, b, i, j]
    JX, JY = bigJ_slots(field.X, field.Y, eps)
    nu = np.einsum("...i,...cj->...cij", field.x, JX) - np.einsum("...j,...ci->...cij", field.x, JX)
    nu = nu + np.einsum("...i,...cj->...cij", field.y, JY) - np.einsum("...j,...ci->...cij", field.y, JY)
    mask = field.valid
    Gi = np.linalg.inv(np.where(mask[..., None, None], field.gram_G, np.eye(n)))
    Nn = bivector_inner_matrix(nu[..., :, None, :, :], nu[..., None, :, :, :], sig)
    Ni = np.linalg.inv(np.where(mask[..., None, None], Nn, np.eye(n)))
    proj = bivector_inner_matrix(D2[..., :, :, None, :, :], nu[..., None, None, :, :, :], sig)  # [..., a, b, c]
    traced = np.einsum("...ab,...abc->...c", Gi, proj) / n
    coef = np.einsum("...cd,...c->...d", Ni, traced)
    HX = np.einsum("...d,...dk->...k", coef, JX)
    HY = np.einsum("...d,...dk->...k", coef, JY)
    return MeanCurvature(np.where(mask[..., None], HX, 0.0), np.where(mask[..., None], HY, 0.0), mask)


@dataclass(eq=False)
class CriticalityReport:
    u: np.ndarray
    du: np.ndarray
    residual: np.ndarray  # Laplacian of u for Phi*G
    mask: np.ndarray
    sup: float
    l2: float
    du_sup: float
    threshold: float
    certified: bool
    first_variations: list = field(default_factory=list)  # (variation id, dW/dt)

    def to_dict(self) -> dict:
        return {
            "residual_sup": self.sup,
            "residual_l2": self.l2,
            "du_sup": self.du_sup,
            "threshold": self.threshold,
            "certified": self.certified,
            "masked_fraction": float(1.0 - np.mean(self.mask)),
            "first_variations": [[str(k), float(v)] for k, v in self.first_variations],
        }


def certificate_threshold(du_sup: float, rel: float = 1e-6) -> float:
    return rel * (1.0 + du_sup)


def hminimal_residual(field_or_surface, rel_tol: float = 1e-6) -> CriticalityReport:
    """Harmonicity residual of the potential; certified when sup|Laplacian u| < rel_tol (1 + sup|du|)."""
    fld = field_or_surface if isinstance(field_or_surface, GaussMapField) else gauss(field_or_surface)
    pot = potential(fld.surface)
    res, live = laplacian(pot.du, fld.gram_G, fld.grid, fld.valid & pot.mask)
    m = live
    sup = float(np.max(np.abs(res[m]))) if np.any(m) else 0.0
    du_sup = float(np.max(np.abs(pot.du[m]))) if np.any(m) else 0.0
    # L2 norm with respect to the Gauss-map volume
    W, _ = quadrature(fld.grid)
    vol = np.sqrt(np.abs(np.linalg.det(fld.gram_G)))
    l2 = math.sqrt(max(csum(np.where(m, res * res * vol * W, 0.0)), 0.0))
    thr = certificate_threshold(du_sup, rel_tol)
    return CriticalityReport(pot.u, pot.du, res, m, sup, l2, du_sup, thr, sup < thr)


def first_variation(chart: ImmersionChart, u_fn, which: str = "W", h_t: float = 1e-3,
                    collar: int = 2) -> float:
    """d/dt at t = 0 of a functional along the Hamiltonian variation generated by u.

    Five-point central difference in t; the surfaces phi_t are analyzed with
    closed-form jets on the base grid.
    """
    from .variations import make_hamiltonian_variation

    fam = make_hamiltonian_variation(chart, u_fn, h_t=h_t, collar=collar)
    vals = {}
    for k in (-2, -1, 1, 2):
        vals[k] = evaluate_functional(analyze(fam.at(k * h_t)), which).value
    return (vals[-2] - 8 * vals[-1] + 8 * vals[1] - vals[2]) / (12 * h_t)


def weighted_residual(report: CriticalityReport, field: GaussMapField, f) -> float:
    """int f * Laplacian(u) dvol_Phi over valid nodes (integration-by-parts comparison)."""
    W, _ = quadrature(field.grid)
    vol = np.sqrt(np.abs(np.linalg.det(field.gram_G)))
    return csum(np.where(report.mask, f * report.residual * vol * W, 0.0))
