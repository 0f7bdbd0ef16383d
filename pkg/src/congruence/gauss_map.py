"""The Gauss map Phi = phi ^ N of a hypersurface into the space of geodesics.

A coordinate direction X of the surface is pushed forward to

    Xbar = dphi(X) ^ N + dphi(AX) ^ phi,

which at the base phi ^ N has slots (-dphi(AX), -dphi(X)). ``mode="fd"``
instead differences the bivector field phi ^ N on the grid and reads the
slots off the result, which is the independent check used for convergence
studies.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ambient import inner, wedge_matrix
from .errors import SingularMetric, SlotMismatch, UmbilicDegeneracy
from .geodesic_space import (
    GeodesicTangent,
    OrientedGeodesic,
    SpaceFormConfig,
    curvature_from_jets,
    jprime_matrix,
    make_geodesic,
    metric_Gprime_slots,
    metric_slots,
    omega_slots,
    slots_from_bivector,
)
from .hypersurface import Surface, analyze, gradient_field, hessian_field, shrink_mask

SLOT_TOL = 1e-10


def _pairs(X, Y):
    """Broadcast slot arrays [..., n, dim] against themselves for Gram matrices."""
    return X[..., :, None, :], Y[..., :, None, :], X[..., None, :, :], Y[..., None, :, :]


@dataclass(eq=False)
class GaussMapField:
    cfg: SpaceFormConfig
    surface: Surface
    x: np.ndarray  # phi
    y: np.ndarray  # N
    X: np.ndarray  # [..., a, dim] slots of the pushforward of d/du_a
    Y: np.ndarray
    gram_G: np.ndarray
    gram_Gprime: np.ndarray | None
    immersed: np.ndarray
    valid: np.ndarray
    mode: str
    slot_defect: float  # max |x^X + y^Y - raw bivector| over valid nodes

    @property
    def grid(self):
        return self.surface.chart.grid

    def bivectors(self) -> np.ndarray:
        return wedge_matrix(self.x, self.y)

    def geodesic(self, idx) -> OrientedGeodesic:
        return OrientedGeodesic(self.x[idx], self.y[idx], self.cfg)

    def pushforwards(self, idx) -> list[GeodesicTangent]:
        base = self.geodesic(idx)
        return [GeodesicTangent(base, self.X[idx][a], self.Y[idx][a]) for a in range(self.grid.n)]

    def signature(self, tol: float = 1e-10) -> tuple[np.ndarray, np.ndarray]:
        """Per-node (positive, negative) eigenvalue counts of Phi*G."""
        w = np.linalg.eigvalsh(self.gram_G)
        return np.sum(w > tol, axis=-1), np.sum(w < -tol, axis=-1)


def _formula_slots(surface: Surface):
    _, dphi, _ = surface.chart.jets
    AX = np.einsum("...ba,...bd->...ad", surface.forms.A, dphi)
    return -AX, -dphi.copy(), AX, dphi


def _raw_defect(x, y, X, Y, raw, mask):
    rebuilt = wedge_matrix(x[..., None, :], X) + wedge_matrix(y[..., None, :], Y)
    err = np.max(np.abs(rebuilt - raw), axis=(-1, -2, -3))
    return float(np.max(err[mask])) if np.any(mask) else 0.0


def gauss(surface, mode: str = "formula", check: bool = True) -> GaussMapField:
    """Gauss map of a surface (or chart) with pushforwards and induced Gram fields.

    Nodes where Phi*G is singular are flagged in ``immersed`` rather than raised.
    """
    if not isinstance(surface, Surface):
        surface = analyze(surface)
    chart, cfg = surface.chart, surface.cfg
    sig, eps = cfg.sig, cfg.epsilon
    x, y = chart.values, surface.normal.N
    base_valid = surface.forms.valid

    if mode == "formula":
        X, Y, AX, dphi = _formula_slots(surface)
        raw = wedge_matrix(dphi, y[..., None, :]) + wedge_matrix(AX, x[..., None, :])
        defect = _raw_defect(x, y, X, Y, raw, base_valid)
        # reading the slots back off the raw bivector must give the same slots
        Xr, Yr = slots_from_bivector(raw, x[..., None, :], y[..., None, :], eps, sig)
        read = np.max(np.abs(Xr - X) + np.abs(Yr - Y), axis=(-1, -2))
        read = float(np.max(read[base_valid])) if np.any(base_valid) else 0.0
        if check and max(defect, read) > SLOT_TOL * (1.0 + float(np.max(np.abs(raw)))):
            raise SlotMismatch(f"pushforward slots disagree with the raw bivector by {max(defect, read):.3g}")
    elif mode == "fd":
        raw = gradient_field(wedge_matrix(x, y), chart.grid)
        X, Y = slots_from_bivector(raw, x[..., None, :], y[..., None, :], eps, sig)
        # differences that reach a masked node (normal unavailable there) are unusable
        base_valid = shrink_mask(base_valid, chart.grid)
        defect = _raw_defect(x, y, X, Y, raw, base_valid)
    else:
        raise ValueError(f"unknown pushforward mode {mode!r}")

    X1, Y1, X2, Y2 = _pairs(X, Y)
    gram = metric_slots(X1, Y1, X2, Y2, eps, sig)
    gram_p = None
    if cfg.n == 2:
        Jp = jprime_matrix(x, y, cfg)[..., None, None, :, :]
        gram_p = metric_Gprime_slots(X1, Y1, X2, Y2, Jp, sig)
    scale = np.max(np.abs(gram), axis=(-1, -2)) ** cfg.n
    immersed = np.abs(np.linalg.det(gram)) > 1e-10 * np.maximum(scale, 1e-300)
    return GaussMapField(cfg, surface, x, y, X, Y, gram, gram_p, immersed,
                         base_valid & immersed, mode, defect)


def pushforward(phi, N, dphi, A, X, cfg: SpaceFormConfig) -> GeodesicTangent:
    """Pushforward of the coordinate vector X at a single node.

    ``dphi`` is (n, dim), ``A`` the coordinate shape operator. The slot form
    is checked against the raw bivector X^N + AX^phi.
    """
    base = make_geodesic(phi, N, cfg)
    dphi = np.asarray(dphi)
    Xa = np.asarray(X) @ dphi
    AXa = (np.asarray(A) @ np.asarray(X)) @ dphi
    t = GeodesicTangent(base, -AXa, -Xa)
    raw = wedge_matrix(Xa, base.y) + wedge_matrix(AXa, base.x)
    err = float(np.max(np.abs(t.bivector - raw)))
    if err > 1e-12 * (1.0 + float(np.max(np.abs(raw)))):
        raise SlotMismatch(f"pushforward re-expression off by {err:.3g}")
    return t


@dataclass(eq=False)
class InducedMetric:
    gram: np.ndarray
    expected_principal: np.ndarray  # closed form in the principal frame
    principal: np.ndarray  # Gram matrix in the principal frame
    identity_deviation: float  # general-frame identity (Phi*G only)
    principal_deviation: float
    mask: np.ndarray  # nodes the deviations were taken over
    degenerate: np.ndarray  # nodes excluded because the induced metric degenerates


def _principal_frame(field: GaussMapField, oriented: bool):
    spec = field.surface.spectrum
    P = spec.frame.copy()
    if oriented:
        # flip e_2 so that (phi, N, e_1, e_2) is positively oriented
        _, dphi, _ = field.surface.chart.jets
        M = np.concatenate([field.x[..., None, :], field.y[..., None, :], spec.ambient_frame(dphi)], axis=-2)
        flip = np.linalg.det(M) < 0
        P[..., :, -1] = np.where(flip[..., None], -P[..., :, -1], P[..., :, -1])
    return P


def _max_over(values, mask) -> float:
    return float(np.max(values[mask])) if np.any(mask) else 0.0


def induced_G(field: GaussMapField, tol: float = 1e-8, strict: bool = False) -> InducedMetric:
    """Phi*G against eps g + g(A., A.) and, in the principal frame, diag(eps_i (eps + k_i^2))."""
    surf, eps = field.surface, field.cfg.epsilon
    g, A = surf.forms.g, surf.forms.A
    spec = surf.spectrum
    target = eps * g + np.einsum("...ca,...cd,...db->...ab", A, g, A)
    ident = np.max(np.abs(field.gram_G - target), axis=(-1, -2))
    radicand = eps + spec.k ** 2
    degenerate = field.surface.forms.valid & (np.min(np.abs(radicand), axis=-1) < tol)
    if strict and np.any(degenerate):
        raise SingularMetric(f"eps + k_i^2 vanishes at {int(degenerate.sum())} node(s)")
    P = _principal_frame(field, oriented=False)
    principal = np.einsum("...ai,...ab,...bj->...ij", P, field.gram_G, P)
    expected = np.zeros_like(principal)
    n = field.grid.n
    expected[..., np.arange(n), np.arange(n)] = spec.eps * radicand
    mask = field.valid & spec.diagonalizable
    dev = np.max(np.abs(principal - expected), axis=(-1, -2))
    return InducedMetric(field.gram_G, expected, principal, _max_over(ident, field.surface.forms.valid),
                         _max_over(dev, mask), mask, degenerate)


def induced_Gprime(field: GaussMapField) -> InducedMetric:
    """Phi*G' (n = 2) against the antidiagonal eps_2 (k_2 - k_1) form in the principal frame.

    Umbilic nodes are masked; a surface with no non-umbilic node raises
    UmbilicDegeneracy.
    """
    if field.gram_Gprime is None:
        raise ValueError("G' is only defined for n = 2")
    spec = field.surface.spectrum
    live = field.valid & spec.diagonalizable
    mask = live & ~spec.umbilic
    if not np.any(mask):
        raise UmbilicDegeneracy("every valid node is umbilic; Phi*G' vanishes identically")
    P = _principal_frame(field, oriented=True)
    principal = np.einsum("...ai,...ab,...bj->...ij", P, field.gram_Gprime, P)
    off = spec.eps[..., 1] * (spec.k[..., 1] - spec.k[..., 0])
    expected = np.zeros_like(principal)
    expected[..., 0, 1] = expected[..., 1, 0] = off
    dev = np.max(np.abs(principal - expected), axis=(-1, -2))
    return InducedMetric(field.gram_Gprime, expected, principal, float("nan"), _max_over(dev, mask),
                         mask, live & spec.umbilic)


def lagrangian_residual(field: GaussMapField) -> float:
    """max |Omega(Xbar_a, Xbar_b)| over valid nodes."""
    W = omega_slots(*_pairs(field.X, field.Y), field.cfg.sig)
    return _max_over(np.max(np.abs(W), axis=(-1, -2)), field.valid)


def gram_curvature(gram: np.ndarray, grid) -> np.ndarray:
    """Gauss curvature of a 2D metric field by finite differences on the grid."""
    n = grid.n
    dg = np.moveaxis(gradient_field(gram, grid), n, -3)
    ddg = np.moveaxis(np.moveaxis(hessian_field(gram, grid), n, -4), n, -3)
    _, _, scal = curvature_from_jets(gram, dg, ddg)
    return 0.5 * scal


def gprime_flatness_residual(field: GaussMapField) -> float:
    """max |K(Phi*G')| over valid nodes; tends to 0 for Weingarten congruences."""
    if field.gram_Gprime is None:
        raise ValueError("G' is only defined for n = 2")
    spec = field.surface.spectrum
    if np.any(spec.umbilic) or not np.all(field.valid):
        raise UmbilicDegeneracy("Phi*G' curvature needs an umbilic-free, fully valid grid")
    K = gram_curvature(field.gram_Gprime, field.grid)
    return float(np.max(np.abs(K)))


def ambient_pushforwards(field: GaussMapField) -> np.ndarray:
    """Raw tangent bivectors x^X + y^Y for every node and direction."""
    return wedge_matrix(field.x[..., None, :], field.X) + wedge_matrix(field.y[..., None, :], field.Y)


def quadric_check(field: GaussMapField) -> float:
    """max |<<Phi, Phi>> - eps| over valid nodes; Phi should lie in the geodesic space."""
    sig = field.cfg.sig
    q = inner(field.x, field.x, sig) * inner(field.y, field.y, sig) - inner(field.x, field.y, sig) ** 2
    return _max_over(np.abs(q - field.cfg.epsilon), field.valid)
