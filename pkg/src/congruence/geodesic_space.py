"""Oriented geodesics of S^{n+1}_{p,1} as decomposable bivectors x^y.

Tangent vectors at x^y are stored by their slots (X, Y), meaning the bivector
x^X + y^Y with X, Y orthogonal to x and y. The complex/paracomplex structure
and the n=2 structure J' act on slots; metrics are evaluated either on slots
or, for raw bivectors, through :func:`ambient.bivector_inner_matrix`.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .ambient import (
    DEFAULT_TOL,
    Signature,
    bivector_inner_matrix,
    inner,
    orthogonal_complement,
    wedge_matrix,
)
from .errors import (
    BasePointMismatch,
    DegeneratePlane,
    DegenerateSubspace,
    NotOnQuadric,
    SingularMetric,
    WrongCausalType,
)


@dataclass(frozen=True)
class SpaceFormConfig:
    n: int
    p: int
    epsilon: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if self.epsilon not in (1, -1):
            raise ValueError("epsilon must be +1 or -1")
        dim = self.n + 2
        if not 0 <= self.p <= dim:
            raise ValueError(f"p={self.p} out of range for dimension {dim}")
        # x needs a plus direction, y a plus (eps=1) or minus (eps=-1) one
        plus, minus = dim - self.p, self.p
        if self.epsilon == 1 and plus < 2:
            raise ValueError("no spacelike geodesics: need at least two plus signs")
        if self.epsilon == -1 and (plus < 1 or minus < 1):
            raise ValueError("no timelike geodesics: need a plus and a minus sign")

    @property
    def dim(self) -> int:
        return self.n + 2

    @cached_property
    def sig(self) -> Signature:
        return Signature(self.p, self.n + 2)

    @property
    def complement_minus(self) -> int:
        """Number of negative directions in (x^y)^perp."""
        return self.p - (1 if self.epsilon == -1 else 0)


@dataclass(frozen=True, eq=False)
class OrientedGeodesic:
    x: np.ndarray
    y: np.ndarray
    cfg: SpaceFormConfig

    @property
    def bivector(self) -> np.ndarray:
        return wedge_matrix(self.x, self.y)


@dataclass(frozen=True, eq=False)
class GeodesicTangent:
    base: OrientedGeodesic
    X: np.ndarray
    Y: np.ndarray

    @property
    def bivector(self) -> np.ndarray:
        return wedge_matrix(self.base.x, self.X) + wedge_matrix(self.base.y, self.Y)

    def __add__(self, other):
        _same_base(self, other)
        return GeodesicTangent(self.base, self.X + other.X, self.Y + other.Y)

    def __mul__(self, c):
        return GeodesicTangent(self.base, c * self.X, c * self.Y)

    __rmul__ = __mul__


def make_geodesic(x, y, cfg: SpaceFormConfig, tol: float = 1e-8) -> OrientedGeodesic:
    """Validate and renormalize a point of L^+ (eps=1) or L^- (eps=-1)."""
    sig = cfg.sig
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    qx = inner(x, x, sig)
    if abs(qx - 1.0) > tol:
        raise NotOnQuadric(f"<x,x> = {qx:.6g}, expected 1")
    x = x / np.sqrt(qx)
    if abs(inner(x, y, sig)) > tol:
        raise NotOnQuadric("y is not tangent to the quadric at x")
    y = y - inner(x, y, sig) * x
    qy = inner(y, y, sig)
    if qy * cfg.epsilon <= tol:
        raise WrongCausalType(f"<y,y> = {qy:.6g} does not have the sign of epsilon={cfg.epsilon}")
    y = y / np.sqrt(abs(qy))
    return OrientedGeodesic(x, y, cfg)


def tangent(base: OrientedGeodesic, X, Y, tol: float = 1e-8) -> GeodesicTangent:
    sig = base.cfg.sig
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    for v in (X, Y):
        if abs(inner(v, base.x, sig)) > tol or abs(inner(v, base.y, sig)) > tol:
            raise ValueError("tangent slots must be orthogonal to x and y")
    return GeodesicTangent(base, X, Y)


def _same_base(t1: GeodesicTangent, t2: GeodesicTangent):
    if t1.base is t2.base:
        return
    if not (np.array_equal(t1.base.x, t2.base.x) and np.array_equal(t1.base.y, t2.base.y)):
        raise BasePointMismatch("tangent vectors live at different geodesics")


# slot-level formulas; all broadcast over leading axes


def metric_slots(X1, Y1, X2, Y2, eps: int, sig: Signature):
    """G = <X1,X2> + eps <Y1,Y2> (the flat bivector metric on x^X + y^Y)."""
    return inner(X1, X2, sig) + eps * inner(Y1, Y2, sig)


def bigJ_slots(X, Y, eps: int):
    """x^X + y^Y  ->  (Jx)^X + (Jy)^Y = y^X - eps x^Y."""
    return -eps * Y, X


def omega_slots(X1, Y1, X2, Y2, sig: Signature):
    """eps G(JJ t1, t2), which reduces to <X1,Y2> - <Y1,X2>."""
    return inner(X1, Y2, sig) - inner(Y1, X2, sig)


def slots_from_bivector(T, x, y, eps: int, sig: Signature):
    """Read (X, Y) off a tangent bivector T = x^X + y^Y at the base x^y."""
    T = np.asarray(T)
    X = -np.einsum("...ij,...j->...i", T, sig.eta * x)
    Y = -eps * np.einsum("...ij,...j->...i", T, sig.eta * y)
    return X, Y


_LEVI_CIVITA_4 = np.zeros((4, 4, 4, 4))
for _perm in itertools.permutations(range(4)):
    _LEVI_CIVITA_4[_perm] = np.linalg.det(np.eye(4)[list(_perm)])


def jprime_matrix(x, y, cfg: SpaceFormConfig):
    """Matrix of J' on (x^y)^perp (zero on span{x, y}), n = 2 only.

    With (u, v) an orthonormal basis of the complement making (x, y, u, v)
    positively oriented, J'u = v and J'v = -u on a definite plane, J'u = v and
    J'v = u on an indefinite one (u spacelike). Both cases equal -s_v * M where
    M w = eta * (Levi-Civita contraction of x, y, w) and s_v = <v, v>.
    """
    if cfg.n != 2:
        raise ValueError("J' is only defined for n = 2")
    eta = cfg.sig.eta
    M = np.einsum("i,ijkl,...j,...k->...il", eta, _LEVI_CIVITA_4, x, y)
    s_v = 1.0 if cfg.complement_minus == 0 else -1.0
    return -s_v * M


def plane_sign(cfg: SpaceFormConfig) -> int:
    """+1 if (x^y)^perp is definite, -1 if indefinite (n = 2)."""
    return -1 if cfg.complement_minus == 1 else 1


def bigJprime_slots(X, Y, Jp):
    return np.einsum("...ij,...j->...i", Jp, X), np.einsum("...ij,...j->...i", Jp, Y)


def metric_Gprime_slots(X1, Y1, X2, Y2, Jp, sig: Signature):
    """G'(t1, t2) = Omega(t1, JJ' t2)."""
    JX2, JY2 = bigJprime_slots(X2, Y2, Jp)
    return omega_slots(X1, Y1, JX2, JY2, sig)


# object-level API


def metric_G(t1: GeodesicTangent, t2: GeodesicTangent) -> float:
    _same_base(t1, t2)
    cfg = t1.base.cfg
    return float(metric_slots(t1.X, t1.Y, t2.X, t2.Y, cfg.epsilon, cfg.sig))


def J_point(g: OrientedGeodesic) -> np.ndarray:
    """J on the plane span{x, y} as a dim x dim matrix (zero on the complement)."""
    sig = g.cfg.sig
    return np.outer(g.y, sig.eta * g.x) - np.outer(g.x, sig.eta * g.y)


def bigJ(t: GeodesicTangent) -> GeodesicTangent:
    X, Y = bigJ_slots(t.X, t.Y, t.base.cfg.epsilon)
    return GeodesicTangent(t.base, X, Y)


def omega(t1: GeodesicTangent, t2: GeodesicTangent) -> float:
    _same_base(t1, t2)
    cfg = t1.base.cfg
    return cfg.epsilon * metric_G(bigJ(t1), t2)


def Jprime_plane(g: OrientedGeodesic) -> np.ndarray:
    if g.cfg.n != 2:
        raise ValueError("J' is only defined for n = 2")
    try:
        orthogonal_complement(g.x, g.y, g.cfg.sig)
    except DegenerateSubspace as exc:
        raise DegeneratePlane(str(exc)) from exc
    return jprime_matrix(g.x, g.y, g.cfg)


def bigJprime(t: GeodesicTangent) -> GeodesicTangent:
    X, Y = bigJprime_slots(t.X, t.Y, Jprime_plane(t.base))
    return GeodesicTangent(t.base, X, Y)


def metric_Gprime(t1: GeodesicTangent, t2: GeodesicTangent) -> float:
    _same_base(t1, t2)
    return omega(t1, bigJprime(t2))


def metric_Gprime_via_G(t1: GeodesicTangent, t2: GeodesicTangent) -> float:
    """Second defining expression -eps G(t1, JJ o JJ' t2)."""
    _same_base(t1, t2)
    return -t1.base.cfg.epsilon * metric_G(t1, bigJ(bigJprime(t2)))


def tangent_basis(g: OrientedGeodesic) -> list[GeodesicTangent]:
    """x^u_i and y^u_i for an orthonormal basis u_i of the complement."""
    comp, _ = orthogonal_complement(g.x, g.y, g.cfg.sig)
    zero = np.zeros(g.cfg.dim)
    return [GeodesicTangent(g, u, zero) for u in comp] + [GeodesicTangent(g, zero, u) for u in comp]


def random_geodesic(cfg: SpaceFormConfig, rng: np.random.Generator, margin: float = 0.2) -> OrientedGeodesic:
    """Rejection-sample a point of L^{+-} with well conditioned norms."""
    sig = cfg.sig
    while True:
        x = rng.normal(size=cfg.dim)
        q = inner(x, x, sig)
        if q > margin * np.dot(x, x):
            break
    x = x / np.sqrt(q)
    while True:
        y = rng.normal(size=cfg.dim)
        y = y - inner(y, x, sig) * x
        q = inner(y, y, sig)
        if cfg.epsilon * q > margin * np.dot(y, y):
            break
    return make_geodesic(x, y / np.sqrt(abs(q)), cfg)


def random_tangent(g: OrientedGeodesic, rng: np.random.Generator) -> GeodesicTangent:
    sig = g.cfg.sig

    def proj(v):
        v = v - inner(v, g.x, sig) * g.x
        return v - g.cfg.epsilon * inner(v, g.y, sig) * g.y

    return GeodesicTangent(g, proj(rng.normal(size=g.cfg.dim)), proj(rng.normal(size=g.cfg.dim)))


# local charts and numeric curvature


class GeodesicChart:
    """Chart c: R^{2n} -> L^{+-} around ``g``.

    x(s) = normalize(x + sum_i s_i u_i), y(s) = unit part of (y + sum_i s_{n+i} u_i)
    orthogonal to x(s). The formulas are complex-analytic, so tangents are taken
    by complex-step differentiation and carry no truncation error.
    """

    def __init__(self, g: OrientedGeodesic):
        self.g = g
        self.cfg = g.cfg
        self.basis, self.signs = orthogonal_complement(g.x, g.y, g.cfg.sig)
        self.U = np.array(self.basis)

    @property
    def dim(self) -> int:
        return 2 * self.cfg.n

    def point(self, s):
        s = np.asarray(s)
        eta, n, eps = self.cfg.sig.eta, self.cfg.n, self.cfg.epsilon
        xs = self.g.x + s[:n] @ self.U
        xs = xs / np.sqrt(np.sum(eta * xs * xs))
        w = self.g.y + s[n:] @ self.U
        w = w - np.sum(eta * w * xs) * xs
        w = w / np.sqrt(eps * np.sum(eta * w * w))
        return xs, w

    def __call__(self, s) -> OrientedGeodesic:
        x, y = self.point(np.asarray(s, dtype=float))
        return OrientedGeodesic(x, y, self.cfg)

    def tangents(self, s, step: float = 1e-30):
        """Coordinate tangent bivectors dc/ds_i (exact to roundoff) and the base point."""
        s = np.asarray(s, dtype=float)
        out = []
        for i in range(self.dim):
            sc = s.astype(complex)
            sc[i] += 1j * step
            xs, ys = self.point(sc)
            out.append(np.imag(wedge_matrix(xs, ys)) / step)
        x, y = self.point(s)
        return np.array(out), x, y

    def tangent_slots(self, s):
        T, x, y = self.tangents(s)
        X, Y = slots_from_bivector(T, x, y, self.cfg.epsilon, self.cfg.sig)
        return X, Y, x, y

    def gram(self, s, which: str = "G"):
        X, Y, x, y = self.tangent_slots(s)
        sig, eps = self.cfg.sig, self.cfg.epsilon
        a = (slice(None), None)
        b = (None, slice(None))
        if which == "G":
            return metric_slots(X[a], Y[a], X[b], Y[b], eps, sig)
        if which == "Gprime":
            Jp = jprime_matrix(x, y, self.cfg)
            return metric_Gprime_slots(X[a], Y[a], X[b], Y[b], Jp, sig)
        if which == "Omega":
            return omega_slots(X[a], Y[a], X[b], Y[b], sig)
        raise ValueError(f"unknown metric {which!r}")

    def gram_raw(self, s):
        """G Gram matrix from raw tangent bivectors (no slot bookkeeping)."""
        T, _, _ = self.tangents(s)
        return bivector_inner_matrix(T[:, None], T[None, :], self.cfg.sig)


def chart(g: OrientedGeodesic, cfg: SpaceFormConfig | None = None) -> GeodesicChart:
    if cfg is not None and cfg != g.cfg:
        raise ValueError("config does not match the geodesic")
    return GeodesicChart(g)


def _metric_jets(field, dim: int, h: float):
    """g, dg[k,i,j] and ddg[k,l,i,j] at 0 from second-order central differences."""
    cache = {}

    def G(idx):
        if idx not in cache:
            s = np.zeros(dim)
            for k, m in idx:
                s[k] += m * h
            cache[idx] = field(s)
        return cache[idx]

    g = G(())
    dg = np.zeros((dim,) + g.shape)
    ddg = np.zeros((dim, dim) + g.shape)
    for k in range(dim):
        dg[k] = (G(((k, 1),)) - G(((k, -1),))) / (2 * h)
        ddg[k, k] = (G(((k, 1),)) - 2 * g + G(((k, -1),))) / h**2
        for l in range(k + 1, dim):
            v = (
                G(((k, 1), (l, 1)))
                - G(((k, 1), (l, -1)))
                - G(((k, -1), (l, 1)))
                + G(((k, -1), (l, -1)))
            ) / (4 * h * h)
            ddg[k, l] = ddg[l, k] = v
    return g, dg, ddg


def curvature_from_jets(g, dg, ddg):
    """Riemann tensor R^a_{bcd}, Ricci tensor and scalar curvature from metric jets.

    ``dg[..., k, i, j]`` is d_k g_ij and ``ddg[..., k, l, i, j]`` is d_k d_l g_ij;
    leading axes broadcast, so a whole grid can be processed at once.
    """
    g = np.asarray(g)
    if np.any(np.abs(np.linalg.det(g)) < 1e-14):
        raise SingularMetric("metric Gram matrix is not invertible")
    gi = np.linalg.inv(g)
    low = 0.5 * (
        np.einsum("...bdc->...dbc", dg) + np.einsum("...cdb->...dbc", dg) - dg
    )  # Gamma_{d,bc}
    dlow = 0.5 * (
        np.einsum("...kbdc->...kdbc", ddg) + np.einsum("...kcdb->...kdbc", ddg) - ddg
    )
    gam = np.einsum("...ad,...dbc->...abc", gi, low)
    dgi = -np.einsum("...ai,...kij,...jb->...kab", gi, dg, gi)
    dgam = np.einsum("...kad,...dbc->...kabc", dgi, low) + np.einsum(
        "...ad,...kdbc->...kabc", gi, dlow
    )
    riem = (
        np.einsum("...cadb->...abcd", dgam)
        - np.einsum("...dacb->...abcd", dgam)
        + np.einsum("...ace,...edb->...abcd", gam, gam)
        - np.einsum("...ade,...ecb->...abcd", gam, gam)
    )
    ric = np.einsum("...abad->...bd", riem)
    scal = np.einsum("...bd,...bd->...", gi, ric)
    return riem, ric, (float(scal) if np.ndim(scal) == 0 else scal)


def scalar_curvature_numeric(ch: GeodesicChart, which: str = "G", h: float = 1e-2) -> float:
    """Scalar curvature at the chart centre for G or G' (finite-difference Christoffels)."""
    g, dg, ddg = _metric_jets(lambda s: ch.gram(s, which), ch.dim, h)
    return curvature_from_jets(g, dg, ddg)[2]


def closedness_residual(ch: GeodesicChart, h: float = 1e-2) -> float:
    """max |d_i W_jk + d_j W_ki + d_k W_ij| of the chart components W of Omega."""
    dim = ch.dim
    dW = []
    for k in range(dim):
        e = np.zeros(dim)
        e[k] = h
        dW.append((ch.gram(e, "Omega") - ch.gram(-e, "Omega")) / (2 * h))
    dW = np.array(dW)
    res = 0.0
    for i, j, k in itertools.combinations(range(dim), 3):
        res = max(res, abs(dW[i, j, k] + dW[j, k, i] + dW[k, i, j]))
    return res


def omega_antisymmetry(ch: GeodesicChart, s=None) -> float:
    W = ch.gram(np.zeros(ch.dim) if s is None else s, "Omega")
    return float(np.max(np.abs(W + W.T)))


def signature_of(gram, tol: float = DEFAULT_TOL) -> tuple[int, int]:
    """(positive, negative) eigenvalue counts of a symmetric matrix."""
    w = np.linalg.eigvalsh(0.5 * (gram + np.swapaxes(gram, -1, -2)))
    return int(np.sum(w > tol)), int(np.sum(w < -tol))
