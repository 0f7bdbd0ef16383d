"""One-parameter deformations of hypersurfaces and the Hamiltonian property of
the induced variation of Gauss maps.

A family is stored as ``t -> parameterization``. The velocity of phi_t splits
as phi_dot = f N + Y; the variation Phi_t = phi_t ^ N_t of the Gauss map then
satisfies G(Phi_dot, JJ Xbar) = -df(X) for every tangent direction X.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import jax.numpy as jnp
import numpy as np
from scipy.linalg import expm

from . import jets
from .ambient import inner, wedge_matrix
from .errors import InadmissibleVariation, NullNormal, SingularMetric
from .gauss_map import GaussMapField, gauss
from .geodesic_space import bigJ_slots, metric_slots, slots_from_bivector
from .hypersurface import (
    ImmersionChart,
    Surface,
    _normal_from_jets,
    analyze,
    cos_eps,
    gradient_field,
    sin_eps,
)


@dataclass(eq=False)
class DeformationFamily:
    base: ImmersionChart
    fn_t: Callable  # t -> jax parameterization u -> phi_t(u)
    h_t: float
    name: str = ""
    velocity_fn: Callable | None = None  # exact d/dt phi_t at t = 0
    f_fn: Callable | None = None  # exact normal speed
    params: dict = field(default_factory=dict)
    closed_jets: Callable | None = None  # (t, order) -> (phi_t, dphi_t, ddphi_t) or None
    max_closed_order: int = -1

    def jets_at(self, t: float, order: int = 2):
        """Node values and coordinate derivatives of phi_t, shaped like the base jets."""
        if self.closed_jets is not None and order <= self.max_closed_order:
            return self.closed_jets(float(t), order)
        b = self.base
        shape, n, dim = b.grid.shape, b.grid.n, b.cfg.dim
        val, d1, d2 = jets.value_jets(self.fn_t(float(t)), b.grid.nodes(), order=max(order, 1))
        d2 = None if d2 is None else d2.reshape(shape + (n, n, dim))
        return val.reshape(shape + (dim,)), d1.reshape(shape + (n, dim)), d2

    def at(self, t: float) -> ImmersionChart:
        b = self.base
        phi, dphi, ddphi = self.jets_at(t, 2)
        return ImmersionChart.from_jets(b.cfg, b.grid, phi, dphi, ddphi, b.orientation,
                                        f"{self.name}@{t:g}", dict(b.params), fn=self.fn_t(float(t)))

    def values(self, t: float) -> np.ndarray:
        return self.jets_at(t, 1)[0]

    def normals(self, t: float) -> np.ndarray:
        """Unit normal of phi_t, oriented continuously from the base normal; 0 where rank is lost."""
        phi, dphi, _ = self.jets_at(t, 1)
        v, q, _, valid = _normal_from_jets(phi, dphi, self.base.cfg, self.base.orientation)
        return np.where(valid[..., None], v / np.sqrt(np.abs(np.where(valid, q, 1.0)))[..., None], 0.0)

    def gauss_bivectors(self, t: float) -> np.ndarray:
        """phi_t ^ N_t at every node."""
        return wedge_matrix(self.values(t), self.normals(t))


def _require_fn(chart: ImmersionChart):
    if chart.fn is None:
        raise ValueError("deformation families need a parameterized chart")


def _default_step(chart: ImmersionChart, h_t):
    return float(min(chart.grid.spacing)) if h_t is None else float(h_t)


def surface_jets(chart: ImmersionChart, order: int = 1) -> dict:
    """Coordinate jets of phi and N up to ``order``, cached on the chart.

    dN comes from the shape operator (dN = -dphi A); ddN needs exact jets of
    the normal function. N and its derivatives are zero at rank-deficient nodes.
    """
    cache = chart.__dict__.setdefault("_surface_jets", {})
    if order in cache:
        return cache[order]
    phi, dphi, ddphi = chart.jets
    surf = analyze(chart)
    valid = surf.forms.valid
    N = surf.normal.N
    if order >= 2:
        _require_fn(chart)
        grid = chart.grid
        _, dN, ddN = jets.value_jets(chart.normal_fn(), grid.nodes())
        dN = np.nan_to_num(dN.reshape(dphi.shape))
        ddN = np.nan_to_num(ddN.reshape(ddphi.shape))
        dN = np.where(valid[..., None, None], dN, 0.0)
        ddN = np.where(valid[..., None, None, None], ddN, 0.0)
    else:
        dN = -np.einsum("...ba,...bd->...ad", surf.forms.A, dphi)
        ddN = None
    out = {"phi": phi, "dphi": dphi, "ddphi": ddphi, "N": N, "dN": dN, "ddN": ddN, "valid": valid}
    cache[order] = out
    return out


def scalar_jets(fn, grid, order: int = 1):
    """(value, gradient, hessian or None) of a jax scalar function on the grid."""
    val, d1, d2 = jets.value_jets(lambda u: jnp.atleast_1d(fn(u)), grid.nodes(), order=order)
    shape, n = grid.shape, grid.n
    hess = None if d2 is None else d2[..., 0].reshape(shape + (n, n))
    return val[:, 0].reshape(shape), d1[..., 0].reshape(shape + (n,)), hess


def constant_family(base: ImmersionChart, h_t=None) -> DeformationFamily:
    _require_fn(base)
    dim = base.cfg.dim

    def closed(t, order):
        return base.jets

    return DeformationFamily(base, lambda t: base.fn, _default_step(base, h_t), "constant",
                             velocity_fn=lambda u: jnp.zeros(dim), f_fn=lambda u: 0.0 * u[0],
                             closed_jets=closed, max_closed_order=2)


def _normal_flow_jets(base: ImmersionChart, u_jets):
    """Closed-form jets of phi_t = cos_eps(t u) phi + sin_eps(t u) N.

    ``u_jets(order)`` returns (u, du, ddu) node fields. With theta = t u,
    P = -eps s phi + c N is d(phi_t)/d(theta), and the product rule gives
    d phi_t and dd phi_t from the jets of phi, N and u.
    """
    eps = base.cfg.epsilon

    def closed(t, order):
        J = surface_jets(base, 2 if order >= 2 else 1)
        u, du, ddu = u_jets(order)
        th = t * u
        c, s = cos_eps(th, eps)[..., None], sin_eps(th, eps)[..., None]
        phi, N, dphi, dN = J["phi"], J["N"], J["dphi"], J["dN"]
        P = -eps * s * phi + c * N
        dth = t * du
        val = c * phi + s * N
        d1 = dth[..., None] * P[..., None, :] + c[..., None] * dphi + s[..., None] * dN
        if order < 2:
            return val, d1, None
        ddth = t * ddu
        Q = -eps * c * phi - eps * s * N  # d P / d theta
        dP = -eps * s[..., None] * dphi + c[..., None] * dN  # d P at fixed theta
        d2 = (ddth[..., None] * P[..., None, None, :]
              + dth[..., :, None, None] * (dth[..., None, :, None] * Q[..., None, None, :] + dP[..., None, :, :])
              + dth[..., None, :, None] * (-eps * s[..., None, None] * dphi[..., :, None, :]
                                            + c[..., None, None] * dN[..., :, None, :])
              + c[..., None, None] * J["ddphi"] + s[..., None, None] * J["ddN"])
        return val, d1, d2

    return closed


def parallel_family(base: ImmersionChart, h_t=None, speed: float = 1.0) -> DeformationFamily:
    """phi_t = cos_eps(speed t) phi + sin_eps(speed t) N."""
    _require_fn(base)
    eps = base.cfg.epsilon
    phi, nfn = base.fn, base.normal_fn()
    shape, n = base.grid.shape, base.grid.n

    def fn_t(t):
        c, s = cos_eps(speed * t, eps), sin_eps(speed * t, eps)
        return lambda u: c * phi(u) + s * nfn(u)

    def u_jets(order):
        return np.full(shape, float(speed)), np.zeros(shape + (n,)), np.zeros(shape + (n, n))

    return DeformationFamily(base, fn_t, _default_step(base, h_t), "parallel",
                             velocity_fn=lambda u: speed * nfn(u), f_fn=lambda u: speed + 0.0 * u[0],
                             params={"speed": speed}, closed_jets=_normal_flow_jets(base, u_jets),
                             max_closed_order=2)


def isometry_family(base: ImmersionChart, K, h_t=None) -> DeformationFamily:
    """phi_t = exp(t eta K) phi for an antisymmetric K, a one-parameter group of isometries."""
    _require_fn(base)
    K = np.asarray(K, dtype=float)
    if np.max(np.abs(K + K.T)) > 1e-12:
        raise ValueError("K must be antisymmetric")
    M = base.cfg.sig.eta[:, None] * K
    phi = base.fn

    def fn_t(t):
        L = jnp.asarray(expm(t * M))
        return lambda u: L @ phi(u)

    def closed(t, order):
        L = expm(t * M)
        p, d1, d2 = base.jets
        return p @ L.T, d1 @ L.T, d2 @ L.T

    Mj = jnp.asarray(M)
    return DeformationFamily(base, fn_t, _default_step(base, h_t), "isometry",
                             velocity_fn=lambda u: Mj @ phi(u), params={"K": K.tolist()},
                             closed_jets=closed, max_closed_order=2)


def _tangential(w, x, N, eta, eps):
    """Part of the ambient vector w tangent to the hypersurface at x with normal N."""
    return w - jnp.sum(eta * w * x) * x - eps * jnp.sum(eta * w * N) * N


def generator_family(base: ImmersionChart, f_fn, w_fn, h_t=None, name: str = "generator") -> DeformationFamily:
    """phi_t = (phi + t V) / sqrt(1 + t^2 <V, V>) with V = f N + Y.

    ``f_fn(u)`` is the normal speed and Y the tangential part of the ambient
    field ``w_fn(u)``. V is orthogonal to phi, so phi_t stays on the quadric and
    its velocity at t = 0 is exactly V.
    """
    _require_fn(base)
    cfg = base.cfg
    sig, eps = cfg.sig, cfg.epsilon
    eta = jnp.asarray(sig.eta)
    phi, nfn = base.fn, base.normal_fn()

    def V(u):
        x, N = phi(u), nfn(u)
        return f_fn(u) * N + _tangential(w_fn(u), x, N, eta, eps)

    def fn_t(t):
        def fn(u):
            v = V(u)
            return (phi(u) + t * v) / jnp.sqrt(jnp.abs(1.0 + t * t * jnp.sum(eta * v * v)))

        return fn

    vcache = {}

    def v_jets():
        if not vcache:
            J = surface_jets(base, 1)
            grid = base.grid
            f, df, _ = scalar_jets(f_fn, grid, 1)
            W, dW, _ = jets.value_jets(w_fn, grid.nodes(), order=1)
            W, dW = W.reshape(J["phi"].shape), dW.reshape(J["dphi"].shape)
            x, dx, N, dN = J["phi"], J["dphi"], J["N"], J["dN"]
            Wx, WN = inner(W, x, sig)[..., None], inner(W, N, sig)[..., None]
            dWx = inner(dW, x[..., None, :], sig) + inner(W[..., None, :], dx, sig)
            dWN = inner(dW, N[..., None, :], sig) + inner(W[..., None, :], dN, sig)
            Vv = f[..., None] * N + W - Wx * x - eps * WN * N
            dV = (df[..., None] * N[..., None, :] + f[..., None, None] * dN + dW
                  - dWx[..., None] * x[..., None, :] - Wx[..., None] * dx
                  - eps * dWN[..., None] * N[..., None, :] - eps * WN[..., None] * dN)
            vcache["v"] = (x, dx, Vv, dV)
        return vcache["v"]

    def closed(t, order):
        x, dx, Vv, dV = v_jets()
        q = 1.0 + t * t * inner(Vv, Vv, sig)
        r = 1.0 / np.sqrt(np.abs(q))
        dq = 2.0 * t * t * inner(Vv[..., None, :], dV, sig)  # d q
        y = x + t * Vv
        val = y * r[..., None]
        dr = -0.5 * np.sign(q)[..., None] * dq * (r ** 3)[..., None]
        d1 = (dx + t * dV) * r[..., None, None] + dr[..., None] * y[..., None, :]
        return val, d1, None

    return DeformationFamily(base, fn_t, _default_step(base, h_t), name, velocity_fn=V, f_fn=f_fn,
                             closed_jets=closed, max_closed_order=1)


def _ambient_polynomial(rng, dim, amplitude):
    c = rng.normal()
    a = rng.normal(size=dim)
    S = rng.normal(size=(dim, dim))
    S = 0.5 * (S + S.T) / math.sqrt(dim)
    return amplitude * c, amplitude * a, amplitude * S


def random_generator_family(base: ImmersionChart, rng: np.random.Generator, h_t=None,
                            amplitude: float = 0.3) -> DeformationFamily:
    """Random (f, Y): f a quadratic polynomial of the ambient position, Y the
    tangential part of a random affine ambient field. Both are smooth on the
    surface whatever the chart, including at coordinate poles."""
    dim = base.cfg.dim
    c, a, S = (jnp.asarray(v) for v in _ambient_polynomial(rng, dim, amplitude))
    B = jnp.asarray(amplitude * rng.normal(size=(dim, dim)))
    b = jnp.asarray(amplitude * rng.normal(size=dim))
    phi = base.fn

    def f_fn(u):
        x = phi(u)
        return c + a @ x + x @ S @ x

    def w_fn(u):
        return B @ phi(u) + b

    return generator_family(base, f_fn, w_fn, h_t, name="random")


def _boundary_rows(chart: ImmersionChart):
    """(axis, side) pairs of clamped ends that are a real boundary, not a collapsed pole."""
    out = []
    for axis, per in enumerate(chart.grid.periodic):
        if per:
            continue
        for side in (0, -1):
            row = np.take(chart.values, side, axis=axis)
            row = row.reshape(-1, chart.cfg.dim)
            if np.max(np.abs(row - row[0])) > 1e-9:
                out.append((axis, side))
    return out


def collar_mask(chart: ImmersionChart, width: int) -> np.ndarray:
    """Nodes within ``width`` rows of a real boundary of the chart."""
    mask = np.zeros(chart.grid.shape, dtype=bool)
    for axis, side in _boundary_rows(chart):
        idx = [slice(None)] * chart.grid.n
        idx[axis] = slice(0, width + 1) if side == 0 else slice(-(width + 1), None)
        mask[tuple(idx)] = True
    return mask


def make_hamiltonian_variation(base: ImmersionChart, u_fn, h_t=None, collar: int = 2,
                               tol: float = 1e-12) -> DeformationFamily:
    """phi_t = cos_eps(t u) phi + sin_eps(t u) N, so phi_dot = u N and f = u.

    On charts with a real boundary u must vanish on a collar of ``collar``
    rows; closed surfaces (periodic axes, collapsed poles) accept any u.
    """
    _require_fn(base)
    eps = base.cfg.epsilon
    mask = collar_mask(base, collar)
    if np.any(mask):
        vals = jets.evaluate(u_fn, base.grid.nodes()).reshape(base.grid.shape)
        worst = float(np.max(np.abs(vals[mask])))
        if worst > tol:
            raise InadmissibleVariation(f"potential is {worst:.3g} on the boundary collar")
    phi, nfn = base.fn, base.normal_fn()

    def fn_t(t):
        def fn(u):
            s = t * u_fn(u)
            return cos_eps(s, eps, jnp) * phi(u) + sin_eps(s, eps, jnp) * nfn(u)

        return fn

    ucache = {}

    def u_jets(order):
        key = 2 if order >= 2 else 1
        if key not in ucache:
            ucache[key] = scalar_jets(u_fn, base.grid, key)
        return ucache[key]

    return DeformationFamily(base, fn_t, _default_step(base, h_t), "hamiltonian",
                             velocity_fn=lambda u: u_fn(u) * nfn(u), f_fn=u_fn,
                             closed_jets=_normal_flow_jets(base, u_jets), max_closed_order=2)


def smooth_cutoff(s, half_width):
    """C-infinity bump equal to 1 at s=0 and vanishing for |s| >= half_width."""
    z = jnp.clip(s / half_width, -1.0, 1.0)
    inside = jnp.abs(z) < 1.0
    safe = jnp.where(inside, 1.0 - z * z, 1.0)
    return jnp.where(inside, jnp.exp(1.0 - 1.0 / safe), 0.0)


def random_bump(base: ImmersionChart, rng: np.random.Generator, amplitude: float = 0.2,
                collar: int = 2):
    """Random smooth potential: quadratic in the ambient position, multiplied by
    a cutoff that vanishes on the collar of every real boundary."""
    c, a, S = (jnp.asarray(v) for v in _ambient_polynomial(rng, base.cfg.dim, amplitude))
    grid = base.grid
    cut = []
    for axis, side in _boundary_rows(base):
        if side != 0:
            continue
        lo = grid.origin[axis]
        hi = lo + grid.spacing[axis] * (grid.shape[axis] - 1)
        mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo) - (collar + 1) * grid.spacing[axis]
        cut.append((axis, mid, half))
    phi = base.fn

    def u_fn(u):
        x = phi(u)
        val = c + a @ x + x @ S @ x
        for axis, mid, half in cut:
            val = val * smooth_cutoff(u[axis] - mid, half)
        return val

    return u_fn


def velocity(fam: DeformationFamily, exact: bool = True) -> np.ndarray:
    """phi_dot at t = 0: the exact callback when available, else a central difference."""
    if exact and fam.velocity_fn is not None:
        return jets.evaluate(fam.velocity_fn, fam.base.grid.nodes()).reshape(fam.base.values.shape)
    h = fam.h_t
    return (fam.values(h) - fam.values(-h)) / (2 * h)


@dataclass(eq=False)
class VelocitySplit:
    f: np.ndarray
    Y: np.ndarray  # ambient tangential part
    Y_coord: np.ndarray  # coordinate components g^{-1} <Y, dphi>
    tangency: float  # max |<Y, N>| + |<Y, phi>|
    reassembly: float  # max |f N + Y - phi_dot|


def decompose_velocity(phidot, surface: Surface) -> VelocitySplit:
    """phi_dot = f N + Y with f = eps <phi_dot, N>."""
    cfg = surface.cfg
    sig, eps = cfg.sig, cfg.epsilon
    valid = surface.forms.valid
    N = surface.normal.N
    if np.any(valid & (np.abs(inner(N, N, sig)) < 0.5)):
        raise NullNormal("normal field is not unit at some valid node")
    phidot = np.asarray(phidot)
    f = eps * inner(phidot, N, sig)
    Y = phidot - f[..., None] * N
    _, dphi, _ = surface.chart.jets
    rhs = inner(Y[..., None, :], dphi, sig)
    g = np.where(valid[..., None, None], surface.forms.g, np.eye(cfg.n))
    Yc = np.where(valid[..., None], np.linalg.solve(g, rhs[..., None])[..., 0], 0.0)
    tang = np.abs(inner(Y, N, sig)) + np.abs(inner(Y, surface.chart.values, sig))
    reas = np.max(np.abs(f[..., None] * N + Y - phidot), axis=-1)
    m = valid
    return VelocitySplit(np.where(m, f, 0.0), Y, Yc,
                         float(np.max(tang[m])) if np.any(m) else 0.0,
                         float(np.max(reas[m])) if np.any(m) else 0.0)


def gauss_velocity(fam: DeformationFamily, field: GaussMapField, order: int = 2):
    """Slots of Phi_dot at t = 0 by central differences of phi_t ^ N_t."""
    h = fam.h_t
    if order == 2:
        raw = (fam.gauss_bivectors(h) - fam.gauss_bivectors(-h)) / (2 * h)
    elif order == 4:
        raw = (-fam.gauss_bivectors(2 * h) + 8 * fam.gauss_bivectors(h)
               - 8 * fam.gauss_bivectors(-h) + fam.gauss_bivectors(-2 * h)) / (12 * h)
    else:
        raise ValueError("order must be 2 or 4")
    return slots_from_bivector(raw, field.x, field.y, field.cfg.epsilon, field.cfg.sig)


def _normal_speed_gradient(fam: DeformationFamily, surface: Surface, split: VelocitySplit | None):
    """Coordinate gradient df of the normal speed: exact if f is known, else by grid differences."""
    if fam.f_fn is not None:
        nodes = fam.base.grid.nodes()
        return jets.scalar_gradient(fam.f_fn, nodes).reshape(fam.base.grid.shape + (fam.base.grid.n,))
    return gradient_field(split.f, fam.base.grid)


@dataclass(eq=False)
class HamiltonianCheck:
    residual: float  # max |G(Phi_dot, JJ Xbar_a) + d_a f|
    field: np.ndarray  # per node and direction
    df: np.ndarray
    mask: np.ndarray


def hamiltonian_residual(fam: DeformationFamily, mode: str = "formula", exact_velocity: bool = True,
                         time_order: int = 2) -> HamiltonianCheck:
    """Check G(Phi_dot, JJ Xbar) = -df(X) on every coordinate direction."""
    surface = analyze(fam.base)
    fld = gauss(surface, mode=mode)
    if not np.any(fld.immersed & surface.forms.valid):
        raise SingularMetric("Gauss map is not immersed anywhere")
    split = decompose_velocity(velocity(fam, exact=exact_velocity), surface)
    df = _normal_speed_gradient(fam, surface, split)
    Xd, Yd = gauss_velocity(fam, fld, time_order)
    eps, sig = fld.cfg.epsilon, fld.cfg.sig
    JX, JY = bigJ_slots(fld.X, fld.Y, eps)
    lhs = metric_slots(Xd[..., None, :], Yd[..., None, :], JX, JY, eps, sig)
    res = np.abs(lhs + df)
    mask = fld.valid
    value = float(np.max(res[mask])) if np.any(mask) else 0.0
    return HamiltonianCheck(value, res, df, mask)


@dataclass(eq=False)
class NormalVelocity:
    normal: tuple[np.ndarray, np.ndarray]  # slots of the normal part of Phi_dot
    expected: tuple[np.ndarray, np.ndarray]  # slots of -eps JJ grad f
    deviation: float
    mask: np.ndarray


def normal_velocity_gauss(fam: DeformationFamily, mode: str = "formula") -> NormalVelocity:
    """Normal part of Phi_dot (w.r.t. G) against -eps JJ grad f.

    The tangential part is the G-orthogonal projection onto the span of the
    pushforwards; grad f is the Phi*G gradient of the normal speed.
    """
    surface = analyze(fam.base)
    fld = gauss(surface, mode=mode)
    eps, sig = fld.cfg.epsilon, fld.cfg.sig
    mask = fld.valid
    if not np.any(mask):
        raise SingularMetric("Gauss map is not immersed anywhere")
    split = decompose_velocity(velocity(fam), surface)
    df = _normal_speed_gradient(fam, surface, split)
    Xd, Yd = gauss_velocity(fam, fld)
    n = fld.grid.n
    Gi = np.linalg.inv(np.where(mask[..., None, None], fld.gram_G, np.eye(n)))
    proj = metric_slots(Xd[..., None, :], Yd[..., None, :], fld.X, fld.Y, eps, sig)
    c = np.einsum("...ab,...b->...a", Gi, proj)
    Xn = Xd - np.einsum("...a,...ad->...d", c, fld.X)
    Yn = Yd - np.einsum("...a,...ad->...d", c, fld.Y)
    grad = np.einsum("...ab,...b->...a", Gi, df)
    gX = np.einsum("...a,...ad->...d", grad, fld.X)
    gY = np.einsum("...a,...ad->...d", grad, fld.Y)
    JX, JY = bigJ_slots(gX, gY, eps)
    eX, eY = -eps * JX, -eps * JY
    dev = np.max(np.abs(Xn - eX), axis=-1) + np.max(np.abs(Yn - eY), axis=-1)
    return NormalVelocity((Xn, Yn), (eX, eY), float(np.max(dev[mask])), mask)


def normal_derivative_residual(fam: DeformationFamily) -> float:
    """max |N_dot - (-eps grad f + dN(Y) - eps f phi)| with N_dot by central differences."""
    surface = analyze(fam.base)
    cfg = surface.cfg
    eps = cfg.epsilon
    h = fam.h_t
    Ndot = (fam.normals(h) - fam.normals(-h)) / (2 * h)
    split = decompose_velocity(velocity(fam), surface)
    df = _normal_speed_gradient(fam, surface, split)
    _, dphi, _ = surface.chart.jets
    mask = surface.forms.valid
    g = np.where(mask[..., None, None], surface.forms.g, np.eye(cfg.n))
    grad = np.einsum("...ab,...b->...a", np.linalg.inv(g), df)
    grad_amb = np.einsum("...a,...ad->...d", grad, dphi)
    AY = np.einsum("...ab,...b->...a", surface.forms.A, split.Y_coord)
    dNY = -np.einsum("...a,...ad->...d", AY, dphi)
    predicted = -eps * grad_amb + dNY - eps * split.f[..., None] * surface.chart.values
    err = np.max(np.abs(Ndot - predicted), axis=-1)
    return float(np.max(err[mask])) if np.any(mask) else 0.0
