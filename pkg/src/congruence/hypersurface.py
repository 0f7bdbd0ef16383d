"""Hypersurfaces of S^{n+1}_{p,1} sampled on tensor-product grids.

An :class:`ImmersionChart` holds node values of an immersion phi and, when
available, the jax-traceable parameterization that produced them. Charts with
a parameterization get exact derivative jets; charts without one (imported
grids, ``as_grid()`` copies) use second-order finite differences.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import cached_property

import numpy as np

from . import jets
from .ambient import inner
from .errors import NullNormal, RankLoss, SingularMetric, WrongCausalType
from .geodesic_space import SpaceFormConfig, curvature_from_jets
from .numerics import grid_derivative, grid_derivative4, grid_second_derivative

RANK_TOL = 1e-10
UMBILIC_TOL = 1e-6


@dataclass(frozen=True)
class Grid:
    origin: tuple[float, ...]
    spacing: tuple[float, ...]
    shape: tuple[int, ...]
    periodic: tuple[bool, ...]
    polar: tuple[bool, ...] = ()  # clamped axes whose two ends are coordinate poles

    def __post_init__(self):
        if not self.polar:
            object.__setattr__(self, "polar", (False,) * len(self.shape))

    @classmethod
    def build(cls, *axes) -> Grid:
        """Each axis is ``("periodic", start, length, N)``, ``("clamped", a, b, N)``
        or ``("polar", a, b, N)`` (clamped, with the chart collapsing at both ends)."""
        origin, spacing, shape, periodic, polar = [], [], [], [], []
        for kind, a, b, N in axes:
            N = int(N)
            if kind == "periodic":
                origin.append(float(a))
                spacing.append(float(b) / N)
                periodic.append(True)
            elif kind in ("clamped", "polar"):
                origin.append(float(a))
                spacing.append((float(b) - float(a)) / (N - 1))
                periodic.append(False)
            else:
                raise ValueError(f"unknown axis kind {kind!r}")
            polar.append(kind == "polar")
            shape.append(N)
        return cls(tuple(origin), tuple(spacing), tuple(shape), tuple(periodic), tuple(polar))

    @property
    def n(self) -> int:
        return len(self.shape)

    @property
    def size(self) -> int:
        return int(np.prod(self.shape))

    def axes(self) -> list[np.ndarray]:
        return [o + h * np.arange(N) for o, h, N in zip(self.origin, self.spacing, self.shape)]

    def mesh(self) -> np.ndarray:
        """Node coordinates, shape ``shape + (n,)``."""
        return np.stack(np.meshgrid(*self.axes(), indexing="ij"), axis=-1)

    def nodes(self) -> np.ndarray:
        return self.mesh().reshape(-1, self.n)

    def refined(self, factor: int = 2) -> Grid:
        shape, spacing = [], []
        for N, h, per in zip(self.shape, self.spacing, self.periodic):
            if per:
                shape.append(N * factor)
                spacing.append(h / factor)
            else:
                shape.append((N - 1) * factor + 1)
                spacing.append(h / factor)
        return Grid(self.origin, tuple(spacing), tuple(shape), self.periodic, self.polar)


def shrink_mask(mask: np.ndarray, grid: Grid) -> np.ndarray:
    """Nodes whose centered stencil along every axis stays inside ``mask``."""
    out = mask.copy()
    for axis, per in enumerate(grid.periodic):
        for shift in (1, -1):
            rolled = np.roll(mask, shift, axis=axis)
            if not per:
                idx = [slice(None)] * mask.ndim
                idx[axis] = 0 if shift == 1 else -1
                rolled[tuple(idx)] = True
            out &= rolled
    return out


def d_field(field, grid: Grid, axis: int, order: int = 2):
    if order == 4:
        return grid_derivative4(field, axis, grid.spacing[axis], grid.periodic[axis])
    return grid_derivative(field, axis, grid.spacing[axis], grid.periodic[axis])


def gradient_field(field, grid: Grid, order: int = 2):
    """Coordinate gradient of a grid field; new axis inserted after the grid axes."""
    return np.stack([d_field(field, grid, a, order) for a in range(grid.n)], axis=grid.n)


def hessian_field(field, grid: Grid):
    n = grid.n
    out = [[None] * n for _ in range(n)]
    for a in range(n):
        da = d_field(field, grid, a)
        for b in range(n):
            if a == b:
                out[a][b] = grid_second_derivative(field, a, grid.spacing[a], grid.periodic[a])
            elif b > a:
                out[a][b] = d_field(da, grid, b)
            else:
                out[a][b] = out[b][a]
    return np.stack([np.stack(row, axis=n) for row in out], axis=n)


@dataclass(eq=False)
class ImmersionChart:
    cfg: SpaceFormConfig
    grid: Grid
    values: np.ndarray
    fn: object = None
    orientation: int = 1
    fd_order: int = 2
    name: str = ""
    params: dict = field(default_factory=dict)

    @classmethod
    def from_function(cls, cfg, grid, fn, orientation=1, name="", params=None) -> ImmersionChart:
        vals = jets.evaluate(fn, grid.nodes()).reshape(grid.shape + (cfg.dim,))
        return cls(cfg, grid, vals, fn, orientation, 2, name, dict(params or {}))

    @classmethod
    def from_jets(cls, cfg, grid, phi, dphi, ddphi, orientation=1, name="", params=None, fn=None) -> ImmersionChart:
        """Chart whose derivative jets are already known (e.g. from a closed-form family)."""
        chart = cls(cfg, grid, phi, fn, orientation, 2, name, dict(params or {}))
        chart.__dict__["jets"] = (phi, dphi, ddphi)
        return chart

    @property
    def analytic(self) -> bool:
        return self.fn is not None

    @cached_property
    def jets(self):
        """(phi, dphi, ddphi) with shapes shape+(dim,), shape+(n,dim), shape+(n,n,dim)."""
        shape, n, dim = self.grid.shape, self.grid.n, self.cfg.dim
        if self.fn is not None:
            _, d1, d2 = jets.value_jets(self.fn, self.grid.nodes())
            return self.values, d1.reshape(shape + (n, dim)), d2.reshape(shape + (n, n, dim))
        d1 = gradient_field(self.values, self.grid, self.fd_order)
        d2 = hessian_field(self.values, self.grid)
        return self.values, d1, d2

    def as_grid(self, fd_order: int = 2) -> ImmersionChart:
        """Same node values, finite-difference jets."""
        return ImmersionChart(self.cfg, self.grid, self.values, None, self.orientation, fd_order,
                              self.name, dict(self.params))

    def quadric_defect(self) -> float:
        return float(np.max(np.abs(inner(self.values, self.values, self.cfg.sig) - 1.0)))

    def normal_fn(self):
        if self.fn is None:
            raise ValueError("chart has no parameterization")
        return jets.normal_function(self.fn, self.cfg.sig.eta, self.orientation)


@dataclass(eq=False)
class NormalField:
    N: np.ndarray
    epsilon: int
    valid: np.ndarray  # False where d(phi) loses rank


@dataclass(eq=False)
class FundamentalForms:
    g: np.ndarray
    h: np.ndarray  # <N, d_a d_b phi>
    A: np.ndarray  # shape operator in the coordinate frame, A = g^{-1} h
    valid: np.ndarray


@dataclass(eq=False)
class ShapeSpectrum:
    k: np.ndarray  # principal curvatures, descending
    frame: np.ndarray  # [..., :, i] coordinate components of e_i
    eps: np.ndarray  # g(e_i, e_i)
    diagonalizable: np.ndarray
    umbilic: np.ndarray
    valid: np.ndarray

    def ambient_frame(self, dphi):
        """Principal directions as ambient vectors, shape [..., i, dim]."""
        return np.einsum("...ai,...ad->...id", self.frame, dphi)


def _normal_from_jets(phi, dphi, cfg: SpaceFormConfig, orientation: int):
    rows = np.concatenate([phi[..., None, :], dphi], axis=-2)
    c = jets.cofactor_vector(rows, xp=np)
    v = orientation * cfg.sig.eta * c
    q = inner(v, v, cfg.sig)
    norm2 = np.sum(v * v, axis=-1)
    # rank test relative to the best conditioned node of the chart
    valid = norm2 > (1e-9 * np.sqrt(np.max(norm2))) ** 2
    return v, q, norm2, valid


def unit_normal(chart: ImmersionChart) -> NormalField:
    """Unit normal by the generalized cross product of (phi, d phi).

    Nodes where d(phi) loses rank are masked. A null complement at a node of
    full rank raises NullNormal; a causal type other than ``cfg.epsilon``
    raises WrongCausalType.
    """
    phi, dphi, _ = chart.jets
    v, q, norm2, valid = _normal_from_jets(phi, dphi, chart.cfg, chart.orientation)
    null = valid & (np.abs(q) < RANK_TOL * norm2)
    if np.any(null):
        raise NullNormal(f"{int(null.sum())} node(s) have a null normal direction")
    signs = np.sign(q[valid])
    if signs.size and np.any(signs != chart.cfg.epsilon):
        raise WrongCausalType(f"normal has <N,N> of sign {signs[0]:+.0f}, config says {chart.cfg.epsilon:+d}")
    N = np.where(valid[..., None], v / np.sqrt(np.abs(np.where(valid, q, 1.0)))[..., None], 0.0)
    return NormalField(N, chart.cfg.epsilon, valid)


def fundamental_forms(chart: ImmersionChart, normal: NormalField, tol: float = RANK_TOL) -> FundamentalForms:
    """First fundamental form g, second fundamental form h and shape operator A.

    A X = -(dN X)^T, so in coordinates A = -g^{-1} <dN, dphi> = g^{-1} <N, dd phi>.
    """
    _, dphi, ddphi = chart.jets
    sig = chart.cfg.sig
    g = inner(dphi[..., :, None, :], dphi[..., None, :, :], sig)
    h = inner(normal.N[..., None, None, :], ddphi, sig)
    det = np.linalg.det(g)
    valid = normal.valid & (np.abs(det) > tol)
    safe_g = np.where(valid[..., None, None], g, np.eye(chart.grid.n))
    A = np.linalg.solve(safe_g, h)
    A = np.where(valid[..., None, None], A, 0.0)
    return FundamentalForms(g, h, A, valid)


def principal_decomposition(g, A, tol: float = UMBILIC_TOL, valid=None) -> ShapeSpectrum:
    """g-self-adjoint eigenproblem A e = k e with a g-orthonormal eigenframe.

    Complex eigenvalues or a g-null eigenvector clear the ``diagonalizable``
    flag (no exception). Umbilic nodes get a g-orthonormalized coordinate frame.
    """
    g = np.asarray(g)
    A = np.asarray(A)
    n = g.shape[-1]
    shape = g.shape[:-2]
    if valid is None:
        valid = np.ones(shape, dtype=bool)
    w, V = np.linalg.eig(np.where(valid[..., None, None], A, np.eye(n)))
    scale = 1.0 + np.max(np.abs(w), axis=-1)
    real = np.max(np.abs(w.imag), axis=-1) <= 1e-9 * scale
    k = w.real
    V = V.real
    order = np.argsort(-k, axis=-1)
    k = np.take_along_axis(k, order, axis=-1)
    V = np.take_along_axis(V, order[..., None, :], axis=-1)
    umbilic = (k[..., 0] - k[..., -1]) < tol * scale

    # umbilic nodes: any g-orthonormal frame is principal
    V = np.where(umbilic[..., None, None], np.broadcast_to(np.eye(n), V.shape), V)
    frame = np.empty_like(V)
    eps = np.empty(shape + (n,))
    degenerate = np.zeros(shape, dtype=bool)
    for i in range(n):
        v = V[..., :, i].copy()
        for j in range(i):
            e = frame[..., :, j]
            c = np.einsum("...a,...ab,...b->...", v, g, e) * eps[..., j]
            v = v - c[..., None] * e
        q = np.einsum("...a,...ab,...b->...", v, g, v)
        bad = np.abs(q) < 1e-10 * np.maximum(np.einsum("...a,...a->...", v, v), 1e-300)
        degenerate |= bad
        q = np.where(bad, 1.0, q)
        frame[..., :, i] = v / np.sqrt(np.abs(q))[..., None]
        eps[..., i] = np.sign(q)
    diagonalizable = valid & real & ~degenerate
    return ShapeSpectrum(k, frame, eps, diagonalizable, umbilic & valid, valid)


def cos_eps(theta, eps: int, xp=np):
    return xp.cos(theta) if eps == 1 else xp.cosh(theta)


def sin_eps(theta, eps: int, xp=np):
    return xp.sin(theta) if eps == 1 else xp.sinh(theta)


def parallel(chart: ImmersionChart, normal: NormalField, theta: float, check: bool = True) -> ImmersionChart:
    """phi_theta = cos_eps(theta) phi + sin_eps(theta) N.

    The parallel surface keeps the orientation whose normal is d/dtheta phi_theta,
    so parallel(parallel(phi, a), b) = parallel(phi, a + b).
    """
    eps = normal.epsilon
    c, s = cos_eps(theta, eps), sin_eps(theta, eps)
    if chart.fn is not None:
        base, nfn = chart.fn, chart.normal_fn()

        def fn(u):
            return c * base(u) + s * nfn(u)

        values = jets.evaluate(fn, chart.grid.nodes()).reshape(chart.values.shape)
    else:
        fn = None
        values = c * chart.values + s * normal.N
    out = ImmersionChart(chart.cfg, chart.grid, values, fn, chart.orientation, chart.fd_order,
                         f"parallel({chart.name},{theta:g})", dict(chart.params, theta=theta))
    # orientation: match N_theta = -eps sin_eps(theta) phi + cos_eps(theta) N
    expected = -eps * s * chart.values + c * normal.N
    phi, dphi, _ = out.jets
    v, q, norm2, valid = _normal_from_jets(phi, dphi, out.cfg, 1)
    ok = valid & normal.valid
    if check and np.any(normal.valid & ~valid):
        bad = normal.valid & ~valid
        err = RankLoss(f"parallel surface at theta={theta:g} loses rank at {int(bad.sum())} node(s)")
        err.mask = bad
        raise err
    if np.any(ok):
        idx = tuple(np.argwhere(ok)[0])
        out.orientation = 1 if inner(v[idx], expected[idx], out.cfg.sig) * out.cfg.epsilon > 0 else -1
    return out


def intrinsic_curvature(chart: ImmersionChart) -> np.ndarray:
    """Gauss curvature of phi*g (n = 2), i.e. half its scalar curvature.

    Uses exact metric jets for parameterized charts and finite differences of
    the metric field otherwise.
    """
    sig = chart.cfg.sig
    n = chart.grid.n
    if chart.fn is not None:
        import jax
        import jax.numpy as jnp

        eta = jnp.asarray(sig.eta)
        fn = chart.fn

        def metric(u):
            J = jax.jacfwd(fn)(u)  # (dim, n)
            return J.T @ (eta[:, None] * J)

        g, dg, ddg = jets.evaluate_many(
            lambda u: (metric(u), jnp.moveaxis(jax.jacfwd(metric)(u), -1, 0),
                       jnp.moveaxis(jnp.moveaxis(jax.hessian(metric)(u), -1, 0), -1, 0)),
            chart.grid.nodes())
        shape = chart.grid.shape
        g = g.reshape(shape + (n, n))
        dg = dg.reshape(shape + (n, n, n))
        ddg = ddg.reshape(shape + (n, n, n, n))
    else:
        _, dphi, _ = chart.jets
        g = inner(dphi[..., :, None, :], dphi[..., None, :, :], sig)
        dg = gradient_field(g, chart.grid)
        dg = np.moveaxis(dg, chart.grid.n, -3)
        ddg = hessian_field(g, chart.grid)
        ddg = np.moveaxis(np.moveaxis(ddg, chart.grid.n, -4), chart.grid.n, -3)
    valid = np.abs(np.linalg.det(g)) > RANK_TOL
    gs = np.where(valid[..., None, None], g, np.eye(n))
    _, _, scal = curvature_from_jets(gs, dg, ddg)
    return np.where(valid, 0.5 * scal, np.nan)


@dataclass(eq=False)
class Surface:
    """A chart together with its normal, fundamental forms and principal spectrum."""

    chart: ImmersionChart
    normal: NormalField
    forms: FundamentalForms
    spectrum: ShapeSpectrum

    @property
    def cfg(self) -> SpaceFormConfig:
        return self.chart.cfg

    @property
    def valid(self) -> np.ndarray:
        return self.spectrum.diagonalizable

    @property
    def area_element(self) -> np.ndarray:
        return np.sqrt(np.abs(np.linalg.det(self.forms.g)))


def analyze(chart: ImmersionChart, umbilic_tol: float = UMBILIC_TOL) -> Surface:
    normal = unit_normal(chart)
    forms = fundamental_forms(chart, normal)
    spec = principal_decomposition(forms.g, forms.A, umbilic_tol, forms.valid)
    return Surface(chart, normal, forms, spec)


def rank_margin(chart: ImmersionChart) -> float:
    """Smallest |det g| over nodes the chart claims valid; used as an immersion guard."""
    _, dphi, _ = chart.jets
    g = inner(dphi[..., :, None, :], dphi[..., None, :, :], chart.cfg.sig)
    return float(np.min(np.abs(np.linalg.det(g))))


def isometry_image(chart: ImmersionChart, L: np.ndarray) -> ImmersionChart:
    """Apply an ambient isometry L (dim x dim) to the chart."""
    L = np.asarray(L)
    values = chart.values @ L.T
    fn = None
    if chart.fn is not None:
        import jax.numpy as jnp

        base, Lj = chart.fn, jnp.asarray(L)

        def fn(u):
            return Lj @ base(u)

    orientation = chart.orientation * (1 if np.linalg.det(L) > 0 else -1)
    return replace(chart, values=values, fn=fn, orientation=orientation,
                   name=f"isometry({chart.name})", params=dict(chart.params))


def umbilic_fraction(spec: ShapeSpectrum) -> float:
    m = spec.valid
    return float(spec.umbilic[m].mean()) if np.any(m) else math.nan
