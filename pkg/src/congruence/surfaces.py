"""Closed-form test surfaces in S^3 and in H^3 = S^3_{3,1}.

Every example orients its normal as d/d(parameter) of the family it belongs
to (radius for spheres and tubes, the angle ``a`` for product tori), so that
``parallel(chart, theta)`` moves the parameter by +theta.
"""

from __future__ import annotations

import math

import jax.numpy as jnp
import numpy as np

from .ambient import inner
from .errors import UnknownExample
from .geodesic_space import SpaceFormConfig
from .hypersurface import Grid, ImmersionChart, _normal_from_jets, cos_eps, sin_eps
from . import jets

S3 = SpaceFormConfig(2, 0, 1)
H3 = SpaceFormConfig(2, 3, -1)


def _orient(cfg, grid, fn, hint_fn) -> int:
    """Orientation sign making the cofactor normal agree with ``hint_fn``."""
    nodes = grid.nodes()
    mid = nodes[len(nodes) // 2 + grid.shape[-1] // 3][None, :]
    val, d1, _ = jets.value_jets(fn, mid, order=1)
    v, _, _, _ = _normal_from_jets(val, d1, cfg, 1)
    hint = jets.evaluate(hint_fn, mid)
    return 1 if inner(v[0], hint[0], cfg.sig) * cfg.epsilon > 0 else -1


def _build(cfg, grid, fn, hint_fn, name, params) -> ImmersionChart:
    orientation = _orient(cfg, grid, fn, hint_fn)
    return ImmersionChart.from_function(cfg, grid, fn, orientation, name, params)


def _sigma(u):
    return jnp.array([jnp.cos(u[0]) * jnp.cos(u[1]), jnp.cos(u[0]) * jnp.sin(u[1]), jnp.sin(u[0])])


def _sphere_grid(resolution, lat_max):
    # pole to pole gets the spectral polar rule; a cap keeps Simpson (odd count)
    kind = "polar" if abs(lat_max - math.pi / 2) < 1e-15 else "clamped"
    return Grid.build((kind, -lat_max, lat_max, 2 * resolution + 1), ("periodic", 0.0, 2 * math.pi, resolution))


def legendre(m: int, x):
    p0, p1 = jnp.ones_like(x), x
    if m == 0:
        return p0
    for j in range(1, m):
        p0, p1 = p1, ((2 * j + 1) * x * p1 - j * p0) / (j + 1)
    return p1


def geodesic_sphere(r: float = 0.7, resolution: int = 32, lat_max: float = math.pi / 2) -> ImmersionChart:
    """Distance sphere of radius r about e_4 in S^3; k = -cot r with the outward normal."""

    def fn(u):
        return jnp.concatenate([jnp.sin(r) * _sigma(u), jnp.array([jnp.cos(r)])])

    def hint(u):
        return jnp.concatenate([jnp.cos(r) * _sigma(u), jnp.array([-jnp.sin(r)])])

    return _build(S3, _sphere_grid(resolution, lat_max), fn, hint, "geodesic_sphere", {"r": r})


def equator(resolution: int = 32) -> ImmersionChart:
    ch = geodesic_sphere(math.pi / 2, resolution)
    ch.name = "equator"
    return ch


def perturbed_sphere(r: float = 0.7, amplitude: float = 0.1, mode: int = 2, resolution: int = 32,
                     coeffs=None, lat_max: float = math.pi / 2, space: str = "S3") -> ImmersionChart:
    """Zonal normal graph over a geodesic sphere: radius r + sum_m c_m P_m(sin(latitude)).

    ``coeffs`` maps Legendre degree to amplitude and overrides (amplitude, mode).
    ``space`` is "S3" or "H3" (distance spheres in hyperbolic space).
    """
    coeffs = dict(coeffs) if coeffs is not None else {int(mode): float(amplitude)}
    if space not in ("S3", "H3"):
        raise ValueError(f"unknown space {space!r}")
    hyper = space == "H3"
    c_fn, s_fn = (jnp.cosh, jnp.sinh) if hyper else (jnp.cos, jnp.sin)

    def radius(u):
        x = jnp.sin(u[0])
        return r + sum(c * legendre(m, x) for m, c in sorted(coeffs.items()))

    def fn(u):
        R = radius(u)
        return jnp.concatenate([s_fn(R) * _sigma(u), jnp.array([c_fn(R)])])

    def hint(u):
        R = radius(u)
        return jnp.concatenate([c_fn(R) * _sigma(u), jnp.array([s_fn(R) if hyper else -s_fn(R)])])

    name = "hyperbolic_perturbed_sphere" if hyper else "perturbed_sphere"
    return _build(H3 if hyper else S3, _sphere_grid(resolution, lat_max), fn, hint, name,
                  {"r": r, "coeffs": {str(m): c for m, c in sorted(coeffs.items())}})


def _torus_fn(a_of_u, warp: float):
    def coords(u):
        if warp:
            return jnp.array([u[0] + warp * jnp.sin(u[0] + u[1]), u[1] + warp * jnp.cos(2 * u[0] - u[1])])
        return u

    def fn(u):
        v = coords(u)
        a = a_of_u(v)
        return jnp.array([jnp.cos(a) * jnp.cos(v[0]), jnp.cos(a) * jnp.sin(v[0]),
                          jnp.sin(a) * jnp.cos(v[1]), jnp.sin(a) * jnp.sin(v[1])])

    def hint(u):
        v = coords(u)
        a = a_of_u(v)
        return jnp.array([-jnp.sin(a) * jnp.cos(v[0]), -jnp.sin(a) * jnp.sin(v[0]),
                          jnp.cos(a) * jnp.cos(v[1]), jnp.cos(a) * jnp.sin(v[1])])

    return fn, hint


def _torus_grid(resolution):
    return Grid.build(("periodic", 0.0, 2 * math.pi, resolution), ("periodic", 0.0, 2 * math.pi, resolution))


def product_torus(a: float = math.pi / 4, resolution: int = 32, warp: float = 0.0) -> ImmersionChart:
    """S^1(cos a) x S^1(sin a); principal curvatures tan a and -cot a.

    ``warp`` reparameterizes the chart by u -> (u1 + w sin(u1 + u2), u2 + w cos(2 u1 - u2)),
    which keeps the surface but makes every coordinate field non-constant.
    """
    fn, hint = _torus_fn(lambda v: a, warp)
    return _build(S3, _torus_grid(resolution), fn, hint, "product_torus", {"a": a, "warp": warp})


def clifford_torus(resolution: int = 32, warp: float = 0.0) -> ImmersionChart:
    ch = product_torus(math.pi / 4, resolution, warp)
    ch.name = "clifford_torus"
    return ch


def perturbed_torus(a: float = math.pi / 4, amplitude: float = 0.1, mode: int = 2,
                    resolution: int = 32) -> ImmersionChart:
    """Normal graph over T_a with angle a + amplitude * cos(mode u1) cos(u2)."""
    fn, hint = _torus_fn(lambda v: a + amplitude * jnp.cos(mode * v[0]) * jnp.cos(v[1]), 0.0)
    return _build(S3, _torus_grid(resolution), fn, hint, "perturbed_torus",
                  {"a": a, "amplitude": amplitude, "mode": mode})


def hyperbolic_geodesic_sphere(r: float = 0.8, resolution: int = 32,
                               lat_max: float = math.pi / 2) -> ImmersionChart:
    """Distance sphere of radius r in H^3 (the quadric S^3_{3,1}); |k| = coth r."""

    def fn(u):
        return jnp.concatenate([jnp.sinh(r) * _sigma(u), jnp.array([jnp.cosh(r)])])

    def hint(u):
        return jnp.concatenate([jnp.cosh(r) * _sigma(u), jnp.array([jnp.sinh(r)])])

    return _build(H3, _sphere_grid(resolution, lat_max), fn, hint, "hyperbolic_geodesic_sphere", {"r": r})


def hyperbolic_tube(r: float = 0.8, L: float = 2.0, resolution: int = 32) -> ImmersionChart:
    """Tube of radius r about a geodesic of H^3, axial length L; k = coth r, tanh r."""

    def fn(u):
        v, s = u[0], u[1]
        return jnp.array([jnp.sinh(r) * jnp.cos(v), jnp.sinh(r) * jnp.sin(v),
                          jnp.cosh(r) * jnp.sinh(s), jnp.cosh(r) * jnp.cosh(s)])

    def hint(u):
        v, s = u[0], u[1]
        return jnp.array([jnp.cosh(r) * jnp.cos(v), jnp.cosh(r) * jnp.sin(v),
                          jnp.sinh(r) * jnp.sinh(s), jnp.sinh(r) * jnp.cosh(s)])

    grid = Grid.build(("periodic", 0.0, 2 * math.pi, resolution), ("clamped", -L / 2, L / 2, resolution + 1))
    return _build(H3, grid, fn, hint, "hyperbolic_tube", {"r": r, "L": L})


def graph_perturbation(base: ImmersionChart, height) -> ImmersionChart:
    """Normal graph cos_eps(f) phi + sin_eps(f) N over ``base`` for a jax function f(u)."""
    eps = base.cfg.epsilon
    phi, nfn = base.fn, base.normal_fn()

    def fn(u):
        f = height(u)
        return cos_eps(f, eps, jnp) * phi(u) + sin_eps(f, eps, jnp) * nfn(u)

    def hint(u):
        f = height(u)
        return -eps * sin_eps(f, eps, jnp) * phi(u) + cos_eps(f, eps, jnp) * nfn(u)

    return _build(base.cfg, base.grid, fn, hint, f"graph({base.name})", dict(base.params))


_REGISTRY = {
    "geodesic_sphere": geodesic_sphere,
    "equator": equator,
    "perturbed_sphere": perturbed_sphere,
    "product_torus": product_torus,
    "clifford_torus": clifford_torus,
    "perturbed_torus": perturbed_torus,
    "hyperbolic_geodesic_sphere": hyperbolic_geodesic_sphere,
    "hyperbolic_tube": hyperbolic_tube,
}

NAMES = tuple(sorted(_REGISTRY))


def examples(name: str, **params) -> ImmersionChart:
    try:
        builder = _REGISTRY[name]
    except KeyError:
        raise UnknownExample(f"unknown example {name!r}; known: {', '.join(NAMES)}") from None
    return builder(**params)


# (name, params) pairs used as the standard corpus by tests and the CLI
CORPUS = (
    ("clifford_torus", {}),
    ("product_torus", {"a": math.pi / 6}),
    ("product_torus", {"a": math.pi / 3}),
    ("geodesic_sphere", {"r": 0.7}),
    ("perturbed_sphere", {"r": 0.7, "amplitude": 0.1, "mode": 2}),
    ("perturbed_torus", {"amplitude": 0.1, "mode": 2}),
    ("hyperbolic_geodesic_sphere", {"r": 0.8}),
    ("hyperbolic_tube", {"r": 0.8, "L": 2.0}),
)
