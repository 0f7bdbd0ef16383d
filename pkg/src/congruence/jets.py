"""Exact derivative jets of jax-traceable parameterizations.

A parameterization is a function ``u -> phi(u)`` taking a length-n array and
returning a point of R^{n+2}, written with ``jax.numpy`` so it can be
differentiated. Everything else in the package works on plain numpy arrays.
"""

from __future__ import annotations

import jax

jax.config.update("jax_enable_x64", True)

import jax.numpy as jnp  # noqa: E402
import numpy as np  # noqa: E402


CHUNK = 4096


def _chunked(fun, nodes):
    """Apply a vmapped ``fun`` to fixed-size chunks of nodes.

    A fixed batch shape lets jax reuse its compiled primitives across grids of
    every size; the last chunk is padded by repeating its final node.
    """
    nodes = np.asarray(nodes, dtype=np.float64)
    m = nodes.shape[0]
    outs = []
    for start in range(0, m, CHUNK):
        block = nodes[start:start + CHUNK]
        pad = CHUNK - block.shape[0]
        if pad:
            block = np.concatenate([block, np.repeat(block[-1:], pad, axis=0)])
        res = fun(jnp.asarray(block))
        res = res if isinstance(res, tuple) else (res,)
        outs.append([np.asarray(r)[: CHUNK - pad] for r in res])
    return tuple(np.concatenate(parts, axis=0) for parts in zip(*outs))


def value_jets(fn, nodes: np.ndarray, order: int = 2):
    """Values, first and (optionally) second derivatives of ``fn`` at each node.

    Returns arrays of shape (M, dim), (M, n, dim), (M, n, n, dim).
    """

    def jac(u):
        return jnp.moveaxis(jax.jacfwd(fn)(u), -1, 0)

    def hess(u):
        return jnp.moveaxis(jnp.moveaxis(jax.hessian(fn)(u), -1, 0), -1, 0)

    if order < 2:
        val, d1 = _chunked(jax.vmap(lambda u: (fn(u), jac(u))), nodes)
        return val, d1, None
    return _chunked(jax.vmap(lambda u: (fn(u), jac(u), hess(u))), nodes)


def scalar_gradient(fn, nodes: np.ndarray) -> np.ndarray:
    return _chunked(jax.vmap(jax.grad(fn)), nodes)[0]


def evaluate(fn, nodes: np.ndarray) -> np.ndarray:
    return _chunked(jax.vmap(fn), nodes)[0]


def evaluate_many(fun, nodes: np.ndarray):
    """Chunked evaluation of a function returning a tuple of per-node arrays."""
    return _chunked(jax.vmap(fun), nodes)


def cofactor_vector(rows, xp=jnp):
    """Vector c with c . w = det[rows; w] for (n+1) rows of length n+2."""
    rows = xp.asarray(rows)
    m = rows.shape[-1]
    cols = []
    for i in range(m):
        keep = [j for j in range(m) if j != i]
        minor = rows[..., :, keep]
        sign = (-1) ** (m - 1 + i)
        cols.append(sign * xp.linalg.det(minor))
    return xp.stack(cols, axis=-1)


def normal_function(fn, eta, orientation: int = 1):
    """jax-traceable unit normal ``u -> N(u)`` of the hypersurface ``fn``."""
    eta = jnp.asarray(eta)

    def N(u):
        x = fn(u)
        J = jnp.moveaxis(jax.jacfwd(fn)(u), -1, 0)
        c = cofactor_vector(jnp.concatenate([x[None, :], J], axis=0))
        v = orientation * eta * c
        return v / jnp.sqrt(jnp.abs(jnp.sum(eta * v * v)))

    return N
