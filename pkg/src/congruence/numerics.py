"""Small numerical helpers shared by the grid-based modules."""

from __future__ import annotations

import math

import numpy as np


def csum(values) -> float:
    """Deterministic, exactly rounded sum in row-major traversal order."""
    return math.fsum(np.asarray(values, dtype=float).ravel().tolist())


def observed_orders(steps, errors) -> list[float]:
    """log-ratio convergence orders between consecutive refinement levels."""
    out = []
    for (h0, e0), (h1, e1) in zip(zip(steps, errors), zip(steps[1:], errors[1:])):
        if e0 <= 0 or e1 <= 0:
            out.append(float("inf"))
        else:
            out.append(math.log(e0 / e1) / math.log(h0 / h1))
    return out


def grid_derivative(field: np.ndarray, axis: int, h: float, periodic: bool) -> np.ndarray:
    """Second-order first derivative along ``axis``.

    Interior nodes use the centered stencil. Clamped axes use the one-sided
    second-order stencil at the two boundary nodes.
    """
    f = np.moveaxis(np.asarray(field), axis, 0)
    if periodic:
        d = (np.roll(f, -1, axis=0) - np.roll(f, 1, axis=0)) / (2 * h)
    else:
        if f.shape[0] < 3:
            raise ValueError("clamped axis needs at least 3 nodes")
        d = np.empty_like(f, dtype=np.result_type(f, float))
        d[1:-1] = (f[2:] - f[:-2]) / (2 * h)
        d[0] = (-3 * f[0] + 4 * f[1] - f[2]) / (2 * h)
        d[-1] = (3 * f[-1] - 4 * f[-2] + f[-3]) / (2 * h)
    return np.moveaxis(d, 0, axis)


def grid_derivative4(field: np.ndarray, axis: int, h: float, periodic: bool) -> np.ndarray:
    """Fourth-order first derivative (periodic axes only; clamped falls back to 2nd order)."""
    if not periodic:
        return grid_derivative(field, axis, h, periodic)
    f = np.moveaxis(np.asarray(field), axis, 0)
    d = (-np.roll(f, -2, 0) + 8 * np.roll(f, -1, 0) - 8 * np.roll(f, 1, 0) + np.roll(f, 2, 0)) / (12 * h)
    return np.moveaxis(d, 0, axis)


def quadrature_weights(n_nodes: int, h: float, periodic: bool, polar: bool = False) -> tuple[np.ndarray, str]:
    """1D weights: trapezoid on periodic axes, composite Simpson on clamped axes.

    Simpson needs an odd node count; an even count falls back to the trapezoid
    rule and the returned rule id says so. A polar axis runs between two
    coordinate poles where the chart collapses; integrands there have the form
    G(cos t) sin t in the rescaled coordinate t in [0, pi], which extend to odd
    periodic functions, so the weights integrate the sine series exactly
    (spectral accuracy).
    """
    if periodic:
        return np.full(n_nodes, h), "periodic-trapezoid"
    if polar and n_nodes >= 3:
        M = n_nodes - 1
        t = np.pi * np.arange(n_nodes) / M
        k = np.arange(1, M, 2)
        w = (2.0 / M) * np.sin(np.outer(t, k)) @ (2.0 / k)
        return w * (h * M / np.pi), "polar-sine"
    if n_nodes % 2 == 1 and n_nodes >= 3:
        w = np.ones(n_nodes)
        w[1:-1:2] = 4.0
        w[2:-1:2] = 2.0
        return w * h / 3.0, "simpson"
    w = np.full(n_nodes, h)
    w[0] = w[-1] = h / 2
    return w, "trapezoid"


def grid_second_derivative(field: np.ndarray, axis: int, h: float, periodic: bool) -> np.ndarray:
    """Second-order pure second derivative along ``axis`` (one-sided at clamped ends)."""
    f = np.moveaxis(np.asarray(field), axis, 0)
    if periodic:
        d = (np.roll(f, -1, axis=0) - 2 * f + np.roll(f, 1, axis=0)) / h**2
    else:
        if f.shape[0] < 4:
            raise ValueError("clamped axis needs at least 4 nodes")
        d = np.empty_like(f, dtype=np.result_type(f, float))
        d[1:-1] = (f[2:] - 2 * f[1:-1] + f[:-2]) / h**2
        d[0] = (2 * f[0] - 5 * f[1] + 4 * f[2] - f[3]) / h**2
        d[-1] = (2 * f[-1] - 5 * f[-2] + 4 * f[-3] - f[-4]) / h**2
    return np.moveaxis(d, 0, axis)
