"""Curvature functionals of hypersurfaces and volumes of their Gauss maps.

W(phi)  = int sqrt(prod_i |eps + k_i^2|) dV
W'(phi) = int |k_1 - k_2| dA                      (n = 2)
HK      = int sqrt(H^2 - K + sign) dA             (n = 2)

and Vol(Phi), Vol'(Phi) for the metrics G, G' pulled back by the Gauss map.
Integrals are tensor-product quadratures over the chart grid, reduced with an
exactly rounded sum.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import NegativeRadicand
from .gauss_map import GaussMapField, gauss
from .hypersurface import Grid, ImmersionChart, Surface, analyze, intrinsic_curvature, parallel
from .numerics import csum, quadrature_weights


@dataclass(eq=False)
class FunctionalReport:
    name: str
    value: float
    density: np.ndarray  # integrand per unit coordinate area, 0 on masked nodes
    mask: np.ndarray
    masked_fraction: float
    rule: tuple[str, ...]
    grid: Grid
    notes: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        g = self.grid
        return {
            "functional": self.name,
            "value": self.value,
            "masked_fraction": self.masked_fraction,
            "quadrature": list(self.rule),
            "grid": {"origin": list(g.origin), "spacing": list(g.spacing), "shape": list(g.shape),
                     "periodic": list(g.periodic), "polar": list(g.polar)},
            "notes": self.notes,
        }

    def density_csv(self) -> str:
        """Node table of the density with its mask, for external plotting."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        n = self.grid.n
        w.writerow([f"u{i + 1}" for i in range(n)] + ["density", "valid"])
        coords = self.grid.nodes()
        for c, d, m in zip(coords, self.density.ravel(), self.mask.ravel()):
            w.writerow([repr(float(x)) for x in c] + [repr(float(d)), int(m)])
        return buf.getvalue()


def quadrature(grid: Grid):
    """Tensor-product weights over the grid and the per-axis rule ids."""
    weights, rules = [], []
    for N, h, per, pol in zip(grid.shape, grid.spacing, grid.periodic, grid.polar):
        w, rule = quadrature_weights(N, h, per, pol)
        weights.append(w)
        rules.append(rule)
    W = weights[0]
    for w in weights[1:]:
        W = np.multiply.outer(W, w)
    return W, tuple(rules)


def integrate(density, mask, grid: Grid, name: str, notes=None) -> FunctionalReport:
    """Compensated sum of density * weight over unmasked nodes."""
    W, rules = quadrature(grid)
    dens = np.where(mask, density, 0.0)
    value = csum(dens * W)
    return FunctionalReport(name, value, dens, mask, float(1.0 - np.mean(mask)), rules, grid, dict(notes or {}))


def _surface(obj) -> Surface:
    return obj if isinstance(obj, Surface) else analyze(obj)


def functional_W(surface) -> FunctionalReport:
    """int sqrt(prod |eps + k_i^2|) sqrt|det g| over diagonalizable nodes."""
    s = _surface(surface)
    eps = s.cfg.epsilon
    spec = s.spectrum
    dens = np.sqrt(np.prod(np.abs(eps + spec.k ** 2), axis=-1)) * s.area_element
    return integrate(dens, spec.diagonalizable, s.chart.grid, "W")


def functional_Wprime(surface) -> FunctionalReport:
    """int |k_1 - k_2| dA (n = 2)."""
    s = _surface(surface)
    if s.chart.grid.n != 2:
        raise ValueError("W' is defined for surfaces (n = 2)")
    spec = s.spectrum
    dens = np.abs(spec.k[..., 0] - spec.k[..., 1]) * s.area_element
    return integrate(dens, spec.diagonalizable, s.chart.grid, "Wprime")


def functional_HK(surface, sign: int | None = None, tol: float = 1e-6, snap: float = 1e-10) -> FunctionalReport:
    """int sqrt(H^2 - K + sign) dA with H = (k_1 + k_2)/2.

    K is the Gauss curvature of the Riemannian metric eps*phi^*g (for eps = -1
    the induced metric is negative definite), so that with sign = eps the
    radicand equals ((k_1 - k_2)/2)^2 and the value is W'/2. Radicands below
    -tol raise NegativeRadicand; radicands within ``snap`` (relative) of zero
    are treated as zero, since sqrt would otherwise turn roundoff into
    O(sqrt(roundoff)) noise at umbilics.
    """
    s = _surface(surface)
    if s.chart.grid.n != 2:
        raise ValueError("the H, K functional is defined for surfaces (n = 2)")
    eps = s.cfg.epsilon
    sign = eps if sign is None else int(sign)
    spec = s.spectrum
    H = 0.5 * (spec.k[..., 0] + spec.k[..., 1])
    K = eps * intrinsic_curvature(s.chart)
    mask = spec.diagonalizable & np.isfinite(K)
    rad = np.where(mask, H * H - np.where(mask, K, 0.0) + sign, 0.0)
    scale = 1.0 + H * H + np.abs(np.where(mask, K, 0.0))
    worst = float(np.min(rad[mask] / scale[mask])) if np.any(mask) else 0.0
    if worst < -tol:
        raise NegativeRadicand(f"H^2 - K {sign:+d} reaches {worst:.3g} (relative)")
    rad = np.where(rad < snap * scale, 0.0, rad)
    dens = np.sqrt(rad) * s.area_element
    return integrate(dens, mask, s.chart.grid, "HK", {"sign": sign, "relation": "HK = Wprime / 2 when sign = eps"})


def vol_gauss(field_or_surface, which: str = "G") -> FunctionalReport:
    """Volume of the Gauss map for Phi*G or Phi*G': int sqrt|det Gram| over valid nodes."""
    fld = field_or_surface if isinstance(field_or_surface, GaussMapField) else gauss(field_or_surface)
    if which == "G":
        gram = fld.gram_G
    elif which == "Gprime":
        if fld.gram_Gprime is None:
            raise ValueError("G' is only defined for n = 2")
        gram = fld.gram_Gprime
    else:
        raise ValueError(f"unknown metric {which!r}")
    dens = np.sqrt(np.abs(np.linalg.det(gram)))
    mask = fld.surface.forms.valid
    return integrate(dens, mask, fld.grid, f"Vol_{which}")


FUNCTIONALS = {
    "W": functional_W,
    "Wprime": functional_Wprime,
    "HK": functional_HK,
}


def evaluate_functional(surface, which: str) -> FunctionalReport:
    try:
        fn = FUNCTIONALS[which]
    except KeyError:
        raise ValueError(f"unknown functional {which!r}; known: {', '.join(FUNCTIONALS)}") from None
    return fn(surface)


@dataclass(eq=False)
class ParallelReport:
    functional: str
    thetas: list[float]
    values: list[float]
    deviation: float  # max pairwise |value difference|
    gauss_deviation: float  # max node-wise |Phi_theta - Phi| over commonly valid nodes

    def to_dict(self) -> dict:
        return {"functional": self.functional, "thetas": self.thetas, "values": self.values,
                "deviation": self.deviation, "gauss_deviation": self.gauss_deviation}


def parallel_invariance(chart: ImmersionChart, thetas, which: str = "W") -> ParallelReport:
    """Functional values on the parallel surfaces phi_theta, and Gauss-map agreement."""
    base = analyze(chart)
    phi0 = gauss(base)
    biv0 = phi0.bivectors()
    values, gdev = [], 0.0
    for theta in thetas:
        pc = parallel(chart, base.normal, float(theta))
        s = analyze(pc)
        values.append(evaluate_functional(s, which).value)
        m = s.forms.valid & base.forms.valid
        if np.any(m):
            d = np.max(np.abs(gauss(s).bivectors() - biv0), axis=(-1, -2))
            gdev = max(gdev, float(np.max(d[m])))
    dev = max(values) - min(values) if values else 0.0
    return ParallelReport(which, [float(t) for t in thetas], values, float(dev), gdev)


def closed_form(name: str, params: dict, which: str) -> float | None:
    """Known values for the built-in examples (None if not available)."""
    if which == "W":
        if name in ("geodesic_sphere", "hyperbolic_geodesic_sphere", "equator"):
            return 4 * math.pi
        if name in ("product_torus", "clifford_torus"):
            return 4 * math.pi ** 2
        if name == "hyperbolic_tube":
            return 2 * math.pi * params.get("L", 2.0)
    if which == "Wprime":
        if name in ("geodesic_sphere", "hyperbolic_geodesic_sphere", "equator"):
            return 0.0
        if name in ("product_torus", "clifford_torus"):
            return 4 * math.pi ** 2
        if name == "hyperbolic_tube":
            return 2 * math.pi * params.get("L", 2.0)
    if which == "HK":
        v = closed_form(name, params, "Wprime")
        return None if v is None else v / 2
    return None
