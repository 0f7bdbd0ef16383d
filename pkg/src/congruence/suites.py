"""Verification suites: seeded identity sweeps and refinement studies.

Each suite returns plain data (dicts, RefinementStudy records) so that tests
and the command line share one implementation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import surfaces
from .ambient import random_isometry
from .functionals import closed_form, evaluate_functional, vol_gauss
from .gauss_map import (
    gauss,
    gprime_flatness_residual,
    induced_G,
    induced_Gprime,
    lagrangian_residual,
    quadric_check,
)
from .geodesic_space import (
    GeodesicTangent,
    OrientedGeodesic,
    SpaceFormConfig,
    Jprime_plane,
    bigJ,
    bigJprime_slots,
    chart,
    closedness_residual,
    metric_G,
    metric_Gprime,
    metric_Gprime_slots,
    metric_Gprime_via_G,
    omega,
    omega_slots,
    random_geodesic,
    random_tangent,
    scalar_curvature_numeric,
    tangent_basis,
)
from .hypersurface import analyze
from .numerics import observed_orders
from .variations import hamiltonian_residual, parallel_family, random_generator_family

# the three geodesic spaces of 3-dimensional space forms
STRUCTURE_CONFIGS = {
    "L+(S3)": SpaceFormConfig(2, 0, 1),
    "L-(S3_1)": SpaceFormConfig(2, 1, -1),
    "L+(S3_1)": SpaceFormConfig(2, 1, 1),
}


@dataclass
class RefinementStudy:
    label: str
    steps: list[float]
    errors: list[float]
    orders: list[float] = field(default_factory=list)

    def __post_init__(self):
        if not self.orders:
            self.orders = observed_orders(self.steps, self.errors)

    @property
    def min_order(self) -> float:
        return min(self.orders) if self.orders else math.nan

    def converges(self, order: float = 1.9, floor: float = 1e-12) -> bool:
        """Observed order at least ``order``, unless the error is already at the roundoff floor."""
        return max(self.errors) <= floor or self.min_order >= order

    def to_dict(self) -> dict:
        return {"label": self.label, "steps": self.steps, "errors": self.errors,
                "orders": [o if math.isfinite(o) else None for o in self.orders]}


def _rel(a: float, b: float) -> float:
    return abs(a - b) / (1.0 + abs(a) + abs(b))


def _slot_dev(t1: GeodesicTangent, t2: GeodesicTangent) -> float:
    scale = 1.0 + float(np.max(np.abs(np.concatenate([t1.X, t1.Y, t2.X, t2.Y]))))
    return float(np.max(np.abs(np.concatenate([t1.X - t2.X, t1.Y - t2.Y])))) / scale


def _moved(t: GeodesicTangent, base: OrientedGeodesic, L) -> GeodesicTangent:
    return GeodesicTangent(base, L @ t.X, L @ t.Y)


def structure_identities(cfg: SpaceFormConfig, n_samples: int = 1000, seed: int = 0) -> dict:
    """Largest relative deviation of each structure identity over seeded random geodesics.

    Deviations are |lhs - rhs| / (1 + |lhs| + |rhs|) for scalars and the slot
    analogue for tangent vectors.
    """
    rng = np.random.default_rng(seed)
    eps = cfg.epsilon
    worst: dict[str, float] = {}

    def note(key, value):
        worst[key] = max(worst.get(key, 0.0), float(value))

    for _ in range(n_samples):
        g = random_geodesic(cfg, rng)
        t1, t2 = random_tangent(g, rng), random_tangent(g, rng)
        note("J_squared", _slot_dev(bigJ(bigJ(t1)), -eps * t1))
        note("G_symmetric", _rel(metric_G(t1, t2), metric_G(t2, t1)))
        note("G_J_compatible", _rel(metric_G(bigJ(t1), bigJ(t2)), eps * metric_G(t1, t2)))
        w12 = float(omega_slots(t1.X, t1.Y, t2.X, t2.Y, cfg.sig))
        w21 = float(omega_slots(t2.X, t2.Y, t1.X, t1.Y, cfg.sig))
        note("Omega_from_G", _rel(w12, omega(t1, t2)))
        note("Omega_antisymmetric", _rel(w12, -w21))
        note("Omega_J_compatible", _rel(omega(bigJ(t1), bigJ(t2)), eps * omega(t1, t2)))
        basis = tangent_basis(g)
        BX, BY = np.array([b.X for b in basis]), np.array([b.Y for b in basis])
        W = omega_slots(BX[:, None], BY[:, None], BX[None], BY[None], cfg.sig)
        note("Omega_nondegenerate", abs(abs(np.linalg.det(W)) - 1.0))
        if cfg.n == 2:
            Jp = Jprime_plane(g)
            gp12 = metric_Gprime(t1, t2)
            note("Gprime_two_definitions", _rel(gp12, metric_Gprime_via_G(t1, t2)))
            note("Gprime_symmetric", _rel(gp12, float(metric_Gprime_slots(t2.X, t2.Y, t1.X, t1.Y, Jp, cfg.sig))))
        L = random_isometry(cfg.sig, rng)
        gL = OrientedGeodesic(L @ g.x, L @ g.y, cfg)
        s1, s2 = _moved(t1, gL, L), _moved(t2, gL, L)
        note("equivariant_G", _rel(metric_G(s1, s2), metric_G(t1, t2)))
        note("equivariant_Omega", _rel(omega(s1, s2), omega(t1, t2)))
        note("equivariant_J", _slot_dev(bigJ(s1), _moved(bigJ(t1), gL, L)))
        if cfg.n == 2:
            JpL = Jprime_plane(gL)
            note("equivariant_Gprime", _rel(float(metric_Gprime_slots(s1.X, s1.Y, s2.X, s2.Y, JpL, cfg.sig)), gp12))
            moved = GeodesicTangent(gL, *bigJprime_slots(s1.X, s1.Y, JpL))
            note("equivariant_Jprime", _slot_dev(moved, _moved(GeodesicTangent(g, *bigJprime_slots(t1.X, t1.Y, Jp)), gL, L)))
    return worst


def curvature_study(cfg: SpaceFormConfig, seed: int = 0, steps=(0.04, 0.02, 0.01)) -> dict:
    """Scalar curvatures of G and G' at a seeded random geodesic under step refinement.

    The G study measures the error against 2 eps n^2; the G' study measures
    |S(G')| itself. The closedness residual of Omega is reported at the finest step.
    """
    rng = np.random.default_rng(seed)
    ch = chart(random_geodesic(cfg, rng))
    target = 2 * cfg.epsilon * cfg.n ** 2
    sG = [scalar_curvature_numeric(ch, "G", h) for h in steps]
    out = {
        "target": target,
        "scalar_G": sG,
        "G": RefinementStudy("scalar curvature of G", list(steps), [abs(s - target) for s in sG]),
        "closedness": closedness_residual(ch, steps[-1]),
    }
    if cfg.n == 2:
        sP = [scalar_curvature_numeric(ch, "Gprime", h) for h in steps]
        out["scalar_Gprime"] = sP
        out["Gprime"] = RefinementStudy("scalar curvature of G'", list(steps), [abs(s) for s in sP])
    return out


def _examples(name, params, resolutions):
    return [surfaces.examples(name, resolution=res, **params) for res in resolutions]


def lagrangian_study(name: str, params: dict, resolutions=(16, 32, 64)) -> RefinementStudy:
    """Lagrangian residual of the finite-difference Gauss map under grid refinement."""
    errs, hs = [], []
    for ch in _examples(name, params, resolutions):
        errs.append(lagrangian_residual(gauss(analyze(ch), mode="fd")))
        hs.append(max(ch.grid.spacing))
    return RefinementStudy(f"lagrangian fd {name}", hs, errs)


def gprime_flatness_study(a: float, warp: float = 0.2, resolutions=(16, 32, 64)) -> RefinementStudy:
    """Curvature of Phi*G' on a reparameterized product torus under grid refinement.

    The warp makes the chart non-orthogonal, so the finite-difference curvature
    carries a genuine O(h^2) error rather than vanishing identically.
    """
    errs, hs = [], []
    for res in resolutions:
        ch = surfaces.product_torus(a, res, warp=warp)
        errs.append(gprime_flatness_residual(gauss(analyze(ch))))
        hs.append(ch.grid.spacing[0])
    return RefinementStudy(f"Gprime flatness a={a:.6g}", hs, errs)


def hamiltonian_study(name: str, params: dict, seed: int = 0, n_families: int = 10,
                      resolutions=(16, 32, 64), amplitude: float = 0.2) -> list[RefinementStudy]:
    """Hamiltonian residual of seeded random deformations under grid refinement.

    The time step is half the grid step. Errors are compared over the nodes
    shared by all levels (every 2^level-th node of level ``level``).
    """
    rng = np.random.default_rng(seed)
    charts = _examples(name, params, resolutions)
    out = []
    for k in range(n_families):
        fam_seed = int(rng.integers(1 << 31))
        errs, hs = [], []
        for lev, ch in enumerate(charts):
            fam = random_generator_family(ch, np.random.default_rng(fam_seed), h_t=min(ch.grid.spacing) / 2,
                                          amplitude=amplitude)
            chk = hamiltonian_residual(fam)
            st = 2 ** lev
            sub = np.where(chk.mask[..., None], chk.field, 0.0)[::st, ::st]
            errs.append(float(np.max(sub)))
            hs.append(fam.h_t)
        out.append(RefinementStudy(f"hamiltonian {name} family {k}", hs, errs))
    return out


def parallel_hamiltonian(name: str, params: dict, resolution: int = 32, speeds=(1.0, -0.5)) -> float:
    """Largest Hamiltonian residual of parallel families (exact velocities, closed-form jets)."""
    ch = surfaces.examples(name, resolution=resolution, **params)
    worst = 0.0
    for sp in speeds:
        chk = hamiltonian_residual(parallel_family(ch, speed=sp))
        if np.any(chk.mask):
            worst = max(worst, float(np.max(chk.field[chk.mask])))
    return worst


def corpus_report(name: str, params: dict, resolution: int = 32) -> dict:
    """Pipeline checks for one corpus surface with analytic jets."""
    ch = surfaces.examples(name, resolution=resolution, **params)
    s = analyze(ch)
    return corpus_report_from(s, gauss(s), params)


def corpus_report_from(s, fld, params: dict | None = None) -> dict:
    """Pipeline deviations of one analyzed surface, plus its functional values."""
    ch = s.chart
    params = ch.params if params is None else params
    ig = induced_G(fld)
    spec = s.spectrum
    rep = {
        "lagrangian_residual": lagrangian_residual(fld),
        "quadric_defect": quadric_check(fld),
        "induced_G_identity": ig.identity_deviation,
        "induced_G_principal": ig.principal_deviation,
        "induced_G_degenerate_nodes": int(ig.degenerate.sum()),
    }
    if ch.grid.n == 2:
        if np.any(fld.valid & spec.diagonalizable & ~spec.umbilic):
            rep["induced_Gprime_principal"] = induced_Gprime(fld).principal_deviation
        else:
            rep["induced_Gprime_principal"] = None
    values = {}
    for which in ("W", "Wprime", "HK") if ch.grid.n == 2 else ("W",):
        v = evaluate_functional(s, which).value
        values[which] = {"value": v, "closed_form": closed_form(ch.name, params, which)}
    values["Vol_G"] = {"value": vol_gauss(fld, "G").value, "closed_form": None}
    if ch.grid.n == 2:
        values["Vol_Gprime"] = {"value": vol_gauss(fld, "Gprime").value, "closed_form": None}
    rep["functionals"] = values
    return rep
