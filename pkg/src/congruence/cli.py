"""Command-line entry point.

Every subcommand builds a JSON report (sorted keys, no timestamps) so that the
same config and seed give byte-identical output. Exit codes: 0 pass, 1 suite
failure, 2 config error, 3 geometry or feasibility error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import config as config_mod
from . import gridio, optimize, suites, surfaces
from .errors import ConfigError, GeometryError, UnknownExample
from .functionals import closed_form, evaluate_functional, parallel_invariance, vol_gauss
from .gauss_map import gauss, induced_Gprime
from .hminimality import hminimal_residual
from .hypersurface import analyze, umbilic_fraction
from .variations import hamiltonian_residual, parallel_family

COMMANDS = ("structures-verify", "surface-analyze", "variation-check", "functional-eval", "parallel-check",
            "critical-search", "export-grid", "import-grid")


def _clean(obj):
    """JSON-safe copy: numpy scalars to Python, non-finite floats to None."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else None
    return obj


def dumps(report: dict) -> str:
    return json.dumps(_clean(report), sort_keys=True, indent=2) + "\n"


class Context:
    def __init__(self, cfg: config_mod.RunConfig, out: Path | None, csv: bool):
        self.cfg = cfg
        self.out = out
        self.csv = csv
        self.files: dict[str, str] = {}

    def table(self, name: str, text: str):
        if self.csv:
            self.files[name] = text

    def chart(self):
        s = self.cfg["surface"]
        if s["grid_file"]:
            chart = gridio.chart_from_text(gridio.read(s["grid_file"]))
        else:
            try:
                chart = surfaces.examples(s["example"], resolution=s["resolution"], **s["params"])
            except (UnknownExample, TypeError) as exc:
                raise ConfigError(f"[surface] {exc}") from None
            if s["jets"] == "fd":
                chart = chart.as_grid()
        space = self.cfg.space
        if space is not None and space != chart.cfg:
            raise ConfigError(f"[space] {space} does not match the surface's space form {chart.cfg}")
        return chart

    def source(self) -> dict:
        s = self.cfg["surface"]
        if s["grid_file"]:
            return {"grid_file": str(s["grid_file"])}
        return {"example": s["example"], "params": s["params"], "resolution": s["resolution"], "jets": s["jets"]}


# commands -------------------------------------------------------------------


def cmd_structures_verify(ctx: Context) -> tuple[dict, bool]:
    cfg = ctx.cfg
    space = cfg.space or surfaces.S3
    tol = cfg["tolerances"]
    ident = suites.structure_identities(space, cfg["structures"]["samples"], cfg.seed)
    curv = suites.curvature_study(space, cfg.seed, tuple(cfg["structures"]["steps"]))
    target = curv["target"]
    rel = [abs(s - target) / abs(target) for s in curv["scalar_G"]]
    checks = {
        "identities": max(ident.values()) <= tol["identity"],
        "scalar_curvature_within": max(rel) <= tol["curvature_rel"],
        "scalar_curvature_converges": curv["G"].converges(tol["order"]),
        "closedness": curv["closedness"] <= tol["identity"],
    }
    report = {"space": {"n": space.n, "p": space.p, "epsilon": space.epsilon}, "identities": ident,
              "scalar_curvature": {"target": target, "values": curv["scalar_G"], "relative_error": rel,
                                   "refinement": curv["G"].to_dict()},
              "closedness_residual": curv["closedness"]}
    if "Gprime" in curv:
        checks["Gprime_flat"] = max(curv["Gprime"].errors) <= 1e-9 or curv["Gprime"].converges(tol["order"])
        report["scalar_curvature_Gprime"] = {"values": curv["scalar_Gprime"], "refinement": curv["Gprime"].to_dict()}
    report["checks"] = checks
    return report, all(checks.values())


def _spectrum_csv(s) -> str:
    spec, grid = s.spectrum, s.chart.grid
    lines = [",".join([f"u{i + 1}" for i in range(grid.n)] + [f"k{i + 1}" for i in range(grid.n)]
                      + ["umbilic", "valid"])]
    k = spec.k.reshape(grid.size, -1)
    for c, kk, um, va in zip(grid.nodes(), k, spec.umbilic.ravel(), spec.valid.ravel()):
        lines.append(",".join([repr(float(x)) for x in c] + [repr(float(x)) for x in kk] + [str(int(um)), str(int(va))]))
    return "\n".join(lines) + "\n"


def cmd_surface_analyze(ctx: Context) -> tuple[dict, bool]:
    chart = ctx.chart()
    s = analyze(chart)
    fld = gauss(s)
    spec = s.spectrum
    k = spec.k[spec.valid]
    report = {"surface": ctx.source(), **suites.corpus_report_from(s, fld),
              "spectrum": {"k_min": k.min(axis=0).tolist() if k.size else None,
                           "k_max": k.max(axis=0).tolist() if k.size else None,
                           "umbilic_fraction": umbilic_fraction(spec),
                           "valid_fraction": float(np.mean(spec.valid))},
              "criticality": hminimal_residual(fld, ctx.cfg["tolerances"]["certificate_rel"]).to_dict()}
    ctx.table("spectrum.csv", _spectrum_csv(s))
    ctx.table("W_density.csv", evaluate_functional(s, "W").density_csv())
    return report, True


def cmd_variation_check(ctx: Context) -> tuple[dict, bool]:
    cfg = ctx.cfg
    v = cfg["variation"]
    chart = ctx.chart()
    if v["gprime"]:
        # G' checks need non-umbilic nodes; raises UmbilicDegeneracy otherwise
        induced_Gprime(gauss(analyze(chart)))
    tol = cfg["tolerances"]
    if v["kind"] == "parallel":
        chk = hamiltonian_residual(parallel_family(chart))
        res = float(np.max(chk.field[chk.mask])) if np.any(chk.mask) else 0.0
        report = {"kind": "parallel", "residual": res}
        ok = res <= tol["identity"]
    else:
        s = cfg["surface"]
        if s["grid_file"]:
            raise ConfigError("random variation refinement needs a built-in example surface")
        studies = suites.hamiltonian_study(s["example"], s["params"], cfg.seed, v["families"],
                                           tuple(v["resolutions"]), v["amplitude"])
        report = {"kind": "random", "studies": [st.to_dict() for st in studies],
                  "min_order": min(st.min_order for st in studies)}
        ok = all(st.converges(tol["order"]) for st in studies)
        rows = ["family,h,residual,order"]
        for i, st in enumerate(studies):
            for j, (h, e) in enumerate(zip(st.steps, st.errors)):
                o = st.orders[j - 1] if j else float("nan")
                rows.append(f"{i},{h!r},{e!r},{o!r}")
        ctx.table("refinement.csv", "\n".join(rows) + "\n")
    report["surface"] = ctx.source()
    report["pass"] = ok
    return report, ok


def cmd_functional_eval(ctx: Context) -> tuple[dict, bool]:
    chart = ctx.chart()
    s = analyze(chart)
    fld = gauss(s)
    params, name = chart.params, chart.name
    values = {}
    for which in ctx.cfg["functional"]["names"]:
        rep = evaluate_functional(s, which)
        values[which] = {**rep.to_dict(), "closed_form": closed_form(name, params, which)}
        ctx.table(f"{which}_density.csv", rep.density_csv())
    for which in ("G", "Gprime") if chart.grid.n == 2 else ("G",):
        values[f"Vol_{which}"] = vol_gauss(fld, which).to_dict()
    return {"surface": ctx.source(), "functionals": values}, True


def cmd_parallel_check(ctx: Context) -> tuple[dict, bool]:
    p = ctx.cfg["parallel"]
    rep = parallel_invariance(ctx.chart(), p["thetas"], p["functional"])
    ok = rep.deviation <= ctx.cfg["tolerances"]["first_variation"] and rep.gauss_deviation <= ctx.cfg["tolerances"]["identity"]
    return {"surface": ctx.source(), **rep.to_dict(), "pass": ok}, ok


def cmd_critical_search(ctx: Context) -> tuple[dict, bool]:
    cfg = ctx.cfg
    sp = cfg["search"]
    try:
        family = optimize.make_family(sp["family"], **sp["params"])
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None
    rel = cfg["tolerances"]["certificate_rel"]
    trace = optimize.minimize(family, sp["start"], sp["functional"], sp["budget"], sp["polish"], rel)
    report = {"family": {"name": family.name, "labels": list(family.labels), "params": family.params},
              "trace": trace.to_dict()}
    ctx.table("trace.csv", trace.to_csv())
    best = trace.best
    ok, crit = optimize.certify_critical(family, best.theta, None, sp["functional"], sp["bumps"], cfg.seed,
                                         cfg["tolerances"]["first_variation"], rel, sp["workers"])
    report["certificate"] = {"theta": best.theta.tolist(), "certified": ok, **crit.to_dict()}
    first = trace.entries[0].residual
    report["residual_reduction"] = first / best.residual if best.residual > 0 else None
    return report, ok


def cmd_export_grid(ctx: Context) -> tuple[dict, bool]:
    chart = ctx.chart()
    text = gridio.chart_text(chart)
    ctx.files["chart.grid"] = text
    gtext = gridio.gauss_text(gauss(analyze(chart)))
    ctx.files["gauss_map.grid"] = gtext
    back = gridio.chart_text(gridio.chart_from_text(text))
    return {"surface": ctx.source(), "nodes": chart.grid.size, "roundtrip_bit_exact": back == text}, back == text


def cmd_import_grid(ctx: Context) -> tuple[dict, bool]:
    path = ctx.cfg["surface"]["grid_file"]
    if not path:
        raise ConfigError("import-grid needs [surface] grid_file or --grid")
    text = gridio.read(path)
    chart = gridio.chart_from_text(text)
    exact = gridio.chart_text(chart) == text
    s = analyze(chart)
    fld = gauss(s)
    report = {"surface": ctx.source(), "name": chart.name, "nodes": chart.grid.size,
              "roundtrip_bit_exact": exact, **suites.corpus_report_from(s, fld)}
    return report, exact


HANDLERS = {
    "structures-verify": cmd_structures_verify,
    "surface-analyze": cmd_surface_analyze,
    "variation-check": cmd_variation_check,
    "functional-eval": cmd_functional_eval,
    "parallel-check": cmd_parallel_check,
    "critical-search": cmd_critical_search,
    "export-grid": cmd_export_grid,
    "import-grid": cmd_import_grid,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="congruence", description="Gauss maps of hypersurfaces in spaces of geodesics.")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", type=Path, help="TOML run configuration")
        p.add_argument("--seed", type=int, help="seed for randomized suites (overrides the config)")
        p.add_argument("--resolution", type=int, help="grid resolution (overrides the config)")
        p.add_argument("--out", type=Path, help="directory for the JSON report and tables")
        p.add_argument("--json", action="store_true", help="print the JSON report to stdout")
        p.add_argument("--csv", action="store_true", help="write plot-ready CSV tables to --out")
        if name in ("import-grid", "surface-analyze", "functional-eval"):
            p.add_argument("--grid", type=Path, help="grid file to analyze instead of a built-in example")
        if name == "critical-search":
            p.add_argument("--budget", type=int, help="evaluation budget (overrides the config)")
    return ap


def _resolve(args) -> config_mod.RunConfig:
    cfg = config_mod.load(args.config) if args.config else config_mod.default()
    if args.seed is not None:
        if args.seed < 0:
            raise ConfigError("--seed must be non-negative")
        cfg.seed = args.seed
    if args.resolution is not None:
        cfg["surface"]["resolution"] = args.resolution
    if getattr(args, "grid", None) is not None:
        cfg["surface"]["grid_file"] = str(args.grid)
    if getattr(args, "budget", None) is not None:
        cfg["search"]["budget"] = args.budget
    if args.out is None and cfg["output"]["dir"]:
        args.out = Path(cfg["output"]["dir"])
    config_mod.validate(cfg)
    return cfg


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    ctx = None
    try:
        cfg = _resolve(args)
        ctx = Context(cfg, args.out, args.csv)
        report, ok = HANDLERS[args.command](ctx)
        status = 0 if ok else 1
    except ConfigError as exc:
        report, status = {"error": type(exc).__name__, "message": str(exc)}, exc.exit_code
    except GeometryError as exc:
        report, status = {"error": type(exc).__name__, "message": str(exc)}, exc.exit_code
    report = {"command": args.command, "status": status, **report}
    text = dumps(report)
    if args.out is not None:
        args.out.mkdir(parents=True, exist_ok=True)
        (args.out / f"{args.command}.json").write_text(text)
        if status in (0, 1) and ctx is not None:
            for name, body in sorted(ctx.files.items()):
                (args.out / name).write_text(body)
    if args.json:
        sys.stdout.write(text)
    else:
        line = "PASS" if status == 0 else ("FAIL" if status == 1 else f"ERROR {report.get('error')}")
        print(f"{args.command}: {line}")
        if status >= 2:
            print(report.get("message", ""), file=sys.stderr)
    return status


if __name__ == "__main__":
    sys.exit(main())
