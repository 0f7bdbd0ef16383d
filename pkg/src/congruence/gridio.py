"""Plain-text grid files for charts and Gauss maps.

Layout (version 1)::

    # congruence-grid v1
    {"cfg": ..., "grid": ..., "fields": [["phi", 4]], ...}   one JSON line
    u_1 ... u_n  field components ...                        one line per node

Nodes are listed in row-major order of the grid; every float is written with
``repr`` so a file read back reproduces the arrays bit for bit. Coordinates
are written for readability and checked on import.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import ConfigError, NotOnQuadric
from .geodesic_space import SpaceFormConfig
from .hypersurface import Grid, ImmersionChart

MAGIC = "# congruence-grid v1"
QUADRIC_TOL = 1e-8


class GridFormatError(ConfigError):
    pass


def _grid_dict(grid: Grid) -> dict:
    return {"origin": list(grid.origin), "spacing": list(grid.spacing), "shape": list(grid.shape),
            "periodic": list(grid.periodic), "polar": list(grid.polar)}


def _grid_from(d: dict) -> Grid:
    try:
        return Grid(tuple(float(v) for v in d["origin"]), tuple(float(v) for v in d["spacing"]),
                    tuple(int(v) for v in d["shape"]), tuple(bool(v) for v in d["periodic"]),
                    tuple(bool(v) for v in d.get("polar", [False] * len(d["shape"]))))
    except (KeyError, TypeError, ValueError) as exc:
        raise GridFormatError(f"bad grid header: {exc}") from None


def dumps(grid: Grid, fields: dict, meta: dict | None = None) -> str:
    """Serialize named node fields (each of shape grid.shape + (k,)) with a JSON header."""
    shape = grid.shape
    cols = []
    spec = []  # ordered (name, width) pairs; the header keys are sorted, the columns are not
    for name, arr in fields.items():
        arr = np.asarray(arr, dtype=float)
        if arr.shape[: grid.n] != shape:
            raise ValueError(f"field {name!r} has shape {arr.shape}, grid is {shape}")
        flat = arr.reshape(grid.size, -1)
        spec.append([name, flat.shape[1]])
        cols.append(flat)
    header = dict(meta or {})
    header["grid"] = _grid_dict(grid)
    header["fields"] = spec
    lines = [MAGIC, json.dumps(header, sort_keys=True)]
    data = np.concatenate([grid.nodes()] + cols, axis=1)
    lines.extend(" ".join(repr(float(v)) for v in row) for row in data)
    return "\n".join(lines) + "\n"


def loads(text: str) -> tuple[Grid, dict, dict]:
    """Inverse of :func:`dumps`: (grid, fields, header)."""
    lines = text.splitlines()
    if len(lines) < 2 or lines[0].strip() != MAGIC:
        raise GridFormatError("not a congruence-grid v1 file")
    try:
        header = json.loads(lines[1])
    except json.JSONDecodeError as exc:
        raise GridFormatError(f"bad header line: {exc}") from None
    grid = _grid_from(header.get("grid", {}))
    spec = header.get("fields")
    try:
        spec = [(str(name), int(k)) for name, k in spec]
    except (TypeError, ValueError):
        raise GridFormatError("header field list must hold [name, width] pairs") from None
    if not spec:
        raise GridFormatError("header lists no fields")
    width = grid.n + sum(k for _, k in spec)
    rows = [ln for ln in lines[2:] if ln.strip()]
    if len(rows) != grid.size:
        raise GridFormatError(f"expected {grid.size} node lines, found {len(rows)}")
    try:
        data = np.array([[float(tok) for tok in ln.split()] for ln in rows])
    except ValueError as exc:
        raise GridFormatError(f"bad number: {exc}") from None
    if data.shape != (grid.size, width):
        raise GridFormatError(f"node lines must have {width} columns")
    if not np.all(np.isfinite(data)):
        raise GridFormatError("non-finite value in node data")
    if not np.array_equal(data[:, : grid.n], grid.nodes()):
        raise GridFormatError("node coordinates do not match the grid header")
    fields, col = {}, grid.n
    for name, k in spec:
        fields[name] = data[:, col: col + k].reshape(grid.shape + (k,))
        col += k
    return grid, fields, header


def _cfg_dict(cfg: SpaceFormConfig) -> dict:
    return {"n": cfg.n, "p": cfg.p, "epsilon": cfg.epsilon}


def chart_text(chart: ImmersionChart) -> str:
    meta = {"kind": "chart", "cfg": _cfg_dict(chart.cfg), "name": chart.name, "params": chart.params,
            "orientation": chart.orientation}
    return dumps(chart.grid, {"phi": chart.values}, meta)


def chart_from_text(text: str, fd_order: int = 2) -> ImmersionChart:
    """Chart with finite-difference jets from a grid file (checked to lie on the quadric)."""
    grid, fields, header = loads(text)
    if header.get("kind") != "chart" or "phi" not in fields:
        raise GridFormatError("file does not hold a chart")
    try:
        c = header["cfg"]
        cfg = SpaceFormConfig(int(c["n"]), int(c["p"]), int(c["epsilon"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise GridFormatError(f"bad space form: {exc}") from None
    if cfg.n != grid.n or fields["phi"].shape[-1] != cfg.dim:
        raise GridFormatError("space form does not match the grid and field sizes")
    chart = ImmersionChart(cfg, grid, fields["phi"], None, int(header.get("orientation", 1)), fd_order,
                           str(header.get("name", "")), dict(header.get("params", {})))
    defect = chart.quadric_defect()
    if defect > QUADRIC_TOL:
        raise NotOnQuadric(f"imported nodes leave the quadric by {defect:.3g}")
    return chart


def gauss_text(field) -> str:
    """Gauss map nodes: the geodesic (x, y), pushforward slots and the Phi*G Gram matrix."""
    n = field.grid.n
    meta = {"kind": "gauss_map", "cfg": _cfg_dict(field.cfg), "name": field.surface.chart.name,
            "params": field.surface.chart.params, "mode": field.mode}
    return dumps(field.grid, {
        "x": field.x, "y": field.y,
        "X": field.X.reshape(field.grid.shape + (-1,)), "Y": field.Y.reshape(field.grid.shape + (-1,)),
        "gram_G": field.gram_G.reshape(field.grid.shape + (n * n,)),
        "valid": field.valid[..., None].astype(float),
    }, meta)


def write(path, text: str) -> None:
    Path(path).write_text(text)


def read(path) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise GridFormatError(f"cannot read {path}: {exc}") from None
