"""Run configuration: a versioned TOML file with strict keys.

Example::

    version = 1
    seed = 0

    [space]                 # optional; defaults to the surface's space form
    n = 2
    p = 0
    epsilon = 1

    [surface]
    example = "clifford_torus"    # or grid_file = "phi.grid"
    resolution = 32
    jets = "analytic"             # or "fd"
    [surface.params]
    warp = 0.0

Every section and key is listed in SCHEMA below; anything else is an error.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass, field
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .errors import ConfigError
from .geodesic_space import SpaceFormConfig

VERSION = 1

# section -> key -> default (None means "not set")
SCHEMA: dict = {
    "space": {"n": None, "p": None, "epsilon": None},
    "surface": {"example": "clifford_torus", "params": {}, "grid_file": None, "resolution": 32,
                "jets": "analytic"},
    "tolerances": {"identity": 1e-10, "certificate_rel": 1e-6, "first_variation": 1e-6, "order": 1.9,
                   "curvature_rel": 0.01},
    "structures": {"samples": 1000, "steps": [0.04, 0.02, 0.01]},
    "variation": {"kind": "random", "families": 10, "resolutions": [16, 32, 64], "amplitude": 0.2,
                  "gprime": False},
    "functional": {"names": ["W", "Wprime", "HK"]},
    "parallel": {"thetas": [0.0, 0.2, 0.5], "functional": "W"},
    "search": {"family": "perturbed_sphere", "params": {}, "start": [0.1, 0.0], "functional": "W",
               "budget": 120, "polish": True, "bumps": 20, "workers": 1},
    "output": {"dir": None},
}
DEFAULT_SEED = 0

_TYPES = {
    ("space", "n"): int, ("space", "p"): int, ("space", "epsilon"): int,
    ("surface", "example"): str, ("surface", "params"): dict, ("surface", "grid_file"): str,
    ("surface", "resolution"): int, ("surface", "jets"): str,
    ("structures", "samples"): int, ("structures", "steps"): list,
    ("variation", "kind"): str, ("variation", "families"): int, ("variation", "resolutions"): list,
    ("variation", "gprime"): bool,
    ("functional", "names"): list, ("parallel", "thetas"): list, ("parallel", "functional"): str,
    ("search", "family"): str, ("search", "params"): dict, ("search", "start"): list,
    ("search", "functional"): str, ("search", "budget"): int, ("search", "polish"): bool,
    ("search", "bumps"): int, ("search", "workers"): int, ("output", "dir"): str,
}


@dataclass
class RunConfig:
    seed: int = DEFAULT_SEED
    sections: dict = field(default_factory=lambda: copy.deepcopy(SCHEMA))
    source: str = "<defaults>"

    def __getitem__(self, section: str) -> dict:
        return self.sections[section]

    @property
    def space(self) -> SpaceFormConfig | None:
        s = self.sections["space"]
        if all(s[k] is None for k in ("n", "p", "epsilon")):
            return None
        if any(s[k] is None for k in ("n", "p", "epsilon")):
            raise ValueError("[space] keys must be set together")
        return SpaceFormConfig(int(s["n"]), int(s["p"]), int(s["epsilon"]))

    def to_dict(self) -> dict:
        """Plain data accepted by ``from_dict``; unset keys are omitted (TOML has no null)."""
        body = {name: {k: copy.deepcopy(v) for k, v in sec.items() if v is not None}
                for name, sec in self.sections.items()}
        return {"version": VERSION, "seed": self.seed, **body}


def _check_type(section: str, key: str, value):
    want = _TYPES.get((section, key))
    if want is None:
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            raise ConfigError(f"[{section}] {key} must be a number")
        return float(value)
    if want is int and (not isinstance(value, int) or isinstance(value, bool)):
        raise ConfigError(f"[{section}] {key} must be an integer")
    if want is not int and not isinstance(value, want):
        raise ConfigError(f"[{section}] {key} must be of type {want.__name__}")
    return value


def from_dict(data: dict, source: str = "<dict>") -> RunConfig:
    data = dict(data)
    version = data.pop("version", None)
    if version != VERSION:
        raise ConfigError(f"{source}: config version must be {VERSION} (got {version!r})")
    seed = data.pop("seed", DEFAULT_SEED)
    if not isinstance(seed, int) or isinstance(seed, bool) or seed < 0:
        raise ConfigError(f"{source}: seed must be a non-negative integer")
    sections = copy.deepcopy(SCHEMA)
    for name, body in data.items():
        if name not in SCHEMA:
            raise ConfigError(f"{source}: unknown section or key {name!r}")
        if not isinstance(body, dict):
            raise ConfigError(f"{source}: [{name}] must be a table")
        for key, value in body.items():
            if key not in SCHEMA[name]:
                raise ConfigError(f"{source}: unknown key {key!r} in [{name}]")
            sections[name][key] = _check_type(name, key, value)
    cfg = RunConfig(seed, sections, source)
    validate(cfg)
    return cfg


def validate(cfg: RunConfig) -> None:
    try:
        cfg.space
    except ValueError as exc:
        raise ConfigError(f"{cfg.source}: invalid space form: {exc}") from None
    s = cfg["surface"]
    if s["jets"] not in ("analytic", "fd"):
        raise ConfigError(f"{cfg.source}: [surface] jets must be 'analytic' or 'fd'")
    if s["resolution"] < 4:
        raise ConfigError(f"{cfg.source}: [surface] resolution must be at least 4")
    if cfg["variation"]["kind"] not in ("random", "parallel"):
        raise ConfigError(f"{cfg.source}: [variation] kind must be 'random' or 'parallel'")
    known = ("W", "Wprime", "HK")
    for which in list(cfg["functional"]["names"]) + [cfg["search"]["functional"], cfg["parallel"]["functional"]]:
        if which not in known:
            raise ConfigError(f"{cfg.source}: unknown functional {which!r}; known: {', '.join(known)}")
    if cfg["search"]["budget"] < 0:
        raise ConfigError(f"{cfg.source}: [search] budget must be >= 0")


def loads(text: str, source: str = "<string>") -> RunConfig:
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{source}: {exc}") from None
    return from_dict(data, source)


def load(path) -> RunConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return loads(text, str(path))


def default() -> RunConfig:
    return RunConfig()
