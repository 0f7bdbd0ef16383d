import pytest

from congruence import config
from congruence.errors import ConfigError
from congruence.geodesic_space import SpaceFormConfig


def test_defaults():
    cfg = config.default()
    assert cfg.seed == 0
    assert cfg.space is None
    assert cfg["surface"]["example"] == "clifford_torus"
    assert cfg["search"]["budget"] == 120


def test_full_file(tmp_path):
    path = tmp_path / "run.toml"
    path.write_text("""
version = 1
seed = 5

[space]
n = 2
p = 1
epsilon = -1

[surface]
example = "geodesic_sphere"
resolution = 20
[surface.params]
r = 0.4

[tolerances]
identity = 1e-9
""")
    cfg = config.load(path)
    assert cfg.seed == 5
    assert cfg.space == SpaceFormConfig(2, 1, -1)
    assert cfg["surface"]["params"] == {"r": 0.4}
    assert cfg["tolerances"]["identity"] == 1e-9
    assert cfg["tolerances"]["order"] == 1.9  # untouched default
    assert cfg.source == str(path)


@pytest.mark.parametrize("text", [
    "seed = 1",  # no version
    "version = 2",
    "version = 1\nseed = -1",
    "version = 1\n[colors]\nred = 1",
    "version = 1\n[surface]\nshape = 'cube'",
    "version = 1\n[surface]\nresolution = 'high'",
    "version = 1\n[surface]\nresolution = 2",
    "version = 1\n[surface]\njets = 'spline'",
    "version = 1\n[space]\nn = 2",
    "version = 1\n[functional]\nnames = ['area']",
    "version = 1\n[search]\nbudget = -3",
    "version = 1\n[tolerances]\nidentity = 'tight'",
    "version = 1\n[variation]\nkind = 'smooth'",
    "version = 1\nsurface = 3",
    "version = 1\n[surface\n",
])
def test_rejected(text):
    with pytest.raises(ConfigError):
        config.loads(text)


def test_integer_tolerance_is_accepted_as_float():
    cfg = config.loads("version = 1\n[tolerances]\norder = 2")
    assert cfg["tolerances"]["order"] == 2.0 and isinstance(cfg["tolerances"]["order"], float)


def test_missing_file(tmp_path):
    with pytest.raises(ConfigError):
        config.load(tmp_path / "nope.toml")


def test_to_dict_round_trip():
    cfg = config.loads("version = 1\nseed = 3\n[search]\nstart = [0.05, 0.01]")
    again = config.from_dict(cfg.to_dict())
    assert again.to_dict() == cfg.to_dict()
