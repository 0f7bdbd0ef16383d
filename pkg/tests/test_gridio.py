import numpy as np
import pytest

from congruence import gridio, surfaces
from congruence.errors import NotOnQuadric
from congruence.gauss_map import gauss
from congruence.hypersurface import analyze
from congruence.gridio import GridFormatError


@pytest.mark.parametrize("name,params", [("clifford_torus", {}), ("geodesic_sphere", {"r": 0.7}),
                                          ("hyperbolic_tube", {"r": 0.8, "L": 2.0})])
def test_chart_round_trip_is_bit_exact(name, params):
    ch = surfaces.examples(name, resolution=10, **params)
    text = gridio.chart_text(ch)
    back = gridio.chart_from_text(text)
    assert np.array_equal(back.values, ch.values)
    assert back.grid == ch.grid
    assert back.cfg == ch.cfg and back.name == ch.name and back.orientation == ch.orientation
    assert gridio.chart_text(back) == text


def test_imported_chart_has_fd_jets_close_to_analytic():
    ch = surfaces.clifford_torus(32)
    back = gridio.chart_from_text(gridio.chart_text(ch))
    assert not back.analytic
    a, b = analyze(ch).spectrum.k, analyze(back).spectrum.k
    assert np.max(np.abs(a - b)) < 0.02


def test_gauss_map_file():
    fld = gauss(analyze(surfaces.geodesic_sphere(0.7, 8)))
    grid, fields, header = gridio.loads(gridio.gauss_text(fld))
    assert header["kind"] == "gauss_map"
    assert np.array_equal(fields["x"], fld.x)
    assert np.array_equal(fields["valid"][..., 0].astype(bool), fld.valid)
    assert fields["gram_G"].shape == fld.grid.shape + (4,)


def test_write_and_read(tmp_path):
    ch = surfaces.clifford_torus(6)
    path = tmp_path / "c.grid"
    gridio.write(path, gridio.chart_text(ch))
    assert gridio.read(path) == gridio.chart_text(ch)
    with pytest.raises(GridFormatError):
        gridio.read(tmp_path / "missing.grid")


def _lines():
    return gridio.chart_text(surfaces.clifford_torus(6)).splitlines()


def test_bad_magic():
    lines = _lines()
    lines[0] = "# something else"
    with pytest.raises(GridFormatError):
        gridio.loads("\n".join(lines))


def test_missing_rows():
    with pytest.raises(GridFormatError):
        gridio.loads("\n".join(_lines()[:-1]))


def test_bad_number():
    lines = _lines()
    lines[3] = lines[3].replace(lines[3].split()[2], "abc", 1)
    with pytest.raises(GridFormatError):
        gridio.loads("\n".join(lines))


def test_coordinates_must_match_header():
    lines = _lines()
    toks = lines[3].split()
    toks[0] = "0.123"
    lines[3] = " ".join(toks)
    with pytest.raises(GridFormatError):
        gridio.loads("\n".join(lines))


def test_off_quadric_rejected():
    lines = _lines()
    toks = lines[4].split()
    toks[2] = repr(float(toks[2]) + 1e-3)
    lines[4] = " ".join(toks)
    with pytest.raises(NotOnQuadric):
        gridio.chart_from_text("\n".join(lines))


def test_gauss_file_is_not_a_chart():
    text = gridio.gauss_text(gauss(analyze(surfaces.clifford_torus(6))))
    with pytest.raises(GridFormatError):
        gridio.chart_from_text(text)
