import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bwdecay.core import (
    AmplitudeSeries,
    DomainError,
    EngineError,
    ErrorKind,
    QuadratureNonConvergence,
    Resonance,
    TimeGrid,
    ValidationError,
    as_complex,
    make_resonance,
    make_time_grid,
    ulp_distance,
)


def test_resonance_pole():
    R = make_resonance(1.0, 0.1)
    assert R.pole == complex(1.0, -0.05)
    assert R.pole.real == R.E_R and R.pole.imag == -R.Gamma / 2


@pytest.mark.parametrize("E_R, Gamma", [(1.0, 0.0), (-2.0, 0.1), (0.0, 1.0), (1.0, -1.0),
                                        (math.nan, 0.1), (1.0, math.inf)])
def test_resonance_rejects(E_R, Gamma):
    with pytest.raises(ValidationError):
        make_resonance(E_R, Gamma)


def test_resonance_scaled():
    R = Resonance(2.0, 0.4).scaled(10.0)
    assert (R.E_R, R.Gamma) == (20.0, 4.0)


@given(st.floats(1e-6, 1e6), st.floats(1e-6, 1e6))
def test_pole_in_open_fourth_quadrant(E_R, Gamma):
    z = make_resonance(E_R, Gamma).pole
    assert z.real > 0 and z.imag < 0


def test_linear_grid():
    assert make_time_grid(1, 4, 4, "linear").samples.tolist() == [1.0, 2.0, 3.0, 4.0]


def test_log_grid():
    assert make_time_grid(1, 8, 4, "logarithmic").samples.tolist() == [1.0, 2.0, 4.0, 8.0]


@pytest.mark.parametrize("args", [(0, 1, 10, "linear"), (-1, 1, 10, "linear"), (2, 1, 10, "linear"),
                                  (1, 2, 1, "linear"), (1, 2, 3.5, "linear"), (1, 2, 3, "cubic")])
def test_grid_rejects(args):
    with pytest.raises(ValidationError):
        make_time_grid(*args)


def test_grid_is_read_only():
    g = make_time_grid(1, 2, 3)
    with pytest.raises(ValueError):
        g.samples[0] = 5.0
    assert len(g) == 3 and list(g) == [1.0, 1.5, 2.0]


@settings(max_examples=200)
@given(st.floats(1e-6, 1e3), st.floats(1.01, 1e4), st.integers(2, 500), st.sampled_from(["linear", "logarithmic"]))
def test_grid_strictly_increasing(start, factor, points, spacing):
    g = TimeGrid(start, start * factor, points, spacing)
    s = g.samples
    assert np.all(np.isfinite(s)) and np.all(np.diff(s) > 0)
    assert s[0] == start and s[-1] == start * factor


def test_series_validation():
    t = np.array([1.0, 2.0])
    s = AmplitudeSeries("bw_halfline", t, [1 + 1j, 2j], [0.0, 1e-12])
    np.testing.assert_array_equal(s.abs2, [2.0, 4.0])
    with pytest.raises(ValidationError):
        AmplitudeSeries("nope", t, [1, 2])
    with pytest.raises(ValidationError):
        AmplitudeSeries("bw_halfline", t, [1, 2, 3])
    with pytest.raises(ValidationError):
        AmplitudeSeries("bw_halfline", t, [1, math.nan])
    with pytest.raises(ValidationError):
        AmplitudeSeries("bw_halfline", t, [1, 2], [-1.0, 0.0])


def test_as_complex():
    assert as_complex([1, -2]) == 1 - 2j
    assert as_complex(3) == 3 + 0j
    with pytest.raises(ValidationError):
        as_complex([1, 2, 3])
    with pytest.raises(ValidationError):
        as_complex(complex(math.inf, 0))


def test_ulp_distance():
    x = 1.0
    assert ulp_distance(x, x) == 0
    assert ulp_distance(x, math.nextafter(x, 2.0)) == 1
    assert ulp_distance(1j, 1j + 3 * math.ulp(1.0) * 1j) == 3


def test_error_taxonomy_one_line():
    err = QuadratureNonConvergence("did not converge", t=2.0)
    assert isinstance(err, EngineError)
    assert err.kind is ErrorKind.QUADRATURE_NONCONVERGENCE
    line = err.one_line()
    assert "\n" not in line
    assert line.startswith("error kind=quadrature_nonconvergence ")
    assert "t=2.0" in line
    assert DomainError("x").kind.value == "domain"
