import math

import numpy as np
import pytest
from scipy import special

from lpext.errors import MeasureParameterError, ProbabilityViolationError, ShapeError
from lpext.grid import Grid, japanese_bracket
from lpext.measure import (MeasureSpec, density, estimate_decay, multiplier_array, sphere_fourier,
                           verify_probability)

BUILTIN_1D = [MeasureSpec.uniform(), MeasureSpec.heat(0.05), MeasureSpec.heat(0.005),
              MeasureSpec.mollified_two_point(0.25, 1e-3)]


def _at(grid, spec, xi):
    idx = tuple(int(k + grid.n // 2) for k in np.atleast_1d(xi))
    return multiplier_array(spec, grid)[idx]


def test_uniform_is_delta_in_frequency():
    g = Grid.torus(2, 8)
    m = multiplier_array(MeasureSpec.uniform(), g)
    assert m[4, 4] == 1 and np.count_nonzero(m) == 1


def test_heat_formula():
    g = Grid.torus(1, 16)
    assert _at(g, MeasureSpec.heat(0.05), 3) == pytest.approx(math.exp(-0.05 * 4 * math.pi**2 * 9))


def test_two_point_formula():
    g = Grid.torus(1, 16)
    val = _at(g, MeasureSpec.mollified_two_point(0.25, 1e-4), 2)
    assert val.real == pytest.approx(-math.exp(-16 * math.pi**2 * 1e-4), abs=1e-15)
    # the quoted value is rounded to five digits
    assert val.real == pytest.approx(-0.98435, abs=5e-5)


def test_sphere_fourier_closed_forms():
    z = np.linspace(0.0, 30.0, 301)
    assert np.allclose(sphere_fourier(2, z), special.j0(z))
    # d = 3: sin z / z
    assert np.allclose(sphere_fourier(3, z), np.sinc(z / np.pi), atol=1e-13)
    assert sphere_fourier(5, np.array([0.0]))[0] == 1.0


def test_sphere_needs_two_dimensions():
    with pytest.raises(MeasureParameterError):
        multiplier_array(MeasureSpec.mollified_sphere(0.25, 1e-3), Grid.torus(1, 8))
    m = multiplier_array(MeasureSpec.mollified_sphere(0.25, 1e-3), Grid.torus(2, 16))
    assert m[8, 8] == 1


@pytest.mark.parametrize("spec", BUILTIN_1D[:3])
def test_builtins_are_probability_measures(spec):
    rep = verify_probability(spec, Grid.torus(1, 128))
    assert rep.ok and rep.mass == 1.0


def test_density_of_heat_is_periodized_gaussian():
    g = Grid.torus(1, 64)
    t = 0.01
    x = g.axis_coordinates()
    # heat kernel for multiplier exp(-4 pi^2 t xi^2) has variance 2t
    var = 2 * t
    oracle = sum(np.exp(-(x - m) ** 2 / (2 * var)) for m in range(-3, 4)) / math.sqrt(2 * math.pi * var)
    assert np.allclose(density(MeasureSpec.heat(t), g).values.real, oracle, atol=1e-12)


def test_custom_table_checks():
    g = Grid.torus(1, 8)
    tab = np.ones(8)
    MeasureSpec.custom(tab)                   # construction does not know the grid
    with pytest.raises(ShapeError):
        multiplier_array(MeasureSpec.custom(np.ones(4)), g)
    tab[4] = 0.5
    with pytest.raises(ProbabilityViolationError):
        multiplier_array(MeasureSpec.custom(tab), g)
    with pytest.raises(MeasureParameterError):
        MeasureSpec.custom([1.0, np.inf])


def test_parameter_validation():
    with pytest.raises(MeasureParameterError):
        MeasureSpec.heat(0.0)
    with pytest.raises(MeasureParameterError):
        MeasureSpec.mollified_two_point(0.6, 1e-3)
    with pytest.raises(MeasureParameterError):
        MeasureSpec("gamma")
    with pytest.raises(MeasureParameterError):
        MeasureSpec.heat(0.1, support_radius=-1.0)


def test_decay_estimates():
    g = Grid.torus(1, 1024)
    alpha, r2 = estimate_decay(MeasureSpec.heat(0.05), g)
    assert math.isinf(alpha)
    tab = japanese_bracket(g) ** -1.5
    alpha, r2 = estimate_decay(MeasureSpec.custom(tab), g)
    assert alpha == pytest.approx(1.5, rel=0.05) and r2 > 0.99
