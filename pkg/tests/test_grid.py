import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from lpext.errors import InsufficientResolutionError, PreconditionError, ShapeError
from lpext.grid import (Grid, GridFunction, Shell, bessel_apply, constant, fit_shell_decay,
                        forward_array, forward_transform, inner, inverse_transform, lp_norm,
                        restrict_ball, sample, shell_maxima, sobolev_norm, spike, translate)

finite = st.floats(-10, 10, allow_nan=False, allow_infinity=False)


def naive_transform(grid, values):
    # h^d sum_x f(x) exp(-2 pi i xi x), straight from the definition (d = 1)
    x = grid.axis_coordinates()
    xi = grid.axis_frequencies()
    return grid.spacing * np.exp(-2j * np.pi * np.outer(xi, x)) @ values


def test_grid_validation():
    with pytest.raises(PreconditionError):
        Grid(1, 8, "torus", 2.0)
    with pytest.raises(PreconditionError):
        Grid.torus(1, 0)
    with pytest.raises(PreconditionError):
        Grid(1, 8, "sphere", 1.0)
    with pytest.raises(PreconditionError):
        Grid.window(1, 8, -1.0)


def test_grid_geometry():
    g = Grid.window(2, 10, 5.0)
    assert g.spacing == 0.5 and g.cell_volume == 0.25 and g.shape == (10, 10)
    assert g.origin_index == 5 and not g.periodic
    assert np.allclose(g.point(g.nearest_index([1.0, -1.5])), [1.0, -1.5])
    t = Grid.torus(1, 8)
    assert t.origin_index == 0
    assert list(t.axis_frequencies()) == [-4, -3, -2, -1, 0, 1, 2, 3]
    # periodic reduction: 7/8 is at distance 1/8 from 0
    assert math.isclose(t.distance_from([0.0])[7], 1 / 8)


def test_grid_function_is_immutable_and_checked():
    g = Grid.torus(1, 4)
    f = constant(g, 2.0)
    with pytest.raises(ValueError):
        f.values[0] = 1.0
    with pytest.raises(ShapeError):
        GridFunction(g, np.ones(5))
    with pytest.raises(PreconditionError):
        GridFunction(g, np.array([1.0, np.nan, 0, 0]))


@pytest.mark.parametrize("grid", [Grid.torus(1, 16), Grid.window(1, 15, 3.0), Grid.window(1, 16, 4.0)])
def test_transform_matches_definition(grid):
    rng = np.random.default_rng(1)
    v = rng.standard_normal(grid.n) + 1j * rng.standard_normal(grid.n)
    assert np.allclose(forward_array(grid, v), naive_transform(grid, v), atol=1e-12)


def test_constant_transforms_to_delta():
    g = Grid.torus(2, 8)
    F = forward_transform(constant(g)).values
    expect = np.zeros(g.shape)
    expect[4, 4] = 1.0
    assert np.allclose(F, expect, atol=1e-14)


@settings(max_examples=40, deadline=None)
@given(arrays(np.float64, 32, elements=finite), st.sampled_from(["torus", "window"]))
def test_parseval_and_roundtrip(v, domain):
    g = Grid.torus(1, 32) if domain == "torus" else Grid.window(1, 32, 7.0)
    f = GridFunction(g, v)
    F = forward_transform(f)
    assert math.isclose(lp_norm(F, 2), lp_norm(f, 2), rel_tol=1e-10, abs_tol=1e-12)
    assert np.allclose(inverse_transform(F).values, f.values, atol=1e-10)


def test_lp_norms():
    g = Grid.torus(1, 64)
    f = sample(g, lambda x: math.sqrt(2) * np.sin(2 * np.pi * x))
    assert abs(lp_norm(f, 2) - 1) < 1e-14
    assert math.isclose(lp_norm(f, math.inf), math.sqrt(2), rel_tol=1e-12)
    assert lp_norm(constant(g, 3.0), 5) == pytest.approx(3.0, rel=1e-14)
    # huge exponents do not overflow
    assert lp_norm(constant(g, 10.0), 400) == pytest.approx(10.0, rel=1e-12)
    assert inner(f, f) == pytest.approx(1.0)


@settings(max_examples=40, deadline=None)
@given(arrays(np.float64, 16, elements=finite), st.integers(-40, 40),
       st.floats(1, 8, allow_nan=False))
def test_translate_preserves_norms_on_torus(v, s, p):
    f = GridFunction(Grid.torus(1, 16), v)
    assert math.isclose(lp_norm(translate(f, [s]), p), lp_norm(f, p), rel_tol=1e-12, abs_tol=1e-300)


def test_translate_window_zero_fill():
    g = Grid.window(1, 5, 5.0)
    f = GridFunction(g, np.arange(1.0, 6.0))
    assert list(translate(f, [2]).values.real) == [0, 0, 1, 2, 3]
    assert list(translate(f, [-1]).values.real) == [2, 3, 4, 5, 0]
    assert not translate(f, [7]).values.any()


def test_spike_translation_lands_on_target():
    g = Grid.torus(2, 8)
    f = translate(spike(g), (3, 5))
    assert f.values[3, 5] != 0 and np.count_nonzero(f.values) == 1


@settings(max_examples=30, deadline=None)
@given(arrays(np.float64, (9, 9), elements=finite),
       st.tuples(st.floats(-2, 2), st.floats(-2, 2)), st.floats(0, 3))
def test_restrict_ball_idempotent(v, c, r):
    f = GridFunction(Grid.window(2, 9, 4.5), v)
    once = restrict_ball(f, c, r)
    assert np.array_equal(restrict_ball(once, c, r).values, once.values)


def test_restrict_ball_counts_lattice_points():
    g = Grid.window(2, 21, 21.0)    # unit spacing, centered lattice
    f = restrict_ball(constant(g), [0.0, 0.0], 2.0)
    assert np.count_nonzero(f.values) == 13   # Gauss circle count N(2)


def test_bessel_potential_on_a_mode():
    g = Grid.torus(1, 32)
    f = sample(g, lambda x: np.cos(2 * np.pi * 3 * x))
    assert np.allclose(bessel_apply(f, 2).values, 10 * f.values, atol=1e-12)
    assert sobolev_norm(f, 0, 2) == pytest.approx(lp_norm(f, 2))
    assert sobolev_norm(f, 1, 2) == pytest.approx(math.sqrt(10) * lp_norm(f, 2))


def test_shell_maxima_and_power_law_fit():
    g = Grid.torus(1, 1024)
    r = g.frequency_radius()
    mag = np.where(r > 0, r, 1.0) ** -2.5
    shells = shell_maxima(g, mag)
    assert [s.k for s in shells] == list(range(10))
    assert shells[0].count == 2               # |xi| = 1
    # shell maxima sit at |xi| = 2^k, so the fit is exact
    assert [s.maximum for s in shells] == pytest.approx([2.0 ** (-2.5 * k) for k in range(10)])
    fit = fit_shell_decay(shells, 1e-14)
    assert fit.exponent == pytest.approx(2.5, abs=1e-10) and fit.r_squared == pytest.approx(1.0)


def test_fit_shell_decay_edge_cases():
    below = [Shell(0, 2, 1e-3), Shell(1, 2, 1e-20)]
    assert fit_shell_decay(below, 1e-14).superpolynomial
    assert math.isinf(fit_shell_decay([Shell(0, 2, 0.0)], 1e-14).exponent)
    with pytest.raises(InsufficientResolutionError):
        fit_shell_decay([Shell(0, 2, 1.0), Shell(1, 4, 0.5)], 1e-14, min_shells=3)
