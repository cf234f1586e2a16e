import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from lpext.errors import DegenerateInputError, PreconditionError
from lpext.extremizer import (SolverConfig, ascend, brute_force_norm, brute_force_search, el_map,
                              el_residual, estimate_norm, functional)
from lpext.grid import Grid, GridFunction, constant, lp_norm, translate
from lpext.measure import MeasureSpec, verify_probability
from lpext.operator import ConvOperator
from lpext.riesz import ExponentPair

PAIR = ExponentPair(2, 4)

# frozen from a verified run: torus n = 128, (p, q) = (2, 4), default solver
HEAT_005_NORM = 1.1131820689828882


def _op(spec, n=128):
    return ConvOperator(spec, Grid.torus(1, n))


def test_uniform_norm_is_one():
    phi, res = estimate_norm(_op(MeasureSpec.uniform(), 64), PAIR, SolverConfig(PAIR))
    assert phi == pytest.approx(1.0, abs=1e-12) and res.converged


def test_wide_heat_has_constant_extremizer():
    # m(1)^2 = exp(-0.4 pi^2) < 1/3 is below the threshold at which the constant
    # stops being a local maximum for (p, q) = (2, 4)
    op = _op(MeasureSpec.heat(0.05))
    phi, res = estimate_norm(op, PAIR, SolverConfig(PAIR))
    assert phi == pytest.approx(1.0, abs=1e-12)
    assert np.allclose(res.f.values, 1.0, atol=1e-8)


def test_narrow_heat_regression():
    op = _op(MeasureSpec.heat(0.005))
    phi, res = estimate_norm(op, PAIR, SolverConfig(PAIR))
    assert res.converged and res.el_residual <= 1e-7
    assert phi == pytest.approx(HEAT_005_NORM, rel=1e-9)
    # the extremizer is a bump, not the constant
    assert lp_norm(res.f, math.inf) > 1.5


@pytest.mark.parametrize("spec", [MeasureSpec.heat(0.05), MeasureSpec.heat(0.005),
                                  MeasureSpec.heat(0.02)])
def test_agrees_with_brute_force_when_density_is_positive(spec):
    op = _op(spec, 8)
    assert verify_probability(spec, op.grid).min_density > -0.05
    phi, _ = estimate_norm(op, PAIR, SolverConfig(PAIR, restarts=4))
    assert phi == pytest.approx(brute_force_norm(op, PAIR, restarts=8), rel=1e-6)


def test_brute_force_beats_cone_on_unresolved_grid():
    # on 8 points the sampled heat(0.002) kernel has negative values, so the
    # discrete operator is not positivity preserving and signed inputs win
    spec = MeasureSpec.heat(0.002)
    op = _op(spec, 8)
    assert not verify_probability(spec, op.grid).ok
    phi, _ = estimate_norm(op, PAIR, SolverConfig(PAIR))
    assert brute_force_norm(op, PAIR, restarts=8) > phi * (1 + 1e-5)


def test_brute_force_is_small_grid_only():
    with pytest.raises(PreconditionError):
        brute_force_search(_op(MeasureSpec.uniform(), 16), PAIR)


def test_extremizer_is_a_fixed_point():
    op = _op(MeasureSpec.heat(0.005))
    phi, res = estimate_norm(op, PAIR, SolverConfig(PAIR))
    out = el_map(op, PAIR, res.f, phi)
    assert lp_norm(out - res.f, 2) <= 1e-7
    assert el_residual(op, PAIR, res.f, phi) == pytest.approx(res.el_residual)


def test_history_and_decrease_bookkeeping():
    op = _op(MeasureSpec.heat(0.005))
    res = ascend(op, PAIR, SolverConfig(PAIR, init="random", seed=3))
    assert res.history[0][0] == 0 and res.iterations == len(res.history) - 1
    drops = [a[1] - b[1] for a, b in zip(res.history, res.history[1:])]
    assert res.max_decrease == pytest.approx(max(0.0, max(drops)))


def test_translation_invariance_of_functional():
    op = _op(MeasureSpec.mollified_two_point(0.25, 1e-3), 64)
    f = GridFunction(op.grid, np.random.default_rng(0).random(64))
    assert functional(op, PAIR, translate(f, [17])) == pytest.approx(functional(op, PAIR, f), rel=1e-12)


@settings(max_examples=25, deadline=None)
@given(arrays(np.float64, 16, elements=st.floats(0.01, 5)), st.floats(0.1, 10))
def test_functional_scale_invariant_and_bounded_by_norm(v, c):
    op = _op(MeasureSpec.heat(0.05), 16)
    f = GridFunction(op.grid, v)
    val = functional(op, PAIR, f)
    assert functional(op, PAIR, f * c) == pytest.approx(val, rel=1e-12)
    assert val <= 1.0 + 1e-12          # the norm of this operator is 1


def test_functional_of_zero():
    op = _op(MeasureSpec.uniform(), 8)
    with pytest.raises(DegenerateInputError):
        functional(op, PAIR, constant(op.grid, 0.0))


def test_threads_do_not_change_the_answer():
    op = _op(MeasureSpec.heat(0.005))
    base = estimate_norm(op, PAIR, SolverConfig(PAIR, restarts=4, seed=5))
    for threads in (2, 4):
        other = estimate_norm(op, PAIR, SolverConfig(PAIR, restarts=4, seed=5, threads=threads))
        assert other[0] == base[0] and other[1].restart == base[1].restart


def test_user_start():
    op = _op(MeasureSpec.heat(0.005))
    g = np.exp(-((op.grid.axis_coordinates() - 0.3) ** 2) / 0.01)
    cfg = SolverConfig(PAIR, init="user", initial=GridFunction(op.grid, g), restarts=1)
    phi, res = estimate_norm(op, PAIR, cfg)
    assert phi == pytest.approx(HEAT_005_NORM, rel=1e-9)
    # the bump stays where the start was
    assert abs(op.grid.point([int(np.argmax(res.f.values.real))])[0] - 0.3) < 0.05


def test_solver_config_validation():
    with pytest.raises(PreconditionError):
        SolverConfig(PAIR, init="user")
    with pytest.raises(PreconditionError):
        SolverConfig(PAIR, rel_tol=0)
    with pytest.raises(PreconditionError):
        SolverConfig(PAIR, init="sideways")


def test_el_map_rejects_signed_input():
    op = _op(MeasureSpec.heat(0.05), 16)
    with pytest.raises(PreconditionError):
        el_map(op, PAIR, GridFunction(op.grid, np.linspace(-1, 1, 16)), 1.0)
