import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from lpext.errors import DegenerateInputError, InsufficientResolutionError, InvalidExponentError
from lpext.extremizer import SolverConfig, estimate_norm
from lpext.grid import Grid, GridFunction, constant, japanese_bracket
from lpext.measure import MeasureSpec
from lpext.operator import ConvOperator
from lpext.riesz import ExponentPair, RieszRegion
from lpext.verify import (build_report, constant_argument_check, integrability_ladder,
                          jensen_check, jensen_tolerance, lower_bound_check, positivity_margin,
                          smoothing_gain, smoothness_profile)

PAIR = ExponentPair(2, 4)
G = Grid.torus(1, 64)
OP = ConvOperator(MeasureSpec.heat(0.01), G)
# Heat bounds L^1 -> L^inf; this triangle is a smaller diagram with room for a ladder
LADDER_REGION = RieszRegion([(0, 0), (1, "1/10"), (1, 1)])

# frozen from a verified run: heat(0.005), torus n = 128, (p, q) = (2, 4)
HEAT_005_MARGIN = 0.007828707567665856

pos = arrays(np.float64, 64, elements=st.floats(0.0, 10.0))


@settings(max_examples=40, deadline=None)
@given(pos.filter(lambda v: v.max() > 0), arrays(np.float64, 64, elements=st.floats(-0.3, 0.3)),
       st.floats(-math.pi, math.pi))
def test_sector_masses_rotation_invariant(mod, jitter, rot):
    f = GridFunction(G, mod * np.exp(1j * jitter))
    a = constant_argument_check(OP, PAIR, f)
    b = constant_argument_check(OP, PAIR, f * cmath.exp(1j * rot))
    assert sum(a.sector_masses) == pytest.approx(1.0, abs=1e-10)
    assert b.sector_masses == pytest.approx(a.sector_masses, abs=1e-9)
    assert abs(b.omega0 - a.omega0 * cmath.exp(1j * rot)) < 1e-9


@settings(max_examples=30, deadline=None)
@given(pos.filter(lambda v: v.max() > 0), st.floats(-math.pi, math.pi))
def test_triangle_gap_vanishes_for_constant_phase(mod, phase):
    chk = constant_argument_check(OP, PAIR, GridFunction(G, mod * cmath.exp(1j * phase)))
    assert chk.triangle_gap <= 1e-12 * (1 + mod.max())
    assert chk.dominant_mass == pytest.approx(1.0)
    assert chk.output_sector_masses[0] == pytest.approx(1.0)


def test_triangle_gap_detects_mixed_phase():
    v = np.where(np.arange(64) < 32, 1.0, -1.0)
    chk = constant_argument_check(OP, PAIR, GridFunction(G, v))
    assert chk.triangle_gap > 0.1
    assert chk.dominant_mass == pytest.approx(0.5)


def test_constant_argument_needs_nonzero():
    with pytest.raises(DegenerateInputError):
        constant_argument_check(OP, PAIR, constant(G, 0.0))


def test_positivity_margin_windows():
    f = GridFunction(G, np.cos(2 * np.pi * G.axis_coordinates()))
    assert positivity_margin(f) == pytest.approx(-1.0)
    assert positivity_margin(f, ([0.0], 0.2)) == pytest.approx(math.cos(2 * np.pi * 0.1875))
    assert positivity_margin(f * 1j, ([0.0], 0.2), omega0=1j) == pytest.approx(
        math.cos(2 * np.pi * 0.1875))


@pytest.mark.parametrize("spec", [MeasureSpec.uniform(), MeasureSpec.heat(0.01),
                                  MeasureSpec.mollified_two_point(0.25, 1e-3)])
@settings(max_examples=15, deadline=None)
@given(v=pos, a=st.sampled_from([1.5, 2.0, 3.0]))
def test_jensen(spec, v, a):
    op = ConvOperator(spec, G)
    f = GridFunction(G, v)
    assert jensen_check(op, f, a) <= jensen_tolerance(f, a)


def test_jensen_needs_convex_power():
    with pytest.raises(InvalidExponentError):
        jensen_check(OP, constant(G), 1.0)


def test_lower_bound_on_constants():
    assert lower_bound_check(OP, PAIR, constant(G), N=2) == pytest.approx(1.0)
    assert math.isinf(lower_bound_check(OP, PAIR, constant(G, 1e-200), N=3))


def test_ladder_of_constant():
    lad = integrability_ladder(OP, PAIR, LADDER_REGION, constant(G))
    assert lad.passes and all(v == pytest.approx(1.0) for _, v in lad.norms)
    assert [s for s, _ in lad.norms][:2] == pytest.approx([2.0, 2 / 0.03])


@settings(max_examples=20, deadline=None)
@given(pos.filter(lambda v: v.max() > 0))
def test_ladder_monotone_on_unit_torus(v):
    lad = integrability_ladder(OP, PAIR, LADDER_REGION, GridFunction(G, v))
    assert lad.passes


def test_smoothness_profile_cases():
    assert math.isinf(smoothness_profile(constant(G))[0])
    rng = np.random.default_rng(2)
    g = Grid.torus(1, 1024)
    m, fit = smoothness_profile(GridFunction(g, rng.random(1024) + 1e-3))
    assert abs(m) < 0.5
    with pytest.raises(InsufficientResolutionError):
        smoothness_profile(GridFunction(Grid.torus(1, 4), rng.random(4)))


@pytest.mark.parametrize("alpha", [0.5, 1.0, 2.0])
def test_smoothing_gain_power_law(alpha):
    # <xi>^(-alpha) is the Bessel potential, a positive probability density
    g = Grid.torus(1, 1024)
    op = ConvOperator(MeasureSpec.custom(japanese_bracket(g) ** -alpha), g)
    f0 = GridFunction(g, np.random.default_rng(7).random(1024) + 1e-3)
    sg = smoothing_gain(op, PAIR, RieszRegion([(0, 0), (1, 0), (1, 1)]), f0, alpha)
    assert sg.kappa == pytest.approx(alpha / 2)
    assert sg.passes and sg.gain > 0


def test_report_on_extremizer():
    g = Grid.torus(1, 128)
    op = ConvOperator(MeasureSpec.heat(0.005), g)
    phi, res = estimate_norm(op, PAIR, SolverConfig(PAIR))
    rep = build_report(op, PAIR, res, LADDER_REGION, lower_bound_N=1)
    assert rep.positivity_margin == pytest.approx(HEAT_005_MARGIN, rel=1e-6)
    assert rep.sector_masses[0] == pytest.approx(1.0)
    assert rep.jensen_passes and rep.ladder_passes
    assert 0 < rep.lower_bound_ratio < math.inf
    assert all(v <= rep.linf_norm * (1 + 1e-6) for _, v in rep.ladder_norms)
    d = rep.to_dict()
    assert d["omega0"] == [1.0, 0.0] and isinstance(d["decay_fit"], list)
