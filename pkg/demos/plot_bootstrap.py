"""
The integrability ladder
========================

Iterate the bootstrap map on a triangular exponent diagram, in exact
rational arithmetic, then measure how much smoother one Euler-Lagrange
step makes a rough input.
"""

import numpy as np

from lpext import (ConvOperator, ExponentPair, MeasureSpec, RieszRegion, bootstrap_sequence,
                   q_exponent_sequence, smoothing_gain, smoothing_kappa)
from lpext.grid import Grid, GridFunction, japanese_bracket

region = RieszRegion([("0", "0"), ("1", "1"), ("2/3", "1/3")])
pair = ExponentPair("5/3", "5/2")

seq = bootstrap_sequence(region, pair)
print("first iterates:", [str(t) for t in seq[:4]])
print(f"{len(seq) - 1} steps to reach {float(seq[-1]):.2e}")
print("Lebesgue exponents:", [round(s, 3) for s in q_exponent_sequence(region, pair)[:6]])

# Interpolation between L^2 -> W^(alpha, 2) and the diagram gives the gain
tri = RieszRegion([(0, 0), (1, 1), (1, 0)])
print("kappa at (0.6, 0.4), alpha = 1:", smoothing_kappa(tri, 1.0, 1 / 0.6, 1 / 0.4))

# A multiplier decaying like <xi>^(-1): one step buys about two powers of decay
grid = Grid.torus(1, 1024)
op = ConvOperator(MeasureSpec.custom(japanese_bracket(grid) ** -1.0), grid)
f0 = GridFunction(grid, np.random.default_rng(0).random(1024) + 1e-3)
sg = smoothing_gain(op, ExponentPair(2, 4), RieszRegion([(0, 0), (1, 0), (1, 1)]), f0, 1.0)
print(f"decay exponent {sg.before:.2f} -> {sg.after:.2f}, guaranteed gain {sg.kappa}")
