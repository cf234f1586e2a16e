"""
Counting bubbles
================

Split a train of sixteen bumps into ball-supported pieces and compare how
many pieces each level needs with the law N ~ eps^(-pq/(q-p)).
"""

import numpy as np

from lpext import ConvOperator, ExponentPair, MeasureSpec, bubble_train, decompose
from lpext.grid import Grid

grid = Grid.window(1, 1600, 200.0)
op = ConvOperator(MeasureSpec.heat(0.01, support_radius=1.0), grid)
pair = ExponentPair("6/5", 6)

# harmonic masses spread the bubbles over many scales
centers = [-96.0 + 12 * j for j in range(16)]
f = bubble_train(grid, centers, [1 / (j + 1) for j in range(16)], pair.pf, width=0.5)

eps = np.array([0.4, 0.2, 0.1, 0.05])
counts = []
for e in eps:
    dec = decompose(op, pair, f, e)
    err = np.abs(dec.reconstruct().values - f.values).max()
    counts.append(dec.N)
    print(f"eps = {e:<5} N = {dec.N:2d}  smallest mass / eps^gamma = {dec.mass_constant:.3f}  "
          f"reconstruction error = {err:.1e}")

slope = np.polyfit(np.log(1 / eps), np.log(counts), 1)[0]
print(f"fitted exponent {slope:.3f}, predicted {pair.bubble_exponent:.3f}")
