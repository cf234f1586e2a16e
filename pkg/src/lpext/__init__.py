"""Extremizers of L^p -> L^q convolution operators on grids.

``Tf = f * sigma`` for probability measures ``sigma`` on the torus or on a
zero-padded window of ``R^d``.  The package estimates operator norms by a
fixed-point iteration of the Euler-Lagrange equation, decomposes functions
into ball-supported bubbles, runs the integrability bootstrap on exponent
diagrams and checks structural properties of the computed extremizers.
"""

from .bubbles import (BubbleDecomposition, Localization, bubble_train, bump, c_d,
                      component_split, decompose, localize)
from .errors import LpextError, NumericalError, PreconditionError
from .extremizer import (ExtremizerResult, SolverConfig, ascend, brute_force_norm,
                         brute_force_search, el_map, el_residual, estimate_norm, functional)
from .grid import (Grid, GridFunction, bessel_apply, constant, forward_transform,
                   inverse_transform, lp_norm, restrict_ball, sample, sobolev_norm, spike,
                   translate)
from .measure import MeasureSpec, density, estimate_decay, multiplier, verify_probability
from .operator import (ConvOperator, apply_T, apply_T_star, find_positivity_radius,
                       kernel_origin, kernel_power, smoothing_kappa)
from .riesz import (ExponentPair, RieszRegion, bootstrap_sequence, q_exponent_sequence, r_map,
                    s_map)
from .verify import (ExtremizerReport, build_report, constant_argument_check,
                     integrability_ladder, jensen_check, lower_bound_check, positivity_margin,
                     smoothing_gain, smoothness_profile)

__version__ = "0.1.0"
