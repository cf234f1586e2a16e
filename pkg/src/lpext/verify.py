"""Structural checks on computed extremizers.

Each check is a grid surrogate for a qualitative property: constant phase,
strict positivity on compact sets, Jensen's inequality for ``T``, the
iterated Euler-Lagrange lower bound, the integrability ladder and spectral
smoothness.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import DegenerateInputError, InsufficientResolutionError, InvalidExponentError
from .extremizer import ExtremizerResult, _as_nonnegative, el_map
from .grid import (DecayFit, GridFunction, ball_mask, fit_shell_decay, forward_array,
                   lp_norm, lp_norm_array, power_sum, shell_maxima)
from .operator import ConvOperator, smoothing_kappa
from .riesz import ExponentPair, RieszRegion, q_exponent_sequence

SPECTRAL_FLOOR = 1e-13


@dataclass(frozen=True)
class PhaseCheck:
    omega0: complex
    sector_masses: list
    triangle_gap: float
    #: same partition applied to arg Tf, weighted by |Tf|^q
    output_sector_masses: list

    @property
    def dominant_mass(self) -> float:
        return max(self.sector_masses)


def _sector_masses(values: np.ndarray, power: float, n_sectors: int):
    mag = np.abs(values)
    nz = mag > 0
    ph = np.angle(values[nz])
    # scale by the max so tiny inputs do not underflow to zero weight
    w = (mag[nz] / mag.max()) ** power
    total = power_sum(w)
    mean = complex(power_sum(w * np.cos(ph)), power_sum(w * np.sin(ph)))
    anchor = math.atan2(mean.imag, mean.real) if mean != 0 else 0.0
    width = 2 * math.pi / n_sectors
    idx = np.floor(np.mod(ph - anchor + width / 2, 2 * math.pi) / width).astype(int) % n_sectors
    masses = [power_sum(w[idx == j]) / total for j in range(n_sectors)]
    return masses, idx, ph, w


def constant_argument_check(op: ConvOperator, pair: ExponentPair, f: GridFunction,
                            n_sectors: int = 8) -> PhaseCheck:
    """Phase concentration of ``f``.

    Sectors have width ``2 pi / n_sectors`` with sector 0 centered on the
    ``|f|^p``-weighted mean phase, so masses do not depend on a global phase
    rotation.  ``omega0`` is the weighted mean phase over the dominant
    sector and ``triangle_gap = ||T|f| - |Tf| ||_q`` vanishes for constant
    phase.
    """
    op.check(f)
    if n_sectors < 2:
        raise InvalidExponentError("need at least two sectors")
    v = f.values
    if not np.any(np.abs(v) > 0):
        raise DegenerateInputError("f vanishes identically")
    p, q = pair.pf, pair.qf
    masses, idx, ph, w = _sector_masses(v, p, n_sectors)
    j = int(np.argmax(masses))
    sel = idx == j
    z = complex(power_sum(w[sel] * np.cos(ph[sel])), power_sum(w[sel] * np.sin(ph[sel])))
    omega0 = z / abs(z)
    Tf = op.T(v)
    gap = lp_norm_array(op.T(np.abs(v)) - np.abs(Tf), q, op.grid.cell_volume)
    if np.any(np.abs(Tf) > 0):
        out_masses = _sector_masses(Tf, q, n_sectors)[0]
    else:
        out_masses = [0.0] * n_sectors
    return PhaseCheck(omega0, masses, gap, out_masses)


def _window_mask(f: GridFunction, window):
    if window is None:
        return np.ones(f.grid.shape, dtype=bool)
    center, radius = window
    return ball_mask(f.grid, center, radius)


def positivity_margin(f: GridFunction, window=None, omega0: complex = 1.0) -> float:
    """``min Re(conj(omega0) f)`` over ``window = (center, radius)`` or the whole grid."""
    mask = _window_mask(f, window)
    return float((np.conj(omega0) * f.values).real[mask].min())


def jensen_check(op: ConvOperator, f: GridFunction, a: float) -> float:
    """``max_x [(Tf)^a - T(f^a)]``; nonpositive for positive ``T`` with ``T1 = 1``."""
    op.check(f)
    if not a > 1:
        raise InvalidExponentError(f"Jensen's inequality needs a > 1, got {a}")
    g = _as_nonnegative(f)
    lhs = np.maximum(op.T_real(g), 0.0) ** a
    rhs = op.T_real(g**a)
    return float(np.max(lhs - rhs))


def jensen_tolerance(f: GridFunction, a: float) -> float:
    return 1e-10 * (1 + lp_norm(f, math.inf) ** a)


def lower_bound_check(op: ConvOperator, pair: ExponentPair, f: GridFunction, N: int = 1,
                      window=None, floor: float = 1e-300) -> float:
    """``min_window f / ((T*T)^N f)^(((q-1)/(p-1))^N)``; ``inf`` if the bound vanishes."""
    op.check(f)
    g = _as_nonnegative(f)
    h = g
    for _ in range(int(N)):
        h = np.maximum(op.T_star_real(np.maximum(op.T_real(h), 0.0)), 0.0)
    expo = ((pair.qf - 1) / (pair.pf - 1)) ** int(N)
    with np.errstate(over="ignore", under="ignore"):
        bound = h**expo
    mask = _window_mask(f, window)
    if not np.any(bound[mask] > floor):
        return math.inf
    return float(np.min(g[mask] / np.maximum(bound[mask], floor)))


@dataclass(frozen=True)
class Ladder:
    norms: list           # (s_k, ||f||_(s_k)) for finite rungs
    linf: float
    passes: bool


def integrability_ladder(op: ConvOperator, pair: ExponentPair, region: RieszRegion,
                         f: GridFunction, tol: float = 1e-9, max_iter: int = 200) -> Ladder:
    """``||f||_s`` along the bootstrap ladder, bounded by ``||f||_inf``."""
    op.check(f)
    rungs = q_exponent_sequence(region, pair, tol, max_iter)
    linf = lp_norm(f, math.inf)
    norms = [(s, lp_norm(f, s)) for s in rungs if math.isfinite(s)]
    vals = [v for _, v in norms]
    bounded = all(v <= (1 + 1e-6) * linf for v in vals)
    increasing = all(b >= a * (1 - 1e-12) for a, b in zip(vals, vals[1:]))
    return Ladder(norms, linf, bool(bounded and increasing))


def smoothness_profile(f: GridFunction, floor: float = SPECTRAL_FLOOR) -> tuple[float, DecayFit]:
    """Decay exponent of the dyadic shell maxima of ``|fhat|``.

    The floor is relative to ``max |fhat|``.  Returns ``inf`` when the
    spectrum reaches the floor inside the band.
    """
    F = np.abs(forward_array(f.grid, f.values))
    shells = shell_maxima(f.grid, F)
    if len(shells) < 3:
        raise InsufficientResolutionError(
            f"the grid resolves {len(shells)} dyadic shells, need 3")
    scale = float(F.max())
    if scale == 0:
        return math.inf, DecayFit(math.inf, 1.0, 0.0, tuple(shells))
    fit = fit_shell_decay(shells, floor * scale, min_shells=3)
    return fit.exponent, fit


@dataclass(frozen=True)
class SmoothingGain:
    before: float
    after: float
    kappa: float

    @property
    def gain(self) -> float:
        if math.isinf(self.after) and math.isinf(self.before):
            return 0.0
        return self.after - self.before

    @property
    def passes(self) -> bool:
        return self.gain >= self.kappa


def smoothing_gain(op: ConvOperator, pair: ExponentPair, region: RieszRegion,
                   f0: GridFunction, alpha: float, norm_scale: float = 1.0) -> SmoothingGain:
    """Spectral decay before and after one Euler-Lagrange step, against ``kappa``."""
    before = smoothness_profile(f0)[0]
    after = smoothness_profile(el_map(op, pair, f0, norm_scale))[0]
    kappa = smoothing_kappa(region, alpha, pair.pf, pair.qf)
    return SmoothingGain(before, after, kappa)


@dataclass
class ExtremizerReport:
    omega0: complex
    sector_masses: list
    positivity_margin: float
    jensen_max_violation: float
    lower_bound_ratio: float
    ladder_norms: list
    decay_fit: tuple                # (exponent, noise floor)
    el_residual: float
    linf_norm: float
    phi: float = 0.0
    converged: bool = False
    triangle_gap: float = 0.0
    jensen_passes: bool = True
    ladder_passes: bool = True
    extras: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["omega0"] = [self.omega0.real, self.omega0.imag]
        d["ladder_norms"] = [list(t) for t in self.ladder_norms]
        d["decay_fit"] = list(self.decay_fit)
        return d


def build_report(op: ConvOperator, pair: ExponentPair, result: ExtremizerResult,
                 region: Optional[RieszRegion] = None, n_sectors: int = 8,
                 jensen_exponents: Sequence[float] = (1.5, 2.0, 3.0),
                 lower_bound_N: int = 1, window=None) -> ExtremizerReport:
    f = result.f
    phase = constant_argument_check(op, pair, f, n_sectors)
    jensen = [jensen_check(op, f, a) for a in jensen_exponents]
    jensen_ok = all(v <= jensen_tolerance(f, a) for v, a in zip(jensen, jensen_exponents))
    if region is not None:
        ladder = integrability_ladder(op, pair, region, f)
        ladder_norms, ladder_ok = ladder.norms, ladder.passes
    else:
        ladder_norms, ladder_ok = [], True
    try:
        m_hat, fit = smoothness_profile(f)
        decay = (m_hat, fit.floor)
    except InsufficientResolutionError:
        decay = (math.nan, SPECTRAL_FLOOR)
    return ExtremizerReport(
        omega0=phase.omega0,
        sector_masses=phase.sector_masses,
        positivity_margin=positivity_margin(f, window, phase.omega0),
        jensen_max_violation=max(jensen),
        lower_bound_ratio=lower_bound_check(op, pair, f, lower_bound_N, window),
        ladder_norms=ladder_norms,
        decay_fit=decay,
        el_residual=result.el_residual,
        linf_norm=lp_norm(f, math.inf),
        phi=result.phi,
        converged=result.converged,
        triangle_gap=phase.triangle_gap,
        jensen_passes=bool(jensen_ok),
        ladder_passes=bool(ladder_ok),
    )
