"""Probability measures given by their Fourier multipliers."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import special

from .errors import MeasureParameterError, ProbabilityViolationError, ShapeError
from .grid import DecayFit, Grid, GridFunction, fit_shell_decay, inverse_array, shell_maxima

UNIFORM = "uniform"
HEAT = "heat"
SPHERE = "mollified_sphere"
TWO_POINT = "mollified_two_point"
CUSTOM = "custom"
FAMILIES = (UNIFORM, HEAT, SPHERE, TWO_POINT, CUSTOM)

DENSITY_TOLERANCE = 1e-8
MASS_TOLERANCE = 1e-12
DECAY_FLOOR = 1e-14


@dataclass(frozen=True, eq=False)
class MeasureSpec:
    """A probability measure sigma, described spectrally.

    Use the classmethod constructors rather than filling fields by hand.
    ``support_radius`` bounds ``supp sigma`` and is required on window grids,
    where it sets the zero padding of the linear convolution.
    """

    family: str
    t: float = 0.0
    radius: float = 0.0
    offset: float = 0.0
    eps: float = 0.0
    table: Optional[np.ndarray] = field(default=None, repr=False)
    alpha_hint: Optional[float] = None
    support_radius: Optional[float] = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise MeasureParameterError(f"unknown measure family {self.family!r}")
        if self.family == HEAT and not self.t > 0:
            raise MeasureParameterError("heat measure needs t > 0")
        if self.family == SPHERE and not (self.radius > 0 and self.eps > 0):
            raise MeasureParameterError("mollified sphere needs radius > 0 and eps > 0")
        if self.family == TWO_POINT and not (0 < self.offset < 0.5 and self.eps > 0):
            raise MeasureParameterError("mollified two-point measure needs 0 < a < 1/2 and eps > 0")
        if self.family == CUSTOM:
            if self.table is None:
                raise MeasureParameterError("custom measure needs a multiplier table")
            tab = np.array(self.table, dtype=np.complex128)
            if not np.all(np.isfinite(tab)):
                raise MeasureParameterError("multiplier table must be finite")
            tab.flags.writeable = False
            object.__setattr__(self, "table", tab)
        if self.alpha_hint is not None and not self.alpha_hint >= 0:
            raise MeasureParameterError("alpha_hint must be nonnegative")
        if self.support_radius is not None and not self.support_radius >= 0:
            raise MeasureParameterError("support_radius must be nonnegative")

    @classmethod
    def uniform(cls, **kw) -> "MeasureSpec":
        return cls(UNIFORM, **kw)

    @classmethod
    def heat(cls, t: float, **kw) -> "MeasureSpec":
        return cls(HEAT, t=float(t), **kw)

    @classmethod
    def mollified_sphere(cls, radius: float, eps: float, **kw) -> "MeasureSpec":
        return cls(SPHERE, radius=float(radius), eps=float(eps), **kw)

    @classmethod
    def mollified_two_point(cls, offset: float, eps: float, **kw) -> "MeasureSpec":
        return cls(TWO_POINT, offset=float(offset), eps=float(eps), **kw)

    @classmethod
    def custom(cls, table, **kw) -> "MeasureSpec":
        """Multiplier samples on the centered frequency lattice of one grid."""
        if isinstance(table, GridFunction):
            table = table.values
        return cls(CUSTOM, table=table, **kw)

    def params(self) -> dict:
        """Family parameters as a plain dict (for reports)."""
        out = {"family": self.family}
        if self.family == HEAT:
            out["t"] = self.t
        elif self.family == SPHERE:
            out.update(radius=self.radius, eps=self.eps)
        elif self.family == TWO_POINT:
            out.update(offset=self.offset, eps=self.eps)
        if self.alpha_hint is not None:
            out["alpha_hint"] = self.alpha_hint
        if self.support_radius is not None:
            out["support_radius"] = self.support_radius
        return out


def sphere_fourier(dim: int, z: np.ndarray) -> np.ndarray:
    """Fourier transform of normalized surface measure on S^(d-1) at ``z = 2 pi r |xi|``.

    ``Gamma(d/2) (z/2)^(1-d/2) J_(d/2-1)(z)``, equal to 1 at ``z = 0``.
    """
    z = np.asarray(z, dtype=float)
    nu = dim / 2.0 - 1.0
    if nu == 0:
        return special.j0(z)
    out = np.ones_like(z)
    nz = z > 0
    zz = z[nz]
    out[nz] = special.gamma(nu + 1) * (zz / 2.0) ** (-nu) * special.jv(nu, zz)
    return out


def multiplier_array(spec: MeasureSpec, grid: Grid) -> np.ndarray:
    """``sigma-hat`` on the centered frequency lattice of ``grid``."""
    xi2 = grid.frequency_radius() ** 2
    fam = spec.family
    if fam == UNIFORM:
        out = np.zeros(grid.shape)
        out[(grid.n // 2,) * grid.dim] = 1.0
        return out.astype(np.complex128)
    if fam == HEAT:
        return np.exp(-spec.t * (4 * math.pi**2) * xi2).astype(np.complex128)
    if fam == TWO_POINT:
        if grid.dim != 1:
            raise MeasureParameterError("the two-point measure is defined for d = 1")
        xi = grid.axis_frequencies()
        return (np.cos(2 * math.pi * spec.offset * xi)
                * np.exp(-spec.eps * (2 * math.pi * xi) ** 2)).astype(np.complex128)
    if fam == SPHERE:
        if grid.dim < 2:
            raise MeasureParameterError("the sphere measure needs d >= 2")
        z = 2 * math.pi * spec.radius * np.sqrt(xi2)
        return (sphere_fourier(grid.dim, z)
                * np.exp(-spec.eps * (4 * math.pi**2) * xi2)).astype(np.complex128)
    tab = spec.table
    if tab.size != grid.size:
        raise ShapeError(f"multiplier table has {tab.size} entries, grid has {grid.size}")
    tab = tab.reshape(grid.shape)
    mass = tab[(grid.n // 2,) * grid.dim]
    if abs(mass - 1) > MASS_TOLERANCE:
        raise ProbabilityViolationError(f"multiplier at 0 is {mass}, not 1")
    return tab.copy()


def multiplier(spec: MeasureSpec, grid: Grid) -> GridFunction:
    return GridFunction(grid, multiplier_array(spec, grid), spectral=True)


def density(spec: MeasureSpec, grid: Grid) -> GridFunction:
    """Inverse transform of the multiplier: the (periodized, band-limited) density."""
    return GridFunction(grid, inverse_array(grid, multiplier_array(spec, grid)))


def estimate_decay(spec: MeasureSpec, grid: Grid, floor: float = DECAY_FLOOR) -> tuple[float, float]:
    """Fit ``|sigma-hat| ~ |xi|^(-alpha)`` over dyadic shells.

    Returns ``(alpha_hat, r_squared)``; ``alpha_hat`` is ``inf`` when the
    multiplier drops below ``floor`` inside the resolved band.
    """
    fit = decay_fit(spec, grid, floor)
    return fit.exponent, fit.r_squared


def decay_fit(spec: MeasureSpec, grid: Grid, floor: float = DECAY_FLOOR) -> DecayFit:
    mag = np.abs(multiplier_array(spec, grid))
    return fit_shell_decay(shell_maxima(grid, mag), floor)


@dataclass(frozen=True)
class ProbabilityReport:
    mass: float
    min_density: float
    ok: bool


def verify_probability(spec: MeasureSpec, grid: Grid) -> ProbabilityReport:
    m = multiplier_array(spec, grid)
    mass = complex(m[(grid.n // 2,) * grid.dim])
    dens = inverse_array(grid, m)
    min_density = float(dens.real.min())
    ok = abs(mass - 1) <= MASS_TOLERANCE and min_density >= -DENSITY_TOLERANCE
    return ProbabilityReport(mass.real, min_density, bool(ok))
