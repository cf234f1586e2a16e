"""Sampled functions on periodic or windowed lattices.

Two domains are supported:

``torus``
    The unit torus, ``n`` points per axis, spacing ``h = 1/n``.  Sample ``i``
    sits at ``x = i*h`` and distances are periodic.

``window``
    A box of side ``L`` standing in for R^d, sample ``i`` at
    ``x = (i - n//2)*h`` with ``h = L/n``.  Operators on a window use zero
    padded (linear) convolution and shifts fill with zeros.

Transforms follow the convention ``fhat(xi) = h^d sum_x f(x) exp(-2 pi i xi.x)``
with ``xi`` on the centered lattice ``k/L``, ``k`` in ``[-n/2, n/2)``.
Frequency-side arrays are stored in centered order (Nyquist first).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import (InsufficientResolutionError, InvalidExponentError,
                     PreconditionError, ShapeError)

TORUS = "torus"
WINDOW = "window"
DOMAINS = (TORUS, WINDOW)

_MAX_POINTS = 2**31


@dataclass(frozen=True)
class Grid:
    dim: int
    n: int
    domain: str = TORUS
    length: float = 1.0

    def __post_init__(self):
        if int(self.dim) != self.dim or self.dim < 1:
            raise PreconditionError(f"dim must be a positive integer, got {self.dim!r}")
        if int(self.n) != self.n or self.n < 2:
            raise PreconditionError(f"n must be an integer >= 2, got {self.n!r}")
        if self.domain not in DOMAINS:
            raise PreconditionError(f"unknown domain {self.domain!r}")
        if not (self.length > 0 and math.isfinite(self.length)):
            raise PreconditionError(f"length must be positive, got {self.length!r}")
        if self.domain == TORUS and self.length != 1.0:
            raise PreconditionError("the torus has period 1")
        if self.n**self.dim > _MAX_POINTS:
            raise PreconditionError(f"{self.n}^{self.dim} points is too many")
        object.__setattr__(self, "dim", int(self.dim))
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "length", float(self.length))

    @classmethod
    def torus(cls, dim: int, n: int) -> "Grid":
        return cls(dim, n, TORUS, 1.0)

    @classmethod
    def window(cls, dim: int, n: int, length: float) -> "Grid":
        return cls(dim, n, WINDOW, length)

    @property
    def spacing(self) -> float:
        return self.length / self.n

    @property
    def cell_volume(self) -> float:
        return self.spacing**self.dim

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.n,) * self.dim

    @property
    def size(self) -> int:
        return self.n**self.dim

    @property
    def periodic(self) -> bool:
        return self.domain == TORUS

    @property
    def origin_index(self) -> int:
        """Array index of the point ``x = 0`` along each axis."""
        return 0 if self.periodic else self.n // 2

    def axis_coordinates(self) -> np.ndarray:
        return (np.arange(self.n) - self.origin_index) * self.spacing

    def mesh(self) -> list[np.ndarray]:
        x = self.axis_coordinates()
        return np.meshgrid(*([x] * self.dim), indexing="ij")

    def axis_frequencies(self) -> np.ndarray:
        """Centered frequencies ``k/L`` along one axis, Nyquist at ``-n/2``."""
        return (np.arange(self.n) - self.n // 2) / self.length

    def frequency_mesh(self) -> list[np.ndarray]:
        xi = self.axis_frequencies()
        return np.meshgrid(*([xi] * self.dim), indexing="ij")

    def frequency_radius(self) -> np.ndarray:
        """``|xi|`` on the centered frequency lattice."""
        return np.sqrt(sum(x**2 for x in self.frequency_mesh()))

    def displacement(self, center: Sequence[float]) -> list[np.ndarray]:
        """Per-axis displacement ``x - center``, periodically reduced on the torus."""
        center = _as_point(center, self.dim)
        out = []
        for x, c in zip(self.mesh(), center):
            d = x - c
            if self.periodic:
                d = d - np.round(d / self.length) * self.length
            out.append(d)
        return out

    def distance_from(self, center: Sequence[float]) -> np.ndarray:
        return np.sqrt(sum(d**2 for d in self.displacement(center)))

    def nearest_index(self, point: Sequence[float]) -> tuple[int, ...]:
        point = _as_point(point, self.dim)
        idx = []
        for c in point:
            i = int(round(c / self.spacing)) + self.origin_index
            idx.append(i % self.n if self.periodic else i)
        return tuple(idx)

    def point(self, index: Sequence[int]) -> np.ndarray:
        return (np.asarray(index, dtype=float) - self.origin_index) * self.spacing


def _as_point(p, dim: int) -> np.ndarray:
    p = np.atleast_1d(np.asarray(p, dtype=float))
    if p.shape == (1,) and dim > 1:
        p = np.repeat(p, dim)
    if p.shape != (dim,):
        raise ShapeError(f"expected a point in {dim} dimensions, got shape {p.shape}")
    return p


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Complex samples on a grid.

    ``values`` has shape ``grid.shape`` (row-major over axes).  When
    ``spectral`` is true the samples live on the centered frequency lattice.
    The array is copied and frozen on construction.
    """

    grid: Grid
    values: np.ndarray = field(repr=False)
    spectral: bool = False

    def __post_init__(self):
        v = np.array(self.values, dtype=np.complex128)
        if v.size != self.grid.size:
            raise ShapeError(f"{v.size} values for a grid of {self.grid.size} points")
        v = v.reshape(self.grid.shape)
        if not np.all(np.isfinite(v)):
            raise PreconditionError("grid function values must be finite")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    @property
    def real(self) -> np.ndarray:
        return self.values.real

    def with_values(self, values) -> "GridFunction":
        return GridFunction(self.grid, values, self.spectral)

    def __mul__(self, c):
        return self.with_values(self.values * c)

    __rmul__ = __mul__

    def __add__(self, other: "GridFunction") -> "GridFunction":
        _check_same(self, other)
        return self.with_values(self.values + other.values)

    def __sub__(self, other: "GridFunction") -> "GridFunction":
        _check_same(self, other)
        return self.with_values(self.values - other.values)

    def __neg__(self):
        return self.with_values(-self.values)


def _check_same(f: GridFunction, g: GridFunction):
    if f.grid != g.grid or f.spectral != g.spectral:
        raise ShapeError("grid functions live on different grids")


def constant(grid: Grid, c: complex = 1.0) -> GridFunction:
    return GridFunction(grid, np.full(grid.shape, c, dtype=np.complex128))


def sample(grid: Grid, func: Callable[..., np.ndarray]) -> GridFunction:
    """Evaluate ``func(x0, x1, ...)`` on the grid's coordinate mesh."""
    return GridFunction(grid, np.broadcast_to(func(*grid.mesh()), grid.shape))


def spike(grid: Grid, index: Sequence[int] | None = None) -> GridFunction:
    v = np.zeros(grid.shape, dtype=np.complex128)
    v[tuple(index) if index is not None else (grid.origin_index,) * grid.dim] = 1.0
    return GridFunction(grid, v)


# -- reductions -------------------------------------------------------------


def _weighted(f: GridFunction) -> float:
    return (1.0 / f.grid.length) ** f.grid.dim if f.spectral else f.grid.cell_volume


def power_sum(a: np.ndarray) -> float:
    """Fixed-order sum of a real array (numpy pairwise over the flat buffer)."""
    return float(np.sum(np.ascontiguousarray(a).ravel()))


def lp_norm_array(a: np.ndarray, p: float, weight: float) -> float:
    p = float(p)
    if not p >= 1:
        raise InvalidExponentError(f"L^p norms need p >= 1, got {p}")
    mag = np.abs(a)
    m = float(mag.max()) if mag.size else 0.0
    if m == 0.0:
        return 0.0
    if math.isinf(p):
        return m
    # scale by the max so large exponents cannot overflow
    return m * (weight * power_sum((mag / m) ** p)) ** (1.0 / p)


def lp_norm(f: GridFunction, p: float) -> float:
    """``(h^d sum |f|^p)^(1/p)``, or ``max |f|`` for ``p = inf``."""
    return lp_norm_array(f.values, p, _weighted(f))


def inner(f: GridFunction, g: GridFunction) -> complex:
    """``<f, g> = h^d sum f conj(g)``."""
    _check_same(f, g)
    prod = f.values * np.conj(g.values)
    w = _weighted(f)
    return complex(w * power_sum(prod.real), w * power_sum(prod.imag))


# -- transforms -------------------------------------------------------------


def _phase(grid: Grid) -> np.ndarray | None:
    """``exp(2 pi i k o / n)`` in FFT order for origin offset ``o``."""
    o = grid.origin_index
    if o == 0:
        return None
    k = np.fft.fftfreq(grid.n, d=1.0 / grid.n)
    ph1 = np.exp(2j * np.pi * k * o / grid.n)
    ph = ph1
    for _ in range(grid.dim - 1):
        ph = np.multiply.outer(ph, ph1)
    return ph


def forward_array(grid: Grid, values: np.ndarray) -> np.ndarray:
    F = np.fft.fftn(values) * grid.cell_volume
    ph = _phase(grid)
    if ph is not None:
        F = F * ph
    return np.fft.fftshift(F)


def inverse_array(grid: Grid, values: np.ndarray) -> np.ndarray:
    F = np.fft.ifftshift(values)
    ph = _phase(grid)
    if ph is not None:
        F = F * np.conj(ph)
    return np.fft.ifftn(F) / grid.cell_volume


def forward_transform(f: GridFunction) -> GridFunction:
    if f.spectral:
        raise ShapeError("already on the frequency side")
    return GridFunction(f.grid, forward_array(f.grid, f.values), spectral=True)


def inverse_transform(F: GridFunction) -> GridFunction:
    if not F.spectral:
        raise ShapeError("expected a frequency-side grid function")
    return GridFunction(F.grid, inverse_array(F.grid, F.values), spectral=False)


def japanese_bracket(grid: Grid) -> np.ndarray:
    """``<xi> = (1 + |xi|^2)^(1/2)`` on the centered lattice."""
    return np.sqrt(1.0 + grid.frequency_radius() ** 2)


def bessel_apply(f: GridFunction, s: float) -> GridFunction:
    """Apply the Bessel potential multiplier ``<xi>^s``."""
    if s == 0:
        return f
    F = forward_array(f.grid, f.values) * japanese_bracket(f.grid) ** s
    return f.with_values(inverse_array(f.grid, F))


def sobolev_norm(f: GridFunction, s: float, p: float) -> float:
    """Grid Bessel-potential norm ``|| <D>^s f ||_p`` (a diagnostic for p != 2)."""
    return lp_norm(bessel_apply(f, s), p)


# -- translations and cutoffs -------------------------------------------------


def translate(f: GridFunction, shift: Sequence[int]) -> GridFunction:
    """Move ``f`` by ``shift`` lattice steps: ``out[i] = f[i - shift]``.

    Circular on the torus; on a window, samples shifted past the edge are
    dropped and vacated samples are zero.
    """
    shift = tuple(int(s) for s in np.atleast_1d(shift))
    if len(shift) == 1 and f.grid.dim > 1:
        shift = shift * f.grid.dim
    if len(shift) != f.grid.dim:
        raise ShapeError("shift has the wrong dimension")
    if f.grid.periodic:
        return f.with_values(np.roll(f.values, shift, axis=tuple(range(f.grid.dim))))
    out = np.zeros_like(f.values)
    n = f.grid.n
    src, dst = [], []
    for s in shift:
        if abs(s) >= n:
            return f.with_values(out)
        if s >= 0:
            src.append(slice(0, n - s))
            dst.append(slice(s, n))
        else:
            src.append(slice(-s, n))
            dst.append(slice(0, n + s))
    out[tuple(dst)] = f.values[tuple(src)]
    return f.with_values(out)


def ball_mask(grid: Grid, center: Sequence[float], radius: float) -> np.ndarray:
    """Closed Euclidean ball; a relative slack of 1e-12 absorbs coordinate rounding."""
    if radius < 0:
        raise PreconditionError("radius must be nonnegative")
    return grid.distance_from(center) <= radius * (1 + 1e-12) + 1e-12 * grid.spacing


def restrict_ball(f: GridFunction, center: Sequence[float], radius: float) -> GridFunction:
    return f.with_values(np.where(ball_mask(f.grid, center, radius), f.values, 0.0))


# -- dyadic shell spectra -----------------------------------------------------


@dataclass(frozen=True)
class Shell:
    k: int
    count: int
    maximum: float


def shell_maxima(grid: Grid, magnitude: np.ndarray) -> list[Shell]:
    """Maxima of ``magnitude`` over the shells ``2^k <= |xi| < 2^(k+1)``."""
    r = grid.frequency_radius()
    shells = []
    k = 0
    rmax = float(r.max())
    while 2.0**k <= rmax:
        mask = (r >= 2.0**k) & (r < 2.0 ** (k + 1))
        if mask.any():
            shells.append(Shell(k, int(mask.sum()), float(magnitude[mask].max())))
        k += 1
    return shells


@dataclass(frozen=True)
class DecayFit:
    """Log-log slope fit of shell maxima; ``exponent`` is minus the slope.

    ``exponent`` is ``inf`` when the spectrum reaches the floor inside the
    resolved band (decay faster than any power the grid can see).
    """

    exponent: float
    r_squared: float
    floor: float
    shells: tuple[Shell, ...]

    @property
    def superpolynomial(self) -> bool:
        return math.isinf(self.exponent)


def fit_shell_decay(shells: Sequence[Shell], floor: float, min_shells: int = 2) -> DecayFit:
    shells = tuple(shells)
    usable = [s for s in shells if s.maximum > floor]
    if not usable or (shells and shells[-1].maximum <= floor):
        return DecayFit(math.inf, 1.0, floor, shells)
    if len(usable) < min_shells:
        raise InsufficientResolutionError(
            f"{len(usable)} usable spectral shells, need {min_shells}")
    x = np.array([s.k * math.log(2.0) for s in usable])
    y = np.log(np.array([s.maximum for s in usable]))
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 1.0
    return DecayFit(float(-slope), r2, floor, shells)
