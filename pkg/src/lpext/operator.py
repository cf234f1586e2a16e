"""The convolution operator ``Tf = f * sigma`` and its spectral relatives."""

from __future__ import annotations

import math
from typing import Optional

import numpy as np
from scipy import fft as sfft

from .errors import (InvalidExponentError, MeasureParameterError,
                     PositivityRadiusNotFoundError, PreconditionError, ShapeError)
from .grid import Grid, GridFunction, ball_mask, inverse_array
from .io import write_series
from .measure import MeasureSpec, multiplier_array
from .riesz import RieszRegion


class ConvOperator:
    """Convolution with ``sigma`` on a grid.

    On the torus this is the Fourier multiplier ``sigma-hat``.  On a window
    the input is zero padded to ``pad_n >= n + 2 r/h + 1`` samples per axis
    (``r`` the declared support radius) so the circular convolution agrees
    with the linear one on the window; the output is cropped back.
    """

    def __init__(self, spec: MeasureSpec, grid: Grid):
        self.spec = spec
        self.grid = grid
        if grid.periodic:
            self.pad_grid = grid
        else:
            if spec.support_radius is None:
                raise MeasureParameterError("window grids need the measure's support_radius")
            extra = 2 * math.ceil(spec.support_radius / grid.spacing - 1e-9) + 1
            m = sfft.next_fast_len(grid.n + extra)
            self.pad_grid = Grid.window(grid.dim, m, m * grid.spacing)
        mult = multiplier_array(spec, self.pad_grid)
        self._mult = np.fft.ifftshift(mult)
        self._mult_conj = np.conj(self._mult)
        self._real = bool(np.allclose(self._mult, np.conj(_reflect(self._mult)), rtol=0, atol=0))
        self._mult.flags.writeable = False
        self._mult_conj.flags.writeable = False

    def __repr__(self):
        return f"ConvOperator({self.spec.params()}, {self.grid})"

    @property
    def multiplier(self) -> GridFunction:
        """``sigma-hat`` on the (padded, if windowed) frequency lattice."""
        return GridFunction(self.pad_grid, np.fft.fftshift(self._mult), spectral=True)

    @property
    def maps_real_to_real(self) -> bool:
        """True when ``sigma-hat(-xi) = conj(sigma-hat(xi))`` on the lattice."""
        return self._real

    def _apply(self, values: np.ndarray, mult: np.ndarray) -> np.ndarray:
        if self.grid.periodic:
            return np.fft.ifftn(mult * np.fft.fftn(values))
        m = self.pad_grid.n
        axes = tuple(range(self.grid.dim))
        out = np.fft.ifftn(mult * np.fft.fftn(values, s=(m,) * self.grid.dim, axes=axes), axes=axes)
        return out[(slice(0, self.grid.n),) * self.grid.dim]

    def T(self, values: np.ndarray) -> np.ndarray:
        """Array-level ``T`` (no shape checks)."""
        return self._apply(values, self._mult)

    def T_star(self, values: np.ndarray) -> np.ndarray:
        return self._apply(values, self._mult_conj)

    def T_real(self, values: np.ndarray) -> np.ndarray:
        """``T`` of a real array, returning the real part."""
        return self.T(values).real

    def T_star_real(self, values: np.ndarray) -> np.ndarray:
        return self.T_star(values).real

    def check(self, f: GridFunction):
        if f.grid != self.grid or f.spectral:
            raise ShapeError(f"operator lives on {self.grid}, function on {f.grid}")


def _reflect(a: np.ndarray) -> np.ndarray:
    """``a[-k]`` in FFT order."""
    out = a
    for ax in range(a.ndim):
        out = np.roll(np.flip(out, axis=ax), 1, axis=ax)
    return out


def apply_T(op: ConvOperator, f: GridFunction) -> GridFunction:
    op.check(f)
    return f.with_values(op.T(f.values))


def apply_T_star(op: ConvOperator, f: GridFunction) -> GridFunction:
    op.check(f)
    return f.with_values(op.T_star(f.values))


def kernel_power(op: ConvOperator, N: int) -> GridFunction:
    """``(sigma * sigma~)^(*N)``: the inverse transform of ``|sigma-hat|^(2N)``.

    On a window the kernel is sampled periodically with the window period.
    """
    if int(N) != N or N < 1:
        raise PreconditionError("N must be a positive integer")
    grid = op.grid
    m = np.abs(multiplier_array(op.spec, grid)) ** (2 * int(N))
    return GridFunction(grid, inverse_array(grid, m))


def kernel_origin(op: ConvOperator, N: int) -> float:
    """``K(0)`` as computed on the grid; generally not 1 on a finite lattice."""
    K = kernel_power(op, N)
    return float(K.values[(op.grid.origin_index,) * op.grid.dim].real)


def find_positivity_radius(op: ConvOperator, R: float, N_max: int = 64) -> tuple[int, float]:
    """Smallest ``N <= N_max`` with ``min_{B(0,R)} K_N > 0``; returns ``(N, c_R)``."""
    half = op.grid.length / 2
    if not 0 < R < half:
        raise PreconditionError(f"R must lie in (0, {half})")
    mask = ball_mask(op.grid, np.zeros(op.grid.dim), R)
    profile = []
    for N in range(1, int(N_max) + 1):
        m = float(kernel_power(op, N).values.real[mask].min())
        profile.append((N, m))
        if m > 0:
            return N, m
    raise PositivityRadiusNotFoundError(
        f"no N <= {N_max} makes the kernel power positive on B(0, {R})", profile)


def smoothing_kappa(region: RieszRegion, alpha: float, p: float, q: float,
                    theta_step: float = 1e-4, audit_path: Optional[str] = None) -> float:
    """Smoothing exponent from interpolating ``L^2 -> W^(alpha,2)`` with ``L^r -> L^s``.

    Scans ``theta`` in ``(0, 1]`` and keeps the largest ``theta * alpha`` for
    which ``(1/r, 1/s)``, defined by ``1/p = theta/2 + (1-theta)/r`` and
    ``1/q = theta/2 + (1-theta)/s``, lies in the region.
    """
    x, y = 1.0 / float(p), 1.0 / float(q)
    if not region.contains((x, y)):
        raise InvalidExponentError(f"(1/p, 1/q) = ({x:.6g}, {y:.6g}) is outside the region")
    if not alpha >= 0:
        raise PreconditionError("alpha must be nonnegative")
    nsteps = int(round(1.0 / theta_step))
    thetas = np.arange(1, nsteps + 1) * (1.0 / nsteps)
    feasible = np.zeros(nsteps, dtype=bool)
    at_half = abs(x - 0.5) <= 1e-14 and abs(y - 0.5) <= 1e-14
    for i, th in enumerate(thetas):
        if i == nsteps - 1:
            feasible[i] = at_half
            continue
        r_inv = (x - th / 2) / (1 - th)
        s_inv = (y - th / 2) / (1 - th)
        feasible[i] = region.contains((r_inv, s_inv))
        if not feasible[i]:
            # feasible thetas form an interval starting at 0
            break
    gains = thetas * alpha if math.isfinite(alpha) else np.where(thetas > 0, math.inf, 0.0)
    if audit_path is not None:
        write_series(audit_path, ["theta", "feasible", "theta_alpha"],
                     zip(thetas, feasible, gains))
    if not feasible.any() or not region.contains_strictly((x, y)):
        return 0.0
    return float(gains[feasible].max()) if alpha > 0 else 0.0
