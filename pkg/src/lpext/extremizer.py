"""Extremizers of ``f -> ||Tf||_q / ||f||_p``.

The solver is a normalized fixed-point iteration of the Euler-Lagrange map

    g  ->  normalize_p( (T*((Tg)^(q-1)))^(1/(p-1)) ),

a nonlinear power method on the positive cone.  Nothing guarantees that the
Rayleigh value increases along the way; decreases are logged in the
history, not hidden.

:func:`brute_force_norm` is an independent check: finite-difference
projected gradient ascent over signed or complex functions on tiny grids.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .errors import (DegenerateInputError, EstimationFailedError, IterationDivergedError,
                     NumericalError, NumericRangeError, PreconditionError)
from .grid import GridFunction, lp_norm_array
from .operator import ConvOperator
from .riesz import ExponentPair

CONSTANT = "constant"
RANDOM = "random"
USER = "user"
INITS = (CONSTANT, RANDOM, USER)


@dataclass(frozen=True)
class SolverConfig:
    pair: ExponentPair
    max_iter: int = 5000
    rel_tol: float = 1e-8
    restarts: int = 4
    seed: int = 0
    init: str = CONSTANT
    initial: Optional[GridFunction] = field(default=None, repr=False)
    threads: int = 1

    def __post_init__(self):
        if not self.rel_tol > 0:
            raise PreconditionError("rel_tol must be positive")
        if self.max_iter < 1:
            raise PreconditionError("max_iter must be at least 1")
        if self.restarts < 1:
            raise PreconditionError("restarts must be at least 1")
        if self.init not in INITS:
            raise PreconditionError(f"unknown init {self.init!r}")
        if self.init == USER and self.initial is None:
            raise PreconditionError("init 'user' needs an initial grid function")
        if self.threads < 1:
            raise PreconditionError("threads must be at least 1")


@dataclass(frozen=True, eq=False)
class ExtremizerResult:
    f: GridFunction
    phi: float
    norm_estimate: float
    el_residual: float
    history: list = field(repr=False)
    converged: bool
    #: largest drop ``phi_k - phi_(k+1)`` seen in the history (0 if monotone)
    max_decrease: float = 0.0
    restart: int = 0

    @property
    def iterations(self) -> int:
        return len(self.history) - 1


def _norm(op: ConvOperator, a: np.ndarray, p: float) -> float:
    return lp_norm_array(a, p, op.grid.cell_volume)


def functional(op: ConvOperator, pair: ExponentPair, f: GridFunction) -> float:
    """``||Tf||_q / ||f||_p``."""
    op.check(f)
    return _functional(op, pair.pf, pair.qf, f.values)


def _functional(op, p, q, values) -> float:
    den = _norm(op, values, p)
    if den == 0:
        raise DegenerateInputError("the functional is undefined at f = 0")
    return _norm(op, op.T(values), q) / den


def _el_core(op: ConvOperator, g: np.ndarray, p: float, q: float) -> np.ndarray:
    """``(T*((Tg)_+^(q-1)))_+^(1/(p-1))`` for nonnegative real ``g``."""
    Tg = np.maximum(op.T_real(g), 0.0)
    with np.errstate(over="ignore", invalid="ignore"):
        u = np.maximum(op.T_star_real(Tg ** (q - 1)), 0.0)
        out = u ** (1.0 / (p - 1))
    if not np.all(np.isfinite(out)):
        raise NumericRangeError("overflow in the Euler-Lagrange powers; rescale the input")
    return out


def _as_nonnegative(f: GridFunction) -> np.ndarray:
    v = f.values
    scale = float(np.abs(v).max()) if v.size else 0.0
    if np.abs(v.imag).max() > 1e-12 * max(scale, 1.0) or v.real.min() < -1e-12 * max(scale, 1.0):
        raise PreconditionError("expected a nonnegative real grid function")
    return np.maximum(v.real, 0.0)


def el_map(op: ConvOperator, pair: ExponentPair, f: GridFunction, norm_scale: float) -> GridFunction:
    """``norm_scale^(-q/(p-1)) (T*((Tf)^(q-1)))^(1/(p-1))``.

    With ``norm_scale = ||T||_{p,q}`` normalized nonnegative extremizers are
    fixed points.  Negative discretization dips of ``Tf`` are clamped to 0.
    """
    op.check(f)
    if not norm_scale > 0:
        raise PreconditionError("norm_scale must be positive")
    p, q = pair.pf, pair.qf
    core = _el_core(op, _as_nonnegative(f), p, q)
    out = core * norm_scale ** (-q / (p - 1))
    if not np.all(np.isfinite(out)):
        raise NumericRangeError("Euler-Lagrange output is not finite")
    return f.with_values(out)


def _residual(op, g, p, q, scale):
    return _norm(op, g - _el_core(op, g, p, q) * scale ** (-q / (p - 1)), p)


def el_residual(op: ConvOperator, pair: ExponentPair, f: GridFunction, norm_scale: float) -> float:
    """``||f - el_map(f)||_p`` for a nonnegative ``f``."""
    op.check(f)
    if not norm_scale > 0:
        raise PreconditionError("norm_scale must be positive")
    return _residual(op, _as_nonnegative(f), pair.pf, pair.qf, norm_scale)


def _normalize(op, a, p):
    n = _norm(op, a, p)
    if n == 0 or not math.isfinite(n):
        raise IterationDivergedError(f"cannot normalize an iterate with norm {n}")
    return a / n


def _initial(op: ConvOperator, cfg: SolverConfig, rng: Optional[np.random.Generator]):
    shape = op.grid.shape
    if rng is not None:
        return rng.random(shape) + 1e-3
    if cfg.init == USER:
        op.check(cfg.initial)
        return _as_nonnegative(cfg.initial)
    return np.ones(shape)


def ascend(op: ConvOperator, pair: ExponentPair, cfg: SolverConfig,
           rng: Optional[np.random.Generator] = None, restart: int = 0) -> ExtremizerResult:
    """Run the normalized Euler-Lagrange iteration from the configured start.

    ``rng`` overrides ``cfg.init`` with a random positive start (used by
    :func:`estimate_norm`).
    """
    p, q = pair.pf, pair.qf
    if rng is None and cfg.init == RANDOM:
        rng = np.random.default_rng(cfg.seed)
    g = _normalize(op, _initial(op, cfg, rng), p)
    phi = _functional(op, p, q, g)
    history = [(0, phi, 0.0)]
    converged = False
    max_drop = 0.0
    for k in range(1, cfg.max_iter + 1):
        g_new = _normalize(op, _el_core(op, g, p, q), p)
        phi_new = _functional(op, p, q, g_new)
        if not math.isfinite(phi_new):
            raise IterationDivergedError(f"non-finite Rayleigh value at iteration {k}")
        step = _norm(op, g_new - g, p)
        history.append((k, phi_new, step))
        max_drop = max(max_drop, phi - phi_new)
        done = abs(phi_new - phi) <= cfg.rel_tol * phi and step <= cfg.rel_tol
        g, phi = g_new, phi_new
        if done:
            converged = True
            break
    f = GridFunction(op.grid, g)
    resid = _residual(op, g, p, q, phi)
    return ExtremizerResult(f, phi, phi, resid, history, converged, max_drop, restart)


def estimate_norm(op: ConvOperator, pair: ExponentPair,
                  cfg: SolverConfig) -> tuple[float, ExtremizerResult]:
    """Best Rayleigh value over a deterministic set of restarts.

    Restart 0 uses the configured start (constant unless ``init='user'``);
    restarts ``1..restarts-1`` use random positive starts seeded from
    ``cfg.seed``.  Larger ``phi`` wins, ties go to the lower index.
    """
    children = np.random.SeedSequence(cfg.seed).spawn(max(cfg.restarts - 1, 0))
    base = cfg if cfg.init != RANDOM else replace(cfg, init=CONSTANT)

    def run(i):
        rng = None if i == 0 else np.random.default_rng(children[i - 1])
        try:
            return ascend(op, pair, base, rng=rng, restart=i)
        except NumericalError as exc:
            return exc

    if cfg.threads > 1:
        with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
            results = list(pool.map(run, range(cfg.restarts)))
    else:
        results = [run(i) for i in range(cfg.restarts)]
    best = None
    for r in results:
        if isinstance(r, Exception):
            continue
        if best is None or r.phi > best.phi:
            best = r
    if best is None:
        raise EstimationFailedError(f"all {cfg.restarts} restarts failed: {results[0]}")
    return best.phi, replace(best, norm_estimate=best.phi)


# -- independent oracle -------------------------------------------------------


def _dense_matrix(op: ConvOperator) -> np.ndarray:
    m = op.grid.size
    eye = np.eye(m, dtype=np.complex128)
    cols = [op.T(e.reshape(op.grid.shape)).ravel() for e in eye]
    return np.array(cols).T


def _batch_functional(M, V, p, q, w):
    """Rayleigh values for the columns of ``V`` (real-imag stacked)."""
    m = M.shape[0]
    F = V[:m] + 1j * V[m:]
    num = (w * np.sum(np.abs(M @ F) ** q, axis=0)) ** (1 / q)
    den = (w * np.sum(np.abs(F) ** p, axis=0)) ** (1 / p)
    return num / den


def brute_force_search(op: ConvOperator, pair: ExponentPair, restarts: int = 16,
                       seed: int = 0, max_iter: int = 4000) -> tuple[float, GridFunction]:
    """Maximize the functional by projected gradient ascent on the ``p``-sphere.

    Gradients are central differences; the step doubles on success and
    halves on failure.  Starts alternate between signed real and complex
    Gaussian vectors.  Meant for grids with at most 8 points per axis.
    """
    g = op.grid
    if g.n > 8 or g.dim > 2:
        raise PreconditionError("the brute-force oracle is for tiny grids (n <= 8, d <= 2)")
    p, q = pair.pf, pair.qf
    w = g.cell_volume
    M = _dense_matrix(op)
    m = g.size
    rng = np.random.default_rng(seed)
    best_val, best_v = -math.inf, None
    for r in range(restarts):
        v = rng.standard_normal(2 * m)
        if r % 2 == 0:
            v[m:] = 0.0
        v = _project(v, p, w, m)
        val = _batch_functional(M, v[:, None], p, q, w)[0]
        eta = 0.1
        for _ in range(max_iter):
            delta = 1e-6 * max(1.0, float(np.abs(v).max()))
            E = np.eye(2 * m) * delta
            vals = _batch_functional(M, np.concatenate([v[:, None] + E, v[:, None] - E], axis=1), p, q, w)
            grad = (vals[: 2 * m] - vals[2 * m:]) / (2 * delta)
            gn = float(np.linalg.norm(grad))
            if gn == 0:
                break
            while eta > 1e-14:
                cand = _project(v + eta * grad / gn, p, w, m)
                cval = _batch_functional(M, cand[:, None], p, q, w)[0]
                if cval > val:
                    v, val = cand, cval
                    eta *= 2.0
                    break
                eta *= 0.5
            else:
                break
        if val > best_val:
            best_val, best_v = val, v
    f = GridFunction(g, (best_v[:m] + 1j * best_v[m:]).reshape(g.shape))
    return float(best_val), f


def _project(v, p, w, m):
    z = v[:m] + 1j * v[m:]
    return v / (w * np.sum(np.abs(z) ** p)) ** (1 / p)


def brute_force_norm(op: ConvOperator, pair: ExponentPair, restarts: int = 16,
                     seed: int = 0) -> float:
    return brute_force_search(op, pair, restarts, seed)[0]
