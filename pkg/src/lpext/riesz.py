"""Convex exponent diagrams and the integrability bootstrap.

A :class:`RieszRegion` is a convex polygon of points ``(1/p, 1/q)`` at which
the operator is bounded.  Its lower envelope ``r_map`` gives, for each
``1/s``, the best ``1/Q(s)`` available; ``s_map`` composes it twice to move
from ``f in L^s`` to a higher Lebesgue exponent through the Euler-Lagrange
equation.

Vertices given as ``int``, ``Fraction`` or strings like ``"2/3"`` are kept
exact, and so is every envelope evaluation at a rational argument.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from typing import Sequence, Union

from .errors import (BootstrapInfeasibleError, InvalidExponentError,
                     MonotonicityViolationError, OutOfDomainError, PreconditionError)

Real = Union[float, Fraction]

TOL = 1e-14


def as_number(v) -> Real:
    """Exact ``Fraction`` for ints, rationals and strings, ``float`` otherwise."""
    if isinstance(v, bool):
        raise PreconditionError("booleans are not numbers here")
    if isinstance(v, str):
        return Fraction(v.strip())
    if isinstance(v, Rational):
        return Fraction(v)
    return float(v)


def _exact(*vals) -> bool:
    return all(isinstance(v, Fraction) for v in vals)


def _cross(o, a, b):
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


@dataclass(frozen=True)
class ExponentPair:
    p: Real
    q: Real

    def __post_init__(self):
        p, q = as_number(self.p), as_number(self.q)
        if not (1 < p < q < math.inf):
            raise InvalidExponentError(f"need 1 < p < q < inf, got p={p}, q={q}")
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "q", q)

    @property
    def point(self) -> tuple[Real, Real]:
        return (1 / self.p, 1 / self.q)

    @property
    def pf(self) -> float:
        return float(self.p)

    @property
    def qf(self) -> float:
        return float(self.q)

    @property
    def bubble_exponent(self) -> float:
        """``pq/(q-p)``, the mass exponent in the bubble count law."""
        return float(self.p * self.q / (self.q - self.p))


class RieszRegion:
    """Convex polygon in the unit square containing ``(0,0)`` and ``(1,1)``."""

    def __init__(self, vertices: Sequence[Sequence]):
        pts = [(as_number(x), as_number(y)) for x, y in vertices]
        pts = _dedupe(pts)
        if len(pts) < 3:
            raise PreconditionError("a region needs at least three distinct vertices")
        area2 = sum(_cross((0, 0), pts[i], pts[(i + 1) % len(pts)]) for i in range(len(pts)))
        if area2 == 0:
            raise PreconditionError("region has zero area")
        if area2 < 0:
            pts = pts[::-1]
        n = len(pts)
        for i in range(n):
            a, b, c = pts[i], pts[(i + 1) % n], pts[(i + 2) % n]
            if _cross(a, b, c) < (0 if _exact(*a, *b, *c) else -TOL):
                raise PreconditionError("region vertices do not form a convex polygon")
        for x, y in pts:
            if not (-TOL <= x <= 1 + TOL and -TOL <= y <= 1 + TOL):
                raise PreconditionError(f"vertex ({x}, {y}) lies outside the unit square")
        self.vertices: tuple[tuple[Real, Real], ...] = tuple(pts)
        for corner in ((0, 0), (1, 1)):
            if not self.contains(corner):
                raise PreconditionError(f"region must contain {corner}")

    def __repr__(self):
        return f"RieszRegion({[tuple(map(str, v)) for v in self.vertices]})"

    @classmethod
    def decay_triangle(cls, p0, q0) -> "RieszRegion":
        """Hull of ``(0,0)``, ``(1,1)`` and a known bound ``(1/p0, 1/q0)``."""
        p0, q0 = as_number(p0), as_number(q0)
        return cls([(0, 0), (1 / p0, 1 / q0), (1, 1)])

    @classmethod
    def unit_square(cls) -> "RieszRegion":
        return cls([(0, 0), (1, 0), (1, 1), (0, 1)])

    @property
    def edges(self):
        v = self.vertices
        return [(v[i], v[(i + 1) % len(v)]) for i in range(len(v))]

    def _margins(self, pt):
        return [_cross(a, b, pt) for a, b in self.edges]

    def contains(self, pt, tol: float = TOL) -> bool:
        pt = (as_number(pt[0]), as_number(pt[1]))
        slack = 0 if _exact(*pt) and self.exact else tol
        return all(m >= -slack for m in self._margins(pt))

    def contains_strictly(self, pt, tol: float = TOL) -> bool:
        pt = (as_number(pt[0]), as_number(pt[1]))
        slack = 0 if _exact(*pt) and self.exact else tol
        return all(m > slack for m in self._margins(pt))

    @property
    def exact(self) -> bool:
        return all(_exact(x, y) for x, y in self.vertices)

    @property
    def x_range(self) -> tuple[Real, Real]:
        xs = [v[0] for v in self.vertices]
        return min(xs), max(xs)

    def _envelope(self, t, lower: bool):
        t = as_number(t)
        lo, hi = self.x_range
        slack = 0 if _exact(t) and self.exact else TOL
        if t < lo - slack or t > hi + slack:
            raise OutOfDomainError(f"the line x = {t} misses the region")
        if not (_exact(t) and self.exact):
            t = min(max(float(t), float(lo)), float(hi))
        vals = []
        for a, b in self.edges:
            x0, x1 = (a[0], b[0]) if a[0] <= b[0] else (b[0], a[0])
            if not (x0 - slack <= t <= x1 + slack):
                continue
            if a[0] == b[0]:
                vals.extend([a[1], b[1]])
            else:
                vals.append(a[1] + (t - a[0]) * (b[1] - a[1]) / (b[0] - a[0]))
        return min(vals) if lower else max(vals)

    def r_map(self, t) -> Real:
        """Lower envelope ``min {u : (t, u) in region}``."""
        return self._envelope(t, lower=True)

    def upper(self, t) -> Real:
        return self._envelope(t, lower=False)


def _dedupe(pts):
    out = []
    for p in pts:
        if not out or p != out[-1]:
            out.append(p)
    if len(out) > 1 and out[0] == out[-1]:
        out.pop()
    return out


def r_map(region: RieszRegion, t) -> Real:
    return region.r_map(t)


def s_map(region: RieszRegion, pair: ExponentPair, t) -> Real:
    """One bootstrap step ``r(r(t) (q-1)) / (p-1)``."""
    u = region.r_map(t) * (pair.q - 1)
    if u > 1 + TOL or u < -TOL:
        raise BootstrapInfeasibleError(
            f"r(t)(q-1) = {float(u):.6g} leaves [0, 1]; the pair is too close to the boundary")
    if not isinstance(u, Fraction):
        u = min(max(u, 0.0), 1.0)
    return region.r_map(u) / (pair.p - 1)


def bootstrap_sequence(region: RieszRegion, pair: ExponentPair,
                       tol: float = 1e-9, max_iter: int = 200) -> list[Real]:
    """Iterates ``t_0 = 1/p``, ``t_(k+1) = s_map(t_k)`` until ``t_k < tol``.

    Raises if the pair is not interior or a step fails to decrease.  Reaching
    ``max_iter`` is not an error; check ``seq[-1] < tol``.
    """
    if not region.contains_strictly(pair.point):
        raise BootstrapInfeasibleError(
            f"(1/p, 1/q) = ({float(pair.point[0]):.6g}, {float(pair.point[1]):.6g}) "
            "is not interior to the region")
    seq = [1 / pair.p]
    while seq[-1] >= tol and len(seq) <= max_iter:
        t = s_map(region, pair, seq[-1])
        if not t < seq[-1]:
            raise MonotonicityViolationError(
                f"bootstrap step {len(seq)} did not decrease: {float(seq[-1])!r} -> {float(t)!r}")
        seq.append(t)
    return seq


def q_exponent_sequence(region: RieszRegion, pair: ExponentPair,
                        tol: float = 1e-9, max_iter: int = 200) -> list[float]:
    """Integrability ladder ``s_k = 1/t_k`` starting at ``s_0 = p``."""
    seq = bootstrap_sequence(region, pair, tol, max_iter)
    return [math.inf if t == 0 else float(1 / t) for t in seq]
