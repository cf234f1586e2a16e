"""Greedy profile decomposition and spatial localization on window grids.

The decomposition repeatedly takes the integer lattice point ``alpha`` whose
ball ``B(alpha, 2 c_d)`` (``c_d = sqrt(d)``) carries the most ``L^p`` mass
of the current residual (ties broken toward the local barycenter), cuts
that ball out as a bubble, and stops once ``||T residual||_q <= epsilon``.
Candidate centers are snapped to the nearest grid point and balls are built
from integer offsets, so cutting a ball out and translating it back are
exact operations on the samples.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import NotNearExtremizerError, PreconditionError
from .grid import Grid, GridFunction, lp_norm, lp_norm_array, power_sum, translate
from .operator import ConvOperator
from .riesz import ExponentPair


def c_d(dim: int) -> float:
    return math.sqrt(dim)


@dataclass(frozen=True, eq=False)
class BubbleDecomposition:
    epsilon: float
    exponent: float                 # pq/(q-p)
    c_d: float
    centers: list                   # physical coordinates of x_j
    center_indices: list            # grid indices of x_j
    profiles: list = field(repr=False)   # phi_j, supported in B(0, 2 c_d)
    remainder: GridFunction = field(repr=False)
    bubble_masses: list = field(default_factory=list)      # ||phi_j||_p^p
    residual_norms: list = field(default_factory=list)     # ||r_j||_p, j = 0..N
    T_residual_norms: list = field(default_factory=list)   # ||T r_j||_q, j = 0..N

    @property
    def N(self) -> int:
        return len(self.profiles)

    @property
    def mass_constant(self) -> float:
        """Empirical ``c`` in ``||phi_j||_p^p >= c eps^(pq/(q-p))``."""
        if not self.bubble_masses:
            return math.inf
        return min(self.bubble_masses) / self.epsilon**self.exponent

    @property
    def count_constant(self) -> float:
        """Empirical ``C`` in ``N <= C eps^(-pq/(q-p))``."""
        return self.N * self.epsilon**self.exponent

    def placed(self, j: int) -> GridFunction:
        """``tau^(-x_j) phi_j``: bubble ``j`` moved back to its center."""
        return translate(self.profiles[j], self._shift(j))

    def _shift(self, j):
        g = self.remainder.grid
        return tuple(i - g.origin_index for i in self.center_indices[j])

    def reconstruct(self) -> GridFunction:
        out = self.remainder.values.copy()
        for j in range(self.N):
            out = out + self.placed(j).values
        return self.remainder.with_values(out)

    def manifest(self) -> dict:
        return {
            "epsilon": self.epsilon,
            "N": self.N,
            "c_d": self.c_d,
            "centers": [list(map(float, c)) for c in self.centers],
            "bubble_masses": list(self.bubble_masses),
            "residual_norms": list(self.residual_norms),
            "T_residual_norms": list(self.T_residual_norms),
            "mass_constant": self.mass_constant if self.N else None,
            "count_constant": self.count_constant,
            "exponent": self.exponent,
        }


def ball_offsets(grid: Grid, radius: float) -> np.ndarray:
    """Integer offsets ``m`` with ``|m| h <= radius``, shape ``(k, d)``."""
    r = int(math.floor(radius / grid.spacing + 1e-9))
    rng = np.arange(-r, r + 1)
    mesh = np.stack(np.meshgrid(*([rng] * grid.dim), indexing="ij"), axis=-1).reshape(-1, grid.dim)
    keep = np.sum(mesh.astype(float) ** 2, axis=1) * grid.spacing**2 <= radius**2 * (1 + 1e-12)
    return mesh[keep]


def lattice_centers(grid: Grid) -> list[tuple[int, ...]]:
    """Grid indices nearest to the integer points of the window, lexicographic."""
    half = grid.length / 2
    ks = np.arange(math.ceil(-half), math.floor(half - grid.spacing / 2) + 1)
    out = set()
    for alpha in np.stack(np.meshgrid(*([ks] * grid.dim), indexing="ij"), axis=-1).reshape(-1, grid.dim):
        idx = grid.nearest_index(alpha)
        if all(0 <= i < grid.n for i in idx):
            out.add(idx)
    return sorted(out)


def _ball_flat(grid: Grid, center_idx, offsets) -> np.ndarray:
    pts = np.asarray(center_idx)[None, :] + offsets
    ok = np.all((pts >= 0) & (pts < grid.n), axis=1)
    return np.ravel_multi_index(tuple(pts[ok].T), grid.shape)


def _pick(grid, centers, balls, apow, scores, best) -> int:
    """Index of the ball to cut out among those with maximal mass.

    Several balls can hold the same mass (a narrow bump fits in all of its
    neighbours' balls); ties go to the center nearest the ``|r|^p``-weighted
    barycenter of its ball, then to the lexicographically smallest.
    """
    tied = np.flatnonzero(scores >= best * (1 - 1e-12))
    if len(tied) == 1:
        return int(tied[0])
    coords = np.stack([m.ravel() for m in grid.mesh()], axis=1)
    dists = []
    for j in tied:
        w = apow[balls[j]]
        bary = (w[:, None] * coords[balls[j]]).sum(axis=0) / w.sum()
        dists.append(float(np.linalg.norm(bary - grid.point(centers[j]))))
    return int(tied[int(np.argmin(dists))])


def decompose(op: ConvOperator, pair: ExponentPair, f: GridFunction, epsilon: float,
              max_bubbles: int = 100000) -> BubbleDecomposition:
    """Greedy profile decomposition of a normalized ``f`` at level ``epsilon``."""
    op.check(f)
    grid = f.grid
    if grid.periodic:
        raise PreconditionError("the profile decomposition runs on window grids")
    if not epsilon > 0:
        raise PreconditionError("epsilon must be positive")
    p, q = pair.pf, pair.qf
    w = grid.cell_volume
    if abs(lp_norm(f, p) - 1) > 1e-10:
        raise PreconditionError(f"f must satisfy ||f||_p = 1, got {lp_norm(f, p)!r}")
    cd = c_d(grid.dim)
    offsets = ball_offsets(grid, 2 * cd)
    centers = lattice_centers(grid)
    balls = [_ball_flat(grid, c, offsets) for c in centers]
    origin = (grid.origin_index,) * grid.dim
    profile_flat = _ball_flat(grid, origin, offsets)

    residual = f.values.copy()
    res_norms = [lp_norm_array(residual, p, w)]
    T_norms = [lp_norm_array(op.T(residual), q, w)]
    picked, profiles, masses = [], [], []
    while T_norms[-1] > epsilon and len(picked) < max_bubbles:
        apow = np.abs(residual.ravel()) ** p
        scores = np.array([power_sum(apow[b]) for b in balls])
        best = float(scores.max())
        if best == 0:
            break
        j = _pick(grid, centers, balls, apow, scores, best)
        cidx = centers[j]
        piece = np.zeros(grid.size, dtype=np.complex128)
        piece[balls[j]] = residual.ravel()[balls[j]]
        piece = piece.reshape(grid.shape)
        shift = tuple(o - c for o, c in zip(origin, cidx))
        phi = translate(GridFunction(grid, piece), shift)
        # the shifted ball must land inside B(0, 2 c_d)
        outside = np.ones(grid.size, dtype=bool)
        outside[profile_flat] = False
        assert not np.any(phi.values.ravel()[outside]), "bubble escaped its ball"
        residual = residual - piece
        picked.append(cidx)
        profiles.append(phi)
        masses.append(w * power_sum(apow[balls[j]]))
        res_norms.append(lp_norm_array(residual, p, w))
        T_norms.append(lp_norm_array(op.T(residual), q, w))
    return BubbleDecomposition(
        epsilon=float(epsilon),
        exponent=pair.bubble_exponent,
        c_d=cd,
        centers=[tuple(grid.point(c)) for c in picked],
        center_indices=picked,
        profiles=profiles,
        remainder=GridFunction(grid, residual),
        bubble_masses=masses,
        residual_norms=res_norms,
        T_residual_norms=T_norms,
    )


def component_split(centers: Sequence[Sequence[float]], cd: float) -> list[list[int]]:
    """Connected components of ``union B(x_j, 4 c_d)``; the first contains index 0."""
    pts = np.asarray(centers, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    if pts.size == 0:
        raise PreconditionError("component_split needs at least one center")
    n = len(pts)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for k in range(i + 1, n):
            if np.linalg.norm(pts[i] - pts[k]) < 8 * cd:
                ri, rk = find(i), find(k)
                if ri != rk:
                    parent[max(ri, rk)] = min(ri, rk)
    groups: dict[int, list[int]] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    return sorted(groups.values(), key=lambda g: g[0])


@dataclass(frozen=True, eq=False)
class Localization:
    x0: tuple
    R: float
    tail_mass: float
    A_mass: float
    B_mass: float
    remainder_norm: float
    decomposition: BubbleDecomposition = field(repr=False)
    components: list = field(repr=False)
    #: radius ``4 N c_d`` before any enlargement to cover the support of A
    nominal_R: float = 0.0


def localize(op: ConvOperator, pair: ExponentPair, f: GridFunction, eta: float,
             norm_estimate: float, eps_exponent: float = 0.5) -> Localization:
    """Locate the bulk of a near-extremizer.

    Decomposes ``f/||f||_p`` at ``epsilon = eta^eps_exponent ||Tf||_q``,
    splits the bubbles into the cluster ``A`` around ``x_1`` and the rest
    ``B``, and measures the mass of ``f`` outside ``B(x_1, R)``.  ``R`` is
    ``4 N c_d``, enlarged when the support of ``A`` reaches further (a chain
    of overlapping balls can be longer than ``4 N c_d``).
    """
    op.check(f)
    p, q = pair.pf, pair.qf
    fn = lp_norm(f, p)
    if fn == 0:
        raise PreconditionError("f must be nonzero")
    if not 0 < eta < 1:
        raise PreconditionError("eta must lie in (0, 1)")
    f = f * (1.0 / fn)
    Tf = lp_norm_array(op.T(f.values), q, f.grid.cell_volume)
    if not Tf > (1 - eta) * norm_estimate:
        raise NotNearExtremizerError(
            f"||Tf||_q/||f||_p = {Tf:.6g} is not above (1 - eta) * {norm_estimate:.6g}")
    eps = eta**eps_exponent * Tf
    dec = decompose(op, pair, f, eps)
    grid = f.grid
    comps = component_split(dec.centers, dec.c_d)
    A = np.zeros(grid.shape, dtype=np.complex128)
    B = np.zeros(grid.shape, dtype=np.complex128)
    for j in range(dec.N):
        target = A if j in comps[0] else B
        target += dec.placed(j).values
    x0 = dec.centers[0]
    R_nom = 4 * dec.N * dec.c_d
    dist = grid.distance_from(x0)
    support = np.abs(A) > 0
    R = max(R_nom, float(dist[support].max()) if support.any() else 0.0)
    outside = dist > R
    w = grid.cell_volume
    return Localization(
        x0=tuple(float(c) for c in x0),
        R=R,
        tail_mass=lp_norm_array(np.where(outside, f.values, 0), p, w),
        A_mass=lp_norm_array(A, p, w),
        B_mass=lp_norm_array(B, p, w),
        remainder_norm=lp_norm(dec.remainder, p),
        decomposition=dec,
        components=comps,
        nominal_R=R_nom,
    )


# -- synthetic inputs ---------------------------------------------------------


def bump(grid: Grid, center: Sequence[float], width: float) -> np.ndarray:
    """Smooth bump ``exp(1 - 1/(1 - |x-c|^2/width^2))`` supported in ``B(c, width)``."""
    r2 = grid.distance_from(center) ** 2 / width**2
    out = np.zeros(grid.shape)
    inside = r2 < 1
    out[inside] = np.exp(1 - 1 / (1 - r2[inside]))
    return out


def bubble_train(grid: Grid, centers: Sequence, masses: Sequence[float], p: float,
                 width: float = 1.0) -> GridFunction:
    """Sum of bumps with ``||bump_j||_p^p = masses_j / sum(masses)``.

    The result has ``||f||_p = 1`` when the bumps do not overlap.
    """
    masses = np.asarray(masses, dtype=float)
    masses = masses / masses.sum()
    w = grid.cell_volume
    out = np.zeros(grid.shape)
    for c, m in zip(centers, masses):
        b = bump(grid, np.atleast_1d(c), width)
        b *= (m / (w * power_sum(b**p))) ** (1 / p)
        out += b
    out /= lp_norm_array(out, p, w)
    return GridFunction(grid, out)
