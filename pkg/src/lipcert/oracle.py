"""Brute-force reference computations.

Nothing here touches subdifferentials, cells or the geometry module: the
oracles only evaluate functions on grids and refine locally, so they can be
used to check the analytic code paths.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.optimize import linprog

from .errors import NoFinitePoints, OutsideDomain

DEFAULT_RESOLUTION = {1: 1001, 2: 201, 3: 51, 4: 15}
MAX_POINTS = 10_000_000
GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class GridSpec:
    lower: tuple
    upper: tuple
    resolution: Optional[int] = None
    refinement_rounds: int = 40

    def __post_init__(self):
        lo = tuple(float(v) for v in np.atleast_1d(self.lower))
        hi = tuple(float(v) for v in np.atleast_1d(self.upper))
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)
        if len(lo) != len(hi) or not all(a < b for a, b in zip(lo, hi)):
            raise ValueError("grid box needs lower < upper in every coordinate")
        res = self.resolution or DEFAULT_RESOLUTION.get(len(lo), 11)
        object.__setattr__(self, "resolution", int(res))
        if res < 2:
            raise ValueError("resolution must be at least 2")
        if res ** len(lo) > MAX_POINTS:
            raise ValueError(f"grid of {res}^{len(lo)} points exceeds {MAX_POINTS}")
        if self.refinement_rounds < 0:
            raise ValueError("refinement_rounds must be nonnegative")

    @property
    def dim(self) -> int:
        return len(self.lower)

    def axes(self):
        return [np.linspace(a, b, self.resolution) for a, b in zip(self.lower, self.upper)]

    def points(self) -> np.ndarray:
        mesh = np.meshgrid(*self.axes(), indexing="ij")
        return np.stack(mesh, axis=-1).reshape(-1, self.dim)

    @property
    def spacing(self) -> np.ndarray:
        return (np.array(self.upper) - np.array(self.lower)) / (self.resolution - 1)


def domain_box(f, pad: float = 0.0) -> GridSpec:
    """Bounding box of dom f by linear programming; unbounded sides extend 2 units past the bounded one."""
    P = f.domain
    n = f.dim
    lo, hi = np.full(n, np.nan), np.full(n, np.nan)
    for i in range(n):
        for sign, store in ((1.0, lo), (-1.0, hi)):
            c = np.zeros(n)
            c[i] = sign
            res = linprog(c, A_ub=P.A if P.n_ineq else None, b_ub=P.b if P.n_ineq else None,
                          A_eq=P.E if P.E.shape[0] else None, b_eq=P.e if P.E.shape[0] else None,
                          bounds=[(None, None)] * n, method="highs")
            if res.status == 0:
                store[i] = res.x[i]
    for i in range(n):
        if np.isnan(lo[i]) and np.isnan(hi[i]):
            lo[i], hi[i] = -1.0, 1.0
        elif np.isnan(lo[i]):
            lo[i] = hi[i] - 2.0
        elif np.isnan(hi[i]):
            hi[i] = lo[i] + 2.0
        if hi[i] <= lo[i]:
            hi[i] = lo[i] + 1e-9
    return GridSpec(tuple(lo - pad), tuple(hi + pad))


def _values(f, X) -> np.ndarray:
    if hasattr(f, "evaluate_many"):
        return f.evaluate_many(X)
    return np.array([f(x) for x in X], dtype=float)


def _norm_of(f) -> Callable:
    norm = getattr(f, "norm", None)
    if norm is None:
        return lambda V: np.linalg.norm(V, axis=-1)
    return lambda V: norm(V)


def grid_lipschitz_estimate(f, grid: Optional[GridSpec] = None, random_pairs: int = 10_000,
                            seed: int = 0) -> float:
    """Largest difference quotient over grid neighbours and random finite pairs (a lower bound)."""
    grid = grid or domain_box(f)
    axes = grid.axes()
    shape = tuple(len(a) for a in axes)
    X = grid.points()
    vals = _values(f, X).reshape(shape)
    Xg = X.reshape(shape + (grid.dim,))
    finite = np.isfinite(vals)
    if finite.sum() < 2:
        raise NoFinitePoints("fewer than two grid points with finite values")
    norm = _norm_of(f)
    best = 0.0
    for off in itertools.product((-1, 0, 1), repeat=grid.dim):
        if not any(off) or next(o for o in off if o != 0) < 0:
            continue
        src = tuple(slice(max(0, -o), s - max(0, o)) for o, s in zip(off, shape))
        dst = tuple(slice(max(0, o), s - max(0, -o)) for o, s in zip(off, shape))
        ok = finite[src] & finite[dst]
        if not np.any(ok):
            continue
        dv = np.abs(vals[dst][ok] - vals[src][ok])
        dx = norm(Xg[dst][ok] - Xg[src][ok])
        best = max(best, float(np.max(dv / dx)))
    fin_pts, fin_vals = X[finite.ravel()], vals.ravel()[finite.ravel()]
    rng = np.random.default_rng(seed)
    i = rng.integers(0, fin_pts.shape[0], random_pairs)
    j = rng.integers(0, fin_pts.shape[0], random_pairs)
    dx = norm(fin_pts[i] - fin_pts[j])
    ok = dx > 0
    if np.any(ok):
        best = max(best, float(np.max(np.abs(fin_vals[i] - fin_vals[j])[ok] / dx[ok])))
    return best


def fd_subgradient_check(f, x, g, grid: Optional[GridSpec] = None, tol: float = 1e-8) -> bool:
    """Whether ``f(y) − f(x) ≥ ⟨g, y − x⟩ − tol`` on every grid point y with finite f(y)."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    g = np.atleast_1d(np.asarray(g, dtype=float))
    fx = float(_values(f, x.reshape(1, -1))[0])
    if not np.isfinite(fx):
        raise OutsideDomain("subgradient check needs x in dom f")
    grid = grid or GridSpec(tuple(x - 2.0), tuple(x + 2.0))
    Y = grid.points()
    fy = _values(f, Y)
    ok = np.isfinite(fy)
    gap = fy[ok] - fx - (Y[ok] - x) @ g
    return bool(np.all(gap >= -tol))


def _golden(phi, a: float, b: float, rounds: int):
    c, d = b - GOLDEN * (b - a), a + GOLDEN * (b - a)
    fc, fd = phi(c), phi(d)
    for _ in range(rounds):
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = phi(c)
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = phi(d)
    return (c, fc) if fc <= fd else (d, fd)


def grid_inf(objective: Callable, grid: GridSpec, vectorized: bool = False):
    """Grid argmin followed by local refinement; returns ``(argmin, value)``.

    In one dimension the refinement is golden-section search on the two grid
    cells around the best grid point; in higher dimension a 5^n stencil is
    re-centred on the best point while its spacing halves each round.
    """
    X = grid.points()
    if vectorized:
        vals = np.asarray(objective(X), dtype=float)
    else:
        vals = np.array([objective(p) for p in X], dtype=float)
    finite = np.isfinite(vals)
    if not np.any(finite):
        raise NoFinitePoints("objective is +inf on the whole grid")
    k = int(np.argmin(np.where(finite, vals, np.inf)))
    best, best_val = X[k].copy(), float(vals[k])

    def scalar(p):
        if vectorized:
            return float(np.asarray(objective(p.reshape(1, -1)), dtype=float)[0])
        return float(objective(p))

    h = grid.spacing
    if grid.dim == 1:
        a = max(best[0] - h[0], grid.lower[0])
        b = min(best[0] + h[0], grid.upper[0])
        t, v = _golden(lambda s: scalar(np.array([s])), a, b, grid.refinement_rounds)
        if v < best_val:
            best, best_val = np.array([t]), v
        return best, best_val
    offsets = np.array(list(itertools.product(np.linspace(-1.0, 1.0, 5), repeat=grid.dim)))
    lo, hi = np.array(grid.lower), np.array(grid.upper)
    for _ in range(grid.refinement_rounds):
        cand = np.clip(best + offsets * h, lo, hi)
        cv = np.asarray(objective(cand), dtype=float) if vectorized else np.array([objective(p) for p in cand])
        j = int(np.argmin(cv))
        if cv[j] < best_val:
            best, best_val = cand[j].copy(), float(cv[j])
        h = h / 2.0
    return best, best_val


def prox_objective(f, lam: float, x):
    x = np.atleast_1d(np.asarray(x, dtype=float))

    def obj(Y):
        Y = np.asarray(Y, dtype=float).reshape(-1, x.shape[0])
        return _values(f, Y) + np.sum((Y - x) ** 2, axis=1) / (2 * lam)

    return obj


def infconv_objective(f, ell: float, x):
    x = np.atleast_1d(np.asarray(x, dtype=float))
    norm = _norm_of(f)

    def obj(U):
        U = np.asarray(U, dtype=float).reshape(-1, x.shape[0])
        return _values(f, U) + ell * norm(U - x)

    return obj


__all__ = [
    "GridSpec", "domain_box", "grid_lipschitz_estimate", "fd_subgradient_check", "grid_inf",
    "prox_objective", "infconv_objective", "DEFAULT_RESOLUTION",
]
