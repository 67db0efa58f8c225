"""Small-dimension polyhedral geometry.

Two set representations are used throughout the package:

* :class:`Polyhedron` -- half-space form ``{x : A x <= b, E x = e}``;
* :class:`GeneralizedPolyhedron` -- generator form ``conv(points) + cone(rays)``.

Vertex/ray enumeration converts the first into the second by exhaustive
n-subset solves, which is fine for ambient dimension at most :data:`MAX_DIM`.
Euclidean minimum-norm points over generator sets are computed with Wolfe's
corral algorithm, extended so that the corral may also hold rays.
"""
from __future__ import annotations

import enum
import itertools
from functools import cached_property
from typing import Iterable, Optional, Sequence

import numpy as np
from scipy.linalg import null_space
from scipy.optimize import brentq, linprog

from .errors import ConvergenceError, DimensionTooLarge, EmptyPolyhedron, EmptySet

MAX_DIM = 4
TOL_FEAS = 1e-9
TOL_OPT = 1e-9
TOL_CANON = 1e-12

_WOLFE_Z = 1e-13
_WOLFE_EPS = 1e-14


class Norm(str, enum.Enum):
    """Norm kinds on R^n. Call a member on a vector to get its norm."""

    EUCLIDEAN = "euclidean"
    L1 = "l1"
    LINF = "linf"

    @property
    def dual(self) -> "Norm":
        return {Norm.EUCLIDEAN: Norm.EUCLIDEAN, Norm.L1: Norm.LINF, Norm.LINF: Norm.L1}[self]

    @property
    def ord(self):
        return {Norm.EUCLIDEAN: 2, Norm.L1: 1, Norm.LINF: np.inf}[self]

    def __call__(self, v, axis=-1):
        return np.linalg.norm(np.asarray(v, dtype=float), ord=self.ord, axis=axis)


def as_vector(x, dim: Optional[int] = None) -> np.ndarray:
    v = np.atleast_1d(np.asarray(x, dtype=float)).ravel()
    if dim is not None and v.shape[0] != dim:
        raise ValueError(f"expected a vector of dimension {dim}, got {v.shape[0]}")
    if not np.all(np.isfinite(v)):
        raise ValueError("vector entries must be finite")
    return v


def _as_rows(M, dim: Optional[int]) -> np.ndarray:
    M = np.asarray(M, dtype=float)
    if M.size == 0:
        if dim is None:
            raise ValueError("dimension required for an empty constraint matrix")
        return np.zeros((0, dim))
    if M.ndim == 1:
        M = M.reshape(1, -1) if dim is None or M.shape[0] == dim else M.reshape(-1, 1)
    return M


class Polyhedron:
    """Closed polyhedron ``{x : A x <= b, E x = e}`` in R^n.

    Rows are rescaled to unit Euclidean norm on construction so that all
    feasibility tolerances are distances. Zero rows are dropped, or mark the
    set infeasible when they cannot be satisfied.
    """

    def __init__(self, A=None, b=None, E=None, e=None, dim: Optional[int] = None):
        if dim is None:
            for M in (A, E):
                if M is not None and np.asarray(M).size:
                    M = np.asarray(M, dtype=float)
                    dim = M.shape[-1] if M.ndim == 2 else M.shape[0]
                    break
        if dim is None:
            raise ValueError("cannot infer dimension of an unconstrained polyhedron")
        self.dim = int(dim)
        self.infeasible = False
        A = _as_rows(np.zeros((0, dim)) if A is None else A, dim)
        b = np.zeros(0) if b is None else np.atleast_1d(np.asarray(b, dtype=float))
        E = _as_rows(np.zeros((0, dim)) if E is None else E, dim)
        e = np.zeros(0) if e is None else np.atleast_1d(np.asarray(e, dtype=float))
        if A.shape != (b.shape[0], dim) or E.shape != (e.shape[0], dim):
            raise ValueError("constraint matrix and offset shapes disagree")
        if not (np.all(np.isfinite(A)) and np.all(np.isfinite(b))
                and np.all(np.isfinite(E)) and np.all(np.isfinite(e))):
            raise ValueError("constraint data must be finite")
        self.A, self.b = self._normalize(A, b, equality=False)
        self.E, self.e = self._normalize(E, e, equality=True)

    def _normalize(self, M, rhs, equality):
        norms = np.linalg.norm(M, axis=1)
        zero = norms <= 1e-14
        if np.any(zero):
            bad = np.abs(rhs[zero]) > TOL_FEAS if equality else rhs[zero] < -TOL_FEAS
            if np.any(bad):
                self.infeasible = True
        keep = ~zero
        return M[keep] / norms[keep, None], rhs[keep] / norms[keep]

    # -- constructors -------------------------------------------------------
    @classmethod
    def full(cls, dim: int) -> "Polyhedron":
        return cls(dim=dim)

    @classmethod
    def box(cls, lower, upper) -> "Polyhedron":
        lo, hi = as_vector(lower), as_vector(upper)
        n = lo.shape[0]
        eye = np.eye(n)
        return cls(np.vstack([eye, -eye]), np.concatenate([hi, -lo]))

    @classmethod
    def interval(cls, lower: float, upper: float) -> "Polyhedron":
        return cls.box([lower], [upper])

    @classmethod
    def from_halfspaces(cls, halfspaces: Iterable, dim: int, equalities: Iterable = ()) -> "Polyhedron":
        hs = list(halfspaces)
        eq = list(equalities)
        A = np.array([as_vector(c, dim) for c, _ in hs]).reshape(-1, dim)
        b = np.array([float(d) for _, d in hs])
        E = np.array([as_vector(c, dim) for c, _ in eq]).reshape(-1, dim)
        e = np.array([float(d) for _, d in eq])
        return cls(A, b, E, e, dim=dim)

    # -- basic queries ------------------------------------------------------
    @property
    def n_ineq(self) -> int:
        return self.A.shape[0]

    @property
    def halfspaces(self):
        return [(self.A[j].copy(), float(self.b[j])) for j in range(self.n_ineq)]

    def violation(self, x) -> float:
        x = as_vector(x, self.dim)
        if self.infeasible:
            return np.inf
        v = 0.0
        if self.n_ineq:
            v = max(v, float(np.max(self.A @ x - self.b)))
        if self.E.shape[0]:
            v = max(v, float(np.max(np.abs(self.E @ x - self.e))))
        return v

    def contains(self, x, tol: float = TOL_FEAS) -> bool:
        return self.violation(x) <= tol * max(1.0, float(np.max(np.abs(x), initial=0.0)))

    def active(self, x, tol: float = TOL_FEAS) -> np.ndarray:
        """Indices of inequality rows tight at ``x``."""
        x = as_vector(x, self.dim)
        if not self.n_ineq:
            return np.zeros(0, dtype=int)
        scale = max(1.0, float(np.max(np.abs(x))))
        return np.flatnonzero(np.abs(self.A @ x - self.b) <= tol * scale)

    def intersect(self, other: "Polyhedron") -> "Polyhedron":
        if other.dim != self.dim:
            raise ValueError("dimension mismatch")
        P = Polyhedron(np.vstack([self.A, other.A]), np.concatenate([self.b, other.b]),
                       np.vstack([self.E, other.E]), np.concatenate([self.e, other.e]), dim=self.dim)
        P.infeasible = self.infeasible or other.infeasible or P.infeasible
        return P

    @cached_property
    def generators(self):
        """Cached ``(vertices, rays)``; raises EmptyPolyhedron when infeasible."""
        return enumerate_generators(self)

    @property
    def vertices(self) -> np.ndarray:
        return self.generators[0]

    @property
    def rays(self) -> np.ndarray:
        return self.generators[1]

    @cached_property
    def is_empty(self) -> bool:
        try:
            self.generators
        except EmptyPolyhedron:
            return True
        return False

    @property
    def is_bounded(self) -> bool:
        return self.rays.shape[0] == 0

    def bounding_box(self):
        V, R = self.generators
        if R.shape[0]:
            raise ValueError("unbounded polyhedron has no bounding box")
        return V.min(axis=0), V.max(axis=0)

    def interior_point(self) -> Optional[np.ndarray]:
        """Chebyshev center if the set has nonempty interior, else None."""
        if self.E.shape[0] or self.infeasible:
            return None
        n, m = self.dim, self.n_ineq
        if m == 0:
            return np.zeros(n)
        c = np.zeros(n + 1)
        c[-1] = -1.0
        A = np.hstack([self.A, np.ones((m, 1))])
        res = linprog(c, A_ub=A, b_ub=self.b, bounds=[(None, None)] * n + [(0, 1.0)], method="highs")
        if res.status != 0 or res.x[-1] <= 1e-9:
            return None
        return res.x[:n]

    # -- equality/hash so polyhedra can key caches ---------------------------
    def _key(self):
        return (self.dim, self.infeasible, self.A.round(12).tobytes(), self.b.round(12).tobytes(),
                self.E.round(12).tobytes(), self.e.round(12).tobytes())

    def __eq__(self, other):
        return isinstance(other, Polyhedron) and self._key() == other._key()

    def __hash__(self):
        return hash(self._key())

    def __repr__(self):
        return f"Polyhedron(dim={self.dim}, n_ineq={self.n_ineq}, n_eq={self.E.shape[0]})"


def _dedup(rows: np.ndarray, tol: float) -> np.ndarray:
    out: list[np.ndarray] = []
    for r in rows:
        scale = max(1.0, float(np.max(np.abs(r), initial=0.0)))
        if not any(np.max(np.abs(r - s)) <= tol * scale for s in out):
            out.append(r)
    if not out:
        return np.zeros((0, rows.shape[1] if rows.ndim == 2 else 0))
    return np.array(out)


def _clean(M: np.ndarray) -> np.ndarray:
    # flush round-off to exact zeros (and -0.0 to 0.0) for stable output
    return np.where(np.abs(M) < 1e-13, 0.0, M) + 0.0


def enumerate_generators(P: Polyhedron, max_dim: int = MAX_DIM):
    """Vertices and rays of a polyhedron in half-space form.

    The lineality space L is split off first; the pointed part ``P ∩ L⊥`` is
    enumerated by solving every n-subset of constraints, and ±basis vectors of L
    are appended to the rays. Rays are unit vectors.
    """
    n = P.dim
    if n > max_dim:
        raise DimensionTooLarge(f"ambient dimension {n} exceeds cap {max_dim}")
    if P.infeasible:
        raise EmptyPolyhedron("polyhedron has an unsatisfiable constraint")
    A, b, E, e = P.A, P.b, P.E, P.e
    m = A.shape[0]
    M = np.vstack([A, E])
    L = null_space(M) if M.shape[0] else np.eye(n)
    E2 = np.vstack([E, L.T])
    e2 = np.concatenate([e, np.zeros(L.shape[1])])
    rank_e = np.linalg.matrix_rank(E2) if E2.shape[0] else 0

    def feasible(x):
        ok = True
        if m:
            ok = np.all(A @ x - b <= TOL_FEAS * max(1.0, float(np.max(np.abs(x)))))
        return ok

    verts = []
    need = n - rank_e
    if need < 0:
        need = 0
    for sub in itertools.combinations(range(m), need):
        rows = np.vstack([E2, A[list(sub)]]) if sub else E2
        rhs = np.concatenate([e2, b[list(sub)]]) if sub else e2
        if rows.shape[0] == 0:
            continue
        x, _, rank, _ = np.linalg.lstsq(rows, rhs, rcond=None)
        if rank < n:
            continue
        if np.max(np.abs(rows @ x - rhs)) > 1e-8 * max(1.0, float(np.max(np.abs(rhs)))):
            continue
        if feasible(x):
            verts.append(x)
    if n == 0 or (need == 0 and E2.shape[0] == 0):
        verts = [np.zeros(n)] if feasible(np.zeros(n)) else []
    if not verts:
        raise EmptyPolyhedron("polyhedron is empty")
    V = _clean(_dedup(np.array(verts), 1e-9))

    rays = []
    if need >= 1:
        for sub in itertools.combinations(range(m), need - 1):
            rows = np.vstack([E2, A[list(sub)]]) if (sub or E2.shape[0]) else np.zeros((0, n))
            ns = null_space(rows) if rows.shape[0] else np.eye(n)
            if ns.shape[1] != 1:
                continue
            d = ns[:, 0]
            for s in (d, -d):
                if m == 0 or np.all(A @ s <= 1e-10):
                    rays.append(s / np.linalg.norm(s))
    for col in L.T:
        rays.append(col)
        rays.append(-col)
    R = _clean(_dedup(np.array(rays), 1e-9)) if rays else np.zeros((0, n))
    return V, R


class GeneralizedPolyhedron:
    """The set ``conv(points) + cone(rays)``; empty iff there are no points."""

    def __init__(self, points, rays=None, dim: Optional[int] = None):
        pts = np.asarray(points, dtype=float)
        if dim is None:
            if pts.size:
                dim = pts.shape[-1] if pts.ndim == 2 else pts.shape[0]
            elif rays is not None and np.asarray(rays).size:
                r = np.asarray(rays, dtype=float)
                dim = r.shape[-1] if r.ndim == 2 else r.shape[0]
            else:
                raise ValueError("cannot infer dimension")
        self.dim = int(dim)
        self.points = pts.reshape(-1, self.dim) if pts.size else np.zeros((0, self.dim))
        rs = np.zeros((0, self.dim)) if rays is None else np.asarray(rays, dtype=float)
        rs = rs.reshape(-1, self.dim) if rs.size else np.zeros((0, self.dim))
        if rs.shape[0]:
            nr = np.linalg.norm(rs, axis=1)
            rs = rs[nr > TOL_CANON] / nr[nr > TOL_CANON, None]
        self.rays = rs

    @classmethod
    def point(cls, p) -> "GeneralizedPolyhedron":
        return cls([as_vector(p)])

    @classmethod
    def cone(cls, rays, dim: Optional[int] = None) -> "GeneralizedPolyhedron":
        rays = np.asarray(rays, dtype=float)
        if dim is None:
            dim = rays.shape[-1] if rays.ndim == 2 else rays.shape[0]
        return cls(np.zeros((1, dim)), rays, dim=dim)

    @property
    def is_empty(self) -> bool:
        return self.points.shape[0] == 0

    @property
    def is_bounded(self) -> bool:
        return self.rays.shape[0] == 0

    def translate(self, v) -> "GeneralizedPolyhedron":
        return GeneralizedPolyhedron(self.points + as_vector(v, self.dim), self.rays, dim=self.dim)

    def __add__(self, other: "GeneralizedPolyhedron") -> "GeneralizedPolyhedron":
        """Minkowski sum."""
        pts = (self.points[:, None, :] + other.points[None, :, :]).reshape(-1, self.dim)
        return GeneralizedPolyhedron(pts, np.vstack([self.rays, other.rays]), dim=self.dim)

    def __neg__(self) -> "GeneralizedPolyhedron":
        return GeneralizedPolyhedron(-self.points, -self.rays, dim=self.dim)

    def __sub__(self, other: "GeneralizedPolyhedron") -> "GeneralizedPolyhedron":
        return self + (-other)

    def canonicalize(self) -> "GeneralizedPolyhedron":
        """Drop duplicate and redundant generators."""
        pts = _dedup(self.points, TOL_CANON) if self.points.shape[0] else self.points
        rays = _dedup(self.rays, TOL_CANON) if self.rays.shape[0] else self.rays
        # rays first: a ray inside the cone of the others is redundant
        i = 0
        while i < rays.shape[0] and rays.shape[0] > 1:
            others = np.delete(rays, i, axis=0)
            z, _, _ = _wolfe(-rays[i:i + 1], others)
            if np.linalg.norm(z) <= 1e-10:
                rays = others
            else:
                i += 1
        i = 0
        while i < pts.shape[0] and pts.shape[0] > 1:
            others = np.delete(pts, i, axis=0)
            z, _, _ = _wolfe(others - pts[i], rays)
            if np.linalg.norm(z) <= 1e-10 * max(1.0, float(np.max(np.abs(pts[i])))):
                pts = others
            else:
                i += 1
        return GeneralizedPolyhedron(pts, rays, dim=self.dim)

    def contains(self, x, tol: float = TOL_OPT) -> bool:
        return distance_to_set(x, self) <= tol

    def __repr__(self):
        return f"GeneralizedPolyhedron(points={self.points.tolist()}, rays={self.rays.tolist()})"


# -- minimum-norm points --------------------------------------------------------

def _affine_min(gens: np.ndarray, is_ray: np.ndarray):
    """Min-norm point of ``{sum c_i g_i : sum_{points} c_i = 1}`` and its coefficients."""
    pidx = np.flatnonzero(~is_ray)
    ridx = np.flatnonzero(is_ray)
    p0 = gens[pidx[0]]
    others = np.concatenate([pidx[1:], ridx])
    coeffs = np.zeros(gens.shape[0])
    if others.size == 0:
        coeffs[pidx[0]] = 1.0
        return p0.copy(), coeffs
    D = np.where(is_ray[others, None], gens[others], gens[others] - p0).T
    c, *_ = np.linalg.lstsq(D, -p0, rcond=None)
    y = p0 + D @ c
    coeffs[others] = c
    coeffs[pidx[0]] = 1.0 - np.sum(c[: pidx.size - 1])
    return y, coeffs


def _wolfe(points: np.ndarray, rays: np.ndarray, max_iter: int = 500):
    """Wolfe's min-norm-point algorithm over ``conv(points) + cone(rays)``.

    Returns ``(z, alpha, beta)`` with ``z = points.T @ alpha + rays.T @ beta``.
    """
    k, q = points.shape[0], rays.shape[0]
    gens = np.vstack([points, rays]) if q else points
    is_ray = np.r_[np.zeros(k, bool), np.ones(q, bool)]
    scale = 1.0 + float(np.max(np.einsum("ij,ij->i", points, points)))
    i0 = int(np.argmin(np.einsum("ij,ij->i", points, points)))
    S = [i0]
    c = np.array([1.0])
    x = points[i0].copy()
    converged = False
    for _ in range(max_iter):
        xx = float(x @ x)
        vals = gens @ x
        viol = np.where(is_ray, vals, vals - xx)
        j = int(np.argmin(viol))
        if viol[j] >= -_WOLFE_Z * scale or j in S:
            converged = True
            break
        S.append(j)
        c = np.append(c, 0.0)
        for _minor in range(len(gens) + 2):
            y, cy = _affine_min(gens[S], is_ray[S])
            if np.all(cy > _WOLFE_EPS):
                x, c = y, cy
                break
            neg = cy <= _WOLFE_EPS
            denom = c[neg] - cy[neg]
            with np.errstate(divide="ignore", invalid="ignore"):
                ratios = np.where(denom > 0, c[neg] / denom, np.inf)
            theta = float(np.clip(np.min(ratios), 0.0, 1.0))
            c = c + theta * (cy - c)
            keep = c > _WOLFE_EPS
            if not np.any(keep & ~is_ray[S]):
                keep[int(np.argmax(np.where(is_ray[S], -np.inf, c)))] = True
            S = [s for s, kp in zip(S, keep) if kp]
            c = c[keep]
            pmask = ~is_ray[S]
            c[pmask] /= np.sum(c[pmask])
            x = c @ gens[S]
    if not converged:
        raise ConvergenceError("min-norm point iteration did not converge")
    alpha = np.zeros(k)
    beta = np.zeros(q)
    for s, cs in zip(S, c):
        if s < k:
            alpha[s] = cs
        else:
            beta[s - k] = cs
    return x, alpha, beta


def _project_simplex(v: np.ndarray) -> np.ndarray:
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    idx = np.arange(1, v.size + 1)
    rho = np.nonzero(u - css / idx > 0)[0][-1]
    return np.maximum(v - css[rho] / (rho + 1.0), 0.0)


def _projected_gradient_min_norm(points, rays, iters: int = 20000):
    """Fallback solver: accelerated projected gradient over simplex x orthant multipliers."""
    k, q = points.shape[0], rays.shape[0]
    G = np.vstack([points, rays])
    L = max(np.linalg.norm(G, 2) ** 2, 1e-12)
    w = np.r_[np.full(k, 1.0 / k), np.zeros(q)]
    w_prev = w.copy()
    for t in range(1, iters + 1):
        yk = w + (t - 1.0) / (t + 2.0) * (w - w_prev)
        grad = G @ (G.T @ yk)
        nxt = yk - grad / L
        nxt[:k] = _project_simplex(nxt[:k])
        nxt[k:] = np.maximum(nxt[k:], 0.0)
        w_prev, w = w, nxt
    return G.T @ w, w[:k], w[k:]


def _min_norm_euclidean(points: np.ndarray, rays: np.ndarray):
    try:
        return _wolfe(points, rays)
    except ConvergenceError:
        return _projected_gradient_min_norm(points, rays)


def _min_norm_polyhedral(points: np.ndarray, rays: np.ndarray, norm: Norm):
    k, q = points.shape[0], rays.shape[0]
    n = points.shape[1]
    G = np.vstack([points, rays]).T  # n x (k+q)
    nt = n if norm is Norm.L1 else 1
    c = np.r_[np.zeros(k + q), np.ones(nt)]
    T = -np.eye(n) if norm is Norm.L1 else -np.ones((n, 1))
    A_ub = np.vstack([np.hstack([G, T]), np.hstack([-G, T])])
    b_ub = np.zeros(2 * n)
    A_eq = np.r_[np.ones(k), np.zeros(q + nt)].reshape(1, -1)
    res = linprog(c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=[1.0], bounds=(0, None), method="highs")
    if res.status != 0:
        raise ConvergenceError(f"linear program failed: {res.message}")
    w = res.x[: k + q]
    return G @ w, w[:k], w[k:]


def min_norm_point(G: GeneralizedPolyhedron, norm: Norm = Norm.EUCLIDEAN):
    """Minimizer of ``norm`` over G and its norm value."""
    if G.is_empty:
        raise EmptySet("min-norm point of an empty set")
    norm = Norm(norm)
    if norm is Norm.EUCLIDEAN:
        z, _, _ = _min_norm_euclidean(G.points, G.rays)
    else:
        z, _, _ = _min_norm_polyhedral(G.points, G.rays, norm)
    return z, float(norm(z))


def distance_to_set(x, G: GeneralizedPolyhedron, norm: Norm = Norm.EUCLIDEAN) -> float:
    if G.is_empty:
        raise EmptySet("distance to an empty set")
    return min_norm_point(G.translate(-as_vector(x, G.dim)), norm)[1]


def set_distance(G1: GeneralizedPolyhedron, G2: GeneralizedPolyhedron,
                 norm: Norm = Norm.EUCLIDEAN) -> float:
    """``inf ||g1 - g2||`` over the two sets, via the Minkowski difference."""
    if G1.is_empty or G2.is_empty:
        raise EmptySet("distance between sets requires both nonempty")
    return min_norm_point(G1 - G2, norm)[1]


def nearest_points(G1: GeneralizedPolyhedron, G2: GeneralizedPolyhedron,
                   norm: Norm = Norm.EUCLIDEAN):
    """A closest pair ``(g1, g2)`` between the sets and their distance."""
    if G1.is_empty or G2.is_empty:
        raise EmptySet("distance between sets requires both nonempty")
    norm = Norm(norm)
    D = G1 - G2
    if norm is Norm.EUCLIDEAN:
        z, alpha, beta = _min_norm_euclidean(D.points, D.rays)
    else:
        z, alpha, beta = _min_norm_polyhedral(D.points, D.rays, norm)
    k2 = G2.points.shape[0]
    w1 = alpha.reshape(-1, k2).sum(axis=1)
    r1 = G1.rays.shape[0]
    g1 = w1 @ G1.points + (beta[:r1] @ G1.rays if r1 else 0.0)
    return g1, g1 - z, float(norm(z))


def project(x, P: Polyhedron) -> np.ndarray:
    """Euclidean projection onto a half-space-form polyhedron."""
    x = as_vector(x, P.dim)
    V, R = P.generators
    z, _, _ = _min_norm_euclidean(V - x, R)
    p = x + z
    # variational inequality <x - p, y - p> <= 0 over generators
    scale = 1.0 + float(np.max(np.abs(V))) + float(np.max(np.abs(x)))
    resid = max(float(np.max((V - p) @ (x - p))), float(np.max(R @ (x - p), initial=-np.inf)))
    if resid > 1e-7 * scale * scale:
        z, _, _ = _projected_gradient_min_norm(V - x, R)
        p = x + z
    return p


# -- support functions ------------------------------------------------------------

def support(G: GeneralizedPolyhedron, u) -> float:
    """``sup <g, u>`` over G (``+inf`` when a ray points along u)."""
    u = as_vector(u, G.dim)
    if G.is_empty:
        raise EmptySet("support function of an empty set")
    if G.rays.shape[0] and np.max(G.rays @ u) > 1e-12 * max(1.0, float(np.max(np.abs(u)))):
        return np.inf
    return float(np.max(G.points @ u))


def support_in_ball(G: GeneralizedPolyhedron, u, radius: float, norm: Norm = Norm.EUCLIDEAN):
    """Maximize ``<g, u>`` over ``G ∩ radius·B_norm``; returns ``(value, maximizer)``.

    Polyhedral balls give a linear program. For the Euclidean ball the maximizer
    is ``proj_G(s u)`` for the unique scale ``s`` at which it reaches the sphere
    (or the plain maximizer over G when that already lies inside the ball); the
    scale is found by bracketing and Brent's method.
    """
    u = as_vector(u, G.dim)
    norm = Norm(norm)
    z0, m0 = min_norm_point(G, norm)
    if m0 > radius + TOL_OPT:
        raise EmptySet(f"set misses the ball of radius {radius} (min norm {m0})")
    if norm is not Norm.EUCLIDEAN:
        return _support_in_ball_lp(G, u, radius, norm)
    if not np.any(u) or radius <= m0 + 1e-15:
        return float(u @ z0), z0
    scale_u = max(1.0, float(np.max(np.abs(u))))
    if not (G.rays.shape[0] and np.max(G.rays @ u) > 1e-12 * scale_u):
        vals = G.points @ u
        top = float(np.max(vals))
        tol = 1e-12 * (1.0 + abs(top))
        face_pts = G.points[vals >= top - tol]
        face_rays = G.rays[np.abs(G.rays @ u) <= 1e-12 * scale_u] if G.rays.shape[0] else G.rays
        zf, _, _ = _min_norm_euclidean(face_pts, face_rays)
        if np.linalg.norm(zf) <= radius:
            return float(zf @ u), zf

    def proj(s):
        w = s * u
        z, _, _ = _min_norm_euclidean(G.points - w, G.rays)
        return w + z

    def h(s):
        return float(np.linalg.norm(proj(s))) - radius

    hi = 1.0 / float(np.linalg.norm(u))
    for _ in range(200):
        if h(hi) >= 0:
            break
        hi *= 2.0
    else:
        raise ConvergenceError("could not bracket the support point")
    if h(0.0) >= 0:
        s = 0.0
    else:
        s = brentq(h, 0.0, hi, xtol=1e-16, rtol=4 * np.finfo(float).eps, maxiter=500)
    y = proj(s)
    nrm = np.linalg.norm(y)
    if nrm > radius:
        y = y * (radius / nrm)
    return float(y @ u), y


def _support_in_ball_lp(G, u, radius, norm):
    k, q = G.points.shape[0], G.rays.shape[0]
    n = G.dim
    M = np.vstack([G.points, G.rays]).T
    # dual-ball constraint ||z||_norm <= radius for z = M w
    if norm is Norm.LINF:
        A_ub = np.vstack([M, -M])
        b_ub = np.full(2 * n, radius)
        c = np.r_[-(u @ M)]
        A_eq = np.r_[np.ones(k), np.zeros(q)].reshape(1, -1)
        res = linprog(c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=[1.0], bounds=(0, None), method="highs")
        w = res.x if res.status == 0 else None
    else:
        # l1: auxiliary t >= |z|, sum t <= radius
        I = np.eye(n)
        A_ub = np.vstack([np.hstack([M, -I]), np.hstack([-M, -I]),
                          np.r_[np.zeros(k + q), np.ones(n)].reshape(1, -1)])
        b_ub = np.r_[np.zeros(2 * n), radius]
        c = np.r_[-(u @ M), np.zeros(n)]
        A_eq = np.r_[np.ones(k), np.zeros(q + n)].reshape(1, -1)
        res = linprog(c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=[1.0], bounds=(0, None), method="highs")
        w = res.x[: k + q] if res.status == 0 else None
    if w is None:
        raise ConvergenceError(f"support linear program failed: {res.message}")
    z = M @ w
    return float(u @ z), z


# -- conversions ----------------------------------------------------------------

def to_halfspaces(G: GeneralizedPolyhedron) -> Polyhedron:
    """Facet description of ``conv(points) + cone(rays)`` (small dimension only)."""
    if G.is_empty:
        raise EmptySet("cannot convert an empty set")
    n = G.dim
    if n > MAX_DIM:
        raise DimensionTooLarge(f"ambient dimension {n} exceeds cap {MAX_DIM}")
    p0 = G.points[0]
    D = np.vstack([G.points - p0, G.rays])
    if D.shape[0]:
        _, s, Vt = np.linalg.svd(D)
        k = int(np.sum(s > 1e-10 * max(1.0, s[0] if s.size else 1.0)))
    else:
        Vt = np.eye(n)
        k = 0
    B = Vt[:k].T            # basis of the affine hull directions
    N = Vt[k:].T            # orthogonal complement
    E = N.T
    e = N.T @ p0
    if k == 0:
        return Polyhedron(np.zeros((0, n)), np.zeros(0), E, e, dim=n)
    P = (G.points - p0) @ B
    R = G.rays @ B
    gens = np.vstack([P, R])
    is_ray = np.r_[np.zeros(P.shape[0], bool), np.ones(R.shape[0], bool)]
    facets = []
    for sub in itertools.combinations(range(gens.shape[0]), k):
        sub = list(sub)
        pts_sub = [i for i in sub if not is_ray[i]]
        if not pts_sub:
            continue
        base = gens[pts_sub[0]]
        dirs = [gens[i] - base if not is_ray[i] else gens[i] for i in sub if i != pts_sub[0]]
        dirs = np.array(dirs).reshape(-1, k)
        ns = null_space(dirs) if dirs.shape[0] else np.eye(k)
        if ns.shape[1] != 1:
            continue
        h = ns[:, 0]
        for hh in (h, -h):
            g = float(hh @ base)
            tol = 1e-9 * (1.0 + abs(g))
            if np.all(P @ hh <= g + tol) and (R.shape[0] == 0 or np.all(R @ hh <= 1e-10)):
                facets.append(np.r_[hh, g])
    if facets:
        F = _dedup(np.array(facets), 1e-9)
        A = F[:, :k] @ B.T
        b = F[:, k] + A @ p0
    else:
        A, b = np.zeros((0, n)), np.zeros(0)
    return Polyhedron(A, b, E, e, dim=n)


def ball_polytope(center, radius: float, norm: Norm = Norm.EUCLIDEAN):
    """Closed norm ball as a polyhedron; returns ``(P, exact)``.

    Euclidean balls in dimension >= 2 are replaced by a circumscribed polytope,
    so ``exact`` is False there.
    """
    c = as_vector(center)
    n = c.shape[0]
    norm = Norm(norm)
    if radius <= 0:
        raise ValueError("radius must be positive")
    if n == 1 or norm is Norm.LINF:
        return Polyhedron.box(c - radius, c + radius), True
    if norm is Norm.L1:
        signs = np.array(list(itertools.product([-1.0, 1.0], repeat=n)))
        return Polyhedron(signs, radius + signs @ c), True
    if n == 2:
        ang = np.linspace(0.0, 2 * np.pi, 32, endpoint=False)
        U = np.c_[np.cos(ang), np.sin(ang)]
    else:
        dirs = [s * np.eye(n)[i] for i in range(n) for s in (-1.0, 1.0)]
        for i, j in itertools.combinations(range(n), 2):
            for si, sj in itertools.product((-1.0, 1.0), repeat=2):
                v = np.zeros(n)
                v[i], v[j] = si, sj
                dirs.append(v / np.sqrt(2.0))
        dirs.extend(np.array(list(itertools.product([-1.0, 1.0], repeat=n))) / np.sqrt(n))
        U = np.array(dirs)
    return Polyhedron(U, radius + U @ c), False


def unit_ball_vertices(n: int, norm: Norm) -> np.ndarray:
    """Extreme points of a polyhedral unit ball (l1 or linf)."""
    norm = Norm(norm)
    if norm is Norm.L1:
        eye = np.eye(n)
        return np.vstack([eye, -eye])
    if norm is Norm.LINF:
        return np.array(list(itertools.product([-1.0, 1.0], repeat=n)))
    raise ValueError("the Euclidean ball has no vertices")


def diameter(points: np.ndarray, norm: Norm = Norm.EUCLIDEAN) -> float:
    pts = np.asarray(points, dtype=float)
    if pts.shape[0] < 2:
        return 0.0
    diff = pts[:, None, :] - pts[None, :, :]
    return float(np.max(Norm(norm)(diff)))


__all__: Sequence[str] = [
    "MAX_DIM", "TOL_FEAS", "TOL_OPT", "Norm", "Polyhedron", "GeneralizedPolyhedron",
    "enumerate_generators", "project", "nearest_points", "min_norm_point", "distance_to_set", "set_distance",
    "support", "support_in_ball", "to_halfspaces", "ball_polytope", "unit_ball_vertices",
    "diameter", "as_vector",
]
