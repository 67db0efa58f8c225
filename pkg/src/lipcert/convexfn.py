"""Convex functions of the form quadratic + max-of-affine + polyhedral indicator.

    f(x) = ½⟨Qx, x⟩ + max_i (⟨a_i, x⟩ + b_i)   for x in Ω,   +inf otherwise.

Subdifferentials are generalized polyhedra:
    ∂f(x) = conv{Qx + a_i : i active at x} + N(x; Ω).
The cell complex partitions Ω (optionally cut by a region of interest) into
relatively open pieces on which the active pieces and tight constraints are
constant, so statements of the form "for every x" reduce to finite checks.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import DimensionTooLarge, EmptyPolyhedron, OutsideDomain, TooManyCells
from .geometry import (
    MAX_DIM,
    TOL_FEAS,
    TOL_OPT,
    GeneralizedPolyhedron,
    Norm,
    Polyhedron,
    as_vector,
    distance_to_set,
)

TOL_ACTIVE = 1e-9
MAX_CELLS = 100_000


class ConvexFunction:
    """Immutable polyhedral-plus-quadratic convex function on R^n."""

    def __init__(self, slopes, intercepts, domain: Optional[Polyhedron] = None, Q=None,
                 norm: Norm | str = Norm.EUCLIDEAN, name: str = ""):
        slopes = np.asarray(slopes, dtype=float)
        if slopes.ndim == 1:
            slopes = slopes.reshape(-1, 1) if domain is None or domain.dim == 1 else slopes.reshape(1, -1)
        if slopes.ndim != 2 or slopes.shape[0] == 0:
            raise ValueError("at least one affine piece is required")
        self.slopes = slopes
        self.intercepts = np.atleast_1d(np.asarray(intercepts, dtype=float)).ravel()
        if self.intercepts.shape[0] != slopes.shape[0]:
            raise ValueError("slopes and intercepts disagree in count")
        self.dim = slopes.shape[1]
        if self.dim > MAX_DIM:
            raise DimensionTooLarge(f"dimension {self.dim} exceeds cap {MAX_DIM}")
        self.domain = Polyhedron.full(self.dim) if domain is None else domain
        if self.domain.dim != self.dim:
            raise ValueError("domain dimension differs from slope dimension")
        if Q is not None:
            Q = np.asarray(Q, dtype=float).reshape(self.dim, self.dim)
            if not np.allclose(Q, Q.T, atol=1e-12):
                raise ValueError("quadratic term must be symmetric")
            if np.min(np.linalg.eigvalsh(Q)) < -1e-10:
                raise ValueError("quadratic term must be positive semidefinite")
            if not np.any(Q):
                Q = None
        self.Q = Q
        self.norm = Norm(norm)
        self.name = name
        if not (np.all(np.isfinite(self.slopes)) and np.all(np.isfinite(self.intercepts))):
            raise ValueError("affine data must be finite")
        if self.domain.is_empty:
            raise EmptyPolyhedron("function domain is empty")

    # -- identity ---------------------------------------------------------------
    def _key(self):
        q = b"" if self.Q is None else self.Q.round(12).tobytes()
        return (self.dim, self.slopes.round(12).tobytes(), self.intercepts.round(12).tobytes(),
                q, self.domain, self.norm)

    def __eq__(self, other):
        return isinstance(other, ConvexFunction) and self._key() == other._key()

    def __hash__(self):
        return hash(self._key())

    def __repr__(self):
        label = f" {self.name!r}" if self.name else ""
        return (f"ConvexFunction{label}(dim={self.dim}, pieces={self.slopes.shape[0]}, "
                f"quadratic={self.Q is not None}, norm={self.norm.value})")

    @property
    def has_quadratic(self) -> bool:
        return self.Q is not None

    @property
    def n_pieces(self) -> int:
        return self.slopes.shape[0]

    def with_domain(self, domain: Polyhedron) -> "ConvexFunction":
        return ConvexFunction(self.slopes, self.intercepts, domain, self.Q, self.norm, self.name)

    # -- evaluation -------------------------------------------------------------
    def in_domain(self, x, tol: float = TOL_FEAS) -> bool:
        return self.domain.contains(x, tol)

    def piece_values(self, x) -> np.ndarray:
        return self.slopes @ x + self.intercepts

    def evaluate(self, x) -> float:
        x = as_vector(x, self.dim)
        if not self.domain.contains(x):
            return np.inf
        val = float(np.max(self.piece_values(x)))
        if self.Q is not None:
            val += 0.5 * float(x @ self.Q @ x)
        return val

    __call__ = evaluate

    def evaluate_many(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float).reshape(-1, self.dim)
        vals = np.max(X @ self.slopes.T + self.intercepts, axis=1)
        if self.Q is not None:
            vals = vals + 0.5 * np.einsum("ij,jk,ik->i", X, self.Q, X)
        P = self.domain
        bad = np.zeros(X.shape[0], dtype=bool)
        scale = np.maximum(1.0, np.max(np.abs(X), axis=1))
        if P.n_ineq:
            bad |= np.max(X @ P.A.T - P.b, axis=1) > TOL_FEAS * scale
        if P.E.shape[0]:
            bad |= np.max(np.abs(X @ P.E.T - P.e), axis=1) > TOL_FEAS * scale
        if P.infeasible:
            bad[:] = True
        vals[bad] = np.inf
        return vals

    def smooth_gradient(self, x) -> np.ndarray:
        return np.zeros(self.dim) if self.Q is None else self.Q @ x

    def active_pieces(self, x, tol: float = TOL_ACTIVE) -> np.ndarray:
        x = as_vector(x, self.dim)
        vals = self.piece_values(x)
        top = float(np.max(vals))
        spread = float(np.max(vals) - np.min(vals))
        return np.flatnonzero(vals >= top - tol * max(1.0, abs(top), spread))

    # -- set-valued maps ----------------------------------------------------------
    def _require_domain(self, x):
        x = as_vector(x, self.dim)
        if not self.domain.contains(x):
            raise OutsideDomain(f"point {x.tolist()} lies outside dom f")
        return x

    def normal_cone(self, x) -> GeneralizedPolyhedron:
        return normal_cone(self.domain, x)

    def subdifferential(self, x) -> GeneralizedPolyhedron:
        x = self._require_domain(x)
        pts = self.slopes[self.active_pieces(x)] + self.smooth_gradient(x)
        N = normal_cone(self.domain, x)
        return GeneralizedPolyhedron(pts, N.rays, dim=self.dim).canonicalize()

    def min_norm_subgradient(self, x):
        from .geometry import min_norm_point
        return min_norm_point(self.subdifferential(x), self.norm.dual)

    def eps_normal_membership(self, x, eps: float, v) -> bool:
        return eps_normal_membership(self.domain, x, eps, v, self.norm)


def normal_cone(domain: Polyhedron, x) -> GeneralizedPolyhedron:
    """Cone generated by outward unit normals of constraints tight at ``x``."""
    x = as_vector(x, domain.dim)
    if not domain.contains(x):
        raise OutsideDomain(f"point {x.tolist()} lies outside the polyhedron")
    rays = [domain.A[j] for j in domain.active(x)]
    for row in domain.E:
        rays.extend([row, -row])
    R = np.array(rays).reshape(-1, domain.dim)
    return GeneralizedPolyhedron.cone(R, dim=domain.dim).canonicalize()


def eps_normal_membership(domain: Polyhedron, x, eps: float, v, norm: Norm = Norm.EUCLIDEAN) -> bool:
    """Whether ``v`` lies in ``N(x; Ω) + eps·B*`` (distance measured in the dual norm)."""
    if eps < 0:
        raise ValueError("eps must be nonnegative")
    N = normal_cone(domain, x)
    return distance_to_set(as_vector(v, domain.dim), N, Norm(norm).dual) <= eps + TOL_OPT


# -- cell complex -------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Cell:
    """Relatively open cell; ``region`` is its closure in half-space form."""

    region: Polyhedron
    active_affine: tuple
    active_domain_constraints: tuple
    active_region_constraints: tuple
    representative: np.ndarray
    vertices: np.ndarray
    rays: np.ndarray
    dimension: int

    @property
    def bounded(self) -> bool:
        return self.rays.shape[0] == 0

    @property
    def key(self):
        return (self.active_affine, self.active_domain_constraints, self.active_region_constraints)

    @cached_property
    def affine_hull(self):
        """``(origin, basis)`` with the basis columns orthonormal."""
        v0 = self.vertices[0]
        D = np.vstack([self.vertices - v0, self.rays])
        n = v0.shape[0]
        if D.shape[0] == 0 or self.dimension == 0:
            return v0, np.zeros((n, 0))
        _, _, Vt = np.linalg.svd(D)
        return v0, Vt[: self.dimension].T


@dataclass(frozen=True, eq=False)
class CellComplex:
    cells: list
    region_of_interest: Polyhedron
    function: ConvexFunction = field(repr=False)

    def __len__(self):
        return len(self.cells)

    def __iter__(self):
        return iter(self.cells)

    @property
    def bounded(self) -> bool:
        return all(c.bounded for c in self.cells)

    def vertices(self) -> np.ndarray:
        pts = [c.vertices for c in self.cells if c.dimension == 0]
        return np.vstack(pts) if pts else np.zeros((0, self.function.dim))


def _face_polyhedron(f: ConvexFunction, region: Optional[Polyhedron], T, D, G) -> Polyhedron:
    n = f.dim
    A_rows, b_rows, E_rows, e_rows = [], [], [], []
    i0 = T[0]
    a0, c0 = f.slopes[i0], f.intercepts[i0]
    for i in range(f.n_pieces):
        if i == i0:
            continue
        row, rhs = f.slopes[i] - a0, c0 - f.intercepts[i]
        if i in T:
            E_rows.append(row)
            e_rows.append(rhs)
        else:
            A_rows.append(row)
            b_rows.append(rhs)
    Om = f.domain
    for j in range(Om.n_ineq):
        (E_rows if j in D else A_rows).append(Om.A[j])
        (e_rows if j in D else b_rows).append(Om.b[j])
    E_rows.extend(Om.E)
    e_rows.extend(Om.e)
    if region is not None:
        for j in range(region.n_ineq):
            (E_rows if j in G else A_rows).append(region.A[j])
            (e_rows if j in G else b_rows).append(region.b[j])
        E_rows.extend(region.E)
        e_rows.extend(region.e)
    A = np.array(A_rows).reshape(-1, n)
    E = np.array(E_rows).reshape(-1, n)
    return Polyhedron(A, np.array(b_rows), E, np.array(e_rows), dim=n)


def _pattern(f: ConvexFunction, region: Optional[Polyhedron], y):
    T = tuple(int(i) for i in f.active_pieces(y))
    D = tuple(int(j) for j in f.domain.active(y))
    G = tuple(int(j) for j in region.active(y)) if region is not None else ()
    return T, D, G


def _affine_dimension(V: np.ndarray, R: np.ndarray) -> int:
    D = np.vstack([V - V[0], R])
    if D.shape[0] == 0:
        return 0
    s = np.linalg.svd(D, compute_uv=False)
    return int(np.sum(s > 1e-9 * max(1.0, s[0])))


@lru_cache(maxsize=256)
def _build_cached(f: ConvexFunction, region: Optional[Polyhedron], max_cells: int) -> CellComplex:
    k = f.n_pieces
    m = f.domain.n_ineq
    g = region.n_ineq if region is not None else 0
    total = k + m + g
    cells: dict = {}
    seen_patterns: set = set()

    def split(S):
        T = tuple(i for i in S if i < k)
        D = tuple(i - k for i in S if k <= i < k + m)
        G = tuple(i - k - m for i in S if i >= k + m)
        return T, D, G

    def visit(S):
        T, D, G = split(S)
        P = _face_polyhedron(f, region, T, D, G)
        try:
            V, R = P.generators
        except EmptyPolyhedron:
            return False
        rep = V.mean(axis=0) + (R.sum(axis=0) if R.shape[0] else 0.0)
        pat = _pattern(f, region, rep)
        if pat not in seen_patterns:
            seen_patterns.add(pat)
            Pc = P if pat == (T, D, G) else _face_polyhedron(f, region, *pat)
            Vc, Rc = Pc.generators
            repc = Vc.mean(axis=0) + (Rc.sum(axis=0) if Rc.shape[0] else 0.0)
            cells[pat] = Cell(Pc, pat[0], pat[1], pat[2], repc, Vc, Rc, _affine_dimension(Vc, Rc))
            if len(cells) > max_cells:
                raise TooManyCells(f"cell count exceeds cap {max_cells}")
        return True

    stack = [(i,) for i in reversed(range(k))]
    while stack:
        S = stack.pop()
        if not visit(S):
            continue
        for j in reversed(range(S[-1] + 1, total)):
            stack.append(S + (j,))
    roi = region if region is not None else f.domain
    ordered = sorted(cells.values(), key=lambda c: (-c.dimension, c.key))
    return CellComplex(ordered, roi, f)


def build_cell_complex(f: ConvexFunction, region: Optional[Polyhedron] = None,
                       max_cells: int = MAX_CELLS) -> CellComplex:
    """Cells of constant (active pieces, tight domain rows, tight region rows).

    Every nonempty face obtained by forcing a subset of these constraints to be
    tight is visited (depth-first, pruning empty faces); each face is labelled by
    the pattern at its relative-interior point, which identifies the cell.
    """
    if region is not None and region.dim != f.dim:
        raise ValueError("region dimension mismatch")
    return _build_cached(f, region, max_cells)


# -- cellwise minimization of convex quadratics ---------------------------------------

def minimize_over_cells(cx: CellComplex, M: np.ndarray, g: np.ndarray, const: float = 0.0,
                        objective: Optional[Callable] = None):
    """Minimize ``½yᵀMy + gᵀy + max_i(a_iᵀy + b_i)`` over the union of cells.

    For each cell the stationary point of the smooth restriction over the cell's
    affine hull is accepted when it lies in the cell closure. A minimizer of a
    convex function over the union lies in the relative interior of some cell
    of minimal dimension, where it is stationary on that hull, so the best
    accepted candidate is a global minimizer (bounded case).
    Returns ``(argmin, value)``.
    """
    f = cx.function
    M = np.asarray(M, dtype=float)
    g = np.asarray(g, dtype=float)

    def phi(y):
        return 0.5 * float(y @ M @ y) + float(g @ y) + float(np.max(f.piece_values(y))) + const

    obj = objective or phi
    best, best_val = None, np.inf
    for cell in cx.cells:
        i0 = cell.active_affine[0]
        lin = g + f.slopes[i0]
        y0, B = cell.affine_hull
        if B.shape[1] == 0:
            cand = y0
        else:
            H = B.T @ M @ B
            rhs = -B.T @ (M @ y0 + lin)
            z, *_ = np.linalg.lstsq(H, rhs, rcond=None)
            cand = y0 + B @ z
            resid = np.linalg.norm(B.T @ (M @ cand + lin))
            if resid > 1e-8 * max(1.0, float(np.linalg.norm(lin))):
                continue
            if not cell.region.contains(cand, 1e-9):
                continue
        val = obj(cand)
        if val < best_val - 1e-15 * max(1.0, abs(val)):
            best, best_val = cand, val
    return best, best_val


__all__: Sequence[str] = [
    "ConvexFunction", "Cell", "CellComplex", "build_cell_complex", "normal_cone",
    "eps_normal_membership", "minimize_over_cells", "TOL_ACTIVE",
]
