"""Lipschitz extensions of a convex function beyond its domain.

Two constructions are evaluated pointwise:

* inf-convolution   E(x) = inf_{u ∈ dom f} f(u) + ℓ‖x − u‖;
* sup-affine        F(x) = sup { ⟨y*, x − y⟩ + f(y) : y ∈ dom f, y* ∈ ∂f(y) ∩ ℓB* },
  together with its variant where y is restricted to the boundary of dom f.

Both are only defined here for bases certified ℓ-Lipschitz on their domain.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.optimize import minimize, minimize_scalar

from .certify import Region, cell_subdifferential, check_selection
from .convexfn import Cell, ConvexFunction, build_cell_complex, minimize_over_cells
from .errors import EmptyInterior, EmptySet, NotCertified, OutsideDomain
from .geometry import (
    GeneralizedPolyhedron,
    Norm,
    Polyhedron,
    as_vector,
    ball_polytope,
    distance_to_set,
    enumerate_generators,
    project,
    support,
    support_in_ball,
    to_halfspaces,
)

TOL_EXT = 1e-6


class ExtensionKind(str, enum.Enum):
    INFCONV = "infconv"
    SUPAFFINE = "supaffine"
    SUPAFFINE_BOUNDARY = "supaffine_boundary"

    @classmethod
    def parse(cls, text: str) -> "ExtensionKind":
        return cls(text.replace("-", "_"))


@dataclass(eq=False)
class ExtensionSpec:
    """A base function, a modulus and an extension kind.

    Construction runs the selection criterion on dom f and raises
    :class:`NotCertified` unless the base is ℓ-Lipschitz there.
    """

    base: ConvexFunction
    modulus: float
    kind: ExtensionKind = ExtensionKind.SUPAFFINE
    certificate: object = field(default=None, repr=False)
    caps: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self.kind = ExtensionKind.parse(self.kind) if isinstance(self.kind, str) else self.kind
        self.modulus = float(self.modulus)
        cert = check_selection(self.base, Region.full_domain(), self.modulus)
        if not cert.certified:
            raise NotCertified(
                f"base is not {self.modulus}-Lipschitz on its domain (observed {cert.observed})")
        self.certificate = cert

    @property
    def cells(self):
        return build_cell_complex(self.base).cells


# -- inf-convolution -------------------------------------------------------------------

def _infconv_cell_euclidean(f: ConvexFunction, cell: Cell, x: np.ndarray, ell: float):
    """Minimize ``a·u + b + ℓ‖x − u‖`` over the closure of one cell (Euclidean norm).

    On the cell's affine hull, with x_F the projection of x and d its distance,
    the objective is ``a·u + b + ℓ·sqrt(d² + ‖u − x_F‖²)``; its stationary point
    moves from x_F against the in-hull gradient. Vertices are always candidates,
    and an infimum at infinity is reported for unbounded cells when the in-hull
    gradient has norm ℓ and points out of the recession cone.
    """
    i0 = cell.active_affine[0]
    a, b = f.slopes[i0], f.intercepts[i0]
    vals = [float(a @ v + b + ell * np.linalg.norm(x - v)) for v in cell.vertices]
    y0, B = cell.affine_hull
    if B.shape[1]:
        xF = y0 + B @ (B.T @ (x - y0))
        d = float(np.linalg.norm(x - xF))
        ga = B.T @ a
        alpha = float(np.linalg.norm(ga))
        cand = None
        if d <= 1e-12 * max(1.0, float(np.linalg.norm(x))):
            if alpha <= ell + 1e-12:
                cand = xF
        elif alpha < ell:
            cand = xF - (d / np.sqrt(ell * ell - alpha * alpha)) * (B @ ga)
        if cand is not None and cell.region.contains(cand, 1e-9):
            vals.append(float(a @ cand + b + ell * np.linalg.norm(x - cand)))
        if cell.rays.shape[0] and alpha > 0 and alpha >= ell - 1e-12:
            direction = -(B @ ga) / alpha
            P = cell.region
            ok = (P.n_ineq == 0 or np.all(P.A @ direction <= 1e-10)) and \
                (P.E.shape[0] == 0 or np.all(np.abs(P.E @ direction) <= 1e-10))
            if ok:
                vals.append(float(a @ xF + b))
    return min(vals)


def _infconv_lp(f: ConvexFunction, x: np.ndarray, ell: float) -> float:
    from scipy.optimize import linprog

    n, k = f.dim, f.n_pieces
    ns = n if f.norm is Norm.L1 else 1
    # variables: u (n), t (1), s (ns)
    c = np.r_[np.zeros(n), 1.0, ell * np.ones(ns)]
    rows, rhs = [], []
    for i in range(k):
        rows.append(np.r_[f.slopes[i], -1.0, np.zeros(ns)])
        rhs.append(-f.intercepts[i])
    for j in range(n):
        e = np.zeros(n)
        e[j] = 1.0
        sj = np.zeros(ns)
        sj[j if ns == n else 0] = 1.0
        rows.append(np.r_[-e, 0.0, -sj])
        rhs.append(-x[j])
        rows.append(np.r_[e, 0.0, -sj])
        rhs.append(x[j])
    D = f.domain
    for j in range(D.n_ineq):
        rows.append(np.r_[D.A[j], 0.0, np.zeros(ns)])
        rhs.append(D.b[j])
    A_eq = np.hstack([D.E, np.zeros((D.E.shape[0], 1 + ns))]) if D.E.shape[0] else None
    b_eq = D.e if D.E.shape[0] else None
    bounds = [(None, None)] * (n + 1) + [(0, None)] * ns
    res = linprog(c, A_ub=np.array(rows), b_ub=np.array(rhs), A_eq=A_eq, b_eq=b_eq,
                  bounds=bounds, method="highs")
    if res.status != 0:
        raise EmptySet(f"inf-convolution linear program failed: {res.message}")
    return float(res.fun)


def _infconv_quadratic_line(f: ConvexFunction, cells, x: np.ndarray, ell: float) -> float:
    """Exact one-dimensional case: ``q u²/2 + a u + b + ℓ|x − u|`` per cell.

    On each cell the objective is convex with one kink at x, so its minimum is
    at an endpoint, at x, or at a stationary point ``u = −(a ± ℓ)/q`` of one of
    the two smooth branches; every candidate is clipped into the cell.
    """
    q = float(f.Q[0, 0])
    xs = float(x[0])
    best = np.inf
    for cell in cells:
        a, b = float(f.slopes[cell.active_affine[0], 0]), float(f.intercepts[cell.active_affine[0]])
        lo = float(cell.vertices.min())
        hi = float(cell.vertices.max())
        if cell.rays.shape[0]:
            lo = -np.inf if np.any(cell.rays[:, 0] < 0) else lo
            hi = np.inf if np.any(cell.rays[:, 0] > 0) else hi
        cands = [xs, -(a + ell) / q, -(a - ell) / q] + [float(v) for v in cell.vertices.ravel()]
        for u in np.clip(cands, lo, hi):
            best = min(best, 0.5 * q * u * u + a * u + b + ell * abs(xs - u))
    return float(best)


def _infconv_quadratic(f: ConvexFunction, x: np.ndarray, ell: float) -> float:
    """Epigraph form solved with SLSQP from several starts (approximate, see TOL_EXT)."""
    n, k = f.dim, f.n_pieces
    Q = f.Q
    norm = f.norm
    ns = n if norm is Norm.L1 else 1

    def split(v):
        return v[:n], v[n], v[n + 1:]

    def fun(v):
        u, t, s = split(v)
        return 0.5 * u @ Q @ u + t + ell * np.sum(s)

    def jac(v):
        u, _, s = split(v)
        return np.r_[Q @ u, 1.0, ell * np.ones(ns)]

    cons = [{"type": "ineq",
             "fun": lambda v: v[n] - (f.slopes @ v[:n] + f.intercepts),
             "jac": lambda v: np.hstack([-f.slopes, np.ones((k, 1)), np.zeros((k, ns))])}]
    D = f.domain
    if D.n_ineq:
        cons.append({"type": "ineq", "fun": lambda v: D.b - D.A @ v[:n],
                     "jac": lambda v: np.hstack([-D.A, np.zeros((D.n_ineq, 1 + ns))])})
    if D.E.shape[0]:
        cons.append({"type": "eq", "fun": lambda v: D.E @ v[:n] - D.e,
                     "jac": lambda v: np.hstack([D.E, np.zeros((D.E.shape[0], 1 + ns))])})
    if norm is Norm.EUCLIDEAN:
        cons.append({"type": "ineq", "fun": lambda v: np.array([v[n + 1] ** 2 - np.sum((x - v[:n]) ** 2)]),
                     "jac": lambda v: np.r_[2 * (x - v[:n]), 0.0, 2 * v[n + 1]].reshape(1, -1)})
    else:
        I = np.eye(n)
        S = np.eye(n) if ns == n else np.ones((n, 1))
        G = np.vstack([np.hstack([I, np.zeros((n, 1)), S]), np.hstack([-I, np.zeros((n, 1)), S])])
        h = np.r_[x, -x]
        cons.append({"type": "ineq", "fun": lambda v: G @ v - h, "jac": lambda v: G})
    bounds = [(None, None)] * (n + 1) + [(0, None)] * ns
    starts = [project(x, D)] + list(D.vertices[:8])
    best = np.inf
    for u0 in starts:
        t0 = float(np.max(f.slopes @ u0 + f.intercepts))
        s0 = norm(x - u0)
        v0 = np.r_[u0, t0, np.full(ns, s0 if ns == 1 else 0.0)]
        if ns == n:
            v0[n + 1:] = np.abs(x - u0)
        res = minimize(fun, v0, jac=jac, constraints=cons, bounds=bounds, method="SLSQP",
                       options={"ftol": 1e-15, "maxiter": 500})
        u = res.x[:n]
        if D.contains(u, 1e-7):
            val = f.evaluate(project(u, D)) + ell * norm(x - project(u, D))
            best = min(best, val)
    return float(best)


def infconv_extension(spec: ExtensionSpec, x) -> float:
    """``inf_{u ∈ dom f} f(u) + ℓ‖x − u‖``."""
    f = spec.base
    x = as_vector(x, f.dim)
    ell = spec.modulus
    if f.Q is not None:
        if f.dim == 1:
            return _infconv_quadratic_line(f, spec.cells, x, ell)
        return _infconv_quadratic(f, x, ell)
    if f.norm is not Norm.EUCLIDEAN and f.dim > 1:
        return _infconv_lp(f, x, ell)
    return min(_infconv_cell_euclidean(f, c, x, ell) for c in spec.cells)


# -- sup-affine ------------------------------------------------------------------------

def _polyhedral_cap(f: ConvexFunction, cell: Cell, ell: float):
    """Vertices of ``∂f(y_C) ∩ ℓB*`` for a polyhedral dual ball, or None when empty."""
    K = cell_subdifferential(f, cell, cell.representative)
    ball, _ = ball_polytope(np.zeros(f.dim), ell, f.norm.dual)
    P = to_halfspaces(K).intersect(ball)
    if P.is_empty:
        return None
    return P.vertices


def _cell_value(f: ConvexFunction, cell: Cell, x: np.ndarray, ell: float, caps: dict | None = None):
    """``f(y_C) + max ⟨y*, x − y_C⟩`` over ``y* ∈ ∂f(y_C) ∩ ℓB*`` (polyhedral base).

    For polyhedral dual balls the maximum is taken over the vertices of the
    intersection, which are enumerated once per cell and kept in ``caps``.
    """
    y = cell.representative
    if caps is not None and f.norm.dual is not Norm.EUCLIDEAN:
        if cell.key not in caps:
            caps[cell.key] = _polyhedral_cap(f, cell, ell)
        V = caps[cell.key]
        if V is None:
            return -np.inf, y, None
        vals = V @ (x - y)
        k = int(np.argmax(vals))
        return f.evaluate(y) + float(vals[k]), y, V[k]
    K = cell_subdifferential(f, cell, y)
    try:
        val, ystar = support_in_ball(K, x - y, ell, f.norm.dual)
    except EmptySet:
        return -np.inf, y, None
    return f.evaluate(y) + val, y, ystar


def _conjugate_route(f: ConvexFunction, x: np.ndarray, ell: float, cells=None) -> float:
    """``sup_{y* ∈ ℓB*} ⟨y*, x⟩ − f*(y*)`` with f* evaluated by exact cellwise QPs.

    Each admissible y* is a subgradient at the minimizer of f − ⟨y*, ·⟩, which is
    the pairing (y, y*) of the sup-affine formula.
    """
    cx = build_cell_complex(f)
    Q = f.Q
    n = f.dim
    dual = f.norm.dual

    def h(ys):
        y, m = minimize_over_cells(cx, Q, -ys)
        return float(ys @ x) + m, y

    if n == 1:
        res = minimize_scalar(lambda s: -h(np.array([s]))[0], bounds=(-ell, ell), method="bounded",
                              options={"xatol": 1e-13})
        cands = [res.x, -ell, ell]
        return max(h(np.array([float(c)]))[0] for c in cands)

    def fun(ys):
        return -h(ys)[0]

    def jac(ys):
        return -(x - h(ys)[1])

    if dual is Norm.EUCLIDEAN:
        cons = [{"type": "ineq", "fun": lambda ys: ell * ell - ys @ ys, "jac": lambda ys: -2 * ys}]
        bounds = None
    elif dual is Norm.LINF:
        cons, bounds = [], [(-ell, ell)] * n
    else:
        import itertools
        S = np.array(list(itertools.product([-1.0, 1.0], repeat=n)))
        cons = [{"type": "ineq", "fun": lambda ys: ell - S @ ys, "jac": lambda ys: -S}]
        bounds = None
    nx = np.linalg.norm(x)
    starts = [np.zeros(n)] + ([0.5 * ell * x / nx] if nx > 0 else [])
    best = -np.inf
    for s0 in starts:
        res = minimize(fun, s0, jac=jac, constraints=cons, bounds=bounds, method="SLSQP",
                       options={"ftol": 1e-15, "maxiter": 500})
        ys = res.x
        if dual(ys) > ell:
            ys = ys * (ell / dual(ys))
        best = max(best, h(ys)[0])
    return best


def supaffine_argmax(spec: ExtensionSpec, x):
    """Best ``(value, y, y*)`` over cells for a polyhedral base."""
    f = spec.base
    if f.Q is not None:
        raise ValueError("argmax pairs are reported for polyhedral bases only")
    x = as_vector(x, f.dim)
    best = (-np.inf, None, None)
    for cell in spec.cells:
        cand = _cell_value(f, cell, x, spec.modulus, spec.caps)
        if cand[0] > best[0] + 1e-15:
            best = cand
    return best


def supaffine_extension(spec: ExtensionSpec, x) -> float:
    """Supremum of the affine minorants built from subgradients with norm at most ℓ.

    For a polyhedral base the value ``⟨y*, x − y⟩ + f(y)`` does not depend on
    the choice of y in the relative interior of a cell once y* ∈ ∂f(y), so the
    supremum reduces to one support-function evaluation of ∂f ∩ ℓB* per cell.
    With a quadratic term the supremum is taken over y* through the conjugate.
    """
    f = spec.base
    x = as_vector(x, f.dim)
    if f.Q is not None:
        return _conjugate_route(f, x, spec.modulus)
    return float(supaffine_argmax(spec, x)[0])


def _boundary_quadratic(f: ConvexFunction, cells, x: np.ndarray, ell: float) -> float:
    dual = f.norm.dual
    best = -np.inf

    def value(cell, y):
        K = cell_subdifferential(f, cell, y)
        try:
            v, _ = support_in_ball(K, x - y, ell, dual)
        except EmptySet:
            return -np.inf
        return f.evaluate(y) + v

    for cell in cells:
        pts = list(cell.vertices) + [cell.representative]
        if cell.dimension > 0:
            lo, hi = cell.vertices.min(axis=0), cell.vertices.max(axis=0)
            rng = np.random.default_rng(0)
            pts.extend(project(lo + rng.random(f.dim) * (hi - lo), cell.region) for _ in range(40))
        vals = [value(cell, y) for y in pts]
        i = int(np.argmax(vals))
        best = max(best, vals[i])
        if cell.dimension > 0:
            res = minimize(lambda z: -value(cell, project(z, cell.region)), pts[i], method="Nelder-Mead",
                           options={"xatol": 1e-12, "fatol": 1e-14, "maxiter": 2000})
            best = max(best, -float(res.fun))
    return best


def supaffine_boundary_form(spec: ExtensionSpec, x) -> float:
    """f(x) on dom f; outside, the sup-affine formula with y restricted to bd(dom f)."""
    f = spec.base
    x = as_vector(x, f.dim)
    if f.domain.interior_point() is None:
        raise EmptyInterior("dom f has empty interior")
    if f.in_domain(x):
        return f.evaluate(x)
    cells = [c for c in spec.cells if c.active_domain_constraints]
    if f.Q is not None:
        return _boundary_quadratic(f, cells, x, spec.modulus)
    return max(_cell_value(f, c, x, spec.modulus, spec.caps)[0] for c in cells)


def evaluate_extension(spec: ExtensionSpec, x) -> float:
    if spec.kind is ExtensionKind.INFCONV:
        return infconv_extension(spec, x)
    if spec.kind is ExtensionKind.SUPAFFINE:
        return supaffine_extension(spec, x)
    return supaffine_boundary_form(spec, x)


# -- subdifferential identity --------------------------------------------------------------

def _sample_directions(n: int) -> np.ndarray:
    if n == 2:
        ang = 0.1234 + np.linspace(0.0, 2 * np.pi, 96, endpoint=False)
        return np.c_[np.cos(ang), np.sin(ang)]
    rng = np.random.default_rng(12345)
    U = rng.standard_normal((120 if n == 3 else 240, n))
    return U / np.linalg.norm(U, axis=1, keepdims=True)


def _interval(G: GeneralizedPolyhedron):
    lo, hi = float(np.min(G.points)), float(np.max(G.points))
    for r in G.rays[:, 0]:
        if r > 0:
            hi = np.inf
        elif r < 0:
            lo = -np.inf
    return lo, hi


def _cap_with_ball(G: GeneralizedPolyhedron, ell: float, dual: Norm) -> Optional[GeneralizedPolyhedron]:
    """``G ∩ ℓB*`` (exact for 1-D and polyhedral dual norms, support samples otherwise)."""
    n = G.dim
    if n == 1:
        lo, hi = _interval(G)
        lo, hi = max(lo, -ell), min(hi, ell)
        if lo > hi + 1e-12:
            return None
        return GeneralizedPolyhedron(np.array([[lo], [min(max(hi, lo), ell)]]))
    if dual is not Norm.EUCLIDEAN:
        B, _ = ball_polytope(np.zeros(n), ell, dual)
        try:
            V, _ = enumerate_generators(to_halfspaces(G).intersect(B))
        except Exception:
            return None
        return GeneralizedPolyhedron(V)
    pts = []
    for u in _sample_directions(n):
        try:
            pts.append(support_in_ball(G, u, ell, dual)[1])
        except EmptySet:
            return None
    return GeneralizedPolyhedron(np.array(pts))


def _face(G: GeneralizedPolyhedron, w: np.ndarray) -> GeneralizedPolyhedron:
    vals = G.points @ w
    top = float(np.max(vals))
    pts = G.points[vals >= top - 1e-12 * max(1.0, abs(top))]
    rays = G.rays[np.abs(G.rays @ w) <= 1e-12] if G.rays.shape[0] else G.rays
    return GeneralizedPolyhedron(pts, rays, dim=G.dim)


def _active_slopes(f: ConvexFunction, cell: Cell, x: np.ndarray, ell: float, fx: float):
    """Slopes y* of generating affine pieces from this cell that are active at x."""
    y = cell.representative
    K = cell_subdifferential(f, cell, y)
    dual = f.norm.dual
    w = x - y
    target = fx - f.evaluate(y)
    tol = TOL_EXT * max(1.0, abs(fx))
    try:
        top, ystar = support_in_ball(K, w, ell, dual)
    except EmptySet:
        return None
    if top < target - tol:
        return None
    if not np.any(np.abs(w) > 1e-13):
        return _cap_with_ball(K, ell, dual)
    if f.dim == 1 or dual is Norm.EUCLIDEAN:
        if dual(ystar) >= ell - 1e-9 and f.dim > 1:
            return GeneralizedPolyhedron(ystar.reshape(1, -1))
        if support(K, w) > top + 1e-9 * max(1.0, abs(top)):
            return GeneralizedPolyhedron(ystar.reshape(1, -1))
        return _cap_with_ball(_face(K, w), ell, dual)
    H = to_halfspaces(K)
    slab = Polyhedron(np.vstack([H.A, -w]), np.r_[H.b, -(top - 1e-10 * max(1.0, abs(top)))],
                      H.E, H.e, dim=f.dim)
    B, _ = ball_polytope(np.zeros(f.dim), ell, dual)
    V, _ = enumerate_generators(slab.intersect(B))
    return GeneralizedPolyhedron(V)


@dataclass
class SubdiffComparison:
    lhs: GeneralizedPolyhedron
    rhs: GeneralizedPolyhedron
    equal: bool
    gap: float


def extension_subdiff_check(spec: ExtensionSpec, x) -> SubdiffComparison:
    """Compare ∂F(x) with ∂f(x) ∩ ℓB* at a point of dom f.

    The left side is assembled from the generating affine pieces of F that are
    active at x (slopes gathered cell by cell); the right side is computed
    directly from the base subdifferential. Equality is judged by the largest
    distance from a generator of one side to the other side.
    """
    f = spec.base
    x = as_vector(x, f.dim)
    if f.Q is not None:
        raise ValueError("the piecewise description of the extension requires a polyhedral base")
    if not f.in_domain(x):
        raise OutsideDomain("the subdifferential identity is stated on dom f")
    fx = f.evaluate(x)
    ell = spec.modulus
    dual = f.norm.dual
    parts = [p for p in (_active_slopes(f, c, x, ell, fx) for c in spec.cells) if p is not None]
    lhs = GeneralizedPolyhedron(np.vstack([p.points for p in parts]), dim=f.dim).canonicalize()
    if f.dim > 1 and dual is Norm.EUCLIDEAN:
        # compare support samples in common directions
        lhs_pts = []
        for u in _sample_directions(f.dim):
            lhs_pts.append(lhs.points[int(np.argmax(lhs.points @ u))])
        lhs = GeneralizedPolyhedron(np.array(lhs_pts))
    rhs = _cap_with_ball(f.subdifferential(x), ell, dual)
    if rhs is None:
        raise NotCertified("∂f(x) misses the ball of radius ℓ")
    rhs = rhs.canonicalize()
    gap = max(max(distance_to_set(p, rhs) for p in lhs.points),
              max(distance_to_set(p, lhs) for p in rhs.points))
    return SubdiffComparison(lhs, rhs, bool(gap <= TOL_EXT), float(gap))


__all__ = [
    "TOL_EXT", "ExtensionKind", "ExtensionSpec", "infconv_extension", "supaffine_extension",
    "supaffine_argmax", "supaffine_boundary_form", "evaluate_extension", "extension_subdiff_check",
    "SubdiffComparison",
]
