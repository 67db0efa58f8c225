"""Lipschitz criteria as certificate-producing checks.

Every "for all x" quantifier is discharged on the cell complex. Without a
quadratic term the subdifferential is constant on each relatively open cell,
so the representative point decides the cell. With a quadratic term the
per-cell quantities used here are distances from a set that moves affinely
with x, hence convex in x, and their supremum over the cell is attained at
a vertex of its closure (evaluated with the cell's own active sets).
"""
from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .convexfn import Cell, ConvexFunction, build_cell_complex, minimize_over_cells
from .errors import (
    ClosureNotInDomain,
    ConvergenceError,
    DegenerateSegment,
    DomainNotFullSpace,
    OutsideDomain,
    UnboundedRegionWithQuadratic,
    UnboundedSet,
)
from .geometry import (
    TOL_OPT,
    GeneralizedPolyhedron,
    Norm,
    Polyhedron,
    as_vector,
    ball_polytope,
    diameter,
    min_norm_point,
    nearest_points,
    project,
)


class Verdict(str, enum.Enum):
    CERTIFIED = "certified"
    REFUTED = "refuted"
    INCONCLUSIVE = "inconclusive"


@dataclass
class Witness:
    point: np.ndarray
    subgradient: Optional[np.ndarray] = None
    detail: str = ""

    def to_dict(self):
        return {
            "point": [float(v) for v in self.point],
            "subgradient": None if self.subgradient is None else [float(v) for v in self.subgradient],
            "detail": self.detail,
        }


@dataclass
class Certificate:
    criterion: str
    modulus: float
    verdict: Verdict
    witnesses: list = field(default_factory=list)
    observed: Optional[float] = None
    notes: dict = field(default_factory=dict)

    @property
    def certified(self) -> bool:
        return self.verdict is Verdict.CERTIFIED

    @property
    def refuted(self) -> bool:
        return self.verdict is Verdict.REFUTED

    def to_dict(self):
        return {
            "criterion": self.criterion,
            "modulus": float(self.modulus),
            "verdict": self.verdict.value,
            "observed": None if self.observed is None else float(self.observed),
            "witnesses": [w.to_dict() for w in self.witnesses],
            "notes": self.notes,
        }


class RegionKind(str, enum.Enum):
    FULL_DOMAIN = "full_domain"
    DOMAIN_CAP_BALL = "domain_cap_ball"
    OPEN_SET = "open_set"


@dataclass(frozen=True, eq=False)
class Region:
    """Where a criterion is checked: dom f, dom f ∩ B(center; radius) or an open set S.

    Balls and open sets are open: cells lying on their boundary are excluded.
    """

    kind: RegionKind
    center: Optional[np.ndarray] = None
    radius: Optional[float] = None
    set: Optional[Polyhedron] = None

    @classmethod
    def full_domain(cls) -> "Region":
        return cls(RegionKind.FULL_DOMAIN)

    @classmethod
    def ball(cls, center, radius: float) -> "Region":
        if not radius > 0:
            raise ValueError("ball radius must be positive")
        return cls(RegionKind.DOMAIN_CAP_BALL, as_vector(center), float(radius))

    @classmethod
    def open_set(cls, S: Polyhedron) -> "Region":
        return cls(RegionKind.OPEN_SET, set=S)

    def describe(self) -> dict:
        out = {"kind": self.kind.value}
        if self.center is not None:
            out["center"] = [float(v) for v in self.center]
            out["radius"] = self.radius
        return out


def region_cells(f: ConvexFunction, region: Region) -> list:
    """Cells of dom f lying in the (open) region."""
    if region.kind is RegionKind.FULL_DOMAIN:
        return list(build_cell_complex(f).cells)
    if region.kind is RegionKind.OPEN_SET:
        cx = build_cell_complex(f, region.set)
        return [c for c in cx.cells if not c.active_region_constraints]
    P, exact = ball_polytope(region.center, region.radius, f.norm)
    cx = build_cell_complex(f, P)
    cells = [c for c in cx.cells if not c.active_region_constraints]
    if not exact:
        cells = [c for c in cells
                 if np.linalg.norm(project(region.center, c.region) - region.center) < region.radius]
    return cells


def cell_subdifferential(f: ConvexFunction, cell: Cell, x) -> GeneralizedPolyhedron:
    """∂f at a point of the cell closure, using the cell's own active sets."""
    pts = f.slopes[list(cell.active_affine)] + f.smooth_gradient(x)
    rays = [f.domain.A[j] for j in cell.active_domain_constraints]
    for row in f.domain.E:
        rays.extend([row, -row])
    return GeneralizedPolyhedron(pts, np.array(rays).reshape(-1, f.dim), dim=f.dim)


def cell_normal_cone(f: ConvexFunction, cell: Cell) -> GeneralizedPolyhedron:
    rays = [f.domain.A[j] for j in cell.active_domain_constraints]
    for row in f.domain.E:
        rays.extend([row, -row])
    return GeneralizedPolyhedron.cone(np.array(rays).reshape(-1, f.dim), dim=f.dim)


def _cell_points(f: ConvexFunction, cell: Cell):
    """Points at which a cell quantity must be evaluated (see module docstring)."""
    if f.Q is None:
        return [cell.representative]
    if not cell.bounded:
        raise UnboundedRegionWithQuadratic(
            "a quadratic term on an unbounded cell makes the check non-finite")
    return list(cell.vertices)


def _measure(f, cells, measure: Callable):
    """Apply ``measure(cell, x) -> (value, subgradient)``; keep the worst point per cell."""
    out = []
    for cell in cells:
        worst = None
        for x in _cell_points(f, cell):
            val, g = measure(cell, x)
            if worst is None or val > worst[0]:
                worst = (val, x, g)
        out.append((cell,) + worst)
    return out


def _verdict_from(criterion, ell, results, label) -> Certificate:
    violating = [r for r in results if r[1] > ell + TOL_OPT]
    observed = max((r[1] for r in results), default=0.0)
    if violating:
        wits = [Witness(np.array(x), None if g is None else np.array(g), f"{label}={val:.17g} > {ell:.17g}")
                for _, val, x, g in violating]
        return Certificate(criterion, ell, Verdict.REFUTED, wits, observed)
    wits = [Witness(np.array(x), None if g is None else np.array(g), f"{label}={val:.17g}")
            for _, val, x, g in results]
    return Certificate(criterion, ell, Verdict.CERTIFIED, wits, observed)


def _check_ell(ell):
    if not ell >= 0 or not np.isfinite(ell):
        raise ValueError("modulus must be a finite nonnegative number")
    return float(ell)


def check_selection(f: ConvexFunction, region: Region, ell: float) -> Certificate:
    """Certify ``∂f(x) ∩ ℓB* ≠ ∅`` for every x of dom f in the region."""
    ell = _check_ell(ell)
    dual = f.norm.dual

    def measure(cell, x):
        z, val = min_norm_point(cell_subdifferential(f, cell, x), dual)
        return val, z

    results = _measure(f, region_cells(f, region), measure)
    cert = _verdict_from("selection", ell, results, "d(0,∂f)")
    cert.notes["region"] = region.describe()
    return cert


def check_normal_inclusion(f: ConvexFunction, region: Region, ell: float) -> Certificate:
    """Certify ``∂f(x) ⊂ N(x; dom f) + ℓB*`` on the region."""
    ell = _check_ell(ell)
    dual = f.norm.dual

    def measure(cell, x):
        sub = cell_subdifferential(f, cell, x)
        N = cell_normal_cone(f, cell)
        worst, worst_g = -np.inf, None
        for v in sub.points:
            d = min_norm_point(N.translate(-v), dual)[1]
            if d > worst:
                worst, worst_g = d, v
        for r in sub.rays:
            if min_norm_point(N.translate(-r), Norm.EUCLIDEAN)[1] > 1e-9:
                return np.inf, r
        return worst, worst_g

    results = _measure(f, region_cells(f, region), measure)
    cert = _verdict_from("normal-inclusion", ell, results, "max d(v,N)")
    cert.notes["region"] = region.describe()
    return cert


def check_normal_intersection(f: ConvexFunction, region: Region, ell: float) -> Certificate:
    """Certify ``∂f(x) ∩ (N(x; dom f) + ℓB*) ≠ ∅`` on the region."""
    ell = _check_ell(ell)
    dual = f.norm.dual

    def measure(cell, x):
        g1, _, d = nearest_points(cell_subdifferential(f, cell, x), cell_normal_cone(f, cell), dual)
        return d, g1

    results = _measure(f, region_cells(f, region), measure)
    cert = _verdict_from("normal-intersection", ell, results, "d(∂f,N)")
    cert.notes["region"] = region.describe()
    return cert


def _ball_samples(f: ConvexFunction, center, radius, per_axis=None):
    n = f.dim
    per_axis = per_axis or {1: 2001, 2: 201, 3: 41, 4: 15}[n]
    axes = [np.linspace(c - radius, c + radius, per_axis) for c in center]
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, n)
    keep = f.norm(grid - center) <= radius * (1 + 1e-12)
    return grid[keep]


def check_calmness(f: ConvexFunction, center, ell: float, radius: float) -> Certificate:
    """Check ``f(x) ≥ f(x̄) − ℓ‖x − x̄‖`` on dom f ∩ closed ball B[x̄; r].

    The inequality is tested on a grid of the ball plus every vertex of the
    cell complex of dom f cut by the ball, so the verdict is a sampled one.
    """
    ell = _check_ell(ell)
    xbar = as_vector(center, f.dim)
    if not f.in_domain(xbar):
        raise OutsideDomain("calmness centre must lie in dom f")
    if not radius > 0:
        raise ValueError("radius must be positive")
    fbar = f.evaluate(xbar)
    P, _ = ball_polytope(xbar, radius, f.norm)
    verts = build_cell_complex(f, P).vertices()
    verts = verts[f.norm(verts - xbar) <= radius * (1 + 1e-12)] if verts.shape[0] else verts
    pts = np.vstack([_ball_samples(f, xbar, radius), verts])
    vals = f.evaluate_many(pts)
    finite = np.isfinite(vals)
    pts, vals = pts[finite], vals[finite]
    slack = vals - (fbar - ell * f.norm(pts - xbar))
    i = int(np.argmin(slack))
    observed = float(np.max(np.where(
        f.norm(pts - xbar) > 0, (fbar - vals) / np.maximum(f.norm(pts - xbar), 1e-300), 0.0)))
    if slack[i] < -1e-9 * max(1.0, abs(fbar)):
        w = Witness(pts[i], None, f"f(x)={vals[i]:.17g} < f(x̄)-ℓ‖x-x̄‖={vals[i] - slack[i]:.17g}")
        return Certificate("calmness", ell, Verdict.REFUTED, [w], max(observed, 0.0))
    w = Witness(pts[i], None, f"minimum slack {slack[i]:.3e} over {pts.shape[0]} samples")
    return Certificate("calmness", ell, Verdict.CERTIFIED, [w], max(observed, 0.0))


def _check_open_set(f: ConvexFunction, S: Polyhedron):
    if S.is_empty:
        raise UnboundedSet("set S is empty")
    if not S.is_bounded:
        raise UnboundedSet("S must be bounded: boundary data does not control f on unbounded sets")
    for v in S.vertices:
        if not f.in_domain(v):
            raise ClosureNotInDomain(f"vertex {v.tolist()} of closure(S) lies outside dom f")


def certify_on_bounded_open(f: ConvexFunction, S: Polyhedron, ell: float) -> Certificate:
    """ℓ-Lipschitz continuity on a bounded open convex S from boundary subgradients.

    Certified iff ``∂f(x) ∩ ℓB* ≠ ∅`` at every x in the boundary of S.
    """
    ell = _check_ell(ell)
    _check_open_set(f, S)
    dual = f.norm.dual
    cx = build_cell_complex(f, S)
    boundary = [c for c in cx.cells if c.active_region_constraints]

    def measure(cell, x):
        z, val = min_norm_point(cell_subdifferential(f, cell, x), dual)
        return val, z

    cert = _verdict_from("boundary", ell, _measure(f, boundary, measure), "d(0,∂f)")
    cert.notes["boundary_cells"] = len(boundary)
    return cert


def _boundary_centers(f: ConvexFunction, S: Polyhedron, radius: float) -> np.ndarray:
    """Points of bd(S) such that every boundary point is within radius/2 of one."""
    cx = build_cell_complex(f, S)
    n = f.dim
    h = radius / np.sqrt(n)
    pts = []
    for cell in cx.cells:
        if not cell.active_region_constraints:
            continue
        pts.extend(cell.vertices)
        pts.append(cell.representative)
        if cell.dimension == 0:
            continue
        lo, hi = cell.vertices.min(axis=0), cell.vertices.max(axis=0)
        axes = [np.linspace(l, u, max(2, int(np.ceil((u - l) / h)) + 1)) for l, u in zip(lo, hi)]
        for q in itertools.product(*axes):
            pts.append(project(np.array(q), cell.region))
    pts = np.array(pts)
    return np.unique(np.round(pts, 12), axis=0)


def check_local_boundary_lipschitz(f: ConvexFunction, S: Polyhedron, ell: float,
                                   radius: float) -> Certificate:
    """Local ℓ-Lipschitz continuity of f on S ∩ B(x; r) at boundary points x of S.

    The boundary is covered by centres at most r/2 apart; at each centre the
    selection criterion is checked on the open set S ∩ B(x; r).
    """
    ell = _check_ell(ell)
    if not radius > 0:
        raise ValueError("radius must be positive")
    _check_open_set(f, S)
    centers = _boundary_centers(f, S, radius)
    failures, worst = [], 0.0
    for c in centers:
        B, exact = ball_polytope(c, radius, f.norm)
        sub = S.intersect(B)
        cells = [cell for cell in build_cell_complex(f, sub).cells if not cell.active_region_constraints]
        if not exact:
            cells = [cell for cell in cells
                     if np.linalg.norm(project(c, cell.region) - c) < radius]
        dual = f.norm.dual

        def measure(cell, x):
            z, val = min_norm_point(cell_subdifferential(f, cell, x), dual)
            return val, z

        cert = _verdict_from("selection", ell, _measure(f, cells, measure), "d(0,∂f)")
        worst = max(worst, cert.observed or 0.0)
        if cert.refuted:
            for w in cert.witnesses:
                w.detail = f"centre {np.round(c, 12).tolist()}: {w.detail}"
            failures.extend(cert.witnesses)
    notes = {"centers": int(centers.shape[0]), "radius": float(radius)}
    if failures:
        return Certificate("local-boundary", ell, Verdict.REFUTED, failures, worst, notes)
    wits = [Witness(c, None, "locally certified") for c in centers]
    return Certificate("local-boundary", ell, Verdict.CERTIFIED, wits, worst, notes)


@dataclass
class SupInfResult:
    sup: float
    inf: float
    diameter: float
    bound_holds: bool
    certificate: Certificate

    def to_dict(self):
        return {"sup": self.sup, "inf": self.inf, "diameter": self.diameter,
                "bound_holds": self.bound_holds, "certificate": self.certificate.to_dict()}


def sup_inf_bound(f: ConvexFunction, S: Polyhedron, ell: float) -> SupInfResult:
    """Exact sup and inf of f over closure(S) and the bound ``sup ≤ inf + ℓ·diam(S)``."""
    cert = certify_on_bounded_open(f, S, ell)
    V = S.vertices
    sup = float(np.max(f.evaluate_many(V)))
    cx = build_cell_complex(f, S)
    M = f.Q if f.Q is not None else np.zeros((f.dim, f.dim))
    _, inf = minimize_over_cells(cx, M, np.zeros(f.dim), objective=f.evaluate)
    diam = diameter(V, f.norm)
    holds = sup <= inf + ell * diam + 1e-9 * max(1.0, abs(sup))
    return SupInfResult(sup, float(inf), diam, bool(holds), cert)


def asymptotic_criterion(f: ConvexFunction, ell: float, radii: Sequence[float]) -> Certificate:
    """Global ℓ-Lipschitz continuity on R^n from ``limsup d(0, ∂f(x)) ≤ ℓ``.

    Without a quadratic term every cell meeting a sphere beyond the largest
    vertex norm is unbounded, and conversely, so the per-radius estimates
    there equal the exact value max over unbounded cells, which decides the
    verdict. A nonzero quadratic term grows without bound along an eigenvector
    of a positive eigenvalue, and the criterion is refuted with an explicit
    point where d(0, ∂f) exceeds ℓ.
    """
    ell = _check_ell(ell)
    if f.domain.n_ineq or f.domain.E.shape[0]:
        raise DomainNotFullSpace("asymptotic criterion requires dom f = R^n")
    radii = [float(r) for r in radii]
    if any(r <= 0 for r in radii) or any(b <= a for a, b in zip(radii, radii[1:])):
        raise ValueError("radii must be positive and strictly increasing")
    dual = f.norm.dual
    if f.Q is not None:
        w, U = np.linalg.eigh(f.Q)
        v = U[:, int(np.argmax(w))]
        v = v / f.norm(v)
        estimates = [max(min_norm_point(f.subdifferential(s * R * v), dual)[1] for s in (1.0, -1.0))
                     for R in radii]
        t = 1.0
        for _ in range(200):
            z, d = min_norm_point(f.subdifferential(t * v), dual)
            if d > ell + TOL_OPT:
                wit = Witness(t * v, z, f"d(0,∂f)={d:.17g} > {ell:.17g} at radius {t:.17g}")
                return Certificate("asymptotic", ell, Verdict.REFUTED, [wit], d,
                                   {"estimates": dict(zip(map(str, radii), estimates))})
            t *= 2.0
        raise ConvergenceError("no refuting point found along the top eigenvector")
    cx = build_cell_complex(f)
    vnorms = [float(np.max(f.norm(c.vertices))) for c in cx.cells]
    r0 = max(vnorms, default=0.0)
    values = {}
    for c in cx.cells:
        z, d = min_norm_point(cell_subdifferential(f, c, c.representative), dual)
        values[id(c)] = (d, z)
    estimates = {}
    for R in radii:
        meets = []
        for c in cx.cells:
            if c.bounded:
                lo = float(np.linalg.norm(project(np.zeros(f.dim), c.region))) if f.norm is Norm.EUCLIDEAN \
                    else float(np.min(f.norm(c.vertices)))
                if lo <= R <= float(np.max(f.norm(c.vertices))):
                    meets.append(values[id(c)][0])
            else:
                meets.append(values[id(c)][0])
        estimates[str(R)] = max(meets, default=0.0)
    unbounded = [c for c in cx.cells if not c.bounded]
    notes = {"estimates": estimates, "breakpoint_radius": r0}
    bad = [c for c in unbounded if values[id(c)][0] > ell + TOL_OPT]
    observed = max((values[id(c)][0] for c in unbounded), default=0.0)
    if bad:
        wits = []
        for c in bad:
            d, z = values[id(c)]
            wits.append(Witness(c.representative, z, f"unbounded cell with d(0,∂f)={d:.17g}"))
        return Certificate("asymptotic", ell, Verdict.REFUTED, wits, observed, notes)
    wits = [Witness(c.representative, values[id(c)][1], f"unbounded cell d(0,∂f)={values[id(c)][0]:.17g}")
            for c in unbounded]
    return Certificate("asymptotic", ell, Verdict.CERTIFIED, wits, observed, notes)


def mean_value_witness(f: ConvexFunction, a, b):
    """A point c in [a, b) and g in ∂f(c) with ``f(b) − f(a) ≤ ⟨g, b − a⟩``.

    The segment is split at the parameters where two pieces tie or a domain
    constraint becomes tight. Candidates are the three-quarter points of the
    pieces of the segment followed by the split points; the first candidate
    maximizing ``max_{g∈∂f(c)} ⟨g, b − a⟩`` is returned.
    """
    a, b = as_vector(a, f.dim), as_vector(b, f.dim)
    for p in (a, b):
        if not f.in_domain(p):
            raise OutsideDomain(f"segment endpoint {p.tolist()} lies outside dom f")
    d = b - a
    if not np.any(d):
        raise DegenerateSegment("segment endpoints coincide")
    ts = {0.0}
    sa, sd = f.slopes @ a + f.intercepts, f.slopes @ d
    for i, j in itertools.combinations(range(f.n_pieces), 2):
        den = sd[i] - sd[j]
        if abs(den) > 1e-14:
            t = (sa[j] - sa[i]) / den
            if 0.0 < t < 1.0:
                ts.add(float(t))
    P = f.domain
    for row, off in zip(P.A, P.b):
        den = row @ d
        if abs(den) > 1e-14:
            t = (off - row @ a) / den
            if 0.0 < t < 1.0:
                ts.add(float(t))
    knots = sorted(ts) + [1.0]
    candidates = [lo + 0.75 * (hi - lo) for lo, hi in zip(knots[:-1], knots[1:])] + knots[:-1]
    target = f.evaluate(b) - f.evaluate(a)
    best = None
    for t in candidates:
        c = a + t * d
        sub = f.subdifferential(c)
        if sub.rays.shape[0] and np.max(sub.rays @ d) > 1e-12:
            continue
        vals = sub.points @ d
        k = int(np.argmax(vals))
        if best is None or vals[k] > best[0] + 1e-15:
            best = (float(vals[k]), c, sub.points[k])
    if best is None or target > best[0] + 1e-8:
        raise ConvergenceError("no mean-value witness found on the segment")
    return best[1], best[2]


__all__ = [
    "Verdict", "Witness", "Certificate", "RegionKind", "Region", "region_cells",
    "check_selection", "check_calmness", "check_normal_inclusion", "check_normal_intersection",
    "certify_on_bounded_open", "check_local_boundary_lipschitz", "SupInfResult", "sup_inf_bound",
    "asymptotic_criterion", "mean_value_witness",
]
