"""Moreau envelopes and proximal points (Euclidean norm only).

    f_λ(x) = min_y f(y) + ‖x − y‖² / (2λ),   x_λ = argmin,   ∇f_λ(x) = (x − x_λ)/λ.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .certify import Certificate, Region, Verdict, Witness, check_selection
from .convexfn import ConvexFunction, build_cell_complex, minimize_over_cells
from .errors import ConvergenceError, InvalidLambda, NormMismatch, NotCertified
from .geometry import Norm, Polyhedron, as_vector, distance_to_set, min_norm_point

TOL_ENV = 1e-7
TOL_VALUE = 1e-5


@dataclass
class EnvelopeResult:
    lam: float
    x: np.ndarray
    prox: np.ndarray
    value: float
    gradient: np.ndarray

    def to_dict(self):
        return {"lambda": self.lam, "x": self.x.tolist(), "prox": self.prox.tolist(),
                "value": self.value, "gradient": self.gradient.tolist()}


def _check_inputs(f: ConvexFunction, lam: float):
    if f.norm is not Norm.EUCLIDEAN:
        raise NormMismatch("Moreau envelopes are defined here for the Euclidean norm only")
    if not (lam > 0 and np.isfinite(lam)):
        raise InvalidLambda(f"lambda must be positive, got {lam}")


def prox(f: ConvexFunction, lam: float, x) -> np.ndarray:
    """Unique minimizer of ``f(y) + ‖x − y‖²/(2λ)``.

    Solved exactly cell by cell (a strongly convex quadratic on each affine
    hull) and certified by ``(x − x_λ)/λ ∈ ∂f(x_λ)``.
    """
    _check_inputs(f, lam)
    x = as_vector(x, f.dim)
    cx = build_cell_complex(f)
    M = (f.Q if f.Q is not None else 0.0) + np.eye(f.dim) / lam
    y, _ = minimize_over_cells(cx, M, -x / lam, const=float(x @ x) / (2 * lam))
    if y is None:
        raise ConvergenceError("no cell produced a proximal candidate")
    resid = distance_to_set((x - y) / lam, f.subdifferential(y))
    if resid > TOL_ENV * max(1.0, float(np.linalg.norm(x - y)) / lam):
        raise ConvergenceError(f"prox optimality residual {resid:.3e} exceeds tolerance")
    return y


def envelope(f: ConvexFunction, lam: float, x) -> EnvelopeResult:
    x = as_vector(x, f.dim)
    y = prox(f, lam, x)
    value = f.evaluate(y) + float((x - y) @ (x - y)) / (2 * lam)
    return EnvelopeResult(float(lam), x, y, value, (x - y) / lam)


def envelope_value(f: ConvexFunction, lam: float, x) -> float:
    return envelope(f, lam, x).value


def envelope_gradient_check(f: ConvexFunction, lam: float, x, step: float = 1e-5,
                            tol: float = 1e-4) -> bool:
    """Gradient identity at x: membership in ∂f(x_λ) and agreement with central differences."""
    res = envelope(f, lam, x)
    if distance_to_set(res.gradient, f.subdifferential(res.prox)) > TOL_ENV:
        return False
    fd = np.empty(f.dim)
    for i in range(f.dim):
        e = np.zeros(f.dim)
        e[i] = step
        fd[i] = (envelope_value(f, lam, res.x + e) - envelope_value(f, lam, res.x - e)) / (2 * step)
    return bool(np.max(np.abs(fd - res.gradient)) <= tol)


def _require_certified(f: ConvexFunction, ell: float):
    cert = check_selection(f, Region.full_domain(), ell)
    if not cert.certified:
        raise NotCertified(f"f is not {ell}-Lipschitz on dom f (observed {cert.observed})")
    return cert


def _default_region(f: ConvexFunction) -> Polyhedron:
    """dom f when bounded, otherwise dom f cut by the box [-3, 3]^n."""
    if f.domain.is_bounded:
        return f.domain
    return f.domain.intersect(Polyhedron.box(-3.0 * np.ones(f.dim), 3.0 * np.ones(f.dim)))


def _region_samples(f: ConvexFunction, region: Polyhedron, per_axis=None) -> np.ndarray:
    lo, hi = region.bounding_box()
    n = f.dim
    per_axis = per_axis or {1: 201, 2: 31, 3: 11, 4: 7}[n]
    axes = [np.linspace(l, u, per_axis) if u > l else np.array([l]) for l, u in zip(lo, hi)]
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, n)
    keep = np.array([region.contains(p) and f.in_domain(p) for p in grid])
    verts = build_cell_complex(f, region).vertices()
    return np.vstack([grid[keep], verts])


def envelope_bounds_check(f: ConvexFunction, lam: float, ell: float, region: Polyhedron | None = None,
                          slack: float = 1e-8) -> Certificate:
    """Sandwich ``f − λℓ²/2 ≤ f_λ ≤ f`` and monotonicity ``f_{λ/2} ≥ f_λ`` on a region of dom f."""
    _check_inputs(f, lam)
    _require_certified(f, ell)
    region = _default_region(f) if region is None else region
    pts = _region_samples(f, region)
    failures = []
    worst_gap = 0.0
    for p in pts:
        fp = f.evaluate(p)
        if not np.isfinite(fp):
            continue
        v = envelope_value(f, lam, p)
        v_half = envelope_value(f, lam / 2, p)
        worst_gap = max(worst_gap, fp - v)
        if v > fp + slack:
            failures.append(Witness(p, None, f"f_λ={v:.17g} > f={fp:.17g}"))
        if v < fp - lam * ell * ell / 2 - slack:
            failures.append(Witness(p, None, f"f_λ={v:.17g} < f-λℓ²/2={fp - lam * ell * ell / 2:.17g}"))
        if v_half < v - slack:
            failures.append(Witness(p, None, f"f_(λ/2)={v_half:.17g} < f_λ={v:.17g}"))
    notes = {"lambda": lam, "samples": int(pts.shape[0]), "bound": lam * ell * ell / 2}
    if failures:
        return Certificate("envelope-bounds", ell, Verdict.REFUTED, failures, worst_gap, notes)
    return Certificate("envelope-bounds", ell, Verdict.CERTIFIED,
                       [Witness(pts[0], None, f"max f-f_λ={worst_gap:.17g}")], worst_gap, notes)


def _uniform_in(region: Polyhedron, f: ConvexFunction, count: int, rng) -> np.ndarray:
    lo, hi = region.bounding_box()
    out = []
    while len(out) < count:
        batch = lo + rng.random((4 * count, f.dim)) * (hi - lo)
        for p in batch:
            if region.contains(p) and f.in_domain(p):
                out.append(p)
                if len(out) == count:
                    break
    return np.array(out)


def envelope_lipschitz_check(f: ConvexFunction, lam: float, ell: float, region: Polyhedron | None = None,
                             n_pairs: int = 1000, seed: int = 0) -> Certificate:
    """Lipschitz inheritance: f_λ is ℓ-Lipschitz on dom f with the modulus of f.

    Checks, on seeded random pairs of the region, the pairwise bound, the
    inequality ``f_λ(x) ≤ f_λ(y) + ‖x*‖‖y − x‖`` with x* the least-norm
    subgradient of f at x, and ``‖(x − x_λ)/λ‖ ≤ ℓ``. The ratio seen on a
    box three times the region's bounding box is reported, not asserted.
    """
    _check_inputs(f, lam)
    _require_certified(f, ell)
    region = _default_region(f) if region is None else region
    rng = np.random.default_rng(seed)
    X = _uniform_in(region, f, n_pairs, rng)
    Y = _uniform_in(region, f, n_pairs, rng)
    failures = []
    worst = 0.0
    for x, y in zip(X, Y):
        ex, ey = envelope(f, lam, x), envelope(f, lam, y)
        dist = float(np.linalg.norm(x - y))
        if dist > 0:
            worst = max(worst, abs(ex.value - ey.value) / dist)
        if abs(ex.value - ey.value) > ell * dist + 1e-6:
            failures.append(Witness(x, ex.gradient, f"|Δf_λ|={abs(ex.value - ey.value):.17g} > ℓ‖x-y‖"))
        _, xs_norm = min_norm_point(f.subdifferential(x))
        if ex.value > ey.value + xs_norm * dist + 1e-6:
            failures.append(Witness(x, None, "f_λ(x) > f_λ(y) + ‖x*‖‖y-x‖"))
        for e in (ex, ey):
            if np.linalg.norm(e.gradient) > ell + 1e-6:
                failures.append(Witness(e.x, e.gradient, f"‖∇f_λ‖={np.linalg.norm(e.gradient):.17g} > ℓ"))
    lo, hi = region.bounding_box()
    mid, half = (lo + hi) / 2, np.maximum((hi - lo) / 2, 1e-3)
    P = lo.shape[0]
    A = mid - 3 * half + rng.random((200, P)) * 6 * half
    B = mid - 3 * half + rng.random((200, P)) * 6 * half
    box_ratio = 0.0
    for a, b in zip(A, B):
        d = float(np.linalg.norm(a - b))
        if d > 0:
            box_ratio = max(box_ratio, abs(envelope_value(f, lam, a) - envelope_value(f, lam, b)) / d)
    notes = {"lambda": lam, "pairs": n_pairs, "box3_observed_ratio": box_ratio}
    if failures:
        return Certificate("envelope-lipschitz", ell, Verdict.REFUTED, failures, worst, notes)
    return Certificate("envelope-lipschitz", ell, Verdict.CERTIFIED,
                       [Witness(X[0], None, f"max ratio {worst:.17g}")], worst, notes)


__all__ = [
    "EnvelopeResult", "prox", "envelope", "envelope_value", "envelope_gradient_check",
    "envelope_bounds_check", "envelope_lipschitz_check", "TOL_ENV",
]
