import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lipcert import fixtures as F
from lipcert.convexfn import (
    ConvexFunction,
    build_cell_complex,
    eps_normal_membership,
    normal_cone,
)
from lipcert.errors import DimensionTooLarge, EmptyPolyhedron, OutsideDomain, TooManyCells
from lipcert.geometry import GeneralizedPolyhedron, Polyhedron, min_norm_point, set_distance


def interval(G):
    """A 1-D generalized polyhedron as (lo, hi)."""
    lo, hi = float(G.points.min()), float(G.points.max())
    for r in G.rays[:, 0]:
        hi = np.inf if r > 0 else hi
        lo = -np.inf if r < 0 else lo
    return lo, hi


def same_set(G1, G2, tol=1e-8):
    # symmetric generator-wise distance, rays compared as cones
    d1 = max(set_distance(GeneralizedPolyhedron([p]), G2) for p in G1.points)
    d2 = max(set_distance(GeneralizedPolyhedron([p]), G1) for p in G2.points)
    rays_ok = all(set_distance(GeneralizedPolyhedron.cone([r]), GeneralizedPolyhedron.cone(G2.rays, dim=G2.dim)) <= tol
                  for r in G1.rays) if G1.rays.shape[0] else G2.rays.shape[0] == 0
    return d1 <= tol and d2 <= tol and rays_ok


class TestEvaluate:
    def test_indicator_plus_identity(self):
        assert F.unit_interval_plus_identity().evaluate([0.5]) == 0.5

    def test_outside_is_inf(self):
        assert F.unit_interval_indicator().evaluate([2.0]) == np.inf

    def test_abs(self):
        assert F.absolute_value().evaluate([-3.0]) == 3.0

    def test_quadratic(self):
        assert F.square().evaluate([3.0]) == pytest.approx(9.0)

    def test_many_matches_single(self, rng):
        f = F.planar_max_affine()
        X = rng.uniform(-1.5, 1.5, (300, 2))
        assert np.array_equal(f.evaluate_many(X), np.array([f.evaluate(x) for x in X]))

    def test_rejects_indefinite_quadratic(self):
        with pytest.raises(ValueError):
            ConvexFunction([[0.0, 0.0]], [0.0], Q=[[1.0, 0.0], [0.0, -1.0]])

    def test_rejects_empty_domain(self):
        with pytest.raises(EmptyPolyhedron):
            ConvexFunction([[1.0]], [0.0], Polyhedron([[1.0], [-1.0]], [0.0, -1.0]))

    def test_dimension_cap(self):
        with pytest.raises(DimensionTooLarge):
            ConvexFunction(np.zeros((1, 5)), [0.0])


class TestSubdifferential:
    def test_indicator_at_zero(self):
        assert interval(F.unit_interval_indicator().subdifferential([0.0])) == (-np.inf, 0.0)

    def test_abs_at_kink(self):
        assert interval(F.absolute_value().subdifferential([0.0])) == (-1.0, 1.0)

    def test_indicator_plus_identity_at_zero(self):
        # (-inf, 1]; checked against the grid subgradient oracle in test_oracle_derived
        assert interval(F.unit_interval_plus_identity().subdifferential([0.0])) == (-np.inf, 1.0)

    def test_interior_has_no_rays(self):
        G = F.unit_interval_plus_identity().subdifferential([0.5])
        assert G.rays.shape[0] == 0 and G.points.ravel().tolist() == [1.0]

    def test_quadratic_part(self):
        assert F.square().subdifferential([1.5]).points.ravel() == pytest.approx([3.0])

    def test_outside(self):
        with pytest.raises(OutsideDomain):
            F.unit_interval_indicator().subdifferential([2.0])


class TestNormalCone:
    def test_left_end(self):
        assert interval(normal_cone(Polyhedron.interval(0, 1), [0.0])) == (-np.inf, 0.0)

    def test_interior(self):
        N = normal_cone(Polyhedron.interval(0, 1), [0.5])
        assert N.rays.shape[0] == 0 and N.points.ravel().tolist() == [0.0]

    def test_box_corner(self):
        N = normal_cone(Polyhedron.box([0, 0], [1, 1]), [1.0, 1.0])
        assert {tuple(r) for r in N.rays} == {(1.0, 0.0), (0.0, 1.0)}

    def test_box_corner_definition(self):
        # every cone element satisfies <v, y - x> <= 0 on a grid of the box
        Y = np.stack(np.meshgrid(np.linspace(0, 1, 21), np.linspace(0, 1, 21)), -1).reshape(-1, 2)
        for v in ([1.0, 0.0], [0.0, 1.0], [0.3, 2.0]):
            assert np.all((Y - [1, 1]) @ v <= 1e-12)
        assert np.any((Y - [1, 1]) @ np.array([-0.1, 1.0]) > 0)

    def test_outside(self):
        with pytest.raises(OutsideDomain):
            normal_cone(Polyhedron.interval(0, 1), [-1.0])


class TestEpsNormals:
    def test_examples(self):
        I = Polyhedron.interval(0, 1)
        assert eps_normal_membership(I, [0.0], 1.0, [1.0])
        assert not eps_normal_membership(I, [0.5], 0.0, [0.1])
        assert not eps_normal_membership(I, [0.0], 0.5, [0.6])

    @settings(max_examples=60, deadline=None)
    @given(x=st.floats(0, 1), v=st.floats(-3, 3), eps=st.floats(0, 2))
    def test_matches_definition(self, x, v, eps):
        I = Polyhedron.interval(0, 1)
        Y = np.linspace(0, 1, 2001)
        d = v * (Y - x) - eps * np.abs(Y - x)
        member = eps_normal_membership(I, [x], eps, [v])
        if member:
            assert np.all(d <= 1e-8)
        else:
            assert np.max(d) > 0

    def test_box_corner_definition(self, rng):
        B = Polyhedron.box([0, 0], [1, 1])
        Y = rng.uniform(0, 1, (4000, 2))
        x = np.array([1.0, 0.0])
        for _ in range(50):
            v, eps = rng.uniform(-2, 2, 2), rng.uniform(0, 1)
            lhs = (Y - x) @ v - eps * np.linalg.norm(Y - x, axis=1)
            if eps_normal_membership(B, x, eps, v):
                assert np.all(lhs <= 1e-9)
            else:
                assert np.max(lhs) > -1e-3


class TestCellComplex:
    def test_abs_on_interval(self):
        cx = build_cell_complex(F.absolute_value(Polyhedron.interval(-1, 1)))
        dims = sorted(c.dimension for c in cx.cells)
        assert dims == [0, 0, 0, 1, 1]
        pts = sorted(float(c.representative[0]) for c in cx.cells if c.dimension == 0)
        assert pts == [-1.0, 0.0, 1.0]

    def test_indicator_plus_identity(self):
        cx = build_cell_complex(F.unit_interval_plus_identity())
        pts = sorted(float(c.representative[0]) for c in cx.cells if c.dimension == 0)
        assert pts == [0.0, 1.0] and sum(c.dimension == 1 for c in cx.cells) == 1

    def test_three_pieces(self):
        # breakpoints at -1/6 and 1/2 split [-1, 1] into three intervals; with
        # the two interior breakpoints and the two endpoints that is 7 cells
        cx = build_cell_complex(F.three_pieces())
        pts = sorted(float(c.representative[0]) for c in cx.cells if c.dimension == 0)
        assert pts == pytest.approx([-1.0, -1 / 6, 0.5, 1.0])
        assert sum(c.dimension == 1 for c in cx.cells) == 3
        assert len(cx) == 7

    def test_box_cells(self):
        cx = build_cell_complex(F.box_plus_first_coordinate())
        assert sorted(c.dimension for c in cx.cells) == [0] * 4 + [1] * 4 + [2]

    def test_region_cut(self):
        cx = build_cell_complex(F.absolute_value(), Polyhedron.interval(-1, 2))
        assert len(cx) == 5

    def test_cap(self):
        with pytest.raises(TooManyCells):
            build_cell_complex(F.planar_max_affine(), max_cells=3)

    def test_cells_cover_domain(self, rng):
        f = F.planar_max_affine()
        cx = build_cell_complex(f)
        full = [c for c in cx.cells if c.dimension == 2]
        X = rng.uniform([-1, -0.5], [1, 1], (500, 2))
        for x in X:
            assert any(c.region.contains(x) for c in full)

    def test_cell_constancy(self):
        for f, _ in F.lipschitz_fixtures():
            for c in build_cell_complex(f).cells:
                if c.dimension == 0:
                    continue
                V = c.vertices
                w = np.linspace(1, 2, V.shape[0])
                other = (w / w.sum()) @ V
                a = min_norm_point(f.subdifferential(c.representative))[1]
                b = min_norm_point(f.subdifferential(other))[1]
                assert a == pytest.approx(b, abs=1e-9)
                assert tuple(f.active_pieces(other)) == c.active_affine


FIXTURES = [f for f, _ in F.lipschitz_fixtures()] + [F.absolute_value(), F.square(), F.two_slopes()]


def domain_samples(f, rng, count):
    lo, hi = -2.0 * np.ones(f.dim), 2.0 * np.ones(f.dim)
    X = rng.uniform(lo, hi, (count * 20, f.dim))
    X = X[np.isfinite(f.evaluate_many(X))]
    return X[:count]


@pytest.mark.parametrize("f", FIXTURES, ids=lambda f: f.name)
def test_subgradient_inequality(f, rng):
    xs = domain_samples(f, rng, 20)
    xs = np.vstack([xs, build_cell_complex(f).vertices()])
    Y = domain_samples(f, rng, 500)
    fy = f.evaluate_many(Y)
    for x in xs:
        G = f.subdifferential(x)
        for g in G.points:
            assert np.all(fy - f.evaluate(x) >= (Y - x) @ g - 1e-8)
        for r in G.rays:
            assert np.all((Y - x) @ r <= 1e-8)


@pytest.mark.parametrize("f", FIXTURES, ids=lambda f: f.name)
def test_monotonicity(f, rng):
    xs = np.vstack([domain_samples(f, rng, 40), build_cell_complex(f).vertices()])
    sel = [(x, f.subdifferential(x).points[0]) for x in xs]
    for (x, gx), (y, gy) in zip(sel, sel[1:] + sel[:1]):
        assert (gx - gy) @ (x - y) >= -1e-8


@pytest.mark.parametrize("f", [F.box_plus_first_coordinate(), F.planar_max_affine(), F.three_pieces()],
                         ids=lambda f: f.name)
def test_sum_rule(f):
    full = ConvexFunction(f.slopes, f.intercepts, Polyhedron.full(f.dim))
    for c in build_cell_complex(f).cells:
        x = c.representative
        lhs = f.subdifferential(x)
        N = normal_cone(f.domain, x)
        rhs = GeneralizedPolyhedron(full.subdifferential(x).points, N.rays, dim=f.dim)
        assert same_set(lhs, rhs)
