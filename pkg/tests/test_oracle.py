import numpy as np
import pytest

from lipcert import fixtures as F
from lipcert.errors import NoFinitePoints, OutsideDomain
from lipcert.geometry import Polyhedron
from lipcert.oracle import (
    GridSpec,
    domain_box,
    fd_subgradient_check,
    grid_inf,
    grid_lipschitz_estimate,
    infconv_objective,
    prox_objective,
)


class TestGridSpec:
    def test_defaults(self):
        assert GridSpec((0,), (1,)).resolution == 1001
        assert GridSpec((0, 0), (1, 1)).resolution == 201
        assert GridSpec((0, 0, 0), (1, 1, 1)).resolution == 51

    def test_rejects_bad_box(self):
        with pytest.raises(ValueError):
            GridSpec((1,), (0,))

    def test_rejects_huge_grid(self):
        with pytest.raises(ValueError):
            GridSpec((0, 0, 0), (1, 1, 1), 1000)

    def test_points(self):
        P = GridSpec((0, 0), (1, 2), 3).points()
        assert P.shape == (9, 2) and P.min(axis=0).tolist() == [0, 0] and P.max(axis=0).tolist() == [1, 2]

    def test_domain_box(self):
        g = domain_box(F.planar_max_affine())
        assert g.lower == (-1.0, -0.5) and g.upper == (1.0, 1.0)
        h = domain_box(F.absolute_value(Polyhedron([[-1.0]], [0.0])))
        assert h.lower == (0.0,) and h.upper == (2.0,)


class TestLipschitzEstimate:
    def test_abs(self):
        est = grid_lipschitz_estimate(F.absolute_value(Polyhedron.interval(-1, 1)))
        assert est == pytest.approx(1.0, abs=1e-9)

    def test_square(self):
        est = grid_lipschitz_estimate(F.square().with_domain(Polyhedron.interval(-1, 1)))
        assert 2.0 - 3e-3 <= est <= 2.0

    def test_interval(self):
        assert grid_lipschitz_estimate(F.unit_interval_plus_identity()) == pytest.approx(1.0)

    def test_no_finite_points(self):
        f = F.unit_interval_indicator()
        with pytest.raises(NoFinitePoints):
            grid_lipschitz_estimate(f, GridSpec((5.0,), (6.0,), 11))

    @pytest.mark.parametrize("f,ell", F.lipschitz_fixtures(), ids=lambda v: getattr(v, "name", ""))
    def test_lower_bound(self, f, ell):
        assert grid_lipschitz_estimate(f) <= ell + 1e-9


class TestSubgradientCheck:
    def test_examples(self):
        f = F.absolute_value()
        assert fd_subgradient_check(f, [0.0], [0.3])
        assert not fd_subgradient_check(f, [0.0], [1.5])
        assert fd_subgradient_check(F.unit_interval_indicator(), [0.0], [-7.0])

    def test_outside(self):
        with pytest.raises(OutsideDomain):
            fd_subgradient_check(F.unit_interval_indicator(), [3.0], [0.0])


class TestGridInf:
    def test_prox_objective(self):
        y, v = grid_inf(prox_objective(F.absolute_value(), 0.5, [2.0]), GridSpec((-3,), (3,)), vectorized=True)
        assert y[0] == pytest.approx(1.5, abs=1e-6) and v == pytest.approx(1.75, abs=1e-9)

    def test_parabola(self):
        y, v = grid_inf(lambda p: (p[0] - 0.3) ** 2, GridSpec((-1,), (1,), 101))
        assert y[0] == pytest.approx(0.3, abs=1e-6)

    def test_infconv_objective(self):
        f = F.unit_interval_plus_identity()
        u, v = grid_inf(infconv_objective(f, 1.0, [-1.0]), GridSpec((0,), (1,)), vectorized=True)
        assert u[0] == pytest.approx(0.0, abs=1e-9) and v == pytest.approx(1.0)

    def test_planar_refinement(self):
        c = np.array([0.123456, -0.654321])
        y, v = grid_inf(lambda P: np.sum((np.atleast_2d(P) - c) ** 2, axis=1), GridSpec((-1, -1), (1, 1), 21),
                        vectorized=True)
        assert np.allclose(y, c, atol=1e-6)

    def test_all_infinite(self):
        with pytest.raises(NoFinitePoints):
            grid_inf(lambda p: np.inf, GridSpec((0,), (1,), 5))


SELF_CONSISTENCY = [f for f, _ in F.lipschitz_fixtures()] + [F.square().with_domain(Polyhedron.interval(-1, 1))]


@pytest.mark.parametrize("f", SELF_CONSISTENCY, ids=lambda f: f.name)
def test_resolution_doubling(f):
    # the estimate is a lower bound whose error is at most (curvature) x
    # (grid spacing); doubling the resolution moves it by less than 4x that
    base = domain_box(f)
    coarse = GridSpec(base.lower, base.upper, base.resolution)
    fine = GridSpec(base.lower, base.upper, 2 * base.resolution - 1)
    curvature = 2.0 if f.Q is not None else 0.0
    bound = max(curvature * float(np.max(coarse.spacing)), 1e-9)
    assert abs(grid_lipschitz_estimate(f, fine) - grid_lipschitz_estimate(f, coarse)) <= 4 * bound
    for x in (-1.7, 0.4, 2.3):
        xq = np.full(f.dim, x)
        vc = grid_inf(prox_objective(f, 0.5, xq), coarse, vectorized=True)[1]
        vf = grid_inf(prox_objective(f, 0.5, xq), fine, vectorized=True)[1]
        assert abs(vc - vf) <= 4 * 1e-8 + 4 * bound * float(np.max(coarse.spacing))
