import numpy as np
import pytest

from lipcert import fixtures as F
from lipcert.certify import (
    Region,
    Verdict,
    asymptotic_criterion,
    certify_on_bounded_open,
    check_calmness,
    check_local_boundary_lipschitz,
    check_normal_inclusion,
    check_normal_intersection,
    check_selection,
    mean_value_witness,
    sup_inf_bound,
)
from lipcert.convexfn import ConvexFunction
from lipcert.errors import (
    ClosureNotInDomain,
    DegenerateSegment,
    DomainNotFullSpace,
    OutsideDomain,
    UnboundedRegionWithQuadratic,
    UnboundedSet,
)
from lipcert.geometry import Polyhedron, min_norm_point
from lipcert.oracle import GridSpec, grid_lipschitz_estimate

FULL = Region.full_domain()
OPEN_PM1 = Polyhedron.interval(-1, 1)
LOCAL = (check_selection, check_normal_inclusion, check_normal_intersection)


class TestSelection:
    def test_indicator_plus_identity(self):
        assert check_selection(F.unit_interval_plus_identity(), FULL, 1.0).certified

    def test_indicator_is_zero_lipschitz(self):
        assert check_selection(F.unit_interval_indicator(), FULL, 0.0).certified

    def test_identity_on_ball(self):
        cert = check_selection(F.identity(), Region.ball([0.0], 1.0), 0.5)
        assert cert.refuted and cert.witnesses

    def test_witness_per_cell(self):
        cert = check_selection(F.unit_interval_plus_identity(), FULL, 1.0)
        assert len(cert.witnesses) == 3
        assert all(w.subgradient is not None for w in cert.witnesses)

    def test_quadratic_on_unbounded(self):
        with pytest.raises(UnboundedRegionWithQuadratic):
            check_selection(F.square(), FULL, 5.0)

    def test_quadratic_on_ball(self):
        assert check_selection(F.square(), Region.ball([0.0], 1.0), 2.0).certified
        assert check_selection(F.square(), Region.ball([0.0], 1.0), 1.9).refuted

    def test_negative_modulus(self):
        with pytest.raises(ValueError):
            check_selection(F.identity(), FULL, -1.0)


class TestCalmness:
    def test_certified(self):
        assert check_calmness(F.unit_interval_plus_identity(), [0.0], 1.0, 0.5).certified

    def test_equality_case(self):
        for r in (0.1, 1.0, 10.0):
            assert check_calmness(F.identity(), [0.0], 1.0, r).certified

    def test_refuted(self):
        cert = check_calmness(F.decreasing_on_interval(), [0.0], 1.0, 0.5)
        assert cert.refuted
        x = cert.witnesses[0].point
        assert 0 < x[0] <= 0.5 and -2 * x[0] < -x[0]

    def test_outside(self):
        with pytest.raises(OutsideDomain):
            check_calmness(F.unit_interval_indicator(), [2.0], 1.0, 0.5)


class TestNormalInclusion:
    def test_certified(self):
        assert check_normal_inclusion(F.unit_interval_plus_identity(), FULL, 1.0).certified

    def test_refuted_in_interior(self):
        cert = check_normal_inclusion(F.unit_interval_plus_identity(), FULL, 0.5)
        assert cert.refuted
        assert any(0 < w.point[0] < 1 for w in cert.witnesses)

    def test_indicator(self):
        assert check_normal_inclusion(F.unit_interval_indicator(), FULL, 0.0).certified


class TestNormalIntersection:
    def test_certified(self):
        assert check_normal_intersection(F.unit_interval_plus_identity(), FULL, 1.0).certified

    def test_indicator(self):
        assert check_normal_intersection(F.unit_interval_indicator(), FULL, 0.0).certified

    def test_steep(self):
        cert = check_normal_intersection(F.steep_on_interval(), FULL, 1.0)
        assert cert.refuted and cert.observed == pytest.approx(2.0)


class TestBoundedOpen:
    def test_square(self):
        assert certify_on_bounded_open(F.square(), OPEN_PM1, 2.0).certified
        assert certify_on_bounded_open(F.square(), OPEN_PM1, 1.9).refuted

    def test_unbounded_rejected(self):
        with pytest.raises(UnboundedSet):
            certify_on_bounded_open(F.square(), Polyhedron([[-1.0]], [0.0]), 0.0)

    def test_abs(self):
        assert certify_on_bounded_open(F.absolute_value(), OPEN_PM1, 1.0).certified

    def test_closure_outside_domain(self):
        with pytest.raises(ClosureNotInDomain):
            certify_on_bounded_open(F.unit_interval_indicator(), Polyhedron.interval(0, 2), 0.0)


class TestLocalBoundary:
    def test_abs(self):
        cert = check_local_boundary_lipschitz(F.absolute_value(), OPEN_PM1, 1.0, 0.25)
        assert cert.certified
        centers = {round(float(w.point[0]), 12) for w in cert.witnesses}
        assert {-1.0, 1.0} <= centers

    def test_square(self):
        assert check_local_boundary_lipschitz(F.square(), OPEN_PM1, 2.0, 0.25).certified

    def test_square_refuted_near_one(self):
        cert = check_local_boundary_lipschitz(F.square(), OPEN_PM1, 1.0, 0.25)
        assert cert.refuted
        assert any(abs(w.point[0]) > 0.5 for w in cert.witnesses)

    def test_unbounded(self):
        with pytest.raises(UnboundedSet):
            check_local_boundary_lipschitz(F.square(), Polyhedron([[-1.0]], [0.0]), 1.0, 0.25)


class TestSupInf:
    def test_abs(self):
        r = sup_inf_bound(F.absolute_value(), OPEN_PM1, 1.0)
        assert (r.sup, r.inf, r.diameter, r.bound_holds) == (1.0, 0.0, 2.0, True)

    def test_constant(self):
        r = sup_inf_bound(F.constant(3.0), Polyhedron.interval(-2, 5), 0.0)
        assert r.sup == r.inf == 3.0 and r.bound_holds

    def test_square(self):
        r = sup_inf_bound(F.square(), OPEN_PM1, 2.0)
        assert r.sup == pytest.approx(1.0) and r.inf == pytest.approx(0.0, abs=1e-12) and r.bound_holds

    def test_planar(self):
        f = F.planar_max_affine()
        S = Polyhedron.box([-0.5, -0.25], [0.5, 0.75])
        r = sup_inf_bound(f, S, np.sqrt(2))
        X = GridSpec((-0.5, -0.25), (0.5, 0.75), 101).points()
        vals = f.evaluate_many(X)
        assert r.inf <= vals.min() + 1e-12 and r.sup >= vals.max() - 1e-12
        assert r.bound_holds


class TestAsymptotic:
    def test_abs(self):
        cert = asymptotic_criterion(F.absolute_value(), 1.0, [1, 2, 4])
        assert cert.certified
        assert all(v == pytest.approx(1.0) for v in cert.notes["estimates"].values())

    @pytest.mark.parametrize("ell", [0.0, 1.0, 10.0, 100.0])
    def test_square_refuted(self, ell):
        cert = asymptotic_criterion(F.square(), ell, [1, 2, 4])
        assert cert.refuted
        w = cert.witnesses[0]
        assert abs(w.subgradient[0]) == pytest.approx(2 * abs(w.point[0]))

    def test_square_growth(self):
        est = asymptotic_criterion(F.square(), 1.0, [1, 2, 4]).notes["estimates"]
        assert [est[k] for k in sorted(est, key=float)] == pytest.approx([2.0, 4.0, 8.0])

    def test_two_slopes(self):
        assert asymptotic_criterion(F.two_slopes(), 2.0, [1, 10]).certified
        assert asymptotic_criterion(F.two_slopes(), 1.9, [1, 10]).refuted

    def test_domain(self):
        with pytest.raises(DomainNotFullSpace):
            asymptotic_criterion(F.unit_interval_indicator(), 1.0, [1])


class TestMeanValue:
    @pytest.mark.parametrize("f,a,b", [
        (F.absolute_value(), -1.0, 1.0),
        (F.square(), 0.0, 1.0),
        (F.unit_interval_plus_identity(), 0.0, 1.0),
    ])
    def test_examples(self, f, a, b):
        c, g = mean_value_witness(f, [a], [b])
        assert a <= c[0] < b or b < c[0] <= a
        assert f.evaluate([b]) - f.evaluate([a]) <= g @ [b - a] + 1e-8

    def test_square_pick(self):
        c, g = mean_value_witness(F.square(), [0.0], [1.0])
        assert (c[0], g[0]) == pytest.approx((0.75, 1.5))

    def test_errors(self):
        with pytest.raises(DegenerateSegment):
            mean_value_witness(F.identity(), [1.0], [1.0])
        with pytest.raises(OutsideDomain):
            mean_value_witness(F.unit_interval_indicator(), [0.0], [2.0])


# fixtures for the cross-criterion invariants: (f, region, reference modulus)
CASES = [(f, FULL, ell) for f, ell in F.lipschitz_fixtures()] + [
    (F.steep_on_interval(), FULL, 2.0),
    (F.absolute_value(), Region.ball([0.3], 1.0), 1.0),
    (F.square(), Region.ball([0.0], 1.0), 2.0),
    (F.planar_max_affine(), Region.ball([0.2, 0.1], 0.5), np.sqrt(2)),
    (F.three_pieces(), Region.ball([0.0], 0.4), None),
]


def case_id(case):
    f, region, _ = case
    return f"{f.name}-{region.kind.value}"


@pytest.mark.parametrize("case", CASES, ids=case_id)
def test_criteria_agree(case):
    f, region, ell = case
    base = check_selection(f, region, 0.0).observed if ell is None else ell
    for m in (0.0, base * 0.5, base - 1e-3, base, base + 1e-3, base + 0.1, 2 * base + 0.1):
        if m < 0:
            continue
        verdicts = {c(f, region, m).verdict for c in LOCAL}
        assert len(verdicts) == 1, (m, verdicts)


@pytest.mark.parametrize("case", CASES, ids=case_id)
def test_monotone_in_modulus(case):
    f, region, ell = case
    ell = check_selection(f, region, 0.0).observed if ell is None else ell
    for check in LOCAL:
        if check(f, region, ell).certified:
            assert check(f, region, ell + 0.1).certified
            assert check(f, region, 2 * ell).certified


OPEN_CASES = [
    (F.absolute_value(), OPEN_PM1),
    (F.square(), OPEN_PM1),
    (F.square(), Polyhedron.interval(-0.5, 2.0)),
    (F.three_pieces(), Polyhedron.interval(-0.9, 0.8)),
    (F.planar_max_affine(), Polyhedron.box([-0.8, -0.4], [0.9, 0.9])),
    (F.box_plus_first_coordinate(), Polyhedron.box([0.1, 0.1], [0.9, 0.6])),
]


@pytest.mark.parametrize("f,S", OPEN_CASES, ids=lambda v: getattr(v, "name", "S"))
def test_boundary_criteria_agree(f, S):
    observed = certify_on_bounded_open(f, S, 0.0).observed
    for m in (observed - 0.05, observed, observed + 0.05):
        m = max(m, 0.0)
        a = certify_on_bounded_open(f, S, m).verdict
        b = check_local_boundary_lipschitz(f, S, m, 0.3).verdict
        assert a == b, m


@pytest.mark.parametrize("f,S", OPEN_CASES, ids=lambda v: getattr(v, "name", "S"))
def test_boundary_certificate_bounds_grid_estimate(f, S):
    ell = certify_on_bounded_open(f, S, 0.0).observed
    assert certify_on_bounded_open(f, S, ell).certified
    lo, hi = S.bounding_box()
    est = grid_lipschitz_estimate(f.with_domain(S), GridSpec(tuple(lo), tuple(hi)))
    assert est <= ell + 1e-6


def test_indicator_lipschitz_but_subdifferential_unbounded():
    # 0-Lipschitz on [0, 1], yet the subdifferential at the endpoints is a
    # whole half line, so it is not contained in any ball
    f = F.unit_interval_indicator()
    assert check_selection(f, FULL, 0.0).certified
    for x in (0.0, 1.0):
        assert f.subdifferential([x]).rays.shape[0] == 1


def test_singleton_set_sufficiency_only():
    # on S = {1} the identity is trivially 0-Lipschitz while every
    # subgradient at 1 has norm 1
    f = F.identity().with_domain(Polyhedron.interval(1, 1))
    assert f.evaluate([1.0]) == 1.0
    assert min_norm_point(F.identity().subdifferential([1.0]))[1] == 1.0
    assert check_selection(F.identity(), Region.ball([1.0], 1e-3), 0.0).refuted
