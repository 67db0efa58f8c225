"""Named example functions used by tests, the CLI and the acceptance suite."""
from __future__ import annotations

import numpy as np

from .convexfn import ConvexFunction
from .geometry import Polyhedron


def unit_interval_plus_identity() -> ConvexFunction:
    """Indicator of [0, 1] plus x: 1-Lipschitz on its domain."""
    return ConvexFunction([[1.0]], [0.0], Polyhedron.interval(0.0, 1.0), name="indicator01_plus_x")


def unit_interval_indicator() -> ConvexFunction:
    """Indicator of [0, 1]: 0-Lipschitz on the domain, yet ∂f(0) = (-inf, 0]."""
    return ConvexFunction([[0.0]], [0.0], Polyhedron.interval(0.0, 1.0), name="indicator01")


def square() -> ConvexFunction:
    """x² on R (quadratic term 2, single zero piece)."""
    return ConvexFunction([[0.0]], [0.0], Polyhedron.full(1), Q=[[2.0]], name="square")


def absolute_value(domain: Polyhedron | None = None) -> ConvexFunction:
    return ConvexFunction([[1.0], [-1.0]], [0.0, 0.0], domain or Polyhedron.full(1), name="abs")


def identity() -> ConvexFunction:
    return ConvexFunction([[1.0]], [0.0], Polyhedron.full(1), name="identity")


def three_pieces() -> ConvexFunction:
    """max(x, -x, x/2 + 1/4) on [-1, 1]."""
    return ConvexFunction([[1.0], [-1.0], [0.5]], [0.0, 0.0, 0.25], Polyhedron.interval(-1.0, 1.0),
                          name="three_pieces")


def box_plus_first_coordinate() -> ConvexFunction:
    """Indicator of the unit box [0,1]² plus x_1."""
    return ConvexFunction([[1.0, 0.0]], [0.0], Polyhedron.box([0.0, 0.0], [1.0, 1.0]),
                          name="box_plus_x1")


def two_slopes() -> ConvexFunction:
    """max(x, 2x - 1) on R."""
    return ConvexFunction([[1.0], [2.0]], [0.0, -1.0], Polyhedron.full(1), name="two_slopes")


def constant(c: float = 3.0, dim: int = 1) -> ConvexFunction:
    return ConvexFunction(np.zeros((1, dim)), [c], Polyhedron.full(dim), name="constant")


def decreasing_on_interval() -> ConvexFunction:
    """-2x on [0, 1]."""
    return ConvexFunction([[-2.0]], [0.0], Polyhedron.interval(0.0, 1.0), name="minus_2x")


def steep_on_interval() -> ConvexFunction:
    """2x on [0, 1]."""
    return ConvexFunction([[2.0]], [0.0], Polyhedron.interval(0.0, 1.0), name="two_x")


def double_on_line() -> ConvexFunction:
    return ConvexFunction([[2.0]], [0.0], Polyhedron.full(1), name="two_x_line")


def planar_max_affine() -> ConvexFunction:
    """max(x_1 + x_2, -x_1, 0.5 x_2 + 0.3) on the box [-1,1] x [-0.5,1]."""
    return ConvexFunction([[1.0, 1.0], [-1.0, 0.0], [0.0, 0.5]], [0.0, 0.0, 0.3],
                          Polyhedron.box([-1.0, -0.5], [1.0, 1.0]), name="planar")


def lipschitz_fixtures():
    """Fixtures whose domain is bounded, paired with their exact Lipschitz modulus on dom f."""
    return [
        (unit_interval_plus_identity(), 1.0),
        (unit_interval_indicator(), 0.0),
        (absolute_value(Polyhedron.interval(-1.0, 1.0)), 1.0),
        (three_pieces(), 1.0),
        (box_plus_first_coordinate(), 1.0),
        (steep_on_interval(), 2.0),
        (planar_max_affine(), float(np.sqrt(2.0))),
    ]
