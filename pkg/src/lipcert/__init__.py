"""Lipschitz certification, Lipschitz extensions and Moreau envelopes for
convex functions built from a quadratic, a max of affine pieces and a
polyhedral domain, in dimension at most four."""
from .certify import (
    Certificate,
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
from .convexfn import ConvexFunction, build_cell_complex, eps_normal_membership, normal_cone
from .errors import LipcertError
from .extend import (
    ExtensionKind,
    ExtensionSpec,
    extension_subdiff_check,
    infconv_extension,
    supaffine_boundary_form,
    supaffine_extension,
)
from .geometry import (
    GeneralizedPolyhedron,
    Norm,
    Polyhedron,
    distance_to_set,
    enumerate_generators,
    min_norm_point,
    project,
    set_distance,
)
from .moreau import EnvelopeResult, envelope, envelope_bounds_check, envelope_gradient_check, \
    envelope_lipschitz_check, prox

__version__ = "0.1.0"
