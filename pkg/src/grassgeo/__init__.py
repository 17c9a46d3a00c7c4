"""Numerical geometry of grassmannians of nondegenerate subspaces.

Modules by topic: ``hermitian`` (forms, points, tangents), ``exterior``
(wedge powers and the Plucker map), ``geometry`` (metric, connection,
curvature), ``geodesics`` (closed-form generic geodesics), ``hyperconvex``
(convexity of hyperbolic polyhedra from Gram matrices).
"""
from .errors import DegenerateForm, DegeneratePoint, GeometryError, InfeasibleGram, NotGeneric
from .exterior import (
    bform,
    compound,
    derivation_extension,
    induced_form,
    isometry_factor,
    multi_index_basis,
    plucker_point,
    plucker_tangent,
    wedge_adjoint,
    wedge_inner,
    wedge_space,
)
from .geodesics import GeodesicCurve, Spine, SpineClass, geodesic, geodesic_verify, spine_decomposition
from .geometry import (
    CURVATURE_SIGN,
    covariant_derivative,
    curvature,
    einstein_constant,
    gauss_equation_verify,
    metric,
    minimality_verify,
    ricci,
)
from .hermitian import (
    COMPLEX,
    REAL,
    GrassmannPoint,
    HermitianSpace,
    TangentVector,
    adjoint,
    form_orthonormal_basis,
    inner,
    orthonormalize,
    projectors,
    signature,
    tangent_component,
)
from .hyperconvex import (
    ConvexityReport,
    adjacency_conditions,
    bracket2,
    bracket3,
    convexity_check,
    nonadjacent_condition,
    oracle_face_disjoint,
    realize_gram,
    segment_membership,
)

__version__ = "0.1.0"
