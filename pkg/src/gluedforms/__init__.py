"""Symbolic 1-forms, fibres and pseudo-metrics on glued Euclidean domains."""

from .errors import (
    DimensionMismatchError,
    DomainError,
    EvaluationError,
    ExprParseError,
    FibreMembershipError,
    GluedFormsError,
    IncompatibleFormsError,
    MetricRankError,
    NotPolynomialError,
    ScalarModeError,
    SceneError,
    SpaceValidationError,
)
from .expr import (
    EqualityResult,
    Expr,
    const,
    cos,
    differentiate,
    exp,
    expr_equal,
    format_expr,
    parse_expr,
    sin,
    var,
)
from .fibre import (
    Covector,
    FibreDescription,
    GlueFibreElement,
    VanishingRequirement,
    compatible_pair_constraints,
    covector,
    fibre_at,
    fibre_oracle,
    glue_fibre_element,
    rho1,
    rho1_inverse,
    rho2,
    value_at,
    vanishing_constraints,
)
from .forms import (
    CompatibilityResult,
    FormPair,
    OneForm,
    PulledForm,
    add_forms,
    check_compatible,
    evaluate_on_plot,
    extend_form_from_locus,
    glue_forms,
    is_gluing_invariant,
    one_form,
    pull_through_gluing,
    pullback,
    pulled_form,
    restrict_to_locus,
    scale_form,
    split_glued_form,
    zero_form,
)
from .metric import (
    GluedMetric,
    PieceMetric,
    check_metric_rank,
    check_metrics_compatible,
    evaluate_metric,
    glue_metric,
    gram_rank_at,
    identity_metric,
    piece_metric,
)
from .scalar import Scalar
from .scene import Scene, parse_scene
from .smoothmap import SmoothMap, compose, identity_map, jacobian, smooth_map
from .spaces import (
    AffineSubset,
    EuclideanPiece,
    GluedPoint,
    GluedSpace,
    GluingMap,
    PiecePoint,
    PieceTag,
    Plot,
    PointClass,
    affine_subset,
    canonicalize,
    classify_point,
    f_equivalent,
    glued_point,
    gluing_map,
    lift_point,
    make_glued_space,
    plot,
)

__version__ = "0.1.0"
