"""Differential 1-forms on the pieces and on the glued space.

A form on a piece R^d is a coefficient vector (c_0,...,c_{d-1}) standing
for c_0 dx0 + ... + c_{d-1} dx{d-1}.  A pair of piece forms represents a
form on the glued space exactly when their restrictions to the glue locus
agree: the restriction of the first form equals the pull-through of the
second along the gluing map, both expressed in the chart of Y.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from . import expr as ex
from .errors import DimensionMismatchError, IncompatibleFormsError
from .smoothmap import SmoothMap
from .spaces import GluedSpace, PieceTag, Plot


@dataclass(frozen=True)
class OneForm:
    piece: PieceTag
    coeffs: tuple[ex.Expr, ...]

    @property
    def ambient_dim(self) -> int:
        return len(self.coeffs)


@dataclass(frozen=True)
class PulledForm:
    """A form on the chart R^k of the glue locus (or of a plot domain)."""

    domain_dim: int
    coeffs: tuple[ex.Expr, ...]

    def __post_init__(self):
        if len(self.coeffs) != self.domain_dim:
            raise DimensionMismatchError(
                f"expected {self.domain_dim} coefficients, got {len(self.coeffs)}")


@dataclass(frozen=True)
class FormPair:
    """A verified compatible pair: one form on each piece, glued."""

    w1: OneForm
    w2: OneForm
    verified: bool


def one_form(piece: PieceTag, coeffs) -> OneForm:
    return OneForm(piece, tuple(c if isinstance(c, ex.Expr) else ex.const(c)
                                for c in coeffs))


def zero_form(piece: PieceTag, dim: int) -> OneForm:
    return OneForm(piece, (ex.ZERO,) * dim)


def pulled_form(domain_dim: int, coeffs) -> PulledForm:
    return PulledForm(domain_dim, tuple(c if isinstance(c, ex.Expr) else ex.const(c)
                                        for c in coeffs))


def add_forms(a: OneForm, b: OneForm) -> OneForm:
    if a.piece != b.piece:
        raise DimensionMismatchError("cannot add forms on different pieces")
    if a.ambient_dim != b.ambient_dim:
        raise DimensionMismatchError("forms have different ambient dimensions")
    return OneForm(a.piece, tuple(ex.padd(x, y) for x, y in zip(a.coeffs, b.coeffs)))


def scale_form(c, w: OneForm) -> OneForm:
    factor = c if isinstance(c, ex.Expr) else ex.const(c)
    return OneForm(w.piece, tuple(ex.pmul(factor, x) for x in w.coeffs))


def pullback(w: OneForm | PulledForm, m: SmoothMap) -> PulledForm:
    """Pull a coefficient-vector form back along a smooth map.

    coeffs_j(u) = sum_i w_i(m(u)) * d m_i / d u_j.
    """
    ambient = w.ambient_dim if isinstance(w, OneForm) else w.domain_dim
    if m.codomain_dim != ambient:
        raise DimensionMismatchError(
            f"map lands in R^{m.codomain_dim}, form lives on R^{ambient}")
    substituted = [ex.substitute(c, m.components) for c in w.coeffs]
    new_coeffs = []
    for j in range(m.domain_dim):
        terms = [ex.pmul(substituted[i], ex.differentiate(m.components[i], j))
                 for i in range(ambient)]
        new_coeffs.append(ex.psum(terms))
    return PulledForm(m.domain_dim, tuple(new_coeffs))


def restrict_to_locus(space: GluedSpace, w1: OneForm) -> PulledForm:
    """The restriction of a piece-1 form to Y, in the chart of Y."""
    _require_piece(space, w1, PieceTag.P1)
    return pullback(w1, space.gluing.domain.param)


def pull_through_gluing(space: GluedSpace, w2: OneForm) -> PulledForm:
    """The pullback of a piece-2 form through the gluing map, in the chart of Y."""
    _require_piece(space, w2, PieceTag.P2)
    return pullback(w2, space.gluing.map_on_params)


def _require_piece(space: GluedSpace, w: OneForm, tag: PieceTag):
    if w.piece != tag:
        raise DimensionMismatchError(f"form lives on {w.piece.value}, expected {tag.value}")
    expected = space.dim1 if tag == PieceTag.P1 else space.dim2
    if w.ambient_dim != expected:
        raise DimensionMismatchError(
            f"form has {w.ambient_dim} coefficients, piece is R^{expected}")


@dataclass(frozen=True)
class CompatibilityResult:
    compatible: bool
    exact: bool
    difference: PulledForm | None = None

    @property
    def mode(self) -> str:
        return "exact" if self.exact else "sampled"

    def __bool__(self) -> bool:
        return self.compatible


def check_compatible(space: GluedSpace, w1: OneForm, w2: OneForm,
                     *, seed: int = 0) -> CompatibilityResult:
    """Whether the pair of piece forms agrees on the glue locus."""
    left = restrict_to_locus(space, w1)
    right = pull_through_gluing(space, w2)
    k = space.locus_param_dim
    exact = True
    equal = True
    for a, b in zip(left.coeffs, right.coeffs):
        res = ex.expr_equal(a, b, k, seed=seed)
        exact = exact and res.exact
        if not res.equal:
            equal = False
            break
    if equal:
        return CompatibilityResult(True, exact)
    difference = PulledForm(
        k, tuple(ex.psub(a, b) for a, b in zip(left.coeffs, right.coeffs)))
    return CompatibilityResult(False, exact, difference)


def glue_forms(space: GluedSpace, w1: OneForm, w2: OneForm,
               *, seed: int = 0) -> FormPair:
    res = check_compatible(space, w1, w2, seed=seed)
    if not res.compatible:
        diff = res.difference
        pretty = ", ".join(ex.format_expr(c) for c in diff.coeffs)
        raise IncompatibleFormsError(
            f"forms disagree on the glue locus; difference in the locus chart: "
            f"({pretty})", difference=diff)
    return FormPair(w1, w2, True)


def split_glued_form(pair: FormPair) -> tuple[OneForm, OneForm]:
    if not pair.verified:
        raise IncompatibleFormsError("pair was not verified")
    return pair.w1, pair.w2


def evaluate_on_plot(pair: FormPair, p: Plot) -> PulledForm:
    """The classical form induced on a plot's domain.

    Compatibility makes the answer independent of which lift presents the
    plot.
    """
    if not pair.verified:
        raise IncompatibleFormsError("pair was not verified")
    w = pair.w1 if p.lift_tag == PieceTag.P1 else pair.w2
    return pullback(w, p.lift_map)


def extend_form_from_locus(space: GluedSpace, pf: PulledForm) -> tuple[OneForm, OneForm]:
    """A section of the restriction maps: piece forms that restrict to ``pf``.

    Substituting the affine left inverses extends the chart form to each
    whole piece (zero on complementary directions); restriction and
    pull-through then recover ``pf`` exactly.
    """
    k = space.locus_param_dim
    if pf.domain_dim != k:
        raise DimensionMismatchError(
            f"chart form has {pf.domain_dim} variables, locus chart has {k}")
    out1 = pullback(pf, space.gluing.domain.left_inverse)
    via_image_chart = pullback(pf, space.gluing.inverse_on_params)
    out2 = pullback(via_image_chart, space.gluing.image.left_inverse)
    return (OneForm(PieceTag.P1, out1.coeffs), OneForm(PieceTag.P2, out2.coeffs))


def is_gluing_invariant(space: GluedSpace, w1: OneForm) -> bool:
    """Whether the form takes equal values on plots identified by the gluing.

    The artifact's gluing maps are injective, so no two distinct points
    are identified and every form on piece 1 qualifies.  Kept as an API
    surface for the general notion.
    """
    _require_piece(space, w1, PieceTag.P1)
    return True
