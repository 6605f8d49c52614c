"""Fibres of the bundle of 1-form values over a glued space.

Over interior points of either piece the fibre is the standard covector
space of that piece.  Over the glue locus it is the space of pairs
(a1, a2) satisfying the linearized compatibility constraint
A^T a1 = B^T a2, where A and B are the (constant) Jacobians of the locus
chart and of the gluing map in that chart.  ``fibre_oracle`` recomputes
each fibre dimension by brute force over polynomial coefficient
truncations and serves as an independent check.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from . import expr as ex
from . import linalg
from .errors import DomainError, FibreMembershipError
from .expr import _poly_const, _poly_mul, _poly_pow  # noqa: F401 (dict arithmetic)
from .forms import OneForm
from .scalar import Num, Scalar, as_num, is_exact
from .smoothmap import affine_parts
from .spaces import (
    GluedPoint,
    GluedSpace,
    PiecePoint,
    PieceTag,
    PointClass,
    canonicalize,
    classify_point,
    lift_point,
)


@dataclass(frozen=True)
class Covector:
    """The value of a form at a point of one piece."""

    tag: PieceTag
    point: tuple[Num, ...]
    components: tuple[Scalar, ...]


@dataclass(frozen=True)
class GlueFibreElement:
    """A compatible pair of covectors over a glue-locus point."""

    a1: Covector
    a2: Covector


@dataclass(frozen=True)
class FibreDescription:
    point: GluedPoint
    case: PointClass
    dim: int
    basis: tuple[Covector | GlueFibreElement, ...]
    constraints: list[list[Fraction]] | None = None


def covector(tag: PieceTag, point: Sequence, components: Sequence) -> Covector:
    return Covector(tag, tuple(as_num(c) for c in point),
                    tuple(Scalar(c) for c in components))


def value_at(w: OneForm, point: Sequence) -> Covector:
    """Evaluate the coefficient vector of a form at a piece point."""
    coords = [as_num(c) for c in point]
    comps = tuple(Scalar(ex.evaluate(c, coords)) for c in w.coeffs)
    return Covector(w.piece, tuple(coords), comps)


def compatible_pair_constraints(space: GluedSpace, point: GluedPoint) -> list[list[Fraction]]:
    """The k x (d1+d2) constraint matrix [A^T | -B^T] at a glue-locus point.

    The charts are affine, so the Jacobians are constant and the entries
    exact rationals.
    """
    if classify_point(space, point) != PointClass.GLUE_LOCUS:
        raise DomainError("point is not on the glue locus")
    _, a = affine_parts(space.gluing.domain.param)           # d1 x k
    _, b = affine_parts(space.gluing.map_on_params)          # d2 x k
    k = space.locus_param_dim
    d1, d2 = space.dim1, space.dim2
    rows = []
    for r in range(k):
        row = [a[i][r] for i in range(d1)] + [-b[i][r] for i in range(d2)]
        rows.append(row)
    return rows


def _standard_basis(tag: PieceTag, coords: tuple[Num, ...], dim: int) -> tuple[Covector, ...]:
    out = []
    for i in range(dim):
        comps = tuple(Scalar(Fraction(1 if j == i else 0)) for j in range(dim))
        out.append(Covector(tag, coords, comps))
    return tuple(out)


def fibre_at(space: GluedSpace, point: GluedPoint) -> FibreDescription:
    """Basis and dimension of the fibre of glued 1-form values at a point."""
    canon = canonicalize(space, point)
    cls = classify_point(space, canon)
    if cls == PointClass.INTERIOR1:
        basis = _standard_basis(PieceTag.P1, canon.coords, space.dim1)
        return FibreDescription(canon, cls, space.dim1, basis)
    if cls == PointClass.INTERIOR2:
        basis = _standard_basis(PieceTag.P2, canon.coords, space.dim2)
        return FibreDescription(canon, cls, space.dim2, basis)
    constraints = compatible_pair_constraints(space, canon)
    d1, d2 = space.dim1, space.dim2
    null = linalg.nullspace_exact(constraints, n_cols=d1 + d2)
    lifts = lift_point(space, canon)
    p1_coords = lifts[0].coords
    p2_coords = lifts[1].coords
    basis = tuple(
        GlueFibreElement(
            Covector(PieceTag.P1, p1_coords, tuple(Scalar(x) for x in v[:d1])),
            Covector(PieceTag.P2, p2_coords, tuple(Scalar(x) for x in v[d1:])),
        )
        for v in null
    )
    return FibreDescription(canon, cls, len(basis), basis, constraints)


def membership_residual(space: GluedSpace, e: GlueFibreElement) -> list[Num]:
    """Residual of the compatibility constraints on a candidate pair."""
    pt = GluedPoint(PieceTag.P2, e.a2.point)
    constraints = compatible_pair_constraints(space, pt)
    vec = [s.value for s in e.a1.components] + [s.value for s in e.a2.components]
    if len(vec) != space.dim1 + space.dim2:
        raise FibreMembershipError("component count does not match the pieces")
    return [sum((row[j] * vec[j] for j in range(len(vec))), Fraction(0))
            for row in constraints]


def check_membership(space: GluedSpace, e: GlueFibreElement, tol: float = 1e-9):
    """Raise unless the pair satisfies the fibre constraints.

    Exact data must satisfy them exactly; float data within ``tol``.
    """
    for r in membership_residual(space, e):
        if is_exact(r):
            if r != 0:
                raise FibreMembershipError(f"constraint residual {r} != 0")
        elif abs(float(r)) > tol:
            raise FibreMembershipError(f"constraint residual {r} exceeds {tol}")


def glue_fibre_element(space: GluedSpace, point: GluedPoint,
                       comps1: Sequence, comps2: Sequence) -> GlueFibreElement:
    """Build and validate a glue-locus fibre element at a point."""
    canon = canonicalize(space, point)
    if classify_point(space, canon) != PointClass.GLUE_LOCUS:
        raise DomainError("point is not on the glue locus")
    lifts = lift_point(space, canon)
    e = GlueFibreElement(
        Covector(PieceTag.P1, lifts[0].coords, tuple(Scalar(c) for c in comps1)),
        Covector(PieceTag.P2, lifts[1].coords, tuple(Scalar(c) for c in comps2)),
    )
    check_membership(space, e)
    return e


def _classify_covector_base(space: GluedSpace, v: Covector) -> PointClass:
    return classify_point(space, GluedPoint(v.tag, v.point))


def rho1(space: GluedSpace, e: Covector | GlueFibreElement) -> Covector:
    """Projection of a glued fibre element to the piece-1 side.

    Defined over interior points of piece 1 and over the glue locus; on
    interior fibres it is the identity bijection.
    """
    if isinstance(e, GlueFibreElement):
        return e.a1
    cls = _classify_covector_base(space, e)
    if cls == PointClass.INTERIOR1:
        return e
    if cls == PointClass.GLUE_LOCUS:
        raise DomainError("glue-locus fibre elements are pairs; got a bare covector")
    raise DomainError("rho1 is not defined over interior points of piece 2")


def rho2(space: GluedSpace, e: Covector | GlueFibreElement) -> Covector:
    """Projection to the piece-2 side, defined over all of piece 2."""
    if isinstance(e, GlueFibreElement):
        return e.a2
    cls = _classify_covector_base(space, e)
    if cls == PointClass.INTERIOR2:
        return e
    if cls == PointClass.GLUE_LOCUS:
        raise DomainError("glue-locus fibre elements are pairs; got a bare covector")
    raise DomainError("rho2 is not defined over interior points of piece 1")


def rho1_inverse(space: GluedSpace, v: Covector) -> Covector:
    """Inverse of the interior bijection rho1 (identity on components)."""
    if _classify_covector_base(space, v) != PointClass.INTERIOR1:
        raise DomainError("rho1_inverse requires an interior point of piece 1")
    return v


@dataclass(frozen=True)
class VanishingRequirement:
    """``count`` linear functionals: the value on the tagged side vanishes."""

    tag: PieceTag
    point: tuple[Num, ...]
    count: int


def vanishing_constraints(space: GluedSpace, point: GluedPoint,
                          side: int | None = None) -> tuple[VanishingRequirement, ...]:
    """Value-vanishing conditions cutting out the fibre at a point.

    One requirement per lift of the point: interior points constrain only
    their own piece's form, glue-locus points constrain both.
    """
    reqs = []
    for lift in lift_point(space, point):
        dim = space.dim1 if lift.tag == PieceTag.P1 else space.dim2
        reqs.append(VanishingRequirement(lift.tag, lift.coords, dim))
    if side is not None:
        want = PieceTag.P1 if side == 1 else PieceTag.P2
        reqs = [r for r in reqs if r.tag == want]
    return tuple(reqs)


# ---------------------------------------------------------------------------
# Brute-force oracle over polynomial truncations


def _monomials(dim: int, max_deg: int) -> list[tuple[int, ...]]:
    out = [m for m in itertools.product(range(max_deg + 1), repeat=dim)
           if sum(m) <= max_deg]
    out.sort()
    return out


def _compose_monomial_affine(mono: tuple[int, ...], consts: list[Fraction],
                             matrix: list[list[Fraction]], k: int) -> dict:
    """Coefficients (over k chart variables) of x^mono composed with an affine map."""
    out = _poly_const(Fraction(1), k)
    for i, power in enumerate(mono):
        if power == 0:
            continue
        linear = {}
        if consts[i] != 0:
            linear[(0,) * k] = consts[i]
        for j in range(k):
            if matrix[i][j] != 0:
                key = tuple(1 if t == j else 0 for t in range(k))
                linear[key] = matrix[i][j]
        out = _poly_mul(out, _poly_pow(linear, power, k))
    return out


def fibre_oracle(space: GluedSpace, point: GluedPoint, degree: int = 2) -> int:
    """Fibre dimension recomputed by brute force, exactly.

    Builds the space of compatible form pairs with polynomial coefficients
    of total degree <= ``degree``, then returns the rank of the
    evaluation-at-the-point map on it (the dimension of the quotient by
    the vanishing subspace).
    """
    if degree < 1:
        raise ValueError("degree must be >= 1")
    d1, d2, k = space.dim1, space.dim2, space.locus_param_dim
    mono1 = _monomials(d1, degree)
    mono2 = _monomials(d2, degree)
    monok = _monomials(k, degree)
    krow_index = {(j, m): idx for idx, (j, m) in
                  enumerate((j, m) for j in range(k) for m in monok)}

    c1, a = affine_parts(space.gluing.domain.param)
    c2, b = affine_parts(space.gluing.map_on_params)

    columns = []  # one coefficient-constraint column per unknown

    def pulled_column(mono, consts, matrix, comp_index, sign):
        composed = _compose_monomial_affine(mono, consts, matrix, k)
        col = {}
        for j in range(k):
            factor = matrix[comp_index][j]
            if factor == 0:
                continue
            for tmono, coeff in composed.items():
                idx = krow_index[(j, tmono)]
                col[idx] = col.get(idx, Fraction(0)) + sign * coeff * factor
        return col

    unknowns = []  # (side, comp_index, monomial)
    for i in range(d1):
        for m in mono1:
            unknowns.append((1, i, m))
            columns.append(pulled_column(m, c1, a, i, Fraction(1)))
    for i in range(d2):
        for m in mono2:
            unknowns.append((2, i, m))
            columns.append(pulled_column(m, c2, b, i, Fraction(-1)))

    n_rows = len(krow_index)
    n_cols = len(unknowns)
    compat = [[Fraction(0)] * n_cols for _ in range(n_rows)]
    for cidx, col in enumerate(columns):
        for ridx, val in col.items():
            compat[ridx][cidx] = val

    basis = (linalg.nullspace_exact(compat, n_cols=n_cols) if n_rows
             else linalg.nullspace_exact([], n_cols=n_cols))

    reqs = vanishing_constraints(space, point)
    functional_rows = []
    for req in reqs:
        side = 1 if req.tag == PieceTag.P1 else 2
        coords = [Fraction(x) for x in req.point]
        for comp in range(req.count):
            row = []
            for (s, i, m) in unknowns:
                if s == side and i == comp:
                    val = Fraction(1)
                    for v, p in zip(coords, m):
                        val *= v ** p
                    row.append(val)
                else:
                    row.append(Fraction(0))
            functional_rows.append(row)

    evaluated = [[sum((row[j] * vec[j] for j in range(n_cols)), Fraction(0))
                  for vec in basis]
                 for row in functional_rows]
    if not evaluated or not basis:
        return 0
    return linalg.rank_exact(evaluated)
