"""Pseudo-metrics on the fibres of 1-form values, glued by half-averaging.

A piece metric is a symmetric matrix of expressions over its piece (only
the upper triangle is stored).  The glued metric uses the piece metric on
interior fibres and the half-sum of both on glue-locus fibres, through
the two projections.  Compatibility of the piece metrics is checked on a
basis of each sampled locus fibre; the verdict is recorded on the glued
metric rather than required, and the Gram rank of the glued form can be
inspected at any point.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from . import expr as ex
from . import linalg
from .errors import (
    DimensionMismatchError,
    FibreMembershipError,
    MetricRankError,
    SpaceValidationError,
)
from .fibre import (
    Covector,
    GlueFibreElement,
    check_membership,
    fibre_at,
)
from .scalar import Num, Scalar, is_exact
from .spaces import (
    GluedPoint,
    GluedSpace,
    PieceTag,
    PointClass,
    canonicalize,
    classify_point,
    lift_point,
)

COMPAT_TOL = 1e-9
RANK_REL_TOL = 1e-9


@dataclass(frozen=True)
class PieceMetric:
    piece: PieceTag
    dim: int
    upper: tuple[tuple[ex.Expr, ...], ...]  # upper[i][j-i] is the (i,j) entry

    def entry(self, i: int, j: int) -> ex.Expr:
        if i > j:
            i, j = j, i
        return self.upper[i][j - i]

    def rows(self) -> list[list[ex.Expr]]:
        return [[self.entry(i, j) for j in range(self.dim)] for i in range(self.dim)]

    def evaluate_at(self, coords: Sequence[Num]) -> list[list[Num]]:
        return [[ex.evaluate(self.entry(i, j), coords) for j in range(self.dim)]
                for i in range(self.dim)]


def piece_metric(piece: PieceTag, rows: Sequence[Sequence], *, seed: int = 0) -> PieceMetric:
    """Build a piece metric from a full square matrix; must be symmetric."""
    dim = len(rows)
    exprs = [[c if isinstance(c, ex.Expr) else ex.const(c) for c in row] for row in rows]
    for row in exprs:
        if len(row) != dim:
            raise DimensionMismatchError("metric matrix must be square")
    for i in range(dim):
        for j in range(i + 1, dim):
            if not ex.expr_equal(exprs[i][j], exprs[j][i], dim, seed=seed):
                raise SpaceValidationError(
                    f"metric matrix is not symmetric at ({i},{j})")
    upper = tuple(tuple(exprs[i][j] for j in range(i, dim)) for i in range(dim))
    return PieceMetric(piece, dim, upper)


def identity_metric(piece: PieceTag, dim: int) -> PieceMetric:
    return piece_metric(piece, [[1 if i == j else 0 for j in range(dim)]
                                for i in range(dim)])


@dataclass(frozen=True)
class GluedMetric:
    space: GluedSpace
    g1: PieceMetric
    g2: PieceMetric
    compatible: bool


def check_metric_rank(g: PieceMetric, samples: int = 5, *, seed: int = 0) -> bool:
    """Full numerical rank at the origin plus random sample points."""
    if samples < 1:
        raise ValueError("samples must be >= 1")
    rng = random.Random(seed)
    points: list[list[float]] = [[0.0] * g.dim]
    while len(points) < samples:
        points.append([rng.uniform(-1.0, 1.0) for _ in range(g.dim)])
    for pt in points:
        rows = [[float(v) for v in row] for row in g.evaluate_at(pt)]
        if linalg.numerical_rank(rows, RANK_REL_TOL) != g.dim:
            return False
    return True


def _locus_chart_samples(space: GluedSpace, samples: int, seed: int) -> list[tuple[Fraction, ...]]:
    """Deterministic-first rational sample points in the locus chart."""
    k = space.locus_param_dim
    if k == 0:
        return [()]
    pts: list[tuple[Fraction, ...]] = [tuple(Fraction(0) for _ in range(k))]
    if k == 1:
        pts.append((Fraction(-1),))
        pts.append((Fraction(1),))
    rng = random.Random(seed)
    while len(pts) < samples:
        pts.append(tuple(Fraction(rng.randint(-16, 16), rng.randint(1, 16))
                         for _ in range(k)))
    return pts


def _quad(u: Sequence[Num], g: Sequence[Sequence[Num]], v: Sequence[Num]) -> Num:
    exact = all(is_exact(x) for x in u) and all(is_exact(x) for x in v) \
        and all(is_exact(x) for row in g for x in row)
    if exact:
        total = Fraction(0)
        for i, ui in enumerate(u):
            for j, vj in enumerate(v):
                total += ui * g[i][j] * vj
        return total
    total_f = 0.0
    for i, ui in enumerate(u):
        for j, vj in enumerate(v):
            total_f += float(ui) * float(g[i][j]) * float(vj)
    return total_f


def _values(c: Covector) -> list[Num]:
    return [s.value for s in c.components]


def check_metrics_compatible(space: GluedSpace, g1: PieceMetric, g2: PieceMetric,
                             samples: int = 5, *, seed: int = 0) -> bool:
    """Whether the piece metrics agree on all compatible pairs over the locus.

    At each sampled locus point the compatible subspace has a finite
    basis, and bilinearity reduces the universally-quantified condition
    to equality on basis pairs.
    """
    _require_metric(space, g1, PieceTag.P1)
    _require_metric(space, g2, PieceTag.P2)
    for t in _locus_chart_samples(space, samples, seed):
        y1 = space.gluing.domain.param(t)
        y2 = space.gluing.map_on_params(t)
        desc = fibre_at(space, GluedPoint(PieceTag.P2, y2))
        m1 = g1.evaluate_at(y1)
        m2 = g2.evaluate_at(y2)
        basis = desc.basis
        for i in range(len(basis)):
            for j in range(i, len(basis)):
                lhs = _quad(_values(basis[i].a1), m1, _values(basis[j].a1))
                rhs = _quad(_values(basis[i].a2), m2, _values(basis[j].a2))
                if is_exact(lhs) and is_exact(rhs):
                    if lhs != rhs:
                        return False
                elif abs(float(lhs) - float(rhs)) > COMPAT_TOL:
                    return False
    return True


def _require_metric(space: GluedSpace, g: PieceMetric, tag: PieceTag):
    if g.piece != tag:
        raise DimensionMismatchError(f"metric lives on {g.piece.value}, expected {tag.value}")
    expected = space.dim1 if tag == PieceTag.P1 else space.dim2
    if g.dim != expected:
        raise DimensionMismatchError(
            f"metric is {g.dim}x{g.dim}, piece is R^{expected}")


def glue_metric(space: GluedSpace, g1: PieceMetric, g2: PieceMetric,
                samples: int = 5, *, seed: int = 0) -> GluedMetric:
    """Assemble the glued metric; records (does not require) compatibility."""
    _require_metric(space, g1, PieceTag.P1)
    _require_metric(space, g2, PieceTag.P2)
    if not check_metric_rank(g1, samples, seed=seed):
        raise MetricRankError("piece-1 metric is rank deficient at a sample point")
    if not check_metric_rank(g2, samples, seed=seed):
        raise MetricRankError("piece-2 metric is rank deficient at a sample point")
    compatible = check_metrics_compatible(space, g1, g2, samples, seed=seed)
    return GluedMetric(space, g1, g2, compatible)


def _check_interior_args(canon: GluedPoint, tag: PieceTag, *elems):
    for e in elems:
        if not isinstance(e, Covector):
            raise FibreMembershipError("interior fibre elements are covectors")
        if e.tag != tag or tuple(e.point) != tuple(canon.coords):
            raise FibreMembershipError("covector is not based at the given point")


def evaluate_metric(gm: GluedMetric, point: GluedPoint, e1, e2) -> Scalar:
    """The glued metric's value on two elements of the fibre at a point.

    Interior fibres use the corresponding piece metric; glue-locus fibres
    use half the sum of both piece metrics through the two projections.
    """
    space = gm.space
    canon = canonicalize(space, point)
    cls = classify_point(space, canon)
    if cls == PointClass.INTERIOR1:
        _check_interior_args(canon, PieceTag.P1, e1, e2)
        m = gm.g1.evaluate_at(canon.coords)
        return Scalar(_quad(_values(e1), m, _values(e2)))
    if cls == PointClass.INTERIOR2:
        _check_interior_args(canon, PieceTag.P2, e1, e2)
        m = gm.g2.evaluate_at(canon.coords)
        return Scalar(_quad(_values(e1), m, _values(e2)))
    for e in (e1, e2):
        if not isinstance(e, GlueFibreElement):
            raise FibreMembershipError("glue-locus fibre elements are pairs")
        if tuple(e.a2.point) != tuple(canon.coords):
            raise FibreMembershipError("element is not based at the given point")
        check_membership(space, e)
    lifts = lift_point(space, canon)
    m1 = gm.g1.evaluate_at(lifts[0].coords)
    m2 = gm.g2.evaluate_at(lifts[1].coords)
    part1 = _quad(_values(e1.a1), m1, _values(e2.a1))
    part2 = _quad(_values(e1.a2), m2, _values(e2.a2))
    if is_exact(part1) and is_exact(part2):
        return Scalar(Fraction(1, 2) * (part1 + part2))
    return Scalar(0.5 * (float(part1) + float(part2)))


def gram_rank_at(gm: GluedMetric, point: GluedPoint) -> int:
    """Rank of the glued metric's Gram matrix on the fibre basis at a point.

    Exact rank for rational data, SVD rank with a relative 1e-9 cutoff
    otherwise.
    """
    desc = fibre_at(gm.space, point)
    n = desc.dim
    if n == 0:
        return 0
    gram = [[evaluate_metric(gm, desc.point, desc.basis[i], desc.basis[j]).value
             for j in range(n)] for i in range(n)]
    if all(is_exact(v) for row in gram for v in row):
        return linalg.rank_exact(gram)
    return linalg.numerical_rank([[float(v) for v in row] for row in gram],
                                 RANK_REL_TOL)
