"""Euclidean pieces glued along a diffeomorphism of affine subsets.

The computable class: two standard R^d pieces, an affine subset Y of the
first piece, and an affine gluing map that is a diffeomorphism of Y with
an affine subset of the second piece.  Points on the glue locus are
canonically represented in the second piece.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

from .errors import DimensionMismatchError, SpaceValidationError
from .scalar import Num, as_num
from .smoothmap import (
    SmoothMap,
    affine_parts,
    compose,
    identity_map,
    is_affine_map,
    maps_equal,
)
from . import linalg


class PieceTag(Enum):
    P1 = "P1"
    P2 = "P2"


class PointClass(Enum):
    INTERIOR1 = "Interior1"
    INTERIOR2 = "Interior2"
    GLUE_LOCUS = "GlueLocus"


@dataclass(frozen=True)
class EuclideanPiece:
    dim: int

    def __post_init__(self):
        if self.dim < 0:
            raise SpaceValidationError("piece dimension must be >= 0")


@dataclass(frozen=True)
class AffineSubset:
    """An affine subset given by an injective affine chart and a left inverse."""

    piece: PieceTag
    param: SmoothMap
    left_inverse: SmoothMap

    @property
    def param_dim(self) -> int:
        return self.param.domain_dim

    @property
    def ambient_dim(self) -> int:
        return self.param.codomain_dim


def affine_subset(piece: PieceTag, param: SmoothMap, left_inverse: SmoothMap) -> AffineSubset:
    if not is_affine_map(param):
        raise SpaceValidationError("non-affine parametrization")
    if not is_affine_map(left_inverse):
        raise SpaceValidationError("non-affine left inverse")
    k, d = param.domain_dim, param.codomain_dim
    if (left_inverse.domain_dim, left_inverse.codomain_dim) != (d, k):
        raise SpaceValidationError(
            f"dimension mismatch: chart is {k}->{d} but inverse is "
            f"{left_inverse.domain_dim}->{left_inverse.codomain_dim}")
    round_trip = compose(left_inverse, param)
    if not maps_equal(round_trip, identity_map(k)).equal:
        raise SpaceValidationError("failed inverse witness: left_inverse o param != id")
    _, linear = affine_parts(param)
    if linalg.rank_exact(linear) != k:
        raise SpaceValidationError("parametrization is not injective (rank deficient)")
    return AffineSubset(piece, param, left_inverse)


@dataclass(frozen=True)
class GluingMap:
    """An affine diffeomorphism of Y (in piece 1) with its image (in piece 2).

    ``map_on_params`` sends chart coordinates of Y to ambient coordinates
    of the second piece; ``inverse_on_params`` sends chart coordinates of
    the image back to chart coordinates of Y.
    """

    domain: AffineSubset
    map_on_params: SmoothMap
    image: AffineSubset
    inverse_on_params: SmoothMap


def gluing_map(domain: AffineSubset, map_on_params: SmoothMap,
               image: AffineSubset, inverse_on_params: SmoothMap) -> GluingMap:
    if domain.piece != PieceTag.P1 or image.piece != PieceTag.P2:
        raise SpaceValidationError("gluing must go from piece 1 to piece 2")
    k = domain.param_dim
    if image.param_dim != k:
        raise SpaceValidationError(
            f"dimension mismatch: domain chart has {k} parameters, image has "
            f"{image.param_dim}")
    if not is_affine_map(map_on_params):
        raise SpaceValidationError("non-affine gluing map")
    if not is_affine_map(inverse_on_params):
        raise SpaceValidationError("non-affine gluing inverse")
    if (map_on_params.domain_dim, map_on_params.codomain_dim) != (k, image.ambient_dim):
        raise SpaceValidationError(
            f"dimension mismatch: gluing map is "
            f"{map_on_params.domain_dim}->{map_on_params.codomain_dim}, expected "
            f"{k}->{image.ambient_dim}")
    if (inverse_on_params.domain_dim, inverse_on_params.codomain_dim) != (k, k):
        raise SpaceValidationError(
            f"dimension mismatch: gluing inverse is "
            f"{inverse_on_params.domain_dim}->{inverse_on_params.codomain_dim}, "
            f"expected {k}->{k}")
    into_image_chart = compose(image.left_inverse, map_on_params)
    # range check: f must land inside the declared image subset
    reconstructed = compose(image.param, into_image_chart)
    if not maps_equal(reconstructed, map_on_params).equal:
        raise SpaceValidationError("gluing map does not land in the declared image")
    # diffeomorphism witness
    round_trip = compose(inverse_on_params, into_image_chart)
    if not maps_equal(round_trip, identity_map(k)).equal:
        raise SpaceValidationError(
            "failed inverse witness: gluing inverse does not undo the gluing map")
    return GluingMap(domain, map_on_params, image, inverse_on_params)


@dataclass(frozen=True)
class AssumptionFlags:
    """Hypotheses satisfied by construction for the affine class."""

    d_omega_equal: bool = True
    pullback_images_equal: bool = True


@dataclass(frozen=True)
class GluedSpace:
    piece1: EuclideanPiece
    piece2: EuclideanPiece
    gluing: GluingMap
    flags: AssumptionFlags = field(default_factory=AssumptionFlags)

    @property
    def dim1(self) -> int:
        return self.piece1.dim

    @property
    def dim2(self) -> int:
        return self.piece2.dim

    @property
    def locus_param_dim(self) -> int:
        return self.gluing.domain.param_dim


def make_glued_space(piece1: EuclideanPiece, piece2: EuclideanPiece,
                     gluing: GluingMap) -> GluedSpace:
    if gluing.domain.ambient_dim != piece1.dim:
        raise SpaceValidationError(
            f"dimension mismatch: subset lives in R^{gluing.domain.ambient_dim}, "
            f"piece 1 is R^{piece1.dim}")
    if gluing.image.ambient_dim != piece2.dim:
        raise SpaceValidationError(
            f"dimension mismatch: image lives in R^{gluing.image.ambient_dim}, "
            f"piece 2 is R^{piece2.dim}")
    return GluedSpace(piece1, piece2, gluing)


@dataclass(frozen=True)
class PiecePoint:
    tag: PieceTag
    coords: tuple[Num, ...]


@dataclass(frozen=True)
class GluedPoint:
    tag: PieceTag
    coords: tuple[Num, ...]
    canonical: bool = False


def glued_point(tag: PieceTag, coords: Sequence) -> GluedPoint:
    return GluedPoint(tag, tuple(as_num(c) for c in coords))


def subset_contains(subset: AffineSubset, coords: Sequence[Num]) -> bool:
    """Exact affine membership: param(left_inverse(x)) == x."""
    back = subset.param(subset.left_inverse(coords))
    return all(a == b for a, b in zip(back, list(coords)))


def _piece_dim(space: GluedSpace, tag: PieceTag) -> int:
    return space.dim1 if tag == PieceTag.P1 else space.dim2


def canonicalize(space: GluedSpace, point: GluedPoint) -> GluedPoint:
    """Canonical representative: glue-locus points are stored in piece 2."""
    coords = tuple(as_num(c) for c in point.coords)
    if len(coords) != _piece_dim(space, point.tag):
        raise DimensionMismatchError(
            f"point has {len(coords)} coordinates, piece has "
            f"{_piece_dim(space, point.tag)}")
    if point.tag == PieceTag.P1 and subset_contains(space.gluing.domain, coords):
        t = space.gluing.domain.left_inverse(coords)
        return GluedPoint(PieceTag.P2, space.gluing.map_on_params(t), True)
    return GluedPoint(point.tag, coords, True)


def classify_point(space: GluedSpace, point: GluedPoint) -> PointClass:
    canon = canonicalize(space, point)
    if canon.tag == PieceTag.P1:
        return PointClass.INTERIOR1
    if subset_contains(space.gluing.image, canon.coords):
        return PointClass.GLUE_LOCUS
    return PointClass.INTERIOR2


def lift_point(space: GluedSpace, point: GluedPoint) -> list[PiecePoint]:
    """All representatives of a glued point, one per piece that contains it.

    Interior points have exactly one lift; glue-locus points have exactly
    two (the gluing map is injective).
    """
    canon = canonicalize(space, point)
    cls = classify_point(space, canon)
    if cls == PointClass.INTERIOR1:
        return [PiecePoint(PieceTag.P1, canon.coords)]
    if cls == PointClass.INTERIOR2:
        return [PiecePoint(PieceTag.P2, canon.coords)]
    s = space.gluing.image.left_inverse(canon.coords)
    t = space.gluing.inverse_on_params(s)
    p1_coords = space.gluing.domain.param(t)
    return [PiecePoint(PieceTag.P1, p1_coords), PiecePoint(PieceTag.P2, canon.coords)]


@dataclass(frozen=True)
class Plot:
    """A plot of the glued space presented through one of its lifts."""

    domain_dim: int
    lift_tag: PieceTag
    lift_map: SmoothMap


def plot(space: GluedSpace, tag: PieceTag, lift_map: SmoothMap) -> Plot:
    if lift_map.codomain_dim != _piece_dim(space, tag):
        raise DimensionMismatchError(
            f"plot lift lands in R^{lift_map.codomain_dim}, piece is "
            f"R^{_piece_dim(space, tag)}")
    return Plot(lift_map.domain_dim, tag, lift_map)


def _factors_through(space: GluedSpace, m: SmoothMap, subset: AffineSubset,
                     seed: int = 0) -> bool:
    back = compose(subset.param, compose(subset.left_inverse, m))
    return maps_equal(back, m, seed=seed).equal


def f_equivalent(space: GluedSpace, p: Plot, q: Plot, *, seed: int = 0) -> bool:
    """Whether two plots present the same plot of the glued space.

    With an injective gluing map, same-tag presentations must agree as
    maps; cross-tag presentations must both factor through the glue locus
    and agree after applying the gluing map.
    """
    if p.domain_dim != q.domain_dim:
        raise DimensionMismatchError("plots have different domain dimensions")
    if p.lift_tag == q.lift_tag:
        return maps_equal(p.lift_map, q.lift_map, seed=seed).equal
    one, two = (p, q) if p.lift_tag == PieceTag.P1 else (q, p)
    if not _factors_through(space, one.lift_map, space.gluing.domain, seed):
        return False
    through_f = compose(
        space.gluing.map_on_params,
        compose(space.gluing.domain.left_inverse, one.lift_map))
    return maps_equal(through_f, two.lift_map, seed=seed).equal
