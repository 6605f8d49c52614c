"""Symbolic smooth maps between Euclidean spaces.

A map R^m -> R^n is a tuple of n expressions in variables x0..x{m-1}.
These stand in for plots and gluing maps; composition is substitution and
the Jacobian is the matrix of evaluated symbolic partials.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from . import expr as ex
from .errors import DimensionMismatchError, EvaluationError
from .scalar import Num, Scalar, as_num


@dataclass(frozen=True)
class SmoothMap:
    domain_dim: int
    codomain_dim: int
    components: tuple[ex.Expr, ...]

    def __post_init__(self):
        if len(self.components) != self.codomain_dim:
            raise DimensionMismatchError(
                f"expected {self.codomain_dim} components, got {len(self.components)}")
        for comp in self.components:
            if ex.max_var_index(comp) >= self.domain_dim:
                raise DimensionMismatchError(
                    f"component {ex.format_expr(comp)} uses a variable outside "
                    f"dimension {self.domain_dim}")

    def __call__(self, point: Sequence) -> tuple[Num, ...]:
        coords = [as_num(c) for c in point]
        if len(coords) != self.domain_dim:
            raise DimensionMismatchError(
                f"point has {len(coords)} coordinates, expected {self.domain_dim}")
        return tuple(ex.evaluate(c, coords) for c in self.components)


def smooth_map(domain_dim: int, components: Sequence[ex.Expr | int | Fraction | float],
               codomain_dim: int | None = None) -> SmoothMap:
    comps = tuple(c if isinstance(c, ex.Expr) else ex.const(c) for c in components)
    if codomain_dim is None:
        codomain_dim = len(comps)
    return SmoothMap(domain_dim, codomain_dim, comps)


def identity_map(dim: int) -> SmoothMap:
    return SmoothMap(dim, dim, tuple(ex.var(i) for i in range(dim)))


def compose(outer: SmoothMap, inner: SmoothMap) -> SmoothMap:
    """outer after inner, by componentwise substitution."""
    if inner.codomain_dim != outer.domain_dim:
        raise DimensionMismatchError(
            f"cannot compose: inner codomain {inner.codomain_dim} != "
            f"outer domain {outer.domain_dim}")
    comps = tuple(ex.substitute(c, inner.components) for c in outer.components)
    return SmoothMap(inner.domain_dim, outer.codomain_dim, comps)


def jacobian(m: SmoothMap, at: Sequence) -> list[list[Scalar]]:
    """The codomain_dim x domain_dim matrix of partials evaluated at a point."""
    coords = [as_num(c) for c in at]
    if len(coords) != m.domain_dim:
        raise DimensionMismatchError(
            f"point has {len(coords)} coordinates, expected {m.domain_dim}")
    return [
        [Scalar(ex.evaluate(ex.differentiate(comp, j), coords))
         for j in range(m.domain_dim)]
        for comp in m.components
    ]


def is_affine_map(m: SmoothMap) -> bool:
    return all(ex.is_affine(c, m.domain_dim) for c in m.components)


def affine_parts(m: SmoothMap) -> tuple[list[Fraction], list[list[Fraction]]]:
    """Constant term and linear-part matrix of an affine map, exactly.

    Requires rational (or dyadic-float) coefficients; raises
    ``NotPolynomialError`` / ``DimensionMismatchError`` otherwise.
    """
    if not is_affine_map(m):
        raise DimensionMismatchError("map is not affine")
    consts: list[Fraction] = []
    matrix: list[list[Fraction]] = []
    for comp in m.components:
        coeffs = ex.polynomial_coeffs(comp, m.domain_dim)
        consts.append(coeffs.get((0,) * m.domain_dim, Fraction(0)))
        row = []
        for j in range(m.domain_dim):
            mono = tuple(1 if k == j else 0 for k in range(m.domain_dim))
            row.append(coeffs.get(mono, Fraction(0)))
        matrix.append(row)
    return consts, matrix


def maps_equal(a: SmoothMap, b: SmoothMap, *, seed: int = 0) -> ex.EqualityResult:
    """Componentwise equality of two maps with the same signature."""
    if (a.domain_dim, a.codomain_dim) != (b.domain_dim, b.codomain_dim):
        raise DimensionMismatchError("maps have different signatures")
    exact = True
    for ca, cb in zip(a.components, b.components):
        res = ex.expr_equal(ca, cb, a.domain_dim, seed=seed)
        if not res:
            return ex.EqualityResult(False, res.exact, seed)
        exact = exact and res.exact
    return ex.EqualityResult(True, exact, seed)


def check_defined(m: SmoothMap, *, seed: int = 0, samples: int = 8) -> None:
    """Sampling check that the components evaluate on the domain.

    Finds ``samples`` evaluable points; gives up (raising
    ``EvaluationError``) after 64 consecutive failed draws, which flags
    identically-undefined components such as division by zero.
    """
    rng = random.Random(seed)
    done = 0
    consecutive = 0
    while done < samples:
        point = [rng.uniform(-1.0, 1.0) for _ in range(m.domain_dim)]
        try:
            for comp in m.components:
                ex.evaluate(comp, point)
        except EvaluationError:
            consecutive += 1
            if consecutive > 64:
                raise EvaluationError(
                    "map is undefined on the sampled domain")
            continue
        consecutive = 0
        done += 1
