"""Scene files: named declarations of spaces, subsets, gluings, forms, metrics.

Line-oriented grammar, one declaration per ';'-terminated statement::

    space  <name> = R^<d>;
    subset <name> of <space> = param(<k> -> <d> : e1, ..., ed)
                               inverse(<d> -> <k> : e1, ..., ek);
    gluemap <name> : <subset> -> <space> = map(<k> -> <d2> : ...)
                                           image <subset> inverse(<k> -> <k> : ...);
    glued  <name> = glue(<space>, <space>, <gluemap>);
    form   <name> on <space> = e1 dx0 + e2 dx1 + ... ;   (or  = 0;)
    metric <name> on <space> = [[e11, ...], ...];

``#`` starts a comment.  Names are unique and must be declared before
use.  All structural invariants (affinity, inverse witnesses, symmetry)
are checked at parse time and reported with the failing declaration
named.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from . import expr as ex
from .errors import ExprParseError, GluedFormsError, SceneError
from .forms import OneForm
from .metric import PieceMetric, piece_metric
from .smoothmap import SmoothMap
from .spaces import (
    AffineSubset,
    EuclideanPiece,
    GluedSpace,
    GluingMap,
    PieceTag,
    affine_subset,
    gluing_map,
    make_glued_space,
)

_NAME_RE = re.compile(r"[A-Za-z_]\w*")
_INT_RE = re.compile(r"\d+")
_DX_RE = re.compile(r"dx(\d+)\s*$")


@dataclass(frozen=True)
class SubsetDecl:
    space: str
    param: SmoothMap
    left_inverse: SmoothMap


@dataclass(frozen=True)
class GluemapDecl:
    domain_subset: str
    domain_space: str
    target_space: str
    image_subset: str
    gluing: GluingMap


@dataclass(frozen=True)
class GluedDecl:
    space: GluedSpace
    space1: str
    space2: str


@dataclass(frozen=True)
class FormDecl:
    space: str
    coeffs: tuple[ex.Expr, ...]


@dataclass(frozen=True)
class MetricDecl:
    space: str
    rows: tuple[tuple[ex.Expr, ...], ...]


@dataclass
class Scene:
    spaces: dict[str, EuclideanPiece] = field(default_factory=dict)
    subsets: dict[str, SubsetDecl] = field(default_factory=dict)
    gluemaps: dict[str, GluemapDecl] = field(default_factory=dict)
    glueds: dict[str, GluedDecl] = field(default_factory=dict)
    forms: dict[str, FormDecl] = field(default_factory=dict)
    metrics: dict[str, MetricDecl] = field(default_factory=dict)
    order: list[tuple[str, str]] = field(default_factory=list)


class _Cursor:
    def __init__(self, text: str):
        # blank out comments, keeping offsets stable
        out = []
        in_comment = False
        for ch in text:
            if ch == "#":
                in_comment = True
            if ch == "\n":
                in_comment = False
            out.append(" " if in_comment and ch != "\n" else ch)
        self.text = "".join(out)
        self.pos = 0

    def line_col(self, pos: int) -> tuple[int, int]:
        line = self.text.count("\n", 0, pos) + 1
        last_nl = self.text.rfind("\n", 0, pos)
        return line, pos - last_nl

    def error(self, message: str, pos: int | None = None) -> SceneError:
        line, col = self.line_col(self.pos if pos is None else pos)
        return SceneError(message, line, col)

    def skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def at_end(self) -> bool:
        self.skip_ws()
        return self.pos >= len(self.text)

    def peek(self) -> str:
        self.skip_ws()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def take_name(self) -> str:
        self.skip_ws()
        m = _NAME_RE.match(self.text, self.pos)
        if not m:
            raise self.error("expected a name")
        self.pos = m.end()
        return m.group(0)

    def take_int(self) -> int:
        self.skip_ws()
        m = _INT_RE.match(self.text, self.pos)
        if not m:
            raise self.error("expected an integer")
        self.pos = m.end()
        return int(m.group(0))

    def take_char(self, ch: str):
        self.skip_ws()
        if self.pos >= len(self.text) or self.text[self.pos] != ch:
            raise self.error(f"expected {ch!r}")
        self.pos += 1

    def take_word(self, word: str):
        got = self.take_name()
        if got != word:
            raise self.error(f"expected {word!r}, got {got!r}")

    def take_arrow(self):
        self.skip_ws()
        if self.text.startswith("->", self.pos):
            self.pos += 2
        else:
            raise self.error("expected '->'")

    def mark(self) -> int:
        """Position of the next significant character."""
        self.skip_ws()
        return self.pos

    def take_until(self, stops: str) -> str:
        """Text up to an unnested stop character (not consumed)."""
        self.skip_ws()
        start = self.pos
        depth = 0
        while self.pos < len(self.text):
            ch = self.text[self.pos]
            if ch in "([":
                depth += 1
            elif ch in ")]":
                if depth == 0 and ch in stops:
                    return self.text[start:self.pos]
                depth -= 1
                if depth < 0:
                    raise self.error("unbalanced parentheses")
            elif depth == 0 and ch in stops:
                return self.text[start:self.pos]
            self.pos += 1
        raise self.error(f"expected one of {stops!r} before end of input", start)


def _split_top_level(text: str, seps: str) -> list[tuple[str, int]]:
    """Split on unnested separators; returns (chunk, offset) pairs."""
    chunks = []
    depth = 0
    start = 0
    for i, ch in enumerate(text):
        if ch in "([":
            depth += 1
        elif ch in ")]":
            depth -= 1
        elif depth == 0 and ch in seps:
            chunks.append((text[start:i], start))
            start = i + 1
    chunks.append((text[start:], start))
    return chunks


def parse_scene(text: str) -> Scene:
    cur = _Cursor(text)
    scene = Scene()
    declared: set[str] = set()

    def register(kind: str, name: str, pos: int):
        if name in declared:
            raise cur.error(f"name {name!r} was already declared", pos)
        declared.add(name)
        scene.order.append((kind, name))

    def lookup(table: dict, name: str, what: str, pos: int):
        if name not in table:
            raise cur.error(f"unresolved name: no {what} named {name!r}", pos)
        return table[name]

    while not cur.at_end():
        stmt_pos = cur.pos
        kind = cur.take_name()
        if kind == "space":
            name = cur.take_name()
            cur.take_char("=")
            cur.take_word("R")
            cur.take_char("^")
            dim = cur.take_int()
            cur.take_char(";")
            register("space", name, stmt_pos)
            scene.spaces[name] = EuclideanPiece(dim)
        elif kind == "subset":
            name = cur.take_name()
            cur.take_word("of")
            space_pos = cur.pos
            space_name = cur.take_name()
            piece = lookup(scene.spaces, space_name, "space", space_pos)
            cur.take_char("=")
            param = _parse_map_clause(cur, "param")
            left_inverse = _parse_map_clause(cur, "inverse")
            cur.take_char(";")
            if param.codomain_dim != piece.dim:
                raise cur.error(
                    f"subset {name!r}: chart lands in R^{param.codomain_dim} but "
                    f"{space_name} is R^{piece.dim}", stmt_pos)
            try:
                affine_subset(PieceTag.P1, param, left_inverse)
            except GluedFormsError as err:
                raise cur.error(f"subset {name!r}: {err}", stmt_pos)
            register("subset", name, stmt_pos)
            scene.subsets[name] = SubsetDecl(space_name, param, left_inverse)
        elif kind == "gluemap":
            name = cur.take_name()
            cur.take_char(":")
            dom_pos = cur.pos
            domain_name = cur.take_name()
            domain = lookup(scene.subsets, domain_name, "subset", dom_pos)
            cur.take_arrow()
            target_pos = cur.pos
            target_name = cur.take_name()
            lookup(scene.spaces, target_name, "space", target_pos)
            cur.take_char("=")
            map_on_params = _parse_map_clause(cur, "map")
            cur.take_word("image")
            img_pos = cur.pos
            image_name = cur.take_name()
            image = lookup(scene.subsets, image_name, "subset", img_pos)
            inverse_on_params = _parse_map_clause(cur, "inverse")
            cur.take_char(";")
            if image.space != target_name:
                raise cur.error(
                    f"gluemap {name!r}: image subset {image_name!r} lives in "
                    f"{image.space!r}, not in {target_name!r}", stmt_pos)
            try:
                dom_sub = affine_subset(PieceTag.P1, domain.param, domain.left_inverse)
                img_sub = affine_subset(PieceTag.P2, image.param, image.left_inverse)
                gluing = gluing_map(dom_sub, map_on_params, img_sub, inverse_on_params)
            except GluedFormsError as err:
                raise cur.error(f"gluemap {name!r}: {err}", stmt_pos)
            register("gluemap", name, stmt_pos)
            scene.gluemaps[name] = GluemapDecl(
                domain_name, domain.space, target_name, image_name, gluing)
        elif kind == "glued":
            name = cur.take_name()
            cur.take_char("=")
            cur.take_word("glue")
            cur.take_char("(")
            s1_pos = cur.pos
            space1 = cur.take_name()
            p1 = lookup(scene.spaces, space1, "space", s1_pos)
            cur.take_char(",")
            s2_pos = cur.pos
            space2 = cur.take_name()
            p2 = lookup(scene.spaces, space2, "space", s2_pos)
            cur.take_char(",")
            gm_pos = cur.pos
            gm_name = cur.take_name()
            gm = lookup(scene.gluemaps, gm_name, "gluemap", gm_pos)
            cur.take_char(")")
            cur.take_char(";")
            if gm.domain_space != space1:
                raise cur.error(
                    f"glued {name!r}: gluemap domain lives in {gm.domain_space!r}, "
                    f"not in {space1!r}", stmt_pos)
            if gm.target_space != space2:
                raise cur.error(
                    f"glued {name!r}: gluemap lands in {gm.target_space!r}, "
                    f"not in {space2!r}", stmt_pos)
            try:
                glued = make_glued_space(p1, p2, gm.gluing)
            except GluedFormsError as err:
                raise cur.error(f"glued {name!r}: {err}", stmt_pos)
            register("glued", name, stmt_pos)
            scene.glueds[name] = GluedDecl(glued, space1, space2)
        elif kind == "form":
            name = cur.take_name()
            cur.take_word("on")
            space_pos = cur.pos
            space_name = cur.take_name()
            piece = lookup(scene.spaces, space_name, "space", space_pos)
            cur.take_char("=")
            body_pos = cur.mark()
            body = cur.take_until(";")
            cur.take_char(";")
            coeffs = _parse_form_body(cur, body, body_pos, piece.dim, name)
            register("form", name, stmt_pos)
            scene.forms[name] = FormDecl(space_name, coeffs)
        elif kind == "metric":
            name = cur.take_name()
            cur.take_word("on")
            space_pos = cur.pos
            space_name = cur.take_name()
            piece = lookup(scene.spaces, space_name, "space", space_pos)
            cur.take_char("=")
            body_pos = cur.mark()
            body = cur.take_until(";")
            cur.take_char(";")
            rows = _parse_metric_body(cur, body, body_pos, piece.dim, name)
            try:
                piece_metric(PieceTag.P1, rows)
            except GluedFormsError as err:
                raise cur.error(f"metric {name!r}: {err}", stmt_pos)
            register("metric", name, stmt_pos)
            scene.metrics[name] = MetricDecl(space_name, tuple(tuple(r) for r in rows))
        else:
            raise cur.error(f"unknown declaration kind {kind!r}", stmt_pos)
    return scene


def _parse_map_clause(cur: _Cursor, keyword: str) -> SmoothMap:
    cur.take_word(keyword)
    cur.take_char("(")
    domain_dim = cur.take_int()
    cur.take_arrow()
    codomain_dim = cur.take_int()
    cur.take_char(":")
    body_pos = cur.mark()
    body = cur.take_until(")")
    cur.take_char(")")
    comps = []
    chunks = _split_top_level(body, ",") if body.strip() else []
    if codomain_dim == 0:
        if chunks and any(c.strip() for c, _ in chunks):
            raise cur.error(f"{keyword}: expected no components for codomain 0", body_pos)
        chunks = []
    if len(chunks) != codomain_dim:
        raise cur.error(
            f"{keyword}: expected {codomain_dim} components, got {len(chunks)}",
            body_pos)
    for chunk, off in chunks:
        comps.append(_parse_embedded_expr(cur, chunk, body_pos + off, domain_dim))
    return SmoothMap(domain_dim, codomain_dim, tuple(comps))


def _parse_embedded_expr(cur: _Cursor, text: str, pos: int, dim: int) -> ex.Expr:
    try:
        return ex.parse_expr(text, dim)
    except ExprParseError as err:
        raise cur.error(str(err), pos + err.offset)


def _parse_form_body(cur: _Cursor, body: str, body_pos: int, dim: int,
                     name: str) -> tuple[ex.Expr, ...]:
    coeffs: list[ex.Expr] = [ex.ZERO] * dim
    stripped = body.strip()
    if stripped == "0":
        return tuple(coeffs)
    # split into signed terms at top level; +/- separates terms only when
    # the previous significant character ends an operand (so x0^-2 stays whole)
    terms: list[tuple[str, str, int]] = []  # (sign, chunk, offset)
    depth = 0
    start = 0
    sign = "+"
    prev = ""
    for i, ch in enumerate(body):
        if ch in "([":
            depth += 1
        elif ch in ")]":
            depth -= 1
        elif (depth == 0 and ch in "+-"
              and (prev.isalnum() or prev in ")]")):
            terms.append((sign, body[start:i], start))
            sign = ch
            start = i + 1
        if not ch.isspace():
            prev = ch
    terms.append((sign, body[start:], start))
    for tsign, chunk, off in terms:
        m = _DX_RE.search(chunk)
        if not m:
            raise cur.error(
                f"form {name!r}: each term must end in dx<i>", body_pos + off)
        index = int(m.group(1))
        if index >= dim:
            raise cur.error(
                f"form {name!r}: dx{index} out of range for R^{dim}",
                body_pos + off + m.start())
        head = chunk[:m.start()].strip()
        if head.endswith("*"):
            head = head[:-1].strip()
        coeff = (ex.ONE if not head
                 else _parse_embedded_expr(cur, head, body_pos + off, dim))
        if tsign == "-":
            coeff = ex.sub(ex.ZERO, coeff) if head else ex.const(-1)
        coeffs[index] = ex.padd(coeffs[index], coeff)
    return tuple(coeffs)


def _parse_metric_body(cur: _Cursor, body: str, body_pos: int, dim: int,
                       name: str) -> list[list[ex.Expr]]:
    stripped = body.strip()
    if not (stripped.startswith("[") and stripped.endswith("]")):
        raise cur.error(f"metric {name!r}: expected [[...], ...]", body_pos)
    inner = stripped[1:-1]
    rows = []
    for chunk, off in _split_top_level(inner, ","):
        rchunk = chunk.strip()
        if not rchunk:
            continue
        if not (rchunk.startswith("[") and rchunk.endswith("]")):
            raise cur.error(f"metric {name!r}: expected a [...] row", body_pos + off)
        entries = []
        for echunk, eoff in _split_top_level(rchunk.strip()[1:-1], ","):
            entries.append(_parse_embedded_expr(cur, echunk, body_pos + off + eoff, dim))
        rows.append(entries)
    if len(rows) != dim or any(len(r) != dim for r in rows):
        raise cur.error(
            f"metric {name!r}: expected a {dim}x{dim} matrix", body_pos)
    return rows


# ---------------------------------------------------------------------------
# Resolution against a glued space (forms/metrics are declared per space;
# the side they play depends on which glued space a command targets)


def get_glued(scene: Scene, name: str) -> GluedDecl:
    if name not in scene.glueds:
        raise SceneError(f"unresolved name: no glued space named {name!r}", 0)
    return scene.glueds[name]


def resolve_form(scene: Scene, glued: GluedDecl, name: str, side: int) -> OneForm:
    if name not in scene.forms:
        raise SceneError(f"unresolved name: no form named {name!r}", 0)
    decl = scene.forms[name]
    expected = glued.space1 if side == 1 else glued.space2
    if decl.space != expected:
        raise SceneError(
            f"form {name!r} lives on {decl.space!r} but piece {side} is "
            f"{expected!r}", 0)
    tag = PieceTag.P1 if side == 1 else PieceTag.P2
    return OneForm(tag, decl.coeffs)


def resolve_metric(scene: Scene, glued: GluedDecl, name: str, side: int) -> PieceMetric:
    if name not in scene.metrics:
        raise SceneError(f"unresolved name: no metric named {name!r}", 0)
    decl = scene.metrics[name]
    expected = glued.space1 if side == 1 else glued.space2
    if decl.space != expected:
        raise SceneError(
            f"metric {name!r} lives on {decl.space!r} but piece {side} is "
            f"{expected!r}", 0)
    tag = PieceTag.P1 if side == 1 else PieceTag.P2
    return piece_metric(tag, [list(r) for r in decl.rows])
