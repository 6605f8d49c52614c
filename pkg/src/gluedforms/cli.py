"""Command-line front end: one scene file, one command, one JSON report.

stdout carries only the report (JSON by default, a one-line summary with
--text); diagnostics go to stderr.  Exit codes: 0 success, 1 domain error
(incompatible forms, rank failure, ...), 2 parse or usage error.
"""

from __future__ import annotations

import argparse
import json
import re
import sys
from fractions import Fraction

from . import expr as ex
from .errors import (
    EvaluationError,
    ExprParseError,
    GluedFormsError,
    SceneError,
)
from .fibre import (
    Covector,
    GlueFibreElement,
    covector,
    fibre_at,
    fibre_oracle,
    glue_fibre_element,
    rho1,
    rho2,
)
from .forms import check_compatible, evaluate_on_plot, glue_forms
from .metric import (
    PieceMetric,
    check_metrics_compatible,
    glue_metric,
    gram_rank_at,
)
from .scalar import is_exact
from .scene import get_glued, parse_scene, resolve_form, resolve_metric
from .smoothmap import SmoothMap, check_defined
from .spaces import (
    GluedPoint,
    PieceTag,
    PointClass,
    canonicalize,
    classify_point,
    lift_point,
    plot as make_plot,
)

SCHEMA_VERSION = 1


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# Argument helpers

_POINT_RE = re.compile(r"^(P1|P2):\((.*)\)$")


def parse_point(text: str) -> GluedPoint:
    m = _POINT_RE.match(text.strip())
    if not m:
        raise UsageError(f"bad point {text!r}; expected P1:(c1,...) or P2:(c1,...)")
    tag = PieceTag(m.group(1))
    inner = m.group(2).strip()
    coords = tuple(_number(c) for c in inner.split(",")) if inner else ()
    return GluedPoint(tag, coords)


def _number(text: str) -> Fraction:
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError(f"bad number {text!r}") from exc


def parse_element_groups(text: str) -> list[list[Fraction]]:
    inner = text.strip()
    if inner.startswith("(") and inner.endswith(")"):
        inner = inner[1:-1]
    groups = []
    for group in inner.split(";"):
        group = group.strip()
        groups.append([_number(c) for c in group.split(",")] if group else [])
    return groups


def parse_plot_spec(space_decl, text: str, seed: int):
    parts = text.strip().split(":", 2)
    if len(parts) != 3:
        raise UsageError(
            f"bad plot {text!r}; expected TAG:DOMDIM:(e1,...,ed)")
    tag_text, dim_text, comps_text = parts
    if tag_text not in ("P1", "P2"):
        raise UsageError(f"bad plot tag {tag_text!r}")
    tag = PieceTag(tag_text)
    try:
        domain_dim = int(dim_text)
    except ValueError:
        raise UsageError(f"bad plot domain dimension {dim_text!r}")
    comps_text = comps_text.strip()
    if not (comps_text.startswith("(") and comps_text.endswith(")")):
        raise UsageError("plot components must be parenthesized")
    chunks = _split_commas(comps_text[1:-1])
    try:
        comps = tuple(ex.parse_expr(c, domain_dim) for c in chunks)
    except ExprParseError as err:
        raise UsageError(f"bad plot component: {err}")
    lift = SmoothMap(domain_dim, len(comps), comps)
    check_defined(lift, seed=seed)
    return make_plot(space_decl, tag, lift)


def _split_commas(text: str) -> list[str]:
    chunks = []
    depth = 0
    start = 0
    for i, ch in enumerate(text):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        elif ch == "," and depth == 0:
            chunks.append(text[start:i])
            start = i + 1
    chunks.append(text[start:])
    return [c for c in (chunk.strip() for chunk in chunks) if c]


# ---------------------------------------------------------------------------
# JSON encoding

def jnum(v):
    if isinstance(v, Fraction):
        if v.denominator == 1:
            return int(v)
        return f"{v.numerator}/{v.denominator}"
    return float(v)


def jpoint(pt: GluedPoint):
    return {"tag": pt.tag.value, "coords": [jnum(c) for c in pt.coords]}


def jcovector(c: Covector):
    return {
        "tag": c.tag.value,
        "point": [jnum(x) for x in c.point],
        "components": [jnum(s.value) for s in c.components],
    }


def jbasis_element(e):
    if isinstance(e, GlueFibreElement):
        return {"a1": jcovector(e.a1), "a2": jcovector(e.a2)}
    return jcovector(e)


def _form_strings(w) -> list[str]:
    return [ex.format_expr(c) for c in w.coeffs]


def _metric_exact(g: PieceMetric) -> bool:
    return not any(
        ex.has_transcendental(g.entry(i, j)) or ex.has_float_const(g.entry(i, j))
        for i in range(g.dim) for j in range(i, g.dim))


# ---------------------------------------------------------------------------
# Command handlers: each returns (inputs, result, mode)

def _cmd_check_compat(scene, ns):
    decl = get_glued(scene, ns.glued)
    w1 = resolve_form(scene, decl, ns.w1, 1)
    w2 = resolve_form(scene, decl, ns.w2, 2)
    res = check_compatible(decl.space, w1, w2, seed=ns.seed)
    return ([ns.glued, ns.w1, ns.w2],
            {"compatible": res.compatible, "mode": res.mode}, res.mode)


def _cmd_glue_form(scene, ns):
    decl = get_glued(scene, ns.glued)
    w1 = resolve_form(scene, decl, ns.w1, 1)
    w2 = resolve_form(scene, decl, ns.w2, 2)
    res = check_compatible(decl.space, w1, w2, seed=ns.seed)
    pair = glue_forms(decl.space, w1, w2, seed=ns.seed)
    result = {"verified": pair.verified,
              "w1": _form_strings(pair.w1), "w2": _form_strings(pair.w2)}
    return [ns.glued, ns.w1, ns.w2], result, res.mode


def _cmd_eval_form(scene, ns):
    decl = get_glued(scene, ns.glued)
    w1 = resolve_form(scene, decl, ns.w1, 1)
    w2 = resolve_form(scene, decl, ns.w2, 2)
    res = check_compatible(decl.space, w1, w2, seed=ns.seed)
    pair = glue_forms(decl.space, w1, w2, seed=ns.seed)
    p = parse_plot_spec(decl.space, ns.plot, ns.seed)
    out = evaluate_on_plot(pair, p)
    result = {"domain_dim": out.domain_dim, "coeffs": _form_strings(out)}
    return [ns.glued, ns.w1, ns.w2, ns.plot], result, res.mode


def _require_at(ns):
    if ns.at_kw != "at":
        raise UsageError(f"expected keyword 'at', got {ns.at_kw!r}")


def _cmd_fibre(scene, ns):
    _require_at(ns)
    decl = get_glued(scene, ns.glued)
    pt = parse_point(ns.point)
    desc = fibre_at(decl.space, pt)
    result = {
        "case": desc.case.value,
        "dim": desc.dim,
        "point": jpoint(desc.point),
        "basis": [jbasis_element(e) for e in desc.basis],
    }
    if desc.constraints is not None:
        result["constraints"] = [[jnum(v) for v in row] for row in desc.constraints]
    return [ns.glued, ns.point], result, "exact"


def _cmd_oracle(scene, ns):
    _require_at(ns)
    decl = get_glued(scene, ns.glued)
    pt = parse_point(ns.point)
    degree = ns.degree
    rest = list(ns.rest)
    if rest:
        if len(rest) != 2 or rest[0] != "degree":
            raise UsageError("trailing arguments must be: degree <D>")
        try:
            degree = int(rest[1])
        except ValueError:
            raise UsageError(f"bad degree {rest[1]!r}")
    dim = fibre_oracle(decl.space, pt, degree)
    return [ns.glued, ns.point], {"dim": dim, "degree": degree}, "exact"


def _cmd_rho(scene, ns):
    _require_at(ns)
    decl = get_glued(scene, ns.glued)
    if ns.side not in ("1", "2"):
        raise UsageError(f"side must be 1 or 2, got {ns.side!r}")
    side = int(ns.side)
    pt = parse_point(ns.point)
    groups = parse_element_groups(ns.element)
    space = decl.space
    cls = classify_point(space, pt)
    if cls == PointClass.GLUE_LOCUS:
        if len(groups) != 2:
            raise UsageError(
                "glue-locus elements need two component groups: (a1,..;a2,..)")
        elem = glue_fibre_element(space, pt, groups[0], groups[1])
        exact = True
    else:
        if len(groups) != 1:
            raise UsageError("interior elements have a single component group")
        canon = canonicalize(space, pt)
        elem = covector(canon.tag, canon.coords, groups[0])
        exact = all(s.exact for s in elem.components)
    value = rho1(space, elem) if side == 1 else rho2(space, elem)
    result = {"side": side, "value": jcovector(value)}
    return ([ns.glued, ns.side, ns.point, ns.element], result,
            "exact" if exact else "sampled")


def _cmd_check_metric_compat(scene, ns):
    decl = get_glued(scene, ns.glued)
    g1 = resolve_metric(scene, decl, ns.m1, 1)
    g2 = resolve_metric(scene, decl, ns.m2, 2)
    ok = check_metrics_compatible(decl.space, g1, g2, ns.samples, seed=ns.seed)
    mode = "exact" if _metric_exact(g1) and _metric_exact(g2) else "sampled"
    return ([ns.glued, ns.m1, ns.m2],
            {"compatible": ok, "samples": ns.samples}, mode)


def _cmd_glue_metric(scene, ns):
    decl = get_glued(scene, ns.glued)
    g1 = resolve_metric(scene, decl, ns.m1, 1)
    g2 = resolve_metric(scene, decl, ns.m2, 2)
    gm = glue_metric(decl.space, g1, g2, ns.samples, seed=ns.seed)
    mode = "exact" if _metric_exact(g1) and _metric_exact(g2) else "sampled"
    return ([ns.glued, ns.m1, ns.m2],
            {"compatible": gm.compatible, "rank_ok": True}, mode)


def _cmd_gram_rank(scene, ns):
    _require_at(ns)
    decl = get_glued(scene, ns.glued)
    g1 = resolve_metric(scene, decl, ns.m1, 1)
    g2 = resolve_metric(scene, decl, ns.m2, 2)
    pt = parse_point(ns.point)
    gm = glue_metric(decl.space, g1, g2, ns.samples, seed=ns.seed)
    desc = fibre_at(decl.space, pt)
    rank = gram_rank_at(gm, pt)
    mode = "exact" if _metric_exact(g1) and _metric_exact(g2) else "sampled"
    result = {"rank": rank, "dim": desc.dim, "case": desc.case.value}
    return [ns.glued, ns.m1, ns.m2, ns.point], result, mode


_HANDLERS = {
    "check-compat": _cmd_check_compat,
    "glue-form": _cmd_glue_form,
    "eval-form": _cmd_eval_form,
    "fibre": _cmd_fibre,
    "oracle": _cmd_oracle,
    "rho": _cmd_rho,
    "check-metric-compat": _cmd_check_metric_compat,
    "glue-metric": _cmd_glue_metric,
    "gram-rank": _cmd_gram_rank,
}


def _text_summary(command: str, result: dict, mode: str) -> str:
    if command == "check-compat":
        return f"compatible: {str(result['compatible']).lower()} ({mode})"
    if command == "glue-form":
        return (f"verified pair: w1 = ({', '.join(result['w1'])}), "
                f"w2 = ({', '.join(result['w2'])})")
    if command == "eval-form":
        return f"pulled form on R^{result['domain_dim']}: ({', '.join(result['coeffs'])})"
    if command == "fibre":
        return f"case {result['case']}, dim {result['dim']}"
    if command == "oracle":
        return f"oracle dim {result['dim']} (degree {result['degree']})"
    if command == "rho":
        comps = ", ".join(str(c) for c in result["value"]["components"])
        return f"rho{result['side']} -> ({comps})"
    if command == "check-metric-compat":
        return f"metrics compatible: {str(result['compatible']).lower()}"
    if command == "glue-metric":
        return (f"glued metric: compatible={str(result['compatible']).lower()} "
                f"rank_ok=true")
    if command == "gram-rank":
        return f"gram rank {result['rank']} (fibre dim {result['dim']})"
    return json.dumps(result)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0,
                        help="seed for all sampling (default 0)")
    common.add_argument("--degree", type=int, default=2,
                        help="default truncation degree for the oracle")
    common.add_argument("--samples", type=int, default=5,
                        help="sample count for metric checks")
    fmt = common.add_mutually_exclusive_group()
    fmt.add_argument("--json", dest="text", action="store_false", default=False,
                     help="JSON report on stdout (default)")
    fmt.add_argument("--text", dest="text", action="store_true",
                     help="human-readable summary instead of JSON")

    top = argparse.ArgumentParser(
        prog="gluedforms",
        description="Operations on 1-forms over glued Euclidean domains.")
    top.add_argument("scene", help="scene file with the declarations")
    sub = top.add_subparsers(dest="command", required=True)

    def add(name, *positionals, rest=False):
        p = sub.add_parser(name, parents=[common])
        for pos in positionals:
            p.add_argument(pos)
        if rest:
            p.add_argument("rest", nargs="*")
        return p

    add("check-compat", "glued", "w1", "w2")
    add("glue-form", "glued", "w1", "w2")
    add("eval-form", "glued", "w1", "w2", "plot")
    add("fibre", "glued", "at_kw", "point")
    add("oracle", "glued", "at_kw", "point", rest=True)
    add("rho", "glued", "side", "at_kw", "point", "element")
    add("check-metric-compat", "glued", "m1", "m2")
    add("glue-metric", "glued", "m1", "m2")
    add("gram-rank", "glued", "m1", "m2", "at_kw", "point")
    return top


def main(argv=None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2

    try:
        with open(ns.scene, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as err:
        print(f"error: cannot read scene file: {err}", file=sys.stderr)
        return 2

    try:
        scene = parse_scene(text)
    except (SceneError, ExprParseError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2

    handler = _HANDLERS[ns.command]
    try:
        inputs, result, mode = handler(scene, ns)
    except (UsageError, SceneError, ExprParseError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except GluedFormsError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1

    if ns.text:
        print(_text_summary(ns.command, result, mode))
    else:
        report = {
            "schema_version": SCHEMA_VERSION,
            "command": ns.command,
            "inputs": inputs,
            "result": result,
            "mode": mode,
            "seed": ns.seed,
        }
        print(json.dumps(report))
    return 0


if __name__ == "__main__":
    sys.exit(main())
