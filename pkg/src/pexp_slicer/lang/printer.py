"""Pretty printer whose output parses back to the same AST."""

from __future__ import annotations

from .exprs import format_arith, format_bool, format_fraction
from .syntax import Assign, Cond, Inst, PChoice, Prog, Skip, While

INDENT = "  "


def _fmt_exp(e) -> str:
    from ..expectation import format_expectation

    return format_expectation(e)


def _simple(p: Prog) -> bool:
    return len(p) == 1 and isinstance(p[0], (Skip, Assign))


def _block(p: Prog, depth: int) -> str:
    if _simple(p):
        return "{ " + format_inst(p[0], depth) + " }"
    inner = _lines(p, depth + 1)
    return "{\n" + inner + "\n" + INDENT * depth + "}"


def format_inst(i: Inst, depth: int = 0) -> str:
    if isinstance(i, Skip):
        return "skip"
    if isinstance(i, Assign):
        return f"{i.var} := {format_arith(i.expr)}"
    if isinstance(i, PChoice):
        return f"{_block(i.left, depth)} [{format_fraction(i.prob)}] {_block(i.right, depth)}"
    if isinstance(i, Cond):
        head = f"if ({format_bool(i.guard)}) {_block(i.then, depth)}"
        orelse = i.orelse
        if len(orelse) == 1 and isinstance(orelse[0], Cond):
            return head + " else " + format_inst(orelse[0], depth)
        if len(orelse) == 1 and isinstance(orelse[0], Skip):
            return head + " else { skip }"
        return head + " else " + _block(orelse, depth)
    if isinstance(i, While):
        anns = [f"@invariant{{{_fmt_exp(i.invariant)}}}"]
        t = i.total
        if t is not None:
            anns += [
                f"@terminates{{{format_bool(t.term)}}}",
                f"@variant{{{format_arith(t.variant)}}}",
                f"@bounds{{{t.lower}, {t.upper}}}",
                f"@eps{{{format_fraction(t.eps)}}}",
            ]
        body = _block(i.body, depth) if not _simple(i.body) else "{\n" + _lines(i.body, depth + 1) + "\n" + INDENT * depth + "}"
        return f"while ({format_bool(i.guard)}) {' '.join(anns)} do {body}"
    raise TypeError(f"not an instruction: {i!r}")


def _lines(p: Prog, depth: int) -> str:
    out = []
    n = len(p)
    for k, i in enumerate(p):
        text = INDENT * depth + format_inst(i, depth)
        if k < n - 1 and not isinstance(i, (Cond, While)):
            text += ";"
        out.append(text)
    return "\n".join(out)


def pretty_print(p: Prog) -> str:
    return _lines(p, 0)


def format_file(p: Prog, space, pre, post, mode) -> str:
    """A complete source file for ``parse_program``."""
    doms = "\n".join(
        f"  {name} in {{{', '.join(format_fraction(v) for v in d.values)}}};" for name, d in space.domains.items()
    )
    mode = getattr(mode, "value", mode)
    return (
        f"domains {{\n{doms}\n}}\n"
        f"spec {mode} pre{{ {_fmt_exp(pre)} }} post{{ {_fmt_exp(post)} }}\n"
        f"program {{\n{_lines(p, 1)}\n}}\n"
    )
