"""Construction scripts: a line-oriented language describing a pipeline.

::

    coeff Z
    base sg n=6 [product(S2,D4 as collar)] name=f0
    step thm2 k=1 kp=2 r0=2 name=f1
    step distinguish a=f0 b=f1
    step certify-thm3

Statements are separated by newlines or ``;``; ``#`` starts a comment.
Arguments are ``key=value`` pairs plus at most one bracketed manifold list.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Any

from .catalog import ManifoldExpr, ManifoldSyntaxError, format_manifold, parse_manifold
from .errors import ReebError, StepError
from .exact_algebra import CoefficientRing


class ParseError(ValueError):
    def __init__(self, message: str, line: int = 0, col: int = 0):
        self.message, self.line, self.col = message, line, col
        super().__init__(f"line {line}, column {col}: {message}")


class MissingBase(ParseError):
    def __init__(self, line: int = 1, col: int = 1):
        super().__init__("MissingBase: the script has no base statement", line, col)


# ---------------------------------------------------------------------------
# abstract syntax

@dataclass(frozen=True)
class Item:
    manifold: ManifoldExpr
    options: tuple = ()  # sorted (key, value)

    def get(self, key, default=None):
        return dict(self.options).get(key, default)


@dataclass(frozen=True)
class BaseSpec:
    kind: str
    args: tuple = ()
    items: tuple | None = None

    def get(self, key, default=None):
        return dict(self.args).get(key, default)


@dataclass(frozen=True)
class Statement:
    op: str
    args: tuple = ()
    items: tuple | None = None

    def get(self, key, default=None):
        return dict(self.args).get(key, default)


@dataclass(frozen=True)
class Script:
    coeff: CoefficientRing | None
    base: BaseSpec
    steps: tuple = ()

    def names(self) -> list[str]:
        out = [self.base.get("name")] + [s.get("name") for s in self.steps]
        return [x for x in out if x]


_INT, _BOOL, _NAME, _STR, _TUPLE, _KIND, _PARTNER = "int", "bool", "name", "str", "tuple", "kind", "partner"

BASE_SCHEMA = {
    "sg": ({"n"}, {"n": _INT, "name": _NAME}, True),
    "concentric": ({"n", "l"}, {"n": _INT, "l": _INT, "name": _NAME}, False),
    "disc": ({"n"}, {"n": _INT, "name": _NAME}, False),
}

STEP_SCHEMA = {
    "bubble": (set(), {"kind": _KIND, "disjoint": _BOOL, "name": _NAME}, True),
    "ms": (set(), {"kind": _KIND, "disjoint": _BOOL, "name": _NAME}, True),
    "thm2": ({"k", "kp", "r0"}, {"k": _INT, "kp": _INT, "r0": _INT, "c0": _STR, "name": _NAME}, False),
    "thm41": ({"kp", "r0"}, {"kp": _INT, "r0": _INT, "refined": _BOOL, "rprime": _INT, "c0": _STR,
                             "name": _NAME}, False),
    "thm42": ({"kp", "p", "rp"}, {"kp": _INT, "p": _INT, "rp": _INT, "refined": _BOOL, "c0": _STR,
                                  "name": _NAME}, False),
    "connsum": ({"with"}, {"with": _PARTNER, "name": _NAME}, False),
    "restrict-top": ({"rank"}, {"rank": _INT, "name": _NAME}, False),
    "window": ({"m"}, {"m": _INT, "sg": _BOOL}, False),
    "rank-doubling": (set(), {"m": _INT}, False),
    "distinguish": ({"a"}, {"a": _NAME, "b": _NAME, "bound": _INT}, False),
    "certify-thm3": (set(), {"bound": _INT}, False),
}

ITEM_SCHEMA = {"k": _INT, "a": _TUPLE, "c": _STR}
STATE_STEPS = {"bubble", "ms", "thm2", "thm41", "thm42", "connsum", "restrict-top"}


# ---------------------------------------------------------------------------
# lexing

_TOKEN = re.compile(r"""
    (?P<ws>[ \t\r]+) | (?P<comment>\#[^\n]*) | (?P<nl>\n) | (?P<semi>;)
  | (?P<str>"[^"\n]*") | (?P<int>-?\d+(?![A-Za-z_]))
  | (?P<word>[A-Za-z_][A-Za-z0-9_.:\-]*) | (?P<punct>[\[\](){},=])
""", re.VERBOSE)


@dataclass(frozen=True)
class _Tok:
    kind: str
    text: str
    pos: int
    line: int
    col: int


def _lex(text: str) -> list[list[_Tok]]:
    """Tokens grouped by statement."""
    statements, current = [], []
    line, line_start, pos, depth = 1, 0, 0, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        tok = _Tok(kind, m.group(), pos, line, pos - line_start + 1)
        pos = m.end()
        if kind == "nl":
            line, line_start = line + 1, pos
            if depth == 0 and current:
                statements.append(current)
                current = []
            continue
        if kind in ("ws", "comment"):
            continue
        if kind == "semi":
            if depth:
                raise ParseError("';' inside brackets", tok.line, tok.col)
            if current:
                statements.append(current)
                current = []
            continue
        if tok.text in "([{":
            depth += 1
        elif tok.text in ")]}":
            depth -= 1
            if depth < 0:
                raise ParseError(f"unbalanced {tok.text!r}", tok.line, tok.col)
        current.append(tok)
    if depth:
        raise ParseError("unclosed bracket at end of input", line, pos - line_start + 1)
    if current:
        statements.append(current)
    return statements


# ---------------------------------------------------------------------------
# parsing

class _Parser:
    def __init__(self, text: str, toks: list[_Tok]):
        self.text, self.toks, self.i = text, toks, 0

    def peek(self) -> _Tok | None:
        return self.toks[self.i] if self.i < len(self.toks) else None

    def next(self, what: str = "token") -> _Tok:
        tok = self.peek()
        if tok is None:
            last = self.toks[-1]
            raise ParseError(f"expected {what} at end of statement", last.line, last.col + len(last.text))
        self.i += 1
        return tok

    def expect(self, text: str) -> _Tok:
        tok = self.next(repr(text))
        if tok.text != text:
            raise ParseError(f"expected {text!r}, found {tok.text!r}", tok.line, tok.col)
        return tok

    def error(self, tok: _Tok, message: str):
        raise ParseError(message, tok.line, tok.col)

    # values -----------------------------------------------------------------
    def value(self, kind: str, key_tok: _Tok, ctx: dict):
        tok = self.next("value")
        if kind == _INT:
            if tok.kind != "int":
                self.error(tok, f"{key_tok.text} expects an integer")
            return int(tok.text)
        if kind == _BOOL:
            if tok.text not in ("true", "false"):
                self.error(tok, f"{key_tok.text} expects true or false")
            return tok.text == "true"
        if kind == _KIND:
            if tok.text not in ("S", "M"):
                self.error(tok, f"{key_tok.text} expects S or M")
            return tok.text
        if kind == _NAME:
            if tok.kind != "word" or tok.text in ("true", "false"):
                self.error(tok, f"{key_tok.text} expects a name")
            return tok.text
        if kind == _STR:
            if tok.kind != "str":
                self.error(tok, f"{key_tok.text} expects a quoted string")
            return tok.text[1:-1]
        if kind == _TUPLE:
            if tok.text != "(":
                self.error(tok, f"{key_tok.text} expects a tuple like (1,0)")
            out = []
            while True:
                t = self.next("integer")
                if t.text == ")" and not out:
                    return ()
                if t.kind != "int":
                    self.error(t, "tuple entries must be integers")
                out.append(int(t.text))
                sep = self.next("',' or ')'")
                if sep.text == ")":
                    return tuple(out)
                if sep.text != ",":
                    self.error(sep, "expected ',' or ')'")
        if kind == _PARTNER:
            if tok.kind == "word":
                return tok.text
            if tok.text != "(":
                self.error(tok, "with expects a name or a parenthesized base")
            kind_tok = self.next("base kind")
            spec = self.base_spec(kind_tok, closing=")", nested=True)
            self.expect(")")
            return spec
        raise AssertionError(kind)

    # manifold lists ---------------------------------------------------------
    def items(self, allow_discs: bool) -> tuple:
        open_tok = self.expect("[")
        items = []
        if self.peek() is not None and self.peek().text == "]":
            self.next()
            return ()
        while True:
            start = self.peek()
            if start is None:
                self.error(open_tok, "unclosed manifold list")
            depth = 0
            while True:
                tok = self.next("']'")
                if tok.text == "(":
                    depth += 1
                elif tok.text == ")":
                    depth -= 1
                elif depth == 0 and tok.text in (",", "]", "{"):
                    break
            end = tok.pos
            if end == start.pos:
                self.error(start, "empty manifold expression")
            src = self.text[start.pos:end]
            try:
                m = parse_manifold(src.strip(), allow_discs=allow_discs)
            except ManifoldSyntaxError as exc:
                raise ParseError(f"manifold expression: {exc}", start.line,
                                 start.col + exc.offset) from None
            options: tuple = ()
            if tok.text == "{":
                options, _ = self.keyvalues(ITEM_SCHEMA, closing="}", ctx={})
                self.expect("}")
                tok = self.next("',' or ']'")
            items.append(Item(m, options))
            if tok.text == "]":
                return tuple(items)
            if tok.text != ",":
                self.error(tok, "expected ',' or ']'")

    def keyvalues(self, schema: dict, closing: str | None, ctx: dict, allow_list: bool = False,
                  allow_discs: bool = False):
        args: dict[str, Any] = {}
        items = None
        while True:
            tok = self.peek()
            if tok is None or (closing and tok.text == closing):
                break
            if tok.text == "[":
                if not allow_list:
                    self.error(tok, "this statement takes no manifold list")
                if items is not None:
                    self.error(tok, "at most one manifold list")
                items = self.items(allow_discs)
                continue
            key = self.next()
            if key.kind != "word":
                self.error(key, f"expected key=value, found {key.text!r}")
            if key.text not in schema:
                self.error(key, f"unknown argument {key.text!r}")
            if key.text in args:
                self.error(key, f"duplicate argument {key.text!r}")
            self.expect("=")
            args[key.text] = self.value(schema[key.text], key, ctx)
        return tuple(sorted(args.items())), items

    def base_spec(self, kind_tok: _Tok, closing: str | None = None, nested: bool = False) -> BaseSpec:
        if kind_tok.text not in BASE_SCHEMA:
            self.error(kind_tok, f"unknown base kind {kind_tok.text!r}")
        required, schema, takes_list = BASE_SCHEMA[kind_tok.text]
        if nested:
            schema = {k: v for k, v in schema.items() if k != "name"}
            required = required - {"n"}
        args, items = self.keyvalues(schema, closing, {}, allow_list=takes_list, allow_discs=True)
        missing = required - dict(args).keys()
        if missing:
            self.error(kind_tok, f"base {kind_tok.text} needs {', '.join(sorted(missing))}")
        if takes_list and items is None:
            self.error(kind_tok, f"base {kind_tok.text} needs a manifold list")
        return BaseSpec(kind_tok.text, args, items)


def parse(text: str) -> Script:
    coeff = None
    base: BaseSpec | None = None
    steps: list[Statement] = []
    names: set[str] = set()
    for toks in _lex(text):
        p = _Parser(text, toks)
        head = p.next()
        if head.text == "coeff":
            if coeff is not None:
                p.error(head, "duplicate coeff statement")
            if base is not None:
                p.error(head, "coeff must precede the base")
            tok = p.next("coefficient ring")
            try:
                coeff = CoefficientRing.parse(tok.text)
            except ValueError as exc:
                p.error(tok, str(exc))
        elif head.text == "base":
            if base is not None:
                p.error(head, "exactly one base statement is allowed")
            base = p.base_spec(p.next("base kind"))
            _declare(base.get("name"), names, head)
        elif head.text == "step":
            if base is None:
                raise MissingBase(head.line, head.col)
            op = p.next("step kind")
            if op.text not in STEP_SCHEMA:
                p.error(op, f"unknown step {op.text!r}")
            required, schema, takes_list = STEP_SCHEMA[op.text]
            args, items = p.keyvalues(schema, None, {}, allow_list=takes_list)
            if takes_list and not items:
                p.error(op, f"step {op.text} needs a non-empty manifold list")
            missing = required - dict(args).keys()
            if missing:
                p.error(op, f"step {op.text} needs {', '.join(sorted(missing))}")
            st = Statement(op.text, args, items)
            for ref in ("a", "b", "with"):
                v = st.get(ref)
                if isinstance(v, str) and v not in names:
                    p.error(op, f"{ref}={v} refers to an undefined name")
            _declare(st.get("name"), names, head)
            steps.append(st)
        else:
            p.error(head, f"expected coeff, base or step, found {head.text!r}")
        if p.peek() is not None:
            p.error(p.peek(), f"unexpected {p.peek().text!r}")
    if base is None:
        raise MissingBase()
    return Script(coeff, base, tuple(steps))


def _declare(name, names: set, tok: _Tok):
    if name is None:
        return
    if name in names:
        raise ParseError(f"name {name!r} is already defined", tok.line, tok.col)
    names.add(name)


# ---------------------------------------------------------------------------
# printing

def _fmt_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, tuple):
        return "(" + ",".join(map(str, v)) + ")"
    if isinstance(v, BaseSpec):
        return "(" + _fmt_base(v) + ")"
    if isinstance(v, str) and re.fullmatch(r"[A-Za-z_][A-Za-z0-9_.:\-]*", v):
        return v
    return '"' + v + '"'


def _fmt_args(args: tuple, schema: dict) -> list[str]:
    out = []
    for key, v in sorted(args, key=lambda kv: list(schema).index(kv[0])):
        text = f'"{v}"' if schema[key] == _STR else _fmt_value(v)
        out.append(f"{key}={text}")
    return out


def _fmt_items(items: tuple) -> str:
    parts = []
    for it in items:
        s = format_manifold(it.manifold)
        if it.options:
            s += " {" + " ".join(_fmt_args(it.options, ITEM_SCHEMA)) + "}"
        parts.append(s)
    return "[" + ", ".join(parts) + "]"


def _fmt_base(b: BaseSpec) -> str:
    words = [b.kind]
    schema = BASE_SCHEMA[b.kind][1]
    args = _fmt_args(b.args, schema)
    named = [a for a in args if a.startswith("name=")]
    words += [a for a in args if not a.startswith("name=")]
    if b.items is not None:
        words.append(_fmt_items(b.items))
    return " ".join(words + named)


def print_script(script: Script) -> str:
    lines = []
    if script.coeff is not None:
        lines.append(f"coeff {script.coeff}")
    lines.append("base " + _fmt_base(script.base))
    for st in script.steps:
        schema = STEP_SCHEMA[st.op][1]
        words = ["step", st.op]
        if st.items is not None:
            words.append(_fmt_items(st.items))
        words += _fmt_args(st.args, schema)
        lines.append(" ".join(words))
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# evaluation

@dataclass
class Evaluation:
    script: Script
    state: Any
    states: dict = field(default_factory=dict)
    verdicts: list = field(default_factory=list)


def _build_base(spec: BaseSpec, n: int, ring: CoefficientRing):
    from .reeb_state import canonical_projection_base, concentric_spheres_base, special_generic_base

    n = spec.get("n", n)
    if spec.kind == "sg":
        return special_generic_base([it.manifold for it in spec.items], n, ring)
    if spec.kind == "concentric":
        return concentric_spheres_base(spec.get("l"), n, ring)
    return canonical_projection_base(n, ring)


def _generating_data(st: Statement):
    from .bubbling import GeneratingData, Ingredient

    ings = tuple(Ingredient(it.manifold, it.get("k"), it.get("c"), tuple(it.get("a", ())))
                 for it in st.items)
    return GeneratingData(ings, st.get("kind", "S"), st.get("disjoint", True))


def _apply_step(ev: Evaluation, index: int, st: Statement, ring: CoefficientRing):
    from . import bubbling as B
    from .distinguisher import distinguish, thm3_certificate
    from .graded_ring import Witness

    state = ev.state
    op = st.op
    if op == "bubble":
        return B.bubble_homology(state, _generating_data(st))
    if op == "ms":
        return B.ms_bubble_ring(state, _generating_data(st))
    if op == "thm2":
        return B.thm2_bubble(state, st.get("k"), st.get("kp"), st.get("r0"), st.get("c0"))
    if op == "thm41":
        return B.thm41_twisted_bubble(state, st.get("kp"), st.get("r0"), st.get("refined", False),
                                      st.get("rprime", 0), st.get("c0"))
    if op == "thm42":
        return B.thm42_bubble(state, st.get("kp"), st.get("p"), st.get("rp"), st.get("refined", False),
                              st.get("c0"))
    if op == "connsum":
        partner = st.get("with")
        other = ev.states[partner] if isinstance(partner, str) else _build_base(partner, state.n, ring)
        return B.connected_sum_states(other, state)
    if op == "restrict-top":
        return B.thm5_restrict_top(state, st.get("rank"))
    record = {"step": index, "op": op}
    if op == "window":
        alg = B.manifold_window(state, st.get("m"), st.get("sg", False))
        record.update(m=st.get("m"), special_generic=st.get("sg", False),
                      generators=[g.label for g in alg.generators],
                      products=len(alg.table))
    elif op == "rank-doubling":
        record.update(prediction=B.rank_doubling_prediction(state, st.get("m")))
    elif op == "distinguish":
        a = ev.states[st.get("a")]
        b = ev.states[st.get("b")] if st.get("b") else state
        v = distinguish(a, b, st.get("bound", 1))
        record.update(a=st.get("a"), b=st.get("b", "current"), verdict=type(v).__name__)
        if v:
            record.update(invariant=v.invariant, detail=v.detail)
        else:
            record.update(compared=list(v.compared))
    elif op == "certify-thm3":
        v = thm3_certificate(state, st.get("bound", 2))
        record.update(verdict=type(v).__name__)
        if v:
            record.update(witness=v.witness.describe(state.cohomology),
                          degrees=list(v.witness.degrees))
        else:
            record.update(reason=v.reason)
    ev.verdicts.append(record)
    return state


def evaluate(script: Script | str, coeff: CoefficientRing | None = None) -> Evaluation:
    """Run a script.  Engine errors are re-raised as :class:`StepError`
    carrying the statement index (0 for the base)."""
    if isinstance(script, str):
        script = parse(script)
    ring = coeff or script.coeff or CoefficientRing.Z()
    try:
        state = _build_base(script.base, script.base.get("n"), ring)
    except ReebError as exc:
        raise StepError(0, exc) from exc
    ev = Evaluation(script, state)
    if script.base.get("name"):
        ev.states[script.base.get("name")] = state
    for index, st in enumerate(script.steps, 1):
        try:
            ev.state = _apply_step(ev, index, st, ring)
        except ReebError as exc:
            raise StepError(index, exc) from exc
        if st.get("name") and st.op in STATE_STEPS:
            ev.states[st.get("name")] = ev.state
    return ev
