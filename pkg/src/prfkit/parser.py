"""ASCII concrete syntax for terms.

Precedence, loosest first::

    F -> G                    conditional (non-associative)
    F + G, F -. G, F - G,     left-associative
    F (+) G, F (-) G
    F (x) G                   left-associative
    F G, F o G                composition (right-nested)
    F^n, F^#, F^#(a), F^+, F^-   postfix

Primaries: ``S``, ``c<n>``, ``pr[n,k]``, atom names, let-bound names,
``M[F]``, ``Ma[F; a]``, ``R[F, G]``, ``sub(F; G1, ..., Gm)``, ``J(F, G)``,
``|F - G|`` and parenthesised expressions.

A let-file is a sequence of ``let NAME = expr ;`` with ``#`` line comments.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping

from . import oracle
from .terms import (
    Atom,
    Compose,
    Const,
    Derived,
    Macro,
    MixedIter,
    MixedIterA,
    OpAdd,
    OpAmbMinus,
    OpDist,
    OpMonus,
    OpPairJ,
    OpPlus,
    Power,
    PrimRec,
    Proj,
    PureIter,
    PureIterA,
    Subst,
    Succ,
    Term,
    arity,
)


class SyntaxError_(Exception):
    def __init__(self, position: int, expectation: str, src: str = ""):
        snippet = src[position : position + 20] if src else ""
        super().__init__(f"at {position}: expected {expectation}" + (f" near {snippet!r}" if snippet else ""))
        self.position = position
        self.expectation = expectation


# exported under the name used in the docs; the trailing underscore keeps the
# builtin SyntaxError usable inside this module
ParseError = SyntaxError_

RESERVED = {"S", "o", "x", "let", "M", "Ma", "R", "J", "sub", "pr"}
# reserved words a let-file may bind; bare uses then resolve to the binding
REBINDABLE = {"S", "R"}

_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<pow>\^\d+)
  | (?P<itera>\^\#\(\d+\))
  | (?P<iter>\^\#)
  | (?P<plus_post>\^\+)
  | (?P<minus_post>\^-)
  | (?P<comment>\#[^\n]*)
  | (?P<oplus>\(\+\))
  | (?P<ominus>\(-\))
  | (?P<otimes>\(x\))
  | (?P<cond>->)
  | (?P<monus>-\.)
  | (?P<minus>-)
  | (?P<plus>\+)
  | (?P<num>\d+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<punct>[()\[\],;=|])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    type: str
    text: str
    pos: int
    adjacent: bool  # no whitespace between this token and the previous one


def tokenize(src: str) -> list[Token]:
    out: list[Token] = []
    pos = 0
    gap = True
    while pos < len(src):
        m = _TOKEN.match(src, pos)
        if m is None:
            raise ParseError(pos, "a token", src)
        kind = m.lastgroup
        text = m.group()
        if kind in ("ws", "comment"):
            gap = True
        else:
            if kind == "punct":
                kind = text
            out.append(Token(kind, text, pos, not gap))
            gap = False
        pos = m.end()
    out.append(Token("eof", "", len(src), False))
    return out


_CONST = re.compile(r"c(\d+)$")

_SUM_OPS = {"plus", "monus", "minus", "oplus", "ominus"}


class _Parser:
    def __init__(self, src: str, env: Mapping[str, Term] | None):
        self.src = src
        self.toks = tokenize(src)
        self.i = 0
        self.env = env or {}
        self.bars = 0

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def advance(self) -> Token:
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, type_: str, what: str | None = None) -> Token:
        if self.tok.type != type_:
            raise ParseError(self.tok.pos, what or repr(type_), self.src)
        return self.advance()

    def number(self) -> int:
        return int(self.expect("num", "a number").text)

    # grammar -----------------------------------------------------------------

    def cond(self) -> Term:
        left = self.sum()
        if self.tok.type == "cond":
            self.advance()
            right = self.sum()
            return Macro("cond", (left, right))
        return left

    def sum(self) -> Term:
        left = self.prod()
        while self.tok.type in _SUM_OPS:
            op = self.advance().type
            right = self.prod()
            if op == "plus":
                left = OpAdd(left, right)
            elif op == "monus":
                left = OpMonus(left, right)
            elif op == "minus":
                left = OpAmbMinus(left, right)
            else:
                left = Macro(op, (left, right))
        return left

    def prod(self) -> Term:
        left = self.comp()
        while self.tok.type == "otimes":
            self.advance()
            left = Macro("otimes", (left, self.comp()))
        return left

    def _starts_primary(self) -> bool:
        t = self.tok
        if t.type in ("ident", "("):
            return True
        return t.type == "|" and self.bars == 0

    def comp(self) -> Term:
        parts = [self.post()]
        while True:
            if self.tok.type == "ident" and self.tok.text == "o":
                self.advance()
                parts.append(self.post())
            elif self._starts_primary():
                parts.append(self.post())
            else:
                break
        t = parts[-1]
        for f in reversed(parts[:-1]):
            t = Compose(f, t)
        return t

    def post(self) -> Term:
        t = self.primary()
        while True:
            ty = self.tok.type
            if ty == "pow":
                t = Power(t, int(self.advance().text[1:]))
            elif ty == "iter":
                self.advance()
                t = PureIter(t)
            elif ty == "itera":
                t = PureIterA(t, int(self.advance().text[3:-1]))
            elif ty == "plus_post":
                self.advance()
                t = OpPlus(t)
            elif ty == "minus_post":
                self.advance()
                t = Macro("minus", (t,))
            else:
                return t

    def _form(self, opener: str) -> bool:
        nxt = self.peek()
        return nxt.type == opener and nxt.adjacent

    def primary(self) -> Term:
        t = self.tok
        if t.type == "(":
            self.advance()
            saved, self.bars = self.bars, 0
            e = self.cond()
            self.bars = saved
            self.expect(")")
            return e
        if t.type == "|":
            self.advance()
            self.bars += 1
            e = self.sum()
            self.bars -= 1
            self.expect("|", "closing '|'")
            if not isinstance(e, OpAmbMinus):
                raise ParseError(t.pos, "'|F - G|'", self.src)
            return OpDist(e.f, e.g)
        if t.type != "ident":
            raise ParseError(t.pos, "a function expression", self.src)
        name = t.text
        if name == "M" and self._form("["):
            self.advance()
            self.advance()
            h = self.cond()
            self.expect("]")
            return MixedIter(h)
        if name == "Ma" and self._form("["):
            self.advance()
            self.advance()
            h = self.cond()
            self.expect(";")
            a = self.number()
            self.expect("]")
            return MixedIterA(h, a)
        if name == "R" and self._form("["):
            self.advance()
            self.advance()
            f = self.cond()
            self.expect(",")
            g = self.cond()
            self.expect("]")
            return PrimRec(f, g)
        if name == "pr" and self._form("["):
            self.advance()
            self.advance()
            n = self.number()
            self.expect(",")
            k = self.number()
            self.expect("]")
            return Proj(n, k)
        if name == "sub" and self._form("("):
            self.advance()
            self.advance()
            f = self.cond()
            self.expect(";")
            gs = [self.cond()]
            while self.tok.type == ",":
                self.advance()
                gs.append(self.cond())
            self.expect(")")
            return Subst(f, tuple(gs))
        if name == "J" and self._form("("):
            self.advance()
            self.advance()
            f = self.cond()
            self.expect(",")
            g = self.cond()
            self.expect(")")
            return OpPairJ(f, g)
        self.advance()
        if name == "S":
            # a section may rebind the successor (e.g. S = c1^+)
            return self.env.get("S") or Succ()
        m = _CONST.match(name)
        if m:
            return Const(int(m.group(1)))
        if name in self.env:
            return self.env[name]
        if name in RESERVED:
            raise ParseError(t.pos, f"an expression ({name!r} is reserved)", self.src)
        if oracle.is_known(name):
            return Atom(name)
        raise ParseError(t.pos, f"a known name (got {name!r})", self.src)


def parse(src: str, env: Mapping[str, Term] | None = None, check: bool = True) -> Term:
    """Parse one expression.  Names in ``env`` shadow registered atoms."""
    p = _Parser(src, env)
    t = p.cond()
    if p.tok.type != "eof":
        raise ParseError(p.tok.pos, "end of input", src)
    if check:
        arity(t)
    return t


@dataclass(frozen=True)
class LetBinding:
    name: str
    source: str
    term: Term


_NAME = re.compile(r"[A-Za-z_][A-Za-z0-9_]*$")


def parse_lets(
    text: str,
    env: Mapping[str, Term] | None = None,
    resolve: Callable[[str, Term], Term] | None = None,
) -> list[LetBinding]:
    """Parse a let-file.

    Each body is parsed in the environment of the earlier bindings; a name is
    therefore never visible to its own body.  ``resolve(name, term)`` maps a
    freshly parsed body to the term that later bodies will see (by default
    the body itself, i.e. plain textual expansion).
    """
    scope: dict[str, Term] = dict(env or {})
    out: list[LetBinding] = []
    toks = tokenize(text)
    i = 0
    while toks[i].type != "eof":
        t = toks[i]
        if t.type != "ident" or t.text != "let":
            raise ParseError(t.pos, "'let'", text)
        name_tok = toks[i + 1]
        if name_tok.type != "ident" or (name_tok.text in RESERVED - REBINDABLE) or _CONST.match(name_tok.text):
            raise ParseError(name_tok.pos, "a binding name", text)
        if toks[i + 2].type != "=":
            raise ParseError(toks[i + 2].pos, "'='", text)
        start = toks[i + 3].pos
        j = i + 3
        depth = 0
        while toks[j].type != "eof" and not (toks[j].type == ";" and depth == 0):
            if toks[j].type in ("(", "["):
                depth += 1
            elif toks[j].type in (")", "]"):
                depth -= 1
            j += 1
        if toks[j].type != ";":
            raise ParseError(toks[j].pos, "';'", text)
        body = text[start : toks[j].pos].strip()
        try:
            term = parse(body, scope)
        except ParseError as e:
            raise ParseError(start + e.position, e.expectation, text) from None
        name = name_tok.text
        if name in scope and (env is None or name not in env):
            raise ParseError(name_tok.pos, f"a fresh name ({name!r} already bound)", text)
        bound = resolve(name, term) if resolve else term
        scope[name] = bound
        out.append(LetBinding(name, body, term))
        i = j + 1
    return out


# -- rendering ------------------------------------------------------------------

COND, SUM, PROD, COMP, POST, PRIM = range(6)


def _level(t: Term) -> int:
    k = t.kind
    if k in ("OpAdd", "OpMonus", "OpAmbMinus"):
        return SUM
    if k == "Macro":
        return {"cond": COND, "otimes": PROD, "minus": POST}.get(t.op, SUM)
    if k == "Compose":
        return COMP
    if k in ("PureIter", "PureIterA", "Power", "OpPlus"):
        return POST
    return PRIM


_SUM_TEXT = {"OpAdd": "+", "OpMonus": "-.", "OpAmbMinus": "-", "oplus": "(+)", "ominus": "(-)"}


def ref_name(t: Term) -> str | None:
    """Display name of a catalog reference node, if ``t`` is one."""
    if isinstance(t, Derived) and t.label.startswith("ref:"):
        return t.label.rsplit("/", 1)[-1]
    return None


class _Renderer:
    def __init__(self, names: Mapping[str, Term] | None):
        self.by_term: dict[Term, str] = {}
        for n, t in (names or {}).items():
            self.by_term.setdefault(t, n)
        self.use_refs = names is not None

    def wrap(self, t: Term, need: int, bar: bool) -> str:
        if t in self.by_term:
            return self.by_term[t]
        if isinstance(t, Derived):
            name = ref_name(t)
            if name is not None and self.use_refs:
                return name
            return self.wrap(t.shallow, need, bar)
        if _level(t) < need:
            return "(" + self.go(t, False) + ")"
        return self.go(t, bar)

    def go(self, t: Term, bar: bool) -> str:
        k = t.kind
        if k == "Succ":
            return "S"
        if k == "Const":
            return f"c{t.n}"
        if k == "Proj":
            return f"pr[{t.n},{t.k}]"
        if k == "Atom":
            return t.name
        if k in ("OpAdd", "OpMonus", "OpAmbMinus"):
            return f"{self.wrap(t.f, SUM, bar)} {_SUM_TEXT[k]} {self.wrap(t.g, PROD, bar)}"
        if k == "OpDist":
            return f"|{self.wrap(t.f, SUM, True)} - {self.wrap(t.g, PROD, True)}|"
        if k == "OpPairJ":
            return f"J({self.wrap(t.f, COND, False)}, {self.wrap(t.g, COND, False)})"
        if k == "Macro":
            a = t.args
            if t.op == "cond":
                return f"{self.wrap(a[0], SUM, bar)} -> {self.wrap(a[1], SUM, bar)}"
            if t.op == "otimes":
                return f"{self.wrap(a[0], PROD, bar)} (x) {self.wrap(a[1], COMP, bar)}"
            if t.op == "minus":
                return f"{self.wrap(a[0], POST, bar)}^-"
            return f"{self.wrap(a[0], SUM, bar)} {_SUM_TEXT[t.op]} {self.wrap(a[1], PROD, bar)}"
        if k == "Compose":
            head = self.wrap(t.f, POST, bar)
            rest = self.wrap(t.g, COMP, bar)
            if bar and rest.startswith("|"):
                rest = "(" + self.go(t.g, False) + ")"
            return f"{head} {rest}"
        if k == "PureIter":
            return self.wrap(t.f, POST, bar) + "^#"
        if k == "PureIterA":
            return self.wrap(t.f, POST, bar) + f"^#({t.a})"
        if k == "Power":
            return self.wrap(t.f, POST, bar) + f"^{t.n}"
        if k == "OpPlus":
            return self.wrap(t.f, POST, bar) + "^+"
        if k == "MixedIter":
            return f"M[{self.wrap(t.h, COND, False)}]"
        if k == "MixedIterA":
            return f"Ma[{self.wrap(t.h, COND, False)}; {t.a}]"
        if k == "PrimRec":
            return f"R[{self.wrap(t.f, COND, False)}, {self.wrap(t.g, COND, False)}]"
        if k == "Subst":
            gs = ", ".join(self.wrap(g, COND, False) for g in t.gs)
            return f"sub({self.wrap(t.f, COND, False)}; {gs})"
        if k == "Derived":
            return self.wrap(t, PRIM, bar)
        raise TypeError(f"cannot render {t!r}")


def render(t: Term, names: Mapping[str, Term] | None = None) -> str:
    """Canonical text for ``t``.

    With ``names``, any subterm equal to a bound term is printed as its name,
    and catalog references print as their short names.
    """
    return _Renderer(names).wrap(t, COND, False)


def render_lets(bindings: Iterable[tuple[str, Term]]) -> str:
    """Emit a let-file; each body refers to earlier names where possible."""
    lines = []
    scope: dict[str, Term] = {}
    for name, t in bindings:
        lines.append(f"let {name} = {render(t, scope)};")
        scope[name] = t
    return "\n".join(lines) + "\n"
