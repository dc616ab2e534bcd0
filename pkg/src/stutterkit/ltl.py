"""LTL syntax trees, parsing and negation normal form."""

from __future__ import annotations

import re

ATOM = "atom"
TRUE = "true"
FALSE = "false"
NOT = "not"
AND = "and"
OR = "or"
IMPLIES = "implies"
NEXT = "next"
UNTIL = "until"
RELEASE = "release"
EVENTUALLY = "eventually"
GLOBALLY = "globally"

UNARY = frozenset({NOT, NEXT, EVENTUALLY, GLOBALLY})
BINARY = frozenset({AND, OR, IMPLIES, UNTIL, RELEASE})
KINDS = UNARY | BINARY | {ATOM, TRUE, FALSE}

RESERVED = frozenset({"G", "F", "X", "U", "R", "W", "true", "false"})


class LtlFormula:
    """Immutable LTL syntax tree node.

    Nodes are structurally compared and hashed; the hash is computed once,
    so formulas are cheap to put in sets (the tableau relies on that).
    """

    __slots__ = ("kind", "name", "children", "_hash")

    def __init__(self, kind: str, children: tuple = (), name: str | None = None):
        if kind not in KINDS:
            raise ValueError(f"unknown node kind {kind!r}")
        if kind == ATOM:
            if not name:
                raise ValueError("atoms need a nonempty name")
            if children:
                raise ValueError("atoms have no children")
        elif kind in UNARY and len(children) != 1:
            raise ValueError(f"{kind} takes exactly one operand")
        elif kind in BINARY and len(children) != 2:
            raise ValueError(f"{kind} takes exactly two operands")
        elif kind in (TRUE, FALSE) and children:
            raise ValueError(f"{kind} has no operands")
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "name", name)
        object.__setattr__(self, "children", tuple(children))
        object.__setattr__(self, "_hash", hash((kind, name, self.children)))

    def __setattr__(self, key, value):
        raise AttributeError("LtlFormula is immutable")

    def __hash__(self):
        return self._hash

    def __eq__(self, other):
        if self is other:
            return True
        if not isinstance(other, LtlFormula) or self._hash != other._hash:
            return False
        return (self.kind, self.name, self.children) == (other.kind, other.name, other.children)

    def __reduce__(self):
        return (LtlFormula, (self.kind, self.children, self.name))

    def __repr__(self):
        return f"LtlFormula({to_string(self)!r})"

    def __str__(self):
        return to_string(self)

    @property
    def left(self) -> LtlFormula:
        return self.children[0]

    @property
    def right(self) -> LtlFormula:
        return self.children[1]


def atom(name: str) -> LtlFormula:
    return LtlFormula(ATOM, name=name)


T = LtlFormula(TRUE)
F_ = LtlFormula(FALSE)


def lnot(f):
    return LtlFormula(NOT, (f,))


def land(a, b):
    return LtlFormula(AND, (a, b))


def lor(a, b):
    return LtlFormula(OR, (a, b))


def implies(a, b):
    return LtlFormula(IMPLIES, (a, b))


def nxt(f):
    return LtlFormula(NEXT, (f,))


def until(a, b):
    return LtlFormula(UNTIL, (a, b))


def release(a, b):
    return LtlFormula(RELEASE, (a, b))


def eventually(f):
    return LtlFormula(EVENTUALLY, (f,))


def globally(f):
    return LtlFormula(GLOBALLY, (f,))


def weak_until(a, b):
    return lor(until(a, b), globally(a))


class LtlSyntaxError(ValueError):
    """Raised on malformed formula text; ``offset`` is a byte offset."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset


_TOKEN = re.compile(
    r"\s*(?:(?P<op><->|->|&&|\|\||[!~&|()])|(?P<ident>[a-zA-Z_][a-zA-Z0-9_]*))"
)


def _tokenize(text: str):
    data = text.encode("utf-8")
    # byte offsets differ from str offsets only for non-ASCII input
    tokens = []
    pos = 0
    while True:
        while pos < len(text) and text[pos].isspace():
            pos += 1
        if pos >= len(text):
            break
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise LtlSyntaxError(f"unknown token {text[pos]!r}", len(text[:pos].encode("utf-8")))
        start = m.start("op") if m.group("op") else m.start("ident")
        value = m.group("op") or m.group("ident")
        tokens.append((value, len(text[:start].encode("utf-8"))))
        pos = m.end()
    tokens.append(("<eof>", len(data)))
    return tokens


class _Parser:
    # precedence (loosest first): <-> , -> , || , && , U/R/W , unary
    def __init__(self, text):
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i][0]

    def offset(self):
        return self.tokens[self.i][1]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value):
        tok, off = self.take()
        if tok != value:
            raise LtlSyntaxError(f"expected {value!r}, found {tok!r}", off)

    def parse(self):
        f = self.equiv()
        if self.peek() != "<eof>":
            raise LtlSyntaxError(f"unexpected {self.peek()!r}", self.offset())
        return f

    def equiv(self):
        left = self.implication()
        while self.peek() == "<->":
            self.take()
            right = self.implication()
            left = land(implies(left, right), implies(right, left))
        return left

    def implication(self):
        left = self.disjunction()
        if self.peek() == "->":
            self.take()
            return implies(left, self.implication())
        return left

    def disjunction(self):
        left = self.conjunction()
        while self.peek() in ("||", "|"):
            self.take()
            left = lor(left, self.conjunction())
        return left

    def conjunction(self):
        left = self.binary_temporal()
        while self.peek() in ("&&", "&"):
            self.take()
            left = land(left, self.binary_temporal())
        return left

    def binary_temporal(self):
        left = self.unary()
        op = self.peek()
        if op in ("U", "R", "W"):
            self.take()
            right = self.binary_temporal()
            if op == "U":
                return until(left, right)
            if op == "R":
                return release(left, right)
            return weak_until(left, right)
        return left

    def unary(self):
        tok, off = self.tokens[self.i]
        if tok in ("!", "~"):
            self.take()
            return lnot(self.unary())
        if tok == "X":
            self.take()
            return nxt(self.unary())
        if tok == "F":
            self.take()
            return eventually(self.unary())
        if tok == "G":
            self.take()
            return globally(self.unary())
        if tok == "(":
            self.take()
            f = self.equiv()
            self.expect(")")
            return f
        if tok == "true":
            self.take()
            return T
        if tok == "false":
            self.take()
            return F_
        if tok in ("U", "R", "W"):
            raise LtlSyntaxError(f"binary operator {tok!r} needs a left operand", off)
        if tok == "<eof>":
            raise LtlSyntaxError("unexpected end of formula", off)
        if tok[0].isalpha() or tok[0] == "_":
            self.take()
            return atom(tok)
        raise LtlSyntaxError(f"unexpected {tok!r}", off)


def parse(text: str) -> LtlFormula:
    """Parse ``text`` into a syntax tree.

    Accepts ``! ~ && & || | -> <->`` plus ``X F G U R W``; ``a W b`` is
    rewritten to ``(a U b) || G a``.
    """
    return _Parser(text).parse()


def atoms(f: LtlFormula) -> frozenset[str]:
    out = set()
    stack = [f]
    while stack:
        g = stack.pop()
        if g.kind == ATOM:
            out.add(g.name)
        stack.extend(g.children)
    return frozenset(out)


def _nnf(f: LtlFormula, negate: bool) -> LtlFormula:
    k = f.kind
    if k == ATOM:
        return lnot(f) if negate else f
    if k == TRUE:
        return F_ if negate else T
    if k == FALSE:
        return T if negate else F_
    if k == NOT:
        return _nnf(f.left, not negate)
    if k == NEXT:
        return nxt(_nnf(f.left, negate))
    if k == EVENTUALLY:
        inner = _nnf(f.left, negate)
        return globally(inner) if negate else eventually(inner)
    if k == GLOBALLY:
        inner = _nnf(f.left, negate)
        return eventually(inner) if negate else globally(inner)
    if k == IMPLIES:
        # a -> b == !a || b
        a = _nnf(f.left, not negate)
        b = _nnf(f.right, negate)
        return land(a, b) if negate else lor(a, b)
    a = _nnf(f.left, negate)
    b = _nnf(f.right, negate)
    if k == AND:
        return lor(a, b) if negate else land(a, b)
    if k == OR:
        return land(a, b) if negate else lor(a, b)
    if k == UNTIL:
        return release(a, b) if negate else until(a, b)
    if k == RELEASE:
        return until(a, b) if negate else release(a, b)
    raise AssertionError(k)


def to_nnf(f: LtlFormula) -> LtlFormula:
    """Equivalent formula with negations pushed down to atoms."""
    return _nnf(f, False)


def negate_to_nnf(f: LtlFormula) -> LtlFormula:
    """NNF of ``!f``."""
    return _nnf(f, True)


def is_nnf(f: LtlFormula) -> bool:
    stack = [f]
    while stack:
        g = stack.pop()
        if g.kind == IMPLIES:
            return False
        if g.kind == NOT:
            if g.left.kind != ATOM:
                return False
            continue
        stack.extend(g.children)
    return True


def temporal_depth(f: LtlFormula) -> int:
    if f.kind in (ATOM, TRUE, FALSE):
        return 0
    sub = max(temporal_depth(c) for c in f.children)
    if f.kind in (NEXT, UNTIL, RELEASE, EVENTUALLY, GLOBALLY):
        return sub + 1
    return sub


_PREC = {IMPLIES: 1, OR: 2, AND: 3, UNTIL: 4, RELEASE: 4}
_SYM = {IMPLIES: "->", OR: "||", AND: "&&", UNTIL: "U", RELEASE: "R"}
_UN = {NOT: "!", NEXT: "X ", EVENTUALLY: "F ", GLOBALLY: "G "}


def to_string(f: LtlFormula) -> str:
    """Render with minimal parentheses; the output re-parses to ``f``."""

    def go(g, parent_prec, right_side):
        k = g.kind
        if k == ATOM:
            return g.name
        if k in (TRUE, FALSE):
            return k
        if k in _UN:
            return _UN[k] + go(g.left, 5, False)
        p = _PREC[k]
        right_assoc = k in (IMPLIES, UNTIL, RELEASE)
        s = (go(g.left, p + (1 if right_assoc else 0), False)
             + f" {_SYM[k]} " + go(g.right, p + (0 if right_assoc else 1), True))
        if p < parent_prec:
            return f"({s})"
        return s

    return go(f, 0, False)
