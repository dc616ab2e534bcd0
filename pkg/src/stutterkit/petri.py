"""Place/transition nets, marking predicates and the pre/post agglomeration
reductions."""

from __future__ import annotations

import re
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field

__all__ = [
    "NetSyntaxError", "AgglomerationError", "Predicate", "PropertyBinding", "PetriNet",
    "parse_net", "parse_text_net", "parse_pnml", "parse_predicate", "format_net",
    "support_and_invisibles", "agglomeration_conditions", "find_agglomerations",
    "agglomerate", "reduce_fixpoint", "ReductionStats",
]


class NetSyntaxError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(message if line is None else f"line {line}: {message}")


class AgglomerationError(ValueError):
    def __init__(self, place: str, kind: str, failed: list[str]):
        self.place = place
        self.kind = kind
        self.failed = failed
        super().__init__(f"cannot {kind}-agglomerate {place!r}: " + ", ".join(failed))


# --------------------------------------------------------------------------
# predicates


_OPS = {
    "<": lambda x: x < 0,
    "<=": lambda x: x <= 0,
    "=": lambda x: x == 0,
    ">=": lambda x: x >= 0,
    ">": lambda x: x > 0,
}


@dataclass(frozen=True)
class Predicate:
    """Boolean combination of comparisons ``sum(coef * m(place)) + const OP 0``."""

    kind: str  # "cmp", "and", "or", "not", "const"
    coeffs: tuple = ()  # ((place, coef), ...) sorted, zero coefficients dropped
    const: int = 0
    op: str = ""
    children: tuple = ()
    value: bool = False

    def places(self) -> frozenset:
        if self.kind == "cmp":
            return frozenset(p for p, _ in self.coeffs)
        out = frozenset()
        for c in self.children:
            out |= c.places()
        return out

    def evaluate(self, marking, index: dict) -> bool:
        k = self.kind
        if k == "cmp":
            total = self.const
            for p, c in self.coeffs:
                total += c * marking[index[p]]
            return _OPS[self.op](total)
        if k == "and":
            return all(c.evaluate(marking, index) for c in self.children)
        if k == "or":
            return any(c.evaluate(marking, index) for c in self.children)
        if k == "not":
            return not self.children[0].evaluate(marking, index)
        return self.value

    def __str__(self):
        k = self.kind
        if k == "cmp":
            terms = [(f"m({p})" if c == 1 else f"{c}*m({p})") for p, c in self.coeffs]
            lhs = " + ".join(terms) if terms else "0"
            return f"{lhs} {self.op} {-self.const}"
        if k == "and":
            return "(" + " && ".join(map(str, self.children)) + ")"
        if k == "or":
            return "(" + " || ".join(map(str, self.children)) + ")"
        if k == "not":
            return f"!{self.children[0]}"
        return "true" if self.value else "false"


_EXPR_TOKEN = re.compile(r"\s*(?:(<=|>=|&&|\|\||[<>=!()+*-])|(\d+)|(m\s*\(\s*[^)\s]+\s*\))|(true|false)|(\S))")


def _expr_tokens(text: str) -> list:
    out = []
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        m = _EXPR_TOKEN.match(text, pos)
        if m is None:
            break
        op, num, mref, lit, bad = m.groups()
        if bad is not None:
            raise NetSyntaxError(f"unexpected {bad!r} in predicate {text!r}")
        if op:
            out.append(op)
        elif num:
            out.append(int(num))
        elif mref:
            out.append(("m", mref[mref.index("(") + 1:-1].strip()))
        else:
            out.append(lit == "true")
        pos = m.end()
    return out


def parse_predicate(text: str, places=None) -> Predicate:
    """Parse a marking predicate; ``places`` (if given) must contain every
    referenced place."""
    toks = _expr_tokens(text)
    pos = 0

    def peek():
        return toks[pos] if pos < len(toks) else None

    def take():
        nonlocal pos
        t = toks[pos]
        pos += 1
        return t

    def fail(msg):
        raise NetSyntaxError(f"{msg} in predicate {text!r}")

    def disj():
        kids = [conj()]
        while peek() == "||":
            take()
            kids.append(conj())
        return kids[0] if len(kids) == 1 else Predicate("or", children=tuple(kids))

    def conj():
        kids = [unary()]
        while peek() == "&&":
            take()
            kids.append(unary())
        return kids[0] if len(kids) == 1 else Predicate("and", children=tuple(kids))

    def unary():
        t = peek()
        if t == "!":
            take()
            return Predicate("not", children=(unary(),))
        if isinstance(t, bool):
            take()
            return Predicate("const", value=t)
        if t == "(":
            # either a parenthesized predicate or a parenthesized sum
            save = pos
            take()
            try:
                inner = disj()
                if peek() == ")":
                    take()
                    if peek() not in _OPS:
                        return inner
            except NetSyntaxError:
                pass
            _rewind(save)
        return comparison()

    def _rewind(p):
        nonlocal pos
        pos = p

    def comparison():
        lhs, lc = linear()
        op = peek()
        if op not in _OPS:
            fail("expected a comparison")
        take()
        rhs, rc = linear()
        coeffs = dict(lhs)
        for p, c in rhs.items():
            coeffs[p] = coeffs.get(p, 0) - c
        kept = tuple(sorted((p, c) for p, c in coeffs.items() if c != 0))
        return Predicate("cmp", coeffs=kept, const=lc - rc, op=op)

    def linear():
        coeffs = {}
        const = 0
        sign = 1
        if peek() == "-":
            take()
            sign = -1
        while True:
            t = peek()
            if t == "(":
                take()
                inner, ic = linear()
                if peek() != ")":
                    fail("missing ')'")
                take()
                for p, c in inner.items():
                    coeffs[p] = coeffs.get(p, 0) + sign * c
                const += sign * ic
            elif isinstance(t, int) and not isinstance(t, bool):
                take()
                if peek() == "*":
                    take()
                    ref = peek()
                    if not (isinstance(ref, tuple) and ref[0] == "m"):
                        fail("expected m(PLACE) after '*'")
                    take()
                    coeffs[ref[1]] = coeffs.get(ref[1], 0) + sign * t
                else:
                    const += sign * t
            elif isinstance(t, tuple):
                take()
                coeffs[t[1]] = coeffs.get(t[1], 0) + sign
            else:
                fail("expected a number or m(PLACE)")
            if peek() == "+":
                take()
                sign = 1
            elif peek() == "-":
                take()
                sign = -1
            else:
                return coeffs, const

    if not toks:
        fail("empty expression")
    pred = disj()
    if pos != len(toks):
        fail(f"trailing {toks[pos]!r}")
    if places is not None:
        for p in sorted(pred.places()):
            if p not in places:
                raise NetSyntaxError(f"undeclared place {p!r}")
    return pred


@dataclass(frozen=True)
class PropertyBinding:
    """Atom name to marking predicate."""

    atoms: dict = field(default_factory=dict)

    def names(self) -> tuple:
        return tuple(sorted(self.atoms))

    def restrict(self, names) -> PropertyBinding:
        missing = [n for n in names if n not in self.atoms]
        if missing:
            raise KeyError(f"atoms without a definition: {', '.join(sorted(missing))}")
        return PropertyBinding({n: self.atoms[n] for n in names})

    def with_atom(self, name: str, pred: Predicate) -> PropertyBinding:
        d = dict(self.atoms)
        d[name] = pred
        return PropertyBinding(d)

    def support(self) -> frozenset:
        out = frozenset()
        for p in self.atoms.values():
            out |= p.places()
        return out

    def valuation(self, marking, index: dict, order=None) -> int:
        """Letter index of a marking: bit j set iff atom ``order[j]`` holds."""
        order = self.names() if order is None else order
        v = 0
        for j, n in enumerate(order):
            if self.atoms[n].evaluate(marking, index):
                v |= 1 << j
        return v


# --------------------------------------------------------------------------
# nets


@dataclass(frozen=True)
class PetriNet:
    places: tuple
    transitions: tuple
    w_minus: tuple  # w_minus[p][t]
    w_plus: tuple
    m0: tuple

    def __post_init__(self):
        np_, nt = len(self.places), len(self.transitions)
        if len(set(self.places)) != np_:
            raise ValueError("duplicate place names")
        if len(set(self.transitions)) != nt:
            raise ValueError("duplicate transition names")
        for mat in (self.w_minus, self.w_plus):
            if len(mat) != np_ or any(len(row) != nt for row in mat):
                raise ValueError("incidence matrix does not match places x transitions")
            if any(w < 0 for row in mat for w in row):
                raise ValueError("negative arc weight")
        if len(self.m0) != np_ or any(x < 0 for x in self.m0):
            raise ValueError("initial marking must be a nonnegative vector over the places")

    @property
    def place_index(self) -> dict:
        return {p: i for i, p in enumerate(self.places)}

    def pre_set_t(self, t: int) -> set:
        return {p for p in range(len(self.places)) if self.w_minus[p][t] > 0}

    def post_set_t(self, t: int) -> set:
        return {p for p in range(len(self.places)) if self.w_plus[p][t] > 0}

    def pre_set_p(self, p: int) -> set:
        return {t for t in range(len(self.transitions)) if self.w_plus[p][t] > 0}

    def post_set_p(self, p: int) -> set:
        return {t for t in range(len(self.transitions)) if self.w_minus[p][t] > 0}

    def column(self, mat, t: int) -> tuple:
        return tuple(row[t] for row in mat)


def _net_from_lists(places, m0, transitions) -> PetriNet:
    """``transitions`` is a list of ``(name, {place: w}, {place: w})``."""
    pidx = {p: i for i, p in enumerate(places)}
    nt = len(transitions)
    wm = [[0] * nt for _ in places]
    wp = [[0] * nt for _ in places]
    for t, (_, ins, outs) in enumerate(transitions):
        for p, w in ins.items():
            wm[pidx[p]][t] += w
        for p, w in outs.items():
            wp[pidx[p]][t] += w
    return PetriNet(tuple(places), tuple(n for n, _, _ in transitions),
                    tuple(map(tuple, wm)), tuple(map(tuple, wp)), tuple(m0))


_NAME = r"[A-Za-z_][\w.\-']*"


def _arc_list(text: str, lineno: int) -> dict:
    out = {}
    for item in text.split(","):
        item = item.strip()
        if not item:
            raise NetSyntaxError("empty arc in list", lineno)
        m = re.fullmatch(rf"({_NAME})\s*(?::\s*(-?\d+))?", item)
        if not m:
            raise NetSyntaxError(f"malformed arc {item!r}", lineno)
        w = int(m.group(2)) if m.group(2) is not None else 1
        if w < 0:
            raise NetSyntaxError(f"negative weight {w} on arc {item!r}", lineno)
        out[m.group(1)] = out.get(m.group(1), 0) + w
    return out


def parse_text_net(text: str) -> tuple[PetriNet, PropertyBinding]:
    places, m0, trans, atoms = [], [], [], {}
    seen_p, seen_t = set(), set()
    pending_atoms = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        kw = line.split(None, 1)[0]
        if kw == "place":
            m = re.fullmatch(rf"place\s+({_NAME})(?:\s+init\s+(-?\d+))?", line)
            if not m:
                raise NetSyntaxError(f"malformed place declaration {line!r}", lineno)
            name = m.group(1)
            if name in seen_p:
                raise NetSyntaxError(f"duplicate place {name!r}", lineno)
            init = int(m.group(2) or 0)
            if init < 0:
                raise NetSyntaxError(f"negative initial marking for {name!r}", lineno)
            seen_p.add(name)
            places.append(name)
            m0.append(init)
        elif kw == "trans":
            m = re.fullmatch(rf"trans\s+({_NAME})((?:\s+(?:in|out)\s+[^\s].*?)*)", line)
            if not m:
                raise NetSyntaxError(f"malformed transition declaration {line!r}", lineno)
            name = m.group(1)
            if name in seen_t:
                raise NetSyntaxError(f"duplicate transition {name!r}", lineno)
            rest = m.group(2).strip()
            ins, outs = {}, {}
            parts = re.split(r"(?:^|\s+)(in|out)\s+", rest) if rest else [""]
            if parts[0].strip():
                raise NetSyntaxError(f"malformed transition declaration {line!r}", lineno)
            got = set()
            for i in range(1, len(parts), 2):
                which, arcs = parts[i], parts[i + 1].replace(" ", "")
                if which in got:
                    raise NetSyntaxError(f"repeated '{which}' list", lineno)
                got.add(which)
                (ins if which == "in" else outs).update(_arc_list(arcs, lineno))
            for p in list(ins) + list(outs):
                if p not in seen_p:
                    raise NetSyntaxError(f"undeclared place {p!r}", lineno)
            seen_t.add(name)
            trans.append((name, ins, outs))
        elif kw == "atom":
            m = re.fullmatch(rf"atom\s+({_NAME})\s*:=\s*(.+)", line)
            if not m:
                raise NetSyntaxError(f"malformed atom declaration {line!r}", lineno)
            if m.group(1) in atoms or m.group(1) in [a for a, _, _ in pending_atoms]:
                raise NetSyntaxError(f"duplicate atom {m.group(1)!r}", lineno)
            pending_atoms.append((m.group(1), m.group(2), lineno))
        else:
            raise NetSyntaxError(f"unknown declaration {kw!r}", lineno)
    # atoms may mention places declared further down
    for name, expr, lineno in pending_atoms:
        try:
            atoms[name] = parse_predicate(expr, seen_p)
        except NetSyntaxError as e:
            raise NetSyntaxError(str(e), lineno) from None
    return _net_from_lists(places, m0, trans), PropertyBinding(atoms)


# PNML: only P/T structure; layout elements are ignored
_PNML_LAYOUT = {"graphics", "position", "offset", "dimension", "fill", "line", "font"}
_PNML_ALLOWED = {"pnml", "net", "page", "name", "text", "place", "transition", "arc",
                 "initialMarking", "inscription"} | _PNML_LAYOUT


def _local(tag: str) -> str:
    return tag.rsplit("}", 1)[-1]


def _pnml_int(el, what: str) -> int:
    txt = None
    for child in el:
        if _local(child.tag) == "text":
            txt = child.text
    if txt is None:
        raise NetSyntaxError(f"{what} without <text>")
    try:
        v = int(txt.strip())
    except ValueError:
        raise NetSyntaxError(f"{what} {txt.strip()!r} is not an integer") from None
    if v < 0:
        raise NetSyntaxError(f"negative {what} {v}")
    return v


def parse_pnml(text: str) -> tuple[PetriNet, PropertyBinding]:
    try:
        root = ET.fromstring(text)
    except ET.ParseError as e:
        raise NetSyntaxError(f"malformed PNML: {e}") from None
    if _local(root.tag) != "pnml":
        raise NetSyntaxError(f"expected <pnml> root, got <{_local(root.tag)}>")

    def check(el, inside_layout=False):
        tag = _local(el.tag)
        if inside_layout:
            return
        if tag not in _PNML_ALLOWED:
            raise NetSyntaxError(f"unsupported PNML element <{tag}>")
        for child in el:
            check(child, tag in _PNML_LAYOUT)

    check(root)
    nets = [c for c in root if _local(c.tag) == "net"]
    if len(nets) != 1:
        raise NetSyntaxError(f"expected exactly one <net>, found {len(nets)}")
    net = nets[0]
    ntype = net.get("type", "")
    if "ptnet" not in ntype:
        raise NetSyntaxError(f"only P/T nets are supported (type {ntype!r})")
    places, m0, trans_names, arcs = [], [], [], []
    for el in net.iter():
        tag = _local(el.tag)
        if tag == "place":
            pid = el.get("id")
            if not pid:
                raise NetSyntaxError("place without id")
            if pid in places:
                raise NetSyntaxError(f"duplicate place {pid!r}")
            init = 0
            for c in el:
                if _local(c.tag) == "initialMarking":
                    init = _pnml_int(c, "initial marking")
            places.append(pid)
            m0.append(init)
        elif tag == "transition":
            tid = el.get("id")
            if not tid:
                raise NetSyntaxError("transition without id")
            if tid in trans_names:
                raise NetSyntaxError(f"duplicate transition {tid!r}")
            trans_names.append(tid)
        elif tag == "arc":
            w = 1
            for c in el:
                if _local(c.tag) == "inscription":
                    w = _pnml_int(c, "arc inscription")
            arcs.append((el.get("source"), el.get("target"), w))
    pset, tset = set(places), set(trans_names)
    if pset & tset:
        raise NetSyntaxError(f"ids used for both places and transitions: {sorted(pset & tset)}")
    tr = {t: ({}, {}) for t in trans_names}
    for s, d, w in arcs:
        if s in pset and d in tset:
            tr[d][0][s] = tr[d][0].get(s, 0) + w
        elif s in tset and d in pset:
            tr[s][1][d] = tr[s][1].get(d, 0) + w
        else:
            bad = s if s not in pset | tset else d
            if bad not in pset | tset:
                raise NetSyntaxError(f"arc references unknown node {bad!r}")
            raise NetSyntaxError(f"arc {s!r} -> {d!r} does not link a place and a transition")
    return _net_from_lists(places, m0, [(t, *tr[t]) for t in trans_names]), PropertyBinding({})


def parse_net(text: str) -> tuple[PetriNet, PropertyBinding]:
    """Parse the line-oriented net format, or PNML when the text is XML."""
    if text.lstrip().startswith("<"):
        return parse_pnml(text)
    return parse_text_net(text)


def format_net(net: PetriNet, binding: PropertyBinding | None = None) -> str:
    lines = []
    for p, init in zip(net.places, net.m0):
        lines.append(f"place {p}" + (f" init {init}" if init else ""))
    for t, name in enumerate(net.transitions):
        def arcs(mat):
            return ",".join(p if mat[i][t] == 1 else f"{p}:{mat[i][t]}"
                            for i, p in enumerate(net.places) if mat[i][t])
        ins, outs = arcs(net.w_minus), arcs(net.w_plus)
        lines.append(f"trans {name}" + (f" in {ins}" if ins else "") + (f" out {outs}" if outs else ""))
    if binding is not None:
        for n in binding.names():
            lines.append(f"atom {n} := {binding.atoms[n]}")
    return "\n".join(lines) + "\n"


# --------------------------------------------------------------------------
# support and agglomeration


def support_and_invisibles(net: PetriNet, binding: PropertyBinding) -> tuple[frozenset, frozenset]:
    """Support places and invisible transitions, both by name."""
    support = binding.support()
    idx = net.place_index
    missing = sorted(p for p in support if p not in idx)
    if missing:
        raise KeyError(f"binding references undeclared places: {', '.join(missing)}")
    sidx = [idx[p] for p in sorted(support)]
    inv = frozenset(
        name for t, name in enumerate(net.transitions)
        if all(net.w_minus[p][t] == net.w_plus[p][t] for p in sidx)
    )
    return frozenset(support), inv


def agglomeration_conditions(net: PetriNet, place: str, kind: str, support, invisibles) -> dict:
    """Every side condition of ``kind`` ("pre" or "post") at ``place``,
    each evaluated independently."""
    if kind not in ("pre", "post"):
        raise ValueError(f"kind must be 'pre' or 'post', not {kind!r}")
    p = net.place_index[place]
    feeders = net.pre_set_p(p)
    consumers = net.post_set_p(p)
    tn = net.transitions
    cond = {
        "has feeders": bool(feeders),
        "has consumers": bool(consumers),
        "not in support": place not in support,
        "initially unmarked": net.m0[p] == 0,
        "distinct feeders and consumers": not (feeders & consumers),
        "feeders produce a single token": all(net.w_plus[p][h] == 1 for h in feeders),
        "consumers require a single token": all(net.w_minus[p][f] == 1 for f in consumers),
    }
    if kind == "pre":
        cond["feeders are stuttering"] = all(tn[h] in invisibles for h in feeders)
        cond["p is the single output of h"] = all(net.post_set_t(h) == {p} for h in feeders)
        cond["h is divergent free"] = all(
            any(net.w_plus[q][h] < net.w_minus[q][h] for q in net.pre_set_t(h)) for h in feeders
        )
        cond["h is strongly quasi-persistent"] = all(
            net.post_set_p(q) == {h} for h in feeders for q in net.pre_set_t(h)
        )
    else:
        cond["consumers are stuttering"] = all(tn[f] in invisibles for f in consumers)
        cond["no other inputs to f"] = all(net.pre_set_t(f) == {p} for f in consumers)
    return cond


def find_agglomerations(net: PetriNet, support, invisibles) -> list[tuple[str, str]]:
    """Applicable ``(place, kind)`` pairs, posts first, each by place index."""
    out = []
    for kind in ("post", "pre"):
        for place in net.places:
            if all(agglomeration_conditions(net, place, kind, support, invisibles).values()):
                out.append((place, kind))
    return out


def agglomerate(net: PetriNet, place: str, kind: str, support=frozenset(), invisibles=None) -> PetriNet:
    """Remove ``place`` and its neighbouring transitions, adding one fused
    transition ``h.f`` per feeder/consumer pair.

    ``invisibles`` defaults to the transitions invisible for ``support``.
    """
    if place not in net.place_index:
        raise KeyError(f"unknown place {place!r}")
    if invisibles is None:
        sidx = [net.place_index[q] for q in support]
        invisibles = frozenset(n for t, n in enumerate(net.transitions)
                               if all(net.w_minus[q][t] == net.w_plus[q][t] for q in sidx))
    cond = agglomeration_conditions(net, place, kind, support, invisibles)
    failed = [k for k, ok in cond.items() if not ok]
    if failed:
        raise AgglomerationError(place, kind, failed)
    p = net.place_index[place]
    feeders = sorted(net.pre_set_p(p))
    consumers = sorted(net.post_set_p(p))
    gone = set(feeders) | set(consumers)
    keep_p = [i for i in range(len(net.places)) if i != p]
    keep_t = [t for t in range(len(net.transitions)) if t not in gone]
    names = [net.transitions[t] for t in keep_t]
    cols_m = [net.column(net.w_minus, t) for t in keep_t]
    cols_p = [net.column(net.w_plus, t) for t in keep_t]
    taken = set(names)
    for h in feeders:
        for f in consumers:
            name = f"{net.transitions[h]}.{net.transitions[f]}"
            while name in taken:
                name += "'"
            taken.add(name)
            names.append(name)
            cols_m.append(tuple(a + b for a, b in zip(net.column(net.w_minus, h), net.column(net.w_minus, f))))
            cols_p.append(tuple(a + b for a, b in zip(net.column(net.w_plus, h), net.column(net.w_plus, f))))
    # the token on p is produced by h and consumed by f, so it cancels
    wm = tuple(tuple(col[i] for col in cols_m) for i in keep_p)
    wp = tuple(tuple(col[i] for col in cols_p) for i in keep_p)
    return PetriNet(tuple(net.places[i] for i in keep_p), tuple(names), wm, wp,
                    tuple(net.m0[i] for i in keep_p))


@dataclass
class ReductionStats:
    places_removed: int = 0
    transitions_removed: int = 0
    steps: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {"places_removed": self.places_removed,
                "transitions_removed": self.transitions_removed,
                "steps": [f"{k}:{p}" for p, k in self.steps]}


def reduce_fixpoint(net: PetriNet, binding: PropertyBinding) -> tuple[PetriNet, ReductionStats]:
    """Apply agglomerations one at a time until none is applicable."""
    stats = ReductionStats()
    start_p, start_t = len(net.places), len(net.transitions)
    while True:
        support, inv = support_and_invisibles(net, binding)
        cands = find_agglomerations(net, support, inv)
        if not cands:
            break
        place, kind = cands[0]
        net = agglomerate(net, place, kind, support, inv)
        stats.steps.append((place, kind))
    stats.places_removed = start_p - len(net.places)
    stats.transitions_removed = start_t - len(net.transitions)
    return net, stats
