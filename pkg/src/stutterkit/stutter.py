"""Closure under the shorter-than order, sensitivity classes and the
length-sensitive partition of a property language."""

from __future__ import annotations

import time
from collections import deque
from dataclasses import dataclass
from enum import Enum

from . import ltl
from .automata import (
    DEFAULT_STATE_CAP,
    Builder,
    Edge,
    Tgba,
    empty_automaton,
    is_empty,
    letters_of,
    product,
    trim,
)
from .complement import difference
from .errors import ResourceError
from .ltl import LtlFormula
from .translate import translate


class SensitivityClass(str, Enum):
    SI = "SI"
    LI = "LI"
    ShI = "ShI"
    LS = "LS"

    def __str__(self):
        return self.value

    @property
    def shortening_insensitive(self) -> bool:
        return self in (SensitivityClass.SI, SensitivityClass.ShI)

    @property
    def lengthening_insensitive(self) -> bool:
        return self in (SensitivityClass.SI, SensitivityClass.LI)


def _maximal(sets) -> list[int]:
    out = []
    for m in sorted(set(sets), key=lambda x: -bin(x).count("1")):
        if not any(m | o == o for o in out):
            out.append(m)
    return out


def closure_cl(a: Tgba) -> Tgba:
    """Downward closure: for every letter, any nonempty chain of edges
    reading that letter gets a one-step shortcut carrying the union of the
    chain's marks."""
    succ = a.letter_succ()
    merged = {}
    for v in range(a.n_letters):
        for q in range(a.num_states):
            if not succ[q][v]:
                continue
            # (state, marks) pairs reachable by one or more v-edges
            seen = set(succ[q][v])
            todo = list(seen)
            while todo:
                d, m = todo.pop()
                for d2, m2 in succ[d][v]:
                    node = (d2, m | m2)
                    if node not in seen:
                        seen.add(node)
                        todo.append(node)
            by_dst = {}
            for d, m in seen:
                by_dst.setdefault(d, []).append(m)
            for d, ms in by_dst.items():
                for m in _maximal(ms):
                    key = (q, d, m)
                    merged[key] = merged.get(key, 0) | (1 << v)
    edges = tuple(Edge(s, g, m, d) for (s, d, m), g in sorted(merged.items()))
    return Tgba(a.ap, a.num_states, a.initial, edges, a.acc, a.name and f"cl({a.name})")


def selfloop_sl(a: Tgba) -> Tgba:
    """Upward closure: states remember the last letter and may repeat it
    on an unmarked self-loop; every new letter goes through an original edge."""
    if a.acc == 0:
        a = Tgba(a.ap, a.num_states, a.initial,
                 tuple(Edge(e.src, e.guard, 1, e.dst) for e in a.edges), 1, a.name)
    succ = a.letter_succ()
    bld = Builder(a.ap, a.acc, what="sl")
    start = ("init", a.initial)
    bld.state(start)
    todo = deque([start])
    while todo:
        node = todo.popleft()
        src = bld.ids[node]
        q = node[1]
        if node[0] != "init":
            bld.edge(src, 1 << node[0], 0, src)
        for v in range(a.n_letters):
            for d, m in succ[q][v]:
                nxt = (v, d)
                dst, new = bld.state(nxt)
                if new:
                    todo.append(nxt)
                bld.edge(src, 1 << v, m, dst)
    return trim(bld.build(name=a.name and f"sl({a.name})"))


def _as_formula(f) -> LtlFormula:
    return ltl.parse(f) if isinstance(f, str) else f


@dataclass
class Classification:
    sensitivity: SensitivityClass
    shortening_witness: object = None
    lengthening_witness: object = None


def classify_detailed(f, state_cap=DEFAULT_STATE_CAP, timeout_s=None) -> Classification:
    """Class of ``f`` plus witnesses: a word in cl(A) outside L(f) refutes
    shortening insensitivity, a word in sl(A) outside L(f) lengthening."""
    f = _as_formula(f)
    deadline = None if timeout_s is None else time.monotonic() + timeout_s
    a = translate(f, state_cap=state_cap, timeout_s=timeout_s)
    na = translate(ltl.negate_to_nnf(f), state_cap=state_cap, timeout_s=timeout_s)
    sh_empty, sh_w = is_empty(product(closure_cl(a), na, state_cap, deadline))
    ln_empty, ln_w = is_empty(product(selfloop_sl(a), na, state_cap, deadline))
    if sh_empty and ln_empty:
        cls = SensitivityClass.SI
    elif sh_empty:
        cls = SensitivityClass.ShI
    elif ln_empty:
        cls = SensitivityClass.LI
    else:
        cls = SensitivityClass.LS
    return Classification(cls, sh_w, ln_w)


def classify_sensitivity(f, state_cap=DEFAULT_STATE_CAP, timeout_s=None) -> SensitivityClass:
    return classify_detailed(f, state_cap, timeout_s).sensitivity


@dataclass
class LanguagePartition:
    """Four disjoint parts of L(f).

    ``si_pm``: words whose whole stutter class is in L(f).
    ``si_minus``: remaining words all of whose shorter words are in L(f).
    ``si_plus``: remaining words all of whose longer words are in L(f).
    ``ss``: words with both a shorter and a longer word outside L(f).

    With ``union_si_minus`` the first field holds SI± ∪ SI⁻ (the words all
    of whose shorter words are in L(f)) and ``si_minus`` is empty.
    """

    si_pm: Tgba
    si_minus: Tgba
    si_plus: Tgba
    ss: Tgba
    sensitivity: SensitivityClass
    union_si_minus: bool = False

    def parts(self) -> dict:
        return {"si_pm": self.si_pm, "si_minus": self.si_minus,
                "si_plus": self.si_plus, "ss": self.ss}


def partition_language(f, union_si_minus=False, state_cap=DEFAULT_STATE_CAP,
                       rank_cap=None, timeout_s=None) -> LanguagePartition:
    """Split L(f) by how each word's stutter class sits in L(f).

    With ``N = translate(!f)``: ``E = sl(cl(N))`` holds the words whose class
    meets L(!f), ``sl(N)`` those with a shorter word in L(!f) and ``cl(N)``
    those with a longer word in L(!f). The parts are differences of
    products of these, so only complements of closures of ``N`` are needed.
    Known classes short-circuit to fewer complements.
    """
    f = _as_formula(f)
    start = time.monotonic()

    def left():
        if timeout_s is None:
            return None
        rest = timeout_s - (time.monotonic() - start)
        if rest <= 0:
            raise ResourceError("partition timed out", limit=timeout_s)
        return rest

    cls = classify_sensitivity(f, state_cap, timeout_s)
    a = translate(f)
    na = translate(ltl.negate_to_nnf(f))
    nothing = empty_automaton(a.ap)
    kw = dict(rank_cap=rank_cap, state_cap=state_cap)

    if cls is SensitivityClass.SI:
        return LanguagePartition(a, nothing, nothing, nothing, cls, union_si_minus)

    down = selfloop_sl(na)   # has a shorter word outside L(f)
    up = closure_cl(na)      # has a longer word outside L(f)
    if cls is SensitivityClass.ShI:
        # L(!f) is lengthening insensitive, so sl(N) = N and no word of L(f)
        # has a shorter word outside it
        if union_si_minus:
            return LanguagePartition(a, nothing, nothing, nothing, cls, True)
        stutter = selfloop_sl(up)
        si_pm = difference(a, stutter, timeout_s=left(), **kw)
        si_minus = trim(product(a, stutter))
        return LanguagePartition(si_pm, si_minus, nothing, nothing, cls)
    if cls is SensitivityClass.LI:
        # cl(N) = N here, so nothing in L(f) has a longer word outside it
        stutter = closure_cl(down)
        si_plus = trim(product(a, down))
        if union_si_minus:
            merged = difference(a, down, timeout_s=left(), **kw)
            return LanguagePartition(merged, nothing, si_plus, nothing, cls, True)
        si_pm = difference(a, stutter, timeout_s=left(), **kw)
        si_minus = difference(trim(product(a, stutter)), down, timeout_s=left(), **kw)
        return LanguagePartition(si_pm, si_minus, si_plus, nothing, cls)

    a_down = trim(product(a, down))
    ss = trim(product(a_down, up))
    si_plus = difference(a_down, up, timeout_s=left(), **kw)
    if union_si_minus:
        merged = difference(a, down, timeout_s=left(), **kw)
        return LanguagePartition(merged, nothing, si_plus, ss, cls, True)
    stutter = selfloop_sl(up)
    si_pm = difference(a, stutter, timeout_s=left(), **kw)
    si_minus = difference(trim(product(a, stutter)), down, timeout_s=left(), **kw)
    return LanguagePartition(si_pm, si_minus, si_plus, ss, cls)


def lengthening_kernel(f, state_cap=DEFAULT_STATE_CAP, rank_cap=None, timeout_s=None) -> Tgba:
    """Words of L(f) all of whose longer words are in L(f); the language is
    lengthening insensitive."""
    f = _as_formula(f)
    a = translate(f)
    na = translate(ltl.negate_to_nnf(f))
    return difference(a, closure_cl(na), rank_cap=rank_cap, state_cap=state_cap, timeout_s=timeout_s)


def stutter_kernel(f, state_cap=DEFAULT_STATE_CAP, rank_cap=None, timeout_s=None) -> Tgba:
    """Words of L(f) whose whole stutter class is in L(f)."""
    f = _as_formula(f)
    a = translate(f)
    na = translate(ltl.negate_to_nnf(f))
    return difference(a, selfloop_sl(closure_cl(na)), rank_cap=rank_cap,
                      state_cap=state_cap, timeout_s=timeout_s)


def guard_letters(e: Edge) -> list[int]:
    return list(letters_of(e.guard))
