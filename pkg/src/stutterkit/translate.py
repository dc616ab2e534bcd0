"""LTL to TGBA by tableau expansion.

A state is the set of NNF obligations that must hold from now on. Each
state is expanded into terms ``(pos, neg, nexts, postponed)``: literals the
current letter must satisfy, obligations for the next position, and the
until-subformulas whose right operand was deferred on this step. Every until
(and eventually) subformula owns one acceptance mark, placed on each edge
that does not postpone it.
"""

from __future__ import annotations

import time
from collections import deque

from . import ltl
from .automata import DEFAULT_STATE_CAP, Builder, Tgba, trim
from .ltl import LtlFormula


def _literal_guard(pos: frozenset, neg: frozenset, ap: tuple) -> int:
    g = 0
    for v in range(1 << len(ap)):
        ok = True
        for j, a in enumerate(ap):
            bit = v >> j & 1
            if (a in pos and not bit) or (a in neg and bit):
                ok = False
                break
        if ok:
            g |= 1 << v
    return g


def _expand(obligations: frozenset) -> list[tuple]:
    """Disjunctive expansion of a set of NNF formulas into terms."""
    results = []
    # (todo, pos, neg, nexts, postponed, done)
    stack = [(list(obligations), frozenset(), frozenset(), frozenset(), frozenset(), frozenset())]
    while stack:
        todo, pos, neg, nexts, post, done = stack.pop()
        dead = False
        while todo:
            g = todo.pop()
            if g in done:
                continue
            done = done | {g}
            k = g.kind
            if k == ltl.TRUE:
                continue
            if k == ltl.FALSE:
                dead = True
                break
            if k == ltl.ATOM:
                if g.name in neg:
                    dead = True
                    break
                pos = pos | {g.name}
            elif k == ltl.NOT:
                if g.left.name in pos:
                    dead = True
                    break
                neg = neg | {g.left.name}
            elif k == ltl.AND:
                todo.extend(g.children)
            elif k == ltl.NEXT:
                nexts = nexts | {g.left}
            elif k == ltl.GLOBALLY:
                todo.append(g.left)
                nexts = nexts | {g}
            elif k == ltl.OR:
                stack.append((todo + [g.right], pos, neg, nexts, post, done))
                todo.append(g.left)
            elif k == ltl.UNTIL:
                # b now, or a now and the until again tomorrow
                stack.append((todo + [g.left], pos, neg, nexts | {g}, post | {g}, done))
                todo.append(g.right)
            elif k == ltl.EVENTUALLY:
                stack.append((list(todo), pos, neg, nexts | {g}, post | {g}, done))
                todo.append(g.left)
            elif k == ltl.RELEASE:
                # a and b now, or b now and the release again tomorrow
                stack.append((todo + [g.right], pos, neg, nexts | {g}, post, done))
                todo.extend([g.left, g.right])
            else:
                raise ValueError(f"formula not in negation normal form: {g}")
        if not dead:
            results.append((pos, neg, frozenset(nexts), post))
    # drop duplicates while keeping a deterministic order
    seen = set()
    out = []
    for t in results:
        if t not in seen:
            seen.add(t)
            out.append(t)
    return out


def _eventualities(f: LtlFormula) -> list[LtlFormula]:
    out = []
    seen = set()
    stack = [f]
    while stack:
        g = stack.pop()
        if g in seen:
            continue
        seen.add(g)
        if g.kind in (ltl.UNTIL, ltl.EVENTUALLY):
            out.append(g)
        stack.extend(g.children)
    return sorted(out, key=ltl.to_string)


def translate(f: LtlFormula | str, state_cap=DEFAULT_STATE_CAP, timeout_s=None) -> Tgba:
    """TGBA accepting exactly the models of ``f``; ``ap`` is the sorted atom set."""
    if isinstance(f, str):
        f = ltl.parse(f)
    g = ltl.to_nnf(f)
    ap = tuple(sorted(ltl.atoms(f)))
    evs = _eventualities(g)
    mark_of = {u: i for i, u in enumerate(evs)}
    all_marks = (1 << len(evs)) - 1
    deadline = None if timeout_s is None else time.monotonic() + timeout_s
    bld = Builder(ap, len(evs), state_cap, deadline, "translation")
    start = frozenset([g])
    bld.state(start)
    todo = deque([start])
    guards = {}
    while todo:
        obligations = todo.popleft()
        src = bld.ids[obligations]
        for pos, neg, nexts, post in _expand(obligations):
            key = (pos, neg)
            guard = guards.get(key)
            if guard is None:
                guard = guards[key] = _literal_guard(pos, neg, ap)
            marks = all_marks
            for u in post:
                marks &= ~(1 << mark_of[u])
            dst, new = bld.state(nexts)
            if new:
                todo.append(nexts)
            bld.edge(src, guard, marks, dst)
    a = bld.build(name=ltl.to_string(f))
    out = trim(a)
    return Tgba(out.ap, out.num_states, out.initial, out.edges, out.acc, a.name)


def translate_negation(f: LtlFormula | str, **kw) -> Tgba:
    if isinstance(f, str):
        f = ltl.parse(f)
    return translate(ltl.negate_to_nnf(f), **kw)

