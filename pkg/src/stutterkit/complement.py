"""Rank-based complementation and language difference.

The input is first trimmed, degeneralized and converted to a state-based
Büchi automaton over states ``(q, b)`` where ``b`` records whether the edge
that entered ``q`` was accepting. Complement states are either a plain
subset ``S`` (before the run has guessed that its level rankings became
tight) or a triple ``(S, f, O)`` with a tight level ranking ``f`` of fixed
odd maximum and the breakpoint set ``O`` of even-ranked states still owing a
visit to an odd rank. The construction is explored lazily so that
:func:`difference` only materializes states reachable in the product.
"""

from __future__ import annotations

import time
from collections import deque

from .automata import (
    DEFAULT_STATE_CAP,
    Builder,
    _projection,
    Tgba,
    degeneralize,
    empty_automaton,
    lift_guard,
    merge_ap,
    reduce_simulation,
    trim,
    universal_automaton,
    with_ap,
)
from .errors import ResourceError

_SINK = "sink"


class _StateBuchi:
    """Letter-indexed state-based Büchi view of a degeneralized TGBA."""

    def __init__(self, a: Tgba):
        a = degeneralize(a)
        succ_edge = a.letter_succ()
        ids = {(a.initial, 0): 0}
        order = [(a.initial, 0)]
        todo = deque(order)
        nl = a.n_letters
        succ = []
        while todo:
            q, _ = todo.popleft()
            row = []
            for v in range(nl):
                out = []
                for d, m in succ_edge[q][v]:
                    key = (d, 1 if m else 0)
                    if key not in ids:
                        ids[key] = len(order)
                        order.append(key)
                        todo.append(key)
                    out.append(ids[key])
                row.append(tuple(sorted(set(out))))
            succ.append(row)
        self.n = len(order)
        self.accepting = frozenset(i for i, (_, b) in enumerate(order) if b)
        self.succ = succ
        self.initial = 0
        self.n_letters = nl


class LazyComplement:
    """On-demand successor function of the complement automaton."""

    def __init__(self, a: Tgba, rank_cap=None, state_cap=DEFAULT_STATE_CAP, deadline=None,
                 max_successor=True):
        a = reduce_simulation(degeneralize(reduce_simulation(a)))
        self.ap = a.ap
        self.ba = _StateBuchi(a)
        self.max_rank = 2 * self.ba.n if rank_cap is None else rank_cap
        self.state_cap = state_cap
        self.deadline = deadline
        self._memo = {}
        self.initial = frozenset([self.ba.initial])
        self.generated = 0
        self.max_successor = max_successor

    def is_accepting(self, st) -> bool:
        if st == _SINK:
            return True
        return isinstance(st, tuple) and not st[2]

    def _tight(self, states, bounds, r):
        """Level rankings on ``states`` (sorted) with every value within its
        bound, even on accepting states, odd maximum exactly ``r`` and every
        odd rank 1..r used."""
        acc = self.ba.accepting
        n = len(states)
        need_all = frozenset(range(1, r + 1, 2))
        out = []
        vals = [0] * n

        def rec(i, used):
            missing = len(need_all - used)
            if missing > n - i:
                return
            if i == n:
                out.append(tuple(vals))
                return
            q = states[i]
            top = min(bounds[i], r)
            for v in range(top, -1, -1):
                if q in acc and v % 2:
                    continue
                vals[i] = v
                rec(i + 1, used | {v} if v % 2 else used)
                if len(out) > self.state_cap:
                    raise ResourceError("complement exceeds state cap", limit=self.state_cap)
                if self.deadline is not None and len(out) % 256 == 255 and time.monotonic() > self.deadline:
                    raise ResourceError("complementation timed out", limit=self.deadline)

        rec(0, frozenset())
        return out

    def _max_tight(self, states, bound, r):
        """The pointwise largest admissible ranking, if it is tight."""
        acc = self.ba.accepting
        f = tuple(bound[q] - 1 if (q in acc and bound[q] % 2) else bound[q] for q in states)
        odd = {x for x in f if x % 2}
        if max(f) == r and len(odd) == (r + 1) // 2:
            return [f]
        return []

    def _check_budget(self):
        self.generated += 1
        if self.generated > self.state_cap:
            raise ResourceError("complement exceeds state cap", limit=self.state_cap)
        if self.deadline is not None and self.generated % 512 == 0 and time.monotonic() > self.deadline:
            raise ResourceError("complementation timed out", limit=self.deadline)

    def successors(self, st, v: int) -> tuple:
        key = (st, v)
        hit = self._memo.get(key)
        if hit is not None:
            return hit
        res = self._successors(st, v)
        self._memo[key] = res
        return res

    def _successors(self, st, v):
        if st == _SINK:
            return (_SINK,)
        succ = self.ba.succ
        if isinstance(st, frozenset):
            nxt = frozenset(d for q in st for d in succ[q][v])
            if not nxt:
                return (_SINK,)
            res = [nxt]
            states = sorted(nxt)
            # odd ranks only fit on non-accepting states
            free = sum(1 for q in states if q not in self.ba.accepting)
            top = min(self.max_rank - 1 if self.max_rank % 2 == 0 else self.max_rank,
                      2 * free - 1)
            for r in range(1, top + 1, 2):
                for f in self._tight(states, [r] * len(states), r):
                    self._check_budget()
                    res.append((tuple(states), f, frozenset()))
            return tuple(res)
        S, f, O = st
        rank = dict(zip(S, f))
        r = max(f)
        bound = {}
        for q in S:
            for d in succ[q][v]:
                b = bound.get(d)
                if b is None or rank[q] < b:
                    bound[d] = rank[q]
        if not bound:
            return (_SINK,)
        states = sorted(bound)
        res = []
        if O:
            o_succ = {d for q in O for d in succ[q][v]}
        if O and self.max_successor:
            candidates = self._max_tight(states, bound, r)
        else:
            candidates = self._tight(states, [bound[q] for q in states], r)
        for f2 in candidates:
            self._check_budget()
            even = {q for q, x in zip(states, f2) if x % 2 == 0}
            O2 = frozenset(o_succ & even) if O else frozenset(even)
            res.append((tuple(states), f2, O2))
        return tuple(res)


def _explore(x: Tgba | None, comp: LazyComplement, state_cap, deadline, what):
    """Product of ``x`` (or the universal automaton) with the lazy complement."""
    if x is None:
        x = universal_automaton(comp.ap)
    ap = merge_ap(x.ap, comp.ap)
    k = x.acc + 1
    cmark = 1 << x.acc
    bld = Builder(ap, k, state_cap, deadline, what)
    start = (x.initial, comp.initial)
    bld.state(start)
    todo = deque([start])
    # letter of comp.ap for each letter of the merged alphabet
    proj = _projection(comp.ap, ap)
    xg = {}
    while todo:
        qx, qc = todo.popleft()
        src = bld.ids[(qx, qc)]
        for e in x.out(qx):
            g = xg.get(e)
            if g is None:
                g = xg[e] = lift_guard(e.guard, x.ap, ap)
            # group letters of the merged alphabet by their comp letter
            by_comp = {}
            v = 0
            gg = g
            while gg:
                if gg & 1:
                    by_comp[proj[v]] = by_comp.get(proj[v], 0) | (1 << v)
                gg >>= 1
                v += 1
            for cv, guard in by_comp.items():
                for nxt in comp.successors(qc, cv):
                    dst, new = bld.state((e.dst, nxt))
                    if new:
                        todo.append((e.dst, nxt))
                    marks = e.marks | (cmark if comp.is_accepting(nxt) else 0)
                    bld.edge(src, guard, marks, dst)
    return trim(bld.build())


def complement(a: Tgba, rank_cap=None, state_cap=DEFAULT_STATE_CAP, timeout_s=None,
               max_successor=True) -> Tgba:
    """Automaton for the complement of ``L(a)`` over ``a.ap``."""
    deadline = None if timeout_s is None else time.monotonic() + timeout_s
    if not trim(a).edges:
        return universal_automaton(a.ap)
    comp = LazyComplement(a, rank_cap, state_cap, deadline, max_successor)
    out = _explore(None, comp, state_cap, deadline, "complement")
    # drop the trivial universal factor's mark
    edges = [(e.src, e.guard, e.marks >> 1, e.dst) for e in out.edges]
    return Tgba(out.ap, out.num_states, out.initial, edges, 1)


def difference(x: Tgba, y: Tgba, rank_cap=None, state_cap=DEFAULT_STATE_CAP, timeout_s=None,
               max_successor=True) -> Tgba:
    """Automaton for ``L(x) minus L(y)``; the complement of ``y`` is only
    built as far as the product with ``x`` reaches."""
    deadline = None if timeout_s is None else time.monotonic() + timeout_s
    x = trim(x)
    if not x.edges:
        return empty_automaton(merge_ap(x.ap, y.ap))
    y = trim(y)
    if not y.edges:
        return with_ap(x, merge_ap(x.ap, y.ap))
    comp = LazyComplement(y, rank_cap, state_cap, deadline, max_successor)
    return _explore(x, comp, state_cap, deadline, "difference")

