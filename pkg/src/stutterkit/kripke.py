"""Explicit reachability graphs of nets and their automaton view."""

from __future__ import annotations

import time
from collections import deque
from dataclasses import dataclass

from .automata import DEFAULT_STATE_CAP, Edge, Tgba
from .errors import ResourceError
from .petri import PetriNet, PropertyBinding


@dataclass(frozen=True)
class KripkeGraph:
    """Reachable markings in BFS order; ``labels[s]`` is a letter over ``atoms``
    (bit j set iff ``atoms[j]`` holds). Deadlocks carry a self-loop."""

    atoms: tuple
    states: tuple
    initial: int
    succ: tuple
    labels: tuple

    @property
    def num_states(self) -> int:
        return len(self.states)

    def edges(self):
        for s, ds in enumerate(self.succ):
            for d in ds:
                yield s, d

    def valuation(self, s: int) -> frozenset:
        return frozenset(a for j, a in enumerate(self.atoms) if self.labels[s] >> j & 1)


def build_kripke(net: PetriNet, binding: PropertyBinding, state_cap: int = DEFAULT_STATE_CAP,
                 atoms=None, timeout_s=None) -> KripkeGraph:
    """Breadth-first exploration from ``m0``; transitions are tried in net order."""
    if state_cap < 1:
        raise ValueError("state_cap must be at least 1")
    atoms = binding.names() if atoms is None else tuple(atoms)
    binding = binding.restrict(atoms)
    index = net.place_index
    deadline = None if timeout_s is None else time.monotonic() + timeout_s
    nt = len(net.transitions)
    pre = []
    delta = []
    for t in range(nt):
        pre.append([(p, net.w_minus[p][t]) for p in range(len(net.places)) if net.w_minus[p][t]])
        delta.append([(p, net.w_plus[p][t] - net.w_minus[p][t])
                      for p in range(len(net.places)) if net.w_plus[p][t] != net.w_minus[p][t]])
    ids = {net.m0: 0}
    states = [net.m0]
    succ = []
    todo = deque([net.m0])
    while todo:
        m = todo.popleft()
        out = []
        for t in range(nt):
            if all(m[p] >= w for p, w in pre[t]):
                m2 = list(m)
                for p, d in delta[t]:
                    m2[p] += d
                m2 = tuple(m2)
                i = ids.get(m2)
                if i is None:
                    if len(states) >= state_cap:
                        raise ResourceError(
                            f"state space exceeds {state_cap} markings (the net may be unbounded)",
                            limit=state_cap)
                    if deadline is not None and len(states) % 1024 == 0 and time.monotonic() > deadline:
                        raise ResourceError("state space construction timed out", limit=timeout_s)
                    i = ids[m2] = len(states)
                    states.append(m2)
                    todo.append(m2)
                if i not in out:
                    out.append(i)
        if not out:
            out.append(ids[m])
        succ.append(tuple(sorted(out)))
    labels = tuple(binding.valuation(m, index, atoms) for m in states)
    return KripkeGraph(atoms, tuple(states), 0, tuple(succ), labels)


def kripke_tgba(kg: KripkeGraph) -> Tgba:
    """Automaton accepting every run of ``kg``: a pre-initial state 0 reads
    the initial label, and each edge reads the label of its destination."""
    edges = [Edge(0, 1 << kg.labels[kg.initial], 0, kg.initial + 1)]
    for s, d in kg.edges():
        edges.append(Edge(s + 1, 1 << kg.labels[d], 0, d + 1))
    return Tgba(kg.atoms, kg.num_states + 1, 0, tuple(edges), 0, "kripke")


def run_lassos(kg: KripkeGraph, stem_max: int, loop_max: int) -> set:
    """Distinct normalized lasso words (integer letters) of runs of ``kg``
    whose stem has at most ``stem_max`` states and loop at most ``loop_max``."""
    from .lasso import LassoWord, normalize

    lab = kg.labels
    loops_at = {}

    def loops(s):
        hit = loops_at.get(s)
        if hit is not None:
            return hit
        found = set()
        layer = {(s, ())}
        for _ in range(loop_max):
            nxt = set()
            for q, w in layer:
                w2 = w + (lab[q],)
                for d in kg.succ[q]:
                    if d == s:
                        found.add(w2)
                    nxt.add((d, w2))
            layer = nxt
        loops_at[s] = found
        return found

    out = set()
    layer = {(kg.initial, ())}
    for i in range(stem_max + 1):
        for s, u in layer:
            for v in loops(s):
                out.add(normalize(LassoWord(u, v)))
        if i == stem_max:
            break
        layer = {(d, u + (lab[s],)) for s, u in layer for d in kg.succ[s]}
    return out


def reduction_violations(original: KripkeGraph, reduced: KripkeGraph, stem_max: int = 4,
                         loop_max: int = 4) -> dict:
    """Bounded check that the reduced runs form a reduction of the original ones.

    ``shorter``: reduced lassos with no original run at least as long
    (membership in the downward closure of the original language).
    ``uncovered``: original lassos with no reduced run below them
    (membership in the upward closure of the reduced language).
    """
    from .automata import accepts_lasso
    from .stutter import closure_cl, selfloop_sl

    if original.atoms != reduced.atoms:
        raise ValueError("Kripke graphs observe different atoms")
    down = closure_cl(kripke_tgba(original))
    up = selfloop_sl(kripke_tgba(reduced))
    red_runs = run_lassos(reduced, stem_max, loop_max)
    orig_runs = run_lassos(original, stem_max, loop_max)
    return {
        "shorter": sorted((w for w in red_runs if not accepts_lasso(down, w)), key=repr),
        "uncovered": sorted((w for w in orig_runs if not accepts_lasso(up, w)), key=repr),
        "checked": len(red_runs) + len(orig_runs),
    }


def downward_included(reduced: KripkeGraph, original: KripkeGraph) -> tuple[bool, tuple]:
    """Exact test that every run of ``reduced`` is below some run of ``original``.

    Both languages are safety languages (every state has a successor), so
    inclusion holds iff every finite prefix of a reduced run can be read by
    the downward closure of the original. The closure is determinized on
    the fly; a counterexample prefix is returned on failure.
    """
    from .stutter import closure_cl

    if original.atoms != reduced.atoms:
        raise ValueError("Kripke graphs observe different atoms")
    down = closure_cl(kripke_tgba(original))
    succ = down.letter_succ()
    start = (0, frozenset([down.initial]))
    parent = {start: None}
    todo = deque([start])
    # reduced state 0 stands for the pre-initial position
    def moves(r):
        if r == 0:
            return [(reduced.initial + 1, reduced.labels[reduced.initial])]
        return [(d + 1, reduced.labels[d]) for d in reduced.succ[r - 1]]

    while todo:
        node = todo.popleft()
        r, sub = node
        for r2, v in moves(r):
            sub2 = frozenset(d for q in sub for d, _ in succ[q][v])
            nxt = (r2, sub2)
            if nxt in parent:
                continue
            parent[nxt] = (node, v)
            if not sub2:
                word = []
                cur = nxt
                while parent[cur] is not None:
                    cur, letter = parent[cur]
                    word.append(letter)
                return False, tuple(reversed(word))
            todo.append(nxt)
    return True, ()
