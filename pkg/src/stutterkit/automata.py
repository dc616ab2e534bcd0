"""Transition-based generalized Büchi automata.

Guards are Boolean functions over ``ap`` stored as truth tables: bit ``v``
of ``guard`` is set when the valuation with integer code ``v`` (bit ``j`` =
``ap[j]``) satisfies it. With at most a handful of propositions this is both
compact and makes per-letter iteration trivial. Acceptance marks are
bitmasks over ``range(acc)``.
"""

from __future__ import annotations

import time
from collections import deque
from dataclasses import dataclass, field
from functools import lru_cache
from typing import NamedTuple, Sequence

from .errors import ResourceError
from .lasso import LassoWord, from_letters, to_letters

DEFAULT_STATE_CAP = 1_000_000


class Edge(NamedTuple):
    src: int
    guard: int
    marks: int
    dst: int


def full_guard(n_ap: int) -> int:
    return (1 << (1 << n_ap)) - 1


def letters_of(guard: int):
    v = 0
    while guard:
        if guard & 1:
            yield v
        guard >>= 1
        v += 1


def mark_list(marks: int) -> list[int]:
    return [i for i in range(marks.bit_length()) if marks >> i & 1]


@dataclass(frozen=True, eq=False)
class Tgba:
    ap: tuple
    num_states: int
    initial: int
    edges: tuple
    acc: int = 0
    name: str = ""
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "ap", tuple(self.ap))
        object.__setattr__(self, "edges", tuple(Edge(*e) for e in self.edges))
        if not 0 <= self.initial < max(self.num_states, 1):
            raise ValueError("initial state out of range")
        all_marks = (1 << self.acc) - 1
        for e in self.edges:
            if not (0 <= e.src < self.num_states and 0 <= e.dst < self.num_states):
                raise ValueError(f"edge {e} references a missing state")
            if e.marks & ~all_marks:
                raise ValueError(f"edge {e} carries marks outside 0..{self.acc - 1}")
            if not e.guard:
                raise ValueError(f"edge {e} has an unsatisfiable guard")

    @property
    def all_marks(self) -> int:
        return (1 << self.acc) - 1

    @property
    def n_letters(self) -> int:
        return 1 << len(self.ap)

    def out(self, q: int) -> list[Edge]:
        table = self._cache.get("out")
        if table is None:
            table = [[] for _ in range(self.num_states)]
            for e in self.edges:
                table[e.src].append(e)
            self._cache["out"] = table
        return table[q]

    def letter_succ(self) -> list[list[list[tuple[int, int]]]]:
        """``succ[q][letter]`` -> list of ``(dst, marks)``."""
        table = self._cache.get("succ")
        if table is None:
            nl = self.n_letters
            table = [[[] for _ in range(nl)] for _ in range(self.num_states)]
            for e in self.edges:
                for v in letters_of(e.guard):
                    table[e.src][v].append((e.dst, e.marks))
            self._cache["succ"] = table
        return table

    def __repr__(self):
        return (f"Tgba(ap={self.ap}, states={self.num_states}, edges={len(self.edges)}, "
                f"acc={self.acc}{', name=' + repr(self.name) if self.name else ''})")


@dataclass(frozen=True)
class LassoWitness:
    """Ultimately periodic counterexample over total valuations of ``ap``."""

    ap: tuple
    stem: tuple
    loop: tuple

    def __post_init__(self):
        if not self.loop:
            raise ValueError("witness loop must be nonempty")

    def word(self) -> LassoWord:
        return LassoWord(self.stem, self.loop)

    def to_json(self) -> dict:
        from .lasso import format_lasso

        return {
            "ap": list(self.ap),
            "stem": [sorted(v) for v in self.stem],
            "loop": [sorted(v) for v in self.loop],
            "text": format_lasso(self.word()),
        }


# --------------------------------------------------------------------------
# construction helpers


class Builder:
    """Incremental construction keyed by arbitrary hashable state labels."""

    def __init__(self, ap, acc=0, state_cap=DEFAULT_STATE_CAP, deadline=None, what="automaton"):
        self.ap = tuple(ap)
        self.acc = acc
        self.ids: dict = {}
        self.labels: list = []
        self.edges: dict = {}
        self.state_cap = state_cap
        self.deadline = deadline
        self.what = what

    def state(self, label) -> tuple[int, bool]:
        i = self.ids.get(label)
        if i is not None:
            return i, False
        i = len(self.labels)
        if i >= self.state_cap:
            raise ResourceError(f"{self.what} exceeds state cap", limit=self.state_cap)
        if self.deadline is not None and i % 256 == 0 and time.monotonic() > self.deadline:
            raise ResourceError(f"{self.what} construction timed out", limit=self.deadline)
        self.ids[label] = i
        self.labels.append(label)
        return i, True

    def edge(self, src: int, guard: int, marks: int, dst: int):
        if not guard:
            return
        key = (src, dst, marks)
        self.edges[key] = self.edges.get(key, 0) | guard

    def build(self, name="") -> Tgba:
        edges = [Edge(s, g, m, d) for (s, d, m), g in self.edges.items()]
        edges.sort(key=lambda e: (e.src, e.dst, e.marks, e.guard))
        return Tgba(self.ap, max(len(self.labels), 1), 0, tuple(edges), self.acc, name)


def empty_automaton(ap=()) -> Tgba:
    return Tgba(tuple(ap), 1, 0, (), 1)


def universal_automaton(ap=()) -> Tgba:
    return Tgba(tuple(ap), 1, 0, (Edge(0, full_guard(len(ap)), 1, 0),), 1)


@lru_cache(maxsize=4096)
def _projection(sub: tuple, sup: tuple) -> tuple:
    """For each letter of ``sup``, the corresponding letter of ``sub``."""
    pos = [sup.index(a) for a in sub]
    out = []
    for v in range(1 << len(sup)):
        w = 0
        for j, p in enumerate(pos):
            if v >> p & 1:
                w |= 1 << j
        out.append(w)
    return tuple(out)


@lru_cache(maxsize=65536)
def lift_guard(guard: int, sub: tuple, sup: tuple) -> int:
    """Re-express a truth table over ``sub`` as one over ``sup`` (superset)."""
    if sub == sup:
        return guard
    proj = _projection(sub, sup)
    out = 0
    for v, w in enumerate(proj):
        if guard >> w & 1:
            out |= 1 << v
    return out


def merge_ap(a: Sequence[str], b: Sequence[str]) -> tuple:
    return tuple(a) + tuple(x for x in b if x not in a)


def with_ap(a: Tgba, ap: Sequence[str]) -> Tgba:
    """Same language, guards re-expressed over the superset ``ap``."""
    ap = tuple(ap)
    if ap == a.ap:
        return a
    missing = set(a.ap) - set(ap)
    if missing:
        raise ValueError(f"target alphabet lacks {sorted(missing)}")
    edges = [Edge(e.src, lift_guard(e.guard, a.ap, ap), e.marks, e.dst) for e in a.edges]
    return Tgba(ap, a.num_states, a.initial, tuple(edges), a.acc, a.name)


# --------------------------------------------------------------------------
# product


def product(a: Tgba, b: Tgba, state_cap=DEFAULT_STATE_CAP, deadline=None) -> Tgba:
    """Synchronous product; accepts the intersection of both languages.

    The result's marks are ``a``'s followed by ``b``'s shifted by ``a.acc``.
    """
    ap = merge_ap(a.ap, b.ap)
    bld = Builder(ap, a.acc + b.acc, state_cap, deadline, "product")
    start, _ = bld.state((a.initial, b.initial))
    todo = deque([(a.initial, b.initial)])
    la = {}
    lb = {}

    def lifted(cache, e, sub):
        g = cache.get(e)
        if g is None:
            g = cache[e] = lift_guard(e.guard, sub, ap)
        return g

    while todo:
        qa, qb = todo.popleft()
        src = bld.ids[(qa, qb)]
        for ea in a.out(qa):
            ga = lifted(la, ea, a.ap)
            for eb in b.out(qb):
                g = ga & lifted(lb, eb, b.ap)
                if not g:
                    continue
                dst, new = bld.state((ea.dst, eb.dst))
                if new:
                    todo.append((ea.dst, eb.dst))
                bld.edge(src, g, ea.marks | (eb.marks << a.acc), dst)
    return bld.build(name=f"({a.name} x {b.name})" if a.name and b.name else "")


def union(a: Tgba, b: Tgba) -> Tgba:
    """Disjoint sum with a fresh initial state. Acceptance sets are padded
    so that an automaton with fewer marks sees the missing ones everywhere."""
    ap = merge_ap(a.ap, b.ap)
    a, b = with_ap(a, ap), with_ap(b, ap)
    k = max(a.acc, b.acc, 1)

    def pad(m, own):
        return m | (((1 << k) - 1) & ~((1 << own) - 1))

    edges = []
    off_a, off_b = 1, 1 + a.num_states
    for e in a.edges:
        edges.append(Edge(e.src + off_a, e.guard, pad(e.marks, a.acc), e.dst + off_a))
        if e.src == a.initial:
            edges.append(Edge(0, e.guard, pad(e.marks, a.acc), e.dst + off_a))
    for e in b.edges:
        edges.append(Edge(e.src + off_b, e.guard, pad(e.marks, b.acc), e.dst + off_b))
        if e.src == b.initial:
            edges.append(Edge(0, e.guard, pad(e.marks, b.acc), e.dst + off_b))
    return trim(Tgba(ap, 1 + a.num_states + b.num_states, 0, tuple(edges), k))


# --------------------------------------------------------------------------
# SCCs and emptiness


def _reachable(a: Tgba) -> list[int]:
    seen = {a.initial}
    order = [a.initial]
    todo = [a.initial]
    while todo:
        q = todo.pop()
        for e in a.out(q):
            if e.dst not in seen:
                seen.add(e.dst)
                order.append(e.dst)
                todo.append(e.dst)
    return order


def sccs(num_states: int, succ, roots) -> list[list[int]]:
    """Iterative Tarjan; ``succ(q)`` yields successor states."""
    index = {}
    low = {}
    on_stack = set()
    stack = []
    out = []
    counter = 0
    for root in roots:
        if root in index:
            continue
        work = [(root, iter(succ(root)))]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            q, it = work[-1]
            advanced = False
            for r in it:
                if r not in index:
                    index[r] = low[r] = counter
                    counter += 1
                    stack.append(r)
                    on_stack.add(r)
                    work.append((r, iter(succ(r))))
                    advanced = True
                    break
                if r in on_stack and index[r] < low[q]:
                    low[q] = index[r]
            if advanced:
                continue
            work.pop()
            if work:
                p = work[-1][0]
                if low[q] < low[p]:
                    low[p] = low[q]
            if low[q] == index[q]:
                comp = []
                while True:
                    r = stack.pop()
                    on_stack.discard(r)
                    comp.append(r)
                    if r == q:
                        break
                out.append(comp)
    return out


def accepting_sccs(a: Tgba, roots=None) -> list[set[int]]:
    """SCCs (reachable from ``roots``) whose internal edges carry every mark."""
    roots = [a.initial] if roots is None else roots
    comps = sccs(a.num_states, lambda q: [e.dst for e in a.out(q)], roots)
    found = []
    for comp in comps:
        members = set(comp)
        marks = 0
        internal = False
        for q in comp:
            for e in a.out(q):
                if e.dst in members:
                    internal = True
                    marks |= e.marks
        if internal and marks & a.all_marks == a.all_marks:
            found.append(members)
    return found


def _bfs_path(a: Tgba, start: int, goal, allowed=None):
    """Shortest edge path from ``start`` to a state with ``goal(q)``
    (zero-length allowed). ``goal`` may also test edges via ``goal_edge``."""
    if goal(start):
        return []
    prev = {start: None}
    todo = deque([start])
    while todo:
        q = todo.popleft()
        for e in a.out(q):
            if allowed is not None and e.dst not in allowed:
                continue
            if e.dst in prev:
                continue
            prev[e.dst] = e
            if goal(e.dst):
                path = []
                r = e.dst
                while prev[r] is not None:
                    path.append(prev[r])
                    r = prev[r].src
                return path[::-1]
            todo.append(e.dst)
    return None


def _accepting_cycle(a: Tgba, comp: set[int], entry: int) -> list[Edge]:
    internal = [e for q in comp for e in a.out(q) if e.dst in comp]
    cycle = []
    cur = entry
    needed = a.all_marks
    while needed or not cycle:
        # edge that contributes a still-needed mark (any internal edge if k=0)
        targets = [e for e in internal if (e.marks & needed) or not needed]
        target_srcs = {e.src for e in targets}
        path = _bfs_path(a, cur, lambda q: q in target_srcs, comp)
        cycle.extend(path)
        cur = path[-1].dst if path else cur
        e = next(e for e in targets if e.src == cur)
        cycle.append(e)
        needed &= ~e.marks
        cur = e.dst
    back = _bfs_path(a, cur, lambda q: q == entry, comp)
    cycle.extend(back)
    return cycle


def _edge_letter(e: Edge) -> int:
    return (e.guard & -e.guard).bit_length() - 1


def find_accepting_lasso(a: Tgba):
    """Return ``(stem_edges, loop_edges)`` of an accepting run, or None."""
    comps = accepting_sccs(a)
    if not comps:
        return None
    comp = comps[0]
    stem = _bfs_path(a, a.initial, lambda q: q in comp)
    entry = stem[-1].dst if stem else a.initial
    loop = _accepting_cycle(a, comp, entry)
    return stem, loop


def is_empty(a: Tgba) -> tuple[bool, LassoWitness | None]:
    """Emptiness check; a nonempty answer carries an accepted lasso."""
    run = find_accepting_lasso(a)
    if run is None:
        return True, None
    stem, loop = run
    letters = LassoWord(tuple(_edge_letter(e) for e in stem), tuple(_edge_letter(e) for e in loop))
    w = from_letters(letters, a.ap)
    return False, LassoWitness(a.ap, w.stem, w.loop)


# --------------------------------------------------------------------------
# lasso membership


def _reach_after(a: Tgba, stem_letters: Sequence[int]) -> set[int]:
    succ = a.letter_succ()
    cur = {a.initial}
    for v in stem_letters:
        cur = {d for q in cur for d, _ in succ[q][v]}
        if not cur:
            break
    return cur


def _good_for_loop(a: Tgba, loop_letters: Sequence[int]) -> set[int]:
    """States from which ``loop^omega`` has an accepting run."""
    succ = a.letter_succ()
    n = len(loop_letters)
    full = a.all_marks

    def nxt(node):
        q, i = node
        return [(d, (i + 1) % n) for d, _ in succ[q][loop_letters[i]]]

    roots = [(q, 0) for q in range(a.num_states)]
    comps = sccs(a.num_states * n, nxt, roots)
    good_nodes = set()
    # Tarjan emits SCCs in reverse topological order: successors first
    for comp in comps:
        members = set(comp)
        marks = 0
        internal = False
        reaches_good = False
        for node in comp:
            q, i = node
            for d, m in succ[q][loop_letters[i]]:
                t = (d, (i + 1) % n)
                if t in members:
                    internal = True
                    marks |= m
                elif t in good_nodes:
                    reaches_good = True
        if reaches_good or (internal and marks & full == full):
            good_nodes |= members
    return {q for q, i in good_nodes if i == 0}


def accepts_lasso(a: Tgba, w: LassoWord | LassoWitness) -> bool:
    """Membership of ``stem . loop^omega``; symbols are valuations (sets of
    true atoms, atoms outside ``a.ap`` ignored) or integer letters."""
    if isinstance(w, LassoWitness):
        w = w.word()
    if w.loop and not isinstance(w.loop[0], int):
        w = to_letters(w, a.ap)
    reach = _reach_after(a, w.stem)
    if not reach:
        return False
    return bool(reach & _good_for_loop(a, w.loop))


def acceptance_matrix(a: Tgba, stems: Sequence[tuple], loops: Sequence[tuple]):
    """Boolean matrix ``M[i, j]`` = ``stems[i] . loops[j]^omega`` accepted.

    Words use integer letters over ``a.ap``. Reachable sets after each stem
    and good states of each loop are computed once, so bulk membership over
    many lassos costs one matrix product.
    """
    import numpy as np

    n = a.num_states
    reach = np.zeros((len(stems), n), dtype=np.float32)
    succ = a.letter_succ()
    memo = {(): frozenset([a.initial])}
    for i, s in enumerate(stems):
        cur = memo.get(s)
        if cur is None:
            prev = memo.get(s[:-1])
            if prev is None:
                prev = frozenset(_reach_after(a, s[:-1]))
                memo[s[:-1]] = prev
            cur = frozenset(d for q in prev for d, _ in succ[q][s[-1]])
            memo[s] = cur
        for q in cur:
            reach[i, q] = 1.0
    good = np.zeros((len(loops), n), dtype=np.float32)
    for j, u in enumerate(loops):
        for q in _good_for_loop(a, u):
            good[j, q] = 1.0
    return (reach @ good.T) > 0.5


# --------------------------------------------------------------------------
# cleanup


def trim(a: Tgba) -> Tgba:
    """Drop states that are unreachable or cannot reach an accepting cycle."""
    reach = _reachable(a)
    live = set()
    for comp in accepting_sccs(a):
        live |= comp
    # backward closure inside the reachable part
    rev = {}
    reach_set = set(reach)
    for e in a.edges:
        if e.src in reach_set:
            rev.setdefault(e.dst, []).append(e.src)
    todo = list(live)
    while todo:
        q = todo.pop()
        for p in rev.get(q, ()):
            if p not in live:
                live.add(p)
                todo.append(p)
    if not live:
        return empty_automaton(a.ap)
    keep = [q for q in reach if q in live]
    if a.initial not in live:
        return empty_automaton(a.ap)
    ren = {q: i for i, q in enumerate(keep)}
    edges = [Edge(ren[e.src], e.guard, e.marks, ren[e.dst]) for e in a.edges
             if e.src in ren and e.dst in ren]
    return Tgba(a.ap, len(keep), ren[a.initial], tuple(edges), a.acc, a.name)


def quotient_bisimilar(a: Tgba) -> Tgba:
    """Merge forward-bisimilar states (same guards, marks and successor
    classes). Language preserving; used to shrink inputs to complementation."""
    block = [0] * a.num_states
    n_blocks = 1
    while True:
        sigs = {}
        new = []
        for q in range(a.num_states):
            sig = (block[q], frozenset((e.guard, e.marks, block[e.dst]) for e in a.out(q)))
            new.append(sigs.setdefault(sig, len(sigs)))
        if len(sigs) == n_blocks:
            break
        block, n_blocks = new, len(sigs)
    if n_blocks == a.num_states:
        return a
    merged = {}
    for e in a.edges:
        key = (block[e.src], block[e.dst], e.marks)
        merged[key] = merged.get(key, 0) | e.guard
    edges = tuple(Edge(s, g, m, d) for (s, d, m), g in sorted(merged.items()))
    return Tgba(a.ap, n_blocks, block[a.initial], edges, a.acc, a.name)


def is_empty_language(a: Tgba) -> bool:
    return not accepting_sccs(a)


# --------------------------------------------------------------------------
# degeneralization


def degeneralize(a: Tgba) -> Tgba:
    """Equivalent automaton with a single acceptance mark.

    States are ``(q, level)``; the level counts how many marks of the
    current round have been seen and an edge is accepting when a round
    completes.
    """
    if a.acc == 1:
        return a
    if a.acc == 0:
        edges = tuple(Edge(e.src, e.guard, 1, e.dst) for e in a.edges)
        return Tgba(a.ap, a.num_states, a.initial, edges, 1, a.name)
    k = a.acc
    bld = Builder(a.ap, 1, what="degeneralization")
    bld.state((a.initial, 0))
    todo = deque([(a.initial, 0)])
    while todo:
        q, lvl = todo.popleft()
        src = bld.ids[(q, lvl)]
        for e in a.out(q):
            j = lvl
            while j < k and e.marks >> j & 1:
                j += 1
            acc = 0
            if j == k:
                acc = 1
                j = 0
                while j < k - 1 and e.marks >> j & 1:
                    j += 1
                # a full round on this edge again does not need a second mark
            dst, new = bld.state((e.dst, j))
            if new:
                todo.append((e.dst, j))
            bld.edge(src, e.guard, acc, dst)
    return bld.build(name=a.name)


# --------------------------------------------------------------------------
# direct simulation


def direct_simulation(a: Tgba) -> list[set[int]]:
    """``sim[q]`` = states that simulate ``q``: for every edge of ``q`` they
    have an edge on the same letter with at least the same marks to a state
    simulating its target."""
    succ = a.letter_succ()
    n = a.num_states
    sim = [set(range(n)) for _ in range(n)]
    # quick pre-filter on enabled letters
    enabled = [frozenset(v for v in range(a.n_letters) if succ[q][v]) for q in range(n)]
    for q in range(n):
        sim[q] = {r for r in sim[q] if enabled[q] <= enabled[r]}
    changed = True
    while changed:
        changed = False
        for q in range(n):
            drop = []
            for r in sim[q]:
                if r == q:
                    continue
                ok = True
                for v in enabled[q]:
                    rs = succ[r][v]
                    for d, m in succ[q][v]:
                        if not any((m & ~m2) == 0 and d2 in sim[d] for d2, m2 in rs):
                            ok = False
                            break
                    if not ok:
                        break
                if not ok:
                    drop.append(r)
            if drop:
                sim[q].difference_update(drop)
                changed = True
    return sim


def reduce_simulation(a: Tgba) -> Tgba:
    """Merge simulation-equivalent states and drop edges dominated by a
    sibling edge (same letter, superset of marks, simulating target).
    Language preserving."""
    a = trim(a)
    if not a.edges:
        return a
    sim = direct_simulation(a)
    n = a.num_states
    rep = list(range(n))
    for q in range(n):
        for r in range(q):
            if r in sim[q] and q in sim[r]:
                rep[q] = rep[r]
                break
    succ = a.letter_succ()
    merged = {}
    for q in range(n):
        if rep[q] != q:
            continue
        for v in range(a.n_letters):
            outs = {(rep[d], m) for d, m in succ[q][v]}
            keep = []
            for d, m in outs:
                dominated = any(
                    (d2, m2) != (d, m) and (m & ~m2) == 0 and d2 in sim[d]
                    for d2, m2 in outs
                )
                if not dominated:
                    keep.append((d, m))
            for d, m in keep:
                merged[(q, d, m)] = merged.get((q, d, m), 0) | (1 << v)
    ids = {q: i for i, q in enumerate(sorted(set(rep)))}
    edges = tuple(Edge(ids[s], g, m, ids[d]) for (s, d, m), g in sorted(merged.items()))
    return trim(Tgba(a.ap, len(ids), ids[rep[a.initial]], edges, a.acc, a.name))
