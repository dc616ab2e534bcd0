"""Ultimately periodic words: normal forms, block decomposition, the
shorter-than order and stutter equivalence.

Symbols are arbitrary hashable values. Valuations are usually frozensets of
true atom names; bulk enumeration uses integer letters (bit ``j`` set when
``ap[j]`` holds).
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from functools import lru_cache
from math import gcd
from typing import Hashable, Iterable, Sequence


@dataclass(frozen=True)
class LassoWord:
    """The omega-word ``stem . loop^omega``."""

    stem: tuple
    loop: tuple

    def __post_init__(self):
        object.__setattr__(self, "stem", tuple(self.stem))
        object.__setattr__(self, "loop", tuple(self.loop))
        if not self.loop:
            raise ValueError("loop must be nonempty")

    def __len__(self):
        return len(self.stem) + len(self.loop)

    def at(self, i: int):
        """Symbol at position ``i`` of the infinite word."""
        s = len(self.stem)
        if i < s:
            return self.stem[i]
        return self.loop[(i - s) % len(self.loop)]

    def prefix(self, n: int) -> tuple:
        return tuple(self.at(i) for i in range(n))

    def is_omega_word(self) -> bool:
        """True when the word ends with an infinite stutter on one symbol."""
        return len(set(self.loop)) == 1

    def map(self, fn) -> LassoWord:
        return LassoWord(tuple(map(fn, self.stem)), tuple(map(fn, self.loop)))


def _primitive_root(loop: tuple) -> tuple:
    n = len(loop)
    for d in range(1, n + 1):
        if n % d == 0 and loop[:d] * (n // d) == loop:
            return loop[:d]
    return loop


def normalize(w: LassoWord) -> LassoWord:
    """Unique representative: primitive loop, shortest possible stem."""
    stem = list(w.stem)
    loop = _primitive_root(w.loop)
    while stem and stem[-1] == loop[-1]:
        stem.pop()
        loop = (loop[-1],) + loop[:-1]
    return LassoWord(tuple(stem), loop)


def _blocks(seq: Sequence) -> list:
    out = []
    for sym in seq:
        if out and out[-1][0] == sym:
            out[-1][1] += 1
        else:
            out.append([sym, 1])
    return [(s, n) for s, n in out]


@dataclass(frozen=True)
class BlockForm:
    """Block decomposition ``a0^n0 a1^n1 ...`` of a lasso.

    For an omega-word ``loop_blocks`` is empty and ``omega`` holds the final
    symbol; otherwise the infinite block sequence is ``stem_blocks`` followed
    by ``loop_blocks`` repeated forever.
    """

    stem_blocks: tuple
    loop_blocks: tuple
    omega: Hashable = None

    @property
    def is_omega(self) -> bool:
        return not self.loop_blocks


def block_form(w: LassoWord) -> BlockForm:
    w = normalize(w)
    if len(w.loop) == 1:
        return BlockForm(tuple(_blocks(w.stem)), (), w.loop[0])
    u = w.loop
    n = len(u)
    # first in-loop block boundary: the tail from there is rot(u, j)^omega
    j = next(j for j in range(1, n + 1) if u[j % n] != u[j - 1])
    prefix = w.stem + u[:j]
    rot = u[j % n:] + u[:j % n]
    return BlockForm(tuple(_blocks(prefix)), tuple(_blocks(rot)))


def _lcm(a: int, b: int) -> int:
    return a * b // gcd(a, b)


def _block_at(bf: BlockForm, i: int):
    if i < len(bf.stem_blocks):
        return bf.stem_blocks[i]
    return bf.loop_blocks[(i - len(bf.stem_blocks)) % len(bf.loop_blocks)]


def shorter_than(w1: LassoWord, w2: LassoWord) -> bool:
    """``w1 <= w2``: same block symbols, every block of ``w1`` no longer."""
    b1, b2 = block_form(w1), block_form(w2)
    if b1.is_omega != b2.is_omega:
        return False
    if b1.is_omega:
        if b1.omega != b2.omega or len(b1.stem_blocks) != len(b2.stem_blocks):
            return False
        return all(s1 == s2 and n1 <= n2
                   for (s1, n1), (s2, n2) in zip(b1.stem_blocks, b2.stem_blocks))
    horizon = (max(len(b1.stem_blocks), len(b2.stem_blocks))
               + _lcm(len(b1.loop_blocks), len(b2.loop_blocks)))
    for i in range(horizon):
        s1, n1 = _block_at(b1, i)
        s2, n2 = _block_at(b2, i)
        if s1 != s2 or n1 > n2:
            return False
    return True


def canonical_shortest(w: LassoWord) -> LassoWord:
    """Shortest word of the stutter class of ``w`` (all exponents 1)."""
    bf = block_form(w)
    stem = tuple(s for s, _ in bf.stem_blocks)
    if bf.is_omega:
        return normalize(LassoWord(stem, (bf.omega,)))
    return normalize(LassoWord(stem, tuple(s for s, _ in bf.loop_blocks)))


def stutter_equivalent(w1: LassoWord, w2: LassoWord) -> bool:
    return canonical_shortest(w1) == canonical_shortest(w2)


def _prefix_blocks_check(w1: LassoWord, w2: LassoWord) -> bool:
    """Fallback decision of ``w1 <= w2`` from long finite prefixes.

    Used in tests to cross-check :func:`shorter_than`.
    """
    b1, b2 = block_form(w1), block_form(w2)
    if b1.is_omega != b2.is_omega:
        return False
    if b1.is_omega:
        return shorter_than(w1, w2)
    n = (len(w1) + len(w2)) * 4 * _lcm(len(w1.loop), len(w2.loop))
    p1 = _blocks(normalize(w1).prefix(n))
    p2 = _blocks(normalize(w2).prefix(n))
    # drop the last (possibly truncated) block of each prefix
    k = min(len(p1), len(p2)) - 1
    return all(s1 == s2 and n1 <= n2 for (s1, n1), (s2, n2) in zip(p1[:k], p2[:k]))


# --------------------------------------------------------------------------
# enumeration


def primitive_loops(alphabet: Sequence, loop_max: int) -> list[tuple]:
    out = []
    for n in range(1, loop_max + 1):
        for u in itertools.product(alphabet, repeat=n):
            if _primitive_root(u) == u:
                out.append(u)
    return out


def all_stems(alphabet: Sequence, stem_max: int) -> list[tuple]:
    out = []
    for n in range(stem_max + 1):
        out.extend(itertools.product(alphabet, repeat=n))
    return out


def enumerate_lassos(alphabet: Sequence, stem_max: int, loop_max: int) -> Iterable[LassoWord]:
    """All distinct words with a representation of stem <= stem_max and
    loop <= loop_max, each yielded once in normal form."""
    for u in primitive_loops(alphabet, loop_max):
        for s in all_stems(alphabet, stem_max):
            if not s or s[-1] != u[-1]:
                yield LassoWord(s, u)


def valuation_letters(ap: Sequence[str]) -> list[frozenset]:
    """Valuations of ``ap`` indexed by their integer letter."""
    return [frozenset(a for j, a in enumerate(ap) if v >> j & 1) for v in range(1 << len(ap))]


def to_letters(w: LassoWord, ap: Sequence[str]) -> LassoWord:
    """Convert a word over valuations (sets of true atoms) to integer letters."""
    index = {a: j for j, a in enumerate(ap)}

    def enc(val):
        v = 0
        for a in val:
            if a in index:
                v |= 1 << index[a]
        return v

    return w.map(enc)


def from_letters(w: LassoWord, ap: Sequence[str]) -> LassoWord:
    vals = valuation_letters(ap)
    return w.map(lambda v: vals[v])


# --------------------------------------------------------------------------
# literal syntax: "{p}{p,q};{}"

_VAL = re.compile(r"\{([^{}]*)\}")


def _parse_vals(text: str) -> tuple:
    text = text.strip()
    out = []
    pos = 0
    while pos < len(text):
        if text[pos].isspace():
            pos += 1
            continue
        m = _VAL.match(text, pos)
        if not m:
            raise ValueError(f"bad valuation at offset {pos} in {text!r}")
        names = [x for x in re.split(r"[\s,]+", m.group(1)) if x]
        out.append(frozenset(names))
        pos = m.end()
    return tuple(out)


def parse_lasso(text: str) -> LassoWord:
    if text.count(";") != 1:
        raise ValueError("lasso literal needs exactly one ';' between stem and loop")
    stem, loop = text.split(";")
    loop_vals = _parse_vals(loop)
    if not loop_vals:
        raise ValueError("lasso loop must be nonempty")
    return LassoWord(_parse_vals(stem), loop_vals)


def format_lasso(w: LassoWord) -> str:
    def fmt(vals):
        return "".join("{" + ",".join(sorted(v)) + "}" for v in vals)

    return fmt(w.stem) + ";" + fmt(w.loop)


# --------------------------------------------------------------------------
# bounded sensitivity oracle
#
# Violations are searched along covering pairs of the order restricted to
# bounded words: if any bounded pair w' <= w has w accepted and w' rejected,
# some covering step on a chain between them does too. Covering pairs are
# computed once on letter patterns (letters renamed by first occurrence) and
# instantiated for a concrete alphabet by injective renamings.


def _pattern(w: LassoWord) -> LassoWord:
    ren = {}
    for sym in w.stem + w.loop:
        if sym not in ren:
            ren[sym] = len(ren)
    return w.map(ren.__getitem__)


def _restricted_growth(n: int, start_max: int):
    """Sequences over 0.. where each value is at most one more than the
    running maximum (``start_max`` = maximum so far)."""
    def rec(prefix, mx):
        if len(prefix) == n:
            yield tuple(prefix)
            return
        for v in range(mx + 2):
            prefix.append(v)
            yield from rec(prefix, max(mx, v))
            prefix.pop()
    yield from rec([], start_max)


@lru_cache(maxsize=16)
def pattern_cover_pairs(stem_max: int, loop_max: int) -> tuple:
    """Covering pairs ``(lower, upper)`` among normalized pattern words
    within the bounds."""
    words = []
    for s_len in range(stem_max + 1):
        for L in range(1, loop_max + 1):
            for seq in _restricted_growth(s_len + L, -1):
                w = LassoWord(seq[:s_len], seq[s_len:])
                if normalize(w) == w and _pattern(w) == w:
                    words.append(w)
    groups = {}
    for w in words:
        groups.setdefault(canonical_shortest(w), []).append(w)
    pairs = []
    for members in groups.values():
        below = {w: {v for v in members if v != w and shorter_than(v, w)} for w in members}
        for w, lows in below.items():
            for v in lows:
                # v covers-below w unless something sits strictly between
                if not any(v in below[x] for x in lows if x != v):
                    pairs.append((v, w))
    return tuple(pairs)


@lru_cache(maxsize=64)
def _injections(n_letters: int, m: int):
    import numpy as np

    return np.array(list(itertools.permutations(range(n_letters), m)), dtype=np.int64).reshape(-1, m)


@dataclass
class SensitivityReport:
    """Outcome of :func:`bounded_sensitivity_oracle`.

    Example pairs are ``(shorter, longer)`` over valuations; counts cover
    every violating covering pair found.
    """

    stem_max: int
    loop_max: int
    words_checked: int
    shortening_count: int
    lengthening_count: int
    shortening: list
    lengthening: list

    @property
    def shortening_insensitive_at_bound(self) -> bool:
        return self.shortening_count == 0

    @property
    def lengthening_insensitive_at_bound(self) -> bool:
        return self.lengthening_count == 0


def _semantic_matrix(f, ap, stems, loops):
    """Acceptance matrix computed by evaluating ``f`` directly on each word."""
    import numpy as np

    from .evaluate import holds_bulk

    acc = np.zeros((len(stems), len(loops)), dtype=bool)
    by_len_s, by_len_l = {}, {}
    for i, s in enumerate(stems):
        by_len_s.setdefault(len(s), []).append(i)
    for j, u in enumerate(loops):
        by_len_l.setdefault(len(u), []).append(j)
    for sl, rows in by_len_s.items():
        S = np.array([stems[i] for i in rows], dtype=np.int64).reshape(len(rows), sl)
        for ll, cols in by_len_l.items():
            L = np.array([loops[j] for j in cols], dtype=np.int64)
            ss = np.repeat(S, len(cols), axis=0)
            uu = np.tile(L, (len(rows), 1))
            acc[np.ix_(rows, cols)] = holds_bulk(f, ap, ss, uu).reshape(len(rows), len(cols))
    return acc


def bounded_sensitivity_oracle(a, stem_max: int = 4, loop_max: int = 3, examples: int = 10,
                               ap=None) -> SensitivityReport:
    """Search all normalized lassos within the bounds for words ``w`` in
    L(a) with a comparable bounded word outside L(a).

    ``a`` is an automaton, or a formula that is then evaluated directly on
    every word.

    A shortening violation is ``w' <= w`` with ``w'`` rejected, a
    lengthening violation ``w <= w'`` with ``w'`` rejected.
    """
    import numpy as np

    from .automata import Tgba, acceptance_matrix, with_ap

    if stem_max < 0 or loop_max < 1:
        raise ValueError("bounds must satisfy stem_max >= 0 and loop_max >= 1")
    if isinstance(a, Tgba):
        if ap is not None:
            a = with_ap(a, ap)
        ap = a.ap
    else:
        from . import ltl

        a = ltl.parse(a) if isinstance(a, str) else a
        ap = tuple(sorted(ltl.atoms(a))) if ap is None else tuple(ap)
    n = 1 << len(ap)
    alphabet = range(n)
    stems = all_stems(alphabet, stem_max)
    loops = primitive_loops(alphabet, loop_max)
    if isinstance(a, Tgba):
        acc = acceptance_matrix(a, stems, loops)
    else:
        acc = _semantic_matrix(a, ap, stems, loops)
    stem_off = [0]
    for k in range(stem_max + 1):
        stem_off.append(stem_off[-1] + n ** k)
    loop_code = {}
    for j, u in enumerate(loops):
        code = 0
        for x in u:
            code = code * n + x
        loop_code[(len(u), code)] = j
    loop_lookup = {}
    for L in range(1, loop_max + 1):
        arr = np.full(n ** L, -1, dtype=np.int64)
        for (ln, code), j in loop_code.items():
            if ln == L:
                arr[code] = j
        loop_lookup[L] = arr

    def index(w: LassoWord, sigma):
        s_code = np.zeros(len(sigma), dtype=np.int64)
        for x in w.stem:
            s_code = s_code * n + sigma[:, x]
        u_code = np.zeros(len(sigma), dtype=np.int64)
        for x in w.loop:
            u_code = u_code * n + sigma[:, x]
        return stem_off[len(w.stem)] + s_code, loop_lookup[len(w.loop)][u_code]

    vals = valuation_letters(ap)
    short_ex, long_ex = [], []
    short_n = long_n = 0
    for low, high in pattern_cover_pairs(stem_max, loop_max):
        m = 1 + max(high.stem + high.loop)
        if m > n:
            continue
        sigma = _injections(n, m)
        ls, ll = index(low, sigma)
        hs, hl = index(high, sigma)
        acc_low = acc[ls, ll]
        acc_high = acc[hs, hl]
        shorten = np.nonzero(acc_high & ~acc_low)[0]
        lengthen = np.nonzero(acc_low & ~acc_high)[0]
        short_n += len(shorten)
        long_n += len(lengthen)
        for bucket, hits in ((short_ex, shorten), (long_ex, lengthen)):
            for i in hits[: max(0, examples - len(bucket))]:
                ren = [vals[x] for x in sigma[i]]
                bucket.append((low.map(ren.__getitem__), high.map(ren.__getitem__)))
    words = sum(1 for u in loops for s in stems if not s or s[-1] != u[-1])
    return SensitivityReport(stem_max, loop_max, words, short_n, long_n, short_ex, long_ex)


@dataclass
class BoundedOrder:
    """The order ⪯ restricted to normalized lassos with stem <= stem_max and
    loop <= loop_max over ``n`` integer letters.

    Word ``i * len(loops) + j`` is ``stems[i] . loops[j]^omega``; ids whose
    stem ends with the loop's last letter are not normalized and never
    appear in ``low``/``high``/``canon``.
    """

    n: int
    stems: list
    loops: list
    low: object   # covering pairs: low[k] ⪯ high[k]
    high: object
    canon: dict   # word id -> id of its shortest stutter-equivalent word

    @property
    def size(self) -> int:
        return len(self.stems) * len(self.loops)

    def word(self, k: int) -> LassoWord:
        i, j = divmod(int(k), len(self.loops))
        return LassoWord(self.stems[i], self.loops[j])

    def word_id(self, w: LassoWord) -> int:
        return self.stems.index(tuple(w.stem)) * len(self.loops) + self.loops.index(tuple(w.loop))

    def valid_ids(self):
        return [i * len(self.loops) + j for i, s in enumerate(self.stems)
                for j, u in enumerate(self.loops) if not s or s[-1] != u[-1]]

    def outside_below(self, accepted):
        """``r[k]``: some word strictly below word k is rejected."""
        return self._propagate(accepted, self.low, self.high)

    def outside_above(self, accepted):
        return self._propagate(accepted, self.high, self.low)

    def _propagate(self, accepted, src, dst):
        import numpy as np

        acc = np.asarray(accepted, dtype=bool).reshape(-1)
        out = np.zeros(acc.shape, dtype=bool)
        while True:
            new = out.copy()
            np.logical_or.at(new, dst, ~acc[src] | out[src])
            if np.array_equal(new, out):
                return out
            out = new


def bounded_order(n_letters: int, stem_max: int, loop_max: int) -> BoundedOrder:
    """Instantiate the pattern covering pairs for ``n_letters`` letters."""
    import numpy as np

    alphabet = range(n_letters)
    stems = all_stems(alphabet, stem_max)
    loops = primitive_loops(alphabet, loop_max)
    s_id = {s: i for i, s in enumerate(stems)}
    l_id = {u: j for j, u in enumerate(loops)}
    nl = len(loops)

    def ids(w, sigma):
        out = np.empty(len(sigma), dtype=np.int64)
        for r, perm in enumerate(sigma):
            out[r] = s_id[tuple(perm[x] for x in w.stem)] * nl + l_id[tuple(perm[x] for x in w.loop)]
        return out

    lows, highs = [], []
    for low, high in pattern_cover_pairs(stem_max, loop_max):
        m = 1 + max(high.stem + high.loop)
        if m > n_letters:
            continue
        sigma = [tuple(int(x) for x in row) for row in _injections(n_letters, m)]
        lows.append(ids(low, sigma))
        highs.append(ids(high, sigma))
    canon = {}
    for i, s in enumerate(stems):
        for j, u in enumerate(loops):
            if s and s[-1] == u[-1]:
                continue
            c = canonical_shortest(LassoWord(s, u))
            canon[i * nl + j] = s_id[c.stem] * nl + l_id[c.loop]
    empty = np.zeros(0, dtype=np.int64)
    return BoundedOrder(n_letters, stems, loops,
                        np.concatenate(lows) if lows else empty,
                        np.concatenate(highs) if highs else empty, canon)


def comparable_words_automaton(w: LassoWord, ap: Sequence[str], relation: str):
    """Automaton for the words related to ``w``: ``"below"`` (v ⪯ w),
    ``"above"`` (w ⪯ v) or ``"class"`` (v ∼ w). Symbols of ``w`` are
    integer letters over ``ap``."""
    from .automata import Builder

    if relation not in ("below", "above", "class"):
        raise ValueError(f"unknown relation {relation!r}")
    bf = block_form(w)
    blocks = list(bf.stem_blocks) + list(bf.loop_blocks)
    first_loop = len(bf.stem_blocks)
    if bf.is_omega:
        blocks.append((bf.omega, 1))
    omega_at = len(blocks) - 1 if bf.is_omega else None

    def bounds(i):
        n = blocks[i][1]
        if i == omega_at:
            return 1, None
        if relation == "below":
            return 1, n
        if relation == "above":
            return n, None
        return 1, None

    bld = Builder(ap, 1, what="comparable words")
    bld.state("start")
    # state (i, j): j copies of block i read so far (j capped at its minimum when unbounded)
    def node(i, j):
        return bld.state((i, j))[0]

    def next_block(i):
        if i + 1 < len(blocks):
            return i + 1, False
        return first_loop, True  # wrap around the loop

    todo = [(0, 1)]
    bld.edge(0, 1 << blocks[0][0], 0, node(0, 1))
    seen = {(0, 1)}
    while todo:
        i, j = todo.pop()
        src = node(i, j)
        lo, hi = bounds(i)
        sym = blocks[i][0]
        targets = []
        if i == omega_at:
            bld.edge(src, 1 << sym, 1, src)
            continue
        if hi is None and j >= lo:
            bld.edge(src, 1 << sym, 0, src)
        elif hi is None or j < hi:
            targets.append(((i, j + 1), 1 << sym, 0))
        if j >= lo:
            k, wrapped = next_block(i)
            targets.append(((k, 1), 1 << blocks[k][0], 1 if wrapped else 0))
        for key, g, m in targets:
            dst = node(*key)
            bld.edge(src, g, m, dst)
            if key not in seen:
                seen.add(key)
                todo.append(key)
    return bld.build(name=f"{relation}({format_lasso(w) if not isinstance(w.loop[0], int) else w})")
