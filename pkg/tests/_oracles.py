"""Small independent oracles shared by the tests."""

from functools import lru_cache

from stutterkit import ltl
from stutterkit.lasso import LassoWord, enumerate_lassos, valuation_letters


def lassos(ap, stem_max, loop_max):
    """All normalized lassos over valuations of ``ap`` within the bounds."""
    vals = valuation_letters(tuple(ap))
    return [w.map(vals.__getitem__) for w in enumerate_lassos(range(len(vals)), stem_max, loop_max)]


def naive_holds(f, w: LassoWord) -> bool:
    """Textbook LTL semantics on a lasso, by recursion over positions.

    Positions past the stem are folded onto the loop; any position is
    reachable from any loop position within ``len(w)`` steps, so temporal
    operators only ever need to look that far ahead.
    """
    if isinstance(f, str):
        f = ltl.parse(f)
    s, n = len(w.stem), len(w.loop)
    horizon = s + n

    def fold(i):
        return i if i < s else s + (i - s) % n

    @lru_cache(maxsize=None)
    def ev(g, i):
        k = g.kind
        if k == ltl.TRUE:
            return True
        if k == ltl.FALSE:
            return False
        if k == ltl.ATOM:
            return g.name in w.at(i)
        if k == ltl.NOT:
            return not ev(g.children[0], i)
        if k == ltl.AND:
            return ev(g.children[0], i) and ev(g.children[1], i)
        if k == ltl.OR:
            return ev(g.children[0], i) or ev(g.children[1], i)
        if k == ltl.IMPLIES:
            return (not ev(g.children[0], i)) or ev(g.children[1], i)
        if k == ltl.NEXT:
            return ev(g.children[0], fold(i + 1))
        if k == ltl.EVENTUALLY:
            return any(ev(g.children[0], fold(i + d)) for d in range(horizon))
        if k == ltl.GLOBALLY:
            return all(ev(g.children[0], fold(i + d)) for d in range(horizon))
        if k == ltl.UNTIL:
            a, b = g.children
            for d in range(horizon):
                j = fold(i + d)
                if ev(b, j):
                    return True
                if not ev(a, j):
                    return False
            return False
        if k == ltl.RELEASE:
            a, b = g.children
            for d in range(horizon):
                j = fold(i + d)
                if not ev(b, j):
                    return False
                if ev(a, j):
                    return True
            return True
        raise AssertionError(k)

    return ev(f, 0)
