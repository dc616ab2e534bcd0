"""Hypothesis strategies for formulas and words."""

from hypothesis import strategies as st

from stutterkit import ltl
from stutterkit.lasso import LassoWord

ATOMS = ("p", "q")

leaves = st.one_of(st.sampled_from(ATOMS).map(ltl.atom), st.sampled_from([ltl.T, ltl.F_]))


def _extend(sub):
    return st.one_of(
        st.builds(ltl.lnot, sub),
        st.builds(ltl.nxt, sub),
        st.builds(ltl.eventually, sub),
        st.builds(ltl.globally, sub),
        st.builds(ltl.land, sub, sub),
        st.builds(ltl.lor, sub, sub),
        st.builds(ltl.implies, sub, sub),
        st.builds(ltl.until, sub, sub),
        st.builds(ltl.release, sub, sub),
    )


formulas = st.recursive(leaves, _extend, max_leaves=6)

valuations = st.frozensets(st.sampled_from(ATOMS))


def lasso_words(symbols=valuations, stem=3, loop=3):
    return st.builds(LassoWord, st.lists(symbols, max_size=stem).map(tuple),
                     st.lists(symbols, min_size=1, max_size=loop).map(tuple))


@st.composite
def automata(draw, ap=("p",), max_states=3, max_acc=2):
    """Small random TGBA over ``ap``."""
    from stutterkit.automata import Edge, Tgba

    n = draw(st.integers(1, max_states))
    acc = draw(st.integers(0, max_acc))
    full = (1 << (1 << len(ap))) - 1
    edges = draw(st.lists(st.tuples(st.integers(0, n - 1), st.integers(1, full),
                                    st.integers(0, (1 << acc) - 1), st.integers(0, n - 1)),
                          max_size=3 * n))
    return Tgba(ap, n, 0, tuple(Edge(*e) for e in edges), acc)
