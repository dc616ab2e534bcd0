import numpy as np
from hypothesis import given, settings

from stutterkit import ltl
from stutterkit.evaluate import holds, holds_bulk
from stutterkit.lasso import LassoWord, to_letters

from _oracles import naive_holds
from strategies import formulas, lasso_words


def test_examples():
    p1, p0 = frozenset({"p"}), frozenset()
    assert holds("G p", LassoWord((), (p1,)))
    assert not holds("G p", LassoWord((p1,), (p0,)))
    assert holds("F(p && X p)", LassoWord((p1, p1), (p0,)))
    assert not holds("F(p && X p)", LassoWord((), (p1, p0)))
    assert holds("p U q", LassoWord((p1, p1), (frozenset({"q"}),)))


@settings(max_examples=300, deadline=None)
@given(formulas, lasso_words())
def test_agrees_with_naive_recursion(f, w):
    assert holds(f, w) == naive_holds(f, w)


@settings(max_examples=100, deadline=None)
@given(formulas, lasso_words(stem=2, loop=3))
def test_bulk_matches_single(f, w):
    ap = ("p", "q")
    lw = to_letters(w, ap)
    got = holds_bulk(f, ap, np.array([lw.stem], dtype=np.int64).reshape(1, -1),
                     np.array([lw.loop], dtype=np.int64))
    assert bool(got[0]) == holds(f, w)


def test_bulk_unknown_atom_is_false():
    got = holds_bulk(ltl.parse("F r"), ("p",), np.zeros((2, 1), dtype=np.int64),
                     np.array([[0], [1]]))
    assert not got.any()
