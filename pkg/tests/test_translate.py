import numpy as np
import pytest

from stutterkit import ltl
from stutterkit.automata import acceptance_matrix, accepts_lasso, is_empty, product, with_ap
from stutterkit.corpus import formula_corpus
from stutterkit.evaluate import holds
from stutterkit.lasso import LassoWord, _semantic_matrix, all_stems, primitive_loops
from stutterkit.translate import translate

from _oracles import lassos

P1, P0 = frozenset({"p"}), frozenset()


def bounded_words(n_ap, stem_max=3, loop_max=3):
    letters = range(1 << n_ap)
    return all_stems(letters, stem_max), primitive_loops(letters, loop_max)


def test_false_is_empty():
    assert is_empty(translate("false"))[0]


def test_true_is_universal():
    a = translate("true")
    assert all(accepts_lasso(a, w) for w in lassos(("p",), 2, 2))


def test_globally():
    a = translate("G p")
    assert accepts_lasso(a, LassoWord((), (P1,)))
    for w in lassos(("p",), 3, 3):
        if any(v == P0 for v in w.stem + w.loop):
            assert not accepts_lasso(a, w)


def test_until_matches_semantics():
    a = translate("p U q")
    assert a.ap == ("p", "q")
    for w in lassos(("p", "q"), 3, 3):
        assert accepts_lasso(a, w) == holds("p U q", w)


def test_ap_is_atoms_of_formula():
    assert translate("G(r -> F p)").ap == ("p", "r")
    assert translate("true").ap == ()


def test_one_mark_per_eventuality():
    assert translate("G F p && G F q").acc == 2
    assert translate("G p").acc == 0


@pytest.fixture(scope="module")
def corpus():
    return formula_corpus(200)


def test_corpus_shape(corpus):
    assert len(set(corpus)) == 200
    assert all(len(ltl.atoms(f)) <= 3 and ltl.temporal_depth(f) <= 3 for f in corpus)


def test_translation_agrees_with_evaluator(corpus):
    cache = {}
    for f in corpus:
        ap = tuple(sorted(ltl.atoms(f)))
        if len(ap) not in cache:
            cache[len(ap)] = bounded_words(len(ap))
        stems, loops = cache[len(ap)]
        got = acceptance_matrix(translate(f), stems, loops)
        want = _semantic_matrix(f, ap, stems, loops)
        bad = np.argwhere(got != want)
        assert len(bad) == 0, (str(f), [(stems[i], loops[j]) for i, j in bad[:3]])


def test_formula_and_negation_disjoint(corpus):
    for f in corpus:
        assert is_empty(product(translate(f), translate(ltl.negate_to_nnf(f))))[0], str(f)


def test_double_negation_same_language(corpus):
    for f in corpus[:60]:
        ap = tuple(sorted(ltl.atoms(f)))
        stems, loops = bounded_words(len(ap))
        a = translate(f)
        b = with_ap(translate(ltl.negate_to_nnf(ltl.negate_to_nnf(f))), ap)
        assert np.array_equal(acceptance_matrix(a, stems, loops),
                              acceptance_matrix(b, stems, loops)), str(f)
