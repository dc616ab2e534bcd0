import pytest
from hypothesis import given, settings

from stutterkit.automata import accepts_lasso
from stutterkit.hoa import HoaError, guard_to_hoa, parse_hoa, to_hoa
from stutterkit.translate import translate

from _oracles import lassos
from strategies import automata

W = lassos(("p", "q"), 2, 3)


def test_round_trip_translation():
    a = translate("G F p && (q U p)")
    b = parse_hoa(to_hoa(a))
    assert b.ap == a.ap and b.acc == a.acc and b.num_states == a.num_states
    assert all(accepts_lasso(a, w) == accepts_lasso(b, w) for w in W)


@settings(max_examples=80, deadline=None)
@given(automata(("p", "q"), max_acc=3))
def test_round_trip_random(a):
    b = parse_hoa(to_hoa(a))
    assert sorted(b.edges) == sorted(a.edges)


def test_guard_rendering():
    assert guard_to_hoa(0b1111, 2) == "t"
    assert guard_to_hoa(0b0010, 2) == "0&!1"
    assert guard_to_hoa(0b1010, 2) == "0"


def test_header_fields():
    text = to_hoa(translate("G F p && G F q"), name="gf")
    assert text.startswith("HOA: v1\n")
    assert 'name: "gf"' in text
    assert "Acceptance: 2 Inf(0)&Inf(1)" in text
    assert text.rstrip().endswith("--END--")


STATE_BASED = """HOA: v1
States: 2
Start: 0
AP: 1 "p"
Acceptance: 1 Inf(0)
--BODY--
State: 0 {0}
[0] 0
[!0] 1
State: 1
[t] 0
--END--
"""


def test_state_based_marks_move_to_edges():
    a = parse_hoa(STATE_BASED)
    assert all(e.marks == 1 for e in a.edges if e.src == 0)
    assert all(e.marks == 0 for e in a.edges if e.src == 1)


@pytest.mark.parametrize("change", [
    ("Acceptance: 1 Inf(0)", "Acceptance: 1 Fin(0)"),
    ("Start: 0", "Start: 0\nStart: 1"),
    ("[0] 0", "[0] 0&1"),
    ("--END--", ""),
    ("AP: 1 \"p\"", "AP: 1 \"p\"\nAlias: @a 0"),
])
def test_rejects_unsupported(change):
    old, new = change
    with pytest.raises(HoaError):
        parse_hoa(STATE_BASED.replace(old, new))
