import pytest

from stutterkit import ltl
from stutterkit.automata import accepts_lasso
from stutterkit.check import (
    HOLDS,
    UNKNOWN,
    VIOLATED,
    Limits,
    cl_extension_check,
    ground_truth_check,
    ground_truth_verdict,
    revisited_decide,
    semi_decide,
)
from stutterkit.corpus import formula_corpus, random_net, seeded_rng
from stutterkit.errors import ResourceError
from stutterkit.kripke import build_kripke, kripke_tgba
from stutterkit.petri import parse_net, reduce_fixpoint
from stutterkit.stutter import SensitivityClass, classify_sensitivity
from stutterkit.translate import translate


def truth(net, binding, f):
    return HOLDS if ground_truth_check(net, binding, f)[0] else VIOLATED


def witness_ok(net, binding, f, v):
    f = ltl.parse(f) if isinstance(f, str) else f
    atoms = tuple(sorted(ltl.atoms(f)))
    observed = binding.restrict(atoms)
    # the reduction only protects the places the formula observes
    system = net if v.witness_system == "original" else reduce_fixpoint(net, observed)[0]
    view = kripke_tgba(build_kripke(system, observed, atoms=atoms))
    return accepts_lasso(translate(ltl.negate_to_nnf(f)), v.witness) and accepts_lasso(view, v.witness)


def test_ground_truth_fig1(fig1):
    net, binding = fig1
    holds, w = ground_truth_check(net, binding, "G p")
    assert not holds and frozenset() in set(w.stem + w.loop) | {frozenset()}
    assert any("p" not in v for v in w.stem + w.loop)
    assert ground_truth_check(net, binding, "true") == (True, None)


def test_si_formula_same_on_both_nets(fig1):
    net, binding = fig1
    f = "G(!q -> G !q)"
    assert classify_sensitivity(f) is SensitivityClass.SI
    v = semi_decide(net, binding, f)
    red, _ = reduce_fixpoint(net, binding)
    assert v.trusted
    assert v.outcome == truth(net, binding, f) == truth(red, binding, f) == HOLDS


def test_shi_formula_holding_on_reduced_is_not_trusted(fig1):
    # G(p -> X !p) is shortening insensitive; it holds on the reduced net but
    # the original net has the run pq pq ..., so "holds" must not be trusted
    net, binding = fig1
    f = "G(p -> X !p)"
    assert classify_sensitivity(f) is SensitivityClass.ShI
    v = semi_decide(net, binding, f)
    assert v.outcome == HOLDS and not v.trusted
    assert truth(net, binding, f) == VIOLATED
    r = revisited_decide(net, binding, f)
    assert r.trusted and r.outcome == VIOLATED


def test_li_formula_holding_is_trusted(fig1):
    net, binding = fig1
    f = "F(!p && X !p)"
    assert classify_sensitivity(f) is SensitivityClass.LI
    v = semi_decide(net, binding, f)
    assert v.outcome == HOLDS and v.trusted and truth(net, binding, f) == HOLDS


def test_ls_formula_is_not_reduced(fig1):
    net, binding = fig1
    v = semi_decide(net, binding, "X p")
    assert v.outcome == UNKNOWN and not v.trusted
    assert v.reduction_stats is None and v.witness is None
    assert v.to_json()["stats"]["places_removed"] is None


def test_violated_fig1(fig1):
    net, binding = fig1
    v = semi_decide(net, binding, "G p")
    assert v.outcome == VIOLATED and v.trusted and v.witness is not None
    assert witness_ok(net, binding, "G p", v)


def test_cl_extension_universal(fig1):
    net, binding = fig1
    v = cl_extension_check(net, binding, "X true")
    assert v is not None and v.outcome == HOLDS and v.trusted


def test_cl_extension_no_conclusion(fig1):
    net, binding = fig1
    assert cl_extension_check(net, binding, "X p") is None


def test_revisited_si_matches_semi(fig1):
    net, binding = fig1
    for f in ("G p", "G(!q -> G !q)", "p U !q"):
        a, b = semi_decide(net, binding, f), revisited_decide(net, binding, f)
        assert b.procedure == "revisited/optimistic"
        assert (a.outcome, a.trusted) == (b.outcome, b.trusted)


def test_ls_violation_found_on_reduced_net(fig1):
    net, binding = fig1
    f = "X (p && !q)"
    assert classify_sensitivity(f) is SensitivityClass.LS
    v = revisited_decide(net, binding, f)
    assert v.outcome == VIOLATED and v.trusted
    assert v.procedure == "revisited/lengthening-kernel" and v.witness_system == "reduced"
    assert truth(net, binding, f) == VIOLATED
    assert witness_ok(net, binding, f, v)


def test_ls_fallback_holds(fig1):
    net, binding = fig1
    v = revisited_decide(net, binding, "X X X !p")
    assert v.outcome == HOLDS and v.trusted and truth(net, binding, "X X X !p") == HOLDS


def test_verdict_json(fig1):
    net, binding = fig1
    out = semi_decide(net, binding, "G p").to_json()
    assert set(out) == {"outcome", "trusted", "procedure", "sensitivity", "witness", "stats"}
    assert out["witness"]["system"] == "reduced"
    assert set(out["stats"]) == {"places_removed", "transitions_removed", "states_explored", "wall_ms"}
    assert out["sensitivity"] == "SI"


def test_unbound_atom(fig1):
    net, binding = fig1
    with pytest.raises(ValueError, match="r"):
        semi_decide(net, binding, "G r")


def test_resource_error_carries_stage():
    net, binding = parse_net("place a init 1\nplace b\ntrans t in a out a,b\natom p := m(b) > 0\n")
    with pytest.raises(ResourceError) as e:
        ground_truth_verdict(net, binding, "G p", Limits(state_cap=20))
    assert e.value.stage == "original-product"


CASES = []
_rng = seeded_rng(0, "check-unit")
for _f in formula_corpus(120, salt="check-unit-formulas"):
    CASES.append((*random_net(_rng), _f))


def test_trusted_verdicts_agree_with_truth():
    for net, binding, f in CASES:
        t = truth(net, binding, f)
        for fn in (semi_decide, revisited_decide):
            v = fn(net, binding, f)
            if v.trusted:
                assert v.outcome == t, (fn.__name__, str(f), v.procedure)
            if v.outcome == VIOLATED:
                assert v.witness is not None and witness_ok(net, binding, f, v)


def test_revisited_is_never_less_informative():
    for net, binding, f in CASES:
        s, r = semi_decide(net, binding, f), revisited_decide(net, binding, f)
        assert r.trusted
        if s.trusted:
            assert r.outcome == s.outcome


def test_cl_extension_agrees_for_si():
    n = 0
    for net, binding, f in CASES:
        if classify_sensitivity(f) is not SensitivityClass.SI:
            continue
        v = cl_extension_check(net, binding, f)
        if v is not None:
            n += 1
            assert v.outcome == semi_decide(net, binding, f).outcome == HOLDS
    assert n > 0


def test_cl_extension_never_wrong_on_ls():
    for net, binding, f in CASES:
        if classify_sensitivity(f) is SensitivityClass.LS:
            v = cl_extension_check(net, binding, f)
            if v is not None:
                assert truth(net, binding, f) == HOLDS
