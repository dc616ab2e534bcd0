"""Model checking nets against LTL formulas, on reduced nets where the
formula's sensitivity class allows it."""

from __future__ import annotations

import time
from dataclasses import dataclass, field

from . import ltl
from .automata import DEFAULT_STATE_CAP, Tgba, is_empty, product
from .errors import ResourceError
from .kripke import build_kripke, kripke_tgba
from .ltl import LtlFormula
from .petri import PetriNet, PropertyBinding, ReductionStats, reduce_fixpoint
from .stutter import (
    SensitivityClass,
    classify_sensitivity,
    closure_cl,
    lengthening_kernel,
    partition_language,
    stutter_kernel,
)
from .translate import translate

HOLDS = "holds"
VIOLATED = "violated"
UNKNOWN = "unknown"


@dataclass(frozen=True)
class Limits:
    state_cap: int = DEFAULT_STATE_CAP
    complement_state_cap: int = DEFAULT_STATE_CAP
    rank_cap: int | None = None
    timeout_s: float | None = 15.0


@dataclass
class Verdict:
    outcome: str
    trusted: bool
    procedure: str
    sensitivity: SensitivityClass | None
    witness: object = None
    witness_system: str | None = None  # "reduced" or "original"
    reduction_stats: ReductionStats | None = None
    states_explored: int = 0
    wall_ms: float = 0.0
    errors: list = field(default_factory=list)

    def to_json(self) -> dict:
        out = {
            "outcome": self.outcome,
            "trusted": self.trusted,
            "procedure": self.procedure,
            "sensitivity": None if self.sensitivity is None else str(self.sensitivity),
        }
        if self.witness is not None:
            w = self.witness.to_json()
            w["system"] = self.witness_system
            out["witness"] = w
        if self.errors:
            out["errors"] = list(self.errors)
        rs = self.reduction_stats
        out["stats"] = {
            "places_removed": None if rs is None else rs.places_removed,
            "transitions_removed": None if rs is None else rs.transitions_removed,
            "states_explored": self.states_explored,
            "wall_ms": round(self.wall_ms, 3),
        }
        return out


def _formula(f) -> LtlFormula:
    return ltl.parse(f) if isinstance(f, str) else f


def _observed(binding: PropertyBinding, f: LtlFormula) -> tuple[tuple, PropertyBinding]:
    names = tuple(sorted(ltl.atoms(f)))
    missing = [n for n in names if n not in binding.atoms]
    if missing:
        raise ValueError(f"formula uses atoms without a definition: {', '.join(missing)}")
    return names, binding.restrict(names)


def _trusted(cls: SensitivityClass, outcome: str) -> bool:
    # holds survives reduction when L(!f) is closed under shortening, i.e. f
    # is lengthening insensitive; violated survives when f is shortening
    # insensitive
    if outcome == HOLDS:
        return cls.lengthening_insensitive
    if outcome == VIOLATED:
        return cls.shortening_insensitive
    return False


class _Run:
    """Shared bookkeeping for one decision."""

    def __init__(self, net, binding, f, limits: Limits | None):
        self.t0 = time.monotonic()
        self.f = _formula(f)
        self.limits = limits or Limits()
        self.atoms, self.binding = _observed(binding, self.f)
        self.net = net
        self.states = 0
        self._neg = None
        self._reduced = None
        self._views = {}

    @property
    def negation(self) -> Tgba:
        if self._neg is None:
            self._neg = translate(ltl.negate_to_nnf(self.f), state_cap=self.limits.state_cap)
        return self._neg

    def reduced(self):
        if self._reduced is None:
            self._reduced = reduce_fixpoint(self.net, self.binding)
        return self._reduced

    def view(self, which: str) -> Tgba:
        hit = self._views.get(which)
        if hit is None:
            net = self.net if which == "original" else self.reduced()[0]
            kg = build_kripke(net, self.binding, self.limits.state_cap, atoms=self.atoms)
            self.states += kg.num_states
            hit = self._views[which] = kripke_tgba(kg)
        return hit

    def emptiness(self, a: Tgba, which: str):
        prod = product(a, self.view(which), self.limits.state_cap)
        self.states += prod.num_states
        return is_empty(prod)

    def classify(self) -> SensitivityClass:
        return classify_sensitivity(self.f, self.limits.state_cap, self.limits.timeout_s)

    def verdict(self, outcome, trusted, procedure, cls, witness=None, system=None, errors=()):
        rs = self._reduced[1] if self._reduced is not None else None
        return Verdict(outcome, trusted, procedure, cls, witness, system if witness else None,
                       rs, self.states, (time.monotonic() - self.t0) * 1000.0, list(errors))

    def complement_kw(self) -> dict:
        return dict(state_cap=self.limits.complement_state_cap, rank_cap=self.limits.rank_cap,
                    timeout_s=self.limits.timeout_s)


def _stage(name: str, fn):
    """Run ``fn`` and tag resource errors with the stage that raised them."""
    try:
        return fn()
    except ResourceError as e:
        e.stage = name
        raise


def semi_decide(net: PetriNet, binding: PropertyBinding, f, limits: Limits | None = None) -> Verdict:
    """Check the reduced net; the verdict is trusted only in the direction
    the sensitivity class of ``f`` preserves. LS formulas are not checked."""
    run = _Run(net, binding, f, limits)
    cls = _stage("classify", run.classify)
    if cls is SensitivityClass.LS:
        return run.verdict(UNKNOWN, False, "semi", cls)
    _stage("reduce", run.reduced)
    empty, w = _stage("reduced-product", lambda: run.emptiness(run.negation, "reduced"))
    outcome = HOLDS if empty else VIOLATED
    return run.verdict(outcome, _trusted(cls, outcome), "semi", cls, w, "reduced")


def cl_extension_check(net: PetriNet, binding: PropertyBinding, f,
                       limits: Limits | None = None, _run: _Run | None = None) -> Verdict | None:
    """``holds`` (trusted, for any formula) when no run of the reduced net
    lies in the downward closure of ``L(!f)``; otherwise no conclusion."""
    run = _run or _Run(net, binding, f, limits)
    empty, _ = _stage("cl-extension", lambda: run.emptiness(closure_cl(run.negation), "reduced"))
    if not empty:
        return None
    cls = None if _run is not None else _stage("classify", run.classify)
    return run.verdict(HOLDS, True, "cl-extension", cls)


def ground_truth_check(net: PetriNet, binding: PropertyBinding, f,
                       limits: Limits | None = None) -> tuple[bool, object]:
    """``(holds, witness)`` from the product with the unreduced state space."""
    run = _Run(net, binding, f, limits)
    empty, w = run.emptiness(run.negation, "original")
    return empty, w


def ground_truth_verdict(net, binding, f, limits: Limits | None = None) -> Verdict:
    run = _Run(net, binding, f, limits)
    empty, w = _stage("original-product", lambda: run.emptiness(run.negation, "original"))
    return run.verdict(HOLDS if empty else VIOLATED, True, "truth", None, w, "original")


def revisited_decide(net: PetriNet, binding: PropertyBinding, f,
                     limits: Limits | None = None) -> Verdict:
    """Optimistic check on the reduced net, then confirmations, then a
    fallback that splits ``L(!f)`` by length sensitivity."""
    run = _Run(net, binding, f, limits)
    errors = []
    cls = _stage("classify", run.classify)
    _stage("reduce", run.reduced)

    # 1-2: optimistic product, conclusive when the class allows it
    empty, w = _stage("reduced-product", lambda: run.emptiness(run.negation, "reduced"))
    outcome = HOLDS if empty else VIOLATED
    if _trusted(cls, outcome):
        return run.verdict(outcome, True, "revisited/optimistic", cls, w, "reduced")

    # 3: confirmation
    neg_f = ltl.negate_to_nnf(run.f)
    if empty:
        v = cl_extension_check(net, binding, run.f, _run=run)
        if v is not None:
            return run.verdict(HOLDS, True, "revisited/cl-extension", cls)
    else:
        try:
            kernel = lengthening_kernel(neg_f, **run.complement_kw())
            k_empty, kw = run.emptiness(kernel, "reduced")
            if not k_empty:
                return run.verdict(VIOLATED, True, "revisited/lengthening-kernel", cls, kw, "reduced")
        except ResourceError as e:
            errors.append(f"lengthening-kernel: {e}")

    # 4: fallback on the parts of L(!f)
    try:
        si_pm = stutter_kernel(neg_f, **run.complement_kw())
        p_empty, pw = run.emptiness(si_pm, "reduced")
        if not p_empty:
            return run.verdict(VIOLATED, True, "revisited/fallback:si_pm", cls, pw, "reduced", errors)
        parts = partition_language(neg_f, **run.complement_kw())
    except ResourceError as e:
        errors.append(f"partition: {e}")
        parts = None
    if parts is not None:
        for name in ("si_plus", "si_minus", "ss"):
            a = getattr(parts, name)
            if not a.edges:
                continue
            p_empty, pw = _stage("original-product", lambda: run.emptiness(a, "original"))
            if not p_empty:
                return run.verdict(VIOLATED, True, f"revisited/fallback:{name}", cls, pw,
                                   "original", errors)
        return run.verdict(HOLDS, True, "revisited/fallback", cls, errors=errors)
    empty, w = _stage("original-product", lambda: run.emptiness(run.negation, "original"))
    return run.verdict(HOLDS if empty else VIOLATED, True, "revisited/truth", cls, w, "original",
                       errors)
