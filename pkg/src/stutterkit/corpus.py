"""Random formulas and small random Petri nets for property suites."""

from __future__ import annotations

import os
import random

from . import ltl
from .ltl import LtlFormula

SEED_ENV = "STUTTERKIT_SEED"


def data_path(name: str) -> str:
    """Path of a file shipped in the package's ``data`` directory."""
    from importlib.resources import files

    return str(files("stutterkit") / "data" / name)


def seeded_rng(default: int = 0, salt: str = "") -> random.Random:
    """RNG seeded from ``STUTTERKIT_SEED`` (or ``default``) plus a salt."""
    seed = os.environ.get(SEED_ENV)
    base = int(seed) if seed is not None else default
    return random.Random(f"{base}:{salt}")


_UNARY = (ltl.NOT, ltl.NEXT, ltl.EVENTUALLY, ltl.GLOBALLY)
_BINARY = (ltl.AND, ltl.OR, ltl.IMPLIES, ltl.UNTIL, ltl.RELEASE)
_TEMPORAL = {ltl.NEXT, ltl.EVENTUALLY, ltl.GLOBALLY, ltl.UNTIL, ltl.RELEASE}


def random_formula(rng: random.Random, aps=("p", "q", "r"), depth: int = 3, size: int = 6) -> LtlFormula:
    """Random formula with temporal depth at most ``depth`` and roughly
    ``size`` operators."""

    def gen(budget, depth_left):
        if budget <= 0 or rng.random() < 0.15:
            return ltl.atom(rng.choice(aps))
        kinds = list(_UNARY + _BINARY)
        if depth_left <= 0:
            kinds = [k for k in kinds if k not in _TEMPORAL]
        k = rng.choice(kinds)
        d = depth_left - (1 if k in _TEMPORAL else 0)
        if k in _UNARY:
            return ltl.LtlFormula(k, (gen(budget - 1, d),))
        split = rng.randint(0, budget - 1)
        return ltl.LtlFormula(k, (gen(split, d), gen(budget - 1 - split, d)))

    return gen(size, depth)


def formula_corpus(n: int, salt: str = "formulas", aps=("p", "q", "r"), depth: int = 3,
                   size_range=(2, 7), default_seed: int = 0) -> list[LtlFormula]:
    """``n`` distinct random formulas (deterministic for a given seed)."""
    rng = seeded_rng(default_seed, salt)
    seen = set()
    out = []
    while len(out) < n:
        f = random_formula(rng, aps, depth, rng.randint(*size_range))
        if f not in seen:
            seen.add(f)
            out.append(f)
    return out


def random_net(rng: random.Random, max_places: int = 8, atoms=("p", "q", "r")):
    """Small bounded net plus a binding for ``atoms``.

    No transition produces more tokens than it consumes, so every net is
    bounded by its initial token count. Invisible chains through unmarked
    places are seeded on purpose so that agglomerations are common.
    """
    from .petri import PetriNet, PropertyBinding, parse_predicate

    n = rng.randint(3, max_places)
    places = [f"P{i}" for i in range(n)]
    m0 = [0] * n
    for i in rng.sample(range(n), rng.randint(1, min(3, n))):
        m0[i] = rng.choice((1, 1, 1, 2))
    trans = []
    for t in range(rng.randint(2, 7)):
        k_in = rng.choice((1, 1, 1, 2))
        ins = rng.sample(range(n), k_in)
        k_out = rng.choice([k for k in range(0, k_in + 1)] + [k_in] * 3)
        outs = rng.sample(range(n), k_out)
        trans.append((ins, outs))
    # a sequential chain u -> v -> w through a fresh-looking middle place
    if n >= 3 and rng.random() < 0.8:
        u, v, w = rng.sample(range(n), 3)
        m0[v] = 0
        trans.append(([u], [v]))
        trans.append(([v], [w]))
    wm = [[0] * len(trans) for _ in places]
    wp = [[0] * len(trans) for _ in places]
    for t, (ins, outs) in enumerate(trans):
        for p in ins:
            wm[p][t] += 1
        for p in outs:
            wp[p][t] += 1
    net = PetriNet(tuple(places), tuple(f"t{t}" for t in range(len(trans))),
                   tuple(map(tuple, wm)), tuple(map(tuple, wp)), tuple(m0))
    binding = {}
    for a in atoms:
        shape = rng.random()
        p1, p2 = rng.sample(places, 2)
        if shape < 0.6:
            text = f"m({p1}) > 0"
        elif shape < 0.8:
            text = f"m({p1}) = 0"
        else:
            text = f"m({p1}) + m({p2}) >= 1 && !(m({p2}) > 1)"
        binding[a] = parse_predicate(text, set(places))
    return net, PropertyBinding(binding)
