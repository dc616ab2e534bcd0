"""Direct LTL semantics on ultimately periodic words.

Independent of the automata code: a formula is evaluated on the finite
position graph of ``stem . loop^omega`` (the last position loops back to the
first loop position). Untils are least fixpoints, releases greatest ones.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from . import ltl
from .lasso import LassoWord
from .ltl import LtlFormula


def _successors(s: int, n: int) -> np.ndarray:
    nxt = np.arange(1, s + n + 1)
    nxt[-1] = s
    return nxt


def _eval(f: LtlFormula, atom_value, nxt: np.ndarray, shape, memo):
    hit = memo.get(f)
    if hit is not None:
        return hit
    k = f.kind
    steps = shape[-1]
    if k == ltl.ATOM:
        out = atom_value(f.name)
    elif k == ltl.TRUE:
        out = np.ones(shape, dtype=bool)
    elif k == ltl.FALSE:
        out = np.zeros(shape, dtype=bool)
    else:
        sub = [_eval(c, atom_value, nxt, shape, memo) for c in f.children]
        if k == ltl.NOT:
            out = ~sub[0]
        elif k == ltl.AND:
            out = sub[0] & sub[1]
        elif k == ltl.OR:
            out = sub[0] | sub[1]
        elif k == ltl.IMPLIES:
            out = ~sub[0] | sub[1]
        elif k == ltl.NEXT:
            out = sub[0][..., nxt]
        elif k in (ltl.UNTIL, ltl.EVENTUALLY):
            a, b = (sub[0], sub[1]) if k == ltl.UNTIL else (np.ones(shape, dtype=bool), sub[0])
            out = b.copy()
            for _ in range(steps):
                new = b | (a & out[..., nxt])
                if np.array_equal(new, out):
                    break
                out = new
        elif k in (ltl.RELEASE, ltl.GLOBALLY):
            a, b = (sub[0], sub[1]) if k == ltl.RELEASE else (np.zeros(shape, dtype=bool), sub[0])
            out = b.copy()
            for _ in range(steps):
                new = b & (a | out[..., nxt])
                if np.array_equal(new, out):
                    break
                out = new
        else:
            raise AssertionError(k)
    memo[f] = out
    return out


def holds(f: LtlFormula | str, w: LassoWord) -> bool:
    """Does ``f`` hold at position 0 of ``w``? Symbols are sets of true atoms."""
    if isinstance(f, str):
        f = ltl.parse(f)
    s, n = len(w.stem), len(w.loop)
    symbols = list(w.stem) + list(w.loop)

    def atom_value(name):
        return np.array([name in sym for sym in symbols], dtype=bool)

    return bool(_eval(f, atom_value, _successors(s, n), (s + n,), {})[0])


def holds_bulk(f: LtlFormula | str, ap: Sequence[str], stems: np.ndarray, loops: np.ndarray) -> np.ndarray:
    """Vectorized :func:`holds` over many words of one shape.

    ``stems`` has shape ``(W, s)`` and ``loops`` ``(W, n)``; entries are
    integer letters (bit ``j`` = ``ap[j]``). Returns a boolean vector.
    """
    if isinstance(f, str):
        f = ltl.parse(f)
    stems = np.asarray(stems, dtype=np.int64).reshape(len(loops), -1)
    loops = np.asarray(loops, dtype=np.int64)
    letters = np.concatenate([stems, loops], axis=1)
    s, n = stems.shape[1], loops.shape[1]
    index = {a: j for j, a in enumerate(ap)}

    def atom_value(name):
        if name not in index:
            return np.zeros(letters.shape, dtype=bool)
        return (letters >> index[name] & 1).astype(bool)

    return _eval(f, atom_value, _successors(s, n), letters.shape, {})[:, 0]
