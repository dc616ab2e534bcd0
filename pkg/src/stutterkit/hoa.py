"""HOA v1 import/export for transition-based generalized Büchi automata."""

from __future__ import annotations

import re

from .automata import Edge, Tgba, full_guard


class HoaError(ValueError):
    pass


# --------------------------------------------------------------------------
# guard rendering


def _prime_implicants(minterms: set[int], n: int) -> list[tuple[int, int]]:
    """Quine-McCluskey; cubes are ``(value, care_mask)``."""
    full = (1 << n) - 1
    current = {(m, full) for m in minterms}
    primes = set()
    while current:
        nxt = set()
        used = set()
        cubes = sorted(current)
        for i, (v1, c1) in enumerate(cubes):
            for v2, c2 in cubes[i + 1:]:
                if c1 != c2:
                    continue
                diff = (v1 ^ v2) & c1
                if diff and diff & (diff - 1) == 0:
                    nxt.add((v1 & ~diff, c1 & ~diff))
                    used.add((v1, c1))
                    used.add((v2, c2))
        primes |= current - used
        current = nxt
    return sorted(primes)


def _cover(minterms: set[int], primes) -> list[tuple[int, int]]:
    def covers(cube, m):
        v, c = cube
        return (m & c) == (v & c)

    chosen = []
    left = set(minterms)
    while left:
        best = max(primes, key=lambda p: (sum(covers(p, m) for m in left), -bin(p[1]).count("1")))
        chosen.append(best)
        left = {m for m in left if not covers(best, m)}
    return chosen


def guard_to_hoa(guard: int, n_ap: int) -> str:
    if guard == full_guard(n_ap):
        return "t"
    if guard == 0:
        return "f"
    minterms = {v for v in range(1 << n_ap) if guard >> v & 1}
    cubes = _cover(minterms, _prime_implicants(minterms, n_ap))
    terms = []
    for v, c in sorted(cubes):
        lits = [(str(j) if v >> j & 1 else f"!{j}") for j in range(n_ap) if c >> j & 1]
        terms.append("&".join(lits) if lits else "t")
    return " | ".join(terms)


def to_hoa(a: Tgba, name: str | None = None) -> str:
    k = a.acc
    lines = ["HOA: v1"]
    label = name if name is not None else a.name
    if label:
        lines.append('name: "' + label.replace("\\", "\\\\").replace('"', '\\"') + '"')
    lines.append(f"States: {a.num_states}")
    lines.append(f"Start: {a.initial}")
    lines.append(f"AP: {len(a.ap)}" + "".join(f' "{p}"' for p in a.ap))
    if k == 0:
        lines.append("acc-name: all")
        lines.append("Acceptance: 0 t")
    elif k == 1:
        lines.append("acc-name: Buchi")
        lines.append("Acceptance: 1 Inf(0)")
    else:
        lines.append(f"acc-name: generalized-Buchi {k}")
        lines.append(f"Acceptance: {k} " + "&".join(f"Inf({i})" for i in range(k)))
    lines.append("properties: trans-labels explicit-labels trans-acc")
    lines.append("--BODY--")
    for q in range(a.num_states):
        lines.append(f"State: {q}")
        for e in a.out(q):
            marks = [str(i) for i in range(k) if e.marks >> i & 1]
            acc = " {" + " ".join(marks) + "}" if marks else ""
            lines.append(f"[{guard_to_hoa(e.guard, len(a.ap))}] {e.dst}{acc}")
    lines.append("--END--")
    return "\n".join(lines) + "\n"


# --------------------------------------------------------------------------
# parsing


def _label_guard(text: str, n_ap: int) -> int:
    tokens = re.findall(r"\d+|[tf]|[!&|()]|@\w+|\S", text)
    pos = 0

    def peek():
        return tokens[pos] if pos < len(tokens) else None

    def take():
        nonlocal pos
        tok = tokens[pos]
        pos += 1
        return tok

    full = full_guard(n_ap)
    atom_tables = []
    for j in range(n_ap):
        g = 0
        for v in range(1 << n_ap):
            if v >> j & 1:
                g |= 1 << v
        atom_tables.append(g)

    def disj():
        g = conj()
        while peek() == "|":
            take()
            g |= conj()
        return g

    def conj():
        g = unary()
        while peek() == "&":
            take()
            g &= unary()
        return g

    def unary():
        tok = peek()
        if tok is None:
            raise HoaError(f"truncated label [{text}]")
        take()
        if tok == "!":
            return full & ~unary()
        if tok == "(":
            g = disj()
            if peek() != ")":
                raise HoaError(f"missing ')' in label [{text}]")
            take()
            return g
        if tok == "t":
            return full
        if tok == "f":
            return 0
        if tok.startswith("@"):
            raise HoaError(f"aliases are not supported (label [{text}])")
        if tok.isdigit():
            j = int(tok)
            if j >= n_ap:
                raise HoaError(f"label [{text}] references AP {j} but only {n_ap} are declared")
            return atom_tables[j]
        raise HoaError(f"unexpected {tok!r} in label [{text}]")

    g = disj()
    if pos != len(tokens):
        raise HoaError(f"trailing input in label [{text}]")
    return g


def _parse_acceptance(spec: str) -> int:
    m = re.fullmatch(r"\s*(\d+)\s+(.*?)\s*", spec)
    if not m:
        raise HoaError(f"malformed Acceptance: {spec!r}")
    k = int(m.group(1))
    cond = m.group(2).replace(" ", "")
    if k == 0:
        if cond != "t":
            raise HoaError(f"unsupported acceptance condition {cond!r}")
        return 0
    expected = "&".join(f"Inf({i})" for i in range(k))
    if cond != expected:
        raise HoaError(
            f"only generalized Buchi acceptance ({expected}) is supported, got {cond!r}"
        )
    return k


def parse_hoa(text: str) -> Tgba:
    """Read one automaton. Rejects anything beyond generalized Büchi with
    explicit labels and a single initial state."""
    if "--BODY--" not in text:
        raise HoaError("missing --BODY--")
    header, rest = text.split("--BODY--", 1)
    if "--END--" not in rest:
        raise HoaError("missing --END--")
    body = rest.split("--END--", 1)[0]
    n_states = None
    start = None
    ap = None
    acc = None
    name = ""
    for raw in header.splitlines():
        line = raw.strip()
        if not line:
            continue
        key, _, val = line.partition(":")
        key = key.strip()
        val = val.strip()
        if key == "HOA":
            if val != "v1":
                raise HoaError(f"unsupported HOA version {val!r}")
        elif key == "States":
            n_states = int(val)
        elif key == "Start":
            if start is not None:
                raise HoaError("multiple initial states are not supported")
            if "&" in val:
                raise HoaError("universal initial states are not supported")
            start = int(val)
        elif key == "AP":
            parts = re.findall(r'"((?:[^"\\]|\\.)*)"', val)
            count = int(val.split()[0])
            if count != len(parts):
                raise HoaError(f"AP declares {count} names but lists {len(parts)}")
            ap = tuple(parts)
        elif key == "Acceptance":
            acc = _parse_acceptance(val)
        elif key == "acc-name":
            if val.split()[0] not in ("generalized-Buchi", "Buchi", "all"):
                raise HoaError(f"unsupported acc-name {val!r}")
        elif key == "name":
            name = val.strip('"')
        elif key == "Alias":
            raise HoaError("aliases are not supported")
        elif key in ("tool", "properties") or key[:1].islower():
            continue
        else:
            raise HoaError(f"unsupported header item {key!r}")
    if acc is None:
        raise HoaError("missing Acceptance header")
    if ap is None:
        ap = ()
    if start is None:
        raise HoaError("missing Start header")
    edges = []
    state = None
    state_marks = 0
    max_state = start
    for raw in body.splitlines():
        line = raw.strip()
        if not line:
            continue
        if line.startswith("State:"):
            m = re.fullmatch(r'State:\s*(\[[^\]]*\])?\s*(\d+)\s*("[^"]*")?\s*(\{[\d\s]*\})?', line)
            if not m:
                raise HoaError(f"malformed state line {line!r}")
            if m.group(1):
                raise HoaError("state labels are not supported; use transition labels")
            state = int(m.group(2))
            state_marks = 0
            if m.group(4):
                for i in m.group(4)[1:-1].split():
                    state_marks |= 1 << int(i)
            max_state = max(max_state, state)
            continue
        if state is None:
            raise HoaError(f"edge before any State: {line!r}")
        m = re.fullmatch(r"\[([^\]]*)\]\s*(\d+)\s*(\{[\d\s]*\})?", line)
        if not m:
            if re.fullmatch(r"\d+(\s*&\s*\d+)+.*", line):
                raise HoaError("universal branching is not supported")
            raise HoaError(f"unsupported edge syntax {line!r} (explicit labels required)")
        guard = _label_guard(m.group(1), len(ap))
        dst = int(m.group(2))
        marks = state_marks
        if m.group(3):
            for i in m.group(3)[1:-1].split():
                marks |= 1 << int(i)
        if marks >> acc:
            raise HoaError(f"acceptance set out of range in {line!r}")
        max_state = max(max_state, dst)
        if guard:
            edges.append(Edge(state, guard, marks, dst))
    if n_states is None:
        n_states = max_state + 1
    if max_state >= n_states:
        raise HoaError(f"state {max_state} exceeds declared States: {n_states}")
    return Tgba(ap, n_states, start, tuple(edges), acc, name)
