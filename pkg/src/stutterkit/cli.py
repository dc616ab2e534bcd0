"""Command-line interface: ``stutterkit COMMAND ...``."""

from __future__ import annotations

import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import click

from . import ltl
from .automata import DEFAULT_STATE_CAP
from .check import Limits, ground_truth_verdict, revisited_decide, semi_decide
from .errors import ResourceError
from .hoa import to_hoa
from .petri import NetSyntaxError, format_net, parse_net, parse_predicate, reduce_fixpoint
from .stutter import SensitivityClass, classify_sensitivity, partition_language

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_RESOURCE = 2
EXIT_UNTRUSTED = 3

_CLASSES = [c.value for c in SensitivityClass]


def _caps(f):
    f = click.option("--state-cap", type=click.IntRange(min=1), default=DEFAULT_STATE_CAP,
                     show_default=True, help="Maximum markings / automaton states.")(f)
    f = click.option("--rank-cap", type=click.IntRange(min=1), default=None,
                     help="Maximum rank in complementation (default 2n).")(f)
    f = click.option("--timeout-s", type=click.FloatRange(min=0, min_open=True), default=15.0,
                     show_default=True, help="Per-stage time limit in seconds.")(f)
    return f


def _limits(state_cap, rank_cap, timeout_s) -> Limits:
    return Limits(state_cap=state_cap, complement_state_cap=state_cap, rank_cap=rank_cap,
                  timeout_s=timeout_s)


def _formula(text: str):
    try:
        return ltl.parse(text)
    except ltl.LtlSyntaxError as e:
        raise click.BadParameter(str(e), param_hint="-f/--formula") from None


def _load_net(path: str, atoms: tuple):
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise click.BadParameter(str(e), param_hint="--net") from None
    try:
        net, binding = parse_net(text)
        for spec in atoms:
            name, sep, expr = spec.partition(":=")
            if not sep or not name.strip():
                raise NetSyntaxError(f"--atom expects NAME:=EXPR, got {spec!r}")
            binding = binding.with_atom(name.strip(), parse_predicate(expr, set(net.places)))
    except NetSyntaxError as e:
        raise click.BadParameter(f"{path}: {e}", param_hint="--net") from None
    return net, binding


def _check_atoms(f, binding):
    missing = sorted(ltl.atoms(f) - set(binding.atoms))
    if missing:
        raise click.BadParameter(
            f"formula uses atoms with no definition in the net: {', '.join(missing)}",
            param_hint="-f/--formula")


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True)


_net_opts = [
    click.option("--net", "net_path", required=True, type=click.Path(dir_okay=False),
                 help="Net file (text format or PNML)."),
    click.option("--atom", "atoms", multiple=True, metavar="NAME:=EXPR",
                 help="Extra atom definition; may be repeated."),
]


def _with_net(f):
    for opt in reversed(_net_opts):
        f = opt(f)
    return f


@click.group()
@click.version_option(package_name="artifact")
def cli():
    """Length-sensitivity aware LTL model checking for Petri nets."""


@cli.command()
@click.option("-f", "--formula", required=True, help="LTL formula.")
@_caps
def classify(formula, state_cap, rank_cap, timeout_s):
    """Print the sensitivity class (SI, LI, ShI or LS)."""
    f = _formula(formula)
    click.echo(str(classify_sensitivity(f, state_cap, timeout_s)))


@cli.command()
@click.option("-f", "--formula", required=True, help="LTL formula.")
@click.option("--union-si-minus", is_flag=True, help="Merge SI-minus into the first part.")
@_caps
def partition(formula, union_si_minus, state_cap, rank_cap, timeout_s):
    """Emit the four parts of L(f) as HOA automata."""
    f = _formula(formula)
    p = partition_language(f, union_si_minus=union_si_minus, state_cap=state_cap,
                           rank_cap=rank_cap, timeout_s=timeout_s)
    for name, a in p.parts().items():
        click.echo(to_hoa(a, name=name), nl=False)


@cli.command()
@_with_net
@click.option("-f", "--formula", required=True, help="LTL formula (its atoms are observed).")
def reduce(net_path, atoms, formula):
    """Agglomerate the net for the atoms of FORMULA; print the reduced net."""
    f = _formula(formula)
    net, binding = _load_net(net_path, atoms)
    _check_atoms(f, binding)
    observed = binding.restrict(sorted(ltl.atoms(f)))
    reduced, stats = reduce_fixpoint(net, observed)
    click.echo(format_net(reduced, observed), nl=False)
    click.echo("# stats " + json.dumps(stats.to_json(), sort_keys=True))


def _emit_verdict(v, require_trusted: bool):
    click.echo(_dump(v.to_json()))
    if require_trusted and not v.trusted:
        raise click.exceptions.Exit(EXIT_UNTRUSTED)


@cli.command()
@_with_net
@click.option("-f", "--formula", required=True, help="LTL formula.")
@click.option("--procedure", type=click.Choice(["semi", "revisited"]), default="revisited",
              show_default=True)
@click.option("--require-trusted", is_flag=True, help="Exit 3 unless the verdict is trusted.")
@_caps
def check(net_path, atoms, formula, procedure, require_trusted, state_cap, rank_cap, timeout_s):
    """Model check FORMULA on the net; prints a verdict as JSON."""
    f = _formula(formula)
    net, binding = _load_net(net_path, atoms)
    _check_atoms(f, binding)
    fn = semi_decide if procedure == "semi" else revisited_decide
    _emit_verdict(fn(net, binding, f, _limits(state_cap, rank_cap, timeout_s)), require_trusted)


@cli.command()
@_with_net
@click.option("-f", "--formula", required=True, help="LTL formula.")
@_caps
def truth(net_path, atoms, formula, state_cap, rank_cap, timeout_s):
    """Check FORMULA on the full state space of the net."""
    f = _formula(formula)
    net, binding = _load_net(net_path, atoms)
    _check_atoms(f, binding)
    _emit_verdict(ground_truth_verdict(net, binding, f, _limits(state_cap, rank_cap, timeout_s)),
                  False)


# --------------------------------------------------------------------------
# batch


def read_formulas(path: str) -> list[tuple[int, str, str]]:
    """``(line, formula text, label)``; a trailing ``# comment`` becomes the label."""
    rows = []
    for i, raw in enumerate(Path(path).read_text().splitlines(), 1):
        body, _, comment = raw.partition("#")
        if body.strip():
            rows.append((i, body.strip(), comment.strip()))
    return rows


@dataclass
class BatchReport:
    rows: list = field(default_factory=list)
    failures: list = field(default_factory=list)

    @property
    def summary(self) -> dict:
        counts = {c: 0 for c in _CLASSES}
        for r in self.rows:
            counts[r["class"]] += 1
        return counts

    def to_json(self) -> dict:
        return {"rows": self.rows, "summary": self.summary, "failures": self.failures}

    def table(self) -> str:
        verdicts = any("outcome" in r for r in self.rows)
        head = ["#", "class"] + (["outcome", "trusted"] if verdicts else []) + ["ms", "formula"]
        body = []
        for r in self.rows:
            cells = [str(r["line"]), r["class"]]
            if verdicts:
                cells += [r.get("outcome", "-"), str(r.get("trusted", "-")).lower()]
            cells += [f"{r['stats']['ms']:.1f}", r["formula"] + (f"  # {r['label']}" if r["label"] else "")]
            body.append(cells)
        for fl in self.failures:
            body.append([str(fl["line"]), "FAIL"] + (["-", "-"] if verdicts else []) +
                        ["-", f"{fl['formula']}  # {fl['error']}"])
        widths = [max(len(row[i]) for row in [head] + body) for i in range(len(head) - 1)]
        lines = []
        for row in [head] + body:
            lines.append("  ".join(c.rjust(w) if i in (0, len(head) - 2) else c.ljust(w)
                                   for i, (c, w) in enumerate(zip(row, widths))) + "  " + row[-1])
        total = len(self.rows)
        s = self.summary
        pct = "  ".join(f"{c}={s[c]} ({100 * s[c] / total:.0f}%)" if total else f"{c}=0" for c in _CLASSES)
        lines.append(f"summary: {total} formulas  {pct}  failures={len(self.failures)}")
        return "\n".join(lines)


def _batch_row(args):
    line, text, label, net_text, atoms, procedure, limits = args
    t0 = time.monotonic()
    try:
        f = ltl.parse(text)
        row = {"line": line, "formula": text, "label": label}
        row["class"] = str(classify_sensitivity(f, limits.state_cap, limits.timeout_s))
        if net_text is not None:
            net, binding = parse_net(net_text)
            for spec in atoms:
                name, _, expr = spec.partition(":=")
                binding = binding.with_atom(name.strip(), parse_predicate(expr, set(net.places)))
            fn = semi_decide if procedure == "semi" else revisited_decide
            v = fn(net, binding, f, limits)
            row["outcome"] = v.outcome
            row["trusted"] = v.trusted
            row["procedure"] = v.procedure
        row["stats"] = {"ms": round((time.monotonic() - t0) * 1000.0, 3)}
        return row, None
    except (ltl.LtlSyntaxError, ValueError, KeyError) as e:
        return None, {"line": line, "formula": text, "label": label, "error": f"error: {e}"}
    except ResourceError as e:
        return None, {"line": line, "formula": text, "label": label, "error": f"resource: {e}"}


@cli.command()
@click.option("--formulas", "formulas_path", required=True, type=click.Path(exists=True, dir_okay=False),
              help="One formula per line, '#' comments.")
@click.option("--net", "net_path", type=click.Path(exists=True, dir_okay=False), default=None,
              help="Also check every formula on this net.")
@click.option("--atom", "atoms", multiple=True, metavar="NAME:=EXPR")
@click.option("--procedure", type=click.Choice(["semi", "revisited"]), default="revisited",
              show_default=True)
@click.option("--jobs", type=click.IntRange(min=1), default=1, show_default=True)
@click.option("--format", "fmt", type=click.Choice(["text", "json", "both"]), default="both",
              show_default=True)
@click.option("--json-out", type=click.Path(dir_okay=False), default=None,
              help="Also write the JSON report to this file.")
@_caps
def batch(formulas_path, net_path, atoms, procedure, jobs, fmt, json_out, state_cap, rank_cap,
          timeout_s):
    """Classify (and optionally check) every formula of a file."""
    rows = read_formulas(formulas_path)
    for line, text, _ in rows:
        try:
            ltl.parse(text)
        except ltl.LtlSyntaxError as e:
            raise click.BadParameter(f"{formulas_path}:{line}: {e}", param_hint="--formulas") from None
    net_text = None
    if net_path is not None:
        _load_net(net_path, atoms)  # validate before the expensive part
        net_text = Path(net_path).read_text()
    limits = _limits(state_cap, rank_cap, timeout_s)
    work = [(line, text, label, net_text, atoms, procedure, limits) for line, text, label in rows]
    if jobs == 1:
        results = list(map(_batch_row, work))
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_batch_row, work))
    report = BatchReport()
    for row, failure in results:
        if row is not None:
            report.rows.append(row)
        else:
            report.failures.append(failure)
    data = _dump(report.to_json())
    if json_out:
        Path(json_out).write_text(data + "\n")
    if fmt in ("text", "both"):
        click.echo(report.table())
    if fmt in ("json", "both"):
        click.echo(data)


def main(argv=None) -> int:
    """Entry point; returns the process exit status."""
    try:
        rv = cli.main(args=argv, prog_name="stutterkit", standalone_mode=False)
    except click.exceptions.Exit as e:
        return e.exit_code
    except click.UsageError as e:
        e.show()
        return EXIT_USAGE
    except click.Abort:
        click.echo("aborted", err=True)
        return EXIT_USAGE
    except ResourceError as e:
        stage = getattr(e, "stage", None)
        click.echo(f"resource limit reached{f' during {stage}' if stage else ''}: {e}", err=True)
        return EXIT_RESOURCE
    except click.ClickException as e:
        e.show()
        return EXIT_USAGE
    if isinstance(rv, int):
        return rv
    return EXIT_OK
