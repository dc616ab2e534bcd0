import json

import pytest

from stutterkit.cli import main, read_formulas
from stutterkit.corpus import data_path
from stutterkit.hoa import parse_hoa

FIG1 = data_path("fig1.net")


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def strip_stats(obj):
    if isinstance(obj, dict):
        return {k: strip_stats(v) for k, v in obj.items() if k != "stats"}
    if isinstance(obj, list):
        return [strip_stats(x) for x in obj]
    return obj


def test_classify(capsys):
    assert run(capsys, "classify", "-f", "G p") == (0, "SI\n", "")
    assert run(capsys, "classify", "-f", "X p")[1] == "LS\n"


def test_classify_syntax_error(capsys):
    code, out, err = run(capsys, "classify", "-f", "U p")
    assert code == 1 and "offset 0" in err


def test_unknown_command(capsys):
    assert run(capsys, "frobnicate")[0] == 1


def test_partition_emits_four_automata(capsys):
    code, out, _ = run(capsys, "partition", "-f", "X p")
    assert code == 0
    chunks = [c + "--END--\n" for c in out.split("--END--\n") if c.strip()]
    assert len(chunks) == 4
    names = [c.split('name: "')[1].split('"')[0] for c in chunks]
    assert names == ["si_pm", "si_minus", "si_plus", "ss"]
    for c in chunks:
        parse_hoa(c)


def test_partition_union_flag(capsys):
    code, out, _ = run(capsys, "partition", "-f", "X p", "--union-si-minus")
    assert code == 0
    si_minus = out.split('name: "si_minus"')[1].split("--END--")[0]
    assert "[" not in si_minus   # no edges left


def test_reduce_fig1(capsys):
    code, out, _ = run(capsys, "reduce", "--net", FIG1, "-f", "G(p -> F !q)")
    assert code == 0
    lines = out.splitlines()
    assert "trans z40.send.recv in a1,b0,y0 out a2" in lines
    stats = json.loads(lines[-1].removeprefix("# stats "))
    assert stats == {"places_removed": 2, "transitions_removed": 2, "steps": ["post:b1", "pre:chan"]}


def test_check_semi_fig1(capsys):
    code, out, _ = run(capsys, "check", "--net", FIG1, "-f", "G p", "--procedure", "semi")
    assert code == 0
    v = json.loads(out)
    assert v["outcome"] == "violated" and v["trusted"] and "witness" in v
    assert v["procedure"] == "semi"


def test_check_default_is_revisited(capsys):
    v = json.loads(run(capsys, "check", "--net", FIG1, "-f", "X p")[1])
    assert v["procedure"].startswith("revisited") and v["trusted"]


def test_require_trusted(capsys):
    code, out, _ = run(capsys, "check", "--net", FIG1, "-f", "X p", "--procedure", "semi",
                       "--require-trusted")
    assert code == 3 and json.loads(out)["outcome"] == "unknown"
    code, _, _ = run(capsys, "check", "--net", FIG1, "-f", "G p", "--procedure", "semi",
                     "--require-trusted")
    assert code == 0


def test_truth(capsys):
    code, out, _ = run(capsys, "truth", "--net", FIG1, "-f", "F G !q")
    assert code == 0 and json.loads(out)["outcome"] == "holds"


def test_resource_cap_exit(capsys, tmp_path):
    net = tmp_path / "grow.net"
    net.write_text("place a init 1\nplace b\ntrans t in a out a,b\natom p := m(b) > 0\n")
    code, _, err = run(capsys, "truth", "--net", str(net), "-f", "G p", "--state-cap", "10")
    assert code == 2 and "resource limit" in err


def test_missing_atom_and_bad_net(capsys, tmp_path):
    assert run(capsys, "check", "--net", FIG1, "-f", "G r")[0] == 1
    bad = tmp_path / "bad.net"
    bad.write_text("place a\ntrans t in zz\n")
    code, _, err = run(capsys, "check", "--net", str(bad), "-f", "G p")
    assert code == 1 and "zz" in err
    assert run(capsys, "check", "--net", str(tmp_path / "none.net"), "-f", "G p")[0] == 1


def test_extra_atoms(capsys):
    code, out, _ = run(capsys, "truth", "--net", FIG1, "--atom", "r:=m(chan) > 0", "-f", "G !r")
    assert code == 0 and json.loads(out)["outcome"] == "violated"
    assert run(capsys, "truth", "--net", FIG1, "--atom", "oops", "-f", "G p")[0] == 1


def test_pnml_with_atoms(capsys, tmp_path):
    from test_petri import PNML

    path = tmp_path / "n.pnml"
    path.write_text(PNML)
    code, out, _ = run(capsys, "check", "--net", str(path), "--atom", "p:=m(b) = 0", "-f", "F !p")
    assert code == 0 and json.loads(out)["outcome"] == "holds"


def test_check_output_is_deterministic(capsys):
    args = ("check", "--net", FIG1, "-f", "G(p -> X !p)")
    a = strip_stats(json.loads(run(capsys, *args)[1]))
    b = strip_stats(json.loads(run(capsys, *args)[1]))
    assert a == b


FORMULAS = """# demo
G p          # globally
X p
p U q        # until
F(p && X p)
G(p -> X !p)
"""


def test_read_formulas(tmp_path):
    path = tmp_path / "f.ltl"
    path.write_text(FORMULAS)
    assert read_formulas(str(path)) == [
        (2, "G p", "globally"), (3, "X p", ""), (4, "p U q", "until"),
        (5, "F(p && X p)", ""), (6, "G(p -> X !p)", ""),
    ]


def test_batch(capsys, tmp_path):
    path = tmp_path / "f.ltl"
    path.write_text(FORMULAS)
    out_json = tmp_path / "r.json"
    code, out, _ = run(capsys, "batch", "--formulas", str(path), "--format", "text",
                       "--json-out", str(out_json))
    assert code == 0
    last = out.strip().splitlines()[-1]
    assert last.startswith("summary: 5 formulas") and "SI=2" in last and "LS=1" in last
    report = json.loads(out_json.read_text())
    assert report["summary"] == {"SI": 2, "LI": 1, "ShI": 1, "LS": 1}
    assert sum(report["summary"].values()) == len(report["rows"])
    assert [r["label"] for r in report["rows"]][:1] == ["globally"]


def test_batch_with_net_and_jobs(capsys, tmp_path):
    path = tmp_path / "f.ltl"
    path.write_text(FORMULAS)
    one = json.loads(run(capsys, "batch", "--formulas", str(path), "--net", FIG1,
                         "--format", "json")[1])
    two = json.loads(run(capsys, "batch", "--formulas", str(path), "--net", FIG1,
                         "--format", "json", "--jobs", "2")[1])
    assert strip_stats(one) == strip_stats(two)
    assert all(r["trusted"] for r in one["rows"])
    assert [r["line"] for r in one["rows"]] == [2, 3, 4, 5, 6]


def test_batch_rejects_bad_formula_early(capsys, tmp_path):
    path = tmp_path / "f.ltl"
    path.write_text("G p\nU q\n")
    code, _, err = run(capsys, "batch", "--formulas", str(path))
    assert code == 1 and ":2:" in err


def test_batch_failures_are_listed(capsys, tmp_path):
    path = tmp_path / "f.ltl"
    path.write_text("G p\nG r\n")
    out = run(capsys, "batch", "--formulas", str(path), "--net", FIG1, "--format", "json")[1]
    report = json.loads(out)
    assert len(report["rows"]) == 1 and report["failures"][0]["line"] == 2


def test_console_script_exit_status():
    import shutil
    import subprocess

    exe = shutil.which("stutterkit")
    if exe is None:
        pytest.skip("package not installed")
    ok = subprocess.run([exe, "classify", "-f", "G(p -> F q)"], capture_output=True, text=True)
    assert ok.returncode == 0 and ok.stdout.strip() == "SI"
    bad = subprocess.run([exe, "classify", "-f", "G(p ->"], capture_output=True, text=True)
    assert bad.returncode == 1 and bad.stderr
