import copy
import io
import json
import subprocess
import sys

import pytest

from reldoc.builtins import VRelDoctrine
from reldoc.cli import BAD_INPUT, CAP, FOUND, OK, build_builtin, emit_builtin, load, run
from reldoc.doctrine import structurally_equal, tabulate
from reldoc.quantale import boolean


def call(*argv):
    buf = io.StringIO()
    code = run(list(argv), buf)
    return code, buf.getvalue()


def write(tmp_path, name, doc):
    p = tmp_path / name
    p.write_text(doc if isinstance(doc, str) else json.dumps(doc))
    return str(p)


@pytest.fixture
def rel12(tmp_path):
    code, text = call("builtin", "vrel", "--quantale", "boolean", "--carriers", "1,2")
    assert code == OK
    return write(tmp_path, "rel.json", json.loads(text)["result"])


@pytest.fixture
def pf12(tmp_path):
    code, text = call("builtin", "vrel", "--quantale", "powerset_frame(2)", "--carriers", "1,2")
    return write(tmp_path, "pf.json", json.loads(text)["result"])


def test_laws_on_builtins(rel12, tmp_path):
    code, text = call("laws", rel12, "--exhaustive")
    doc = json.loads(text)
    assert code == OK and doc["exit"] == OK and doc["result"]["input"] == "doctrine"
    q = write(tmp_path, "q.json", '"chain(3)"')
    assert call("laws", q)[0] == OK


def test_output_is_deterministic(pf12):
    first = call("complete", pf12, "--seed", "3")
    second = call("complete", pf12, "--seed", "3")
    assert first == second
    assert call("analyze", pf12) == call("analyze", pf12)


def test_counterexample_exit_codes(rel12, pf12):
    code, text = call("counterexample", pf12)
    assert code == FOUND
    assert json.loads(text)["result"]["counterexample"]["object"] == "X1"
    assert call("counterexample", rel12)[0] == OK


def test_bad_input_codes(tmp_path, rel12):
    assert call("laws", write(tmp_path, "bad.json", "{nope"))[0] == BAD_INPUT
    assert call("laws", str(tmp_path / "missing.json"))[0] == BAD_INPUT
    assert call("frobnicate", rel12)[0] == BAD_INPUT
    assert call("quotient", rel12)[0] == BAD_INPUT
    assert call("quotient", rel12, "--object", "Z")[0] == BAD_INPUT
    code, text = call("quotient", rel12, "--object", "X1", "--relation", "[[1,1],[0,1]]")
    assert code == BAD_INPUT and json.loads(text)["error"] == "precondition"


def test_missing_table_entry_is_structural(tmp_path):
    data = tabulate(VRelDoctrine(boolean(), [1, 2]))
    del data["conv"]["X1,X0"]
    code, text = call("laws", write(tmp_path, "t.json", data))
    doc = json.loads(text)
    assert code == BAD_INPUT and doc["error"] == "structural"
    assert any("conv" in p for p in doc["problems"])


def test_law_violation_exit(tmp_path):
    data = copy.deepcopy(tabulate(VRelDoctrine(boolean(), [1, 2])))
    tab = data["comp"]["X1,X1,X1"]
    tab[1][2] = data["fibres"]["X1,X1"]["elements"][0] if tab[1][2] != data["fibres"]["X1,X1"]["elements"][0] \
        else data["fibres"]["X1,X1"]["elements"][-1]
    code, text = call("laws", write(tmp_path, "t.json", data), "--exhaustive")
    assert code == FOUND and json.loads(text)["result"]["report"]["violations"]


def test_cap_exit(tmp_path):
    code, text = call("builtin", "vrel", "--quantale", "chain(3)", "--carriers", "5", "--cap-fibre", "1000")
    assert code == CAP and json.loads(text)["error"] == "cap"


def test_quotient_and_compactify(rel12):
    code, text = call("quotient", rel12, "--object", "X1")
    doc = json.loads(text)["result"]
    assert code == OK and len(doc["quotients"]) == 2
    code, text = call("compactify", rel12, "--object", "X1", "--phi", "[[1,1],[0,1]]")
    doc = json.loads(text)["result"]
    assert code == OK and doc["compactifications"][0]["partition"] == [["0", "1"]]
    code, text = call("compactify", rel12, "--properties", "--equivalence")
    doc = json.loads(text)["result"]
    assert code == OK and doc["equivalence"]["holds"] and doc["spaces"] == 5


def test_monad_input(tmp_path):
    p = write(tmp_path, "m.json", {"monad": {"builtin_monad": "powerset", "carriers": [1, 2]}})
    code, text = call("laws", p)
    assert code == OK and json.loads(text)["result"]["input"] == "monad"
    code, text = call("compactify", p)
    doc = json.loads(text)["result"]
    assert code == OK and doc["refused"] == 3


def test_singletons_on_walters_completion(tmp_path):
    code, text = call("builtin", "walters", "--quantale", "chain(2)", "--carriers", "1",
                      "--params", '{"completions": true}')
    p = write(tmp_path, "w.json", json.loads(text)["result"])
    code, text = call("singletons", p)
    doc = json.loads(text)["result"]
    assert code == OK and doc["three_way"]["agree"] and doc["reflector"]["checks"]


def test_text_format(rel12):
    code, text = call("analyze", rel12, "--format", "text")
    assert code == OK and text.startswith("command: \"analyze\"")


@pytest.mark.parametrize("kind,params", [
    ("vrel", {"quantale": "boolean", "carriers": [1, 2]}),
    ("vcat", {"quantale": "tropical_grid(1,2)", "points": [2]}),
    ("quantale", {"quantale": "chain(1)"}),
])
def test_emitted_builtins_round_trip(tmp_path, kind, params):
    path = str(tmp_path / "out.json")
    emit_builtin(kind, params, path)
    _, loaded = load(json.loads(open(path).read()))
    built = build_builtin(kind, params)
    if kind == "quantale":
        assert loaded == built
    else:
        assert structurally_equal(loaded, built)


def test_console_script(rel12):
    proc = subprocess.run([sys.executable, "-m", "reldoc.cli", "counterexample", rel12],
                          capture_output=True, text=True)
    assert proc.returncode == OK
    assert json.loads(proc.stdout)["result"]["counterexample"] == "none"
