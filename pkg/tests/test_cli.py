import json
import subprocess
import sys

import numpy as np
import pytest

from chsh_atlas.cli import main
from chsh_atlas.quantum import IDENTITY2, QnfgModel, density, phi_plus
from chsh_atlas.scenarios import witness_dir
from chsh_atlas.serialization import dumps, model_to_dict

ONES = [[1, 1], [1, 1]]


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.fixture
def files(tmp_path):
    cycle = tmp_path / "cycle.json"
    cycle.write_text(json.dumps({"type": "cycle", "tables": {k: ONES for k in ("f12", "f14", "f32", "f34")}}))
    neg = tmp_path / "neg.json"
    neg.write_text(json.dumps({"type": "cycle", "tables": {"f12": ONES, "f14": [[1, -2], [1, 1]],
                                                           "f32": ONES, "f34": ONES}}))
    phi = tmp_path / "phi.json"
    phi.write_text(dumps(model_to_dict(QnfgModel(density(phi_plus()), IDENTITY2, IDENTITY2)), digits=None))
    bad = tmp_path / "bad.json"
    bad.write_text("{")
    return {"cycle": cycle, "neg": neg, "phi": phi, "bad": bad}


def test_marginals_cycle(capsys, files):
    code, out, _ = run(capsys, "marginals", str(files["cycle"]), "--format", "json")
    d = json.loads(out)
    assert code == 0 and d["corr_chsh"] == 0 and d["source"] == "graph"
    assert all(v == 0.25 for k in d["beliefs"]["pairs"] for row in d["beliefs"]["pairs"][k] for v in row)


def test_marginals_phi_plus(capsys, files):
    code, out, _ = run(capsys, "marginals", str(files["phi"]), "--format", "json")
    assert code == 0 and json.loads(out)["corr_chsh"] == 2


def test_marginals_text_and_csv(capsys, files):
    code, out, _ = run(capsys, "marginals", str(files["cycle"]))
    assert code == 0 and "CorrCHSH = 0" in out
    code, out, _ = run(capsys, "marginals", str(files["cycle"]), "--format", "csv")
    assert out.splitlines()[0] == "pair,x_i,x_j,value" and len(out.splitlines()) == 17


def test_input_errors(capsys, files, tmp_path):
    code, _, err = run(capsys, "marginals", str(files["neg"]))
    assert code == 2 and "f14" in err and "-2.0" in err
    assert run(capsys, "marginals", str(files["bad"]))[0] == 2
    assert run(capsys, "marginals", str(tmp_path / "missing.json"))[0] == 2
    assert run(capsys, "check", str(files["cycle"]), "--sets", "lm,bogus")[0] == 2
    with pytest.raises(SystemExit) as e:
        main(["verify", "--suite", "nope"])
    assert e.value.code == 2
    with pytest.raises(SystemExit) as e:
        main([])
    assert e.value.code == 2


def test_check_pr_box(capsys):
    code, out, _ = run(capsys, "check", str(witness_dir() / "venn_8.json"), "--format", "json")
    s = json.loads(out)["sets"]
    assert code == 0
    assert s["lm"]["status"] == "IN"
    assert (s["snfg"]["status"], s["snfg"]["evidence"]) == ("OUT", "certified")
    assert (s["qnfg"]["status"], s["qnfg"]["evidence"]) == ("OUT", "bound")
    assert s["markov"]["evidence"] == s["fcyc"]["evidence"] == "inclusion"


def test_check_uniform(capsys):
    code, out, _ = run(capsys, "check", str(witness_dir() / "venn_1.json"), "--format", "json", "--restarts", "4")
    assert code == 0 and all(v["status"] == "IN" for v in json.loads(out)["sets"].values())


def test_check_bell(capsys):
    code, out, _ = run(capsys, "check", str(witness_dir() / "bell_game_model.json"), "--sets", "snfg,qnfg",
                       "--format", "json", "--restarts", "8")
    s = json.loads(out)["sets"]
    assert code == 0 and s["snfg"]["status"] == "OUT" and s["qnfg"]["status"] == "IN"


def test_check_tol_flag(capsys, tmp_path):
    p = tmp_path / "b.json"
    pairs = {k: [[0.25, 0.25], [0.25, 0.25]] for k in ("12", "14", "32", "34")}
    pairs["12"] = [[0.25, 0.25], [0.25, 0.2500001]]
    p.write_text(json.dumps({"pairs": pairs, "singles": {str(i): [0.5, 0.5] for i in range(1, 5)}}))
    _, out, _ = run(capsys, "check", str(p), "--sets", "lm", "--format", "json")
    assert json.loads(out)["sets"]["lm"]["status"] == "OUT"
    _, out, _ = run(capsys, "check", str(p), "--sets", "lm", "--format", "json", "--tol", "1e-6")
    assert json.loads(out)["sets"]["lm"]["status"] == "IN"


def test_verify_markov(capsys):
    code, out, _ = run(capsys, "verify", "--suite", "markov", "--restarts", "8")
    assert code == 0 and "FAIL" not in out and "Markov product identity" in out


def test_verify_failure_exit_code(capsys, monkeypatch):
    from chsh_atlas import suites
    monkeypatch.setitem(suites.SUITES, "markov", lambda seed=0, restarts=None: [suites.Check("x", False)])
    code, out, _ = run(capsys, "verify", "--suite", "markov")
    assert code == 1 and "FAIL x" in out


def test_optimize_json_and_trace(capsys, tmp_path):
    trace = tmp_path / "t.csv"
    code, out, _ = run(capsys, "optimize", "classical", "--restarts", "4", "--format", "json",
                       "--trace", str(trace))
    d = json.loads(out)
    assert code == 0 and d["value"] == 2.5 and len(d["restart_values"]) == 4
    lines = trace.read_text().splitlines()
    assert lines[0] == "restart,iteration,objective" and len(lines) == 1 + 4 * 2500


def test_byte_identical_json(capsys):
    outs = [run(capsys, "optimize", "quantum", "--restarts", "3", "--seed", "5", "--format", "json")[1]
            for _ in range(2)]
    assert outs[0] == outs[1]
    other = run(capsys, "optimize", "quantum", "--restarts", "3", "--seed", "6", "--format", "json")[1]
    assert other != outs[0]


def test_console_script_entry(files):
    r = subprocess.run([sys.executable, "-m", "chsh_atlas.cli", "marginals", str(files["cycle"]), "--format", "json"],
                       capture_output=True, text=True)
    assert r.returncode == 0 and json.loads(r.stdout)["corr_chsh"] == 0


def test_witnesses_regenerate(capsys, tmp_path):
    code, out, _ = run(capsys, "witnesses", "regenerate", "--out", str(tmp_path / "w"))
    assert code == 0 and (tmp_path / "w" / "manifest.json").exists()
    assert (tmp_path / "w" / "manifest.json").read_text() == (witness_dir() / "manifest.json").read_text()
