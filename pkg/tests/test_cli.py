import csv
import io
import json
import subprocess
import sys
from fractions import Fraction as F

import pytest

from dnfcover import acceptance
from dnfcover.cli import EXIT_ACCEPTANCE, EXIT_CAP, EXIT_ERROR, EXIT_OK, EXIT_VALIDATION, run


def call(*argv):
    out = io.StringIO()
    code = run(list(argv), out)
    return code, out.getvalue()


@pytest.fixture
def third_file(tmp_path):
    p = tmp_path / "third.json"
    p.write_text(json.dumps({"sizes": ["1/3", "2/3"], "probs": ["1/2", "1/2"]}))
    return str(p)


def write(tmp_path, name, obj):
    p = tmp_path / name
    p.write_text(obj if isinstance(obj, str) else json.dumps(obj))
    return str(p)


def test_analyze(third_file, tmp_path):
    dump = str(tmp_path / "chain.json")
    code, text = call("analyze", "-i", third_file, "--degree", "--dump-chain", dump)
    assert code == EXIT_OK
    rep = json.loads(text)
    assert rep["schema_version"] == 1
    assert (rep["expected_T"], rep["aecr"], rep["aecr_provenance"]) == ("9/4", "8/9", "perfect-packing")
    assert rep["degree"] == 1 and rep["wald_identity"] is True
    assert "aecr_note" not in rep
    assert len(json.load(open(dump))["states"]) == 3


def test_analyze_non_pp_and_periodic(tmp_path):
    code, text = call("analyze", "-i", write(tmp_path, "a.json", {"sizes": ["1/3", "2/5"], "probs": ["1/2", "1/2"]}))
    rep = json.loads(text)
    assert code == 0 and rep["aecr_provenance"] == "periodic" and "aecr_note" not in rep
    d = {"sizes": ["2/5", "1/2", "7/10"], "probs": ["1/3", "1/3", "1/3"]}
    code, text = call("analyze", "-i", write(tmp_path, "b.json", d), "--format", "csv")
    rows = dict(csv.reader(io.StringIO(text)))
    assert code == 0 and rows["schema_version"] == "1" and rows["aecr_provenance"] == "lp-bound"
    assert "aecr_note" in rows


@pytest.mark.parametrize(
    "content,code",
    [
        ({"sizes": ["1/3", "2/3"], "probs": ["1/2", "1/3"]}, EXIT_VALIDATION),
        ({"sizes": [0.5], "probs": ["1"]}, EXIT_VALIDATION),
        ("{broken", EXIT_VALIDATION),
    ],
)
def test_bad_inputs(tmp_path, content, code):
    assert call("analyze", "-i", write(tmp_path, "bad.json", content))[0] == code


def test_missing_file():
    assert call("analyze", "-i", "/nonexistent/dist.json")[0] == EXIT_VALIDATION


def test_state_cap(third_file):
    assert call("analyze", "-i", third_file, "--state-cap", "1")[0] == EXIT_CAP


def test_simulate_thread_independent(third_file):
    base = ("simulate", "-i", third_file, "--trials", "20000", "--seed", "0x2a")
    _, one = call(*base, "--threads", "1")
    _, three = call(*base, "--threads", "3")
    assert one == three
    rep = json.loads(one)
    assert rep["seed"] == 42 and rep["exact_T"] == "9/4"
    assert abs(rep["mean_T"] - 2.25) < 4 * rep["stderr_T"]


def test_random_order(tmp_path):
    p = write(tmp_path, "l.json", {"items": ["3/5", "3/5", "3/5", "3/5"]})
    code, text = call("random-order", "-i", p, "--trials", "1000")
    rep = json.loads(text)
    assert code == 0 and rep["opt"] == 2 and rep["estimate"] == 1
    p = write(tmp_path, "l2.json", ["1/3"])
    assert call("random-order", "-i", p, "--trials", "10")[0] == EXIT_ERROR


def test_bounds_csv():
    code, text = call("bounds")
    rows = list(csv.DictReader(io.StringIO(text)))
    assert code == 0 and len(rows) == 6
    assert all(r["schema_version"] == "1" and r["status"] == "pass" for r in rows)


def test_families(tmp_path):
    code, text = call("families", "fmk", "--m", "2", "--k", "3")
    assert code == 0 and json.loads(text)["sizes"] == ["1/9", "1/3", "2/3", "8/9"]
    assert call("families", "fmk", "--m", "2", "--k", "2")[0] == EXIT_VALIDATION
    assert call("families", "fmk", "--m", "2")[0] == EXIT_VALIDATION
    code, text = call("families", "pptwo", "--pairs", "9/10:1/10,3/5:2/5")
    assert code == 0 and json.loads(text)["probs"] == ["1/4"] * 4
    assert call("families", "pp1", "--sizes", "1/3,2/3", "--config", "2,1")[0] == EXIT_VALIDATION
    out = str(tmp_path / "u.json")
    assert call("families", "uniform", "--k", "4", "-o", out)[0] == 0
    assert call("analyze", "-i", out)[0] == 0


def test_verify_subset(capsys):
    code, text = call("verify", "--only", "4,9", "--quick")
    rows = list(csv.DictReader(io.StringIO(text)))
    assert code == EXIT_OK and [r["criterion"] for r in rows] == ["4", "9"]
    assert "[PASS]" in capsys.readouterr().err


def test_verify_detects_corrupted_reference():
    res = acceptance.run_acceptance(quick=True, only={1, 9}, references={"aecr_third": F(9, 10), "parking": (1, 3, 17)})
    assert [r.passed for r in res] == [False, False]


def test_verify_exit_code_on_failure(monkeypatch):
    monkeypatch.setitem(acceptance.REFERENCES, "parking", (1, 3, 17))
    assert call("verify", "--only", "9")[0] == EXIT_ACCEPTANCE


def test_module_entry_point(third_file):
    proc = subprocess.run(
        [sys.executable, "-m", "dnfcover.cli", "analyze", "-i", third_file], capture_output=True, text=True
    )
    assert proc.returncode == 0 and json.loads(proc.stdout)["aecr"] == "8/9"


@pytest.mark.parametrize("seed", ["-1", "0x1" + "0" * 16, "abc"])
def test_bad_seed_exits_validation(seed):
    with pytest.raises(SystemExit) as exc:
        call("bounds", "--seed", seed)
    assert exc.value.code == EXIT_VALIDATION


def test_nonpositive_trials(third_file):
    assert call("simulate", "-i", third_file, "--trials", "0")[0] == EXIT_VALIDATION
