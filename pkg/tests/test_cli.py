import json
import subprocess
import sys

import pytest

from softuniform import fixture_path
from softuniform.cli import main, run
from softuniform.generate import generate_document

FIX = {n: str(fixture_path(n + ".yaml")) for n in ("discrete", "full", "metric", "metric_single", "relaxed_gap")}


def report(*argv):
    code, text = run([*argv, "--format", "json"])
    data = json.loads(text)
    assert data["exit_code"] == code
    return code, data


def verdicts(data):
    return {c["name"]: c["verdict"] for c in data["checks"]}


def test_validate_discrete_passes():
    code, data = report("validate", FIX["discrete"])
    assert code == 0 and set(verdicts(data).values()) == {"pass"}


def test_validate_reports_root_failure(tmp_path):
    doc = """\
universe: ["a","b","c"]
parameters: ["e"]
sections: {"e": ["a","b","c"]}
base: [{"name": "R", "graph": {"e": [["a","a"],["b","b"],["c","c"],["a","b"],["b","a"],["b","c"],["c","b"]]}}]
"""
    p = tmp_path / "r.yaml"
    p.write_text(doc)
    code, data = report("validate", str(p))
    assert code == 1
    v = verdicts(data)
    assert v["U4"] == "fail" and v["U1"] == "pass"
    (u4,) = [c for c in data["checks"] if c["name"] == "U4"]
    assert u4["witness"][0]["witnesses"] == [["R", "e", ["a", "c"]]]
    # checks that need a valid base refuse it with an input error
    code, data = report("separation", str(p))
    assert code == 2 and "U4" in data["error"]


def test_separation_full_relation():
    code, data = report("separation", FIX["full"])
    v = verdicts(data)
    assert v["separated"] == "fail" and v["T1"] == "fail" and v["separated-iff-T1"] == "pass"
    assert code == 1
    t1 = next(c for c in data["checks"] if c["name"] == "T1")
    assert t1["witness"]["element"] == ["a", "b"]


@pytest.mark.parametrize("name", ["discrete", "full", "metric", "metric_single"])
def test_complete_passes_on_fixtures(name):
    code, data = report("complete", FIX[name])
    assert code == 0
    assert verdicts(data)["limit-traces"] == "pass"


@pytest.mark.parametrize("name", ["discrete", "full", "metric", "metric_single"])
def test_oracle_agrees_on_fixtures(name):
    code, data = report("oracle", FIX[name])
    assert code == 0, data


def test_oracle_bridge_on_single_parameter_metric():
    _, data = report("oracle", FIX["metric_single"])
    assert verdicts(data)["soft-vs-classical"] == "pass"


def test_topology_command():
    code, data = report("topology", FIX["discrete"])
    assert code == 0 and data["opens"] == 16
    code, data = report("topology", FIX["full"])
    assert data["opens"] == 8 and data["vacuous_opens"] == 7
    # the soft union of two vacuous opens need not be open
    assert code == 1 and verdicts(data)["closed-under-union"] == "fail"
    w = next(c for c in data["checks"] if c["name"] == "closed-under-union")["witness"]
    assert w["result_not_open"] == {"e1": ["a"], "e2": ["b"]}


def test_lebesgue_and_cover_commands(tmp_path):
    code, data = report("lebesgue", FIX["metric"])
    assert code == 0
    cover = tmp_path / "c.yaml"
    cover.write_text('cover: [{"e1": ["a", "b"], "e2": ["b", "c"]}]\n')
    code, data = report("lebesgue", FIX["discrete"], "--cover", str(cover))
    assert code == 0
    cover.write_text('cover: [{"e1": ["a"], "e2": ["b"]}]\n')
    code, data = report("lebesgue", FIX["full"], "--cover", str(cover))
    assert code == 2 and "not open" in data["error"]
    code, data = report("cover", FIX["discrete"])
    assert code == 0 and "minimum 2" in data["checks"][0]["diagnostics"][0]


def test_map_check_relaxed_gap():
    code, data = report("map-check", FIX["relaxed_gap"])
    assert code == 2
    code, data = report("map-check", FIX["relaxed_gap"], "--allow-invalid")
    v = verdicts(data)
    assert code == 1
    assert v["continuous"] == "pass" and v["uniformly-continuous"] == "fail"
    assert v["continuous-implies-uniform"] == "fail"


def test_map_check_valid(tmp_path):
    m = tmp_path / "m.yaml"
    m.write_text(
        f'domain: "{FIX["discrete"]}"\ncodomain: "{FIX["full"]}"\n'
        'maps: {"e1": {"a": "b", "b": "b"}, "e2": {"b": "c", "c": "c"}}\n'
    )
    code, data = report("map-check", str(m))
    assert code == 0, data
    assert verdicts(data)["heine-cantor-replay"] == "pass"


def test_caps_give_exit_two():
    code, data = report("topology", FIX["discrete"], "--max-subsets", "4")
    assert code == 2
    code, data = report("complete", FIX["discrete"], "--max-elements", "2")
    assert code == 2 and verdicts(data)["complete"] == "skipped"


def test_missing_and_malformed_input(tmp_path):
    code, data = report("validate", str(tmp_path / "nope.yaml"))
    assert code == 2
    bad = tmp_path / "bad.yaml"
    bad.write_text('universe: ["a"]\nparameters: ["e"]\nsections: {"e": ["q"]}\nbase: []\n')
    code, data = report("validate", str(bad))
    assert code == 2 and "bad.yaml:3" in data["error"]


def test_generate_is_deterministic(tmp_path, capsys):
    assert main(["generate", "--seed", "42"]) == 0
    first = capsys.readouterr().out
    assert main(["generate", "--seed", "42"]) == 0
    assert capsys.readouterr().out == first == generate_document(42)
    out = tmp_path / "g.yaml"
    assert main(["generate", "--seed", "42", "-o", str(out)]) == 0
    assert out.read_text() == first
    code, data = report("validate", str(out))
    assert code == 0


def test_generate_rejects_bad_seed():
    code, text = run(["generate", "--seed", "-1"])
    assert code == 2


def test_text_rendering():
    code, text = run(["separation", FIX["full"]])
    assert code == 1
    assert "separated-iff-T1" in text and text.rstrip().endswith("exit 1")


def test_console_script():
    out = subprocess.run(
        [sys.executable, "-m", "softuniform.cli", "validate", FIX["discrete"]], capture_output=True, text=True
    )
    assert out.returncode == 0 and "U4" in out.stdout
