import json
import subprocess
import sys
from pathlib import Path

import pytest

from balanced_sets import artifacts
from balanced_sets.cli import main, render_report

GOLDEN = Path(__file__).parent / "golden"


def run(*args, cwd=None):
    return subprocess.run([sys.executable, "-m", "balanced_sets", *map(str, args)],
                          capture_output=True, text=True, cwd=cwd)


@pytest.fixture(scope="module")
def built(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli")
    res = run("build", "--branching", "2,2,8,96", "-o", d / "sys.json")
    assert res.returncode == 0, res.stderr
    return d


@pytest.mark.parametrize("name,args", [
    ("build_2_2.json", ["build", "--branching", "2,2"]),
    ("gauge_2_2.json", ["gauge", "--branching", "2,2", "--samples", "8"]),
    ("min_cover_2_2.json", ["min-cover", "--branching", "2,2", "--level", "2", "--enumerate"]),
])
def test_golden_files(tmp_path, name, args):
    out = tmp_path / name
    res = run(*args, "-q", "-o", out)
    assert res.returncode == 0, res.stderr
    assert out.read_bytes() == (GOLDEN / name).read_bytes()


def test_stdout_when_no_out_path():
    res = run("plan", "--branching", "2,2,8")
    assert res.returncode == 0
    doc = json.loads(res.stdout)
    assert doc["plan"]["branching"] == [2, 2, 8]


def test_build_validate_exit_zero(built):
    res = run("validate", "--system", built / "sys.json", "-o", built / "val.json")
    assert res.returncode == 0, res.stderr
    assert artifacts.read(built / "val.json", "validation")["ok"] is True


def test_validate_broken_system_exit_one(built, tmp_path):
    doc = json.loads((built / "sys.json").read_text())
    for entry in doc["pieces"]:
        if entry[0] == [2]:
            entry[1] = ["3/16", "5/16"]  # collides with piece (1)
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(doc))
    res = run("validate", "--system", bad, "-o", tmp_path / "v.json")
    assert res.returncode == 1
    rep = artifacts.read(tmp_path / "v.json")
    failing = [c for c in rep["checks"] if not c["passed"]]
    assert failing and failing[0]["witness"] is not None


def test_usage_errors(tmp_path):
    assert run("frobnicate").returncode == 2
    assert run("an-sweep", "--branching", "2,2,8,96").returncode == 2
    assert "--seed" in run("an-sweep", "--branching", "2,2,8,96").stderr
    assert run("build", "--branching", "1,2").returncode == 2
    junk = tmp_path / "junk.json"
    junk.write_text("{}")
    assert run("validate", "--system", junk).returncode == 2
    assert run("certify", "--verify", tmp_path / "nope.json").returncode == 2
    assert run("build").returncode == 2


def test_certify_missing_coverage(built, tmp_path):
    doc = artifacts.read(built / "sys.json")
    elements = [iv for idx, iv in doc["pieces"] if len(idx) == 3][1:]
    cover = tmp_path / "cover.json"
    artifacts.write(cover, "cover", {"target": None, "elements": elements})
    res = run("certify", "--system", built / "sys.json", "--cover", cover, "-o", tmp_path / "c.json")
    assert res.returncode == 1
    out = artifacts.read(tmp_path / "c.json")
    assert out["reason"] == "coverage" and out["missed"][0] == [1, 1, 1, 1]
    assert "misses 96" in res.stdout


def test_certify_and_standalone_verify(built, tmp_path):
    cert = tmp_path / "cert.json"
    res = run("certify", "--system", built / "sys.json", "--random", "--seed", 4, "-o", cert)
    assert res.returncode == 0, res.stdout + res.stderr
    res = run("certify", "--verify", cert, "-o", tmp_path / "check.json")
    assert res.returncode == 0
    doc = json.loads(cert.read_text())
    doc["values"][0] = "0"
    cert.write_text(json.dumps(doc))
    assert run("certify", "--verify", cert, "-q").returncode == 1


def test_an_sweep_row(built, tmp_path):
    out = tmp_path / "an.json"
    res = run("an-sweep", "--system", built / "sys.json", "--seed", 1, "--maps", 6, "-o", out)
    assert res.returncode == 0, res.stderr
    rows = artifacts.read(out, "an-sweep")["rows"]
    assert [r["aggregate"] for r in rows] == ["1", "1/2", "1/3"]
    assert rows[2]["n"] == 3


def test_contraction_check_verbs(built, tmp_path):
    m = tmp_path / "map.json"
    res = run("contraction-check", "--system", built / "sys.json", "--random", "--seed", 3,
              "--map-out", m, "-o", tmp_path / "c.json")
    assert res.returncode == 0, res.stderr
    doc = artifacts.read(m, "map")
    doc["points"][1][1] = str(10 ** 30)  # far-flung image: an expansive pair
    m.write_text(json.dumps(doc))
    res = run("contraction-check", "--map", m, "-o", tmp_path / "c2.json")
    assert res.returncode == 1
    assert artifacts.read(tmp_path / "c2.json")["pair"] is not None


def test_lebesgue_and_f0(built, tmp_path):
    assert run("lebesgue", "--system", built / "sys.json", "-q", "-o", tmp_path / "l.json").returncode == 0
    res = run("f0", "--system", built / "sys.json", "--count", 4, "-o", tmp_path / "f.json")
    assert res.returncode == 0
    f0 = artifacts.read(tmp_path / "f.json", "f0")
    assert f0["series"] == "2401/3072" and f0["agree"]
    assert run("f0", "--system", built / "sys.json", "--count", 5).returncode == 2


def test_report(built, tmp_path):
    d = tmp_path
    assert run("min-cover", "--system", built / "sys.json", "--level", 4, "-o", d / "mc.json").returncode == 0
    assert run("gauge", "--system", built / "sys.json", "-o", d / "g.json").returncode == 0
    res = run("report", d / "mc.json", d / "g.json", "--plot-data", d / "plot.tsv")
    assert res.returncode == 0
    assert "H^h(K) upper = lower = 1" in res.stdout
    rows = (d / "plot.tsv").read_text().splitlines()
    assert len(rows) == 64 and all(len(r.split("\t")) == 2 for r in rows)
    assert "." not in "".join(rows)


def test_report_flags_refutations():
    doc = artifacts.envelope("an-sweep", {
        "seed": 0, "maps": 1, "branching": [2, 2, 8, 96],
        "rows": [{"n": 1, "per_target": "1/2", "aggregate": "1", "inverse_n": "1", "max_count": 2,
                  "certified": [[[1], 1, "1/4"]], "ok": False}],
    })
    text, _, ok = render_report([doc])
    assert not ok and "!!! REFUTATION WITNESS" in text
    text, _, ok = render_report([artifacts.envelope("min-cover", {
        "target": None, "upper": "1", "oracle": "3/4"})])
    assert not ok and "MISMATCH" in text


def test_main_in_process(tmp_path, capsys):
    assert main(["plan", "--branching", "2,2", "-o", str(tmp_path / "p.json")]) == 0
    assert main(["build", "--plan", str(tmp_path / "p.json"), "-q"]) == 0
    with pytest.raises(SystemExit) as exc:
        main(["nope"])
    assert exc.value.code == 2


def test_determinism(tmp_path):
    outs = []
    for k in range(2):
        d = tmp_path / f"run{k}"
        d.mkdir()
        assert run("build", "--branching", "2,2,8", "-q", "-o", d / "s.json").returncode == 0
        assert run("an-sweep", "--system", d / "s.json", "--seed", 7, "--maps", 5, "-q",
                   "-o", d / "a.json").returncode == 0
        assert run("certify", "--system", d / "s.json", "--random", "--seed", 7, "--min-diam-level", 2,
                   "-q", "-o", d / "c.json").returncode == 0
        outs.append([(d / n).read_bytes() for n in ("s.json", "a.json", "c.json")])
    assert outs[0] == outs[1]
