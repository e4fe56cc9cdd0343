import json

import jsonschema
import pytest

from conftest import CANTOR, geometric

G = json.dumps(CANTOR)
S = json.dumps(geometric(0.5))
S0 = json.dumps(geometric(0.0))

# One small run per command; each must validate against its schema.
RUNS = {
    "analyze": ["--gauge", G, "--sigma", S, "--p", 2, "--q", 2],
    "indices": ["--sigma", S, "--v", "1,2.5"],
    "gauge-check": ["--gauge", G, "--samples", 64, "--xi-grid", 8],
    "build-set": ["--gauge", G, "--depth", 8],
    "verify-measure": ["--gauge", G, "--depth", 12, "--samples", 50, "--eta", 0.3, "--seed", 3],
    "cover": ["--gauge", G, "--depth", 12],
    "atom-check": ["--sigma", S, "--p", 2],
    "moment-correct": ["--gauge", G, "--sigma", S, "--p", 0.5],
    "density-curve": ["--mode", "harmonic", "--gauge", G, "--sigma", S0, "--p", 0.5, "--q", 1, "--k-hi", 30],
    "couple": ["--gauge", G, "--p", 2],
}


@pytest.mark.parametrize("command", sorted(RUNS))
def test_output_validates_and_replays(cli, schemas, tmp_path, command):
    out = tmp_path / f"{command}.json"
    res = cli(command, *RUNS[command], "--out", out)
    assert res.returncode == 0, res.stderr
    doc = json.loads(out.read_text())
    jsonschema.validate(doc, schemas[command])
    manifest = json.loads((tmp_path / f"{command}.json.manifest.json").read_text())
    jsonschema.validate(manifest, schemas["manifest"])
    assert manifest["command"] == command
    assert manifest["exit_code"] == 0
    before = {o["path"]: open(o["path"], "rb").read() for o in manifest["outputs"]}
    rep = cli("replay", tmp_path / f"{command}.json.manifest.json")
    assert rep.returncode == 0, rep.stdout + rep.stderr
    assert "DIFFERS" not in rep.stdout
    for path, data in before.items():
        assert open(path, "rb").read() == data


def test_density_modes_validate(cli, schemas, tmp_path):
    for mode, extra in [
        ("blocks", ["--sigma", S0, "--q", 2, "--blocks", 20]),
        ("subseq", ["--gauge", G, "--sigma", json.dumps(geometric(-0.1)), "--p", 2]),
    ]:
        out = tmp_path / f"{mode}.json"
        res = cli("density-curve", "--mode", mode, *extra, "--out", out)
        assert res.returncode == 0, res.stderr
        jsonschema.validate(json.loads(out.read_text()), schemas["density-curve"])


def test_stdout_when_no_out(cli):
    res = cli("couple", "--gauge", G, "--p", 2)
    assert res.returncode == 0
    assert json.loads(res.stdout)["q_D"] == 1


def test_csv_uses_seventeen_digits(cli, tmp_path):
    out = tmp_path / "b.json"
    assert cli("build-set", "--gauge", G, "--depth", 6, "--out", out).returncode == 0
    lines = (tmp_path / "b.csv").read_text().splitlines()
    assert lines[0] == "j,count,h_j,ratio"
    h1 = lines[2].split(",")[2]
    assert float(h1) == 2 ** -(CANTOR["d"])
    assert h1 == "%.17g" % float(h1)


def test_spec_from_file_and_xi_csv(cli, tmp_path):
    (tmp_path / "xi.csv").write_text("s,xi\n1,0.6\n1e-20,0.6\n")
    (tmp_path / "g.json").write_text(json.dumps({"family": "xi_integral", "csv": "xi.csv", "n": 1}))
    (tmp_path / "s.json").write_text(S)
    res = cli("analyze", "--gauge", tmp_path / "g.json", "--sigma", tmp_path / "s.json", "--p", 2, "--q", 2)
    assert res.returncode == 0, res.stderr
    assert json.loads(res.stdout)["outcome"] == "TraceExists"


def test_usage_errors_exit_2(cli, tmp_path):
    assert cli("analyze", "--gauge", G, "--sigma", S, "--p", 2).returncode == 2
    assert cli("frobnicate").returncode == 2
    assert cli("analyze", "--gauge", G, "--sigma", S, "--p", "nan", "--q", 2).returncode == 2
    bad = tmp_path / "bad.json"
    bad.write_text('{"family": "power_log",\n "s": }')
    res = cli("indices", "--sigma", bad)
    assert res.returncode == 2
    assert "bad.json:2:" in res.stderr


def test_hypothesis_rejected_exit_3(cli):
    assert cli("couple", "--gauge", G, "--p", 0.5).returncode == 3
    res = cli("density-curve", "--mode", "harmonic", "--gauge", G, "--sigma", S0, "--p", 1, "--q", 1)
    assert res.returncode == 3


def test_infeasible_exit_4(cli):
    gauge = json.dumps({"family": "power_log", "d": 2.0, "b": 0.0, "n": 1})
    assert cli("build-set", "--gauge", gauge).returncode == 4
    assert cli("cover", "--gauge", G, "--depth", 8, "--level", 8).returncode == 4


def test_failed_check_exit_3_still_writes(cli, tmp_path, schemas):
    out = tmp_path / "a.json"
    res = cli("atom-check", "--sigma", S, "--p", 2, "--kind", "constant", "--L", 0, "--out", out)
    assert res.returncode == 3
    jsonschema.validate(json.loads(out.read_text()), schemas["atom-check"])
    manifest = json.loads((tmp_path / "a.json.manifest.json").read_text())
    assert manifest["exit_code"] == 3


def test_replay_detects_tampering(cli, tmp_path):
    out = tmp_path / "c.json"
    assert cli("couple", "--gauge", G, "--p", 2, "--out", out).returncode == 0
    manifest_path = tmp_path / "c.json.manifest.json"
    manifest = json.loads(manifest_path.read_text())
    manifest["outputs"][0]["sha256"] = "0" * 64
    manifest_path.write_text(json.dumps(manifest))
    res = cli("replay", manifest_path)
    assert res.returncode == 1
    assert "DIFFERS" in res.stdout


def test_global_knobs_recorded(cli, tmp_path):
    out = tmp_path / "v.json"
    res = cli("--seed", 17, "--band", 16, "verify-measure", "--gauge", G, "--depth", 10, "--samples", 20, "--out", out)
    assert res.returncode == 0, res.stderr
    args = json.loads((tmp_path / "v.json.manifest.json").read_text())["args"]
    assert args["seed"] == 17
    assert args["band"] == 16
