import json

import pytest

from indexbound import cli


CONFIG = """\
[scenario]
id = torus-small
seed = 7

[ambient]
kind = sphere
dim = 3

[hypersurface]
kind = clifford_torus
nodes = 32

[certificate]
eta = 0.0
eigenvalues = 16

[tolerances]
identity = 1e-3
"""


@pytest.fixture(scope="module")
def config_path(tmp_path_factory):
    p = tmp_path_factory.mktemp("cfg") / "torus.cfg"
    p.write_text(CONFIG)
    return p


@pytest.fixture(scope="module")
def run_all(config_path, tmp_path_factory):
    out = tmp_path_factory.mktemp("out")
    code = cli.main(
        ["all", "--config", str(config_path), "--out", str(out)]
    )
    return code, out


def test_exit_code(run_all):
    assert run_all[0] == 0


def test_json_report_fields(run_all):
    _, out = run_all
    report = json.loads((out / "torus-small.json").read_text())
    for key in ("scenario", "ambient", "hypersurface", "resolution",
                "residuals", "spectrum", "certificate", "margins",
                "bounds"):
        assert key in report, key
    assert report["scenario"] == "torus-small"
    spec = report["spectrum"]
    assert spec["index"] == 5
    assert len(spec["eigenvalues"]) == 16
    cert = report["certificate"]
    for key in ("eta", "q", "d", "required", "actual", "margin", "verdict"):
        assert key in cert, key
    assert cert["verdict"] == "pass"


def test_summary_csv(run_all):
    _, out = run_all
    lines = (out / "summary.csv").read_text().strip().splitlines()
    assert len(lines) == 2
    header = lines[0].split(",")
    assert "scenario" in header
    assert lines[1].split(",")[header.index("scenario")] == "torus-small"


def test_spectrum_csv(run_all):
    _, out = run_all
    lines = (out / "torus-small-spectrum.csv").read_text().strip().splitlines()
    assert lines[0] == "index,eigenvalue,residual,cluster id"
    assert len(lines) == 17


def test_mesh_dump_written(run_all):
    _, out = run_all
    dump = out / "torus-small-mesh.txt"
    assert dump.exists()
    assert any(
        l.startswith("node ") for l in dump.read_text().splitlines()
    )


def test_deterministic_reruns(config_path, tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        code = cli.main(
            ["spectrum", "--config", str(config_path), "--out", str(out)]
        )
        assert code == 0
    ja = (a / "torus-small.json").read_bytes()
    jb = (b / "torus-small.json").read_bytes()
    assert ja == jb


def test_resolution_scale(config_path, tmp_path):
    code = cli.main(
        ["spectrum", "--config", str(config_path), "--out", str(tmp_path),
         "--resolution-scale", "0.75"]
    )
    assert code == 0
    report = json.loads((tmp_path / "torus-small.json").read_text())
    assert report["resolution"] == [24, 24]


def test_single_subcommands(config_path, tmp_path):
    for task in ("identities", "verify-identity", "margins", "bounds"):
        code = cli.main(
            [task, "--config", str(config_path), "--out", str(tmp_path)]
        )
        assert code == 0, task


def test_missing_config_is_usage_error(tmp_path):
    code = cli.main(
        ["all", "--config", str(tmp_path / "missing.cfg"),
         "--out", str(tmp_path)]
    )
    assert code == 2


def test_bad_config_is_usage_error(tmp_path):
    bad = tmp_path / "bad.cfg"
    bad.write_text("[scenario]\nid = x\n[ambient]\nkind = nonsense\n")
    code = cli.main(
        ["identities", "--config", str(bad), "--out", str(tmp_path)]
    )
    assert code == 2


def test_bundled_configs_load():
    for name in ("clifford.cfg", "cp2-borderline.cfg"):
        path = cli.bundled_config(name)
        scenario = cli.Scenario(path)
        assert scenario.id
