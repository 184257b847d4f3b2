import json

import pytest

from banachrig import cli, suite
from banachrig.errors import ConfigError

QUICK = {
    "space": {"dim": 3, "p": 3},
    "seed_kind": "random",
    "rng_seed": 11,
    "suite": [
        "example31", "holder", "duality_map", "build",
        {"check": "embedding", "samples": 300, "Ns": [2, 3]},
        {"check": "lax", "operators": 3, "Ns": [2, 3], "ps": [1.5, "inf"]},
        {"check": "t12", "pairs": 50, "Ns": [2, 3], "sequence": "orthonormal"},
        {"check": "auerbach", "Ns": [1, 2, 3]},
        {"check": "thm31", "systems": 3},
        {"check": "adjoint", "n": 16, "operators": 2, "samples": 10, "duality": "h2"},
        {"check": "embedding_chain", "n": 16, "ns": [8, 16], "samples": 100},
    ],
}


@pytest.fixture
def cfg_path(tmp_path):
    p = tmp_path / "cfg.json"
    p.write_text(json.dumps(QUICK))
    return p


# configuration -------------------------------------------------------------

def test_empty_suite():
    assert suite.run_suite(suite.parse_config({"suite": []})) == []


@pytest.mark.parametrize("raw,path", [
    ({"space": {"dim": 0}}, "space"),
    ({"space": {"dim": 2, "p": 0.5}}, "space"),
    ({"seed_kind": "other"}, "seed_kind"),
    ({"suite": ["nope"]}, "suite[0].check"),
    ({"rng_seed": 1, "suite": [{"check": "lax", "operators": -1}]}, "suite[0].operators"),
    ({"rng_seed": 1, "suite": [{"check": "lax", "bogus": 1}]}, "suite[0].bogus"),
    ({"suite": ["lax"]}, "rng_seed"),
    ({"rng_seed": -1}, "rng_seed"),
    ({"colour": 1}, "$.colour"),
])
def test_config_errors_name_field(raw, path):
    with pytest.raises(ConfigError) as exc:
        suite.parse_config(raw)
    assert exc.value.path == path


def test_suite_plane_example():
    reps = suite.run_suite(suite.parse_config({"suite": ["example31"]}))
    assert len(reps) == 1 and reps[0].passed
    assert reps[0].measured["product_1"] == pytest.approx(2 ** 0.5, abs=1e-12)


def test_quick_suite_passes():
    reps = suite.run_suite(suite.parse_config(QUICK))
    assert [r.check for r in reps][:4] == ["example31", "holder", "duality_map", "build"]
    assert all(r.passed for r in reps), [r.summary() for r in reps if not r.passed]


def test_order_and_determinism_with_threads(monkeypatch):
    cfg = suite.parse_config(QUICK)
    a = cli.emit(suite.run_suite(cfg, threads=1), "json", config_digest=cfg.digest)
    b = cli.emit(suite.run_suite(cfg, threads=4), "json", config_digest=cfg.digest)
    monkeypatch.setenv("RIG_THREADS", "3")
    c = cli.emit(suite.run_suite(cfg), "json", config_digest=cfg.digest)
    assert a == b == c


def test_seed_changes_output():
    entry = [{"check": "embedding", "samples": 100, "Ns": [3]}]
    a = cli.emit(suite.run_suite(suite.parse_config({**QUICK, "suite": entry})), "json")
    b = cli.emit(suite.run_suite(suite.parse_config({**QUICK, "rng_seed": 12, "suite": entry})), "json")
    assert a != b


# command line -------------------------------------------------------------

def test_cli_plane_example_csv(capsys):
    assert cli.main(["example31", "--format", "csv"]) == 0
    assert "example31,product_1,1.4142135623730951," in capsys.readouterr().out


def test_cli_verify_deterministic(cfg_path, tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert cli.main(["verify", str(cfg_path), "--out", str(a)]) == 0
    assert cli.main(["verify", str(cfg_path), "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert json.loads(a.read_text())["config_digest"]


def test_cli_seed_flag_overrides_file(cfg_path, tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    cli.main(["verify", str(cfg_path), "--out", str(a)])
    cli.main(["verify", str(cfg_path), "--seed", "99", "--out", str(b)])
    assert json.loads(a.read_text())["config_digest"] != json.loads(b.read_text())["config_digest"]


def test_cli_failure_exit_code(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"rng_seed": 1, "space": {"dim": 3, "p": 2},
                               "suite": [{"check": "t12", "Ns": [3], "pairs": 20, "kinds": ["standard"],
                                          "sequence": "literal", "ps": [2]}]}))
    assert cli.main(["verify", str(cfg), "--out", str(tmp_path / "o.json")]) == 1
    rep = json.loads((tmp_path / "o.json").read_text())["reports"][0]
    assert not rep["passed"] and rep["witnesses"]


def test_cli_config_errors(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"space": {"dim": 0}}')
    assert cli.main(["verify", str(bad)]) == 2
    bad.write_text("{not json")
    assert cli.main(["verify", str(bad)]) == 2
    assert cli.main(["verify", str(tmp_path / "absent.json")]) == 2
    assert "absent.json" in capsys.readouterr().err


def test_cli_unwritable_out(capsys, tmp_path):
    assert cli.main(["example31", "--out", str(tmp_path / "no" / "x.json")]) == 2
    assert "no" in capsys.readouterr().err


def test_cli_usage_error():
    assert cli.main(["frobnicate"]) == 2


def test_cli_auerbach_emits_system(cfg_path, capsys):
    assert cli.main(["auerbach", str(cfg_path)]) == 0
    d = json.loads(capsys.readouterr().out)
    system = d["reports"][0]["details"]["system"]
    assert len(system["xs"]) == 3 and len(system["fs"]) == 3


def test_cli_mbasis_and_build(cfg_path, tmp_path):
    assert cli.main(["mbasis", str(cfg_path), "--out", str(tmp_path / "m.json")]) == 0
    assert cli.main(["build", str(cfg_path), "--out", str(tmp_path / "b.json")]) == 0


def test_cli_adjoint_matrix(tmp_path, capsys):
    m = tmp_path / "m.csv"
    m.write_text("n\n3\n" + "\n".join(",".join(str(float(i == j)) for j in range(3)) for i in range(3)))
    assert cli.main(["adjoint", "--n", "3", "--p", "3", "--matrix", str(m), "--samples", "10"]) == 0
    checks = [r["check"] for r in json.loads(capsys.readouterr().out)["reports"]]
    assert checks == ["laplacian_spectrum", "remark21_lp", "remark21_h2", "double_adjoint"]


def test_cli_adjoint_matrix_size_mismatch(tmp_path):
    m = tmp_path / "m.csv"
    m.write_text("2,1,0,0,1")
    assert cli.main(["adjoint", "--n", "3", "--matrix", str(m)]) == 2


def test_cli_sweep_tables(cfg_path, capsys):
    assert cli.main(["sweep", str(cfg_path), "--over", "N", "--range", "2:4",
                     "--sequence", "orthonormal"]) == 0
    err = capsys.readouterr().err
    assert "cond_G2" in err and "trace_T12" in err
    assert cli.main(["sweep", str(cfg_path), "--over", "n", "--range", "8,16"]) == 0
    assert "H01->H-1" in capsys.readouterr().err
