import csv
import json
import subprocess
import sys

import pytest

from kpzlab import cli


def test_limit_cdf_defaults_and_rows(tmp_path):
    cfg = cli.parse_config(["--scenario", "limit-cdf", "--s-min", "-5", "--s-max", "2", "--out", str(tmp_path)])
    assert cfg["nodes"] == 40 and cfg["cutoff"] == 10.0 and cfg["tau"] == 0.0
    assert cli.run(cfg, echo=lambda s: None) == cli.EXIT_OK
    with open(tmp_path / "airy2-cdf.csv", newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["s", "value", "convergence_estimate"]
    assert len(rows) == 1 + 71
    assert float(rows[1][0]) == -5.0 and float(rows[-1][0]) == 2.0
    vals = [float(r[1]) for r in rows[1:]]
    assert vals == sorted(vals)


def test_out_of_range_rejected(capsys):
    assert cli.main(["--scenario", "simulate-lpp", "--eta", "1.5", "--T", "100"]) == cli.EXIT_USAGE
    err = capsys.readouterr().err
    assert "eta" in err and "1.5" in err


def test_unknown_key_rejected(tmp_path):
    p = tmp_path / "c.json"
    p.write_text(json.dumps({"scenario": "limit-cdf", "nodez": 40}))
    with pytest.raises(cli.ConfigError, match="nodez"):
        cli.parse_config(["--config", str(p)])


def test_flags_override_file(tmp_path):
    p = tmp_path / "c.json"
    p.write_text(json.dumps({"scenario": "limit-cdf", "nodes": 30, "seed": 4}))
    cfg = cli.parse_config(["--config", str(p), "--nodes", "50"])
    assert cfg["nodes"] == 50 and cfg["seed"] == 4


def test_threads_env_default(monkeypatch):
    monkeypatch.setenv("KPZLAB_THREADS", "3")
    assert cli.parse_config(["--scenario", "verify"])["threads"] == 3
    assert cli.parse_config(["--scenario", "verify", "--threads", "2"])["threads"] == 2


def test_bad_json_and_missing_file(tmp_path):
    p = tmp_path / "c.json"
    p.write_text("{not json")
    assert cli.main(["--config", str(p)]) == cli.EXIT_USAGE
    assert cli.main(["--config", str(tmp_path / "absent.json")]) == cli.EXIT_IO


def test_resource_guard_exit(tmp_path):
    argv = ["--scenario", "simulate-lpp", "--eta", "0.9", "--T", "4000", "--samples", "100000"]
    argv += ["--cell-budget", "1e6", "--out", str(tmp_path)]
    assert cli.main(argv) == cli.EXIT_GUARD
    assert not (tmp_path / "simulate-lpp.json").exists()


def test_verify_coupling(tmp_path):
    assert cli.main(["--scenario", "verify", "--criteria", "C1", "--out", str(tmp_path)]) == cli.EXIT_OK
    doc = json.loads((tmp_path / "verify.json").read_text())
    assert doc["verdicts"] and all(doc["verdicts"].values())


def test_verify_unknown_criterion(tmp_path):
    assert cli.main(["--scenario", "verify", "--criteria", "C99", "--out", str(tmp_path)]) == cli.EXIT_USAGE


def test_verify_default_is_full_registry(monkeypatch, tmp_path):
    from kpzlab import acceptance as A

    seen = []

    def fake(names, ctx, echo=print):
        seen.extend(names)
        return [A.Outcome(n, "stub", True, "") for n in names]

    monkeypatch.setattr(A, "run", fake)
    assert cli.main(["--scenario", "verify", "--out", str(tmp_path)]) == cli.EXIT_OK
    assert seen == list(A.REGISTRY)


def test_verify_failure_exit(monkeypatch, tmp_path):
    from kpzlab import acceptance as A

    monkeypatch.setattr(A, "run", lambda names, ctx, echo=print: [A.Outcome("C1", "stub", False, "")])
    assert cli.main(["--scenario", "verify", "--out", str(tmp_path)]) == cli.EXIT_FAIL


def _strip_meta(path):
    doc = json.loads(path.read_text())
    doc.pop("metadata")
    return doc


def test_simulate_lpp_idempotent(tmp_path):
    argv = ["--scenario", "simulate-lpp", "--eta", "0.9", "--T", "200", "--samples", "50"]
    argv += ["--points", "[[0, 0], [0.5, 0]]", "--seed", "3", "--out", str(tmp_path)]
    runs = []
    for _ in range(2):
        assert cli.main(argv) == cli.EXIT_OK
        runs.append(((tmp_path / "simulate-lpp-samples.csv").read_bytes(), _strip_meta(tmp_path / "simulate-lpp.json")))
    assert runs[0] == runs[1]


def test_simulate_tasep_outputs(tmp_path):
    argv = ["--scenario", "simulate-tasep", "--rho-minus", "1", "--rho-plus", "0", "--t-max", "5"]
    argv += ["--sites", "-2", "0", "2", "--samples", "20", "--out", str(tmp_path)]
    assert cli.main(argv) == cli.EXIT_OK
    doc = json.loads((tmp_path / "simulate-tasep.json").read_text())
    assert [p["params"]["j"] for p in doc["per_point"]] == [-2, 0, 2]
    assert (tmp_path / "simulate-tasep-profile.csv").read_text().startswith("t,j,h\n")


def test_tasep_density_constraint(capsys):
    argv = ["--scenario", "simulate-tasep", "--rho-minus", "1", "--rho-plus", "0.5", "--t-max", "5"]
    assert cli.main(argv) == cli.EXIT_USAGE


def test_schur_cdf(tmp_path):
    argv = ["--scenario", "schur-cdf", "--eta", "0.5", "--N", "1", "--n", "1", "--S", "2", "--out", str(tmp_path)]
    assert cli.main(argv) == cli.EXIT_OK
    rows = list(csv.reader(open(tmp_path / "schur-cdf.csv", newline="")))
    assert rows[0] == ["S0", "value", "convergence_estimate"]
    assert float(rows[1][1]) == pytest.approx(1 - (0.5 * 2.718281828459045**-2 - 2.718281828459045**-1) / -0.5, abs=1e-6)


def test_unwritable_output(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("")
    argv = ["--scenario", "limit-cdf", "--s-min", "0", "--s-max", "0", "--out", str(blocker / "sub")]
    assert cli.main(argv) == cli.EXIT_IO


def test_module_entry_point_help():
    r = subprocess.run([sys.executable, "-m", "kpzlab", "--help"], capture_output=True, text=True)
    assert r.returncode == 0 and "--scenario" in r.stdout
