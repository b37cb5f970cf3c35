import json
import subprocess
import sys

import pytest

from ddiblrm import cli, properties
from ddiblrm.io import data_path, read_flags, read_surface

B_CONFIG = """\
model:
  variant: none
  drugs:
    - {name: B, ref_dose: 200}
sampler: {seed: 3}
grid:
  B: [50, 100, 200, 300, 400, 600]
"""

B_DATA = """\
dose_B,n_patients,n_dlt,label
50,5,0,historical-drug-2
100,5,0,historical-drug-2
200,5,1,historical-drug-2
300,5,1,historical-drug-2
400,5,1,historical-drug-2
600,5,3,historical-drug-2
"""

FAST = "sampler: {chains: 2, warmup_iters: 150, sampling_iters: 100, seed: 4}\n"


@pytest.fixture
def files(tmp_path):
    (tmp_path / "b.yaml").write_text(B_CONFIG)
    (tmp_path / "b.csv").write_text(B_DATA)
    return tmp_path


def test_fit_writes_converged_diagnostics(files, capsys):
    out = files / "fit"
    code = cli.main(["fit", "--config", str(files / "b.yaml"), "--data", str(files / "b.csv"), "--out", str(out)])
    assert code == 0
    diag = json.loads((out / "diagnostics.json").read_text())
    assert diag["converged"]
    assert all(r <= 1.01 for r in diag["rhat"].values())
    assert (out / "summary.csv").read_text().startswith("param,mean,sd,q025,q50,q975,rhat,ess\n")


def test_evaluate_grid_outputs(files):
    out = files / "grid"
    code = cli.main(["evaluate-grid", "--config", str(files / "b.yaml"), "--data", str(files / "b.csv"),
                     "--out", str(out), "--seed", "9"])
    assert code == 0
    names, rows = read_surface(out / "surface.csv")
    assert names == ["B"] and [r.doses for r in rows] == [(d,) for d in (50.0, 100.0, 200.0, 300.0, 400.0, 600.0)]
    assert (out / "marginal_B.csv").read_text() == (out / "surface.csv").read_text()
    assert json.loads((out / "diagnostics.json").read_text())["sampler"]["seed"] == 9


def test_unconverged_exit_code(files, capsys):
    (files / "short.yaml").write_text(B_CONFIG.replace("sampler: {seed: 3}", "sampler: {chains: 2, warmup_iters: 3, sampling_iters: 5}"))
    args = ["evaluate-grid", "--config", str(files / "short.yaml"), "--data", str(files / "b.csv")]
    assert cli.main(args + ["--out", str(files / "o1")]) == 2
    err = capsys.readouterr().err
    assert err.startswith("error[unconverged]:")
    assert not (files / "o1" / "surface.csv").exists()
    assert cli.main(args + ["--out", str(files / "o2"), "--force-unconverged"]) == 0
    assert (files / "o2" / "surface.csv").exists()


@pytest.mark.parametrize("config, data, prefix", [
    (B_CONFIG.replace("ref_dose: 200", "ref_dose: 0"), B_DATA, "error[invalid-input]: model.drugs[0].ref_dose (line 4)"),
    (B_CONFIG, B_DATA.replace("600,5,3", "600,5,7"), "error[invalid-input]: row 6:"),
    (B_CONFIG, B_DATA.replace("dose_B", "dose_Z"), "error[invalid-input]: unknown drug column"),
])
def test_validation_errors(files, capsys, config, data, prefix):
    (files / "c.yaml").write_text(config)
    (files / "d.csv").write_text(data)
    code = cli.main(["fit", "--config", str(files / "c.yaml"), "--data", str(files / "d.csv"), "--out", str(files / "o")])
    assert code == 1
    assert capsys.readouterr().err.startswith(prefix)


def test_missing_file_and_usage(files, capsys):
    assert cli.main(["fit", "--config", str(files / "nope.yaml"), "--data", "x", "--out", str(files)]) == 1
    assert capsys.readouterr().err.startswith("error[io]:")
    with pytest.raises(SystemExit) as exc:
        cli.main(["fit", "--config", "x"])
    assert exc.value.code == 1
    with pytest.raises(SystemExit) as exc:
        cli.main(["scenario", "--out", "x", "--seed", "-1"])
    assert exc.value.code == 1
    assert cli.main(["scenario", "--out", str(files / "s"), "--scenario", "7/5@200"]) == 1


def test_check_properties(tmp_path, capsys, monkeypatch):
    assert cli.main(["check-properties", "--assert-paper", "--out", str(tmp_path)]) == 0
    assert "Saturating" in capsys.readouterr().out
    lines = (tmp_path / "properties.csv").read_text().splitlines()
    assert len(lines) == 1 + 24 and lines[0] == "property,variant,passed,tolerance"
    witnesses = json.loads((tmp_path / "witnesses.json").read_text())
    assert all(w["witness"] is not None for w in witnesses if not w["passed"])

    flipped = {p: dict(row) for p, row in properties.EXPECTED_MATRIX.items()}
    flipped[properties.Property.ASYMPTOTIC_TOXICITY][properties.Variant.LINEAR] = True
    monkeypatch.setattr(properties, "EXPECTED_MATRIX", flipped)
    monkeypatch.setattr(cli, "EXPECTED_MATRIX", flipped)
    assert cli.main(["check-properties", "--assert-paper"]) == 3
    assert "error[property-mismatch]: AsymptoticToxicity/linear" in capsys.readouterr().err


def test_scenario_tree_layout(tmp_path):
    cfg = tmp_path / "fast.yaml"
    cfg.write_text("model:\n  variant: none\n  drugs: [{name: A, ref_dose: 200}]\n" + FAST)
    out = tmp_path / "out"
    code = cli.main(["scenario", "--scenario", "5/5@100", "--config", str(cfg), "--out", str(out),
                     "--force-unconverged"])
    assert code == 0
    flags = read_flags(out / "flags.csv")
    assert [f["setting"] for f in flags] == ["none", "thall_narrow", "thall_wide", "linear_0.5", "linear_1.5",
                                             "saturating_0.5", "saturating_1.5"]
    assert all(f["scenario"] == "5/5@100" for f in flags)
    assert all(isinstance(f["ewoc_at_combo"], bool) for f in flags)
    d = out / "5of5_at_100" / "saturating_1.5"
    assert sorted(p.name for p in d.iterdir()) == [
        "diagnostics.json", "marginal_A.csv", "marginal_B.csv", "summary.csv", "surface.csv"]
    names, rows = read_surface(d / "surface.csv")
    assert names == ["A", "B"] and len(rows) == 100


def test_module_entry_point(tmp_path):
    res = subprocess.run([sys.executable, "-m", "ddiblrm", "check-properties"], capture_output=True, text=True)
    assert res.returncode == 0
    assert "pi -> 1 as d -> infinity" in res.stdout
