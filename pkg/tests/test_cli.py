import csv
import json

import numpy as np
import pytest

from besselwave import __version__
from besselwave.cli import COMMANDS, SCHEMA, main
from besselwave.grid import build_grid, read_radial_csv, write_radial_csv
from besselwave.grid import TestFunction as Family


def rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_every_subcommand_has_a_schema():
    assert set(COMMANDS) == set(SCHEMA)
    assert {"specfun-check", "transform", "hankel-check", "propagate", "kernel-check", "dispersive",
            "strichartz", "restriction", "nls", "compare-models", "suite"} == set(COMMANDS)


def test_specfun_check_passes_and_formats(tmp_path):
    out = tmp_path / "o"
    assert main(["specfun-check", "--assert", "--out", str(out)]) == 0
    data = (out / "specfun.csv").read_bytes()
    assert b"\r" not in data
    table = rows(out / "specfun.csv")
    assert list(table[0]) == ["check", "nu", "z", "residual", "bound", "pass"]
    assert all(r["pass"] == "1" for r in table)
    # 17 significant digits round-trip exactly
    v = table[0]["residual"]
    assert "%.17g" % float(v) == v
    man = json.loads((out / "manifest.json").read_text())
    assert man["version"] == __version__ and man["checks"]["failed"] == 0
    assert man["config"]["seed"] == 0


def test_runs_are_byte_identical(tmp_path):
    args = ["compare-models", "--which", "inverse-square", "--a", "0.5", "--seed", "7"]
    assert main(args + ["--out", str(tmp_path / "a")]) == 0
    assert main(args + ["--out", str(tmp_path / "b")]) == 0
    for name in ("compare_models.csv", "manifest.json"):
        a = (tmp_path / "a" / name).read_bytes()
        b = (tmp_path / "b" / name).read_bytes()
        if name == "manifest.json":
            a, b = (json.loads(x) for x in (a, b))
            a["config"].pop("out", None)
            b["config"].pop("out", None)
        assert a == b


def test_dispersive_slope_row(tmp_path):
    out = tmp_path / "d"
    assert main(["dispersive", "--a", "0", "--family", "gaussian", "--assert", "--out", str(out)]) == 0
    slopes = [r for r in rows(out / "dispersive.csv") if r["quantity"] == "slope" and r["r"] == "inf"]
    assert float(slopes[0]["value"]) == pytest.approx(-0.5, rel=0.03)


def test_assert_reports_failure(tmp_path):
    # Two short times never see the asymptotic decay rate.
    args = ["dispersive", "--a", "0", "--t-min", "0.001", "--t-max", "0.01", "--n-t", "3", "--r", "4", "--assert"]
    assert main(args + ["--out", str(tmp_path / "f")]) == 1
    assert main(args[:-1] + ["--out", str(tmp_path / "g")]) == 0


@pytest.mark.parametrize(
    "argv,field",
    [
        (["propagate", "--a", "-1.5"], "'a'"),
        (["propagate", "--panels", "zero"], "'panels'"),
        (["dispersive", "--t-min", "5", "--t-max", "1"], "'t_max'"),
        (["dispersive", "--a", "-0.5", "--r", "1.5"], "'r'"),
        (["compare-models", "--which", "hydrogen"], "'which'"),
        (["suite", "--only", "nonsense"], "'only'"),
        (["nls", "--p", "9"], "'p'"),
    ],
)
def test_config_errors_name_the_field(tmp_path, capsys, argv, field):
    assert main(argv + ["--out", str(tmp_path)]) == 2
    assert field in capsys.readouterr().err


def test_config_files_and_override(tmp_path):
    ini = tmp_path / "run.ini"
    ini.write_text("a = 1\nt = 0.5, 1.5\nx_max = 24\npanels = 30\n")
    out = tmp_path / "p"
    assert main(["propagate", "--config", str(ini), "--panels", "20", "--out", str(out)]) == 0
    man = json.loads((out / "manifest.json").read_text())
    assert man["config"]["a"] == 1.0 and man["config"]["panels"] == 20
    assert man["config"]["t"] == [0.5, 1.5]
    assert all(d < 1e-9 for d in man["summary"]["norm_defect"].values())

    js = tmp_path / "run.json"
    js.write_text(json.dumps({"which": "kimura", "a": 2.5}))
    assert main(["compare-models", "--config", str(js), "--assert", "--out", str(tmp_path / "k")]) == 0

    bad = tmp_path / "bad.ini"
    bad.write_text("[besselwave]\nbogus = 1\n")
    assert main(["propagate", "--config", str(bad), "--out", str(tmp_path / "x")]) == 2


def test_worker_cap(tmp_path, monkeypatch):
    monkeypatch.setenv("BESSELWAVE_THREADS", "1")
    out = tmp_path / "s"
    assert main(["suite", "--only", "specfun,mass", "--workers", "4", "--assert", "--out", str(out)]) == 0
    man = json.loads((out / "manifest.json").read_text())
    assert man["config"]["workers"] == 1
    assert set(man["summary"]) == {"specfun", "mass"}
    monkeypatch.setenv("BESSELWAVE_THREADS", "many")
    assert main(["suite", "--only", "specfun", "--out", str(out)]) == 2


def test_parallel_suite_matches_serial(tmp_path):
    for n, d in ((1, "serial"), (2, "parallel")):
        assert main(["suite", "--only", "specfun,mass", "--workers", str(n), "--out", str(tmp_path / d)]) == 0
    assert (tmp_path / "serial" / "suite.csv").read_bytes() == (tmp_path / "parallel" / "suite.csv").read_bytes()


def test_transform_from_csv(tmp_path):
    g = build_grid(1.0, 12.0, 20, 16)
    write_radial_csv(Family.gaussian(1.0).on(g), tmp_path / "in.csv")
    out = tmp_path / "t"
    assert main(["transform", "--a", "1", "--input", str(tmp_path / "in.csv"), "--out", str(out)]) == 0
    hat = read_radial_csv(out / "transform.csv")
    assert np.max(np.abs(hat.values - Family.gaussian(1.0).on(g).values)) < 1e-10
    man = json.loads((out / "manifest.json").read_text())
    assert man["summary"]["plancherel_defect"] < 1e-10


def test_nls_report(tmp_path):
    out = tmp_path / "n"
    assert main(["nls", "--T", "0.5", "--dump-solution", "true", "--assert", "--out", str(out)]) == 0
    rep = json.loads((out / "report.json").read_text())
    assert rep["converged"] and rep["regime"] == "critical"
    assert set(rep) >= {"iterations", "contraction_factors", "mass_trace", "pair_norms"}
    assert (out / "solution.csv").exists()
    out2 = tmp_path / "n2"
    assert main(["nls", "--mu-re", "1", "--mu-im", "0", "--method", "stepper", "--T", "0.2", "--out", str(out2)]) == 0
    man = json.loads((out2 / "manifest.json").read_text())
    assert man["checks"]["total"] == 0 and "mass_drift" in man["summary"]
