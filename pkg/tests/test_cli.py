from __future__ import annotations

import json
import logging

import pytest

from lindborel.cli import main
from lindborel.fourier_algebra import NotHyperbolic
from lindborel.io import RunConfig, SchemaError, bundled_system_path, csv_text, fmt, load_system


def _system_file(tmp_path, **changes):
    data = json.loads(bundled_system_path().read_text())
    data.update(changes)
    path = tmp_path / "system.json"
    path.write_text(json.dumps(data))
    return str(path)


def test_bundled_system():
    sys = load_system()
    assert sys.name == "golden_pendulum"
    assert sys.s == 1 and sys.M0[0, 0] == pytest.approx(1.0)
    assert sys.f.is_real()


def test_hyperbolicity_checked(tmp_path):
    with pytest.raises(NotHyperbolic):
        load_system(_system_file(tmp_path, beta0=[3.141592653589793]))


def test_schema_errors(tmp_path):
    with pytest.raises(SchemaError):
        load_system(_system_file(tmp_path, schema="other/1"))
    with pytest.raises(SchemaError):
        load_system(_system_file(tmp_path, omega=[[1, 0, 1, 1]]))
    with pytest.raises(SchemaError):
        load_system(_system_file(tmp_path, beta0=[0.0, 0.0]))
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(SchemaError):
        load_system(bad)


def test_unclosed_perturbation_warns(tmp_path, caplog):
    f = [{"nu": [0, 0], "mu": [1], "re": 1.0, "im": 0.0}, {"nu": [1, 0], "mu": [0], "re": 0.5, "im": 0.0}]
    with caplog.at_level(logging.WARNING):
        sys = load_system(_system_file(tmp_path, f=f))
    assert sys.f.is_real()
    assert "symmetrized" in caplog.text


def test_config_caps():
    with pytest.raises(SchemaError):
        RunConfig(K=9).validate()
    with pytest.raises(SchemaError):
        RunConfig(scheme="C").validate()
    assert RunConfig().validate().K == 4


def test_writers():
    assert fmt(0.1) == "0.10000000000000001"
    assert csv_text(["a", "b"], [(1, 0.5)]) == "a,b\r\n1,0.5\r\n"


def test_series_outputs(tmp_path):
    out = tmp_path / "series"
    assert main(["series", "--K", "2", "--out", str(out)]) == 0
    assert {p.name for p in out.iterdir()} == {"coefficients.csv", "summary.json", "manifest.json"}
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["command"] == "series"
    assert set(manifest["outputs"]) == {"coefficients.csv", "summary.json"}


def test_exit_codes(tmp_path):
    assert main(["series", "--K", "9", "--out", str(tmp_path / "a")]) == 2
    assert main(["series", "--system", _system_file(tmp_path, beta0=[3.141592653589793]),
                 "--out", str(tmp_path / "b")]) == 2
    assert main(["trees", "--mode", "resummed", "--gammas", "1/2", "--out", str(tmp_path / "c")]) == 4
    sparse = tmp_path / "coef.csv"
    sparse.write_text("k,re,im\n1,1.0,0.0\n2,0.5,0.0\n")
    assert main(["borel", "--input", str(sparse), "--out", str(tmp_path / "d")]) == 3
    with pytest.raises(SystemExit) as exc:
        main(["no-such-command"])
    assert exc.value.code == 2


def test_trees_dump(tmp_path):
    out = tmp_path / "t"
    assert main(["trees", "--order", "2", "--root-nu", "1,0", "--root-gamma", "0", "--dump-trees",
                 "--out", str(out)]) == 0
    trees = json.loads((out / "trees.json").read_text())
    assert trees and all(t["root_gamma"] == 0 for t in trees)
    summary = json.loads((out / "summary.json").read_text())
    assert max(summary["max_relative_difference"]) < 1e-12
