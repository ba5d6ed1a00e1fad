import json

import numpy as np
import pytest

from convexcusp import cli, cusplie, projlin as pl
from convexcusp.cusplie import LieAlgElem, group_exp


def run(argv):
    return cli.main(argv)


def test_parse_numbers():
    from fractions import Fraction

    assert cli.parse_number("1/2") == Fraction(1, 2)
    assert cli.parse_number("3") == 3
    assert cli.parse_number("0.25") == 0.25


def test_fig8_verify(tmp_path, capsys):
    assert run(["fig8", "verify", "--t", "1/2", "--out", str(tmp_path)]) == 0
    report = json.load(open(tmp_path / "fig8_verify.json"))
    assert report["relation_exact"] is True and report["obstruction"] is False
    manifest = json.load(open(tmp_path / "manifest.json"))
    assert manifest["command"] == "fig8 verify"
    assert "fig8_verify.json" in manifest["outputs"]


def test_fig8_verify_quarter(tmp_path):
    assert run(["fig8", "verify", "--t", "1/4", "--out", str(tmp_path)]) == 0
    report = json.load(open(tmp_path / "fig8_verify.json"))
    assert report["longitude_spectrum"] == [[0.5, 3], [8.0, 1]]
    assert report["obstruction"] is True


def test_fig8_sweep(tmp_path):
    assert run(["fig8", "sweep", "--t-min", "0.3", "--t-max", "0.7", "--steps", "5", "--out", str(tmp_path)]) == 0
    lines = open(tmp_path / "fig8_sweep.csv").read().splitlines()
    assert lines[0].startswith("t,s,")
    assert len(lines) == 6


def test_cusp_volume(tmp_path):
    rc = run(
        [
            "cusp", "volume", "--s", "2.772588722239781", "--k", "1.0",
            "--cutoffs", "5,10", "--nodes", "288", "--out", str(tmp_path),
        ]
    )
    assert rc == 0
    lines = open(tmp_path / "cusp_volume.csv").read().splitlines()
    assert lines[0] == "cutoff,estimate,stderr,increment_ratio"
    assert len(lines) == 3
    assert (tmp_path / "cusp_volume.svg").exists()


def test_cusp_volume_determinism(tmp_path):
    args = ["cusp", "volume", "--s", "1.5", "--cutoffs", "4,8", "--nodes", "288",
            "--method", "mc", "--samples", "200", "--seed", "7"]
    out1 = tmp_path / "a"
    out2 = tmp_path / "b"
    assert run(args + ["--out", str(out1)]) == 0
    assert run(args + ["--out", str(out2)]) == 0
    assert (out1 / "cusp_volume.csv").read_bytes() == (out2 / "cusp_volume.csv").read_bytes()
    assert (out1 / "cusp_volume.svg").read_bytes() == (out2 / "cusp_volume.svg").read_bytes()
    assert (out1 / "manifest.json").read_bytes() == (out2 / "manifest.json").read_bytes()


def test_cusp_displacement(tmp_path):
    rc = run(["cusp", "displacement", "--s", "2.7725887", "--levels", "1,2,4", "--out", str(tmp_path)])
    assert rc == 0
    lines = open(tmp_path / "displacement.csv").read().splitlines()
    assert lines[0] == "level,displacement" and len(lines) == 4
    values = [float(line.split(",")[1]) for line in lines[1:]]
    assert values[0] > values[1] > values[2]


def test_lattice_normalize(tmp_path):
    A = pl.to_float(group_exp(LieAlgElem("LPrime", (0.6, 0.2))))
    B = pl.to_float(group_exp(LieAlgElem("LPrime", (0.0, 0.9))))
    G = np.array([[1.0, 0.5, 0, 0], [0, 1, 0.25, 0], [0.5, 0, 1, 0], [0, 0, 0.5, 1]])
    Gi = np.linalg.inv(G)
    lat = cusplie.Lattice(G @ A @ Gi, G @ B @ Gi)
    infile = tmp_path / "gens.json"
    with open(infile, "w") as fh:
        json.dump(cusplie.lattice_to_json(lat), fh)
    assert run(["lattice", "normalize", "--in", str(infile), "--out", str(tmp_path)]) == 0
    report = json.load(open(tmp_path / "normalization.json"))
    assert report["sign"] == 1
    assert report["residual"] <= 1e-9
    assert len(report["conjugator"]["rows"]) == 4


def test_lattice_normalize_bad_input(tmp_path):
    # commuting pair of rank 1 is rejected with a nonzero exit
    A = pl.to_float(group_exp(LieAlgElem("LPrime", (0.5, 0.0))))
    infile = tmp_path / "bad.json"
    with open(infile, "w") as fh:
        json.dump({"A": pl.matrix_to_json(A), "B": pl.matrix_to_json(A @ A)}, fh)
    assert run(["lattice", "normalize", "--in", str(infile), "--out", str(tmp_path)]) == 1


def test_domain_export(tmp_path):
    rc = run(
        ["domain", "export", "--family", "Dt", "--t", "0.5", "--obj", "d.obj", "--svg", "d.svg",
         "--x2-min", "0.2", "--x2-max", "2.0", "--grid", "8", "--out", str(tmp_path)]
    )
    assert rc == 0
    assert (tmp_path / "d.obj").exists() and (tmp_path / "d.svg").exists()


def test_domain_export_requires_format(tmp_path):
    assert run(["domain", "export", "--family", "D0", "--out", str(tmp_path)]) == 2


def test_domain_export_dt_requires_t(tmp_path):
    assert run(["domain", "export", "--family", "Dt", "--obj", "x.obj", "--out", str(tmp_path)]) == 2


def test_malformed_json_is_usage_error(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run(["lattice", "normalize", "--in", str(bad), "--out", str(tmp_path)]) == 2
    assert run(["lattice", "normalize", "--in", str(tmp_path / "missing.json"), "--out", str(tmp_path)]) == 2


def test_output_directory_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv("CONVEXCUSP_OUT", str(tmp_path / "envout"))
    assert run(["fig8", "verify", "--t", "1/2"]) == 0
    assert (tmp_path / "envout" / "fig8_verify.json").exists()


def test_usage_error_exit_code():
    with pytest.raises(SystemExit) as err:
        run(["fig8", "verify"])  # missing --t
    assert err.value.code == 2
    with pytest.raises(SystemExit) as err:
        run(["nonsense"])
    assert err.value.code == 2
