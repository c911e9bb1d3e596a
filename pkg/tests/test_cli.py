import json

import numpy as np
import pytest

from greenline.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_resultant_exact(capsys):
    code, out, _ = run(capsys, "resultant", "z^2/2")
    data = json.loads(out)
    assert code == 0 and data["resultant"] == "4"
    assert data["V_gF"] == pytest.approx(-np.log(2))
    code, out, _ = run(capsys, "resultant", "z^2 + 1/3", "-p", "3")
    data = json.loads(out)
    assert data["resultant"] == "81" and data["valuation"] == "4" and data["V_gF_log_p"] == "2"


def test_resultant_complex_coefficients(capsys):
    code, out, _ = run(capsys, "resultant", "z^2 + I")
    assert code == 0 and json.loads(out)["abs_resultant"] == pytest.approx(1.0)


def test_green(capsys, tmp_path):
    prefix = tmp_path / "g"
    code, out, _ = run(capsys, "green", "z^2", "--grid", "-2", "2", "-2", "2", "--res", "8", "--out", str(prefix))
    assert code == 0 and "wrote" in out
    assert (tmp_path / "g.csv").exists() and (tmp_path / "g.pgm").exists()
    code, _, err = run(capsys, "green", "z^2", "--grid", "1", "1", "0", "1", "--out", str(prefix))
    assert code == 2 and "degenerate window" in err


def test_measure(capsys, tmp_path):
    code, out, _ = run(capsys, "measure", "z^2", "--depth", "3", "--seed-point", "1", "--out", str(tmp_path / "m.csv"))
    data = json.loads(out)
    assert code == 0 and data["atoms"] == 8
    atoms = np.loadtxt(tmp_path / "m.csv", delimiter=",")
    assert atoms.shape == (8, 3) and np.allclose(np.abs(atoms[:, 0] + 1j * atoms[:, 1]), 1)
    code, _, err = run(capsys, "measure", "z^3", "--depth", "12")
    assert code == 2 and "budget" in err


def test_berk_image_and_reduce(capsys):
    code, out, _ = run(capsys, "berk", "image", "3z^2", "zeta(0, 3^1)", "-p", "3")
    data = json.loads(out)
    assert data["image"] == "zeta(0, 3^1)" and data["local_degree"] == 2
    code, out, _ = run(capsys, "berk", "reduce", "3z^2", "-p", "3", "--depth", "10")
    data = json.loads(out)
    assert data["status"] == "potentially-good" and data["conjugate"] == "z^2"


def test_characterize(capsys, tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("map = 3z^2\nfield = p-adic:3\n")
    out = tmp_path / "report.json"
    code, _, _ = run(capsys, "characterize", str(cfg), "--out", str(out))
    assert code == 0 and json.loads(out.read_text())["verdict"] == "potentially-good-reduction"


def test_counterexample(capsys):
    code, out, _ = run(capsys, "counterexample", "-p", "3", "-d", "2", "-c", "1/3", "--z0", "1/243")
    assert code == 0 and json.loads(out)["verdict"] == "all-checks-pass"
    code, out, _ = run(capsys, "counterexample", "-p", "3", "-d", "2", "-c", "0", "--z0", "5")
    assert code == 1 and json.loads(out)["verdict"] == "precondition-failed"


def test_bad_map_is_reported(capsys):
    code, _, err = run(capsys, "resultant", "z^2 + w")
    assert code == 2 and err.startswith("greenline: error:")
