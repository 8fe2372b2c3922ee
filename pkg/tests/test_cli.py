import csv
import io

import pytest

from hartree_lab.cli import main, read_config
from hartree_lab.errors import ConfigurationError


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_constants_table(capsys):
    code, out, _ = run(capsys, "constants", "--dim", "3")
    assert code == 0
    assert "c_tilde" in out and "Gamma_n" in out


def test_constants_bad_dim(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["constants", "--dim", "6"])
    assert exc.value.code == 2


def test_constants_ball_csv(capsys):
    code, out, _ = run(capsys, "constants", "--dim", "3", "--ball", "1", "--format", "csv")
    rows = dict(csv.reader(io.StringIO(out)))
    assert code == 0
    assert float(rows["C_0"]) < 0 and float(rows["F_n"]) > 0


@pytest.mark.parametrize("n", ["3", "4", "5"])
def test_identities_pass(capsys, n):
    code, out, _ = run(capsys, "identities", "--dim", n)
    assert code == 0
    assert out.count("pass") == 4


def test_identities_unattainable_tolerance(capsys):
    code, out, err = run(capsys, "identities", "--dim", "3", "--tolerance", "1e-15")
    assert code == 1
    assert "FAIL" in out and "failed identities" in err


def test_spectrum_prints_n_plus_3(capsys):
    code, out, _ = run(capsys, "spectrum", "--dim", "3", "--eps", "0.1")
    assert code == 0
    assert len([l for l in out.splitlines() if l.startswith("lambda_")]) == 6


def test_solve_with_config_file(capsys, tmp_path):
    cfg = tmp_path / "run.cfg"
    out_dir = tmp_path / "out"
    cfg.write_text(f"# ground state\ndim = 3\neps = 0.2\nradius = 1.0\nout_dir = {out_dir}\n")
    code, out, _ = run(capsys, "solve", "--config", str(cfg))
    assert code == 0
    assert (out_dir / "groundstate.csv").exists()
    manifest = (out_dir / "manifest.txt").read_text()
    assert "eps = 0.2" in manifest and "numpy =" in manifest
    # second run collides under the default fail policy
    code, _, err = run(capsys, "solve", "--config", str(cfg))
    assert code == 3 and "not empty" in err
    code, _, _ = run(capsys, "solve", "--config", str(cfg), "--policy", "overwrite")
    assert code == 0


def test_missing_key_named(capsys, tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("eps = 0.2\n")
    code, _, err = run(capsys, "solve", "--config", str(cfg))
    assert code == 2 and "'dim'" in err


def test_config_errors(tmp_path):
    with pytest.raises(ConfigurationError):
        read_config(tmp_path / "absent.cfg")
    bad = tmp_path / "bad.cfg"
    bad.write_text("dim 3\n")
    with pytest.raises(ConfigurationError):
        read_config(bad)
    bad.write_text("colour = red\n")
    with pytest.raises(ConfigurationError):
        read_config(bad)
    bad.write_text("dim = three\n")
    with pytest.raises(ConfigurationError):
        read_config(bad)


def test_sweep_command(capsys, tmp_path):
    out_dir = tmp_path / "a"
    code, out, _ = run(capsys, "sweep", "--dim", "3", "--eps-list", "0.3,0.2", "--out", str(out_dir))
    assert code == 0
    for name in ("sweep.csv", "fits.csv", "manifest.txt"):
        assert (out_dir / name).exists()
    assert list((out_dir / "plots").glob("*.svg"))


def test_sweep_duplicate_eps(capsys, tmp_path):
    code, _, err = run(capsys, "sweep", "--dim", "3", "--eps-list", "0.2,0.2", "--out", str(tmp_path / "b"))
    assert code == 2 and "duplicates" in err
