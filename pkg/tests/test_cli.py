import io
import os
import subprocess
import sys

import numpy as np
import pytest

from conftest import FIXTURES
from l1codec.cli import build_parser, main
from l1codec.matio import read_vector

SUBCOMMANDS = [[], ["decode"], ["ric"], ["bounds"], ["certificate"], ["experiment"],
               ["experiment", "curve"], ["experiment", "compress"]]


def fx(name):
    return os.path.join(FIXTURES, name)


def run(argv):
    out = io.StringIO()
    code = main(argv, out)
    return code, out.getvalue()


@pytest.mark.parametrize("sub", SUBCOMMANDS)
def test_help_exits_zero(sub, capsys):
    with pytest.raises(SystemExit) as info:
        main(sub + ["--help"])
    assert info.value.code == 0
    assert "usage" in capsys.readouterr().out


def test_help_documents_flags(capsys):
    with pytest.raises(SystemExit):
        main(["experiment", "curve", "--help"])
    text = capsys.readouterr().out
    for flag in ("--m", "--oversample", "--fractions", "--trials", "--seed", "--csv",
                 "--resample-A", "--error-dist", "--format"):
        assert flag in text


def test_unknown_flag_is_usage_error(capsys):
    with pytest.raises(SystemExit) as info:
        main(["bounds", "--ratio", "0.5", "--bogus"])
    assert info.value.code == 1
    assert "error" in capsys.readouterr().err


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "l1codec", "bounds", "--ratio", "0.75",
                           "--rstar"], capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.startswith("r_star = ")


def test_decode_fixture(tmp_path):
    out = tmp_path / "fhat.txt"
    code, text = run(["decode", "--matrix", fx("decode_A.txt"),
                      "--received", fx("decode_y.txt"), "--out", str(out)])
    assert code == 0 and "Optimal" in text
    assert np.abs(read_vector(out) - read_vector(fx("decode_f.txt"))).max() <= 1e-6


def test_decode_prints_17_digits():
    code, text = run(["decode", "--matrix", fx("decode_A.txt"), "--received", fx("decode_y.txt")])
    lines = text.splitlines()
    vals = lines[lines.index("f_hat") + 1:]
    assert code == 0 and len(vals) == 8
    f = read_vector(fx("decode_f.txt"))
    assert np.abs(np.array([float(v) for v in vals]) - f).max() <= 1e-6


def test_decode_missing_file(capsys):
    code, _ = run(["decode", "--matrix", "/nonexistent/A.txt", "--received", fx("decode_y.txt")])
    assert code == 3
    assert "/nonexistent/A.txt" in capsys.readouterr().err


def test_decode_malformed_file(tmp_path):
    bad = tmp_path / "A.txt"
    bad.write_text("2 2\n1 x\n")
    code, _ = run(["decode", "--matrix", str(bad), "--received", fx("decode_y.txt")])
    assert code == 3


def test_decode_shape_mismatch():
    code, _ = run(["decode", "--matrix", fx("decode_A.txt"), "--received", fx("decode_f.txt")])
    assert code == 1


def test_bounds_rstar():
    code, text = run(["bounds", "--ratio", "0.75", "--rstar", "--r", "3.6e-4"])
    assert code == 0
    vals = dict(line.split(" = ") for line in text.splitlines())
    assert float(vals["r_star"]) >= 3.6e-4
    assert float(vals["rho(0.00036000000000000002)"]) < 1


def test_bounds_curve_csv(tmp_path):
    path = tmp_path / "rho.csv"
    code, _ = run(["bounds", "--ratio", "0.5", "--curve", "1e-4", "1e-3", "5", "--csv", str(path)])
    lines = path.read_text().splitlines()
    assert code == 0 and lines[0] == "r,rho" and len(lines) == 6
    rhos = [float(l.split(",")[1]) for l in lines[1:]]
    assert rhos == sorted(rhos)


def test_bounds_bad_ratio():
    assert run(["bounds", "--ratio", "1.5", "--rstar"])[0] == 1


def test_ric_csv(tmp_path):
    path = tmp_path / "ric.csv"
    code, text = run(["ric", "--matrix", fx("frame_8x12.txt"), "--S", "1", "--theta", "2", "2",
                      "--csv", str(path)])
    assert code == 0 and "(< 1)" in text and "mode exact" in text
    lines = path.read_text().splitlines()
    assert lines[0] == "quantity,S,Sprime,value,mode"
    assert any(l.startswith("theta,2,2,") for l in lines)


def test_ric_sampled_deterministic():
    argv = ["ric", "--matrix", fx("frame_8x12.txt"), "--S", "2", "--mode", "sampled", "--seed", "3"]
    assert run(argv) == run(argv)
    assert "sampled" in run(argv)[1]


def test_ric_bad_sparsity():
    assert run(["ric", "--matrix", fx("frame_8x12.txt"), "--S", "0"])[0] == 1


def test_certificate_orthonormal():
    code, text = run(["certificate", "--matrix", fx("orthonormal_6x6.txt"),
                      "--support", "1,4", "--signs", "+,-"])
    assert code == 0
    assert "converged        True" in text and "iterations       1" in text
    assert "off-support max  0\n" in text


def test_certificate_frame_bound():
    code, text = run(["certificate", "--matrix", fx("frame_8x12.txt"),
                      "--support", "4", "--signs", "+"])
    assert code == 0 and "verified         True" in text and "(respected)" in text


def test_certificate_duplicate(capsys):
    code, text = run(["certificate", "--matrix", fx("duplicate_6x8.txt"),
                      "--support", "0", "--signs", "+"])
    assert code == 2 or "verified         False" in text
    assert code != 2 or "did not converge" in capsys.readouterr().err


@pytest.mark.parametrize("argv", [
    ["--support", "1,2", "--signs", "+"],
    ["--support", "1", "--signs", "x"],
    ["--support", "99", "--signs", "+"],
    ["--support", "a", "--signs", "+"],
])
def test_certificate_bad_specs(argv):
    assert run(["certificate", "--matrix", fx("frame_8x12.txt")] + argv)[0] == 1


def test_experiment_curve_small(tmp_path):
    path = tmp_path / "c.csv"
    argv = ["experiment", "curve", "--m", "32", "--oversample", "2", "--fractions", "0,0.1",
            "--trials", "3", "--seed", "1", "--csv", str(path)]
    code, text = run(argv)
    assert code == 0 and "breakpoint" in text
    first = path.read_bytes()
    run(argv)
    assert path.read_bytes() == first
    assert first.decode().splitlines()[1] == "0,1,3"


def test_experiment_curve_gnuplot(tmp_path):
    path = tmp_path / "c.dat"
    code, _ = run(["experiment", "curve", "--m", "32", "--fractions", "0", "--trials", "2",
                   "--csv", str(path), "--format", "gnuplot"])
    assert code == 0 and path.read_text().startswith("# m = 32")


def test_experiment_curve_bad_config():
    assert run(["experiment", "curve", "--m", "30", "--oversample", "4"])[0] == 1
    assert run(["experiment", "curve", "--m", "32", "--fractions", "0.6"])[0] == 1


def test_experiment_compress_small(tmp_path):
    path = tmp_path / "cs.csv"
    code, text = run(["experiment", "compress", "--m", "32", "--K", "8,32", "--trials", "2",
                      "--csv", str(path)])
    assert code == 0
    assert path.read_text().splitlines()[0] == "K,bp_error,oracle_error"


def test_unwritable_output():
    code, _ = run(["experiment", "compress", "--m", "16", "--K", "8", "--trials", "1",
                   "--csv", "/nonexistent/dir/cs.csv"])
    assert code == 3


def test_parser_builds():
    assert build_parser().prog == "l1codec"
