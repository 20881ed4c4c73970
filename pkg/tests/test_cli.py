import json
import subprocess
import sys

import pytest

from shiftcartan.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, (json.loads(out.out) if out.out else None), out.err


def test_adjoint_preset_passes(capsys):
    code, rep, _ = run(capsys, "check-symplectic", "--preset", "adjoint-sl2", "--samples", "3")
    assert code == 0 and rep["pass"]


def test_bg_needs_shift_two(capsys):
    assert run(capsys, "check-symplectic", "--preset", "bg-sl2", "--shift", "2")[0] == 0
    code, rep, _ = run(capsys, "check-symplectic", "--preset", "bg-sl2", "--shift", "1")
    assert code == 1 and not rep["pass"]


def test_malformed_spec_file(tmp_path, capsys):
    bad = tmp_path / "g.json"
    bad.write_text("{ not json")
    code, rep, err = run(capsys, "check-symplectic", "--spec", str(bad), "--structure", "bg")
    assert code == 2 and rep is None and err.startswith("error:")


def test_lagrangian_presets(capsys):
    code, rep, _ = run(capsys, "check-lagrangian", "--preset", "double-sl2", "--samples", "3")
    assert code == 0 and rep["pass"]
    code, rep, _ = run(capsys, "check-lagrangian", "--preset", "conjclass-sl2",
                       "--perturb", "gamma", "--samples", "3")
    assert code == 1
    assert rep["perturbation"]["named_identity"] == "b"
    assert rep["perturbation"]["failed"] == ["b"]


def test_unknown_preset_and_perturbation(capsys):
    assert run(capsys, "check-lagrangian", "--preset", "nope")[0] == 2
    assert run(capsys, "check-lagrangian", "--preset", "double-sl2", "--perturb", "nope")[0] == 2


def test_fuse_two_doubles(capsys):
    code, rep, _ = run(capsys, "fuse", "--in", "double-sl2", "double-sl2", "--samples", "2")
    assert code == 0 and rep["pass"]
    assert rep["history"][-1][0] == "fuse"


def test_tft_gluing_certificate(capsys):
    code, rep, _ = run(capsys, "tft", "--cob", "pants ; copants", "--group", "sl2", "--p", "3",
                       "--verify-gluing")
    assert code == 0
    (cert,) = rep["certificates"]
    assert cert["holds"] and cert["direct_count"] == cert["fibre_product_count"]


def test_tft_cylinder_is_diagonal(capsys):
    code, rep, _ = run(capsys, "tft", "--cob", "cyl")
    assert code == 0 and rep["correspondence"]["diagonal"]


def test_tft_arity_error(capsys):
    code, rep, err = run(capsys, "tft", "--cob", "pants ; cap")
    assert code == 2 and "position 6" in err


def test_tft_certify_generators(capsys):
    code, rep, _ = run(capsys, "tft", "--certify-generators")
    assert code == 0 and rep["generators"]["all_hold"]


def test_cob_parse_and_reps_count(capsys):
    code, rep, _ = run(capsys, "cob", "parse", "cup ; pants ; copants ; cap")
    assert code == 0 and rep["euler"] == 0
    code, rep, _ = run(capsys, "reps", "count", "--cob", "genus(1; 0, 0)")
    assert code == 0 and rep["count"] == 168 == rep["commuting_pairs_oracle"]


@pytest.mark.parametrize("argv", [
    ["tft", "--cob", "cyl", "--p", "4"],
    ["check-symplectic", "--preset", "adjoint-sl2", "--seed", "0"],
    ["frobnicate"],
    ["reps", "count", "--cob", "genus(2; 0, 0)", "--budget", "10"],
])
def test_bad_input_exits_two(capsys, argv):
    assert run(capsys, *argv)[0] == 2


def test_out_file_is_byte_identical(tmp_path, capsys):
    paths = [tmp_path / "a.json", tmp_path / "b.json"]
    for p in paths:
        assert main(["check-lagrangian", "--preset", "conjclass-sl2", "--samples", "2",
                     "--seed", "4", "--out", str(p)]) == 0
    assert paths[0].read_bytes() == paths[1].read_bytes()


def test_console_script_entry_point():
    proc = subprocess.run([sys.executable, "-m", "shiftcartan.cli", "cob", "parse", "pants"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["arity"] == [1, 2]
