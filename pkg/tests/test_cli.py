import json
import subprocess
import sys

import pytest

from diffmoment.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_expand_golden(capsys):
    code, out, _ = run(capsys, "expand", "--spec", "g(1,2)*g(1,2)")
    assert code == 0
    assert out == "x1^2*y2^2 - 2*x1*x2*y1*y2 + x2^2*y1^2\n"


def test_translate_worked_examples(capsys):
    assert run(capsys, "translate", "--spec", "f(1,1)", "--format", "text")[1] == "mu20 + mu02\n"
    assert run(capsys, "translate", "--spec", "g(1,2)*g(1,2)", "--format", "text")[1] == \
        "(mu20*mu02 - mu11^2) / mu00^4\n"
    code, out, _ = run(capsys, "translate", "--spec", "g(2,1)*g(2,3)", "--to", "moments")
    data = json.loads(out)
    assert code == 0 and data["form"] == "moments"
    assert data["normalization"] == {"kind": "mu00", "power": 5}
    assert [t["coeff"] for t in data["terms"]] == ["1", "-2", "1"]


def test_pipeline_translate_then_verify(tmp_path, capsys):
    expr = tmp_path / "curv.json"
    assert main(["translate", "--spec", "g(2,1)*g(2,3)", "--to", "derivatives", "--out", str(expr)]) == 0
    report = tmp_path / "r.json"
    args = ["verify", "--expr", str(expr), "--group", "affine", "--trials", "20", "--points", "3",
            "--seed", "7", "--out", str(report)]
    assert main(args) == 0
    first = report.read_text()
    data = json.loads(first)
    assert data["verdict"] == "pass"
    assert abs(data["fitted_exponent"] - 2) <= 0.01
    assert main(args) == 0
    assert report.read_text() == first


def test_verify_moment_with_images(tmp_path, capsys):
    img = tmp_path / "img.csv"
    img.write_text("dim=2\n0,0,1\n1,0,2\n0,1,1\n1,1,3\n2,1,1\n")
    code, out, _ = run(capsys, "verify", "--expr", "catalog:ami1", "--image", str(img), "--trials", "10")
    assert code == 0 and json.loads(out)["verdict"] == "pass"


def test_verify_fail_exit_code(capsys):
    code, out, _ = run(capsys, "verify", "--expr", "catalog:hu2", "--group", "affine", "--trials", "10")
    assert code == 1 and json.loads(out)["verdict"] == "fail"


def test_degenerate_exit_code(capsys):
    code, _, _ = run(capsys, "verify", "--expr", "catalog:affine_curvature_moments", "--trials", "3")
    assert code == 2


def test_screen_conjecture_and_text(capsys):
    code, out, _ = run(capsys, "screen", "--conjecture", "2", "--trials", "5", "--points", "3", "--format", "text")
    assert code == 0
    assert "verdict          PASS" in out


def test_relation_and_generate(capsys):
    code, out, _ = run(capsys, "relation", "--order", "2", "--dim", "2", "--trials", "3")
    assert code == 0 and json.loads(out)["verdict"] == "pass"
    code, out, _ = run(capsys, "generate", "--max-points", "2", "--max-order", "2", "--affine-only")
    assert out == "g(1,2)*g(1,2)\n"


@pytest.mark.parametrize("argv,needle", [
    (["expand", "--spec", "g(1,2)*h(1)"], "line 1, column 8"),
    (["verify", "--expr", "catalog:affine_curvature", "--field", "x^2 + "], "line 1, column 7"),
    (["verify", "--expr", "catalog:nope"], "unknown catalog entry"),
    (["translate", "--spec", "g(1,2)*g(2,3)*g(3,1)"], "zero expression"),
])
def test_input_errors(capsys, argv, needle):
    code, _, err = run(capsys, *argv)
    assert code == 3
    assert needle in err


def test_csv_error_position(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("dim=2\n0,0,1\n0,oops,1\n")
    code, _, err = run(capsys, "verify", "--expr", "catalog:ami1", "--image", str(bad))
    assert code == 3 and f"{bad}:3:3" in err


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "diffmoment", "expand", "--spec", "f(1,2)"],
                          capture_output=True, text=True, check=True)
    assert proc.stdout == "x1*x2 + y1*y2\n"
