import json
import subprocess
import sys

import pytest

from nnrank.cli import main

from conftest import FOOLING_4X4


@pytest.fixture
def ex21_file(tmp_path):
    p = tmp_path / "fooling4x4.json"
    p.write_text(json.dumps({"dims": [4, 4], "values": sum(FOOLING_4X4, [])}))
    return p


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_grank(capsys):
    code, out, _ = run(capsys, "grank", "--shape", "2,2,2")
    assert code == 0
    assert out.splitlines()[0] == "2"
    assert "fiber mode: 3" in out


def test_grank_json(capsys):
    code, out, _ = run(capsys, "grank", "--shape", "3,3,3", "--format", "json")
    obj = json.loads(out)
    assert obj["generic_rank"] == 5 and obj["jacobian_report"]["full_row_rank"]


def test_nnrank_fooling4x4(capsys, ex21_file):
    code, out, _ = run(capsys, "nnrank", "--input", str(ex21_file))
    assert code == 0
    assert out.splitlines()[0] == "[4,4] exact (fooling-set / ntf-fit)"


def test_nnrank_negative_input(capsys, tmp_path):
    p = tmp_path / "neg.json"
    p.write_text(json.dumps({"dims": [2], "values": [1, -1]}))
    code, out, err = run(capsys, "nnrank", "--input", str(p))
    assert code == 1 and out == "" and "negative" in err


def test_decompose(capsys, ex21_file, tmp_path):
    dest = tmp_path / "dec.json"
    code, out, _ = run(capsys, "decompose", "--input", str(ex21_file), "--output", str(dest))
    assert code == 0 and out == ""
    obj = json.loads(dest.read_text())
    assert obj["r"] == 4 and obj["fiber_mode"] == 2 and len(obj["terms"]) == 4


def test_witness(capsys):
    code, out, _ = run(capsys, "witness", "--shape", "2,2,2")
    obj = json.loads(out)
    assert obj["radius_exact"] == "1/12"
    assert obj["support"] == [[1, 1, 2], [1, 2, 1], [2, 1, 1], [2, 2, 2]]


def test_certify_max(capsys, tmp_path):
    t = tmp_path / "t.json"
    t.write_text(json.dumps({"dims": [2, 2, 2], "values": [0, 1.01, 1, 0, 1, 0, 0, 1]}))
    code, out, _ = run(capsys, "certify-max", "--input", str(t), "--shape", "2,2,2")
    assert code == 0 and json.loads(out)["certified_rank"] == 4

    t.write_text(json.dumps({"dims": [2, 2, 2], "values": [0.1] * 8}))
    code, out, err = run(capsys, "certify-max", "--input", str(t), "--shape", "2,2,2")
    assert code == 1 and out == "" and "radius" in err


def test_typical_then_verify(capsys, tmp_path):
    cert = tmp_path / "c.json"
    code, _, _ = run(capsys, "typical", "--shape", "2,2,2", "--r", "3", "--seed", "4",
                     "--output", str(cert))
    assert code == 0
    code, out, _ = run(capsys, "verify", "--cert", str(cert))
    assert code == 0 and out == "true\n"

    obj = json.loads(cert.read_text())
    obj["total"] = [2 * v for v in obj["total"]]
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(obj))
    code, out, _ = run(capsys, "verify", "--cert", str(bad))
    assert code == 1 and out.startswith("false:") and "outside ball" in out


def test_typical_out_of_range(capsys):
    code, out, err = run(capsys, "typical", "--shape", "2,2,2", "--r", "1")
    assert code == 1 and "generic rank" in err


def test_verify_garbage(capsys, tmp_path):
    p = tmp_path / "junk.json"
    p.write_text("{not json")
    code, out, _ = run(capsys, "verify", "--cert", str(p))
    assert code == 1 and out.startswith("false")


def test_census_files(capsys, tmp_path):
    dest = tmp_path / "rep.csv"
    code, out, _ = run(capsys, "census", "--shape", "2,2", "--samples", "5",
                       "--output", str(dest))
    assert code == 0
    assert dest.read_text().splitlines()[0] == \
        "sample_index,L,U,exact,lower_provenance,upper_provenance"
    assert json.loads(dest.with_suffix(".json").read_text())["histogram"] == {"2": 5}


@pytest.mark.parametrize("argv", [
    ["grank"],
    ["grank", "--shape", "2,2", "--bogus"],
    ["frobnicate"],
    ["witness", "--shape", "2,0"],
    ["witness", "--shape", "2,2", "--format", "csv"],
    ["grank", "--shape", "2,2", "--seed", "-1"],
])
def test_usage_errors(capsys, argv):
    with pytest.raises(SystemExit) as exc:
        main(argv)
    assert exc.value.code == 2
    assert "usage" in capsys.readouterr().err


def test_module_entry_point_pipe():
    typical = subprocess.run(
        [sys.executable, "-m", "nnrank", "typical", "--shape", "2,2,3", "--r", "3"],
        capture_output=True, text=True, check=True)
    verify = subprocess.run(
        [sys.executable, "-m", "nnrank", "verify", "--cert", "-"],
        input=typical.stdout, capture_output=True, text=True)
    assert verify.returncode == 0 and verify.stdout == "true\n"
