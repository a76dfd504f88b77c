"""End-to-end CLI runs: outputs, exit codes, reproducibility."""

import json
import math
from pathlib import Path

import numpy as np
import pytest

from shearcase import serialize
from shearcase.cli import run

FIELD_DOC = {
    "type": "fourier",
    "equivariant": True,
    "terms": [
        {"k": [0, 1], "u_sin": [1.0, 0.0]},
        {"k": [1, 0], "u_sin": [0.0, 1.0]},
    ],
}

TREFOIL_VERIFY_DOC = {
    "presentation": {"generators": 2, "relators": [[1, 2, 1, -2, -1, -2]],
                     "name": "trefoil_braid"},
    "certificate": {"presentation_id": "trefoil_braid", "p": "5",
                    "images": [[1, 1, 0, 1], [1, 0, 4, 1]]},
}


def write(path, doc):
    serialize.write_json(path, doc)
    return str(path)


def test_approx_isotopy_outputs(tmp_path):
    inp = write(tmp_path / "field.json", FIELD_DOC)
    out = tmp_path / "run"
    code = run(["approx-isotopy", "--input", inp, "--out", str(out),
                "--eps", "0.05", "--resolution", "32", "--samples", "9",
                "--seed", "1", "--reproducible"])
    assert code == 0
    for name in ("program.json", "certificate.json", "deviation.csv",
                 "deviation.svg", "manifest.json"):
        assert (out / name).exists()
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["summary"]["deviation_within_certificate"] is True
    assert manifest["summary"]["certificate_total"] <= 0.05
    assert "wall_time_seconds" not in manifest  # suppressed in reproducible mode
    cert = json.loads((out / "certificate.json").read_text())
    assert cert["total"] == cert["eps1"] + cert["eps2"] + cert["eps3"]


def test_verify_cert_exit_codes(tmp_path):
    inp = write(tmp_path / "vc.json", TREFOIL_VERIFY_DOC)
    assert run(["verify-cert", "--input", inp, "--out", str(tmp_path / "ok"),
                "--reproducible"]) == 0
    bad = json.loads(json.dumps(TREFOIL_VERIFY_DOC))
    bad["certificate"]["images"][0][1] = 2
    inp_bad = write(tmp_path / "vc_bad.json", bad)
    assert run(["verify-cert", "--input", inp_bad, "--out", str(tmp_path / "bad"),
                "--reproducible"]) == 1
    verdict = json.loads((tmp_path / "bad" / "verdict.json").read_text())
    assert "relation" in verdict["reason"]


def test_schema_error_exit_2(tmp_path, capsys):
    inp = write(tmp_path / "junk.json", {"bogus": 1})
    code = run(["verify-cert", "--input", inp, "--out", str(tmp_path / "x")])
    assert code == 2
    err = capsys.readouterr().err
    payload = json.loads(err)
    assert "error" in payload and "message" in payload


def test_search_cert(tmp_path):
    inp = write(tmp_path / "pres.json",
                {"presentation": TREFOIL_VERIFY_DOC["presentation"]})
    out = tmp_path / "search"
    code = run(["search-cert", "--input", inp, "--out", str(out),
                "--primes", "2", "3", "5", "--seed", "1", "--reproducible"])
    assert code == 0
    report = json.loads((out / "search.json").read_text())
    assert report["found"] and report["verified"]


def test_moser_subcommand(tmp_path):
    inp = write(tmp_path / "iso.json", {"type": "shear_flow", "amplitude": 0.8})
    out = tmp_path / "moser"
    code = run(["moser", "--input", inp, "--out", str(out),
                "--resolution", "64", "--samples", "3", "--reproducible"])
    assert code == 0
    metrics = json.loads((out / "metrics.json").read_text())
    assert metrics["max_area_defect"] <= 1e-3
    assert (out / "area_defect.svg").exists()


def test_tolerance_override_flag(tmp_path):
    inp = write(tmp_path / "iso.json", {"type": "vertical_bump", "amplitude": 0.3})
    out = tmp_path / "moser2"
    code = run(["moser", "--input", inp, "--out", str(out),
                "--resolution", "64", "--samples", "2",
                "--tol.bump_width=1.0", "--reproducible"])
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["tolerances"]["bump_width"] == 1.0


@pytest.mark.slow
def test_byte_identical_reproducibility(tmp_path):
    inp = write(tmp_path / "knot.json", {"kind": "torus", "p": 2, "q": 3})
    out_a = tmp_path / "a"
    out_b = tmp_path / "b"
    for out in (out_a, out_b):
        code = run(["pillowcase-image", "--input", inp, "--out", str(out),
                    "--seed", "3", "--samples", "128", "--resolution", "256",
                    "--reproducible"])
        assert code == 0
    for name in ("arcs.csv", "reducible.csv", "image.svg"):
        assert (out_a / name).read_bytes() == (out_b / name).read_bytes()
    doc_a = json.loads((out_a / "manifest.json").read_text())
    doc_b = json.loads((out_b / "manifest.json").read_text())
    doc_a["parameters"].pop("out")
    doc_b["parameters"].pop("out")
    assert doc_a == doc_b
