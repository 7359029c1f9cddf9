import json
import math

import numpy as np
import pytest
from click.testing import CliRunner

from honeycomb_edge import __version__
from honeycomb_edge.cli import main


@pytest.fixture
def run():
    runner = CliRunner()

    def invoke(*args):
        return runner.invoke(main, [str(a) for a in args])
    return invoke


def test_classify_armchair(run):
    res = run("classify", "-a", 1, 1)
    assert res.exit_code == 0
    out = json.loads(res.stdout)
    assert out["kind"] == "armchair" and out["flat_band"]["sublattice"] is None
    assert out["meta"]["version"] == __version__
    assert out["meta"]["gauge"] == [0, 1]


def test_classify_zigzag(run):
    out = json.loads(run("classify", "-a", 6, 1, "--termination", "balanced").stdout)
    assert out["kind"] == "zigzag" and out["balance"] == "balanced"
    assert out["flat_band"] == {"sublattice": "B", "interval": "inner"}
    assert out["offsets"]["n"] == [-4, 2, 3]
    assert np.allclose(out["gap_closing_k"], [2 * math.pi / 3, 4 * math.pi / 3])


def test_exit_codes(run):
    res = run("classify", "-a", 2, 4)
    assert res.exit_code == 2
    assert json.loads(res.stderr)["error"] == "NotCoprime"
    assert run("classify", "-a", 4, 1, "--termination", "unbalanced-a").exit_code == 2
    assert run("classify").exit_code == 2
    assert run("scan", "-a", 6, 1, "--nk", 1).exit_code == 2
    res = run("flatband", "-a", 6, 1, "--k", 2 * math.pi / 3)
    assert res.exit_code == 3
    assert json.loads(res.stderr)["error"] == "ExceptionalQuasimomentum"
    res = run("winding", "-a", 4, 1, "--k0", 3, "--e0", 0.52, "--re", 0.02)
    assert res.exit_code == 3
    assert json.loads(res.stderr)["error"] == "CircleHitsEssentialSpectrum"


def test_winding(run):
    out = json.loads(run("winding", "-a", 4, 1, "--k0", 3, "--e0", 0.33).stdout)
    assert out["W"] == 1 and out["Nc"] == 50 and out["rE"] == 0.01
    assert set(out) >= {"k0", "E0", "rE", "Nc", "W", "minAbsDelta"}


def test_flatband_classical_delta(run):
    out = json.loads(run("flatband", "-a", 1, -1, "--termination", "balanced",
                         "--k", 3.14159).stdout)
    amps = np.array(out["amplitudes"])
    assert out["exists"]
    assert abs(amps[0, 0] - 1) < 1e-15
    assert np.abs(amps[1:]).max() < 1e-5
    assert out["residual"] < 1e-12


def test_flatband_general(run):
    out = json.loads(run("flatband", "-a", 6, 1, "--k", math.pi, "--formula", "fourier").stdout)
    assert out["sublattice"] == "B" and out["formula"] == "fourier"
    assert out["residual"] < 1e-10
    out = json.loads(run("flatband", "-a", 6, 1, "--k", 0.5).stdout)
    assert out["exists"] is False


def test_scan_csv_layout(run, tmp_path):
    res = run("scan", "-a", 6, 1, "--nk", 8, "--ne", 6, "--elim", 0.4, "--out", tmp_path)
    assert res.exit_code == 0
    text = (tmp_path / "scan_6_1.csv").read_text()
    lines = text.split("\n")
    header = [l for l in lines if l.startswith("#")]
    assert any(l.startswith("# gauge=") for l in header)
    assert any(l.startswith("# version=") for l in header)
    body = [l for l in lines if l and not l.startswith("#")]
    e_vals = [float(x) for x in body[0].split(",")[1:]]
    assert np.allclose(e_vals, np.linspace(-0.4, 0.4, 7))
    rows = [l.split(",") for l in body[1:]]
    assert len(rows) == 9 and all(len(r) == 8 for r in rows)
    assert np.allclose([float(r[0]) for r in rows], np.linspace(0, 2 * math.pi, 9))
    assert "\r" not in text


def test_determinism(run, tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for d in (a, b):
        run("scan", "-a", 5, 1, "--nk", 10, "--ne", 10, "--out", d)
        run("scan", "-a", 5, 1, "--nk", 10, "--ne", 10, "--format", "pgm", "--out", d)
        run("spectrum", "-a", 5, 1, "--nk", 10, "--out", d)
        run("winding", "-a", 5, 1, "--k0", 0.27, "--e0", 0.24, "--out", d)
    for name in ("scan_5_1.csv", "scan_5_1.pgm", "spectrum_5_1.csv", "winding_5_1.json"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_pgm(run, tmp_path):
    run("scan", "-a", 6, 1, "--nk", 12, "--ne", 10, "--format", "pgm", "--out", tmp_path)
    data = (tmp_path / "scan_6_1.pgm").read_bytes()
    assert data.startswith(b"P5\n")
    lines = data.split(b"\n")
    dims = next(l for l in lines[1:] if not l.startswith(b"#"))
    assert dims == b"13 11"
    pixels = data[-13 * 11:]
    assert len(pixels) == 143
    # masked cells are white, the rest is scaled into 0..254
    assert 255 in pixels and min(pixels) == 0


def test_scan_json_loci(run):
    out = json.loads(run("scan", "-a", 6, 1, "--nk", 30, "--ne", 30, "--format", "json").stdout)
    assert len(out["log_abs_delta"]) == 31
    assert any(l["e_range"] == [0, 0] for l in out["loci"])


def test_spectrum_and_wedge(run):
    res = run("spectrum", "-a", 4, 1, "--nk", 4, "--format", "json")
    out = json.loads(res.stdout)
    assert out["band_min"][0] < 1e-9 and out["band_max"][0] == 3
    out = json.loads(run("wedge", "-a", 6, 1).stdout)
    assert abs(out["predicted"] - math.sqrt(3) / 2 / math.sqrt(43)) < 1e-15
    assert all(c["relative_error"] < 0.05 for c in out["crossings"])
