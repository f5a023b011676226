import json
import os

import numpy as np
import pytest

from fringebos.cli import main
from fringebos.raster import read_raster


def run(*argv):
    return main(list(argv))


# --- simulate ---

def test_simulate_single_scene(tmp_path):
    out = tmp_path / "scene"
    assert run("simulate", "--preset", "m2-0db", "--seed", "7",
               "--size", "128", "--out", str(out)) == 0
    degraded = read_raster(out / "degraded.fpr")
    truth = read_raster(out / "truth_phase.fpr")
    assert degraded.data.shape == truth.data.shape == (128, 128)
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["preset"] == "m2-0db" and manifest["seed"] == 7
    # sidecar records the resolved configuration
    sidecar = json.loads((out / "run_config.json").read_text())
    assert sidecar["preset"] == "m2-0db" and sidecar["size"] == 128


def test_simulate_deterministic(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        assert run("simulate", "--preset", "m1-clean", "--seed", "3",
                   "--size", "96", "--out", str(out)) == 0
    np.testing.assert_array_equal(read_raster(a / "degraded.fpr").data,
                                  read_raster(b / "degraded.fpr").data)


def test_simulate_dataset(tmp_path):
    out = tmp_path / "ds"
    assert run("simulate", "--dataset", "3", "--size", "64", "--seed", "1",
               "--snr-range", "0,40", "--speckle-range", "3,12",
               "--out", str(out)) == 0
    lines = (out / "manifest.jsonl").read_text().strip().split("\n")
    assert len(lines) == 3
    rec = json.loads(lines[0])
    assert 0.0 <= rec["snr_db"] <= 40.0
    assert 3.0 <= rec["speckle_px"] <= 12.0
    assert os.path.exists(out / rec["input_path"])
    assert os.path.exists(out / rec["target_path"])


def test_simulate_unknown_preset_exit_code(tmp_path, capsys):
    # argparse rejects the choice with usage exit code 2
    with pytest.raises(SystemExit) as exc:
        run("simulate", "--preset", "nope", "--out", str(tmp_path / "x"))
    assert exc.value.code == 2


# --- demodulate ---

def _make_scene(tmp_path, preset="uniform-clean", size=128, seed=0):
    out = tmp_path / "scene"
    assert run("simulate", "--preset", preset, "--seed", str(seed),
               "--size", str(size), "--out", str(out)) == 0
    return out


def test_demodulate_subspace_roundtrip(tmp_path):
    scene = _make_scene(tmp_path)
    fx = json.loads((scene / "manifest.json").read_text())["fx"]
    out = tmp_path / "demod"
    assert run("demodulate", "--input", str(scene / "degraded.fpr"),
               "--method", "subspace", "--fx", str(fx),
               "--out", str(out)) == 0
    phase = read_raster(out / "phase.fpr").data
    truth = read_raster(scene / "truth_phase.fpr").data
    err = (phase - truth)[10:-10, 10:-10]
    err -= err.mean()
    assert np.sqrt((err ** 2).mean()) < 0.1
    assert (out / "phase.png").exists()
    sidecar = json.loads((out / "run_config.json").read_text())
    assert sidecar["method"] == "subspace"
    assert sidecar["resolved_threads"] >= 1


def test_demodulate_ft(tmp_path):
    scene = _make_scene(tmp_path, seed=2)
    out = tmp_path / "demod"
    assert run("demodulate", "--input", str(scene / "degraded.fpr"),
               "--method", "ft", "--out", str(out)) == 0
    assert read_raster(out / "phase.fpr").data.shape == (128, 128)


def test_demodulate_thread_invariance(tmp_path, monkeypatch):
    scene = _make_scene(tmp_path, seed=4)
    results = []
    for threads in ("1", "8"):
        out = tmp_path / f"t{threads}"
        monkeypatch.setenv("FRINGEBOS_THREADS", threads)
        assert run("demodulate", "--input", str(scene / "degraded.fpr"),
                   "--method", "subspace", "--out", str(out)) == 0
        results.append(read_raster(out / "phase.fpr").data)
        sidecar = json.loads((out / "run_config.json").read_text())
        assert sidecar["resolved_threads"] == int(threads)
    np.testing.assert_array_equal(results[0], results[1])


def test_demodulate_missing_input_exit_code(tmp_path):
    assert run("demodulate", "--input", str(tmp_path / "missing.fpr"),
               "--out", str(tmp_path / "o")) == 3


def test_demodulate_learned_needs_weights(tmp_path):
    scene = _make_scene(tmp_path, seed=5)
    assert run("demodulate", "--input", str(scene / "degraded.fpr"),
               "--normalizer", "learned",
               "--out", str(tmp_path / "o")) == 3


# --- sweep ---

def test_sweep_writes_csv(tmp_path):
    out = tmp_path / "sweep"
    assert run("sweep", "--axis", "snr", "--values", "30",
               "--mod", "uniform", "--methods", "ft", "--trials", "1",
               "--size", "128", "--out", str(out)) == 0
    lines = (out / "sweep.csv").read_text().strip().split("\n")
    assert lines[0].startswith("axis_value,method")
    assert len(lines) == 2


def test_sweep_range_syntax(tmp_path):
    out = tmp_path / "sweep"
    assert run("sweep", "--axis", "speckle", "--values", "4..5",
               "--mod", "uniform", "--methods", "ft", "--trials", "1",
               "--size", "128", "--out", str(out)) == 0
    lines = (out / "sweep.csv").read_text().strip().split("\n")
    assert len(lines) == 3  # header + two axis values


def test_sweep_bad_method_exit_code(tmp_path):
    assert run("sweep", "--axis", "snr", "--values", "30",
               "--methods", "magic", "--trials", "1",
               "--out", str(tmp_path / "o")) == 3


# --- fit-diffusion ---

def test_fit_diffusion_end_to_end(tmp_path):
    seq = tmp_path / "seq"
    assert run("simulate", "--diffusion-sequence", "--diffusion-d", "1.47e-9",
               "--times", "5,10,20,40,80,160", "--px", "9.1e-6",
               "--size", "512", "--out", str(seq)) == 0
    out = tmp_path / "fit"
    assert run("fit-diffusion", "--dir", str(seq), "--rows", "50,128,200",
               "--window", "100:412", "--frame-pair", "0,5",
               "--out", str(out)) == 0
    summary = json.loads((out / "summary.json").read_text())
    assert abs(summary["mean_D"] - 1.47e-9) / 1.47e-9 < 0.01
    lines = (out / "fits.csv").read_text().strip().split("\n")
    assert lines[0] == "row,D,A,x0,r2"
    assert len(lines) == 4


def test_fit_diffusion_missing_sequence(tmp_path):
    assert run("fit-diffusion", "--dir", str(tmp_path),
               "--out", str(tmp_path / "o")) == 3
