import json
import os
import subprocess
from pathlib import Path

import pytest

BIN = os.environ.get("SPECKLE_PSD_BIN", "speckle-psd")


def run(*args):
    out = subprocess.run([BIN, *map(str, args)], capture_output=True, text=True)
    assert out.returncode == 0, out.stderr
    return out.stdout


def write_band_psd(path: Path, lo: float, hi: float, n_bins=192, r_min=50.0, r_max=1000.0):
    h = (r_max - r_min) / n_bins
    rows = ["r_um,value"]
    for i in range(n_bins):
        r = r_min + (i + 0.5) * h
        rows.append(f"{r},{1.0 if lo <= r <= hi else 0.0}")
    path.write_text("\n".join(rows) + "\n")
    path.with_suffix(".json").write_text(
        json.dumps({"r_min": r_min, "r_max": r_max, "n_bins": n_bins, "basis": "number", "kind": "psd"})
    )


def test_pipeline(tmp_path):
    psd = tmp_path / "psd.csv"
    write_band_psd(psd, 150, 200)
    frames = tmp_path / "frames"
    run("simulate", "--psd", psd, "--frames", 60, "--seed", 5, "--out", frames)
    assert len(list(frames.glob("*.f32"))) == 60
    profiles = tmp_path / "profiles"
    run("autocorr", "--frames", frames, "--window", 50, "--step", 10, "--out", profiles)
    windows = sorted(profiles.glob("window_*.csv"))
    assert len(windows) == 2
    meta = json.loads(windows[0].with_suffix(".json").read_text())
    assert meta["frames_averaged"] == 50

    out = run("estimate", "--profile", windows[0], "--out", tmp_path / "cum.csv", "--max-iters", 200)
    assert "loss" in out
    values = [float(line.split(",")[1]) for line in (tmp_path / "cum.csv").read_text().splitlines()[1:]]
    assert len(values) == 192
    assert values[-1] == 1.0
    assert all(b >= a for a, b in zip(values, values[1:]))


def test_forward_and_dataset(tmp_path):
    psd = tmp_path / "psd.csv"
    write_band_psd(psd, 300, 340)
    optics = tmp_path / "optics.json"
    optics.write_text(json.dumps({"lambda_nm": 532, "f3_mm": 250, "D_mm": 4.8, "n_u_samples": 128, "u_max_per_um": 0.02}))
    run("forward", "--psd", psd, "--config", optics, "--out", tmp_path / "prof.csv")
    rows = (tmp_path / "prof.csv").read_text().splitlines()
    assert rows[0] == "u_per_um,value"
    assert len(rows) == 129
    assert float(rows[1].split(",")[1]) == pytest.approx(1.0)

    ds = tmp_path / "ds"
    run("dataset", "--n", 3, "--seed", 7, "--out", ds, "--config", optics)
    assert len(list(ds.glob("entry_*_profile.csv"))) == 3
    again = tmp_path / "ds2"
    run("dataset", "--n", 3, "--seed", 7, "--out", again, "--config", optics)
    assert (ds / "entry_000001_profile.csv").read_text() == (again / "entry_000001_profile.csv").read_text()

    prof_dir = tmp_path / "stream"
    prof_dir.mkdir()
    for i in range(3):
        src = ds / f"entry_{i:06d}_profile.csv"
        (prof_dir / f"p{i}.csv").write_text(src.read_text())
        if src.with_suffix(".json").exists():
            (prof_dir / f"p{i}.json").write_text(src.with_suffix(".json").read_text())
    run("timelapse", "--profiles", prof_dir, "--out", tmp_path / "psd_map.csv")
    rows = (tmp_path / "psd_map.csv").read_text().splitlines()
    assert rows[0] == "frame_index,r_um,density"
    assert len(rows) == 1 + 3 * 64


def test_bad_input_reports_error(tmp_path):
    out = subprocess.run([BIN, "estimate", "--profile", tmp_path / "missing.csv", "--out", tmp_path / "x.csv"],
                         capture_output=True, text=True)
    assert out.returncode == 1
    assert out.stderr.startswith("error:")
