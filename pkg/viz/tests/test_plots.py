import json
import shutil
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest
from PIL import Image

VIZ_DIR = Path(__file__).resolve().parents[1]
HEATMAP = VIZ_DIR / "plot_heatmap.py"
PHASE = VIZ_DIR / "plot_phase.py"


def cli_command():
    exe = shutil.which("chiral-berry")
    if exe:
        return [exe]
    return [sys.executable, "-m", "chiral_berry.cli"]


def run_cli(command, config_path, out_dir):
    result = subprocess.run(
        cli_command() + [command, "--config", str(config_path), "--out", str(out_dir)],
        capture_output=True,
        text=True,
    )
    assert result.returncode == 0, result.stderr
    return out_dir


def run_script(script, *args):
    return subprocess.run(
        [sys.executable, str(script)] + [str(a) for a in args],
        capture_output=True,
        text=True,
    )


def manifest_entries(out_dir, kind):
    manifest = json.loads((Path(out_dir) / "manifest.json").read_text())
    return [e["name"] for e in manifest["files"] if e["kind"] == kind]


@pytest.fixture(scope="module")
def cli_outputs(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli_runs")
    configs = {
        "iso": {
            "model": {"type": "isotropic", "q": 1.0},
            "grid": {"n_theta": 16, "n_phi": 16},
            "loop": {"sweep": {"start": 0.4, "stop": 2.7, "count": 9}, "segments": 256},
        },
        "iso_single": {
            "model": {"type": "isotropic", "q": 1.0},
            "loop": {"theta0": 1.2, "segments": 256},
        },
        "demo": {"model": {"type": "chiral_demo"}, "grid": {"n_theta": 12, "n_phi": 16}},
        "zero": {"model": {"type": "zero"}, "grid": {"n_theta": 8, "n_phi": 8}},
    }
    outputs = {}
    for name, payload in configs.items():
        config_path = root / f"{name}.json"
        config_path.write_text(json.dumps(payload), encoding="utf-8")
        outputs[name] = {}
        for command in ("connection", "curvature", "phase"):
            if command == "phase" and "loop" not in payload:
                continue
            out_dir = root / f"{name}_{command}"
            run_cli(command, config_path, out_dir)
            outputs[name][command] = out_dir
    return outputs


def test_every_grid_csv_renders(cli_outputs, tmp_path):
    rendered = 0
    for name, runs in cli_outputs.items():
        for command, out_dir in runs.items():
            for filename in manifest_entries(out_dir, "grid"):
                png = tmp_path / f"{name}_{command}_{filename}.png"
                result = run_script(HEATMAP, out_dir / filename, png)
                assert result.returncode == 0, result.stderr
                assert png.exists() and png.stat().st_size > 0
                rendered += 1
    assert rendered >= 12  # two connection grids + four density grids per model


def test_phase_sweep_points_lie_on_cosine_overlay(cli_outputs, tmp_path):
    out_dir = cli_outputs["iso"]["phase"]
    import csv

    with open(out_dir / "phase.csv", newline="", encoding="utf-8") as handle:
        rows = list(csv.DictReader(handle))
    assert len(rows) == 9
    for row in rows:
        expected = 2.0 * np.pi * int(row["sigma"]) * float(row["isotropic_q"]) * np.cos(
            float(row["theta0"])
        )
        assert abs(float(row["raw"]) - expected) < 1e-6
    png = tmp_path / "phase_sweep.png"
    result = run_script(PHASE, out_dir / "phase.csv", png)
    assert result.returncode == 0, result.stderr
    assert png.exists() and png.stat().st_size > 0


def test_single_loop_renders_single_marker(cli_outputs, tmp_path):
    out_dir = cli_outputs["iso_single"]["phase"]
    png = tmp_path / "single.png"
    result = run_script(PHASE, out_dir / "phase.csv", png)
    assert result.returncode == 0, result.stderr
    assert png.exists()


def test_zero_grid_renders_uniform_midtone(cli_outputs, tmp_path):
    out_dir = cli_outputs["zero"]["curvature"]
    png = tmp_path / "zero.png"
    result = run_script(HEATMAP, out_dir / "density_total.csv", png)
    assert result.returncode == 0, result.stderr
    image = np.asarray(Image.open(png).convert("RGB"))
    center = image[image.shape[0] // 2 - 10 : image.shape[0] // 2 + 10,
                   image.shape[1] // 2 - 10 : image.shape[1] // 2 + 10]
    assert np.all(center == center[0, 0])  # uniform color inside the map


def test_malformed_csv_rejected(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("theta,phi,value\n1,2,3\n", encoding="utf-8")
    assert run_script(HEATMAP, bad, tmp_path / "x.png").returncode != 0
    ragged = tmp_path / "ragged.csv"
    ragged.write_text(
        "theta,phi,value_re,value_im,channel\n"
        "0.5,0.1,1.0,0.0,xi\n0.5,0.2,1.0,0.0,xi\n0.7,0.1,1.0,0.0,xi\n",
        encoding="utf-8",
    )
    assert run_script(HEATMAP, ragged, tmp_path / "y.png").returncode != 0


def test_phase_missing_column_rejected(cli_outputs, tmp_path):
    out_dir = cli_outputs["iso"]["phase"]
    lines = (out_dir / "phase.csv").read_text().splitlines()
    broken = tmp_path / "broken.csv"
    broken.write_text(
        "\n".join(",".join(line.split(",")[:-1]) for line in lines), encoding="utf-8"
    )
    assert run_script(PHASE, broken, tmp_path / "z.png").returncode != 0


def test_usage_errors(tmp_path):
    assert run_script(HEATMAP).returncode == 2
    assert run_script(PHASE, tmp_path / "only_one.csv").returncode == 2


def test_images_deterministic(cli_outputs, tmp_path):
    out_dir = cli_outputs["demo"]["curvature"]
    png1, png2 = tmp_path / "a.png", tmp_path / "b.png"
    assert run_script(HEATMAP, out_dir / "density_total.csv", png1).returncode == 0
    assert run_script(HEATMAP, out_dir / "density_total.csv", png2).returncode == 0
    assert png1.read_bytes() == png2.read_bytes()


def test_scripts_do_not_modify_inputs(cli_outputs, tmp_path):
    out_dir = cli_outputs["demo"]["curvature"]
    source = out_dir / "density_xi.csv"
    before = source.read_bytes()
    assert run_script(HEATMAP, source, tmp_path / "p.png").returncode == 0
    assert source.read_bytes() == before
