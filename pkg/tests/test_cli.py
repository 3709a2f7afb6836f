import contextlib
import io
import json

import numpy as np
import pytest

from hfh import cli

MEDIUM = {
    "cell": [1.0],
    "kind": "scalar",
    "cutoff": 16,
    "a": {"type": "piecewise", "breaks": [0.0, 0.5], "values": [1.0, 4.0]},
    "b": {"type": "constant", "value": 1.0},
}


@pytest.fixture()
def config(tmp_path):
    path = tmp_path / "medium.json"
    path.write_text(json.dumps(MEDIUM))
    return str(path)


def run_cli(argv):
    out = io.StringIO()
    with contextlib.redirect_stdout(out):
        code = cli.main(argv)
    return code, out.getvalue()


def test_bands_command_writes_csv(config, tmp_path):
    out = tmp_path / "bands.csv"
    code, _ = run_cli(["bands", "--config", config, "--k-start", "0.1", "--k-end", "3.04",
                       "--samples", "50", "--band", "1", "--out", str(out)])
    assert code == 0
    lines = out.read_text().splitlines()
    header_at = next(i for i, ln in enumerate(lines) if not ln.startswith("#"))
    assert lines[header_at] == "k_1,omega,band,gap"
    assert len(lines) - header_at - 1 == 50


def test_effective_matches_groupvel(config, tmp_path):
    prefix = str(tmp_path / "eff")
    gv_out = tmp_path / "gv.csv"
    code, _ = run_cli(["effective", "--config", config, "--k", "1.5707963267948966",
                       "--band", "1", "--out-prefix", prefix])
    assert code == 0
    code, _ = run_cli(["groupvel", "--config", config, "--k", "1.5707963267948966",
                       "--band", "1", "--out", str(gv_out)])
    assert code == 0
    eff = json.loads((tmp_path / "eff.json").read_text())
    gv_line = [ln for ln in gv_out.read_text().splitlines() if not ln.startswith("#")][1]
    v_fd = float(gv_line.split(",")[1])
    assert abs(eff["group_velocity"][0] - v_fd) < 1e-6


def test_couple_command(config, tmp_path):
    out = tmp_path / "decay.csv"
    code, msg = run_cli(["couple", "--config", config, "--k", "1.5707963267948966",
                         "--m", "1.0", "--bands", "1,1",
                         "--supercells", "4,8,16,32", "--out", str(out)])
    assert code == 0
    text = out.read_text()
    assert "# resonant=False" in text
    rows = [ln for ln in text.splitlines() if not ln.startswith("#")]
    assert rows[0] == "n,j,p,l,re_avg,im_avg,abs_avg"
    assert len(rows) - 1 == 4 * 2 * 2 * 2  # n x j x p x l


def test_ergodic_command(tmp_path):
    spec = {
        "op": "modulated_1d",
        "f": {"period": 1.0, "harmonics": [{"n": -1, "re": 1.0}]},
        "b": 2 * np.pi,
        "windows": [10.0, 20.0, 40.0],
    }
    spec_path = tmp_path / "spec.json"
    spec_path.write_text(json.dumps(spec))
    out = tmp_path / "erg.csv"
    code, _ = run_cli(["ergodic", "--spec", str(spec_path), "--out", str(out)])
    assert code == 0
    text = out.read_text()
    assert "# limit_re=1" in text
    rows = [ln for ln in text.splitlines() if not ln.startswith("#")]
    assert rows[0] == "window,re_avg,im_avg,abs_err_vs_limit"


def test_simulate_command(tmp_path):
    coarse = dict(MEDIUM, cutoff=8)
    config = tmp_path / "coarse.json"
    config.write_text(json.dumps(coarse))
    prefix = str(tmp_path / "run")
    code, _ = run_cli(["simulate", "--config", str(config), "--k", "1.5707963267948966",
                       "--band", "1", "--epsilon", "0.125", "--sigma", "0.4",
                       "--center", "2.0", "--length", "8.0", "--points-per-cell", "32",
                       "--t-final", "2.0", "--out-prefix", prefix])
    assert code == 0
    meta = json.loads((tmp_path / "run_run.json").read_text())
    assert meta["stable"] is True
    assert meta["relative_error"] < 0.05
    frames = (tmp_path / "run_frames.csv").read_text().splitlines()
    header_at = next(i for i, ln in enumerate(frames) if not ln.startswith("#"))
    assert frames[header_at] == "t,centroid,mass,peak"


def test_exit_codes(config, tmp_path):
    code, _ = run_cli(["nonsense"])
    assert code == 64

    broken = tmp_path / "broken.json"
    broken.write_text("{not json")
    code, _ = run_cli(["bands", "--config", str(broken), "--k-start", "0",
                       "--k-end", "1", "--out", str(tmp_path / "x.csv")])
    assert code == 1

    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"cell": [1.0], "kind": "fluid", "cutoff": 4}))
    code, _ = run_cli(["bands", "--config", str(bad), "--k-start", "0",
                       "--k-end", "1", "--out", str(tmp_path / "x.csv")])
    assert code == 1

    # degenerate stencil point -> numerical failure
    const = tmp_path / "const.json"
    const.write_text(json.dumps({"cell": [1.0], "kind": "scalar", "cutoff": 1,
                                 "a": 1.0, "b": 1.0}))
    code, _ = run_cli(["groupvel", "--config", str(const), "--k", "0.0", "--band", "2",
                       "--cutoff", "4", "--out", str(tmp_path / "gv.csv")])
    assert code == 2


def test_outputs_are_deterministic(config, tmp_path):
    args = ["bands", "--config", config, "--k-start", "0.1", "--k-end", "3.0",
            "--samples", "20", "--band", "1"]
    outs = []
    for i in (0, 1):
        out = tmp_path / f"bands{i}.csv"
        code, _ = run_cli(args + ["--out", str(out)])
        assert code == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]
