import json
import os

import numpy as np
import pytest

from pimd_kubo.errors import ConfigError
from pimd_kubo.runner import main, parse_config, run

MINIMAL_STATIC = """\
[model]
kind = harmonic

[thermo]
beta = 1.0
n_beads = 8

[sampler]
n_samples = 640
burn_in = 64
decorrelation_stride = 2

[run]
command = static
seed = 7
output_dir = {out}
a = q2
"""

SMALL_COMPARE = """\
# small harmonic compare run
[model]
kind = harmonic
mass = 1.0
omega = 1.0

[thermo]
beta = 1.0
n_beads = 8

[sampler]
n_samples = 768
burn_in = 64
decorrelation_stride = 2

[integrator]
dt = 0.05
n_steps = 60

[oracle]
q_min = -12.0
q_max = 12.0
n_points = 640
n_retained = 32

[run]
command = compare
seed = 12
output_dir = {out}
a = q
b = q
"""


def test_parse_minimal_defaults(tmp_path):
    cfg = parse_config(MINIMAL_STATIC.format(out=tmp_path / "o"))
    assert cfg.command == "static"
    assert cfg.sections["thermo"]["hbar"] == 1.0
    assert cfg.sections["sampler"]["target_acceptance"] == 0.4
    assert cfg.sections["run"]["blocks"] == 16
    model = cfg.model()
    assert model.kind == "harmonic" and model.mass == 1.0


def test_parse_unknown_key_names_line():
    text = "[model]\nkind = harmonic\nomeg = 1\n"
    with pytest.raises(ConfigError) as err:
        parse_config(text)
    assert "omeg" in str(err.value)
    assert "line 3" in str(err.value)


def test_parse_unknown_section():
    with pytest.raises(ConfigError) as err:
        parse_config("[banana]\nx = 1\n")
    assert "line 1" in str(err.value)


def test_parse_rejects_wrong_kind_keys():
    text = "[model]\nkind = harmonic\na4 = 2.0\n[thermo]\nbeta=1.0\nn_beads=4\n" \
           "[sampler]\nn_samples=64\n[run]\ncommand = static\nseed = 1\noutput_dir = x\n"
    cfg = parse_config(text)
    with pytest.raises(ConfigError) as err:
        cfg.model()
    assert "a4" in str(err.value)


def test_invalid_invariant_cited(tmp_path):
    text = MINIMAL_STATIC.format(out=tmp_path).replace("n_beads = 8", "n_beads = 0")
    cfg = parse_config(text)
    status = run(cfg)
    assert status == 2


def test_missing_section_for_command():
    with pytest.raises(ConfigError) as err:
        parse_config("[run]\ncommand = rpmd\nseed = 1\noutput_dir = x\n")
    assert "requires section" in str(err.value)


def test_static_run_writes_artifacts(tmp_path):
    out = tmp_path / "out"
    cfg = parse_config(MINIMAL_STATIC.format(out=out))
    assert run(cfg) == 0
    assert (out / "results.csv").exists()
    meta = json.loads((out / "meta.json").read_text())
    assert meta["command"] == "static"
    assert "mean" in meta["stats"]
    # value is a plausible <q2> at beta=1, N=8
    line = (out / "results.csv").read_text().splitlines()[1]
    val = float(line.split(",")[1])
    assert 0.9 < val < 1.3


def test_malformed_config_exits_2_no_artifacts(tmp_path):
    out = tmp_path / "nothing"
    bad = MINIMAL_STATIC.format(out=out).replace("[model]\nkind = harmonic\n\n", "")
    with pytest.raises(ConfigError):
        parse_config(bad)
    assert not out.exists()


def test_main_exit_codes(tmp_path):
    good = tmp_path / "good.ini"
    good.write_text(MINIMAL_STATIC.format(out=tmp_path / "out"))
    assert main([str(good), "--quiet"]) == 0

    bad = tmp_path / "bad.ini"
    bad.write_text("[model]\nomeg = 1\n")
    assert main([str(bad), "--quiet"]) == 2

    assert main([str(tmp_path / "missing.ini"), "--quiet"]) == 2


def test_compare_writes_diff_and_stats(tmp_path):
    out = tmp_path / "cmp"
    cfg = parse_config(SMALL_COMPARE.format(out=out))
    assert run(cfg) == 0
    meta = json.loads((out / "meta.json").read_text())
    assert meta["stats"]["max_diff_over_se"] <= 3.0
    diff = np.loadtxt(out / "diff.csv", delimiter=",", skiprows=1)
    assert diff.shape[1] == 5


def test_rerun_byte_identical(tmp_path):
    out1, out2 = tmp_path / "r1", tmp_path / "r2"
    for out in (out1, out2):
        cfg = parse_config(SMALL_COMPARE.format(out=out))
        assert run(cfg) == 0
    assert (out1 / "results.csv").read_bytes() == (out2 / "results.csv").read_bytes()
    assert (out1 / "diff.csv").read_bytes() == (out2 / "diff.csv").read_bytes()


def test_worker_count_invariance(tmp_path, monkeypatch):
    blobs = {}
    for w in ("1", "3"):
        out = tmp_path / f"w{w}"
        monkeypatch.setenv("PIMD_KUBO_THREADS", w)
        cfg = parse_config(SMALL_COMPARE.format(out=out))
        assert run(cfg) == 0
        blobs[w] = (out / "results.csv").read_bytes()
    assert blobs["1"] == blobs["3"]


def test_runtime_error_exit_3(tmp_path):
    # CMD run whose tabulated range cannot contain the sampled trajectories
    text = SMALL_COMPARE.format(out=tmp_path / "ge").replace(
        "command = compare", "command = cmd").replace(
        "[oracle]", "[oracle]\n# unused\n")
    text += "table_min = -0.2\ntable_max = 0.2\ntable_nodes = 5\n"
    cfg = parse_config(text)
    status = run(cfg)
    assert status == 3
    assert not (tmp_path / "ge" / "results.csv").exists()


def test_no_writes_outside_output_dir(tmp_path, monkeypatch):
    workdir = tmp_path / "cwd"
    workdir.mkdir()
    monkeypatch.chdir(workdir)
    out = tmp_path / "only_here"
    cfg = parse_config(MINIMAL_STATIC.format(out=out))
    assert run(cfg) == 0
    assert os.listdir(workdir) == []


def test_spectrum_command(tmp_path):
    out = tmp_path / "spec"
    text = SMALL_COMPARE.format(out=out).replace("command = compare", "command = spectrum")
    text += "method = oracle\nwindow = hann\n"
    cfg = parse_config(text)
    assert run(cfg) == 0
    data = np.loadtxt(out / "results.csv", delimiter=",", skiprows=1)
    # t column holds angular frequency; peak near omega = 1
    peak = data[np.argmax(data[:, 1]), 0]
    assert abs(peak - 1.0) <= 2.0 * (data[1, 0] - data[0, 0])


def test_convergence_command(tmp_path):
    out = tmp_path / "conv"
    text = SMALL_COMPARE.format(out=out).replace("command = compare", "command = convergence")
    text = text.replace("n_samples = 256", "n_samples = 20000")
    text += "n_values = 4,8\n"
    cfg = parse_config(text)
    assert run(cfg) == 0
    meta = json.loads((out / "meta.json").read_text())
    assert meta["stats"]["exact"] == pytest.approx(1.08198, abs=1e-4)
    assert len(meta["stats"]["errors"]) == 2


def test_ensemble_dump(tmp_path):
    out = tmp_path / "ens"
    text = MINIMAL_STATIC.format(out=out) + "dump_ensemble = true\n"
    cfg = parse_config(text)
    assert run(cfg) == 0
    header = (out / "ensemble.csv").read_text().splitlines()[0]
    assert header == ",".join(f"x_{k}" for k in range(1, 9))


def test_trajectory_dump(tmp_path):
    out = tmp_path / "traj"
    text = SMALL_COMPARE.format(out=out).replace("command = compare", "command = rpmd")
    text += "dump_trajectory = true\n"
    cfg = parse_config(text)
    assert run(cfg) == 0
    header = (out / "trajectory.csv").read_text().splitlines()[0]
    assert header.startswith("t,x0,p0")
