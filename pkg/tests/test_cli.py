import io
import math
import subprocess
import sys

import numpy as np
import pytest

from kicktops import experiments, kernels
from kicktops.cli import main
from kicktops.config import ConfigError, build_config, ensemble_rule, parse_config_text


def run_cli(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def blocks(text):
    """Parse the CSV document into {block name: list of rows (strings)}."""
    out, name, header = {}, None, False
    for line in text.splitlines():
        if line.startswith("# block: "):
            name, header = line[len("# block: "):], True
            out[name] = []
        elif line.startswith("#") or name is None:
            continue
        elif header:
            header = False
        else:
            out[name].append(line.split(","))
    return out


def test_config_defaults_and_presets():
    assert (build_config().s, build_config().l) == (20, 22)
    full = build_config("paper")
    assert (full.s, full.l) == (140, 154)
    assert full.angles_rad()[0] == pytest.approx(math.radians(20))
    assert full.ensemble_size() == ensemble_rule(140, 154)


def test_config_precedence(tmp_path):
    f = tmp_path / "run.cfg"
    f.write_text("# comment\npreset = paper\nsteps=7\ngamma = 1.215  # trailing\nwindow=3:9\n")
    values = parse_config_text(f.read_text())
    cfg = build_config(None, values, {"steps": 4})
    assert (cfg.s, cfg.l, cfg.steps, cfg.gamma, cfg.window) == (140, 154, 4, 1.215, (3, 9))


def test_ratio_derives_s():
    cfg = build_config(None, None, {"l": 44, "r": 1.1})
    assert cfg.s == 40 and not cfg.warnings
    mismatch = build_config(None, None, {"s": 10, "l": 44, "r": 1.1})
    assert mismatch.warnings


@pytest.mark.parametrize(
    "overrides",
    [{"theta_s": 400.0}, {"theta_l": 200.0}, {"steps": -1}, {"ensemble": 0}, {"s": 2.3},
     {"observables": ("sz",)}, {"window": (9, 3)}, {"gamma": -1.0}],
)
def test_invalid_config_rejected(overrides):
    with pytest.raises(ConfigError):
        build_config(None, None, overrides)


def test_config_text_errors():
    with pytest.raises(ConfigError):
        parse_config_text("steps\n")
    with pytest.raises(ConfigError):
        parse_config_text("bogus=1\n")
    with pytest.raises(ConfigError):
        parse_config_text("steps=abc\n")


def test_invalid_config_exit_code(capsys):
    code, out, err = run_cli(capsys, "quantum", "--theta-s", "400")
    assert code == 2 and out == "" and "theta_s" in err
    code, _, err = run_cli(capsys, "quantum", "--config", "/nonexistent/file")
    assert code == 2


def test_header_echoes_config(capsys):
    code, out, _ = run_cli(capsys, "microcanonical", "--s", "1", "--l", "2", "--seed", "17")
    assert code == 0
    head = [line for line in out.splitlines() if line.startswith("#")]
    assert head[0].startswith("# kicktops ")
    assert "# config seed=17" in head and "# config s=1" in head


def test_microcanonical_command(capsys):
    code, out, _ = run_cli(capsys, "microcanonical", "--s", "1", "--l", "2")
    b = blocks(out)
    jz = {int(m): float(p) for m, p in b["microcanonical observable=jz"]}
    assert jz == pytest.approx({-3: 1 / 15, -2: 2 / 15, -1: 0.2, 0: 0.2, 1: 0.2, 2: 2 / 15, 3: 1 / 15}, abs=1e-16)
    code, out, _ = run_cli(capsys, "microcanonical", "--preset", "paper")
    ent = {row[0]: float(row[1]) for row in blocks(out)["entropy"]}
    assert abs(ent["jz"] - 6.19) < 0.01
    assert ent["lz"] == pytest.approx(math.log(309), abs=1e-12)


def test_quantum_zero_steps(capsys):
    code, out, _ = run_cli(capsys, "quantum", "--s", "3", "--l", "4", "--steps", "0")
    b = blocks(out)
    assert code == 0
    assert sorted(b) == ["distribution observable=jz step=0", "distribution observable=lz step=0", "moments"]
    lz = np.array([float(p) for _, p in b["distribution observable=lz step=0"]])
    from kicktops.states import coherent_state

    np.testing.assert_allclose(lz, np.abs(coherent_state(4, math.radians(160), 0).amps) ** 2, atol=1e-16)


def test_quantum_half_integer_labels(capsys):
    code, out, _ = run_cli(capsys, "quantum", "--s", "1/2", "--l", "3/2", "--steps", "1", "--observable", "jz")
    labels = [row[0] for row in blocks(out)["distribution observable=jz step=1"]]
    assert labels == ["-2", "-1", "0", "1", "2"]
    code, out, _ = run_cli(capsys, "quantum", "--s", "1", "--l", "3/2", "--steps", "0", "--observable", "lz")
    labels = [row[0] for row in blocks(out)["distribution observable=lz step=0"]]
    assert labels == ["-1.5", "-0.5", "0.5", "1.5"]


def test_classical_single_point_is_delta(capsys):
    code, out, _ = run_cli(capsys, "classical", "--ensemble", "1", "--steps", "3", "--snapshots", "0,3")
    b = blocks(out)
    for name, rows in b.items():
        if name.startswith("distribution"):
            probs = np.array([float(r[1]) + 0 for r in rows])
            overflow = float(rows[0][2])
            assert probs.sum() + overflow == 1.0 and np.count_nonzero(probs) <= 1


def test_classical_uniform_matches_microcanonical(capsys):
    code, out, _ = run_cli(capsys, "classical", "--uniform", "true", "--ensemble", "400000",
                           "--steps", "2", "--snapshots", "2", "--observable", "lz")
    rows = blocks(out)["distribution observable=lz step=2"]
    probs = np.array([float(r[1]) for r in rows])
    expected = 1 / 45
    se = math.sqrt(expected * (1 - expected) / 400000)
    assert np.all(np.abs(probs[1:-1] - expected) < 4 * se)


def test_compare_zero_coupling_constant_lz_entropy(capsys):
    code, out, _ = run_cli(capsys, "compare", "--gamma", "0", "--steps", "10", "--ensemble", "1000")
    rows = blocks(out)["series"]
    header = out.splitlines()[[i for i, l in enumerate(out.splitlines()) if l == "# block: series"][0] + 1].split(",")
    col = header.index("h_q_lz")
    h = np.array([float(r[col]) for r in rows])
    assert np.ptp(h) < 1e-12


def test_outputs_byte_identical(capsys, monkeypatch, tmp_path):
    args = ["compare", "--steps", "5", "--ensemble", "3000", "--snapshots", "5"]
    texts = []
    for threads in ("1", "2"):
        monkeypatch.setenv(kernels.THREADS_ENV, threads)
        path = tmp_path / f"out{threads}.csv"
        assert main(args + ["--out", str(path)]) == 0
        texts.append(path.read_bytes())
    capsys.readouterr()
    assert texts[0] == texts[1]
    assert b"# block: bins observable=jz step=5" in texts[0]


def test_lyapunov_command(capsys):
    code, out, _ = run_cli(capsys, "lyapunov", "--gamma", "0", "--grid", "5", "--lyap-steps", "1000")
    lam = np.array([float(r[4]) for r in blocks(out)["exponents"]])
    assert code == 0 and len(lam) == 5 and np.all(np.abs(lam) < 2e-3)


def test_scaling_synthetic(capsys):
    code, out, _ = run_cli(capsys, "scaling", "--synthetic-exponent", "-0.5", "--sizes", "11,22,44")
    b = blocks(out)
    assert code == 0
    fits = {r[0]: float(r[2]) for r in b["fit"]}
    assert fits["pure"] == pytest.approx(-0.5, abs=1e-12) and fits["reduced"] == pytest.approx(-0.5, abs=1e-12)
    assert [r[1] for r in b["records"]] == ["11", "22", "44"]
    assert [(r[3], r[4]) for r in b["records"]] == [("20", "60")] * 3


def test_scaling_needs_three_sizes(capsys):
    code, _, err = run_cli(capsys, "scaling", "--synthetic-exponent", "-0.5", "--sizes", "11,22")
    assert code == 2 and "3 sizes" in err


def test_failed_invariant_gives_nonzero_exit(capsys, monkeypatch):
    monkeypatch.setattr(experiments, "NORM_TOL", -1.0)
    code, out, err = run_cli(capsys, "quantum", "--s", "1", "--l", "1", "--steps", "1")
    assert code == 1 and "FAIL" in out and "FAILED" in err


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "kicktops", "microcanonical", "--s", "1", "--l", "1"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0 and "# block: entropy" in proc.stdout
    assert "wall_time_s=" in proc.stderr
