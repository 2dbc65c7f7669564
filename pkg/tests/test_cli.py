from pathlib import Path

import numpy as np
import pytest

from dpsqkd.cli import ConfigError, main, parse_grid, parse_mean_policy, read_config

GOLDEN = Path(__file__).parent / "golden"


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, out


def rows(text):
    lines = [l for l in text.splitlines() if not l.startswith("#")]
    return lines[0].split(","), [l.split(",") for l in lines[1:]]


def test_grid_grammar():
    assert np.allclose(parse_grid("0:2:3"), [0, 1, 2])
    assert np.allclose(parse_grid("log:1e-3:1e-1:3"), [1e-3, 1e-2, 1e-1])
    assert np.allclose(parse_grid("6"), [6])
    for bad in ["0:1", "1:0:0", "log:0:1:3", "a:b:c", "log:1:2"]:
        with pytest.raises(ConfigError):
            parse_grid(bad)


def test_mean_policies():
    assert parse_mean_policy("optimize")[0] == "optimize"
    assert parse_mean_policy("sqrt:0.0465") == ("sqrt", 0.0465)
    with pytest.raises(ConfigError):
        parse_mean_policy("linear:-1")
    with pytest.raises(ConfigError):
        parse_mean_policy("quadratic:1")


def test_config_file_and_flag_override(tmp_path, capsys):
    cfg = tmp_path / "sweep.cfg"
    cfg.write_text("# vacuum line\nn = 4\nnu = 0\nlambda = 0:2:5\n")
    assert read_config(str(cfg))["lambda"] == "0:2:5"
    code, out = run(capsys, "omega", "--config", str(cfg), "--lambda", "0:2:3", "--output", "-")
    assert code == 0
    assert "# lambda = 0:2:3" in out
    _, body = rows(out)
    assert len(body) == 3


def test_omega_vacuum_rows(capsys):
    code, out = run(capsys, "omega", "--n", "4", "--nu", "0", "--lambda", "0:2:3", "--output", "-")
    assert code == 0
    header, body = rows(out)
    assert header[:2] == ["lambda", "omega"]
    assert [(float(r[0]), float(r[1])) for r in body] == [(0, 0.5), (1, 0), (2, -0.5)]


def test_omega_single_photon_at_six(capsys):
    _, out = run(capsys, "omega", "--n", "9", "--nu", "1", "--lambda", "6:6:1", "--output", "-")
    _, body = rows(out)
    assert len(body) == 1 and abs(float(body[0][1])) < 1e-10


def test_omega_full_grid(capsys):
    code, out = run(capsys, "omega", "--n", "9", "--nu", "2", "--lambda", "0:12:2401", "--output", "-")
    assert code == 0 and "# convexity: ok" in out
    _, body = rows(out)
    assert len(body) == 2401
    assert {r[3] for r in body} == {"plus", "minus"}


def test_region_sentinel_and_slope(capsys):
    _, out = run(capsys, "region", "--n", "4", "--nu", "3", "--lambda", "0:12:121", "--output", "-")
    _, body = rows(out)
    assert body == [["3", "nan", "nan", "all_achievable"]]
    _, out = run(capsys, "region", "--n", "9", "--nu", "1", "--output", "-")
    _, body = rows(out)
    pts = np.array([[float(r[1]), float(r[2])] for r in body])
    es = np.linspace(0.001, 5 / 34, 50)
    assert np.allclose(np.interp(es, pts[:, 0], pts[:, 1]) / es, 6, atol=1e-8)


def test_output_directory_env(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("DPSQKD_OUTPUT_DIR", str(tmp_path / "out"))
    assert main(["omega", "--n", "4", "--nu", "0", "--lambda", "0:1:2"]) == 0
    assert (tmp_path / "out" / "omega.csv").read_text().startswith("# dpsqkd")


@pytest.mark.parametrize(
    "argv",
    [
        ["omega", "--n", "2", "--nu", "1", "--output", "-"],
        ["omega", "--n", "9", "--output", "-"],
        ["omega", "--n", "9", "--nu", "1", "--lambda", "1:0:3", "--output", "-"],
        ["keyrate", "--n", "9", "--e", "0.03", "--mean", "fixed:-1", "--output", "-"],
        ["omega", "--config", "/nonexistent/file", "--output", "-"],
        ["nosuchcommand"],
    ],
)
def test_invalid_configuration_exit_code(argv, capsys):
    assert main(argv) == 2


def test_verify_passes_and_mutation_fails(capsys):
    code, out = run(capsys, "verify", "--n", "5", "--output", "-")
    assert code == 0
    _, body = rows(out)
    assert {r[0] for r in body} >= {"conjugation", "oracle_equivalence", "chain", "saturation"}
    assert all(r[-1] == "pass" for r in body)
    code, _ = run(capsys, "verify", "--n", "5", "--mutate", "--output", "-")
    assert code == 1


def test_keyrate_golden(capsys):
    code, out = run(
        capsys, "keyrate", "--n", "9", "--e", "0.03", "--nubar", "1,3",
        "--eta", "log:1e-3:1e-1:5", "--mean", "fixed:0.02", "--output", "-",
    )
    assert code == 0
    assert out == (GOLDEN / "keyrate_n9_e003.csv").read_text()


def test_asymptotic_golden_and_thresholds(capsys):
    _, out = run(capsys, "asymptotic", "--n", "9", "--e", "0:0.04:5", "--output", "-")
    assert out == (GOLDEN / "asymptotic_n9.csv").read_text()
    header, body = rows(out)
    assert abs(float(body[0][header.index("e_max_two")]) - 0.0112) < 5e-4
    assert abs(float(body[0][header.index("e_max_single")]) - 0.0375) < 5e-4


def test_byte_identical_across_worker_counts(capsys):
    base = ["keyrate", "--n", "9", "--e", "0.02", "--nubar", "1,2", "--eta", "log:1e-3:1e-1:4",
            "--mean", "linear:0.0987", "--output", "-"]
    outs = [run(capsys, *base, "--workers", str(w))[1] for w in (1, 2, 3)]
    assert outs[0] == outs[1] == outs[2]
