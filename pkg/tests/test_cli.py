import json

import numpy as np
import pytest

from fixorder import plants
from fixorder.cli import main
from fixorder.statespace import StateSpaceModel, tf_to_ss


@pytest.fixture
def k2_file(tmp_path):
    path = tmp_path / "k2.json"
    path.write_text(tf_to_ss(plants.GAHINET_K2.to_rational()).to_json())
    return str(path)


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_abscissa_of_open_loop_two_mass(capsys):
    code, out, _ = run(capsys, "abscissa", "--plant", "two_mass_spring")
    assert code == 0
    first = out.splitlines()[0]
    assert first.startswith("spectral abscissa:")
    assert abs(float(first.split(":")[1])) < 1e-6


def test_norm_closed_with_controller(capsys, k2_file):
    code, out, _ = run(capsys, "norm", "--plant", "gahinet_order_drop", "--close-with", k2_file)
    assert code == 0
    val = float(out.splitlines()[0].split(":")[1])
    assert val == pytest.approx(21.5284, rel=1e-2)


def test_digits_controls_precision(capsys, k2_file):
    _, out, _ = run(capsys, "norm", "--plant", "gahinet_order_drop", "--close-with", k2_file,
                    "--digits", "3")
    assert out.splitlines()[0] == "H-infinity norm: 21.6"


def test_zpk_four_disk_p33(capsys):
    code, out, _ = run(capsys, "zpk", "--plant", "four_disk", "--out", "3", "--in", "3")
    assert code == 0
    assert "s^2" in out


def test_zpk_channel_out_of_range(capsys):
    code, _, err = run(capsys, "zpk", "--plant", "four_disk", "--out", "9")
    assert code == 1 and "ConfigError" in err


def test_step_csv(capsys, tmp_path, k2_file):
    path = tmp_path / "step.csv"
    code, _, _ = run(capsys, "step", "--plant", "gahinet_order_drop", "--close-with", k2_file,
                     "--t-final", "1", "--samples", "11", "--output", str(path))
    assert code == 0
    lines = path.read_text().splitlines()
    header = lines[0].split(",")
    assert header[:2] == ["t", "y1_u1"] and header[-1] == "y3_u3"
    assert len(header) == 10 and len(lines) == 12
    assert float(lines[-1].split(",")[0]) == pytest.approx(1.0)


def _write(tmp_path, name, sys_):
    p = tmp_path / name
    p.write_text(sys_.to_json())
    return p


def test_sigma_csv_stdout(capsys):
    code, out, _ = run(capsys, "sigma", "--plant", "kwakernaak_sensitivity", "--points", "5",
                       "--wmin", "0.1", "--wmax", "1")
    # open-loop plant has poles at 2 and 3, not on the axis, so sigma is finite
    assert code == 0
    lines = out.splitlines()
    assert lines[0].startswith("omega,sv1")
    assert len(lines) == 6
    assert float(lines[1].split(",")[0]) == pytest.approx(0.1)


def test_sigma_on_pole_is_runtime_error(capsys, tmp_path):
    integ = _write(tmp_path, "integ.json", StateSpaceModel([[0.0]], [[1.0]], [[1.0]], [[0.0]]))
    code, _, err = run(capsys, "sigma", "--plant", str(integ), "--wmin", "1", "--wmax", "1",
                       "--points", "1")
    assert code == 0          # pole at 0 is off the requested grid
    code, _, err = run(capsys, "sigma", "--plant", str(_write(
        tmp_path, "osc.json", StateSpaceModel([[0.0, 1.0], [-1.0, 0.0]], [[0.0], [1.0]],
                                              [[1.0, 0.0]], [[0.0]]))),
        "--wmin", "1", "--wmax", "1", "--points", "1")
    assert code == 1 and "SingularFrequencyError" in err


def test_synth_writes_controller(capsys, tmp_path):
    path = tmp_path / "k.json"
    code, out, _ = run(capsys, "synth", "--plant", "ac1_sof", "--order", "0",
                       "--objective", "+", "--starts", "1", "--seed", "5",
                       "--output", str(path))
    assert code == 0
    assert "found a stabilizing controller" in out
    assert "seed: 5" in out
    K = StateSpaceModel.from_json(path.read_text())
    assert K.n == 0 and K.D.shape == (3, 3)
    code, out, _ = run(capsys, "abscissa", "--plant", "ac1_sof", "--close-with", str(path))
    assert float(out.splitlines()[0].split(":")[1]) < 0


def test_synth_siso_prints_zpk_and_tf(capsys):
    code, out, _ = run(capsys, "synth", "--plant", "kwakernaak_sensitivity", "--order", "1",
                       "--starts", "1", "--max-iters", "30")
    assert code == 0
    assert "zero/pole/gain:" in out and "transfer function:" in out
    assert '"A"' in out            # JSON to stdout when no --output


def test_seed_from_environment(capsys, monkeypatch):
    monkeypatch.setenv("FIXORDER_SEED", "11")
    _, out, _ = run(capsys, "synth", "--plant", "ac1_sof", "--order", "0", "--objective", "+",
                    "--starts", "1")
    assert "seed: 11" in out
    monkeypatch.setenv("FIXORDER_SEED", "eleven")
    with pytest.raises(SystemExit) as info:
        main(["synth", "--plant", "ac1_sof", "--order", "0"])
    assert info.value.code == 2


def test_explicit_seed_overrides_environment(capsys, monkeypatch):
    monkeypatch.setenv("FIXORDER_SEED", "11")
    _, out, _ = run(capsys, "synth", "--plant", "ac1_sof", "--order", "0", "--objective", "+",
                    "--starts", "1", "--seed", "4")
    assert "seed: 4" in out


def test_same_seed_same_output(capsys):
    args = ("synth", "--plant", "two_mass_spring", "--order", "2", "--objective", "s",
            "--starts", "1", "--seed", "3", "--max-iters", "40")
    _, a, _ = run(capsys, *args)
    _, b, _ = run(capsys, *args)
    assert a == b


def test_unknown_plant_exit_1(capsys):
    code, _, err = run(capsys, "norm", "--plant", "nonexistent")
    assert code == 1
    assert "ConfigError" in err and "himat" in err


def test_bad_json_exit_1(capsys, tmp_path):
    p = tmp_path / "bad.json"
    p.write_text('{"A": [[1, 2]]}')
    code, _, err = run(capsys, "abscissa", "--plant", str(p))
    assert code == 1 and "PlantFormatError" in err


@pytest.mark.parametrize("argv", [
    ["synth", "--plant", "ac1_sof", "--order", "-1"],
    ["synth", "--plant", "ac1_sof", "--order", "1", "--starts", "0"],
    ["synth", "--plant", "ac1_sof", "--order", "1", "--objective", "x"],
    ["step", "--plant", "ac1_sof", "--samples", "1"],
    ["sigma", "--plant", "ac1_sof", "--wmin", "10", "--wmax", "1"],
    ["norm", "--plant", "ac1_sof", "--tol", "0"],
    [],
])
def test_usage_errors_exit_2(argv, capsys):
    with pytest.raises(SystemExit) as info:
        main(argv)
    assert info.value.code == 2


def test_bench_ac1(capsys, tmp_path):
    out_json = tmp_path / "report.json"
    code, out, _ = run(capsys, "bench", "--case", "ac1_sof", "--output", str(out_json),
                       "--artifacts", str(tmp_path), "--strict")
    assert code == 0
    d = json.loads(out_json.read_text())
    assert d["passed"] and d["cases"][0]["outcomes"][0]["seed"] == 1729


def test_bench_unknown_case_fails_before_running(capsys):
    code, _, err = run(capsys, "bench", "--case", "ac1_sof", "--case", "nope")
    assert code == 1 and "ConfigError" in err
