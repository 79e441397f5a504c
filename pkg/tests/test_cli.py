import csv
import hashlib
import io
import json
import math
import subprocess
import sys

import numpy as np
import pytest

import reference_values as ref
from ico_thermal import channels
from ico_thermal.channels import KrausChannel
from ico_thermal.cli import main
from ico_thermal.sweep import (
    CSV_HEADER,
    FIGURES,
    ConfigError,
    GridSpec,
    RunConfig,
    figure_rows,
    plot_script,
    render_csv,
    sweep_rows,
)


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def read_csv(text):
    assert text.startswith(CSV_HEADER + "\n")
    return list(csv.DictReader(io.StringIO(text)))


def test_cycle_definite(capsys):
    code, out, _ = run(capsys, "cycle", "--device", "definite", "--a", "0.7", "--b", "0.7",
                       "--beta-eps", "1.39")
    assert code == 0
    d = json.loads(out)
    assert d["mode"] == "Engine"
    assert d["merit"] == pytest.approx(ref.DEF_ENGINE_07["merit"], abs=1e-14)
    assert d["omega"] is None and len(d["strokes"]) == 3


def test_cycle_coherent_minus(capsys):
    code, out, _ = run(capsys, "cycle", "--control", "coherent-minus", "--a", "0.5",
                       "--theta", "1.5707963", "--beta-eps", "1.39")
    assert code == 0
    d = json.loads(out)
    assert d["mode"] == "Engine"
    assert d["merit"] == pytest.approx(0.5, abs=1e-12)
    assert d["branch_probability"] == pytest.approx(0.375, abs=1e-12)
    code, out_deg, _ = run(capsys, "cycle", "--control", "coherent-minus", "--a", "0.5",
                           "--theta-deg", "90", "--beta-eps", "1.39")
    assert json.loads(out_deg)["work"] == pytest.approx(ref.ICO_MINUS_HALF["work"], abs=1e-14)


@pytest.mark.parametrize("argv", [
    ["cycle", "--a", "1.5", "--beta-eps", "1.39"],
    ["cycle", "--a", "0.5"],
    ["cycle", "--control", "coherent-plus", "--a", "0.5", "--beta-eps", "1.39"],
    ["cycle", "--control", "coherent-plus", "--a", "0.5", "--theta", "4", "--beta-eps", "1.39"],
    ["cycle", "--device", "refrigerator", "--control", "incoherent", "--a", "0.5", "--theta", "0",
     "--beta-eps", "1"],
    ["cycle", "--device", "definite", "--control", "incoherent", "--a", "0.5", "--beta-eps", "1"],
    ["cycle", "--control", "incoherent", "--a", "0.5", "--b", "0.4", "--theta", "0", "--beta-eps", "1"],
    ["cycle", "--a", "0.5", "--beta-eps", "-1"],
    ["cycle", "--a", "0.5", "--beta-eps", "1", "--device", "toaster"],
    ["sweep", "--a", "0.5", "--beta-eps", "1"],
    ["sweep", "--grid-a", "0:1", "--beta-eps", "1"],
    ["sweep", "--grid-a", "0:1:1", "--beta-eps", "1"],
    ["sweep", "--grid-a", "0:2:5", "--beta-eps", "1"],
    ["sweep", "--grid-a", "0:1:3", "--beta-eps", "1", "--format", "xml"],
    ["sweep", "--grid-a", "0:1:3", "--beta-eps", "1", "--jobs", "0"],
    ["sweep", "--grid-a", "0:1:3", "--beta-eps", "1", "--emit-plot-script"],
    ["figure", "fig5"],
    ["verify", "--n", "0"],
])
def test_configuration_errors_exit_2(capsys, argv):
    code, out, err = run(capsys, *argv)
    assert code == 2
    assert err.startswith("ico-thermal ")
    assert out == ""


def test_config_file(tmp_path, capsys):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"beta_eps": 1.39, "control": "coherent-minus", "a": 0.5, "theta_deg": 90}))
    code, out, _ = run(capsys, "cycle", "--config", str(cfg))
    assert code == 0
    assert json.loads(out)["merit"] == pytest.approx(0.5, abs=1e-12)
    # flags override the file, including the angle given in the other unit
    code, out, _ = run(capsys, "cycle", "--config", str(cfg), "--theta", "0")
    assert json.loads(out)["branch_probability"] == pytest.approx(0.5, abs=1e-15)

    cfg.write_text(json.dumps({"beta_eps": 1.39, "a": 0.5, "theta": 1, "theta_deg": 90}))
    assert run(capsys, "cycle", "--config", str(cfg))[0] == 2
    cfg.write_text(json.dumps({"beta_eps": 1.39, "a": 0.5, "colour": "red"}))
    assert run(capsys, "cycle", "--config", str(cfg))[0] == 2
    cfg.write_text("{not json")
    assert run(capsys, "cycle", "--config", str(cfg))[0] == 2
    assert run(capsys, "cycle", "--config", str(tmp_path / "missing.json"))[0] == 2


def test_grid_spec():
    g = GridSpec.parse("0:1:5")
    assert g.values() == [0.0, 0.25, 0.5, 0.75, 1.0]
    assert GridSpec.parse({"min": 0, "max": math.pi, "n": 3}).values()[-1] == math.pi
    assert GridSpec.parse(f"0:{math.pi!r}:201").values()[-1] == math.pi
    with pytest.raises(ConfigError):
        GridSpec.parse("1:0:3")


def test_sweep_rows_and_format(tmp_path, capsys):
    out = tmp_path / "s.csv"
    code, _, _ = run(capsys, "sweep", "--control", "coherent-minus", "--beta-eps", "1.39",
                     "--grid-a", "0:1:21", "--grid-theta", f"0:{math.pi!r}:11", "--out", str(out))
    assert code == 0
    raw = out.read_bytes()
    assert b"\r" not in raw
    rows = read_csv(raw.decode("utf-8"))
    assert len(rows) == 21 * 11
    assert [float(r["a"]) for r in rows[:12]] == [0.0] * 11 + [0.05]
    for r in rows:
        assert r["branch"] == "-"
        assert (r["merit"] == "") == (r["mode"] == "OutOfRegime")
        if r["mode"] == "Engine":
            # the closed lower end of the engine interval is a zero-work engine
            assert float(r["work"]) < 0 or (float(r["work"]) == 0 and float(r["merit"]) == 0)
    # shortest round-trip repr of each double
    r = rows[0]
    assert float(r["q_hot"]) == float(repr(float(r["q_hot"])))


def test_sweep_json(capsys):
    code, out, _ = run(capsys, "sweep", "--device", "definite", "--beta-eps", "1.39",
                       "--grid-a", "0:1:5", "--format", "json")
    assert code == 0
    rows = json.loads(out)
    assert [r["a"] for r in rows] == [0.0, 0.25, 0.5, 0.75, 1.0]
    assert rows[2]["mode"] == "Engine" and rows[2]["branch"] == "def"


def test_sweep_determinism_across_jobs(tmp_path, capsys):
    hashes = set()
    for jobs in ("1", "1", "3"):
        out = tmp_path / f"s{jobs}.csv"
        run(capsys, "sweep", "--control", "incoherent", "--beta-eps", "1.39", "--grid-a", "0:1:13",
            "--grid-theta", "0:3:7", "--jobs", jobs, "--out", str(out))
        hashes.add(hashlib.sha256(out.read_bytes()).hexdigest())
    assert len(hashes) == 1


def test_unwritable_output(tmp_path, capsys):
    target = tmp_path / "no" / "such" / "dir" / "x.csv"
    code, _, err = run(capsys, "sweep", "--device", "definite", "--beta-eps", "1", "--grid-a", "0:1:3",
                       "--out", str(target))
    assert code == 2 and "cannot write" in err


def test_plot_script(tmp_path, capsys):
    out = tmp_path / "fig.csv"
    code, _, _ = run(capsys, "sweep", "--control", "coherent-plus", "--beta-eps", "1.39",
                     "--grid-a", "0:1:3", "--grid-theta", "0:1:3", "--out", str(out), "--emit-plot-script")
    assert code == 0
    script = (tmp_path / "fig.gp").read_text()
    assert "'fig.csv'" in script and "strcol(4) eq '+'" in script
    assert plot_script("x.csv", [("p", "p")], ["-"]).count("splot") == 1


def test_figure_presets():
    assert set(FIGURES) == {"fig4", "fig6", "fig7", "fig8", "fig9"}
    assert FIGURES["fig8"].beta_eps == 0.45
    assert all(FIGURES[k].beta_eps == 1.39 for k in ("fig4", "fig6", "fig7", "fig9"))


def test_fig6_interference_work():
    rows = figure_rows("fig6", grid_n=51)
    assert len(rows) == 2 * 51 * 51
    assert [r.branch for r in rows[:1]] == ["+"] and rows[-1].branch == "-"
    centre = [r for r in rows if r.a == 0.5 and abs(r.theta - math.pi / 2) < 1e-12]
    minus = [r for r in centre if r.branch == "-"][0]
    assert minus.work == pytest.approx(ref.ICO_MINUS_HALF["work"], abs=1e-12)
    assert minus.work != 0


def test_fig8_merit_is_non_negative():
    rows = figure_rows("fig8", grid_n=51)
    cooling = [r for r in rows if r.mode == "Refrigerator"]
    assert cooling
    assert all(r.omega < 0 and r.merit >= 0 for r in cooling)
    assert all(r.merit is None for r in rows if r.mode != "Refrigerator")


def test_fig9_is_incoherent():
    rows = figure_rows("fig9", grid_n=11)
    assert {r.branch for r in rows} == {"inc"}
    assert all(r.p is None for r in rows)
    assert all(r.work == pytest.approx(0.0, abs=1e-15) for r in rows if r.a == 0.5)


def test_run_config_validation():
    with pytest.raises(ConfigError):
        RunConfig(beta_eps=1.0, device="refrigerator", control="incoherent")
    cfg = RunConfig(beta_eps=1.0, device="definite", a=GridSpec(0, 1, 3), b=0.9)
    assert [r.mode for r in sweep_rows(cfg)][0] == "OutOfRegime"
    assert json.loads(json.dumps(cfg.to_dict()))["a"] == {"min": 0, "max": 1, "n": 3}
    assert render_csv([]) == CSV_HEADER + "\n"


def test_verify_command_deterministic(capsys):
    code1, out1, _ = run(capsys, "verify", "--seed", "7", "--n", "300")
    code2, out2, _ = run(capsys, "verify", "--seed", "7", "--n", "300")
    assert code1 == code2 == 0
    assert out1 == out2
    d = json.loads(out1)
    assert d["pass"] is True and d["seed"] == 7 and d["n_random"] == 300
    assert d["checks"] == {"no_work_from_equilibrium": True}


def test_verify_command_detects_corruption(capsys, monkeypatch):
    original = channels.kraus_meter_a

    def swapped(a):
        ops = np.array(original(a).stack)
        ops[0, 0, 0], ops[3, 1, 0] = ops[3, 1, 0], -ops[0, 0, 0]
        return KrausChannel(ops, "A")

    monkeypatch.setattr(channels, "kraus_meter_a", swapped)
    code, out, _ = run(capsys, "verify", "--n", "20")
    assert code == 1
    assert json.loads(out)["pass"] is False


def test_entry_point_subprocess():
    proc = subprocess.run(
        [sys.executable, "-m", "ico_thermal", "cycle", "--a", "0.3", "--beta-eps", "1.39"],
        capture_output=True, text=True, check=False,
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["mode"] == "Accelerator"
    proc = subprocess.run([sys.executable, "-m", "ico_thermal", "cycle", "--a", "1.5", "--beta-eps", "1"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 2 and proc.stderr
