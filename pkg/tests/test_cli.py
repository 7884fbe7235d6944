import json
import subprocess
import sys

import pytest

from kinkquench import __version__
from kinkquench.cli import EXIT_CAPABILITY, EXIT_CONFIG, main
from kinkquench.scenario import PRESETS, read_csv


def write_config(path, **cfg):
    path.write_text(json.dumps(cfg))
    return path


def error_lines(err):
    return [json.loads(line) for line in err.strip().splitlines()]


def test_run_config(tmp_path, capsys):
    cfg = write_config(tmp_path / "c.json", name="c", L=5, alpha=1.1, n_times=1, t_max_J0t=0,
                       output_dir=str(tmp_path / "out"), observables=["walls"])
    assert main(["run", str(cfg)]) == 0
    manifest = capsys.readouterr().out.strip()
    assert manifest == str(tmp_path / "out" / "manifest.json")
    assert json.loads(open(manifest).read())["config"]["L"] == 5


def test_run_with_override(tmp_path, capsys):
    cfg = write_config(tmp_path / "c.json", L=5, alpha=1.1, n_times=1, t_max_J0t=0,
                       output_dir=str(tmp_path / "out"), observables=["walls"])
    assert main(["run", str(cfg), "--override", "flips=[3]"]) == 0
    _, rows = read_csv(tmp_path / "out" / "walls.csv")
    assert float(rows[0]["N"]) == pytest.approx(2.0, abs=1e-14)


def test_unknown_key_exit_code(tmp_path, capsys):
    cfg = write_config(tmp_path / "c.json", L=5, alpha=1.1, colour="red")
    assert main(["run", str(cfg)]) == EXIT_CONFIG
    (err,) = error_lines(capsys.readouterr().err)
    assert err["level"] == "error" and err["kind"] == "config" and "colour" in err["message"]


def test_capability_exit_code(tmp_path, capsys):
    assert main(["preset", "fig2A", "--override", "L=20", "--override", f"output_dir={tmp_path}"]) == EXIT_CAPABILITY
    (err,) = error_lines(capsys.readouterr().err)
    assert err["kind"] == "capability" and "max_L" in err["message"]


def test_unknown_preset(capsys):
    assert main(["preset", "fig9"]) == EXIT_CONFIG
    assert error_lines(capsys.readouterr().err)[0]["kind"] == "config"


def test_resource_warning_is_structured(tmp_path, capsys):
    code = main(["preset", "figS1-size1", "--override", "L=5", "--override", "flips=[3]",
                 "--override", "max_L=16", "--override", "n_times=1", "--override", "t_max_J0t=0",
                 "--override", f"output_dir={tmp_path}"])
    assert code == 0
    (warn,) = error_lines(capsys.readouterr().err)
    assert warn["level"] == "warning"


def test_list_presets(capsys):
    assert main(["list-presets"]) == 0
    names = [line.split("\t")[0] for line in capsys.readouterr().out.strip().splitlines()]
    assert names == list(PRESETS)


def test_console_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "kinkquench.cli", "--version"], capture_output=True, text=True)
    assert proc.returncode == 0 and __version__ in proc.stdout
    env_run = subprocess.run(
        [sys.executable, "-m", "kinkquench.cli", "preset", "fig2A", "--override", "n_times=1",
         "--override", "t_max_J0t=0"],
        capture_output=True, text=True, cwd=tmp_path,
        env={"KINKQUENCH_OUTPUT_ROOT": str(tmp_path / "root"), "PATH": ""},
    )
    assert env_run.returncode == 0, env_run.stderr
    assert (tmp_path / "root" / "results" / "fig2A" / "manifest.json").exists()
