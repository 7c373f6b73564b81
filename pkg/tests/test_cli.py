import json
import subprocess
import sys

import pytest

from leoreorder.cli import EXIT_CONFIG, EXIT_INFEASIBLE, EXIT_OK, build_parser, config_from_args, main
from leoreorder.scenario import preset, save_config

SHORT = ["--duration", "3", "--start-offset", "480"]


def test_defaults_to_baseline():
    cfg = config_from_args(build_parser().parse_args([]))
    assert cfg == preset("baseline")


def test_flags_override_file(tmp_path):
    path = tmp_path / "c.ini"
    save_config(preset("nine-planes"), path)
    args = build_parser().parse_args(["--config", str(path), "--cc", "bbr", "--queue-pkts", "64",
                                      "--bin-ms", "100", "--sats-per-plane", "30"])
    cfg = config_from_args(args)
    assert cfg.constellation.num_planes == 9 and cfg.constellation.sats_per_plane == 30
    assert (cfg.cc_name, cfg.queue_capacity_pkts, cfg.bin_s) == ("bbr", 64, 0.1)


def test_scenario_flag_overrides_file_geometry(tmp_path):
    path = tmp_path / "c.ini"
    save_config(preset("nine-planes"), path)
    cfg = config_from_args(build_parser().parse_args(["--config", str(path), "--scenario", "aalborg-capetown"]))
    assert cfg.gs_src.name == "Aalborg" and cfg.constellation.num_planes == 18


def test_run_writes_outputs(tmp_path, capsys):
    out = tmp_path / "o"
    assert main(["--cc", "reno", "--out", str(out), "--packet-trace", *SHORT]) == EXIT_OK
    names = {p.name for p in out.iterdir()}
    assert {"goodput.csv", "rtt.csv", "cwnd.csv", "events.csv", "summary.json", "routes.jsonl",
            "packets.csv"} == names
    assert "baseline reno: median goodput" in capsys.readouterr().out
    assert json.loads((out / "summary.json").read_text())["duration_s"] == 3.0


def test_same_seed_twice_is_byte_identical(tmp_path):
    for d in ("a", "b"):
        assert main(["--cc", "bbr", "--seed", "5", "--out", str(tmp_path / d), *SHORT]) == EXIT_OK
    for f in (tmp_path / "a").iterdir():
        assert f.read_bytes() == (tmp_path / "b" / f.name).read_bytes()


def test_config_errors(tmp_path, capsys):
    assert main(["--config", str(tmp_path / "missing.ini")]) == EXIT_CONFIG
    bad = tmp_path / "bad.ini"
    bad.write_text("[link]\nrate_bps = fast\n")
    assert main(["--config", str(bad)]) == EXIT_CONFIG
    assert main(["--duration", "-1"]) == EXIT_CONFIG
    assert main(["--planes", "0"]) == EXIT_CONFIG
    assert "configuration error" in capsys.readouterr().err
    with pytest.raises(SystemExit):
        main(["--cc", "vegas"])


def test_infeasible_scenario(tmp_path, capsys):
    code = main(["--planes", "1", "--sats-per-plane", "3", "--out", str(tmp_path), "--duration", "1"])
    assert code == EXIT_INFEASIBLE
    assert "infeasible" in capsys.readouterr().err


def test_unwritable_output(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("")
    assert main(["--out", str(blocker / "sub"), *SHORT]) == EXIT_CONFIG


def test_sweep(tmp_path, capsys):
    assert main(["--sweep", "2", "--workers", "1", "--out", str(tmp_path), "--cc", "reno", *SHORT]) == EXIT_OK
    assert sorted(p.name for p in tmp_path.iterdir()) == ["run000", "run001"]
    assert len(capsys.readouterr().out.strip().splitlines()) == 2


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "leoreorder", "--help"], capture_output=True, text=True)
    assert proc.returncode == 0 and "--scenario" in proc.stdout
