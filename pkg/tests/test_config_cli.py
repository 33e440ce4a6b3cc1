import signal
import socket
import subprocess
import sys
import time

import numpy as np
import pytest
import yaml

from mbot_stack import config as config_mod
from mbot_stack.cli import main
from mbot_stack.config import ConfigError, StackConfig
from mbot_stack.sim import make_walled_room
from mbot_stack.types import load_map_file, save_map_file


def free_port():
    with socket.socket() as s:
        s.bind(("127.0.0.1", 0))
        return s.getsockname()[1]


class TestConfig:
    def test_defaults_yaml_round_trips(self):
        text = config_mod.defaults_yaml()
        cfg = config_mod.from_dict(yaml.safe_load(text))
        assert cfg == StackConfig()

    def test_nested_override(self):
        cfg = config_mod.from_dict({"slam": {"num_particles": 50},
                                    "seed": 3})
        assert cfg.slam.num_particles == 50
        assert cfg.seed == 3
        assert cfg.slam.k1 == StackConfig().slam.k1  # untouched defaults

    def test_unknown_top_level_key_rejected(self):
        with pytest.raises(ConfigError, match="unknown config key: bogus"):
            config_mod.from_dict({"bogus": 1})

    def test_unknown_nested_key_rejected(self):
        with pytest.raises(ConfigError, match="slam.bogus"):
            config_mod.from_dict({"slam": {"bogus": 1}})

    def test_invalid_slam_mode_rejected(self):
        cfg = config_mod.from_dict({"slam_mode": "TURBO"})
        with pytest.raises(ConfigError, match="slam_mode"):
            cfg.validate()

    def test_validate_ranges(self):
        cfg = config_mod.from_dict({"bridge": {"port": 0}})
        with pytest.raises(ConfigError, match="port"):
            cfg.validate()
        cfg = config_mod.from_dict({"sim": {"dt": 1.0}})
        with pytest.raises(ConfigError, match="dt"):
            cfg.validate()

    def test_env_overrides(self):
        env = {"MBOT_BRIDGE_PORT": "9001", "MBOT_SEED": "7",
               "MBOT_SIM_REALTIME": "false",
               "MBOT_KERNELS": "python",  # backend switch, not a config key
               "OTHER_VAR": "ignored"}
        cfg = config_mod.apply_env_overrides(StackConfig(), environ=env)
        assert cfg.bridge.port == 9001
        assert cfg.seed == 7
        assert cfg.sim.realtime is False

    def test_env_unknown_key_rejected(self):
        with pytest.raises(ConfigError):
            config_mod.apply_env_overrides(StackConfig(),
                                           environ={"MBOT_SLAM_BOGUS": "1"})

    def test_load_file(self, tmp_path):
        path = tmp_path / "cfg.yaml"
        path.write_text("seed: 11\nnav:\n  vx_max: 0.3\n")
        cfg = config_mod.load_file(str(path))
        assert cfg.seed == 11 and cfg.nav.vx_max == 0.3


class TestConfigCommand:
    def test_defaults_prints_parseable_yaml(self, capsys):
        assert main(["config", "--defaults"]) == 0
        out = capsys.readouterr().out
        assert config_mod.from_dict(yaml.safe_load(out)) == StackConfig()

    def test_check_valid_file(self, tmp_path, capsys):
        path = tmp_path / "ok.yaml"
        path.write_text("seed: 1\n")
        assert main(["config", "--check", str(path)]) == 0
        assert "OK" in capsys.readouterr().out

    def test_check_invalid_file(self, tmp_path, capsys):
        path = tmp_path / "bad.yaml"
        path.write_text("nope: 1\n")
        assert main(["config", "--check", str(path)]) == 1
        assert "error" in capsys.readouterr().err


class TestMapConvert:
    def test_ascii_pgm_ascii_preserves_cells(self, tmp_path):
        grid = make_walled_room(2.0, 0.1)
        grid.cells[5, 5] = -40
        src = tmp_path / "in.map"
        pgm = tmp_path / "mid.pgm"
        back = tmp_path / "out.map"
        save_map_file(grid, str(src))
        assert main(["map", "convert", str(src), str(pgm)]) == 0
        assert pgm.read_bytes().startswith(b"P5\n20 20\n255\n")
        assert main(["map", "convert", str(pgm), str(back)]) == 0
        out = load_map_file(str(back))
        np.testing.assert_array_equal(out.cells, grid.cells)

    def test_missing_input_errors(self, tmp_path, capsys):
        assert main(["map", "convert", str(tmp_path / "nope.map"),
                     str(tmp_path / "out.pgm")]) == 1
        assert "error" in capsys.readouterr().err


class TestReplayStub:
    def test_replay_exits_2_with_explanation(self, capsys):
        assert main(["replay", "some.log"]) == 2
        assert "out of scope" in capsys.readouterr().err


class TestUpCommand:
    def up_cmd(self, *extra):
        return [sys.executable, "-m", "mbot_stack.cli", "up",
                "--port", str(free_port()), *extra]

    def test_bounded_run_exits_cleanly(self):
        proc = subprocess.run(self.up_cmd("--no-realtime", "--duration", "2"),
                              capture_output=True, text=True, timeout=120)
        assert proc.returncode == 0, proc.stderr
        assert "bridge listening" in proc.stdout
        assert "stack running" in proc.stdout

    def test_missing_world_file_fails_fast(self):
        proc = subprocess.run(self.up_cmd("--world", "/nonexistent.map"),
                              capture_output=True, text=True, timeout=60)
        assert proc.returncode == 1
        assert "not found" in proc.stderr

    def test_port_in_use_fails_fast(self):
        with socket.socket() as s:
            s.bind(("0.0.0.0", 0))
            s.listen(1)
            port = s.getsockname()[1]
            proc = subprocess.run(
                [sys.executable, "-m", "mbot_stack.cli", "up",
                 "--port", str(port), "--duration", "1"],
                capture_output=True, text=True, timeout=60)
        assert proc.returncode == 1
        assert "cannot listen" in proc.stderr

    def test_sigint_saves_map(self, tmp_path):
        out_map = tmp_path / "final.map"
        proc = subprocess.Popen(
            self.up_cmd("--no-realtime", "--save-map", str(out_map)),
            stdout=subprocess.PIPE, stderr=subprocess.PIPE, text=True)
        time.sleep(3.0)  # let SLAM build some map
        proc.send_signal(signal.SIGINT)
        stdout, stderr = proc.communicate(timeout=60)
        assert proc.returncode == 0, stderr
        assert "saved SLAM map" in stdout
        grid = load_map_file(str(out_map))
        assert (grid.cells > 64).sum() > 0  # walls made it into the file
