import csv

import numpy as np
import pytest

from sicancel.cli import (
    ConfigError,
    load_controller,
    main,
    parse_config,
    save_controller,
)

from conftest import CONFIG_TEXT


def write_config(tmp_path, text):
    cfg = tmp_path / "cfg.toml"
    cfg.write_text(text)
    return cfg


def read_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


class TestParseConfig:
    def test_reference_values(self, tmp_path):
        cfg = parse_config(write_config(tmp_path, CONFIG_TEXT))
        p = cfg.params
        assert p.a == 2500.0
        assert p.m == 5
        assert p.N == 2
        assert p.N_p == 16
        assert p.beta == 0.1
        assert p.paths == ((0.2, 10), (0.17, 12))
        assert p.f == 10000.0
        assert p.h == 1.0
        assert cfg.ofdm.block_len == 64
        assert cfg.ofdm.guard_len == 16
        assert cfg.synthesis.epsilon == 1e-4

    def test_causality_rejected(self, tmp_path):
        text = CONFIG_TEXT.replace("m = 5", "m = 4")
        with pytest.raises(ConfigError, match="causality"):
            parse_config(write_config(tmp_path, text))

    def test_empty_file_lists_missing_keys(self, tmp_path):
        with pytest.raises(ConfigError) as err:
            parse_config(write_config(tmp_path, ""))
        msg = str(err.value)
        assert "missing required keys" in msg
        for key in ("relay.a", "ofdm.seed", "synthesis.rel_tol", "output_dir"):
            assert key in msg

    def test_unknown_key_named(self, tmp_path):
        text = CONFIG_TEXT.replace("a = 2500.0", "a = 2500.0\nbogus = 1")
        with pytest.raises(ConfigError, match="relay.bogus"):
            parse_config(write_config(tmp_path, text))

    def test_type_error_named(self, tmp_path):
        text = CONFIG_TEXT.replace("N = 2", 'N = "two"')
        with pytest.raises(ConfigError, match="relay.N"):
            parse_config(write_config(tmp_path, text))

    def test_bad_paths_entry(self, tmp_path):
        text = CONFIG_TEXT.replace(
            "paths = [[0.2, 10], [0.17, 12]]", "paths = [[0.2, 10.5]]"
        )
        with pytest.raises(ConfigError, match="paths"):
            parse_config(write_config(tmp_path, text))

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError, match="not found"):
            parse_config(tmp_path / "nope.toml")

    def test_invalid_toml(self, tmp_path):
        with pytest.raises(ConfigError, match="TOML"):
            parse_config(write_config(tmp_path, "this is [not toml"))

    def test_hash_ignores_simulation_settings(self, tmp_path):
        a = parse_config(write_config(tmp_path, CONFIG_TEXT))
        b = parse_config(
            write_config(tmp_path, CONFIG_TEXT.replace("seed = 0", "seed = 7"))
        )
        c = parse_config(
            write_config(tmp_path, CONFIG_TEXT.replace("a = 2500.0", "a = 2400.0"))
        )
        assert a.design_hash == b.design_hash
        assert a.design_hash != c.design_hash


class TestArtifact:
    def test_round_trip(self, small_design, tmp_path):
        _, ctrl = small_design
        path = tmp_path / "k.txt"
        save_controller(path, ctrl, "deadbeef00000000", 2)
        loaded, digest, ratio = load_controller(path)
        assert digest == "deadbeef00000000"
        assert ratio == 2
        assert loaded.gamma_certified == ctrl.gamma_certified
        for name in "ABCD":
            assert np.array_equal(
                getattr(loaded.system, name), getattr(ctrl.system, name)
            )
        assert loaded.system.period == ctrl.system.period

    def test_rejects_garbage(self, tmp_path):
        path = tmp_path / "k.txt"
        path.write_text("not a controller\n")
        with pytest.raises(ConfigError):
            load_controller(path)


class TestPulseCommand:
    def test_csv_contents(self, tmp_path, capsys):
        cfg = write_config(tmp_path, CONFIG_TEXT)
        rc = main(["pulse", str(cfg), "--out-dir", str(tmp_path / "out")])
        assert rc == 0
        header, rows = read_csv(tmp_path / "out" / "pulse.csv")
        assert header == ["k", "tap"]
        assert len(rows) == 17
        taps = np.array([float(r[1]) for r in rows])
        assert taps[8] == pytest.approx(0.7287, abs=5e-4)
        assert np.array_equal(taps, taps[::-1])
        out = capsys.readouterr().out
        assert "energy = " in out
        energy = float(out.split("energy = ")[1].splitlines()[0])
        assert energy == pytest.approx(1.0, abs=1e-3)


class TestDesignAndSimulate:
    def test_design_report(self, cli_workspace):
        report = cli_workspace["report"]
        assert "gamma_opt" in report
        assert "stable: true" in report
        assert "dare_residuals" in report
        assert cli_workspace["artifact"].is_file()

    def test_simulate_csv_shapes(self, cli_workspace, capsys):
        cfg = cli_workspace["config"]
        out = cli_workspace["root"] / "sim_out"
        rc = main([
            "simulate", str(cfg), str(cli_workspace["artifact"]),
            "--out-dir", str(out),
        ])
        assert rc == 0
        header, rows = read_csv(out / "trace.csv")
        assert header == ["k", "t", "w1", "w2", "u1", "u2", "z1", "z2", "abs_z"]
        # num_blocks * (block_len + guard_len) symbols plus structural tail
        L = 2 * (64 + 16)
        n_sym = L + 5 + 4 + 9
        assert len(rows) == (n_sym - 1) * 2 + 16 + 1
        sheader, srows = read_csv(out / "symbols.csv")
        assert sheader == ["n", "wd1", "wd2", "ud1", "ud2", "zd1", "zd2"]
        assert len(srows) == n_sym
        out_text = capsys.readouterr().out
        assert "energy_ratio" in out_text

    def test_zero_input_flag(self, cli_workspace):
        cfg = cli_workspace["config"]
        out = cli_workspace["root"] / "zero_out"
        rc = main([
            "simulate", str(cfg), str(cli_workspace["artifact"]),
            "--out-dir", str(out), "--zero-input",
        ])
        assert rc == 0
        _, rows = read_csv(out / "trace.csv")
        data = np.array([[float(v) for v in r[2:]] for r in rows])
        assert np.all(data == 0.0)

    def test_seed_flag_changes_trace(self, cli_workspace):
        cfg = cli_workspace["config"]
        root = cli_workspace["root"]
        for seed, name in ((3, "s3"), (3, "s3b"), (4, "s4")):
            rc = main([
                "simulate", str(cfg), str(cli_workspace["artifact"]),
                "--out-dir", str(root / name), "--seed", str(seed),
            ])
            assert rc == 0
        a = (root / "s3" / "trace.csv").read_bytes()
        b = (root / "s3b" / "trace.csv").read_bytes()
        c = (root / "s4" / "trace.csv").read_bytes()
        assert a == b
        assert a != c

    def test_mismatched_config_refused(self, cli_workspace, tmp_path, capsys):
        other = write_config(
            tmp_path, CONFIG_TEXT.replace("a = 2500.0", "a = 2400.0")
        )
        rc = main([
            "simulate", str(other), str(cli_workspace["artifact"]),
            "--out-dir", str(tmp_path / "out"),
        ])
        assert rc != 0
        assert "hash" in capsys.readouterr().err

    def test_norm_command(self, cli_workspace, capsys):
        rc = main(["norm", str(cli_workspace["config"]),
                   str(cli_workspace["artifact"])])
        out = capsys.readouterr().out
        assert rc == 0
        assert "certified: true" in out
        assert "stable: true" in out

    def test_bad_config_exits_nonzero(self, tmp_path, capsys):
        bad = write_config(tmp_path, CONFIG_TEXT.replace("m = 5", "m = 4"))
        rc = main(["pulse", str(bad)])
        assert rc != 0
        assert "error:" in capsys.readouterr().err

    def test_missing_artifact_exits_nonzero(self, cli_workspace, capsys):
        rc = main([
            "norm", str(cli_workspace["config"]),
            str(cli_workspace["root"] / "missing.txt"),
        ])
        assert rc != 0
