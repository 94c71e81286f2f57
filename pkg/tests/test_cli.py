"""End-to-end checks of the command-line front end.

Everything drives cli.main in-process and inspects exit statuses, the
emitted artifact files, and stderr. Parameters are kept small; the
statistical quality of the outputs is covered elsewhere.
"""

import json

import pytest

from hypbbm.cli import main

# One cheap invocation per subcommand, shared across this module.
CASES = {
    "simulate": ["simulate", "--beta", "1", "--horizon", "1.5", "--dt", "0.05"],
    "exitlaw": ["exitlaw", "--t", "0.5", "--samples", "400", "--dt", "0.05"],
    "dimension": [
        "dimension", "--beta", "1", "--replicates", "2", "--pop", "4000",
        "--dt", "0.05",
    ],
    "moments": [
        "moments", "--beta", "0.5", "--horizon", "2", "--replicates", "200",
        "--eps-min", "0.2", "--eps-max", "2.0", "--n-eps", "4", "--dt", "0.05",
    ],
    "holder": [
        "holder", "--beta", "0.5", "--replicates", "2", "--pop", "4000",
        "--dt", "0.05",
    ],
    "validate": ["validate", "--check", "exit-bound", "--samples", "20000"],
    "growth": [
        "growth", "--beta", "1", "--onset", "1", "--generations", "2",
        "--runs", "20", "--dt", "0.05",
    ],
}

ARTIFACTS = {
    "simulate": {"particles.csv", "measure.csv", "cdf.csv"},
    "exitlaw": {"exitlaw.json"},
    "dimension": {"dimension.json", "curve.csv"},
    "moments": {"moments.json", "curve.csv"},
    "holder": {"holder.json", "curve.csv"},
    "validate": {"validation.json"},
    "growth": {"growth.json"},
}


def run_case(sub, out, extra=()):
    code = main(CASES[sub] + ["--out", str(out), *extra])
    assert code == 0, f"{sub} exited {code}"
    return out


@pytest.fixture(scope="module")
def runs(tmp_path_factory):
    base = tmp_path_factory.mktemp("cli")
    return {sub: run_case(sub, base / sub) for sub in CASES}


def assert_same_tree(d1, d2, skip=frozenset({"meta.json"})):
    names1 = sorted(p.name for p in d1.iterdir())
    names2 = sorted(p.name for p in d2.iterdir())
    assert names1 == names2
    for name in names1:
        if name in skip:
            continue
        assert (d1 / name).read_bytes() == (d2 / name).read_bytes(), name


class TestArtifacts:
    @pytest.mark.parametrize("sub", sorted(CASES))
    def test_expected_files(self, runs, sub):
        produced = {p.name for p in runs[sub].iterdir()}
        assert ARTIFACTS[sub] | {"config.json", "meta.json"} == produced

    @pytest.mark.parametrize("sub", sorted(CASES))
    def test_config_records_subcommand(self, runs, sub):
        cfg = json.loads((runs[sub] / "config.json").read_text())
        assert cfg["subcommand"] == sub
        assert "out" not in cfg and "threads" not in cfg
        assert isinstance(cfg["seed"], int)

    @pytest.mark.parametrize("sub", sorted(CASES))
    def test_meta_contents(self, runs, sub):
        meta = json.loads((runs[sub] / "meta.json").read_text())
        assert set(meta) == {"seed", "wall_time_s", "cap_hit", "threads", "argv"}
        assert meta["wall_time_s"] >= 0.0
        assert meta["cap_hit"] is False or sub in ("dimension", "holder")

    def test_reports_parse(self, runs):
        report = json.loads((runs["validate"] / "validation.json").read_text())
        assert set(report) >= {"name", "lhs", "rhs", "z"}
        curve = (runs["dimension"] / "curve.csv").read_text().splitlines()
        assert curve[0] == "delta,value"
        assert len(curve) > 4

    def test_cap_warning(self, tmp_path, capsys):
        code = main(
            [
                "simulate", "--beta", "2", "--horizon", "3",
                "--max-particles", "8", "--dt", "0.05", "--out", str(tmp_path),
            ]
        )
        assert code == 0
        assert "cap" in capsys.readouterr().err
        meta = json.loads((tmp_path / "meta.json").read_text())
        assert meta["cap_hit"] is True


class TestUsageErrors:
    def test_no_subcommand(self, tmp_path):
        assert main([]) == 64

    def test_unknown_subcommand(self, tmp_path):
        assert main(["frobnicate"]) == 64

    def test_missing_required_flag(self, tmp_path, capsys):
        assert main(["dimension", "--out", str(tmp_path)]) == 64
        assert "--beta" in capsys.readouterr().err

    def test_negative_beta_names_field(self, tmp_path, capsys):
        args = ["simulate", "--beta", "-1", "--horizon", "2", "--out", str(tmp_path)]
        assert main(args) == 64
        assert "beta" in capsys.readouterr().err

    def test_zero_dt_names_field(self, tmp_path, capsys):
        args = [
            "simulate", "--beta", "1", "--horizon", "2", "--dt", "0",
            "--out", str(tmp_path),
        ]
        assert main(args) == 64
        assert "dt" in capsys.readouterr().err

    def test_unknown_flag(self, tmp_path):
        assert main(["exitlaw", "--frobnicate", "1", "--out", str(tmp_path)]) == 64

    def test_bad_seed(self, tmp_path, capsys):
        assert main(["exitlaw", "--seed", "abc", "--out", str(tmp_path)]) == 64
        assert "seed" in capsys.readouterr().err

    def test_validate_needs_beta(self, tmp_path, capsys):
        args = ["validate", "--check", "harmonic", "--t", "1", "--out", str(tmp_path)]
        assert main(args) == 64
        assert "--beta" in capsys.readouterr().err

    def test_config_file_not_json(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text("{nope")
        args = ["exitlaw", "--config", str(bad), "--out", str(tmp_path / "o")]
        assert main(args) == 64
        assert "bad.json" in capsys.readouterr().err

    def test_config_file_unknown_key(self, tmp_path, capsys):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"frobnicate": 3}))
        args = ["exitlaw", "--config", str(cfg), "--out", str(tmp_path / "o")]
        assert main(args) == 64
        assert "frobnicate" in capsys.readouterr().err

    def test_config_file_wrong_subcommand(self, tmp_path, capsys):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"subcommand": "growth", "t": 1.0}))
        args = ["exitlaw", "--config", str(cfg), "--out", str(tmp_path / "o")]
        assert main(args) == 64
        assert "growth" in capsys.readouterr().err

    def test_unwritable_output_dir(self, tmp_path):
        assert main(CASES["exitlaw"] + ["--out", "/dev/null/x"]) == 1


class TestHelp:
    def test_top_level(self, capsys):
        assert main(["--help"]) == 0
        out = capsys.readouterr().out
        for sub in CASES:
            assert sub in out

    @pytest.mark.parametrize("sub", sorted(CASES))
    def test_subcommand_lists_units(self, capsys, sub):
        assert main([sub, "--help"]) == 0
        out = capsys.readouterr().out
        assert "(time units)" in out or "(count)" in out
        assert "--seed" in out and "--out" in out and "--config" in out


class TestConfigResolution:
    def test_flags_override_file(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"t": 0.5, "samples": 300, "dt": 0.05}))
        out = tmp_path / "o"
        code = main(
            ["exitlaw", "--config", str(cfg), "--samples", "200", "--out", str(out)]
        )
        assert code == 0
        resolved = json.loads((out / "config.json").read_text())
        assert resolved["samples"] == 200
        assert resolved["t"] == 0.5
        assert resolved["dt"] == 0.05

    def test_rerun_from_recorded_config(self, runs, tmp_path):
        for sub in ("simulate", "exitlaw", "validate"):
            out2 = tmp_path / sub
            code = main(
                [
                    sub, "--config", str(runs[sub] / "config.json"),
                    "--out", str(out2),
                ]
            )
            assert code == 0
            assert_same_tree(runs[sub], out2)

    def test_same_invocation_twice_identical(self, tmp_path):
        d1 = run_case("exitlaw", tmp_path / "a")
        d2 = run_case("exitlaw", tmp_path / "b")
        assert_same_tree(d1, d2)

    def test_threads_do_not_change_output(self, tmp_path):
        d1 = run_case("dimension", tmp_path / "t1", extra=["--threads", "1"])
        d3 = run_case("dimension", tmp_path / "t3", extra=["--threads", "3"])
        assert_same_tree(d1, d3)


class TestSeedHandling:
    def test_random_seed_drawn_and_recorded(self, tmp_path):
        seeds = []
        for name in ("a", "b"):
            out = tmp_path / name
            assert main(CASES["exitlaw"] + ["--seed", "random", "--out", str(out)]) == 0
            seeds.append(json.loads((out / "config.json").read_text())["seed"])
        assert all(isinstance(s, int) for s in seeds)
        assert seeds[0] != seeds[1]

    def test_random_seed_reproducible_from_config(self, tmp_path):
        first = tmp_path / "first"
        assert main(CASES["exitlaw"] + ["--seed", "random", "--out", str(first)]) == 0
        again = tmp_path / "again"
        code = main(
            ["exitlaw", "--config", str(first / "config.json"), "--out", str(again)]
        )
        assert code == 0
        assert_same_tree(first, again)


class TestStrict:
    def test_breach_exits_two(self, tmp_path, capsys):
        # The stage statistic sits well above exp(-beta*onset) at this
        # depth, so the z-score breaks the threshold deterministically.
        args = [
            "growth", "--beta", "1", "--onset", "1", "--generations", "10",
            "--runs", "50", "--dt", "0.05", "--strict", "--out", str(tmp_path),
        ]
        assert main(args) == 2
        assert "strict" in capsys.readouterr().err
        assert (tmp_path / "growth.json").exists()

    def test_healthy_identity_exits_zero(self, tmp_path):
        args = [
            "validate", "--check", "harmonic", "--beta", "0.5", "--t", "1",
            "--runs", "400", "--dt", "0.05", "--strict", "--out", str(tmp_path),
        ]
        assert main(args) == 0
