"""CLI surface: exit codes, outputs, golden comparison."""

from sliceswitch import catalog
from sliceswitch.cli import main
from sliceswitch.trace import load_trace

CASE_1B = str(catalog.bundled_scenario_path("case_1b"))


class TestValidateCommand:
    def test_ok(self, capsys):
        assert main(["validate", CASE_1B]) == 0
        assert "OK" in capsys.readouterr().out

    def test_missing_file(self):
        assert main(["validate", "/nonexistent.yaml"]) == 1

    def test_violations_listed(self, tmp_path, capsys):
        bad = tmp_path / "bad.yaml"
        text = catalog.bundled_scenario_path("case_1b").read_text()
        bad.write_text(text.replace("  - {id: nssf1, kind: NSSF}\n", ""))
        assert main(["validate", str(bad)]) == 1
        assert "violation" in capsys.readouterr().out

    def test_malformed_yaml(self, tmp_path, capsys):
        bad = tmp_path / "bad.yaml"
        bad.write_text("nfs: [oops\n  ")
        assert main(["validate", str(bad)]) == 1
        assert "error" in capsys.readouterr().err

    def test_bundled_flag(self, capsys):
        assert main(["validate", "--bundled", "case_2a"]) == 0


class TestRunCommand:
    def test_writes_trace_and_metrics(self, tmp_path):
        trace_out = tmp_path / "out.trace"
        metrics_out = tmp_path / "out.csv"
        code = main([
            "run", CASE_1B,
            "--trace-out", str(trace_out),
            "--metrics-out", str(metrics_out),
        ])
        assert code == 0
        assert load_trace(trace_out)
        assert metrics_out.read_text().startswith("section,")

    def test_seed_does_not_change_deterministic_output(self, tmp_path):
        outs = []
        for seed in ("0", "12345"):
            trace_out = tmp_path / f"s{seed}.trace"
            metrics_out = tmp_path / f"s{seed}.csv"
            main(["run", CASE_1B, "--seed", seed,
                  "--trace-out", str(trace_out),
                  "--metrics-out", str(metrics_out)])
            outs.append(
                (trace_out.read_bytes(), metrics_out.read_bytes())
            )
        assert outs[0] == outs[1]

    def test_multi_scenario_jobs(self, tmp_path, monkeypatch):
        monkeypatch.chdir(tmp_path)
        code = main([
            "run", "--bundled", "case_1a", "case_1d", "--jobs", "2",
        ])
        assert code == 0
        assert (tmp_path / "case_1a.trace").exists()
        assert (tmp_path / "case_1d.metrics.csv").exists()

    def test_invalid_scenario_exit_1(self, tmp_path):
        bad = tmp_path / "bad.yaml"
        text = catalog.bundled_scenario_path("case_1b").read_text()
        bad.write_text(text.replace("  - {id: nssf1, kind: NSSF}\n", ""))
        assert main(["run", str(bad)]) == 1


class TestDiffGoldenCommand:
    def test_match(self, tmp_path, capsys):
        trace_out = tmp_path / "run.trace"
        main(["run", CASE_1B, "--trace-out", str(trace_out),
              "--metrics-out", str(tmp_path / "m.csv")])
        code = main([
            "diff-golden", str(trace_out), str(catalog.golden_path("case_1b"))
        ])
        assert code == 0
        assert "match" in capsys.readouterr().out

    def test_mismatch_reports_line(self, tmp_path, capsys):
        trace_out = tmp_path / "run.trace"
        main(["run", "--bundled", "case_1a",
              "--trace-out", str(trace_out),
              "--metrics-out", str(tmp_path / "m.csv")])
        code = main([
            "diff-golden", str(trace_out), str(catalog.golden_path("case_1b"))
        ])
        assert code == 3
        assert "divergence at line" in capsys.readouterr().out

    def test_nssf_assist_changes_the_sequence(self, tmp_path):
        # Re-running with the assist flag toggled must diverge from the
        # golden: the extra NSSF query pair shows up in the projection.
        assisted = tmp_path / "assisted.yaml"
        text = catalog.bundled_scenario_path("case_1b").read_text()
        assisted.write_text(text + "options: {nssf_assist: true}\n")
        trace_out = tmp_path / "assisted.trace"
        assert main(["run", str(assisted),
                     "--trace-out", str(trace_out),
                     "--metrics-out", str(tmp_path / "m.csv")]) == 0
        code = main([
            "diff-golden", str(trace_out), str(catalog.golden_path("case_1b"))
        ])
        assert code == 3

    def test_format_error(self, tmp_path):
        bad = tmp_path / "bad.trace"
        bad.write_text("not|enough|fields\n")
        code = main([
            "diff-golden", str(bad), str(catalog.golden_path("case_1b"))
        ])
        assert code == 1


class TestGoldenDirOverride:
    def test_env_var_respected(self, tmp_path, monkeypatch):
        monkeypatch.setenv(catalog.GOLDEN_DIR_ENV, str(tmp_path))
        assert catalog.golden_dir() == tmp_path
        assert catalog.golden_path("case_1b") == tmp_path / "case_1b.trace"

    def test_regen_into_directory(self, tmp_path):
        assert main(["regen-golden", "--out", str(tmp_path)]) == 0
        for name in catalog.BUNDLED_CASE_NAMES:
            assert (tmp_path / f"{name}.trace").exists()
        # Freshly regenerated goldens match the shipped ones byte-for-byte.
        shipped = catalog.golden_path("case_1b").read_bytes()
        assert (tmp_path / "case_1b.trace").read_bytes() == shipped


class TestScenariosCommand:
    def test_list(self, capsys):
        assert main(["scenarios"]) == 0
        out = capsys.readouterr().out
        assert "case_1b" in out and "all_cases" in out

    def test_export(self, tmp_path):
        assert main(["scenarios", "--export", str(tmp_path)]) == 0
        assert (tmp_path / "case_2ct.yaml").exists()
