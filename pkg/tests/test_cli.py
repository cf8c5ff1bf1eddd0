from __future__ import annotations

import csv

import numpy as np
import pytest
from click.testing import CliRunner

from pretrial.cli import cli
from pretrial.psa.config import bundled_resource_path

APPENDIX1 = str(bundled_resource_path("appendix1_case.json"))
SF_EXCLUSIONS = str(bundled_resource_path("sf_exclusions.json"))


@pytest.fixture()
def runner():
    return CliRunner()


def invoke(runner, *args):
    return runner.invoke(cli, list(args), catch_exceptions=False)


def parse_kv(output: str) -> dict[str, str]:
    rows = {}
    for line in output.splitlines()[1:]:
        if not line:
            continue
        parts = line.split("\t")
        rows[parts[0]] = parts[1] if len(parts) > 1 else ""
    return rows


class TestScore:
    def test_appendix1_fields(self, runner):
        result = invoke(
            runner, "score", "--factors", APPENDIX1, "--exclusions", SF_EXCLUSIONS
        )
        assert result.exit_code == 0
        rows = parse_kv(result.output)
        assert rows["nvca_flag"] == "false"
        assert rows["step2_applied"] == "true"
        assert rows["recommendation"] == "Release Not Recommended"

    def test_text_format_renders_report(self, runner):
        result = invoke(
            runner,
            "score",
            "--factors",
            APPENDIX1,
            "--exclusions",
            SF_EXCLUSIONS,
            "--format",
            "text",
        )
        assert result.exit_code == 0
        assert "New Violent Criminal Activity Flag No" in result.output
        assert "Is this Response based on a Step 2 exclusion? Yes" in result.output

    def test_exclusions_off_by_default(self, runner):
        result = invoke(runner, "score", "--factors", APPENDIX1)
        rows = parse_kv(result.output)
        assert rows["step2_applied"] == "false"

    def test_identical_argv_identical_bytes(self, runner):
        first = invoke(runner, "score", "--factors", APPENDIX1)
        second = invoke(runner, "score", "--factors", APPENDIX1)
        assert first.output.encode() == second.output.encode()

    def test_missing_file_exits_one(self, runner):
        result = runner.invoke(cli, ["score", "--factors", "no-such-file.json"])
        assert result.exit_code == 1
        assert "Error" in result.output

    def test_unknown_flag_exits_two(self, runner):
        result = runner.invoke(cli, ["score", "--factors", APPENDIX1, "--bogus"])
        assert result.exit_code == 2


class TestReport:
    def test_verbatim_lines(self, runner):
        result = invoke(
            runner, "report", "--factors", APPENDIX1, "--exclusions", SF_EXCLUSIONS
        )
        assert result.exit_code == 0
        assert "New Violent Criminal Activity Flag No" in result.output
        assert "Is this Response based on a Step 2 exclusion? Yes" in result.output


class TestSynth:
    def test_same_seed_twice_identical_files(self, runner, tmp_path):
        first = tmp_path / "a.csv"
        second = tmp_path / "b.csv"
        for out in (first, second):
            result = invoke(
                runner,
                "synth",
                "--spec",
                "builtin:kentucky_like",
                "--n",
                "500",
                "--seed",
                "7",
                "--out",
                str(out),
            )
            assert result.exit_code == 0
        assert first.read_bytes() == second.read_bytes()

    def test_schema_out(self, runner, tmp_path):
        result = invoke(
            runner,
            "synth",
            "--spec",
            "builtin:figure2",
            "--n",
            "200",
            "--out",
            str(tmp_path / "d.csv"),
            "--schema-out",
            str(tmp_path / "schema.json"),
        )
        assert result.exit_code == 0
        assert (tmp_path / "schema.json").exists()


class TestTrainPredictPipeline:
    def test_end_to_end(self, runner, tmp_path):
        data = tmp_path / "train.csv"
        schema = tmp_path / "schema.json"
        model = tmp_path / "tree.model"
        cases = tmp_path / "cases.csv"

        result = invoke(
            runner, "synth", "--spec", "builtin:figure2", "--n", "8000",
            "--seed", "11", "--out", str(data), "--schema-out", str(schema),
        )
        assert result.exit_code == 0

        result = invoke(
            runner, "train", "--data", str(data), "--schema", str(schema),
            "--target", "FTA", "--min-cluster", "200", "--max-depth", "3",
            "--max-fpr", "0.65", "--max-fnr", "0.2",
            "--feature-priority", "prior_fta,age", "--out", str(model),
        )
        assert result.exit_code == 0
        assert model.exists()

        with open(cases, "w", newline="") as handle:
            writer = csv.writer(handle)
            writer.writerow(["case_id", "age", "prior_fta"])
            writer.writerow(["probe-1", "45", "0"])
            writer.writerow(["probe-2", "40", "5"])
        result = invoke(runner, "predict", "--model", str(model), "--case", str(cases))
        assert result.exit_code == 0
        lines = result.output.strip().splitlines()
        assert lines[0].split("\t") == ["case_id", "label", "error_rate", "n", "detail"]
        assert len(lines) == 3
        probe_two = lines[2].split("\t")
        assert probe_two[1] in {"HighRisk", "VeryLowRisk", "Handoff"}
        assert "prior_fta" in probe_two[4]

    def test_train_forest(self, runner, tmp_path):
        data = tmp_path / "train.csv"
        model = tmp_path / "forest.model"
        invoke(
            runner, "synth", "--spec", "builtin:figure2", "--n", "3000",
            "--seed", "5", "--out", str(data),
        )
        result = invoke(
            runner, "train-forest", "--data", str(data), "--target", "fta",
            "--trees", "5", "--min-cluster", "100", "--max-depth", "3",
            "--out", str(model),
        )
        assert result.exit_code == 0
        assert b"handoff-forest/v1" in model.read_bytes()


class TestEvaluate:
    def test_policy_table(self, runner, tmp_path):
        data = tmp_path / "eval.csv"
        invoke(
            runner, "synth", "--spec", "builtin:kentucky_like", "--n", "2000",
            "--seed", "3", "--out", str(data),
        )
        result = invoke(runner, "evaluate", "--data", str(data), "--target", "fta")
        assert result.exit_code == 0
        assert "release-all baseline accuracy" in result.output
        lines = result.output.strip().splitlines()
        table = [l for l in lines if l.startswith(("policy\t", "release-all\t", "detain-all\t"))]
        assert len(table) == 3


class TestAudit:
    def test_group_metrics(self, runner, tmp_path):
        from pretrial.fairness import binormal_scores

        rng = np.random.default_rng(3)
        cases = binormal_scores(1500, 0.148, 0.655, rng, group="a")
        cases += binormal_scores(1500, 0.30, 0.655, rng, group="b")
        path = tmp_path / "scored.csv"
        with open(path, "w", newline="") as handle:
            writer = csv.writer(handle)
            writer.writerow(["score", "outcome", "group"])
            for case in cases:
                writer.writerow(
                    [case.score, "true" if case.outcome else "false", case.group]
                )
        result = invoke(runner, "audit", "--data", str(path), "--threshold", "0.25")
        assert result.exit_code == 0
        lines = result.output.strip().splitlines()
        assert lines[0].startswith("group\tn\tauc\tfpr")
        assert len(lines) == 3
        calibration = invoke(runner, "audit", "--data", str(path), "--calibration")
        assert calibration.output.startswith("group\tbin\tlow\thigh\tcount")


class TestHelp:
    @pytest.mark.parametrize(
        "command",
        ["score", "report", "synth", "train", "train-forest", "predict", "audit",
         "evaluate", "serve", "export-config"],
    )
    def test_every_subcommand_documents_its_flags(self, runner, command):
        result = runner.invoke(cli, [command, "--help"])
        assert result.exit_code == 0
        assert "--help" in result.output


class TestExportConfig:
    def test_copies_bundled_fixture(self, runner, tmp_path):
        out = tmp_path / "psa.json"
        result = invoke(runner, "export-config", "psa_default", "--out", str(out))
        assert result.exit_code == 0
        assert b"psa-config/v1" in out.read_bytes()
