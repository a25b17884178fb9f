"""End-to-end tests of the command-line surface on the bundled toy corpus."""

import argparse
import json

import pytest

from src.services.readability import config
from src.services.readability.cli import RunManifest, main, parse_sweep

DECODE_FLAGS = ["--limit", "2", "--target", "30,90", "--max-len", "20", "--min-len", "6", "--n", "5"]


def _jsonl(path):
    return [json.loads(line) for line in path.read_text(encoding="utf-8").splitlines() if line.strip()]


@pytest.fixture(scope="module")
def trained_model(tmp_path_factory):
    path = tmp_path_factory.mktemp("model") / "toy.ngram"
    assert main(["--quiet", "train-lm", str(config.TOY_CORPUS_PATH), "--output", str(path)]) == 0
    return path


@pytest.fixture(scope="module")
def generations(trained_model, tmp_path_factory):
    path = tmp_path_factory.mktemp("decode") / "generations.jsonl"
    argv = ["--quiet", "decode", "--model", str(trained_model), "--corpus", str(config.TOY_CORPUS_PATH),
            "--output", str(path), *DECODE_FLAGS]
    assert main(argv) == 0
    return path


class TestAnalyze:

    def test_paragraphs_as_json(self, write_lines, capsys):
        path = write_lines("input.txt", ["The cat sat.", "", "Barcelona defeated Real Madrid 85-80 on Thursday."])
        assert main(["--quiet", "analyze", str(path), "--format", "json"]) == 0
        rows = [json.loads(line) for line in capsys.readouterr().out.splitlines()]
        assert [row["id"] for row in rows] == ["1", "2"]
        assert rows[0]["FRE"] == pytest.approx(119.19)
        assert rows[0]["words"] == 3

    def test_jsonl_field_to_file(self, tmp_path):
        output = tmp_path / "scores.csv"
        argv = ["--quiet", "analyze", str(config.TOY_CORPUS_PATH), "--field", "summary",
                "--format", "csv", "--output", str(output)]
        assert main(argv) == 0
        lines = output.read_text(encoding="utf-8").splitlines()
        assert lines[0] == "id,words,sentences,FRE,GFI,ARI,DCR,CLI"
        assert len(lines) == 51
        assert lines[1].startswith("toy-001,")
        manifest = RunManifest.read(RunManifest.path_for(output))
        assert manifest.command == "analyze"
        assert manifest.outputs == [str(output)]

    def test_missing_field(self, write_lines):
        path = write_lines("rows.jsonl", [json.dumps({"id": "1", "text": "Hello there friend."})])
        assert main(["--quiet", "analyze", str(path), "--field", "summary"]) == 2


class TestPrepare:

    def test_score_scheme(self, tmp_path):
        output = tmp_path / "prepared.jsonl"
        assert main(["--quiet", "prepare", str(config.TOY_CORPUS_PATH), "--scheme", "score",
                     "--output", str(output)]) == 0
        rows = _jsonl(output)
        assert len(rows) == 50
        assert all(row["input"].startswith("Summarize this with a readability level of ") for row in rows)
        assert RunManifest.path_for(output).exists()

    def test_filtered_category_scheme(self, tmp_path):
        output = tmp_path / "test.jsonl"
        assert main(["--quiet", "prepare", str(config.TOY_CORPUS_PATH), "--filter-below", "50",
                     "--output", str(output)]) == 0
        rows = _jsonl(output)
        assert 0 < len(rows) < 50
        assert "toy-001" not in {row["id"] for row in rows}


class TestDecodeAndEvaluate:

    def test_generations_written(self, generations):
        rows = _jsonl(generations)
        assert len(rows) == 4
        assert {row["target_value"] for row in rows} == {30.0, 90.0}
        assert all(row["text"] and row["source"] for row in rows)

    def test_decode_is_reproducible(self, trained_model, generations, tmp_path):
        again = tmp_path / "again.jsonl"
        argv = ["--quiet", "decode", "--model", str(trained_model), "--corpus", str(config.TOY_CORPUS_PATH),
                "--output", str(again), *DECODE_FLAGS]
        assert main(argv) == 0
        assert again.read_text(encoding="utf-8") == generations.read_text(encoding="utf-8")

    def test_parallel_workers_keep_order(self, trained_model, generations, tmp_path):
        threaded = tmp_path / "threaded.jsonl"
        argv = ["--quiet", "--workers", "3", "decode", "--model", str(trained_model),
                "--corpus", str(config.TOY_CORPUS_PATH), "--output", str(threaded), *DECODE_FLAGS]
        assert main(argv) == 0
        assert threaded.read_text(encoding="utf-8") == generations.read_text(encoding="utf-8")

    def test_evaluate(self, generations, tmp_path):
        stem = tmp_path / "report"
        assert main(["--quiet", "evaluate", str(generations), "--report", str(stem)]) == 0
        report = json.loads((tmp_path / "report.json").read_text(encoding="utf-8"))
        assert report["overall"]["n"] == 4
        assert [level["level"] for level in report["levels"]] == ["90", "30"]
        assert set(report["correlations"]) == {"fre", "gfi", "cli"}
        for suffix in (".csv", ".txt", ".records.csv"):
            assert (tmp_path / f"report{suffix}").exists()

    def test_rerun_reproduces_output(self, generations):
        before = generations.read_text(encoding="utf-8")
        assert main(["--quiet", "rerun", str(RunManifest.path_for(generations))]) == 0
        assert generations.read_text(encoding="utf-8") == before


class TestEvaluateDegenerate:

    @pytest.fixture
    def constant_target(self, write_lines):
        rows = [
            {"id": "a", "text": "The cat sat.", "target_kind": "score", "target_value": 70},
            {"id": "b", "text": "Barcelona defeated Real Madrid yesterday.", "target_kind": "score", "target_value": 70},
        ]
        return write_lines("gen.jsonl", [json.dumps(row) for row in rows])

    def test_reports_missing_correlation(self, constant_target, tmp_path):
        assert main(["--quiet", "evaluate", str(constant_target), "--report", str(tmp_path / "r")]) == 0
        report = json.loads((tmp_path / "r.json").read_text(encoding="utf-8"))
        assert report["correlations"]["fre"] is None
        assert report["warnings"]

    def test_strict_fails(self, constant_target, tmp_path):
        assert main(["--quiet", "evaluate", str(constant_target), "--report", str(tmp_path / "r"), "--strict"]) == 2


class TestAblate:

    def test_weight_sweep(self, trained_model, tmp_path):
        stem = tmp_path / "sweep"
        argv = ["--quiet", "ablate", "--model", str(trained_model), "--corpus", str(config.TOY_CORPUS_PATH),
                "--output", str(stem), "--sweep", "w=0,25", *DECODE_FLAGS]
        assert main(argv) == 0
        rows = json.loads((tmp_path / "sweep.json").read_text(encoding="utf-8"))["rows"]
        assert [(row["setting"], row["value"]) for row in rows] == [("w", 0.0), ("w", 25.0)]
        assert all(row["n"] == 4 for row in rows)


class TestArguments:

    def test_parse_sweep(self):
        assert parse_sweep("n=3,5,10,20") == ("n", [3, 5, 10, 20])
        assert parse_sweep("faith=0,0.35") == ("faith", [0.0, 0.35])

    def test_bare_sweep_uses_defaults(self):
        assert parse_sweep("n") == ("n", [3, 5, 10, 20])
        assert parse_sweep("w") == ("w", [0.0, 5.0, 25.0])
        assert parse_sweep("faith") == ("faith", [0.0, 0.35, 0.65, 1.0])

    @pytest.mark.parametrize("text", ["beam=3", "beam", "n=", "n=three"])
    def test_bad_sweep(self, text):
        with pytest.raises(argparse.ArgumentTypeError):
            parse_sweep(text)

    def test_manifest_round_trip(self, tmp_path):
        manifest = RunManifest(command="decode", argv=["decode"], config={"w": 25.0}, outputs=["x"], seed=7)
        path = manifest.write(tmp_path / "out.jsonl")
        assert path.name == "out.jsonl.manifest.json"
        assert RunManifest.read(path) == manifest


class TestExitCodes:

    def test_version(self, capsys):
        assert main(["--version"]) == 0
        assert "readability" in capsys.readouterr().out

    def test_unknown_flag(self):
        assert main(["analyze", "--colour"]) == 2

    def test_missing_command(self):
        assert main([]) == 2

    def test_missing_input_file(self, tmp_path):
        assert main(["--quiet", "analyze", str(tmp_path / "missing.txt")]) == 2

    def test_target_out_of_range(self, trained_model, tmp_path):
        argv = ["--quiet", "decode", "--model", str(trained_model), "--corpus", str(config.TOY_CORPUS_PATH),
                "--output", str(tmp_path / "g.jsonl"), "--target", "500"]
        assert main(argv) == 2

    def test_corrupt_model(self, write_lines, tmp_path):
        model = write_lines("bad.ngram", ["garbage"])
        argv = ["--quiet", "decode", "--model", str(model), "--corpus", str(config.TOY_CORPUS_PATH),
                "--output", str(tmp_path / "g.jsonl")]
        assert main(argv) == 2
