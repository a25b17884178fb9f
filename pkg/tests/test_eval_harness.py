"""Tests for control statistics, quality proxies and report files."""

import json
import math

import numpy as np
import pytest

from src.services.readability.errors import (
    DegenerateText,
    DegenerateVariance,
    EmptyRun,
    InvalidConfig,
    InvalidRecord,
)
from src.services.readability.eval_harness import (
    RunRecord,
    best_of_k_generation,
    build_report,
    fre_delta,
    length_stats,
    overlap_abstractiveness,
    pearson,
    records_from_generations,
    rouge_l_f1,
    select_best_of_k,
    sweep_row,
    write_report,
    write_sweep,
)
from src.services.readability.lookahead_decoder import DecoderConfig, GenerationResult
from src.services.readability.readability_metrics import ReadabilityTarget


def _generated(observed, target=70.0, text="The cat sat."):
    return GenerationResult(text=text, tokens=(), logprob=0.0, observed_fre=observed,
                            target=ReadabilityTarget.from_score(target), score=0.0)


def _record(target, observed, example_id="x"):
    return RunRecord(example_id, ReadabilityTarget.from_score(target), _generated(observed, target))


@pytest.fixture
def run_records(wordlist):
    texts = {
        90.0: "The team won. The fans sang all night.",
        70.0: "The city council opened a new library near the river.",
        30.0: "Administrators explained that the initiative combines careful monitoring with additional nursing support.",
    }
    records = []
    for i, (target, text) in enumerate(texts.items()):
        generated = GenerationResult.from_text(text, text.split(), -5.0, ReadabilityTarget.from_score(target),
                                               wordlist=wordlist)
        records.append(RunRecord(f"doc-{i}", generated.target, generated,
                                 source="The city council opened the library. " + text,
                                 reference_summary=text))
    return records


class TestFreDelta:

    def test_mean_absolute_deviation(self):
        records = [_record(90, 87.1), _record(70, 70.3), _record(30, 30.9)]
        assert fre_delta(records) == pytest.approx(1.3667, abs=1e-4)

    def test_single_record(self):
        assert fre_delta([_record(50, 59.5)]) == pytest.approx(9.5)

    def test_category_targets_use_centers(self):
        record = RunRecord("x", ReadabilityTarget.from_category("college"), _generated(25.0))
        assert fre_delta([record]) == pytest.approx(5.0)

    def test_empty(self):
        with pytest.raises(EmptyRun):
            fre_delta([])


class TestPearson:

    def test_known_value(self):
        assert pearson([1, 2, 3], [1, 3, 2]) == pytest.approx(0.5)

    def test_perfect(self):
        assert pearson([30, 50, 70, 90], [35, 52, 71, 95]) > 0.99
        assert pearson([1, 2, 3], [3, 2, 1]) == pytest.approx(-1.0)

    @pytest.mark.parametrize("xs, ys", [([1], [1]), ([1, 1, 1], [1, 2, 3]), ([1, 2, 3], [4, 4, 4])])
    def test_degenerate(self, xs, ys):
        with pytest.raises(DegenerateVariance):
            pearson(xs, ys)

    def test_length_mismatch(self):
        with pytest.raises(InvalidConfig):
            pearson([1, 2], [1, 2, 3])

    def test_matches_definition(self):
        rng = np.random.default_rng(17)
        for _ in range(50):
            size = int(rng.integers(3, 40))
            xs = rng.normal(50.0, 20.0, size)
            ys = 0.5 * xs + rng.normal(0.0, 10.0, size)
            mx, my = sum(xs) / size, sum(ys) / size
            covariance = sum((x - mx) * (y - my) for x, y in zip(xs, ys))
            spread = math.sqrt(sum((x - mx) ** 2 for x in xs) * sum((y - my) ** 2 for y in ys))
            assert pearson(xs, ys) == pytest.approx(covariance / spread, abs=1e-12)


class TestBestOfK:

    def test_closest_candidate(self):
        candidates = [_generated(77.1), _generated(65.0), _generated(50.2)]
        assert select_best_of_k(candidates, 70.0).observed_fre == 65.0

    def test_tie_goes_to_first(self):
        candidates = [_generated(65.0, text="first"), _generated(75.0, text="second")]
        assert select_best_of_k(candidates, ReadabilityTarget.from_score(70)).text == "first"

    def test_generation_is_seeded(self, toy_model):
        cfg = DecoderConfig(max_len=25, min_len=5, seed=5)
        target = ReadabilityTarget.from_score(90)
        first = best_of_k_generation(toy_model, "", target, 4, cfg)
        assert first == best_of_k_generation(toy_model, "", target, 4, cfg)

    def test_more_samples_never_worse(self, toy_model):
        target = ReadabilityTarget.from_score(60)
        cfg = DecoderConfig(max_len=25, min_len=5, seed=9)
        one = best_of_k_generation(toy_model, "", target, 1, cfg)
        eight = best_of_k_generation(toy_model, "", target, 8, cfg)
        assert abs(eight.observed_fre - 60) <= abs(one.observed_fre - 60)

    def test_invalid_k(self, toy_model):
        with pytest.raises(InvalidConfig):
            best_of_k_generation(toy_model, "", ReadabilityTarget.from_score(60), 0)

    def test_simulated_candidate_sets(self):
        rng = np.random.default_rng(5)
        improved = 0
        for _ in range(100):
            target = float(rng.uniform(30.0, 90.0))
            candidates = [_generated(float(v), target) for v in rng.normal(target, 15.0, 3)]
            chosen = select_best_of_k(candidates, target)
            first_gap = abs(candidates[0].observed_fre - target)
            chosen_gap = abs(chosen.observed_fre - target)
            assert chosen_gap <= first_gap
            improved += chosen_gap < first_gap
        assert improved >= 50


class TestQualityProxies:

    def test_rouge_l(self):
        assert rouge_l_f1("the cat", "the cat sat") == pytest.approx(0.8)
        assert rouge_l_f1("The Cat sat", "the cat sat") == pytest.approx(1.0)
        assert rouge_l_f1("dogs bark", "the cat sat") == 0.0

    @pytest.mark.parametrize("candidate, reference, expected", [
        ("the cat sat", "the cat sat on the mat", 2 / 3),
        ("the cat", "the cat sat", 0.8),
        ("red green blue white", "red blue green white", 0.75),
        ("dogs bark", "the cat sat", 0.0),
        ("The Cat sat", "the cat sat", 1.0),
        ("police arrested the man", "the man was arrested by police", 0.4),
        ("one two three four five", "five four three two one", 0.2),
        ("the fans sang all night", "fans sang songs all night long", 8 / 11),
        ("rain rain rain", "rain", 0.5),
        ("Barca won 85-80.", "Barca won the game 85-80.", 0.75),
    ])
    def test_rouge_l_lcs_table(self, candidate, reference, expected):
        assert rouge_l_f1(candidate, reference) == pytest.approx(expected, abs=1e-12)

    def test_rouge_l_needs_words(self):
        with pytest.raises(DegenerateText):
            rouge_l_f1("", "the cat")

    def test_length_stats(self):
        stats = length_stats(["The cat sat. It slept."])
        assert stats.mean_sentence_length == pytest.approx(2.5)
        assert stats.mean_summary_length == pytest.approx(5.0)
        assert stats.sentence_lengths.to_dict() == {2: 1, 3: 1}

    def test_length_stats_skips_empty(self):
        assert length_stats(["", "One two three."]).mean_summary_length == pytest.approx(3.0)
        with pytest.raises(EmptyRun):
            length_stats(["", "..."])

    def test_abstractiveness(self):
        source = "the cat sat on the mat"
        assert overlap_abstractiveness("the cat sat", source) == pytest.approx(0.0)
        assert overlap_abstractiveness("a dog barked loudly", source) == pytest.approx(1.0)
        assert overlap_abstractiveness("the cat barked", source) == pytest.approx(1 / 3)


class TestRecords:

    def test_round_trip_recomputes_fre(self, wordlist):
        record = _record(70, 12.0)
        restored = RunRecord.from_record(json.loads(json.dumps(record.to_record())), wordlist)
        assert restored.observed_fre == pytest.approx(119.19)
        assert restored.target == record.target

    def test_missing_fields(self):
        with pytest.raises(InvalidRecord):
            RunRecord.from_record({"id": "x", "text": "Hi there you."})

    def test_bad_rows_skipped(self, wordlist):
        rows = [
            {"id": "a", "text": "The cat sat.", "target_kind": "score", "target_value": 70},
            {"id": "b", "text": "", "target_kind": "score", "target_value": 70},
            {"id": "c", "text": "The cat sat."},
            {"id": "d", "text": "The cat sat.", "target_kind": "score", "target_value": 500},
        ]
        assert [r.example_id for r in records_from_generations(rows, wordlist)] == ["a"]


class TestReport:

    def test_levels_and_correlations(self, run_records, wordlist):
        report = build_report(run_records, run_config={"seed": 3}, wordlist=wordlist)
        assert [level["target"] for level in report.levels] == [90.0, 70.0, 30.0]
        assert report.overall["n"] == 3
        assert report.overall["rouge_l"] == pytest.approx(1.0)
        assert report.correlations["fre"] > 0.9
        assert report.correlations["gfi"] < 0
        assert report.correlations["cli"] < 0
        assert report.metadata["seed"] == 3
        assert not report.warnings

    def test_level_fre_matches_records(self, run_records, wordlist):
        report = build_report(run_records, wordlist=wordlist)
        for level, record in zip(report.levels, run_records):
            assert level["fre"] == pytest.approx(record.observed_fre)
            assert level["fre_delta"] == pytest.approx(abs(record.target_value - record.observed_fre))

    def test_constant_target(self, wordlist):
        records = [_record(70, 60.0), _record(70, 80.0)]
        report = build_report(records, wordlist=wordlist)
        assert report.correlations == {"fre": None, "gfi": None, "cli": None}
        assert len(report.warnings) == 3

        with pytest.raises(DegenerateVariance) as excinfo:
            build_report(records, strict=True, wordlist=wordlist)
        assert excinfo.value.partial_report.overall["n"] == 2

    def test_empty_run(self):
        with pytest.raises(EmptyRun):
            build_report([])

    def test_write_report(self, run_records, wordlist, tmp_path):
        report = build_report(run_records, wordlist=wordlist)
        paths = write_report(report, tmp_path / "out" / "run")
        assert [p.name for p in paths] == ["run.json", "run.csv", "run.txt", "run.records.csv"]
        assert json.loads(paths[0].read_text(encoding="utf-8"))["overall"]["n"] == 3
        assert "FRE rho:" in paths[2].read_text(encoding="utf-8")
        header = paths[3].read_text(encoding="utf-8").splitlines()[0]
        assert header == "example_id,target,observed_fre,gfi,cli,length"


class TestSweep:

    def test_rows(self, run_records, tmp_path):
        row = sweep_row("n", 20, run_records)
        assert row["n"] == 3
        assert row["fre_rho"] > 0.9
        assert row["rouge_l"] == pytest.approx(1.0)
        assert 0.0 <= row["faithfulness"] <= 1.0

        paths = write_sweep([row, sweep_row("n", 3, run_records[:1])], tmp_path / "sweep")
        data = json.loads(paths[0].read_text(encoding="utf-8"))
        assert data["rows"][1]["fre_rho"] is None
        assert np.isclose(data["rows"][0]["fre_delta"], fre_delta(run_records))
