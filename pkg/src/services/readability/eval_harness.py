"""
Control and quality statistics over generation runs.

A run is a list of RunRecords: one generated summary per (example, target)
pair. build_report aggregates them per requested level and computes pooled
Pearson correlations between requested FRE and the observed FRE, GFI and CLI
of the generated texts.
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np
import pandas as pd
from rouge_score import rouge_scorer
from scipy.stats import pearsonr
from sklearn.metrics import mean_absolute_error

from src.services.readability import config
from src.services.readability.errors import (
    DegenerateText,
    DegenerateVariance,
    EmptyGeneration,
    EmptyRun,
    InvalidConfig,
    InvalidRecord,
    ReadabilityError,
)
from src.services.readability.lookahead_decoder import DecoderConfig, GenerationResult, sample_generation
from src.services.readability.readability_metrics import Metric, ReadabilityTarget, score_all
from src.services.readability.reward import gaussian_reward, lexical_faithfulness
from src.services.readability.text_analysis import compute_stats, sentence_word_counts, tokenize_words
from src.services.readability.utils.jsonl_utils import write_json

logger = logging.getLogger(__name__)

LEVEL_COLUMNS = [
    "level", "target", "n", "fre", "gfi", "ari", "dcr", "cli", "fre_delta", "rouge_l",
    "mean_sentence_length", "mean_length", "abstractiveness", "reward", "faithfulness",
]
RECORD_DUMP_COLUMNS = ["example_id", "target", "observed_fre", "gfi", "cli", "length"]
CORRELATED_METRICS = ("fre", "gfi", "cli")


@dataclass(frozen=True)
class RunRecord:
    example_id: str
    target: ReadabilityTarget
    generated: GenerationResult
    source: str = ""
    reference_summary: Optional[str] = None

    @property
    def target_value(self) -> float:
        return self.target.resolve()

    @property
    def observed_fre(self) -> float:
        return self.generated.observed_fre

    def to_record(self):
        record = {
            "id": self.example_id,
            "source": self.source,
            "reference_summary": self.reference_summary,
            **self.generated.to_dict(),
        }
        return record

    @classmethod
    def from_record(cls, record, wordlist=None):
        missing = [key for key in ("id", "text", "target_kind", "target_value") if key not in record]
        if missing:
            raise InvalidRecord(f"generation record missing fields: {missing}")
        generated = GenerationResult.from_dict(record, wordlist)
        return cls(
            example_id=str(record["id"]),
            target=generated.target,
            generated=generated,
            source=record.get("source") or "",
            reference_summary=record.get("reference_summary") or None,
        )


@dataclass
class EvalReport:
    levels: list
    overall: dict
    correlations: dict
    records: list = field(default_factory=list)
    metadata: dict = field(default_factory=dict)
    warnings: list = field(default_factory=list)

    def to_dict(self):
        return {
            "levels": self.levels,
            "overall": self.overall,
            "correlations": self.correlations,
            "metadata": self.metadata,
            "warnings": self.warnings,
        }


@dataclass(frozen=True)
class LengthStats:
    mean_sentence_length: float
    mean_summary_length: float
    sentence_lengths: pd.Series
    summary_lengths: pd.Series


# ---------------------------------------------------------------
# Core statistics
# ---------------------------------------------------------------
def fre_delta(records) -> float:
    """Mean |r^ - r~| over records."""
    records = list(records)
    if not records:
        raise EmptyRun("FRE delta needs at least one record")
    targets = [record.target_value for record in records]
    observed = [record.observed_fre for record in records]
    return float(mean_absolute_error(targets, observed))


def pearson(xs, ys) -> float:
    """
    Product-moment correlation.

    Raises:
        DegenerateVariance: fewer than two points, or a constant series
    """
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    if xs.shape != ys.shape:
        raise InvalidConfig(f"pearson needs equal lengths, got {len(xs)} and {len(ys)}")
    if len(xs) < 2:
        raise DegenerateVariance(f"pearson needs at least two points, got {len(xs)}")
    if np.ptp(xs) == 0 or np.ptp(ys) == 0:
        raise DegenerateVariance("pearson is undefined for a constant series")
    rho = pearsonr(xs, ys)[0]
    return float(np.clip(rho, -1.0, 1.0))


def _as_number(target):
    return target.resolve() if isinstance(target, ReadabilityTarget) else float(target)


def select_best_of_k(candidates, target):
    """Candidate whose observed FRE is closest to target; ties go to the lowest index."""
    candidates = list(candidates)
    if not candidates:
        raise EmptyGeneration("best-of-k needs at least one candidate")
    r_hat = _as_number(target)
    best = min(range(len(candidates)), key=lambda i: (abs(candidates[i].observed_fre - r_hat), i))
    return candidates[best]


def best_of_k_generation(model, source, target: ReadabilityTarget, k: int,
                         decoder_config: DecoderConfig = None, wordlist=None) -> GenerationResult:
    """Draw k seeded samples and keep the one closest to the target FRE."""
    if k < 1:
        raise InvalidConfig(f"k must be >= 1, got {k}")
    cfg = decoder_config or DecoderConfig()
    rng = np.random.default_rng(cfg.seed)

    samples = []
    for _ in range(k):
        try:
            samples.append(sample_generation(model, source, target, cfg, rng=rng, wordlist=wordlist))
        except EmptyGeneration as e:
            logger.debug(f"Discarded sample: {e}")
    if not samples:
        raise EmptyGeneration(f"none of {k} samples produced a summary")
    return select_best_of_k(samples, target)


class WordTokenizer:
    """rouge_score tokenizer over the readability word tokens, lowercased."""

    def tokenize(self, text):
        return [token.lower() for token in tokenize_words(text or "")]


_WORD_TOKENIZER = WordTokenizer()
_ROUGE_L = rouge_scorer.RougeScorer(["rougeL"], tokenizer=_WORD_TOKENIZER)


def _tokens(text):
    return _WORD_TOKENIZER.tokenize(text)


def rouge_l_f1(candidate: str, reference: str) -> float:
    """ROUGE-L F1 over lowercased word tokens."""
    if not _tokens(candidate) or not _tokens(reference):
        raise DegenerateText("ROUGE-L needs words in both candidate and reference")
    return float(_ROUGE_L.score(reference, candidate)["rougeL"].fmeasure)


def _text_of(item):
    return item.generated.text if isinstance(item, RunRecord) else item


def length_stats(records) -> LengthStats:
    """Words per sentence and words per summary, with their distributions."""
    sentence_lengths = []
    summary_lengths = []
    for item in records:
        counts = sentence_word_counts(_text_of(item))
        if not counts:
            logger.warning(f"  ⚠️ Excluding empty summary from length statistics: {_text_of(item)!r}")
            continue
        sentence_lengths.extend(counts)
        summary_lengths.append(sum(counts))

    if not summary_lengths:
        raise EmptyRun("length statistics need at least one non-empty summary")

    sentence_series = pd.Series(sentence_lengths, dtype="int64")
    summary_series = pd.Series(summary_lengths, dtype="int64")
    return LengthStats(
        mean_sentence_length=float(sentence_series.mean()),
        mean_summary_length=float(summary_series.mean()),
        sentence_lengths=sentence_series.value_counts().sort_index(),
        summary_lengths=summary_series.value_counts().sort_index(),
    )


def overlap_abstractiveness(summary: str, source: str) -> float:
    """
    1 - share of summary tokens covered by extractive fragments.

    Fragments are found greedily: at each summary position take the longest
    token run that also occurs contiguously in the source.
    """
    s, a = _tokens(summary), _tokens(source)
    if not s:
        raise DegenerateText("abstractiveness needs a summary with words")

    covered = 0
    i = 0
    while i < len(s):
        longest = 0
        for j in range(len(a)):
            k = 0
            while i + k < len(s) and j + k < len(a) and s[i + k] == a[j + k]:
                k += 1
            longest = max(longest, k)
        if longest:
            covered += longest
            i += longest
        else:
            i += 1
    return 1.0 - covered / len(s)


# ---------------------------------------------------------------
# Reports
# ---------------------------------------------------------------
def _record_row(record, gfi_variant, sigma, wordlist):
    text = record.generated.text
    stats = compute_stats(text, wordlist)
    scores = score_all(stats, gfi_variant)
    counts = sentence_word_counts(text)

    rouge = None
    if record.reference_summary:
        try:
            rouge = rouge_l_f1(text, record.reference_summary)
        except DegenerateText:
            rouge = None

    source = record.source or ""
    return {
        "example_id": record.example_id,
        "level": record.target.label(),
        "target": record.target_value,
        "observed_fre": record.observed_fre,
        "gfi": scores[Metric.GFI].value,
        "ari": scores[Metric.ARI].value,
        "dcr": scores[Metric.DCR].value,
        "cli": scores[Metric.CLI].value,
        "abs_delta": abs(record.target_value - record.observed_fre),
        "rouge_l": rouge,
        "length": stats.total_words,
        "sentence_length": float(np.mean(counts)),
        "abstractiveness": overlap_abstractiveness(text, source) if source else None,
        "reward": gaussian_reward(record.observed_fre, record.target_value, sigma),
        "faithfulness": lexical_faithfulness(text, source) if source else None,
    }


def _mean_or_none(series):
    values = pd.to_numeric(series, errors="coerce").dropna()
    return float(values.mean()) if not values.empty else None


def _level_rows(df):
    rows = []
    ordered = df.sort_values(["target", "level"], ascending=[False, True], kind="stable")
    for level, group in ordered.groupby("level", sort=False):
        rows.append({
            "level": level,
            "target": float(group["target"].iloc[0]),
            "n": int(len(group)),
            "fre": float(group["observed_fre"].mean()),
            "gfi": float(group["gfi"].mean()),
            "ari": float(group["ari"].mean()),
            "dcr": float(group["dcr"].mean()),
            "cli": float(group["cli"].mean()),
            "fre_delta": float(mean_absolute_error(group["target"], group["observed_fre"])),
            "rouge_l": _mean_or_none(group["rouge_l"]),
            "mean_sentence_length": float(group["sentence_length"].mean()),
            "mean_length": float(group["length"].mean()),
            "abstractiveness": _mean_or_none(group["abstractiveness"]),
            "reward": float(group["reward"].mean()),
            "faithfulness": _mean_or_none(group["faithfulness"]),
        })
    return rows


def build_report(records, run_config: dict = None, strict: bool = False,
                 gfi_variant: str = config.DEFAULT_GFI_VARIANT, sigma: float = config.REWARD_SIGMA,
                 wordlist=None) -> EvalReport:
    """
    Aggregate a run into per-level rows and pooled correlations.

    Args:
        records: list of RunRecord
        run_config: Settings of the run, copied into the report metadata
        strict: Raise DegenerateVariance instead of reporting a missing correlation

    Returns:
        EvalReport

    Raises:
        EmptyRun: when records is empty
        DegenerateVariance: strict mode only, carrying the partial report
    """
    records = list(records)
    if not records:
        raise EmptyRun("cannot build a report over zero records")

    df = pd.DataFrame([_record_row(record, gfi_variant, sigma, wordlist) for record in records])
    run_config = dict(run_config or {})
    report = EvalReport(
        levels=_level_rows(df),
        overall={
            "n": int(len(df)),
            "fre_delta": fre_delta(records),
            "rouge_l": _mean_or_none(df["rouge_l"]),
            "reward": float(df["reward"].mean()),
            "faithfulness": _mean_or_none(df["faithfulness"]),
            "mean_length": float(df["length"].mean()),
        },
        correlations={},
        records=df.to_dict(orient="records"),
        metadata={"config": run_config, "seed": run_config.get("seed"), "gfi_variant": gfi_variant},
    )

    observed = {"fre": df["observed_fre"], "gfi": df["gfi"], "cli": df["cli"]}
    failure = None
    for name in CORRELATED_METRICS:
        try:
            report.correlations[name] = pearson(df["target"], observed[name])
        except DegenerateVariance as e:
            report.correlations[name] = None
            report.warnings.append(f"{name.upper()} correlation undefined: {e}")
            failure = failure or e

    if failure is not None:
        logger.warning(f"⚠️ {'; '.join(report.warnings)}")
        if strict:
            raise DegenerateVariance(str(failure), partial_report=report)
    return report


def records_from_generations(rows, wordlist=None) -> list:
    """RunRecords from generation rows; observed FRE is recomputed from each text."""
    records = []
    for row in rows:
        try:
            records.append(RunRecord.from_record(row, wordlist))
        except ReadabilityError as e:
            logger.warning(f"  ⚠️ Skipping generation {row.get('id')!r}: {e}")
    return records


def _fmt(value):
    return "n/a" if value is None else f"{value:.3f}"


def write_report(report: EvalReport, stem) -> list:
    """Write <stem>.json, <stem>.csv, <stem>.txt and <stem>.records.csv."""
    stem = Path(stem)
    stem.parent.mkdir(parents=True, exist_ok=True)
    levels = pd.DataFrame(report.levels, columns=LEVEL_COLUMNS)
    dump = pd.DataFrame(report.records).reindex(columns=RECORD_DUMP_COLUMNS)

    json_path = write_json(stem.with_name(stem.name + ".json"), report.to_dict())

    csv_path = stem.with_name(stem.name + ".csv")
    levels.to_csv(csv_path, index=False, float_format="%.4f")

    records_path = stem.with_name(stem.name + ".records.csv")
    dump.to_csv(records_path, index=False, float_format="%.4f")

    lines = [
        levels.to_string(index=False, float_format=lambda v: f"{v:.2f}"),
        "",
        f"FRE delta: {_fmt(report.overall['fre_delta'])}",
        *(f"{name.upper()} rho: {_fmt(report.correlations.get(name))}" for name in CORRELATED_METRICS),
        *report.warnings,
    ]
    txt_path = stem.with_name(stem.name + ".txt")
    txt_path.write_text("\n".join(lines) + "\n", encoding="utf-8")

    logger.info(f"  ✅ Wrote report files with stem {stem}")
    return [json_path, csv_path, txt_path, records_path]


# ---------------------------------------------------------------
# Ablation sweeps
# ---------------------------------------------------------------
def sweep_row(setting: str, value, records, wordlist=None) -> dict:
    """One ablation row: delta, FRE correlation, mean ROUGE-L and faithfulness."""
    records = list(records)
    try:
        rho = pearson([r.target_value for r in records], [r.observed_fre for r in records])
    except DegenerateVariance:
        rho = None

    rouges, faiths = [], []
    for record in records:
        if record.reference_summary:
            try:
                rouges.append(rouge_l_f1(record.generated.text, record.reference_summary))
            except DegenerateText:
                pass
        if record.source:
            faiths.append(lexical_faithfulness(record.generated.text, record.source))

    return {
        "setting": setting,
        "value": value,
        "n": len(records),
        "fre_delta": fre_delta(records),
        "fre_rho": rho,
        "rouge_l": float(np.mean(rouges)) if rouges else None,
        "faithfulness": float(np.mean(faiths)) if faiths else None,
    }


def write_sweep(rows, stem) -> list:
    """Write <stem>.json, <stem>.csv and <stem>.txt for sweep rows."""
    stem = Path(stem)
    stem.parent.mkdir(parents=True, exist_ok=True)
    df = pd.DataFrame(rows, columns=["setting", "value", "n", "fre_delta", "fre_rho", "rouge_l", "faithfulness"])

    json_path = write_json(stem.with_name(stem.name + ".json"), {"rows": rows})
    csv_path = stem.with_name(stem.name + ".csv")
    df.to_csv(csv_path, index=False, float_format="%.4f")
    txt_path = stem.with_name(stem.name + ".txt")
    txt_path.write_text(df.to_string(index=False, float_format=lambda v: f"{v:.3f}") + "\n", encoding="utf-8")
    return [json_path, csv_path, txt_path]
