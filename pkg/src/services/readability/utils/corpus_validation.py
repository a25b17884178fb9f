# src/services/readability/utils/corpus_validation.py
"""
Validation report over a document/summary corpus: coverage, degenerate
texts and the FRE spread of documents and summaries.
"""

import logging

import pandas as pd

from src.services.readability import config
from src.services.readability.errors import DegenerateText
from src.services.readability.readability_metrics import ReadingLevel, fre, map_category
from src.services.readability.text_analysis import compute_stats
from src.services.readability.utils.reporting import print_distribution, print_section

logger = logging.getLogger(__name__)


def _safe_fre(text, wordlist):
    if not text:
        return None
    try:
        return fre(compute_stats(text, wordlist)).value
    except DegenerateText:
        return None


def validate_corpus(corpus, threshold: float = config.FILTER_THRESHOLD, wordlist=None) -> dict:
    """
    Log a validation report and return its figures.

    Args:
        corpus: list of CorpusExample
        threshold: Document FRE cut-off used by filter_test_set

    Returns:
        dict with counts, FRE summaries and a list of issue strings
    """
    print_section("CORPUS VALIDATION")

    df = pd.DataFrame({
        "id": [example.id for example in corpus],
        "document_fre": pd.Series([_safe_fre(example.document, wordlist) for example in corpus], dtype="float64"),
        "summary_fre": pd.Series([_safe_fre(example.summary, wordlist) for example in corpus], dtype="float64"),
        "has_summary": [bool(example.summary) for example in corpus],
    })
    issues = []

    if df.empty:
        logger.error("❌ Corpus is empty!")
        return {"examples": 0, "issues": ["Corpus is empty"]}

    logger.info("📊 Dataset Overview:")
    logger.info(f"  Total examples: {len(df)}")

    missing_summaries = int((~df["has_summary"]).sum())
    degenerate_documents = int(df["document_fre"].isna().sum())
    degenerate_summaries = int((df["has_summary"] & df["summary_fre"].isna()).sum())
    below_threshold = int((df["document_fre"] < threshold).sum())

    for label, count in (
        ("missing summaries", missing_summaries),
        ("degenerate documents", degenerate_documents),
        ("degenerate summaries", degenerate_summaries),
    ):
        if count:
            pct = (count / len(df)) * 100
            logger.warning(f"  ⚠️ {label}: {count} ({pct:.1f}%)")
            issues.append(f"{label}: {count}")
        else:
            logger.info(f"  ✅ No {label}")

    logger.info(f"  Documents with FRE < {threshold:g}: {below_threshold}")

    for column in ("document_fre", "summary_fre"):
        values = df[column].dropna()
        if not values.empty:
            logger.info(f"  {column}: mean {values.mean():.1f}, min {values.min():.1f}, max {values.max():.1f}")

    levels = [map_category(value).value for value in df["summary_fre"].dropna()]
    counts = print_distribution(levels, "Summary reading levels", order=[level.value for level in ReadingLevel])
    empty_levels = [str(level) for level, count in counts.items() if count == 0]
    if levels and empty_levels:
        logger.warning(f"  ⚠️ No summaries at: {', '.join(empty_levels)}")
        issues.append(f"Reading levels without summaries: {', '.join(empty_levels)}")

    return {
        "examples": len(df),
        "missing_summaries": missing_summaries,
        "degenerate_documents": degenerate_documents,
        "degenerate_summaries": degenerate_summaries,
        "below_threshold": below_threshold,
        "level_counts": {str(level): int(count) for level, count in counts.items()},
        "issues": issues,
    }
