"""Logging helpers shared by the CLI commands."""

import logging

import pandas as pd

logger = logging.getLogger(__name__)


def print_section(title):
    """Print formatted section header."""
    logger.info("=" * 70)
    logger.info(f"  {title}")
    logger.info("=" * 70)


def print_distribution(values, title="Distribution", order=None):
    """Log counts and percentages of each distinct value."""
    counts = pd.Series(list(values), dtype="object").value_counts(dropna=False)
    if order is not None:
        counts = counts.reindex(order, fill_value=0)
    total = int(counts.sum())

    if total == 0:
        logger.warning(f"  ⚠️ Cannot calculate {title}: no records.")
        return counts

    logger.info(f"📊 {title}:")
    for value, count in counts.items():
        pct = (count / total) * 100
        logger.info(f"  - {str(value):<16}: {count:,} records ({pct:.1f}%)")
    return counts
