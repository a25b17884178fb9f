"""
Readability formulas over TextStats and reading-level categories.

FRE is an ease score (higher = easier); GFI, ARI, DCR and CLI are grade
scales (higher = harder). Every score carries its metric so scales are
never mixed.
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional

from src.services.readability import config
from src.services.readability.errors import DegenerateText, InvalidConfig, InvalidTarget
from src.services.readability.text_analysis import TextStats, compute_stats

logger = logging.getLogger(__name__)


class Metric(str, Enum):
    FRE = "FRE"
    GFI = "GFI"
    ARI = "ARI"
    DCR = "DCR"
    CLI = "CLI"


class ReadingLevel(str, Enum):
    ELEVEN_YEAR_OLD = "eleven_year_old"
    MIDDLE_SCHOOL = "middle_school"
    HIGH_SCHOOL = "high_school"
    COLLEGE = "college"


GFI_VARIANTS = ("per_sentence", "standard")

# Lower FRE bound of each level; below the last bound is college.
LEVEL_BOUNDS = (
    (80.0, ReadingLevel.ELEVEN_YEAR_OLD),
    (60.0, ReadingLevel.MIDDLE_SCHOOL),
    (40.0, ReadingLevel.HIGH_SCHOOL),
)

LEVEL_CENTERS = {
    ReadingLevel.ELEVEN_YEAR_OLD: 90.0,
    ReadingLevel.MIDDLE_SCHOOL: 70.0,
    ReadingLevel.HIGH_SCHOOL: 50.0,
    ReadingLevel.COLLEGE: 30.0,
}


@dataclass(frozen=True)
class ReadabilityScore:
    metric: Metric
    value: float

    def __post_init__(self):
        if not math.isfinite(self.value):
            raise DegenerateText(f"{self.metric.value} is not finite: {self.value}")


@dataclass(frozen=True)
class ReadabilityTarget:
    """Requested readability: a numeric FRE score or a reading level."""
    kind: str
    score: Optional[float] = None
    category: Optional[ReadingLevel] = None

    def __post_init__(self):
        if self.kind == "score":
            if self.score is None or self.category is not None:
                raise InvalidTarget("score target needs a score and no category")
            if not (config.FRE_MIN_TARGET <= self.score <= config.FRE_MAX_TARGET):
                raise InvalidTarget(
                    f"target {self.score} outside [{config.FRE_MIN_TARGET}, {config.FRE_MAX_TARGET}]"
                )
        elif self.kind == "category":
            if self.category is None or self.score is not None:
                raise InvalidTarget("category target needs a category and no score")
        else:
            raise InvalidTarget(f"unknown target kind: {self.kind!r}")

    @classmethod
    def from_score(cls, score):
        return cls(kind="score", score=float(score))

    @classmethod
    def from_category(cls, category):
        try:
            return cls(kind="category", category=ReadingLevel(category))
        except ValueError as e:
            raise InvalidTarget(f"unknown reading level: {category!r}") from e

    @classmethod
    def parse(cls, value):
        """Parse '70', '62.5' or a reading level name such as 'middle_school'."""
        text = str(value).strip()
        try:
            score = float(text)
        except ValueError:
            return cls.from_category(text.lower().replace("-", "_"))
        if not math.isfinite(score):
            raise InvalidTarget(f"target must be finite: {value!r}")
        return cls.from_score(score)

    def resolve(self) -> float:
        """Numeric FRE target; categories resolve to their centers."""
        if self.kind == "score":
            return self.score
        return category_center(self.category)

    def label(self) -> str:
        return self.category.value if self.kind == "category" else f"{self.score:g}"

    def to_dict(self):
        return {
            "target_kind": self.kind,
            "target_value": self.score if self.kind == "score" else self.category.value,
        }

    @classmethod
    def from_dict(cls, record):
        if record["target_kind"] == "category":
            return cls.from_category(record["target_value"])
        return cls.from_score(record["target_value"])


def _check(stats: TextStats, metric: Metric):
    if stats.total_words < 1 or stats.total_sentences < 1:
        raise DegenerateText(
            f"{metric.value} needs at least one word and one sentence "
            f"(words={stats.total_words}, sentences={stats.total_sentences})"
        )


def fre(stats: TextStats) -> ReadabilityScore:
    """Flesch Reading Ease: 206.835 - 1.015 W/S - 84.6 Syl/W."""
    _check(stats, Metric.FRE)
    w, s = stats.total_words, stats.total_sentences
    value = 206.835 - 1.015 * (w / s) - 84.6 * (stats.total_syllables / w)
    return ReadabilityScore(Metric.FRE, value)


def gfi(stats: TextStats, variant: str = config.DEFAULT_GFI_VARIANT) -> ReadabilityScore:
    """
    Gunning Fog Index.

    variant='per_sentence' uses long words per sentence, 0.4 (W/S + 100 long/S);
    variant='standard' uses complex words per word, 0.4 (W/S + 100 complex/W).
    """
    _check(stats, Metric.GFI)
    w, s = stats.total_words, stats.total_sentences
    if variant == "per_sentence":
        hard = 100.0 * stats.long_words / s
    elif variant == "standard":
        hard = 100.0 * stats.complex_words / w
    else:
        raise InvalidConfig(f"unknown GFI variant {variant!r}; expected one of {GFI_VARIANTS}")
    return ReadabilityScore(Metric.GFI, 0.4 * (w / s + hard))


def ari(stats: TextStats) -> ReadabilityScore:
    """Automated Readability Index: 4.71 C/W + 0.5 W/S - 21.43."""
    _check(stats, Metric.ARI)
    w, s = stats.total_words, stats.total_sentences
    value = 4.71 * (stats.total_letters / w) + 0.5 * (w / s) - 21.43
    return ReadabilityScore(Metric.ARI, value)


def dcr(stats: TextStats) -> ReadabilityScore:
    """Dale-Chall Readability: 0.1579 (100 difficult/W) + 0.0496 W/S."""
    _check(stats, Metric.DCR)
    w, s = stats.total_words, stats.total_sentences
    value = 0.1579 * (100.0 * stats.difficult_words / w) + 0.0496 * (w / s)
    return ReadabilityScore(Metric.DCR, value)


def cli_index(stats: TextStats) -> ReadabilityScore:
    """Coleman-Liau Index with L, S per 100 words: 0.0588 L - 0.296 S - 15.8."""
    _check(stats, Metric.CLI)
    w = stats.total_words
    letters_per_100 = 100.0 * stats.total_letters / w
    sentences_per_100 = 100.0 * stats.total_sentences / w
    value = 0.0588 * letters_per_100 - 0.296 * sentences_per_100 - 15.8
    return ReadabilityScore(Metric.CLI, value)


def score_all(stats: TextStats, gfi_variant: str = config.DEFAULT_GFI_VARIANT) -> dict:
    """All five scores for one TextStats, keyed by Metric."""
    return {
        Metric.FRE: fre(stats),
        Metric.GFI: gfi(stats, gfi_variant),
        Metric.ARI: ari(stats),
        Metric.DCR: dcr(stats),
        Metric.CLI: cli_index(stats),
    }


def readability_of(text: str, metric: Metric = Metric.FRE, wordlist=None,
                   gfi_variant: str = config.DEFAULT_GFI_VARIANT) -> float:
    """Score a raw text with one metric."""
    stats = compute_stats(text, wordlist)
    metric = Metric(metric)
    if metric is Metric.GFI:
        return gfi(stats, gfi_variant).value
    return {
        Metric.FRE: fre,
        Metric.ARI: ari,
        Metric.DCR: dcr,
        Metric.CLI: cli_index,
    }[metric](stats).value


def map_category(score: float) -> ReadingLevel:
    """Reading level bins: >=80, [60, 80), [40, 60), <40."""
    for lower, level in LEVEL_BOUNDS:
        if score >= lower:
            return level
    return ReadingLevel.COLLEGE


def category_center(category) -> float:
    return LEVEL_CENTERS[ReadingLevel(category)]
