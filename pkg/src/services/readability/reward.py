"""
Gaussian readability reward and its combination with a faithfulness score.

The reward of a summary with observed FRE r~ for target r^ is the Gaussian
density centered at r^, divided by its peak value, which is
exp(-(r~ - r^)^2 / (2 sigma^2)).
"""

import logging
from collections import Counter
from dataclasses import dataclass
from typing import Protocol

import numpy as np

from src.services.readability import config
from src.services.readability.errors import InvalidConfig, InvalidSigma
from src.services.readability.readability_metrics import fre
from src.services.readability.text_analysis import compute_stats, tokenize_words

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RewardConfig:
    sigma: float = config.REWARD_SIGMA
    w_read: float = 1.0
    w_faith: float = 0.0

    def __post_init__(self):
        if not self.sigma > 0:
            raise InvalidSigma(f"sigma must be > 0, got {self.sigma}")
        for name in ("w_read", "w_faith"):
            weight = getattr(self, name)
            if not 0.0 <= weight <= 1.0:
                raise InvalidConfig(f"{name} must be in [0, 1], got {weight}")
        if not np.isclose(self.w_read + self.w_faith, 1.0, rtol=0.0, atol=1e-9):
            raise InvalidConfig(f"w_read + w_faith must equal 1, got {self.w_read + self.w_faith}")


class FaithfulnessScorer(Protocol):
    """Scores a summary against its source; deterministic, result in [0, 1]."""

    def __call__(self, summary: str, source: str) -> float:
        ...


def gaussian_reward(observed: float, target: float, sigma: float = config.REWARD_SIGMA) -> float:
    """Peak-normalized Gaussian reward in (0, 1]; exactly 1.0 at the target."""
    if not sigma > 0:
        raise InvalidSigma(f"sigma must be > 0, got {sigma}")
    delta = observed - target
    return float(np.exp(-(delta * delta) / (2.0 * sigma * sigma)))


def _word_tokens(text):
    return [token.lower() for token in tokenize_words(text)]


def lexical_faithfulness(summary: str, source: str) -> float:
    """
    Precision of summary tokens against the source token multiset.

    Each source token can be matched once. Stands in for a model-based
    faithfulness score.
    """
    summary_tokens = _word_tokens(summary)
    if not summary_tokens:
        return 0.0

    available = Counter(_word_tokens(source))
    matched = 0
    for token in summary_tokens:
        if available[token] > 0:
            available[token] -= 1
            matched += 1
    return matched / len(summary_tokens)


class LexicalFaithfulnessScorer:
    """FaithfulnessScorer backed by lexical_faithfulness."""

    def __call__(self, summary: str, source: str) -> float:
        return lexical_faithfulness(summary, source)

    def __repr__(self):
        return "LexicalFaithfulnessScorer()"


def reward_for_text(text: str, target: float, sigma: float = config.REWARD_SIGMA, wordlist=None) -> float:
    """Gaussian reward on the FRE of a complete text."""
    observed = fre(compute_stats(text, wordlist)).value
    return gaussian_reward(observed, target, sigma)


def combined_reward(summary: str, source: str, target: float, reward_config: RewardConfig = None,
                    scorer: FaithfulnessScorer = None, wordlist=None) -> float:
    """
    Weighted sum of readability reward and faithfulness.

    Args:
        summary: Generated summary (must contain words)
        source: Source document
        target: Requested FRE
        reward_config: sigma and weights (default: readability only)
        scorer: Faithfulness scorer (default: lexical proxy)

    Returns:
        w_read * gaussian_reward + w_faith * scorer(summary, source)
    """
    reward_config = reward_config or RewardConfig()
    scorer = scorer or LexicalFaithfulnessScorer()

    readability = reward_for_text(summary, target, reward_config.sigma, wordlist)
    faithfulness = scorer(summary, source) if reward_config.w_faith > 0 else 0.0
    return reward_config.w_read * readability + reward_config.w_faith * faithfulness
