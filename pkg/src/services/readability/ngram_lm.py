"""
Conditional language model interface and a word-level n-gram reference model.

A LanguageModel maps a token-id context (plus optional conditioning on the
source document and readability target) to a probability vector over its
Vocabulary. NGramModel is an add-k smoothed n-gram model with backoff to
shorter contexts; it ignores conditioning. SourceMixtureModel wraps any model
and interpolates it with the source document's unigram distribution.

Trained models are immutable and safe to share between threads.
"""

import logging
import math
import re
from abc import ABC, abstractmethod
from collections import Counter, defaultdict
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from src.services.readability import config
from src.services.readability.errors import EmptyCorpus, InvalidConfig, ModelFormatError

logger = logging.getLogger(__name__)

BOS = "<s>"
EOS = "</s>"
UNK = "<unk>"
RESERVED = (BOS, EOS, UNK)
PUNCTUATION_TOKENS = frozenset(".,!?;:")

MODEL_HEADER = "# readability-ngram v1"
DISTRIBUTION_CACHE_SIZE = 4096

_LM_TOKEN_RE = re.compile(r"[^\W_]+(?:['’\-][^\W_]+)*|[.,!?;:]")
_ATTACH_RE = re.compile(r" ([.,!?;:])")


def lm_tokenize(text: str) -> list:
    """Word tokens plus . , ! ? ; : as separate tokens."""
    return _LM_TOKEN_RE.findall(text)


def detokenize(tokens: Sequence[str]) -> str:
    """Join tokens with spaces, attaching punctuation to the preceding word."""
    return _ATTACH_RE.sub(r"\1", " ".join(tokens))


class Vocabulary:
    """Dense token index with BOS, EOS and UNK at ids 0, 1 and 2."""

    def __init__(self, tokens):
        tokens = tuple(tokens)
        if tokens[:len(RESERVED)] != RESERVED:
            raise InvalidConfig(f"vocabulary must start with {RESERVED}")
        if len(set(tokens)) != len(tokens):
            raise InvalidConfig("vocabulary tokens must be unique")
        self.tokens = tokens
        self._index = {token: i for i, token in enumerate(tokens)}

    @classmethod
    def build(cls, tokens):
        return cls(RESERVED + tuple(sorted(set(tokens) - set(RESERVED))))

    @property
    def bos_id(self):
        return 0

    @property
    def eos_id(self):
        return 1

    @property
    def unk_id(self):
        return 2

    def index(self, token: str) -> int:
        return self._index.get(token, self.unk_id)

    def encode(self, tokens):
        return [self.index(t) for t in tokens]

    def decode(self, ids):
        return [self.tokens[i] for i in ids]

    def __contains__(self, token):
        return token in self._index

    def __len__(self):
        return len(self.tokens)

    def __getitem__(self, i):
        return self.tokens[i]

    def __eq__(self, other):
        return isinstance(other, Vocabulary) and self.tokens == other.tokens

    def __hash__(self):
        return hash(self.tokens)


@dataclass(frozen=True)
class Conditioning:
    """What a conditional model may look at besides the prefix."""
    source: Optional[str] = None
    target: Optional[object] = None


class LanguageModel(ABC):
    """p(y_i | y_<i, x, r^) over a fixed Vocabulary."""

    vocabulary: Vocabulary

    @abstractmethod
    def next_distribution(self, context: Sequence[int], conditioning: Optional[Conditioning] = None) -> np.ndarray:
        """Probability vector over the vocabulary; sums to 1."""


class NGramModel(LanguageModel):
    """
    Add-k smoothed n-gram model with backoff.

    The distribution for a context uses the longest suffix of the
    BOS-padded context that was observed in training. BOS is never
    predicted; every other token receives add-k mass.
    """

    def __init__(self, order: int, smoothing: float, vocabulary: Vocabulary, counts: dict):
        if order < 1:
            raise InvalidConfig(f"order must be >= 1, got {order}")
        if smoothing < 0:
            raise InvalidConfig(f"smoothing must be >= 0, got {smoothing}")
        for context in counts:
            if len(context) >= order:
                raise InvalidConfig(f"context {context} too long for order {order}")

        self.order = order
        self.smoothing = float(smoothing)
        self.vocabulary = vocabulary
        self.counts = {ctx: dict(tokens) for ctx, tokens in counts.items()}
        self._totals = {ctx: sum(tokens.values()) for ctx, tokens in self.counts.items()}
        self._distribution = lru_cache(maxsize=DISTRIBUTION_CACHE_SIZE)(self._compute_distribution)

    def _backoff_context(self, context):
        padded = (self.vocabulary.bos_id,) * (self.order - 1) + tuple(context)
        for length in range(self.order - 1, 0, -1):
            candidate = padded[-length:]
            if self._totals.get(candidate, 0) > 0:
                return candidate
        return ()

    def _compute_distribution(self, context):
        size = len(self.vocabulary)
        dist = np.full(size, self.smoothing, dtype=np.float64)
        for token, count in self.counts.get(context, {}).items():
            dist[token] += count
        dist[self.vocabulary.bos_id] = 0.0

        total = dist.sum()
        if total <= 0:
            # k = 0 and nothing observed: fall back to uniform over predictable tokens
            dist = np.ones(size, dtype=np.float64)
            dist[self.vocabulary.bos_id] = 0.0
            total = dist.sum()
        dist /= total
        dist.flags.writeable = False
        return dist

    def next_distribution(self, context, conditioning=None):
        return self._distribution(self._backoff_context(context))

    def __eq__(self, other):
        return (
            isinstance(other, NGramModel)
            and self.order == other.order
            and self.smoothing == other.smoothing
            and self.vocabulary == other.vocabulary
            and self.counts == other.counts
        )

    def __hash__(self):
        return id(self)

    def __repr__(self):
        return f"NGramModel(order={self.order}, smoothing={self.smoothing}, vocab={len(self.vocabulary)})"


class SourceMixtureModel(LanguageModel):
    """
    Interpolates a base model with the source document's word unigrams.

    p = (1 - weight) * p_base + weight * p_source. Without a source, or with
    a source that has no in-vocabulary words, this is the base model.
    """

    def __init__(self, base: LanguageModel, weight: float = config.SOURCE_MIX_WEIGHT):
        if not 0.0 <= weight <= 1.0:
            raise InvalidConfig(f"source weight must be in [0, 1], got {weight}")
        self.base = base
        self.weight = float(weight)
        self.vocabulary = base.vocabulary
        self._source_distribution = lru_cache(maxsize=64)(self._compute_source_distribution)
        self._mixed = lru_cache(maxsize=DISTRIBUTION_CACHE_SIZE)(self._compute_mixed)

    def _compute_source_distribution(self, source):
        vocab = self.vocabulary
        dist = np.zeros(len(vocab), dtype=np.float64)
        for token in lm_tokenize(source):
            if token in vocab and token not in RESERVED and token not in PUNCTUATION_TOKENS:
                dist[vocab.index(token)] += 1.0
        total = dist.sum()
        if total == 0:
            return None
        dist /= total
        dist.flags.writeable = False
        return dist

    def _compute_mixed(self, context, source):
        base = self.base.next_distribution(context, Conditioning(source=source))
        source_dist = self._source_distribution(source)
        mixed = (1.0 - self.weight) * base + self.weight * source_dist
        mixed /= mixed.sum()
        mixed.flags.writeable = False
        return mixed

    def next_distribution(self, context, conditioning=None):
        source = conditioning.source if conditioning is not None else None
        if not source or self.weight == 0.0 or self._source_distribution(source) is None:
            return self.base.next_distribution(context, conditioning)
        return self._mixed(tuple(context), source)

    def __repr__(self):
        return f"SourceMixtureModel(base={self.base!r}, weight={self.weight})"


def train(corpus, order: int = config.NGRAM_ORDER, smoothing: float = config.NGRAM_SMOOTHING) -> NGramModel:
    """
    Count n-grams of every order up to `order` over a list of texts.

    Each text is padded with order-1 BOS tokens and terminated with EOS.

    Raises:
        EmptyCorpus: when no text contains a token
    """
    if order < 1:
        raise InvalidConfig(f"order must be >= 1, got {order}")

    tokenized = [lm_tokenize(text) for text in corpus]
    tokenized = [tokens for tokens in tokenized if tokens]
    if not tokenized:
        raise EmptyCorpus("cannot train an n-gram model on an empty corpus")

    vocabulary = Vocabulary.build(token for tokens in tokenized for token in tokens)
    counts = defaultdict(Counter)
    for tokens in tokenized:
        padded = [vocabulary.bos_id] * (order - 1) + vocabulary.encode(tokens) + [vocabulary.eos_id]
        for i in range(order - 1, len(padded)):
            for length in range(order):
                counts[tuple(padded[i - length:i])][padded[i]] += 1

    model = NGramModel(order, smoothing, vocabulary, counts)
    logger.info(f"✅ Trained {order}-gram model on {len(tokenized)} texts "
                f"({len(vocabulary)} types, {len(counts)} contexts)")
    return model


def sequence_logprob(model: LanguageModel, tokens: Sequence[str], conditioning=None, add_eos: bool = True) -> float:
    """Sum of natural-log probabilities of tokens (and EOS) under the model."""
    ids = model.vocabulary.encode(tokens)
    if add_eos:
        ids.append(model.vocabulary.eos_id)
    total = 0.0
    for i, token in enumerate(ids):
        p = model.next_distribution(tuple(ids[:i]), conditioning)[token]
        if p <= 0:
            return -math.inf
        total += math.log(p)
    return total


def perplexity(model: LanguageModel, text: str, conditioning=None) -> float:
    """exp of the mean negative log-probability over the text's tokens plus EOS."""
    tokens = lm_tokenize(text)
    logprob = sequence_logprob(model, tokens, conditioning)
    return math.exp(-logprob / (len(tokens) + 1))


def save_model(model: NGramModel, path) -> Path:
    """Write a line-oriented count dump; load_model reads it back exactly."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    vocab = model.vocabulary

    rows = []
    for context, tokens in model.counts.items():
        context_text = " ".join(vocab[i] for i in context)
        for token, count in tokens.items():
            rows.append(f"{context_text}\t{vocab[token]}\t{count}")
    rows.sort()

    lines = [
        MODEL_HEADER,
        f"order\t{model.order}",
        f"smoothing\t{model.smoothing!r}",
        "vocab\t" + " ".join(vocab.tokens),
        *rows,
    ]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    logger.info(f"✅ Saved model to {path} ({len(rows)} count lines)")
    return path


def load_model(path) -> NGramModel:
    path = Path(path)
    lines = path.read_text(encoding="utf-8").split("\n")
    if not lines or lines[0] != MODEL_HEADER:
        raise ModelFormatError(f"{path} is not a readability n-gram dump")

    try:
        order = int(_header_value(lines[1], "order"))
        smoothing = float(_header_value(lines[2], "smoothing"))
        vocabulary = Vocabulary(_header_value(lines[3], "vocab").split(" "))

        counts = defaultdict(dict)
        for line_no, line in enumerate(lines[4:], start=5):
            if not line:
                continue
            context_text, token, count = line.split("\t")
            context = tuple(_known_id(vocabulary, t, line_no) for t in context_text.split(" ") if t)
            counts[context][_known_id(vocabulary, token, line_no)] = int(count)
    except (IndexError, ValueError) as e:
        raise ModelFormatError(f"Malformed model file {path}: {e}") from e

    return NGramModel(order, smoothing, vocabulary, counts)


def _header_value(line, key):
    name, _, value = line.partition("\t")
    if name != key:
        raise ModelFormatError(f"expected '{key}' header, found {name!r}")
    return value


def _known_id(vocabulary, token, line_no):
    if token not in vocabulary:
        raise ModelFormatError(f"line {line_no}: token {token!r} not in vocabulary")
    return vocabulary.index(token)
