"""
Readability-lookahead beam decoding.

Each candidate token y_i of a hypothesis is scored as

    g = log p(y_1..y_i) + w * max_{c in L} h(c, r^)

where L holds rollout continuations of the extended hypothesis (up to n
tokens each) and h(c, r^) = 1 - |FRE(c) - r^| (raw) or 1 - |FRE(c) - r^|/100
(normalized). A rollout contributes every prefix at which the decoder could
stop (at least min_len tokens), from the extended hypothesis itself to the
full continuation. Hypotheses with fewer than min_lookahead_words words
score by log-probability alone.

Only the top candidate_fanout tokens per hypothesis are expanded; EOS is
examined in addition once min_len is reached. With w = 0 the decoder is
plain beam search.
"""

import logging
import math
from dataclasses import asdict, dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from src.services.readability import config
from src.services.readability.errors import DegenerateText, EmptyGeneration, InvalidConfig
from src.services.readability.ngram_lm import Conditioning, LanguageModel, detokenize
from src.services.readability.readability_metrics import ReadabilityTarget, fre
from src.services.readability.reward import lexical_faithfulness
from src.services.readability.text_analysis import compute_stats

logger = logging.getLogger(__name__)

H_SCALES = ("raw", "normalized")


@dataclass(frozen=True)
class RolloutStrategy:
    """greedy: one argmax continuation; sampled: `count` seeded samples."""
    kind: str = "greedy"
    count: int = 1
    seed: Optional[int] = None

    def __post_init__(self):
        if self.kind not in ("greedy", "sampled"):
            raise InvalidConfig(f"unknown rollout strategy {self.kind!r}")
        if self.count < 1:
            raise InvalidConfig(f"rollout count must be >= 1, got {self.count}")
        if self.kind == "greedy" and self.count != 1:
            raise InvalidConfig("greedy rollout yields exactly one continuation")

    @classmethod
    def greedy(cls):
        return cls("greedy", 1, None)

    @classmethod
    def sampled(cls, count, seed=None):
        return cls("sampled", count, seed)


@dataclass(frozen=True)
class DecoderConfig:
    beam_width: int = config.BEAM_WIDTH
    candidate_fanout: Optional[int] = None
    lookahead_n: int = config.LOOKAHEAD_N
    lookahead_w: float = config.LOOKAHEAD_W
    h_scale: str = config.H_SCALE
    rollout: RolloutStrategy = field(default_factory=RolloutStrategy)
    max_len: int = config.MAX_LEN
    min_len: int = config.MIN_LEN
    faith_weight: float = 0.0
    seed: int = config.DEFAULT_SEED
    h_floor: float = config.H_FLOOR
    min_lookahead_words: int = config.MIN_LOOKAHEAD_WORDS

    def __post_init__(self):
        if self.candidate_fanout is None:
            object.__setattr__(self, "candidate_fanout", 2 * self.beam_width)
        if self.beam_width < 1:
            raise InvalidConfig(f"beam_width must be >= 1, got {self.beam_width}")
        if self.candidate_fanout < self.beam_width:
            raise InvalidConfig(
                f"candidate_fanout ({self.candidate_fanout}) must be >= beam_width ({self.beam_width})"
            )
        if self.lookahead_n < 0 or self.lookahead_w < 0:
            raise InvalidConfig("lookahead_n and lookahead_w must be >= 0")
        if self.h_scale not in H_SCALES:
            raise InvalidConfig(f"h_scale must be one of {H_SCALES}, got {self.h_scale!r}")
        if not 0 <= self.min_len <= self.max_len or self.max_len < 1:
            raise InvalidConfig(f"need 0 <= min_len <= max_len and max_len >= 1 "
                                f"(min_len={self.min_len}, max_len={self.max_len})")
        if not 0.0 <= self.faith_weight <= 1.0:
            raise InvalidConfig(f"faith_weight must be in [0, 1], got {self.faith_weight}")

    @property
    def uses_lookahead(self):
        return self.lookahead_w > 0 and self.lookahead_n > 0

    def with_updates(self, **changes):
        if "beam_width" in changes and "candidate_fanout" not in changes:
            changes["candidate_fanout"] = None
        return replace(self, **changes)

    def to_dict(self):
        return asdict(self)


@dataclass(frozen=True)
class Hypothesis:
    tokens: tuple = ()
    logprob: float = 0.0
    score: float = 0.0
    finished: bool = False


@dataclass(frozen=True)
class GenerationResult:
    """A finished generation; observed_fre is always measured from text."""
    text: str
    tokens: tuple
    logprob: float
    observed_fre: float
    target: ReadabilityTarget
    score: float

    @classmethod
    def from_text(cls, text, tokens, logprob, target, score=None, wordlist=None):
        observed = fre(compute_stats(text, wordlist)).value
        return cls(
            text=text,
            tokens=tuple(tokens),
            logprob=float(logprob),
            observed_fre=observed,
            target=target,
            score=float(logprob if score is None else score),
        )

    def to_dict(self):
        return {
            "text": self.text,
            "tokens": list(self.tokens),
            "logprob": self.logprob,
            "observed_fre": self.observed_fre,
            "score": self.score,
            **self.target.to_dict(),
        }

    @classmethod
    def from_dict(cls, record, wordlist=None):
        return cls.from_text(
            record["text"],
            record.get("tokens", ()),
            record.get("logprob", 0.0),
            ReadabilityTarget.from_dict(record),
            record.get("score"),
            wordlist,
        )


def h_eval(partial, target: float, scale: str = config.H_SCALE, floor: float = config.H_FLOOR,
           min_words: int = config.MIN_LOOKAHEAD_WORDS, wordlist=None) -> float:
    """
    Readability heuristic of a (possibly unfinished) text.

    Args:
        partial: Text, or a sequence of string tokens
        target: Requested FRE
        scale: 'raw' (1 - |d|) or 'normalized' (1 - |d|/100)
        floor: Returned when readability is undefined
        min_words: Texts with fewer words are undefined

    Returns:
        h value, or floor
    """
    text = partial if isinstance(partial, str) else detokenize(partial)
    stats = compute_stats(text, wordlist)
    if stats.total_words < max(min_words, 1):
        return floor
    try:
        observed = fre(stats).value
    except DegenerateText:
        return floor

    deviation = abs(observed - target)
    if scale == "raw":
        return 1.0 - deviation
    if scale == "normalized":
        return 1.0 - deviation / 100.0
    raise InvalidConfig(f"h_scale must be one of {H_SCALES}, got {scale!r}")


def _masked(dist, vocabulary, allow_eos=True):
    masked = np.array(dist, dtype=np.float64, copy=True)
    masked[vocabulary.bos_id] = 0.0
    masked[vocabulary.unk_id] = 0.0
    if not allow_eos:
        masked[vocabulary.eos_id] = 0.0
    return masked


def _extend(model, tokens, limit, conditioning, pick, min_len=0):
    vocabulary = model.vocabulary
    sequence = list(tokens)
    for _ in range(limit):
        dist = model.next_distribution(tuple(sequence), conditioning)
        masked = _masked(dist, vocabulary, allow_eos=len(sequence) >= min_len)
        if masked.sum() <= 0:
            break
        token = pick(masked)
        sequence.append(token)
        if token == vocabulary.eos_id:
            break
    return tuple(sequence)


def rollout(model: LanguageModel, hypothesis, n: int, strategy: RolloutStrategy = None, *,
            conditioning: Conditioning = None, rng: np.random.Generator = None,
            max_len: Optional[int] = None, min_len: int = 0) -> list:
    """
    Continuations of a hypothesis, each extended by up to n tokens.

    Extension stops early at EOS or when max_len tokens are reached. EOS is
    not drawn before min_len tokens.
    Greedy picks the most probable token (lowest id on ties); sampled draws
    `count` continuations from rng (or a generator seeded with strategy.seed).

    Returns:
        List of token-id tuples, each starting with the hypothesis tokens
    """
    strategy = strategy or RolloutStrategy.greedy()
    tokens = tuple(hypothesis.tokens if isinstance(hypothesis, Hypothesis) else hypothesis)
    if n <= 0 or (tokens and tokens[-1] == model.vocabulary.eos_id):
        return [tokens]

    limit = n if max_len is None else max(0, min(n, max_len - len(tokens)))
    if strategy.kind == "greedy":
        return [_extend(model, tokens, limit, conditioning, lambda p: int(np.argmax(p)), min_len)]

    rng = rng if rng is not None else np.random.default_rng(strategy.seed)

    def sample(p):
        return int(rng.choice(len(p), p=p / p.sum()))

    return [_extend(model, tokens, limit, conditioning, sample, min_len) for _ in range(strategy.count)]


def _text_of(vocabulary, ids):
    return detokenize([vocabulary[i] for i in ids if i != vocabulary.eos_id])


def stopping_points(vocabulary, continuation, start: int, min_len: int = 0) -> list:
    """
    Prefixes of a continuation the decoder could end on.

    Args:
        continuation: Token ids, possibly ending in EOS
        start: Length of the extended hypothesis (EOS excluded)
        min_len: Shortest allowed output

    Returns:
        Token-id tuples of lengths start..len(continuation), EOS dropped
    """
    body = tuple(t for t in continuation if t != vocabulary.eos_id)
    return [body[:k] for k in range(max(start, min_len), len(body) + 1)]


def _word_count(vocabulary, ids, wordlist):
    return compute_stats(_text_of(vocabulary, ids), wordlist).total_words


def _lookahead_value(text, target, decoder_config, source, wordlist):
    h_read = h_eval(text, target, decoder_config.h_scale, decoder_config.h_floor,
                    decoder_config.min_lookahead_words, wordlist)
    if h_read <= decoder_config.h_floor:
        return None
    if decoder_config.faith_weight > 0 and source:
        weight = decoder_config.faith_weight
        return (1.0 - weight) * h_read + weight * lexical_faithfulness(text, source)
    return h_read


def score_candidate(logprob_next: float, continuations: Sequence[str], target: float,
                    decoder_config: DecoderConfig = None, source: str = None, wordlist=None,
                    cache: Optional[dict] = None) -> float:
    """
    g = logprob_next + w * max h over continuation texts.

    Continuations whose readability is undefined (fewer than
    min_lookahead_words words) are ignored; if none is defined the
    lookahead term is skipped. `cache` maps text to its lookahead value.
    """
    decoder_config = decoder_config or DecoderConfig()
    if not decoder_config.uses_lookahead:
        return logprob_next

    values = []
    for text in continuations:
        if cache is not None and text in cache:
            value = cache[text]
        else:
            value = _lookahead_value(text, target, decoder_config, source, wordlist)
            if cache is not None:
                cache[text] = value
        if value is not None:
            values.append(value)
    if not values:
        return logprob_next
    return logprob_next + decoder_config.lookahead_w * max(values)


def extension_score(model: LanguageModel, tokens, logprob: float, target: float,
                    decoder_config: DecoderConfig = None, *, conditioning: Conditioning = None,
                    rng: np.random.Generator = None, source: str = None, wordlist=None,
                    cache: Optional[dict] = None) -> float:
    """
    g of an extended hypothesis: rollouts, their stopping points, then score_candidate.

    Hypotheses with fewer than min_lookahead_words words keep their
    log-probability and are not rolled out.
    """
    cfg = decoder_config or DecoderConfig()
    vocabulary = model.vocabulary
    tokens = tuple(tokens)
    if not cfg.uses_lookahead or _word_count(vocabulary, tokens, wordlist) < cfg.min_lookahead_words:
        return logprob

    start = len([t for t in tokens if t != vocabulary.eos_id])
    texts = []
    for continuation in rollout(model, tokens, cfg.lookahead_n, cfg.rollout, conditioning=conditioning,
                                rng=rng, max_len=cfg.max_len, min_len=cfg.min_len):
        texts.extend(_text_of(vocabulary, p) for p in stopping_points(vocabulary, continuation, start, cfg.min_len))
    return score_candidate(logprob, list(dict.fromkeys(texts)), target, cfg, source, wordlist, cache)


def _rank_key(hypothesis):
    return (-hypothesis.score, -hypothesis.logprob, hypothesis.tokens)


def _candidate_tokens(dist, vocabulary, fanout, allow_eos):
    """Top `fanout` non-EOS tokens by probability (lowest id on ties), plus EOS when allowed."""
    masked = _masked(dist, vocabulary, allow_eos=False)
    order = np.argsort(-masked, kind="stable")
    chosen = [int(t) for t in order[:fanout] if masked[t] > 0]
    if allow_eos and dist[vocabulary.eos_id] > 0:
        chosen.append(vocabulary.eos_id)
    return chosen


def _select(candidates, beam_width, finished):
    """Keep the best beam_width live hypotheses; finished ones ranked in the top beam_width are collected."""
    candidates.sort(key=_rank_key)
    live = []
    for rank, candidate in enumerate(candidates):
        if candidate.finished:
            if rank < beam_width:
                finished.append(candidate)
        elif len(live) < beam_width:
            live.append(candidate)
    return live


def _result(model, best, target, wordlist):
    vocabulary = model.vocabulary
    words = [vocabulary[i] for i in best.tokens if i != vocabulary.eos_id]
    text = detokenize(words)
    try:
        return GenerationResult.from_text(text, words, best.logprob, target, best.score, wordlist)
    except DegenerateText as e:
        raise EmptyGeneration(f"best hypothesis has no words: {text!r}") from e


def decode(model: LanguageModel, source: str, target: ReadabilityTarget,
           decoder_config: DecoderConfig = None, wordlist=None) -> GenerationResult:
    """
    Beam search with readability lookahead.

    Args:
        model: Conditional language model
        source: Source document, passed to the model as conditioning
        target: Requested readability (categories resolve to level centers)
        decoder_config: Beam, lookahead and length settings

    Returns:
        GenerationResult of the highest-g finished hypothesis

    Raises:
        EmptyGeneration: when no hypothesis finishes
    """
    cfg = decoder_config or DecoderConfig()
    vocabulary = model.vocabulary
    r_hat = target.resolve()
    conditioning = Conditioning(source=source, target=target)
    rng = np.random.default_rng(cfg.rollout.seed if cfg.rollout.seed is not None else cfg.seed)
    cache = {}

    live = [Hypothesis()]
    finished = []
    for _ in range(cfg.max_len):
        candidates = []
        for hypothesis in live:
            dist = model.next_distribution(hypothesis.tokens, conditioning)
            allow_eos = len(hypothesis.tokens) >= cfg.min_len
            for token in _candidate_tokens(dist, vocabulary, cfg.candidate_fanout, allow_eos):
                tokens = hypothesis.tokens + (token,)
                logprob = hypothesis.logprob + math.log(dist[token])
                score = extension_score(model, tokens, logprob, r_hat, cfg, conditioning=conditioning,
                                        rng=rng, source=source, wordlist=wordlist, cache=cache)
                done = token == vocabulary.eos_id or len(tokens) >= cfg.max_len
                candidates.append(Hypothesis(tokens, logprob, score, done))

        if not candidates:
            break
        live = _select(candidates, cfg.beam_width, finished)
        if not live:
            break

    if not finished:
        raise EmptyGeneration(f"no hypothesis reached min_len={cfg.min_len} for target {target.label()}")
    return _result(model, min(finished, key=_rank_key), target, wordlist)


def beam_search(model: LanguageModel, source: str, target: ReadabilityTarget,
                decoder_config: DecoderConfig = None, wordlist=None) -> GenerationResult:
    """Plain beam search over the full vocabulary, ranked by log-probability."""
    cfg = decoder_config or DecoderConfig()
    vocabulary = model.vocabulary
    conditioning = Conditioning(source=source, target=target)
    skip = {vocabulary.bos_id, vocabulary.unk_id}

    beams = [Hypothesis()]
    finished = []
    for _ in range(cfg.max_len):
        expansions = []
        for beam in beams:
            dist = model.next_distribution(beam.tokens, conditioning)
            for token, p in enumerate(dist):
                if token in skip or p <= 0:
                    continue
                if token == vocabulary.eos_id and len(beam.tokens) < cfg.min_len:
                    continue
                tokens = beam.tokens + (token,)
                logprob = beam.logprob + math.log(p)
                done = token == vocabulary.eos_id or len(tokens) >= cfg.max_len
                expansions.append(Hypothesis(tokens, logprob, logprob, done))
        if not expansions:
            break
        beams = _select(expansions, cfg.beam_width, finished)
        if not beams:
            break

    if not finished:
        raise EmptyGeneration(f"no hypothesis reached min_len={cfg.min_len}")
    return _result(model, min(finished, key=_rank_key), target, wordlist)


def sample_generation(model: LanguageModel, source: str, target: ReadabilityTarget,
                      decoder_config: DecoderConfig = None, rng: np.random.Generator = None,
                      wordlist=None) -> GenerationResult:
    """Ancestral sampling respecting min_len and max_len."""
    cfg = decoder_config or DecoderConfig()
    rng = rng if rng is not None else np.random.default_rng(cfg.seed)
    vocabulary = model.vocabulary
    conditioning = Conditioning(source=source, target=target)

    tokens = []
    logprob = 0.0
    while len(tokens) < cfg.max_len:
        dist = model.next_distribution(tuple(tokens), conditioning)
        masked = _masked(dist, vocabulary, allow_eos=len(tokens) >= cfg.min_len)
        if masked.sum() <= 0:
            break
        token = int(rng.choice(len(masked), p=masked / masked.sum()))
        logprob += math.log(dist[token])
        tokens.append(token)
        if token == vocabulary.eos_id:
            break

    if len([t for t in tokens if t != vocabulary.eos_id]) < cfg.min_len:
        raise EmptyGeneration(f"sample stopped after {len(tokens)} tokens, below min_len={cfg.min_len}")
    return _result(model, Hypothesis(tuple(tokens), logprob, logprob, True), target, wordlist)
