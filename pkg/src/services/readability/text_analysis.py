"""
Text statistics for readability formulas.

Rule-based sentence segmentation, word tokenization and heuristic syllable
counting, composed into the TextStats count vector every readability
formula consumes.

All functions are pure; WordList is immutable and safe to share.
"""

import logging
import re
import unicodedata
from dataclasses import dataclass, fields
from functools import lru_cache
from pathlib import Path

from src.services.readability import config
from src.services.readability.errors import WordListError

logger = logging.getLogger(__name__)

# --- Segmentation rules ---

ABBREVIATIONS = frozenset({
    "mr.", "mrs.", "ms.", "dr.", "prof.", "sr.", "jr.", "st.", "mt.",
    "u.s.", "u.k.", "u.n.", "e.g.", "i.e.", "etc.", "vs.", "inc.", "ltd.",
    "co.", "corp.", "jan.", "feb.", "aug.", "sept.", "oct.", "nov.", "dec.",
    "no.", "gen.", "gov.", "sen.", "rep.", "capt.", "lt.", "col.", "approx.",
    "a.m.", "p.m.",
})

_BOUNDARY_RE = re.compile(r"[.!?]+[\"')\]’”]*(?=\s|$)")
_INITIAL_RE = re.compile(r"[B-HJ-Z]\.")
_WORD_RE = re.compile(r"[^\W_]+(?:['’\-][^\W_]+)*")
_LEADING_PUNCT = "\"'([‘“"

# --- Syllable heuristic ---

VOWELS = frozenset("aeiouy")
_LE_CONSONANTS = frozenset("bcdfgkpstvz")
_SIBILANT_ENDINGS = ("ses", "xes", "zes", "ces", "ges", "ches", "shes")
_SILENT_E_SUFFIXES = ("ly", "ment", "ful", "ness", "less")

SYLLABLE_EXCEPTIONS = {
    "area": 3, "areas": 3, "idea": 3, "ideas": 3, "create": 2, "created": 3,
    "creates": 2, "react": 2, "reacted": 3, "science": 2, "sciences": 3,
    "client": 2, "clients": 2, "michael": 2, "argue": 2, "every": 2,
    "everything": 3, "everyone": 3, "everybody": 4, "business": 2,
    "businesses": 3, "element": 3, "elements": 3, "maybe": 2, "recipe": 3,
    "cafe": 2, "poem": 2, "poems": 2, "poet": 2, "poetry": 3,
    "someone": 2, "anyone": 3, "naive": 2, "coordinate": 4, "cooperate": 4,
    "evening": 2, "wednesday": 2, "colonel": 2,
}


@dataclass(frozen=True)
class TextStats:
    """Count vector of a text."""
    total_words: int = 0
    total_sentences: int = 0
    total_syllables: int = 0
    total_letters: int = 0
    long_words: int = 0
    complex_words: int = 0
    difficult_words: int = 0

    def __add__(self, other):
        if not isinstance(other, TextStats):
            return NotImplemented
        return TextStats(**{
            f.name: getattr(self, f.name) + getattr(other, f.name)
            for f in fields(self)
        })

    def to_dict(self):
        return {f.name: getattr(self, f.name) for f in fields(self)}


@dataclass(frozen=True)
class WordList:
    """Easy-word list used by the Dale-Chall formula."""
    entries: frozenset
    source_path: str

    def __contains__(self, word):
        return word in self.entries

    def __len__(self):
        return len(self.entries)


def load_wordlist(path=None) -> WordList:
    """
    Load an easy-word list: UTF-8, one word per line, '#' starts a comment.

    Args:
        path: File to read (default: configured WORDLIST_PATH)

    Returns:
        WordList with lowercased entries
    """
    path = Path(path) if path is not None else config.WORDLIST_PATH
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as e:
        raise WordListError(f"Cannot read word list {path}: {e}") from e

    entries = set()
    skipped = 0
    for line in lines:
        word = line.split("#", 1)[0].strip().lower()
        if not word:
            continue
        if any(ch.isspace() for ch in word):
            skipped += 1
            continue
        entries.add(word)

    if skipped:
        logger.warning(f"⚠️ Skipped {skipped} multi-word entries in {path}")
    if not entries:
        raise WordListError(f"Word list {path} has no entries")

    logger.debug(f"Loaded {len(entries)} easy words from {path}")
    return WordList(entries=frozenset(entries), source_path=str(path))


@lru_cache(maxsize=1)
def default_wordlist() -> WordList:
    return load_wordlist()


def _is_abbreviation(text, boundary_start):
    """True when the '.' at boundary_start belongs to a known abbreviation."""
    token_start = boundary_start
    while token_start > 0 and not text[token_start - 1].isspace():
        token_start -= 1
    token = text[token_start:boundary_start + 1].lstrip(_LEADING_PUNCT)
    return token.lower() in ABBREVIATIONS or bool(_INITIAL_RE.fullmatch(token))


def segment_sentences(text: str) -> list:
    """
    Split text into sentences at . ! ? followed by whitespace or end of text.

    Abbreviations in ABBREVIATIONS and single-letter initials do not end a
    sentence; decimal points never do since no whitespace follows them.
    Trailing text without a terminator forms the last sentence.
    """
    sentences = []
    start = 0
    for match in _BOUNDARY_RE.finditer(text):
        if match.group().startswith(".") and len(match.group().rstrip("\"')]’”")) == 1:
            if _is_abbreviation(text, match.start()):
                continue
        sentence = text[start:match.end()].strip()
        if sentence:
            sentences.append(sentence)
        start = match.end()

    tail = text[start:].strip()
    if tail:
        sentences.append(tail)
    return sentences


def tokenize_words(sentence: str) -> list:
    """Words are runs of letters/digits joined by internal apostrophes or hyphens."""
    return _WORD_RE.findall(sentence)


def count_letters(word: str) -> int:
    return sum(1 for ch in word if ch.isalpha())


def _fold(word):
    decomposed = unicodedata.normalize("NFKD", word.lower())
    return "".join(ch for ch in decomposed if ch.isalpha() and not unicodedata.combining(ch))


def _vowel_mask(w):
    """y is a vowel unless a vowel follows it; before 'ing' it always is."""
    mask = []
    for i, ch in enumerate(w):
        if ch == "y":
            nxt = w[i + 1] if i + 1 < len(w) else ""
            mask.append(nxt not in VOWELS or w.startswith("ing", i + 1))
        else:
            mask.append(ch in VOWELS)
    return mask


def _hiatus_splits(w, start, end):
    """Extra syllables inside the vowel run w[start:end]."""
    run = w[start:end]
    before = w[start - 1] if start > 0 else ""
    before2 = w[max(start - 2, 0):start]
    extra = 0

    if "ia" in run and before not in ("c", "t", "s"):
        extra += 1
    if "io" in run and before not in ("t", "s", "c", "x", "g", "n") and before2 != "ll":
        extra += 1
    if "eo" in run and before not in ("p", "g"):
        extra += 1
    if "ua" in run and before not in ("g", "q"):
        extra += 1
    if "ue" in run and w[end:] not in ("", "s", "d") and before not in ("g", "q"):
        extra += 1
    if "ie" in run and (w[end:].startswith("t") or w[end:] in ("r", "st")):
        extra += 1
    if "iu" in run or "uou" in run:
        extra += 1
    if "ae" in run and start > 0:
        extra += 1
    return extra


def _heuristic_syllables(w):
    mask = _vowel_mask(w)
    count = 0
    i = 0
    while i < len(w):
        if mask[i]:
            j = i
            while j < len(w) and mask[j]:
                j += 1
            count += 1 + _hiatus_splits(w, i, j)
            i = j
        else:
            i += 1

    def consonant_at(k):
        return 0 <= k < len(w) and not mask[k]

    n = len(w)
    if count > 1:
        if w.endswith("e") and consonant_at(n - 2):
            if not (w.endswith("le") and w[n - 3:n - 2] in _LE_CONSONANTS):
                count -= 1
        elif w.endswith("ue") and w[n - 3:n - 2] in ("g", "q"):
            count -= 1
        elif w.endswith("es") and consonant_at(n - 3):
            keeps = w.endswith(_SIBILANT_ENDINGS) or (w.endswith("les") and w[n - 4:n - 3] in _LE_CONSONANTS)
            if not keeps:
                count -= 1
        elif w.endswith("ed") and consonant_at(n - 3):
            keeps = w[n - 3] in ("t", "d") or (w.endswith("led") and w[n - 4:n - 3] in _LE_CONSONANTS)
            if not keeps:
                count -= 1

    for suffix in _SILENT_E_SUFFIXES:
        k = n - len(suffix) - 1
        if w.endswith("e" + suffix) and k >= 2 and consonant_at(k - 1) and mask[k - 2] and count > 1:
            count -= 1
            break

    if w.endswith("ing") and n > 3 and mask[n - 4]:
        count += 1

    return count


@lru_cache(maxsize=65536)
def count_syllables(word: str) -> int:
    """
    Estimate syllables: vowel groups with silent-e, -es, -ed and hiatus
    corrections, overridden by SYLLABLE_EXCEPTIONS.

    Numeric tokens count as one syllable. Hyphenated words sum their parts.
    """
    parts = [_fold(p) for p in re.split(r"[-‐‑]", word)]
    parts = [p for p in parts if p]
    if not parts:
        return 1

    total = 0
    for part in parts:
        if part in SYLLABLE_EXCEPTIONS:
            total += SYLLABLE_EXCEPTIONS[part]
        else:
            total += max(1, min(_heuristic_syllables(part), len(part)))
    return total


def _strip_possessive(word):
    word = word.replace("’", "'")
    if word.endswith("'s"):
        return word[:-2]
    return word.rstrip("'")


def _easy_candidates(word):
    yield word
    if word.endswith("es"):
        yield word[:-2]
    if word.endswith("s"):
        yield word[:-1]
    if word.endswith("ing"):
        yield word[:-3]
        yield word[:-3] + "e"
    if word.endswith("ed"):
        yield word[:-2]
        yield word[:-1]


def is_difficult(word: str, wordlist: WordList) -> bool:
    """Dale-Chall difficulty with plural and -ing/-ed stripping retried on a miss."""
    if count_letters(word) == 0:
        return False
    base = _strip_possessive(word.lower())
    return not any(candidate in wordlist for candidate in _easy_candidates(base) if candidate)


def compute_stats(text: str, wordlist: WordList = None) -> TextStats:
    """
    Compute the readability count vector of a text.

    Args:
        text: Raw text
        wordlist: Easy-word list for difficult words (default: bundled list)

    Returns:
        TextStats; all zeros for text without words
    """
    wordlist = wordlist if wordlist is not None else default_wordlist()

    sentences = 0
    words = syllables = letters = long_words = complex_words = difficult = 0
    for sentence in segment_sentences(text):
        tokens = tokenize_words(sentence)
        if not tokens:
            continue
        sentences += 1
        for token in tokens:
            n_letters = count_letters(token)
            n_syllables = count_syllables(token)
            words += 1
            syllables += n_syllables
            letters += n_letters
            long_words += n_letters > config.LONG_WORD_LETTERS
            complex_words += n_syllables >= config.COMPLEX_WORD_SYLLABLES
            difficult += is_difficult(token, wordlist)

    return TextStats(
        total_words=words,
        total_sentences=sentences,
        total_syllables=syllables,
        total_letters=letters,
        long_words=int(long_words),
        complex_words=int(complex_words),
        difficult_words=int(difficult),
    )


def sentence_word_counts(text: str) -> list:
    """Words per sentence, skipping sentences without words."""
    counts = [len(tokenize_words(s)) for s in segment_sentences(text)]
    return [c for c in counts if c > 0]
