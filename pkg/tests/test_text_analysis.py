"""Tests for sentence segmentation, tokenization, syllables and TextStats."""

import pytest

from src.services.readability import config
from src.services.readability.errors import WordListError
from src.services.readability.text_analysis import (
    TextStats,
    compute_stats,
    count_letters,
    count_syllables,
    is_difficult,
    load_wordlist,
    segment_sentences,
    sentence_word_counts,
    tokenize_words,
)


class TestSegmentSentences:

    def test_two_terminated_clauses(self):
        assert segment_sentences("The cat sat. It slept.") == ["The cat sat.", "It slept."]

    def test_empty_input(self):
        assert segment_sentences("") == []
        assert segment_sentences("   \n ") == []

    def test_score_line_is_not_split(self):
        text = "Barca won 85-80 on Thursday night. Real remain top."
        assert len(segment_sentences(text)) == 2

    def test_abbreviations_and_decimals_do_not_split(self):
        text = "Mr. Smith paid 3.5 dollars in the U.S. on Monday. He left."
        assert segment_sentences(text) == ["Mr. Smith paid 3.5 dollars in the U.S. on Monday.", "He left."]

    def test_initials_do_not_split(self):
        assert len(segment_sentences("J. K. Rowling wrote it. Then she rested.")) == 2

    def test_closing_quote_stays_with_sentence(self):
        assert segment_sentences('He said "Stop." Then he left!') == ['He said "Stop."', "Then he left!"]

    def test_unterminated_tail_is_a_sentence(self):
        assert segment_sentences("Wow! Really? yes") == ["Wow!", "Really?", "yes"]

    def test_sentences_cover_input(self):
        text = "One. Two three!  Four?"
        assert "".join(segment_sentences(text)).replace(" ", "") == text.replace(" ", "")


class TestTokenizeWords:

    def test_punctuation_discarded(self):
        assert tokenize_words("The cat sat.") == ["The", "cat", "sat"]

    def test_possessive_kept_whole(self):
        assert tokenize_words("Neymar's sister") == ["Neymar's", "sister"]

    def test_numeric_token_retained(self):
        tokens = tokenize_words("85-80 victory")
        assert tokens == ["85-80", "victory"]
        assert count_letters(tokens[0]) == 0

    def test_contractions_and_hyphens(self):
        assert tokenize_words("It's a well-known fact, isn't it?") == [
            "It's", "a", "well-known", "fact", "isn't", "it",
        ]

    def test_non_ascii_letters(self):
        assert tokenize_words("Le café était fermé.") == ["Le", "café", "était", "fermé"]
        assert count_letters("café") == 4


class TestCountSyllables:

    @pytest.mark.parametrize("word, expected", [
        ("cat", 1),
        ("summarize", 3),
        ("readability", 5),
        ("table", 2),
        ("walked", 1),
        ("wanted", 2),
        ("boxes", 2),
        ("lion", 2),
        ("playing", 2),
        ("League", 1),
        ("Rafaella", 4),
        ("café", 2),
    ])
    def test_known_words(self, word, expected):
        assert count_syllables(word) == expected

    def test_numeric_token_is_one_syllable(self):
        assert count_syllables("85-80") == 1
        assert count_syllables("2024") == 1

    def test_hyphenated_words_sum_parts(self):
        assert count_syllables("ice-cream") == count_syllables("ice") + count_syllables("cream")

    def test_floor_and_ceiling(self):
        for word in ["a", "I", "rhythm", "strengths", "queue", "eye", "xyz", "aaa"]:
            n = count_syllables(word)
            assert 1 <= n <= max(1, count_letters(word))

    def test_oracle_accuracy(self):
        rows = []
        for line in config.SYLLABLE_ORACLE_PATH.read_text(encoding="utf-8").splitlines():
            if line.startswith("#") or not line.strip():
                continue
            word, count = line.split("\t")
            rows.append((word, int(count)))

        assert len(rows) == 200
        correct = sum(count_syllables(word) == count for word, count in rows)
        assert correct / len(rows) >= 0.90


class TestWordList:

    def test_bundled_list(self, wordlist):
        assert len(wordlist) > 2500
        assert "cat" in wordlist
        assert all(entry == entry.lower() and " " not in entry for entry in wordlist.entries)

    def test_missing_file(self, tmp_path):
        with pytest.raises(WordListError):
            load_wordlist(tmp_path / "nope.txt")

    def test_empty_file(self, write_lines):
        with pytest.raises(WordListError):
            load_wordlist(write_lines("empty.txt", ["# only a comment", ""]))

    def test_comments_case_and_multiword_entries(self, write_lines):
        words = load_wordlist(write_lines("words.txt", ["# easy words", "Cat", "dog  # pet", "ice cream"]))
        assert words.entries == frozenset({"cat", "dog"})

    def test_suffix_stripping(self, wordlist):
        assert not is_difficult("cats", wordlist)
        assert not is_difficult("boxes", wordlist)
        assert not is_difficult("jumping", wordlist)
        assert not is_difficult("Dog's", wordlist)
        assert is_difficult("photosynthesis", wordlist)
        assert not is_difficult("85-80", wordlist)


class TestComputeStats:

    def test_cat_sat(self, wordlist):
        stats = compute_stats("The cat sat.", wordlist)
        assert stats == TextStats(
            total_words=3, total_sentences=1, total_syllables=3, total_letters=9,
            long_words=0, complex_words=0, difficult_words=0,
        )

    def test_empty_text(self, wordlist):
        assert compute_stats("", wordlist) == TextStats()
        assert compute_stats("... !!", wordlist) == TextStats()

    def test_long_and_complex_words(self, wordlist):
        stats = compute_stats("Beautiful elephants.", wordlist)
        assert stats.long_words == 2
        assert stats.complex_words == 2

    def test_concatenation_additivity(self, toy_corpus, wordlist):
        for example in toy_corpus[:10]:
            a, b = example.summary, example.document
            assert compute_stats(a + " " + b, wordlist) == compute_stats(a, wordlist) + compute_stats(b, wordlist)

    def test_invariants(self, toy_corpus, wordlist):
        for example in toy_corpus:
            stats = compute_stats(example.document, wordlist)
            assert stats.total_sentences >= 1
            assert stats.total_syllables >= stats.total_words
            assert stats.long_words <= stats.total_words
            assert stats.complex_words <= stats.total_words
            assert stats.difficult_words <= stats.total_words

    def test_deterministic(self, wordlist):
        text = "Barcelona defeated Real Madrid 85-80 in El Clasico on Thursday night."
        assert compute_stats(text, wordlist) == compute_stats(text, wordlist)

    def test_to_dict(self):
        assert TextStats(total_words=2).to_dict()["total_words"] == 2


def test_sentence_word_counts():
    assert sentence_word_counts("The cat sat. It slept.") == [3, 2]
    assert sentence_word_counts("") == []
    assert sentence_word_counts("Hi. ... Bye now") == [1, 2]
