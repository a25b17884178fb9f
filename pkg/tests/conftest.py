"""Shared fixtures: bundled word list, toy corpus and a model trained on it."""

import pytest

from src.services.readability import config
from src.services.readability.instruction_builder import load_corpus
from src.services.readability.ngram_lm import SourceMixtureModel, train
from src.services.readability.text_analysis import load_wordlist


@pytest.fixture(scope="session")
def wordlist():
    return load_wordlist(config.WORDLIST_PATH)


@pytest.fixture(scope="session")
def toy_corpus():
    return load_corpus(config.TOY_CORPUS_PATH)


@pytest.fixture(scope="session")
def toy_model(toy_corpus):
    return train([example.summary for example in toy_corpus], order=3, smoothing=0.01)


@pytest.fixture(scope="session")
def toy_mixture(toy_model):
    return SourceMixtureModel(toy_model, weight=0.2)


@pytest.fixture
def write_lines(tmp_path):
    def _write(name, lines):
        path = tmp_path / name
        path.write_text("".join(line + "\n" for line in lines), encoding="utf-8")
        return path
    return _write
