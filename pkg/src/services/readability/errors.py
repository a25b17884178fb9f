"""Exceptions raised by the readability toolkit."""


class ReadabilityError(ValueError):
    """Base class for every error raised on bad input."""


class DegenerateText(ReadabilityError):
    """Text has no words or no sentences, so a formula is undefined."""


class InvalidSigma(ReadabilityError):
    """Gaussian reward width must be strictly positive."""


class InvalidTarget(ReadabilityError):
    """Readability target outside sanity bounds or unparsable."""


class InvalidConfig(ReadabilityError):
    """A configuration object violates its invariants."""


class EmptyCorpus(ReadabilityError):
    """Training or preparation was asked to run on no data."""


class EmptyGeneration(ReadabilityError):
    """No decoding hypothesis reached the minimum length."""


class EmptyRun(ReadabilityError):
    """An aggregate was requested over zero records."""


class DegenerateVariance(ReadabilityError):
    """Correlation requested on a series with zero variance."""

    def __init__(self, message, partial_report=None):
        super().__init__(message)
        self.partial_report = partial_report


class WordListError(ReadabilityError):
    """Easy-word list missing, empty or malformed."""


class ModelFormatError(ReadabilityError):
    """Persisted language model could not be parsed."""


class InvalidRecord(ReadabilityError):
    """A corpus or generations record is missing required fields."""
