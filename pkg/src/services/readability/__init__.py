"""
Readability-controlled text generation toolkit.

Readability formulas, a Gaussian readability reward, an n-gram reference
language model, a readability-lookahead beam decoder, instruction dataset
construction and an evaluation harness.
"""

__version__ = "1.2.0"
