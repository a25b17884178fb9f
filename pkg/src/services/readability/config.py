# src/services/readability/config.py
"""
Runtime settings and algorithm defaults.

Environment variables (optionally from a .env file) override the defaults
below; CLI flags override both.
"""

import os
from pathlib import Path

from dotenv import load_dotenv

load_dotenv()

PROJECT_ROOT = Path(__file__).resolve().parents[3]

# --- Paths ---
DATA_DIR = Path(os.getenv("READABILITY_DATA_DIR", PROJECT_ROOT / "data"))
WORDLIST_PATH = Path(os.getenv("READABILITY_WORDLIST", DATA_DIR / "dale_chall_3000.txt"))
TOY_CORPUS_PATH = DATA_DIR / "toy_corpus.jsonl"
SYLLABLE_ORACLE_PATH = DATA_DIR / "syllable_oracle.tsv"

# --- Runtime ---
DEFAULT_SEED = int(os.getenv("READABILITY_SEED", "13"))
LOG_LEVEL = os.getenv("READABILITY_LOG_LEVEL", "INFO").upper()
WORKERS = int(os.getenv("READABILITY_WORKERS", "1"))

# --- Readability ---
FRE_MIN_TARGET = -50.0
FRE_MAX_TARGET = 130.0
LONG_WORD_LETTERS = 7
COMPLEX_WORD_SYLLABLES = 3
DEFAULT_GFI_VARIANT = "per_sentence"

# --- Reward ---
REWARD_SIGMA = 10.0

# --- N-gram model ---
NGRAM_ORDER = 3
NGRAM_SMOOTHING = 0.01
SOURCE_MIX_WEIGHT = 0.2

# --- Lookahead decoding (beam 3, w 25, n 20) ---
BEAM_WIDTH = 3
LOOKAHEAD_N = 20
LOOKAHEAD_W = 25.0
H_SCALE = "normalized"
MAX_LEN = 64
MIN_LEN = 8
MIN_LOOKAHEAD_WORDS = 3
H_FLOOR = -1.0e4

# --- Dataset preparation ---
FILTER_THRESHOLD = 50.0

# --- Ablation defaults ---
ABLATION_TARGETS = (30.0, 50.0, 70.0, 90.0)
HORIZON_SWEEP = (3, 5, 10, 20)
WEIGHT_SWEEP = (0.0, 5.0, 25.0)
FAITH_SWEEP = (0.0, 0.35, 0.65, 1.0)
