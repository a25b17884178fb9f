"""
Readability instructions and instruction-labelled datasets.

Two schemes: `category` prepends one of four reading-level instructions
chosen from the reference summary's FRE; `score` prepends the rounded FRE
itself. The measured reference FRE is kept exactly for evaluation.
"""

import logging
import math
import re
from dataclasses import dataclass
from typing import Optional

from tqdm import tqdm

from src.services.readability import config
from src.services.readability.errors import DegenerateText, InvalidConfig, InvalidRecord, InvalidTarget
from src.services.readability.readability_metrics import ReadabilityTarget, ReadingLevel, fre, map_category
from src.services.readability.text_analysis import compute_stats
from src.services.readability.utils.jsonl_utils import read_jsonl_with_deduplication, write_jsonl
from src.services.readability.utils.reporting import print_distribution

logger = logging.getLogger(__name__)

SCHEMES = ("category", "score")

CATEGORY_INSTRUCTIONS = {
    ReadingLevel.ELEVEN_YEAR_OLD: "Summarize this for a 11-year-old student: ",
    ReadingLevel.MIDDLE_SCHOOL: "Summarize this for a middle school student: ",
    ReadingLevel.HIGH_SCHOOL: "Summarize this for a high school student: ",
    ReadingLevel.COLLEGE: "Summarize this for a college student: ",
}

SCORE_INSTRUCTION = "Summarize this with a readability level of {score}: "
_SCORE_INSTRUCTION_RE = re.compile(r"Summarize this with a readability level of -?\d+: ")


@dataclass(frozen=True)
class CorpusExample:
    id: str
    document: str
    summary: Optional[str] = None

    def __post_init__(self):
        if not self.document or not self.document.strip():
            raise InvalidRecord(f"example {self.id!r} has an empty document")

    @classmethod
    def from_record(cls, record):
        if "id" not in record or "document" not in record:
            raise InvalidRecord(f"record needs 'id' and 'document' fields: {sorted(record)}")
        summary = record.get("summary")
        return cls(id=str(record["id"]), document=record["document"], summary=summary or None)

    def to_record(self):
        record = {"id": self.id, "document": self.document}
        if self.summary is not None:
            record["summary"] = self.summary
        return record


@dataclass(frozen=True)
class InstructionExample:
    id: str
    instruction: str
    input: str
    target_readability: ReadabilityTarget
    reference_summary: str
    reference_fre: float
    document: str

    def to_record(self):
        return {
            "id": self.id,
            "document": self.document,
            "summary": self.reference_summary,
            "instruction": self.instruction,
            "input": self.input,
            "reference_fre": self.reference_fre,
            **self.target_readability.to_dict(),
        }


def round_score(value: float) -> int:
    """Round half up, so 61.5 -> 62 and 62.5 -> 63."""
    return int(math.floor(value + 0.5))


def build_category_instruction(reference_fre: float) -> str:
    return CATEGORY_INSTRUCTIONS[map_category(reference_fre)]


def build_score_instruction(fre_value: float) -> str:
    return SCORE_INSTRUCTION.format(score=round_score(fre_value))


def instruction_for_target(target: ReadabilityTarget) -> str:
    """Instruction matching a requested readability at inference time."""
    if target.kind == "category":
        return CATEGORY_INSTRUCTIONS[target.category]
    return build_score_instruction(target.score)


def strip_instruction(text: str) -> tuple:
    """
    Split a prepared input into (instruction, document).

    Returns ("", text) when no known instruction prefixes the text.
    """
    for instruction in CATEGORY_INSTRUCTIONS.values():
        if text.startswith(instruction):
            return instruction, text[len(instruction):]
    match = _SCORE_INSTRUCTION_RE.match(text)
    if match:
        return match.group(), text[match.end():]
    return "", text


def _document_fre(example, wordlist):
    return fre(compute_stats(example.document, wordlist)).value


def prepare_dataset(corpus, scheme: str = "category", wordlist=None) -> list:
    """
    Label every example with an instruction derived from its summary's FRE.

    Examples without a summary, or whose summary has no measurable FRE, are
    skipped with a warning.

    Args:
        corpus: list of CorpusExample
        scheme: 'category' or 'score'
        wordlist: Easy-word list (default: bundled list)

    Returns:
        list of InstructionExample in corpus order
    """
    if scheme not in SCHEMES:
        raise InvalidConfig(f"scheme must be one of {SCHEMES}, got {scheme!r}")

    prepared = []
    skipped = 0
    for example in tqdm(corpus, desc=f"Preparing ({scheme})", disable=len(corpus) < 100):
        if not example.summary:
            logger.warning(f"  ⚠️ Skipping {example.id}: no reference summary")
            skipped += 1
            continue
        try:
            reference_fre = fre(compute_stats(example.summary, wordlist)).value
            if scheme == "category":
                instruction = build_category_instruction(reference_fre)
                target = ReadabilityTarget.from_category(map_category(reference_fre))
            else:
                instruction = build_score_instruction(reference_fre)
                target = ReadabilityTarget.from_score(reference_fre)
        except (DegenerateText, InvalidTarget) as e:
            logger.warning(f"  ⚠️ Skipping {example.id}: {e}")
            skipped += 1
            continue

        prepared.append(InstructionExample(
            id=example.id,
            instruction=instruction,
            input=instruction + example.document,
            target_readability=target,
            reference_summary=example.summary,
            reference_fre=reference_fre,
            document=example.document,
        ))

    if skipped:
        logger.warning(f"⚠️ Skipped {skipped} of {len(corpus)} examples")
    return prepared


def filter_test_set(corpus, threshold: float = config.FILTER_THRESHOLD, wordlist=None) -> list:
    """Keep examples whose document FRE is strictly below threshold."""
    kept = []
    for example in corpus:
        try:
            score = _document_fre(example, wordlist)
        except DegenerateText:
            logger.warning(f"  ⚠️ Dropping {example.id}: document has no measurable FRE")
            continue
        if score < threshold:
            kept.append(example)

    logger.info(f"  ✅ Kept {len(kept)} of {len(corpus)} documents with FRE < {threshold:g}")
    return kept


def log_category_distribution(prepared):
    """Log how many prepared examples fall in each reading level."""
    levels = [map_category(example.reference_fre).value for example in prepared]
    return print_distribution(levels, "Reading level distribution", order=[level.value for level in ReadingLevel])


def load_corpus(path) -> list:
    """Read a JSONL corpus of {id, document, summary} records; invalid records are skipped."""
    examples = []
    for record in read_jsonl_with_deduplication(path):
        try:
            examples.append(CorpusExample.from_record(record))
        except InvalidRecord as e:
            logger.warning(f"  ⚠️ {e}")
    return examples


def write_records(path, items):
    """Write CorpusExample, InstructionExample or plain dict records as JSONL."""
    return write_jsonl(path, [item if isinstance(item, dict) else item.to_record() for item in items])
