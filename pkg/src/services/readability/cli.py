"""
Command-line entry point.

    python -m src.services.readability.cli <command> [flags]

Commands: analyze, prepare, train-lm, decode, evaluate, ablate, rerun.
Every file-producing command writes <output>.manifest.json next to its
output; `rerun <manifest>` replays the recorded arguments.

Exit codes: 0 success, 1 internal error, 2 bad input or flags.
"""

import argparse
import json
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import pandas as pd
from tqdm import tqdm

# Ensure project root is on Python path when run as a script
sys.path.append(os.path.abspath(os.path.join(os.path.dirname(__file__), "../../..")))

from src.services.readability import __version__, config
from src.services.readability.errors import DegenerateText, EmptyGeneration, EmptyRun, ReadabilityError
from src.services.readability.eval_harness import (
    RunRecord,
    best_of_k_generation,
    build_report,
    records_from_generations,
    sweep_row,
    write_report,
    write_sweep,
)
from src.services.readability.instruction_builder import (
    SCHEMES,
    filter_test_set,
    load_corpus,
    log_category_distribution,
    prepare_dataset,
    write_records,
)
from src.services.readability.lookahead_decoder import H_SCALES, DecoderConfig, RolloutStrategy, decode
from src.services.readability.ngram_lm import SourceMixtureModel, load_model, perplexity, save_model, train
from src.services.readability.readability_metrics import GFI_VARIANTS, Metric, ReadabilityTarget, score_all
from src.services.readability.text_analysis import compute_stats, load_wordlist
from src.services.readability.utils.corpus_validation import validate_corpus
from src.services.readability.utils.jsonl_utils import dumps_record, read_jsonl_with_deduplication, write_json
from src.services.readability.utils.reporting import print_section

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_BAD_INPUT = 2

SWEEP_FIELDS = {
    "n": ("lookahead_n", int, config.HORIZON_SWEEP),
    "w": ("lookahead_w", float, config.WEIGHT_SWEEP),
    "faith": ("faith_weight", float, config.FAITH_SWEEP),
}


@dataclass
class RunManifest:
    """Everything needed to reproduce one command's outputs."""
    command: str
    argv: list
    config: dict
    inputs: list = field(default_factory=list)
    outputs: list = field(default_factory=list)
    seed: int = config.DEFAULT_SEED
    version: str = __version__

    @staticmethod
    def path_for(output) -> Path:
        return Path(str(output) + ".manifest.json")

    def write(self, output) -> Path:
        return write_json(self.path_for(output), asdict(self))

    @classmethod
    def read(cls, path):
        with Path(path).open(encoding="utf-8") as handle:
            return cls(**json.load(handle))


# ---------------------------------------------------------------
# Helpers
# ---------------------------------------------------------------
def _json_safe(value):
    if isinstance(value, Path):
        return str(value)
    if isinstance(value, (list, tuple)):
        return [_json_safe(v) for v in value]
    return value


def _manifest(args, inputs, outputs) -> RunManifest:
    settings = {key: _json_safe(value) for key, value in sorted(vars(args).items())
                if key not in ("func", "argv")}
    return RunManifest(
        command=args.command,
        argv=list(args.argv),
        config=settings,
        inputs=[str(p) for p in inputs],
        outputs=[str(p) for p in outputs],
        seed=args.seed,
    )


def _wordlist(args):
    return load_wordlist(args.wordlist) if args.wordlist else None


def _progress(iterable, args, total, desc):
    disable = args.quiet or not sys.stderr.isatty()
    return tqdm(iterable, total=total, desc=desc, disable=disable)


def _ordered_map(fn, items, args, desc):
    """Map over items with --workers threads; results come back in input order."""
    if args.workers <= 1:
        return list(_progress(map(fn, items), args, len(items), desc))
    with ThreadPoolExecutor(max_workers=args.workers) as executor:
        return list(_progress(executor.map(fn, items), args, len(items), desc))


def _parse_targets(values):
    raw = values or [",".join(f"{t:g}" for t in config.ABLATION_TARGETS)]
    targets = []
    for value in raw:
        for part in value.split(","):
            if part.strip():
                targets.append(ReadabilityTarget.parse(part))
    return targets


def parse_sweep(text):
    """'n=3,5,10,20' -> ('n', [3, 5, 10, 20]); a bare 'n' takes the default values."""
    name, sep, values = text.partition("=")
    name = name.strip()
    if name in SWEEP_FIELDS and not sep:
        _, cast, defaults = SWEEP_FIELDS[name]
        return name, [cast(v) for v in defaults]
    if name not in SWEEP_FIELDS or not values:
        raise argparse.ArgumentTypeError(f"sweep must look like n=3,5 or w=0,25 or faith=0,0.35; got {text!r}")
    _, cast, _ = SWEEP_FIELDS[name]
    try:
        return name, [cast(v) for v in values.split(",") if v.strip()]
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"bad sweep value in {text!r}: {e}") from e


def decoder_config_from_args(args) -> DecoderConfig:
    if args.rollout == "greedy":
        rollout = RolloutStrategy.greedy()
    else:
        rollout = RolloutStrategy.sampled(args.rollout_count, args.seed)
    return DecoderConfig(
        beam_width=args.beam,
        candidate_fanout=args.fanout,
        lookahead_n=args.n,
        lookahead_w=args.w,
        h_scale=args.h_scale,
        rollout=rollout,
        max_len=args.max_len,
        min_len=args.min_len,
        faith_weight=args.faith_weight,
        seed=args.seed,
    )


def _load_decoding_model(args):
    model = load_model(args.model)
    if args.source_weight > 0:
        model = SourceMixtureModel(model, args.source_weight)
    return model


def generate_records(model, corpus, targets, decoder_config, args, wordlist=None) -> list:
    """Decode every (example, target) pair; failed pairs are skipped with a warning."""
    jobs = [(example, target) for example in corpus for target in targets]

    def run(job):
        example, target = job
        try:
            if args.best_of:
                generated = best_of_k_generation(model, example.document, target, args.best_of,
                                                 decoder_config, wordlist)
            else:
                generated = decode(model, example.document, target, decoder_config, wordlist)
        except (EmptyGeneration, DegenerateText) as e:
            logger.warning(f"  ⚠️ {example.id} @ {target.label()}: {e}")
            return None
        return RunRecord(example.id, target, generated, example.document, example.summary)

    results = _ordered_map(run, jobs, args, "Decoding")
    return [record for record in results if record is not None]


# ---------------------------------------------------------------
# Commands
# ---------------------------------------------------------------
def _read_analyze_input(args):
    if args.input == "-":
        text = sys.stdin.read()
    else:
        text = Path(args.input).read_text(encoding="utf-8")

    if args.field:
        items = []
        for line_no, line in enumerate(text.splitlines(), start=1):
            if not line.strip():
                continue
            record = json.loads(line)
            if args.field not in record:
                raise ReadabilityError(f"line {line_no}: no field {args.field!r}")
            items.append((str(record.get("id", line_no)), record[args.field]))
        return items

    paragraphs = [p.strip() for p in text.split("\n\n")]
    return [(str(i), p) for i, p in enumerate((p for p in paragraphs if p), start=1)]


def cmd_analyze(args) -> int:
    wordlist = _wordlist(args)
    rows = []
    for item_id, text in _read_analyze_input(args):
        stats = compute_stats(text, wordlist)
        try:
            scores = score_all(stats, args.gfi_variant)
        except DegenerateText as e:
            logger.warning(f"  ⚠️ Skipping {item_id}: {e}")
            continue
        rows.append({
            "id": item_id,
            "words": stats.total_words,
            "sentences": stats.total_sentences,
            **{metric.value: round(scores[metric].value, 4) for metric in Metric},
        })

    columns = ["id", "words", "sentences", *(metric.value for metric in Metric)]
    df = pd.DataFrame(rows, columns=columns)
    if args.format == "json":
        output = "".join(dumps_record(row) + "\n" for row in rows)
    elif args.format == "csv":
        output = df.to_csv(index=False)
    else:
        output = (df.to_string(index=False, float_format=lambda v: f"{v:.2f}") + "\n") if rows else ""

    if args.output:
        Path(args.output).write_text(output, encoding="utf-8")
        _manifest(args, [args.input], [args.output]).write(args.output)
    else:
        sys.stdout.write(output)
    return EXIT_OK


def cmd_prepare(args) -> int:
    print_section("PREPARE INSTRUCTION DATASET")
    wordlist = _wordlist(args)
    corpus = load_corpus(args.corpus)
    validate_corpus(corpus, wordlist=wordlist)

    if args.filter_below is not None:
        corpus = filter_test_set(corpus, args.filter_below, wordlist)

    prepared = prepare_dataset(corpus, args.scheme, wordlist)
    log_category_distribution(prepared)
    write_records(args.output, prepared)
    _manifest(args, [args.corpus], [args.output]).write(args.output)
    return EXIT_OK


def cmd_train_lm(args) -> int:
    print_section("TRAIN N-GRAM MODEL")
    records = read_jsonl_with_deduplication(args.corpus)
    texts = [record[args.field] for record in records if record.get(args.field)]
    model = train(texts, args.order, args.smoothing)
    save_model(model, args.output)

    ppl = [perplexity(model, text) for text in texts]
    logger.info(f"📊 Training perplexity: mean {sum(ppl) / len(ppl):.2f} over {len(ppl)} texts")
    _manifest(args, [args.corpus], [args.output]).write(args.output)
    return EXIT_OK


def cmd_decode(args) -> int:
    print_section("DECODE")
    wordlist = _wordlist(args)
    decoder_config = decoder_config_from_args(args)
    targets = _parse_targets(args.target)
    model = _load_decoding_model(args)
    corpus = load_corpus(args.corpus)
    if args.limit:
        corpus = corpus[:args.limit]

    logger.info(f"Decoding {len(corpus)} documents x {len(targets)} targets "
                f"(beam {decoder_config.beam_width}, w {decoder_config.lookahead_w:g}, "
                f"n {decoder_config.lookahead_n})")
    records = generate_records(model, corpus, targets, decoder_config, args, wordlist)
    write_records(args.output, [record.to_record() for record in records])
    _manifest(args, [args.model, args.corpus], [args.output]).write(args.output)
    logger.info(f"✅ {len(records)} generations written")
    return EXIT_OK


def cmd_evaluate(args) -> int:
    print_section("EVALUATE")
    wordlist = _wordlist(args)
    rows = read_jsonl_with_deduplication(args.generations, id_field=None)
    records = records_from_generations(rows, wordlist)
    report = build_report(records, run_config={"seed": args.seed, "sigma": args.sigma},
                          strict=args.strict, gfi_variant=args.gfi_variant, sigma=args.sigma,
                          wordlist=wordlist)
    outputs = write_report(report, args.report)

    logger.info(f"📊 FRE delta {report.overall['fre_delta']:.2f} over {report.overall['n']} records")
    for name, rho in report.correlations.items():
        logger.info(f"  {name.upper()} rho: {'n/a' if rho is None else f'{rho:.3f}'}")
    _manifest(args, [args.generations], outputs).write(args.report)
    return EXIT_OK


def cmd_ablate(args) -> int:
    print_section("ABLATION")
    wordlist = _wordlist(args)
    base = decoder_config_from_args(args)
    targets = _parse_targets(args.target)
    model = _load_decoding_model(args)
    corpus = load_corpus(args.corpus)
    if args.limit:
        corpus = corpus[:args.limit]

    sweeps = args.sweep or [parse_sweep("n")]
    rows = []
    for name, values in sweeps:
        field_name = SWEEP_FIELDS[name][0]
        for value in values:
            decoder_config = base.with_updates(**{field_name: value})
            records = generate_records(model, corpus, targets, decoder_config, args, wordlist)
            try:
                row = sweep_row(name, value, records, wordlist)
            except EmptyRun:
                logger.warning(f"  ⚠️ {name}={value}: no generations")
                continue
            logger.info(f"  {name}={value}: delta {row['fre_delta']:.2f}")
            rows.append(row)

    outputs = write_sweep(rows, args.output)
    _manifest(args, [args.model, args.corpus], outputs).write(args.output)
    return EXIT_OK


def cmd_rerun(args) -> int:
    manifest = RunManifest.read(args.manifest)
    if manifest.command == "rerun":
        raise ReadabilityError("a rerun manifest cannot be replayed")
    logger.info(f"Replaying {manifest.command} from {args.manifest}")
    return main(manifest.argv)


# ---------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------
def _add_decoder_flags(parser):
    parser.add_argument("--model", required=True, help="n-gram model file from train-lm")
    parser.add_argument("--corpus", required=True, help="JSONL corpus with id/document/summary")
    parser.add_argument("--target", action="append",
                        help="FRE score or reading level; repeat or comma-separate (default: 30,50,70,90)")
    parser.add_argument("--w", type=float, default=config.LOOKAHEAD_W, help="lookahead weight")
    parser.add_argument("--n", type=int, default=config.LOOKAHEAD_N, help="lookahead horizon in tokens")
    parser.add_argument("--beam", type=int, default=config.BEAM_WIDTH, help="beam width")
    parser.add_argument("--fanout", type=int, default=None, help="candidates scored per hypothesis (default: 2x beam)")
    parser.add_argument("--h-scale", choices=H_SCALES, default=config.H_SCALE)
    parser.add_argument("--rollout", choices=("greedy", "sampled"), default="greedy")
    parser.add_argument("--rollout-count", type=int, default=1, help="continuations per candidate when sampled")
    parser.add_argument("--max-len", type=int, default=config.MAX_LEN)
    parser.add_argument("--min-len", type=int, default=config.MIN_LEN)
    parser.add_argument("--faith-weight", type=float, default=0.0, help="faithfulness share of the lookahead value")
    parser.add_argument("--source-weight", type=float, default=config.SOURCE_MIX_WEIGHT,
                        help="interpolation weight of the source unigram distribution")
    parser.add_argument("--best-of", type=int, default=0, help="sample K summaries and keep the closest instead")
    parser.add_argument("--limit", type=int, default=0, help="only the first N documents")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="readability", description="Readability-controlled generation toolkit")
    parser.add_argument("--log-level", default=config.LOG_LEVEL,
                        choices=("DEBUG", "INFO", "WARNING", "ERROR"))
    parser.add_argument("--quiet", action="store_true", help="warnings only, no progress bars")
    parser.add_argument("--workers", type=int, default=config.WORKERS, help="threads used over records")
    parser.add_argument("--seed", type=int, default=config.DEFAULT_SEED)
    parser.add_argument("--wordlist", default=None, help="easy-word list (default: bundled list)")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="readability scores per text")
    p.add_argument("input", nargs="?", default="-", help="text or JSONL file, '-' for stdin")
    p.add_argument("--field", default=None, help="read JSONL and score this field")
    p.add_argument("--gfi-variant", choices=GFI_VARIANTS, default=config.DEFAULT_GFI_VARIANT)
    p.add_argument("--format", choices=("table", "csv", "json"), default="table")
    p.add_argument("--output", default=None, help="write here instead of stdout")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("prepare", help="build an instruction dataset")
    p.add_argument("corpus")
    p.add_argument("--scheme", choices=SCHEMES, default="category")
    p.add_argument("--filter-below", type=float, default=None, help="keep documents with FRE below this")
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_prepare)

    p = sub.add_parser("train-lm", help="train and save an n-gram model")
    p.add_argument("corpus")
    p.add_argument("--field", default="summary", help="record field to train on")
    p.add_argument("--order", type=int, default=config.NGRAM_ORDER)
    p.add_argument("--smoothing", type=float, default=config.NGRAM_SMOOTHING)
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_train_lm)

    p = sub.add_parser("decode", help="generate summaries at requested readability")
    _add_decoder_flags(p)
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("evaluate", help="report control and quality statistics")
    p.add_argument("generations")
    p.add_argument("--report", required=True, help="output stem for report files")
    p.add_argument("--gfi-variant", choices=GFI_VARIANTS, default=config.DEFAULT_GFI_VARIANT)
    p.add_argument("--sigma", type=float, default=config.REWARD_SIGMA)
    p.add_argument("--strict", action="store_true", help="fail on undefined correlations")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("ablate", help="sweep lookahead settings")
    _add_decoder_flags(p)
    p.add_argument("--sweep", type=parse_sweep, action="append",
                   help="n=3,5,10,20 | w=0,5,25 | faith=0,0.35,0.65,1, or a bare name for its defaults (repeatable)")
    p.add_argument("--output", required=True, help="output stem for sweep files")
    p.set_defaults(func=cmd_ablate)

    p = sub.add_parser("rerun", help="replay a command from its manifest")
    p.add_argument("manifest")
    p.set_defaults(func=cmd_rerun)

    return parser


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code in (0, None) else EXIT_BAD_INPUT
    args.argv = argv

    logging.basicConfig(
        level=logging.WARNING if args.quiet else args.log_level,
        format='[%(levelname)s] %(message)s',
        stream=sys.stderr,
        force=True,
    )

    try:
        return args.func(args)
    except (ReadabilityError, OSError, ValueError) as e:
        logger.error(f"❌ {e}")
        return EXIT_BAD_INPUT
    except Exception as e:
        logger.error(f"❌ Unexpected error: {e}")
        logger.debug("Traceback:", exc_info=True)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
