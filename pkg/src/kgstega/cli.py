"""Operator entry point: embed / extract / roundtrip / eval subcommands.

Exit codes: 0 success, 1 round-trip trial failure, 2 input or config error.
Diagnostics go to stderr as single ``ERROR <Name>: <detail>`` lines.

Report-producing commands (roundtrip, eval) write a JSON report plus a TSV
summary and PNG figures next to it.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
from dataclasses import dataclass, field
from pathlib import Path

from . import report as figures
from .bits import int_to_bits
from .codec import (
    Payload,
    StegoKey,
    StegoPath,
    embed_message,
    extract_message,
)
from .errors import KgStegaError, MalformedLine
from .graph import KnowledgeGraph, load_graph, viable_subgraph
from .interchange import path_to_obj
from .metrics import (
    bleu,
    literal_paper_rate,
    measured_rate,
    perplexity,
    rouge_l,
    sentence_stats,
    train_lm,
)
from .realize import (
    Template,
    command_generator,
    load_templates,
    realize,
    realize_with_retry,
    verify_coverage,
)
from .recover import recover_path, validate_uniqueness

# Fixed seed for trial payload generation: identical configs must produce
# byte-identical outputs.
_TRIAL_SEED = 99991

LM_ORDER = 3
LM_SMOOTHING = 0.01


@dataclass
class RunConfig:
    nodes: Path
    edges: Path
    key_file: Path
    pins: list[tuple[int, str]] = field(default_factory=list)
    templates: Path | None = None
    corpus: Path | None = None
    infile: Path | None = None
    outfile: Path | None = None
    generator: str | None = None
    paths_out: Path | None = None
    trials: int = 200
    max_bits: int = 256
    max_attempts: int = 5

    def load_graph(self) -> KnowledgeGraph:
        return viable_subgraph(load_graph(self.nodes, self.edges))

    def load_key(self, pins: list[tuple[int, str]] | None = None) -> StegoKey:
        secret = self.key_file.read_bytes()
        return StegoKey(secret, tuple(self.pins if pins is None else pins))

    def load_templates(self) -> list[Template]:
        if self.templates is None:
            raise MalformedLine("templates", 0, "--templates is required for this command")
        return load_templates(self.templates)

    def sentence_maker(self, templates: list[Template]):
        """Callable path -> sentence text, honoring --generator."""
        if self.generator:
            gen = command_generator(self.generator)

            def make(path: StegoPath, g: KnowledgeGraph) -> str:
                return realize_with_retry(path, gen, g, self.max_attempts).sentence.text

            return make

        def make(path: StegoPath, g: KnowledgeGraph) -> str:
            return realize(path, templates, g).text

        return make


def _parse_pin(raw: str) -> tuple[int, str]:
    level, sep, label = raw.partition(":")
    if not sep or not label.strip():
        raise argparse.ArgumentTypeError(f"pin must be LEVEL:LABEL, got {raw!r}")
    try:
        return int(level), label.strip()
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad pin level in {raw!r}") from None


def _pin_prefixes(pins: list[tuple[int, str]]) -> list[list[tuple[int, str]]]:
    """Evaluation runs over nested configs: no pins, first pin, first two..."""
    return [pins[:i] for i in range(len(pins) + 1)]


def _check_uniqueness(g: KnowledgeGraph) -> None:
    audit = validate_uniqueness(g)
    if audit.witnesses:
        for witness in audit.witnesses:
            print(f"WITNESS {witness.kind}: {witness.labels}", file=sys.stderr)
        raise KgStegaError(
            f"graph fails the uniqueness audit with {len(audit.witnesses)} witnesses"
        )


# --- subcommands -----------------------------------------------------------------


def run_embed(cfg: RunConfig) -> int:
    g = cfg.load_graph()
    key = cfg.load_key()
    templates = cfg.load_templates()
    make = cfg.sentence_maker(templates)
    payload = Payload.from_bytes(cfg.infile.read_bytes())
    paths = embed_message(payload, g, key)
    sentences = [make(p, g) for p in paths]
    for text, path in zip(sentences, paths):
        if not verify_coverage(text, path, g):
            raise KgStegaError(f"generated sentence does not cover its path: {text!r}")
    cfg.outfile.write_text("\n".join(sentences) + "\n", encoding="utf-8")
    sidecar = Path(str(cfg.outfile) + ".paths.json")
    sidecar.write_text(
        json.dumps([path_to_obj(p, g) for p in paths], ensure_ascii=False, indent=2) + "\n",
        encoding="utf-8",
    )
    return 0


def run_extract(cfg: RunConfig) -> int:
    g = cfg.load_graph()
    key = cfg.load_key()
    _check_uniqueness(g)
    if str(cfg.infile) == "-":
        text = sys.stdin.read()
    else:
        text = cfg.infile.read_text(encoding="utf-8")
    lines = [ln for ln in text.split("\n") if ln.strip()]
    paths = [recover_path(line, g, key) for line in lines]
    if cfg.paths_out is not None:
        dump = "\n".join(json.dumps(path_to_obj(p, g), ensure_ascii=False) for p in paths)
        if str(cfg.paths_out) == "-":
            print(dump)
        else:
            cfg.paths_out.write_text(dump + "\n", encoding="utf-8")
    payload = extract_message(paths, g, key)
    cfg.outfile.write_bytes(payload.to_bytes())
    return 0


def _trial_payloads(trials: int, max_bits: int, rng: random.Random) -> list[Payload]:
    payloads = []
    for _ in range(trials):
        length = rng.randint(0, max_bits)
        payloads.append(Payload(tuple(rng.randint(0, 1) for _ in range(length))))
    return payloads


def _exhaustive_payloads(max_bits: int = 12) -> list[Payload]:
    payloads = []
    for length in range(max_bits + 1):
        for value in range(1 << length):
            payloads.append(Payload(tuple(int_to_bits(value, length))))
    return payloads


def run_roundtrip(cfg: RunConfig) -> int:
    g = cfg.load_graph()
    _check_uniqueness(g)
    templates = cfg.load_templates()
    rows = []
    any_failed = False
    for pins in _pin_prefixes(cfg.pins):
        key = cfg.load_key(pins)
        rng = random.Random(_TRIAL_SEED)
        payloads = _exhaustive_payloads() + _trial_payloads(cfg.trials, cfg.max_bits, rng)
        passed = failed = 0
        realized: dict[tuple[int, ...], int] = {}  # path nodes -> carrier bits
        total_bits = 0
        total_carrier = 0
        for payload in payloads:
            paths = embed_message(payload, g, key)
            recovered = extract_message(paths, g, key)
            if recovered == payload:
                passed += 1
            else:
                failed += 1
            for p in paths:
                carrier = realized.get(p.nodes)
                if carrier is None:
                    carrier = sentence_stats(realize(p, templates, g).text).byte_bits
                    realized[p.nodes] = carrier
                total_bits += p.bits_consumed
                total_carrier += carrier
        any_failed = any_failed or failed > 0
        rows.append({
            "pins": [list(p) for p in pins],
            "trials": len(payloads),
            "passed": passed,
            "failed": failed,
            "measured_bpw": total_bits / total_carrier if total_carrier else 0.0,
        })
        print(f"pins={pins or 'none'}: {passed}/{len(payloads)} round-trips ok, "
              f"measured_bpw={rows[-1]['measured_bpw']:.6f}")
    if cfg.outfile:
        cfg.outfile.write_text(json.dumps(rows, indent=2) + "\n", encoding="utf-8")
        figures.write_roundtrip_tsv(rows, cfg.outfile.with_suffix(".tsv"))
        figures.roundtrip_figure(rows, cfg.outfile.with_suffix(".png"))
    return 1 if any_failed else 0


def run_eval(cfg: RunConfig) -> int:
    g = cfg.load_graph()
    _check_uniqueness(g)
    templates = cfg.load_templates()
    make = cfg.sentence_maker(templates)
    corpus_lines = [
        ln for ln in cfg.corpus.read_text(encoding="utf-8").split("\n") if ln.strip()
    ]
    lm = train_lm(corpus_lines, LM_ORDER, LM_SMOOTHING)

    rows = []
    for pins in _pin_prefixes(cfg.pins):
        key = cfg.load_key(pins)
        rng = random.Random(_TRIAL_SEED)
        payloads = _trial_payloads(cfg.trials, cfg.max_bits, rng)
        all_paths: list[StegoPath] = []
        sentences: list[str] = []
        for payload in payloads:
            paths = embed_message(payload, g, key)
            all_paths.extend(paths)
            sentences.extend(make(p, g) for p in paths)

        rate = measured_rate(all_paths, sentences)
        literal = literal_paper_rate(g, all_paths, sentences)
        ppls = [perplexity(lm, s) for s in sentences]

        # semantic relevance against corpus sentences that cover the path labels
        bleu1_scores, bleu2_scores, rouge_scores = [], [], []
        ref_cache: dict[tuple[int, ...], list[str]] = {}
        for path, sentence in zip(all_paths, sentences):
            refs = ref_cache.get(path.nodes)
            if refs is None:
                refs = [line for line in corpus_lines if verify_coverage(line, path, g)]
                ref_cache[path.nodes] = refs
            if not refs:
                continue
            bleu1_scores.append(bleu(sentence, refs, 1))
            bleu2_scores.append(bleu(sentence, refs, 2))
            rouge_scores.append(max(rouge_l(sentence, ref) for ref in refs))

        def mean(xs: list[float]) -> float:
            return sum(xs) / len(xs) if xs else 0.0

        rows.append({
            "pins": [list(p) for p in pins],
            "metrics": {
                "measured_bpw": rate.measured_bpw,
                "literal_paper_rate": literal,
                "mean_perplexity": mean(ppls),
                "bleu1": mean(bleu1_scores),
                "bleu2": mean(bleu2_scores),
                "rouge_l": mean(rouge_scores),
                "n_sentences": len(sentences),
            },
        })
        print(json.dumps(rows[-1]))

    cfg.outfile.write_text(json.dumps(rows, indent=2) + "\n", encoding="utf-8")
    figures.write_eval_tsv(rows, cfg.outfile.with_suffix(".tsv"))
    figures.rate_figure(rows, cfg.outfile.with_suffix(".rates.png"))
    training_ppl = sum(perplexity(lm, s) for s in corpus_lines) / len(corpus_lines)
    figures.perplexity_figure(rows, training_ppl, cfg.outfile.with_suffix(".ppl.png"))
    return 0


# --- argument parsing -----------------------------------------------------------------


def _add_common(p: argparse.ArgumentParser, *, templates: bool, corpus: bool,
                infile: bool, outfile: bool) -> None:
    p.add_argument("--nodes", type=Path, required=True, help="nodes TSV: id<TAB>label<TAB>level")
    p.add_argument("--edges", type=Path, required=True, help="edges TSV: src<TAB>rel<TAB>dst[<TAB>weight]")
    p.add_argument("--key-file", type=Path, required=True,
                   help="file whose raw bytes are the shared secret (>= 16 bytes)")
    p.add_argument("--pin", type=_parse_pin, action="append", default=[], metavar="L:LABEL",
                   help="pin the node used at level L (repeatable)")
    if templates:
        p.add_argument("--templates", type=Path, required=True, help="template TSV: id<TAB>pattern")
    if corpus:
        p.add_argument("--corpus", type=Path, required=True, help="training corpus, one sentence per line")
    if infile:
        p.add_argument("--in", dest="infile", type=Path, required=True)
    if outfile:
        p.add_argument("--out", dest="outfile", type=Path, required=True)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kgstega",
                                     description="knowledge-graph path steganography")
    sub = parser.add_subparsers(dest="command", required=True)

    p_embed = sub.add_parser("embed", help="hide a payload file as carrier sentences")
    _add_common(p_embed, templates=True, corpus=False, infile=True, outfile=True)
    p_embed.add_argument("--generator", help="external sentence generator command")
    p_embed.add_argument("--max-attempts", type=int, default=5)
    p_embed.set_defaults(runner=run_embed)

    p_extract = sub.add_parser("extract", help="recover the payload from carrier sentences")
    _add_common(p_extract, templates=False, corpus=False, infile=True, outfile=True)
    p_extract.add_argument("--paths-out", type=Path,
                           help="also emit one path-interchange JSON object per sentence"
                                " to this file ('-' for stdout)")
    p_extract.set_defaults(runner=run_extract)

    p_round = sub.add_parser("roundtrip", help="exhaustive + randomized embed/extract trials")
    _add_common(p_round, templates=True, corpus=False, infile=False, outfile=False)
    p_round.add_argument("--out", dest="outfile", type=Path, help="write JSON/TSV/figure report here")
    p_round.add_argument("--trials", type=int, default=200)
    p_round.add_argument("--max-bits", type=int, default=256)
    p_round.set_defaults(runner=run_roundtrip)

    p_eval = sub.add_parser("eval", help="embedding-rate and quality metrics per pin config")
    _add_common(p_eval, templates=True, corpus=True, infile=False, outfile=True)
    p_eval.add_argument("--generator", help="external sentence generator command")
    p_eval.add_argument("--max-attempts", type=int, default=5)
    p_eval.add_argument("--trials", type=int, default=200)
    p_eval.add_argument("--max-bits", type=int, default=128)
    p_eval.set_defaults(runner=run_eval)

    return parser


def _config_from(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig(
        nodes=args.nodes,
        edges=args.edges,
        key_file=args.key_file,
        pins=list(args.pin),
        templates=getattr(args, "templates", None),
        corpus=getattr(args, "corpus", None),
        infile=getattr(args, "infile", None),
        outfile=getattr(args, "outfile", None),
        generator=getattr(args, "generator", None),
        paths_out=getattr(args, "paths_out", None),
        trials=getattr(args, "trials", 200),
        max_bits=getattr(args, "max_bits", 256),
        max_attempts=getattr(args, "max_attempts", 5),
    )
    for name in ("nodes", "edges", "key_file", "templates", "corpus", "infile"):
        value = getattr(cfg, name)
        if value is not None and str(value) != "-" and not Path(value).exists():
            raise KgStegaError(f"--{name.replace('_', '-').replace('infile', 'in')} file not found: {value}")
    return cfg


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _config_from(args)
        return args.runner(cfg)
    except KgStegaError as exc:
        print(f"ERROR {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
