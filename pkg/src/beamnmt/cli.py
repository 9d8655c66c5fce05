"""Command-line interface.

Subcommands: translate, average, bpe-learn, bpe-apply, bleu, bench,
init-random. Translation output goes to stdout (or --output); all
diagnostics go to stderr. Exit code 0 means success, nonzero means an
error was reported.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import bench as bench_mod
from .bleu import bleu
from .engine import Engine, EngineConfig
from .model import ModelConfig, average_checkpoints, random_model, save_model
from .subword import bpe_apply, bpe_learn, load_bpe_model, preprocess, save_bpe_model


def _add_engine_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--model", action="append", required=True, metavar="PATH",
                   help="model file; repeat for an ensemble")
    p.add_argument("--src-vocab", required=True, metavar="PATH")
    p.add_argument("--trg-vocab", required=True, metavar="PATH")
    p.add_argument("--bpe", metavar="PATH", help="merge-rules file for source segmentation")
    p.add_argument("--lex-table", metavar="PATH",
                   help="lexical table P(target|source) for vocabulary selection")
    p.add_argument("--trg-freq", metavar="PATH",
                   help="target tokens in descending training frequency")
    p.add_argument("--shortlist-k", type=int, default=75, metavar="K",
                   help="globally frequent ids kept per sentence (default 75)")
    p.add_argument("--shortlist-kprime", type=int, default=75, metavar="K'",
                   help="translations kept per source token (default 75)")
    p.add_argument("--beam", type=int, default=5, help="beam size (default 5)")
    p.add_argument("--normalize", action="store_true",
                   help="rank hypotheses by score divided by length")
    p.add_argument("--max-len-factor", type=int, default=2)
    p.add_argument("--max-len-offset", type=int, default=10)
    p.add_argument("--n-best", type=int, default=1)
    p.add_argument("--threads", type=int, default=os.cpu_count() or 1)
    p.add_argument("--no-lowercase", action="store_true",
                   help="skip lowercasing during preprocessing")
    p.add_argument("--input", metavar="PATH", help="read from file instead of stdin")
    p.add_argument("--output", metavar="PATH", help="write to file instead of stdout")


def _engine_config(args: argparse.Namespace, n_best: int | None = None) -> EngineConfig:
    return EngineConfig(
        model_paths=tuple(args.model),
        src_vocab_path=args.src_vocab,
        trg_vocab_path=args.trg_vocab,
        bpe_path=args.bpe,
        lex_table_path=args.lex_table,
        trg_freq_path=args.trg_freq,
        shortlist_k=args.shortlist_k,
        shortlist_kprime=args.shortlist_kprime,
        beam_size=args.beam,
        length_normalize=args.normalize,
        max_len_factor=args.max_len_factor,
        max_len_offset=args.max_len_offset,
        n_best=n_best if n_best is not None else args.n_best,
        threads=args.threads,
        lowercase=not args.no_lowercase,
    )


def _read_lines(path: str | None) -> list[str]:
    if path is None:
        return sys.stdin.read().splitlines()
    return Path(path).read_text(encoding="utf-8").splitlines()


def _write_lines(path: str | None, lines: list[str]) -> None:
    text = "".join(line + "\n" for line in lines)
    if path is None:
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def _cmd_translate(args: argparse.Namespace) -> int:
    engine = Engine.load(_engine_config(args))
    lines = _read_lines(args.input)
    results = engine.translate_corpus(lines, threads=args.threads)
    if args.n_best > 1:
        out = [
            f"{i} ||| {text} ||| {score:.6f}"
            for i, r in enumerate(results)
            for score, text in r.n_best
        ]
    else:
        out = [r.text for r in results]
    _write_lines(args.output, out)
    oov = sum(r.oov for r in results)
    if oov:
        print(f"note: {oov} source tokens mapped to <unk>", file=sys.stderr)
    if engine.freq_skipped:
        print(f"note: {engine.freq_skipped} frequency-list tokens not in vocabulary", file=sys.stderr)
    return 0


def _cmd_average(args: argparse.Namespace) -> int:
    save_model(average_checkpoints(args.inputs), args.output)
    return 0


def _cmd_bpe_learn(args: argparse.Namespace) -> int:
    lines = _read_lines(args.input)
    tokenized = [" ".join(preprocess(line, not args.no_lowercase)) for line in lines]
    save_bpe_model(bpe_learn(tokenized, args.merges), args.output)
    return 0


def _cmd_bpe_apply(args: argparse.Namespace) -> int:
    model = load_bpe_model(args.bpe)
    lines = _read_lines(args.input)
    out = [" ".join(bpe_apply(model, preprocess(line, not args.no_lowercase))) for line in lines]
    _write_lines(args.output, out)
    return 0


def _cmd_bleu(args: argparse.Namespace) -> int:
    result = bleu(
        _read_lines(args.hypotheses),
        _read_lines(args.references),
        lowercase=not args.no_lowercase,
    )
    if args.json:
        print(json.dumps(result.to_dict()))
    else:
        p = "/".join(f"{100 * x:.1f}" for x in result.precisions)
        print(
            f"BLEU = {result.score:.2f} {p} "
            f"(BP = {result.brevity_penalty:.3f}, hyp_len = {result.hyp_len}, "
            f"ref_len = {result.ref_len})"
        )
    return 0


def _cmd_bench(args: argparse.Namespace) -> int:
    engine = Engine.load(_engine_config(args, n_best=1))
    corpus = _read_lines(args.input)
    if args.sweep:
        beams = [int(b) for b in args.sweep.split(",") if b]
        references = _read_lines(args.references) if args.references else None
        rows = bench_mod.beam_sweep(engine, corpus, beams, references, threads=args.threads)
        sys.stdout.write(bench_mod.sweep_to_csv(rows))
        return 0
    if args.latency_mode:
        report, results = bench_mod.latency_bench(engine, corpus, warmup=args.warmup)
    else:
        report, results = bench_mod.throughput_bench(
            engine, corpus, threads=args.threads, warmup=args.warmup
        )
    if args.output:
        _write_lines(args.output, [r.text for r in results])
    print(json.dumps(report.to_dict()))
    return 0


def _cmd_init_random(args: argparse.Namespace) -> int:
    config = ModelConfig(
        v_src=args.vocab_size,
        v_trg=args.vocab_size,
        d_emb=args.d_emb,
        d_h=args.d_h,
        d_att=args.d_att,
    )
    save_model(random_model(config, args.seed), args.output)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="beamnmt",
        description="CPU beam-search decoder for attentional GRU translation models",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("translate", help="translate lines from stdin or --input")
    _add_engine_flags(p)
    p.set_defaults(func=_cmd_translate)

    p = sub.add_parser("average", help="element-wise average of model checkpoints")
    p.add_argument("--output", required=True, metavar="PATH")
    p.add_argument("inputs", nargs="+", metavar="MODEL")
    p.set_defaults(func=_cmd_average)

    p = sub.add_parser("bpe-learn", help="learn merge rules from a corpus")
    p.add_argument("--merges", type=int, required=True)
    p.add_argument("--output", required=True, metavar="RULES")
    p.add_argument("--input", metavar="PATH")
    p.add_argument("--no-lowercase", action="store_true")
    p.set_defaults(func=_cmd_bpe_learn)

    p = sub.add_parser("bpe-apply", help="segment text with learned rules")
    p.add_argument("--bpe", required=True, metavar="RULES")
    p.add_argument("--input", metavar="PATH")
    p.add_argument("--output", metavar="PATH")
    p.add_argument("--no-lowercase", action="store_true")
    p.set_defaults(func=_cmd_bpe_apply)

    p = sub.add_parser("bleu", help="corpus BLEU of a hypothesis file against a reference file")
    p.add_argument("hypotheses", metavar="HYP")
    p.add_argument("references", metavar="REF")
    p.add_argument("--no-lowercase", action="store_true")
    p.add_argument("--json", action="store_true", help="emit the result as JSON")
    p.set_defaults(func=_cmd_bleu)

    p = sub.add_parser("bench", help="throughput/latency benchmarks and beam sweeps")
    _add_engine_flags(p)
    p.add_argument("--latency-mode", action="store_true", help="strictly serial, report ms/sentence")
    p.add_argument("--sweep", metavar="B1,B2,...", help="comma-separated beam sizes; emits CSV")
    p.add_argument("--references", metavar="PATH", help="references for BLEU during a sweep")
    p.add_argument("--warmup", action="store_true", help="one untimed pass before measuring")
    p.set_defaults(func=_cmd_bench)

    p = sub.add_parser("init-random", help="write a seeded random model")
    p.add_argument("--output", required=True, metavar="PATH")
    p.add_argument("--vocab-size", type=int, required=True,
                   help="source and target vocabulary size (including reserved ids)")
    p.add_argument("--d-emb", type=int, default=500)
    p.add_argument("--d-h", type=int, default=1024)
    p.add_argument("--d-att", type=int, default=None)
    p.add_argument("--seed", type=int, default=1)
    p.set_defaults(func=_cmd_init_random)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
