"""Throughput, latency, and beam-sweep measurement.

Throughput translates a corpus with sentence-wise worker threads and
reports source words per second; latency translates strictly serially
and reports milliseconds per sentence. Timing covers decoding only;
model loading is reported separately as startup_seconds. The words-
per-second numerator counts post-BPE source tokens, i.e. exactly the
tokens the decoder consumes.
"""

from __future__ import annotations

import csv
import io
import time
from dataclasses import asdict, dataclass
from typing import Sequence

from .bleu import bleu
from .engine import Engine, TranslationResult


@dataclass(frozen=True)
class BenchReport:
    total_tokens: int
    wall_seconds: float
    words_per_second: float
    ms_per_sentence: float
    sentence_count: int
    threads: int
    beam: int
    shortlist_active: bool
    startup_seconds: float

    def to_dict(self) -> dict:
        return asdict(self)


def _report(
    engine: Engine,
    results: Sequence[TranslationResult],
    wall: float,
    threads: int,
    beam: int,
) -> BenchReport:
    total_tokens = sum(r.src_tokens for r in results)
    wall = max(wall, 1e-9)
    return BenchReport(
        total_tokens=total_tokens,
        wall_seconds=wall,
        words_per_second=total_tokens / wall,
        ms_per_sentence=1000.0 * wall / len(results),
        sentence_count=len(results),
        threads=threads,
        beam=beam,
        shortlist_active=engine.shortlist_active,
        startup_seconds=engine.startup_seconds,
    )


def throughput_bench(
    engine: Engine,
    corpus: Sequence[str],
    threads: int,
    warmup: bool = False,
) -> tuple[BenchReport, list[TranslationResult]]:
    """Translate the whole corpus with `threads` workers; outputs keep
    input order and are identical for any thread count."""
    if len(corpus) == 0:
        raise ValueError("benchmark corpus is empty")
    if threads < 1:
        raise ValueError(f"threads must be >= 1, got {threads}")
    if warmup:
        engine.translate_corpus(corpus, threads=threads)
    t0 = time.perf_counter()
    results = engine.translate_corpus(corpus, threads=threads)
    wall = time.perf_counter() - t0
    return _report(engine, results, wall, threads, engine.opts.beam_size), results


def latency_bench(
    engine: Engine,
    corpus: Sequence[str],
    warmup: bool = False,
) -> tuple[BenchReport, list[TranslationResult]]:
    """Translate sentences strictly serially; ms_per_sentence is the mean."""
    if len(corpus) == 0:
        raise ValueError("benchmark corpus is empty")
    if warmup:
        engine.translate_corpus(corpus, threads=1)
    t0 = time.perf_counter()
    results = engine.translate_corpus(corpus, threads=1)
    wall = time.perf_counter() - t0
    return _report(engine, results, wall, 1, engine.opts.beam_size), results


SWEEP_HEADER = ["beam", "words_per_second", "bleu", "mean_model_score"]


def beam_sweep(
    engine: Engine,
    corpus: Sequence[str],
    beams: Sequence[int],
    references: Sequence[str] | None = None,
    threads: int | None = None,
) -> list[dict]:
    """Throughput and quality per beam size.

    Returns one row per beam with keys matching SWEEP_HEADER; bleu is
    None without references. mean_model_score averages the best
    hypothesis log-prob over sentences.
    """
    if len(beams) == 0:
        raise ValueError("beam list is empty")
    if any(b < 1 for b in beams):
        raise ValueError(f"beam sizes must be >= 1, got {list(beams)}")
    if references is not None and len(references) != len(corpus):
        raise ValueError(
            f"line count mismatch: {len(corpus)} corpus vs {len(references)} references"
        )
    threads = threads or engine.config.threads or 1
    rows = []
    for beam in beams:
        opts = engine.with_options(beam_size=beam)
        t0 = time.perf_counter()
        results = engine.translate_corpus(corpus, threads=threads, opts=opts)
        wall = max(time.perf_counter() - t0, 1e-9)
        total_tokens = sum(r.src_tokens for r in results)
        score = None
        if references is not None:
            score = bleu([r.text for r in results], list(references), engine.config.lowercase).score
        rows.append(
            {
                "beam": beam,
                "words_per_second": total_tokens / wall,
                "bleu": score,
                "mean_model_score": sum(r.score for r in results) / len(results),
            }
        )
    return rows


def sweep_to_csv(rows: Sequence[dict]) -> str:
    """Render sweep rows as CSV with the fixed header."""
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(SWEEP_HEADER)
    for row in rows:
        writer.writerow(
            [
                row["beam"],
                f"{row['words_per_second']:.2f}",
                "" if row["bleu"] is None else f"{row['bleu']:.2f}",
                f"{row['mean_model_score']:.6f}",
            ]
        )
    return out.getvalue()
