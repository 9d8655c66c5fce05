"""Translation engine: loads models and resources once, then translates
lines through preprocess -> BPE -> shortlist -> beam search -> join.

Corpus translation uses sentence-wise worker threads pulling indices
from a shared queue into an order-preserving result buffer. Models are
immutable and shared; each sentence is decoded by exactly the same pure
code path regardless of the thread count, so outputs are byte-identical
for any number of workers. BLAS pools are pinned to one thread per
worker while translating, mirroring the one-thread-per-sentence setup.
"""

from __future__ import annotations

import os
import queue
import threading
import time
from dataclasses import dataclass, replace
from typing import Sequence

from threadpoolctl import threadpool_limits

from .model import EOS_ID, ModelParams, Vocabulary, load_model, load_vocab
from .nnet import Forward
from .search import DecodeOptions, beam_search
from .shortlist import LexicalTable, ShortList, build_shortlist, load_freq_list, load_lex_table
from .subword import BPEModel, bpe_apply, bpe_join, load_bpe_model, preprocess


@dataclass(frozen=True)
class EngineConfig:
    """Everything needed to assemble a translation engine."""

    model_paths: tuple[str, ...]
    src_vocab_path: str
    trg_vocab_path: str
    bpe_path: str | None = None
    lex_table_path: str | None = None
    trg_freq_path: str | None = None
    shortlist_k: int = 75
    shortlist_kprime: int = 75
    beam_size: int = 5
    length_normalize: bool = False
    max_len_factor: int = 2
    max_len_offset: int = 10
    n_best: int = 1
    threads: int | None = None
    lowercase: bool = True

    def __post_init__(self) -> None:
        if len(self.model_paths) == 0:
            raise ValueError("at least one model path is required")
        if (self.lex_table_path is None) != (self.trg_freq_path is None):
            raise ValueError("--lex-table and --trg-freq must be given together")

    def decode_options(self) -> DecodeOptions:
        return DecodeOptions(
            beam_size=self.beam_size,
            max_len_factor=self.max_len_factor,
            max_len_offset=self.max_len_offset,
            length_normalize=self.length_normalize,
            n_best=self.n_best,
        )


@dataclass(eq=False)
class TranslationResult:
    """Output for one input line."""

    text: str
    score: float
    n_best: list[tuple[float, str]]
    src_tokens: int
    oov: int


class Engine:
    """Loaded models plus the per-line translation pipeline."""

    def __init__(
        self,
        config: EngineConfig,
        models: list[ModelParams],
        src_vocab: Vocabulary,
        trg_vocab: Vocabulary,
        bpe: BPEModel | None,
        lex_table: LexicalTable | None,
        freq_ids: list[int] | None,
        freq_skipped: int,
        startup_seconds: float,
    ):
        self.config = config
        self.models = models
        self.src_vocab = src_vocab
        self.trg_vocab = trg_vocab
        self.bpe = bpe
        self.lex_table = lex_table
        self.freq_ids = freq_ids
        self.freq_skipped = freq_skipped
        self.startup_seconds = startup_seconds
        self.opts = config.decode_options()

    @classmethod
    def load(cls, config: EngineConfig) -> "Engine":
        t0 = time.perf_counter()
        src_vocab = load_vocab(config.src_vocab_path)
        trg_vocab = load_vocab(config.trg_vocab_path)
        models = [load_model(p) for p in config.model_paths]
        for path, m in zip(config.model_paths, models):
            if m.config.v_src != len(src_vocab):
                raise ValueError(
                    f"{path}: model v_src={m.config.v_src} does not match "
                    f"source vocabulary of {len(src_vocab)} tokens"
                )
            if m.config.v_trg != len(trg_vocab):
                raise ValueError(
                    f"{path}: model v_trg={m.config.v_trg} does not match "
                    f"target vocabulary of {len(trg_vocab)} tokens"
                )
            Forward.for_params(m)  # build float64 working copies up front
        bpe = load_bpe_model(config.bpe_path) if config.bpe_path else None
        lex_table = None
        freq_ids = None
        skipped = 0
        if config.lex_table_path:
            lex_table = load_lex_table(config.lex_table_path, trg_vocab)
            freq_ids, skipped = load_freq_list(config.trg_freq_path, trg_vocab)
        return cls(
            config=config,
            models=models,
            src_vocab=src_vocab,
            trg_vocab=trg_vocab,
            bpe=bpe,
            lex_table=lex_table,
            freq_ids=freq_ids,
            freq_skipped=skipped,
            startup_seconds=time.perf_counter() - t0,
        )

    @property
    def shortlist_active(self) -> bool:
        return self.lex_table is not None

    def source_tokens(self, line: str) -> list[str]:
        words = preprocess(line, self.config.lowercase)
        return bpe_apply(self.bpe, words) if self.bpe is not None else words

    def translate_line(self, line: str, opts: DecodeOptions | None = None) -> TranslationResult:
        opts = opts or self.opts
        tokens = self.source_tokens(line)
        if not tokens:
            return TranslationResult(text="", score=0.0, n_best=[(0.0, "")], src_tokens=0, oov=0)
        oov = sum(1 for t in tokens if t not in self.src_vocab)
        ids = [self.src_vocab.id(t) for t in tokens]
        shortlist: ShortList | None = None
        if self.lex_table is not None:
            shortlist = build_shortlist(
                self.lex_table,
                self.freq_ids or [],
                tokens,
                self.config.shortlist_k,
                self.config.shortlist_kprime,
                self.trg_vocab,
            )
        hyps = beam_search(self.models, ids, opts, shortlist)
        n_best = [(h.score, self._detokenize(h.tokens, h.finished)) for h in hyps]
        return TranslationResult(
            text=n_best[0][1],
            score=n_best[0][0],
            n_best=n_best,
            src_tokens=len(tokens),
            oov=oov,
        )

    def _detokenize(self, token_ids: list[int], finished: bool) -> str:
        if finished and token_ids and token_ids[-1] == EOS_ID:
            token_ids = token_ids[:-1]
        pieces = [self.trg_vocab.token(i) for i in token_ids]
        return " ".join(bpe_join(pieces))

    def translate_corpus(
        self,
        lines: Sequence[str],
        threads: int | None = None,
        opts: DecodeOptions | None = None,
    ) -> list[TranslationResult]:
        """Translate lines preserving input order, with `threads` workers."""
        threads = threads or self.config.threads or os.cpu_count() or 1
        results: list[TranslationResult | None] = [None] * len(lines)
        with threadpool_limits(limits=1):
            if threads <= 1 or len(lines) <= 1:
                for i, line in enumerate(lines):
                    results[i] = self.translate_line(line, opts)
                return results  # type: ignore[return-value]

            work: queue.SimpleQueue[int | None] = queue.SimpleQueue()
            for i in range(len(lines)):
                work.put(i)
            errors: list[BaseException] = []

            def worker() -> None:
                while True:
                    i = work.get()
                    if i is None:
                        return
                    try:
                        results[i] = self.translate_line(lines[i], opts)
                    except BaseException as e:  # surfaced after join
                        errors.append(e)
                        return

            pool = [threading.Thread(target=worker, name=f"translate-{t}") for t in range(threads)]
            for _ in pool:
                work.put(None)
            for t in pool:
                t.start()
            for t in pool:
                t.join()
            if errors:
                raise errors[0]
        return results  # type: ignore[return-value]

    def with_options(self, **changes) -> DecodeOptions:
        return replace(self.opts, **changes)
