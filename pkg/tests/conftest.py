"""Shared fixtures and builders for the test suite."""

from __future__ import annotations

from pathlib import Path

import numpy as np
import pytest

from beamnmt.model import ModelConfig, ModelParams, random_model, save_model, schema


def tiny_config(v_src: int = 5, v_trg: int = 5, d: int = 4) -> ModelConfig:
    return ModelConfig(v_src=v_src, v_trg=v_trg, d_emb=d, d_h=d, d_att=d)


def tiny_model(seed: int, v_src: int = 5, v_trg: int = 5, d: int = 4) -> ModelParams:
    return random_model(tiny_config(v_src, v_trg, d), seed)


def eos_suppressed_model(config: ModelConfig, seed: int, penalty: float = -30.0) -> ModelParams:
    """Random model whose end-of-sentence logit is pushed down so decodes
    run to the length cap; used to give benchmarks a fixed workload."""
    base = random_model(config, seed)
    tensors = {name: arr.copy() for name, arr in base.tensor_items()}
    b_logit = tensors["b_logit"].reshape(-1)
    b_logit[0] = penalty
    tensors["b_logit"] = b_logit.reshape(1, -1)
    return ModelParams.from_tensors(config, tensors)


def write_vocab(path: Path, size: int, prefix: str = "w") -> Path:
    """Vocabulary file for `size` total ids (two of them reserved)."""
    assert size >= 2
    path.write_text("".join(f"{prefix}{i}\n" for i in range(2, size)), encoding="utf-8")
    return path


def synth_corpus(path: Path, n_lines: int, vocab_size: int, tokens_per_line: int, seed: int,
                 prefix: str = "w") -> list[str]:
    """Deterministic corpus of known-vocabulary tokens; also written to path."""
    rng = np.random.default_rng(seed)
    lines = [
        " ".join(f"{prefix}{i}" for i in rng.integers(2, vocab_size, size=tokens_per_line))
        for _ in range(n_lines)
    ]
    path.write_text("".join(line + "\n" for line in lines), encoding="utf-8")
    return lines


@pytest.fixture
def toy_files(tmp_path):
    """Small single-model setup on disk: model, vocabs, 8-line corpus."""
    config = ModelConfig(v_src=12, v_trg=12, d_emb=6, d_h=6, d_att=6)
    model_path = tmp_path / "model.amnt"
    save_model(random_model(config, seed=11), model_path)
    src_vocab = write_vocab(tmp_path / "src.vocab", 12)
    trg_vocab = write_vocab(tmp_path / "trg.vocab", 12)
    corpus_path = tmp_path / "corpus.txt"
    lines = synth_corpus(corpus_path, 8, 12, 3, seed=5)
    return {
        "config": config,
        "model": model_path,
        "src_vocab": src_vocab,
        "trg_vocab": trg_vocab,
        "corpus": corpus_path,
        "lines": lines,
        "tmp": tmp_path,
    }


def assert_schema_cover(config: ModelConfig, params: ModelParams) -> None:
    names = [n for n, _, _ in schema(config)]
    got = [n for n, _ in params.tensor_items()]
    assert names == got
