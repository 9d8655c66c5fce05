"""beamnmt: CPU beam-search inference for attentional GRU encoder-decoder
translation models, with ensembling, checkpoint averaging, output-layer
vocabulary selection, BPE subwords, and benchmarking."""

__version__ = "0.1.0"

from .model import (
    EOS_ID,
    EOS_TOKEN,
    UNK_ID,
    UNK_TOKEN,
    ModelConfig,
    ModelParams,
    Vocabulary,
    average_checkpoints,
    load_model,
    load_vocab,
    random_model,
    save_model,
)
from .search import DecodeOptions, Hypothesis, beam_search, ensemble_logprobs, exhaustive_search
from .shortlist import ShortList, build_shortlist, load_freq_list, load_lex_table
from .subword import BPEModel, bpe_apply, bpe_join, bpe_learn, preprocess
from .bleu import BleuResult, bleu
from .engine import Engine, EngineConfig

__all__ = [
    "EOS_ID",
    "EOS_TOKEN",
    "UNK_ID",
    "UNK_TOKEN",
    "ModelConfig",
    "ModelParams",
    "Vocabulary",
    "average_checkpoints",
    "load_model",
    "load_vocab",
    "random_model",
    "save_model",
    "DecodeOptions",
    "Hypothesis",
    "beam_search",
    "ensemble_logprobs",
    "exhaustive_search",
    "ShortList",
    "build_shortlist",
    "load_freq_list",
    "load_lex_table",
    "BPEModel",
    "bpe_apply",
    "bpe_join",
    "bpe_learn",
    "preprocess",
    "BleuResult",
    "bleu",
    "Engine",
    "EngineConfig",
]
