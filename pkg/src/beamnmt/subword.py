"""Byte-pair-encoding subwords and minimal preprocessing.

Learning treats each word type as its character sequence with the
end-of-word sentinel "</w>" fused onto the final character, so a
word-final symbol is distinct from the same characters mid-word. The
most frequent adjacent pair (weighted by word-type frequency, ties
broken by lexicographic order of the pair) is merged repeatedly, until
the merge budget is spent or no pair occurs at least twice.

Applied segmentation marks every piece except the last with the
continuation marker "@@"; joining reverses that after decoding.

Rules file: first line "#bpe-v1 <num_merges>", then one "left right"
rule per line in rank order.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .errors import FormatError

MARKER = "@@"
EOW = "</w>"
RULES_HEADER = "#bpe-v1"

Pair = tuple[str, str]


@dataclass(eq=False)
class BPEModel:
    """Ordered merge rules; list position is the rank."""

    merges: list[Pair]
    marker: str = MARKER
    eow: str = EOW
    ranks: dict[Pair, int] = field(init=False, repr=False)
    _word_cache: dict[str, tuple[str, ...]] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        self.ranks = {pair: rank for rank, pair in enumerate(self.merges)}
        if len(self.ranks) != len(self.merges):
            raise ValueError("duplicate merge pair in rule list")
        self._word_cache = {}


def _word_symbols(word: str, eow: str) -> list[str]:
    symbols = list(word)
    symbols[-1] += eow
    return symbols


def _merge_pair(symbols: list[str], pair: Pair) -> list[str]:
    # Left-to-right, non-overlapping.
    out: list[str] = []
    i = 0
    while i < len(symbols):
        if i + 1 < len(symbols) and (symbols[i], symbols[i + 1]) == pair:
            out.append(symbols[i] + symbols[i + 1])
            i += 2
        else:
            out.append(symbols[i])
            i += 1
    return out


def bpe_learn(corpus: Iterable[str], num_merges: int) -> BPEModel:
    """Learn up to num_merges merge rules from whitespace-tokenized lines."""
    if num_merges < 0:
        raise ValueError(f"num_merges must be >= 0, got {num_merges}")
    word_freq: Counter[str] = Counter()
    for line in corpus:
        word_freq.update(line.split())
    symbols = {word: _word_symbols(word, EOW) for word in word_freq}
    merges: list[Pair] = []
    for _ in range(num_merges):
        pair_counts: Counter[Pair] = Counter()
        for word, syms in symbols.items():
            freq = word_freq[word]
            for i in range(len(syms) - 1):
                pair_counts[(syms[i], syms[i + 1])] += freq
        if not pair_counts:
            break
        best = min(pair_counts, key=lambda p: (-pair_counts[p], p))
        if pair_counts[best] < 2:
            break
        merges.append(best)
        symbols = {word: _merge_pair(syms, best) for word, syms in symbols.items()}
    return BPEModel(merges)


def _encode_word(model: BPEModel, word: str) -> tuple[str, ...]:
    cached = model._word_cache.get(word)
    if cached is not None:
        return cached
    symbols = _word_symbols(word, model.eow)
    while len(symbols) > 1:
        candidates = [
            (symbols[i], symbols[i + 1])
            for i in range(len(symbols) - 1)
            if (symbols[i], symbols[i + 1]) in model.ranks
        ]
        if not candidates:
            break
        symbols = _merge_pair(symbols, min(candidates, key=model.ranks.__getitem__))
    pieces = symbols[:-1] + [symbols[-1][: -len(model.eow)]]
    if len(pieces) == 1:
        result = (word,)
    else:
        result = tuple(p + model.marker for p in pieces[:-1]) + (pieces[-1],)
    model._word_cache[word] = result
    return result


def bpe_apply(model: BPEModel, tokens: Sequence[str]) -> list[str]:
    """Segment words into subword pieces with continuation markers."""
    out: list[str] = []
    for word in tokens:
        if not word:
            continue
        out.extend(_encode_word(model, word))
    return out


def bpe_join(tokens: Sequence[str]) -> list[str]:
    """Reassemble subword pieces into words; the inverse of bpe_apply."""
    words: list[str] = []
    buf = ""
    for tok in tokens:
        if tok.endswith(MARKER):
            buf += tok[: -len(MARKER)]
        else:
            words.append(buf + tok)
            buf = ""
    if buf:
        words.append(buf)
    return words


def preprocess(line: str, lowercase: bool = True) -> list[str]:
    """Optional Unicode lowercasing, then whitespace tokenization."""
    if lowercase:
        line = line.lower()
    return line.split()


def save_bpe_model(model: BPEModel, path: str | Path) -> None:
    lines = [f"{RULES_HEADER} {len(model.merges)}"]
    lines += [f"{left} {right}" for left, right in model.merges]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_bpe_model(path: str | Path) -> BPEModel:
    path = Path(path)
    lines = path.read_text(encoding="utf-8").splitlines()
    if not lines or not lines[0].startswith(RULES_HEADER + " "):
        raise FormatError(f"{path}:1: missing '{RULES_HEADER} <num_merges>' header")
    try:
        declared = int(lines[0].split(" ", 1)[1])
    except ValueError:
        raise FormatError(f"{path}:1: malformed merge count in header") from None
    merges: list[Pair] = []
    seen: set[Pair] = set()
    for lineno, line in enumerate(lines[1:], start=2):
        parts = line.split(" ")
        if len(parts) != 2:
            raise FormatError(f"{path}:{lineno}: expected 'left right', got {line!r}")
        pair = (parts[0], parts[1])
        if pair in seen:
            raise FormatError(f"{path}:{lineno}: duplicate merge pair {pair!r}")
        seen.add(pair)
        merges.append(pair)
    if declared != len(merges):
        raise FormatError(f"{path}: header declares {declared} merges, found {len(merges)}")
    return BPEModel(merges)
