"""Per-sentence restriction of the output vocabulary.

A shortlist is the union of the K globally most frequent target ids, the
top K' lexical translations of each source token present in the table,
and the always-included ids 0 ("</s>") and 1 ("<unk>") so every sentence
can terminate and back off.

File formats:
  * lexical table: one "source target probability" triple per line,
    whitespace-separated; probabilities are P(target|source) in (0, 1].
  * frequency list: one target token per line in descending training
    frequency; tokens missing from the vocabulary are skipped.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import FormatError
from .model import EOS_ID, UNK_ID, UNK_TOKEN, Vocabulary


@dataclass(eq=False)
class LexicalTable:
    """source token -> [(target token, probability)] sorted by descending
    probability, ties broken by target-token order."""

    entries: dict[str, list[tuple[str, float]]]

    def get(self, source: str) -> list[tuple[str, float]]:
        return self.entries.get(source, [])


@dataclass(eq=False)
class ShortList:
    """Strictly ascending unique target ids with the local-index inverse."""

    global_ids: np.ndarray
    inverse: dict[int, int] = field(init=False)

    def __post_init__(self) -> None:
        ids = np.asarray(self.global_ids, dtype=np.int64)
        if ids.ndim != 1 or ids.size == 0:
            raise ValueError("shortlist must be a non-empty 1-D id array")
        if not np.all(ids[1:] > ids[:-1]):
            raise ValueError("shortlist ids must be strictly ascending")
        if ids[0] != EOS_ID or (ids.size < 2 or ids[1] != UNK_ID):
            raise ValueError("shortlist must contain ids 0 (</s>) and 1 (<unk>)")
        ids.flags.writeable = False
        self.global_ids = ids
        self.inverse = {int(g): i for i, g in enumerate(ids)}

    def __len__(self) -> int:
        return int(self.global_ids.size)

    def local(self, global_id: int) -> int:
        return self.inverse[global_id]

    @classmethod
    def from_ids(cls, ids: Iterable[int]) -> "ShortList":
        merged = set(int(i) for i in ids) | {EOS_ID, UNK_ID}
        return cls(np.array(sorted(merged), dtype=np.int64))

    @classmethod
    def full(cls, v_trg: int) -> "ShortList":
        return cls(np.arange(v_trg, dtype=np.int64))


def load_lex_table(path: str | Path, trg_vocab: Vocabulary) -> LexicalTable:
    """Read "source target probability" lines into a LexicalTable.

    Targets missing from trg_vocab are recorded as "<unk>"; duplicate
    (source, target) pairs keep their maximum probability.
    """
    path = Path(path)
    best: dict[str, dict[str, float]] = {}
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        parts = line.split()
        if len(parts) != 3:
            raise FormatError(f"{path}:{lineno}: expected 'source target probability', got {line!r}")
        source, target, prob_str = parts
        try:
            prob = float(prob_str)
        except ValueError:
            raise FormatError(f"{path}:{lineno}: non-numeric probability {prob_str!r}") from None
        if not 0.0 < prob <= 1.0:
            raise FormatError(f"{path}:{lineno}: probability {prob} outside (0, 1]")
        if target not in trg_vocab:
            target = UNK_TOKEN
        per_source = best.setdefault(source, {})
        if prob > per_source.get(target, 0.0):
            per_source[target] = prob
    entries = {
        source: sorted(targets.items(), key=lambda kv: (-kv[1], kv[0]))
        for source, targets in best.items()
    }
    return LexicalTable(entries)


def load_freq_list(path: str | Path, trg_vocab: Vocabulary) -> tuple[list[int], int]:
    """Read a descending-frequency token list, mapping tokens to ids.

    Returns (ids, skipped) where skipped counts tokens absent from the
    vocabulary.
    """
    ids: list[int] = []
    skipped = 0
    seen: set[int] = set()
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if not line:
            continue
        if line not in trg_vocab:
            skipped += 1
            continue
        i = trg_vocab.id(line)
        if i not in seen:
            seen.add(i)
            ids.append(i)
    return ids, skipped


def build_shortlist(
    table: LexicalTable,
    freq_ids: Sequence[int],
    src_tokens: Sequence[str],
    K: int,
    Kprime: int,
    trg_vocab: Vocabulary,
) -> ShortList:
    """Shortlist for one sentence: {0, 1} + top-K global ids + top-K'
    translations of each source token. Unknown source tokens contribute
    nothing; repeated source tokens do not change the result."""
    if K < 0 or Kprime < 0:
        raise ValueError(f"K and K' must be >= 0, got K={K}, K'={Kprime}")
    ids = set(int(i) for i in freq_ids[:K])
    ids.add(EOS_ID)
    ids.add(UNK_ID)
    for token in src_tokens:
        for target, _ in table.get(token)[:Kprime]:
            ids.add(trg_vocab.id(target))
    return ShortList.from_ids(ids)
