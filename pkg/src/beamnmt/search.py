"""Beam-search decoding over one or more models, plus an exhaustive
oracle used to verify it on tiny instances.

Scores are cumulative sums of ensemble log-probabilities (arithmetic
mean over models, not renormalized). The decoder is primed with token id
0 ("</s>") before the first step; emitted hypotheses never include that
priming token. Candidate selection breaks score ties by lower token id,
then lower parent index, which makes decoding fully deterministic; final
ranking breaks remaining ties by lexicographically smaller token
sequence.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Sequence

import numpy as np

from .model import EOS_ID, ModelParams
from .nnet import DecoderState, Forward

if TYPE_CHECKING:
    from .shortlist import ShortList

EXHAUSTIVE_GUARD = 10**6


@dataclass(eq=False)
class Hypothesis:
    """A partial or finished candidate translation."""

    tokens: list[int]
    score: float
    states: list[DecoderState]
    finished: bool

    def rank_score(self, length_normalize: bool) -> float:
        if length_normalize and self.tokens:
            return self.score / len(self.tokens)
        return self.score


@dataclass(frozen=True)
class DecodeOptions:
    beam_size: int = 5
    max_len_factor: int = 2
    max_len_offset: int = 10
    length_normalize: bool = False
    n_best: int = 1

    def max_target_len(self, src_len: int) -> int:
        return self.max_len_factor * src_len + self.max_len_offset


def ensemble_logprobs(per_model: Sequence[np.ndarray]) -> np.ndarray:
    """Arithmetic mean of equal-length log-prob arrays (no renormalizing)."""
    if len(per_model) == 0:
        raise ValueError("ensemble requires at least one model output")
    arrays = [np.asarray(a, dtype=np.float64) for a in per_model]
    lengths = {a.shape for a in arrays}
    if len(lengths) != 1:
        raise ValueError(f"mismatched log-prob array shapes: {sorted(lengths)}")
    return _mean_about_first(np.stack(arrays))


def _mean_about_first(stack: np.ndarray) -> np.ndarray:
    # Averaging deviations from the first member keeps the mean of k
    # identical arrays bitwise equal to that array for every k, which in
    # turn makes an ensemble of copies decode identically to one model.
    first = stack[0]
    return first + (stack - first[None]).mean(axis=0)


def _select_top(flat: np.ndarray, k: int, n_cols: int) -> np.ndarray:
    """Indices of the k best flat candidates.

    flat[parent * n_cols + token] is a candidate score. Ties on score are
    broken by lower token id, then lower parent index. The result is
    ordered the same way, so the surviving beam has a deterministic
    layout for the next step's parent indices.
    """
    if flat.size > k:
        kth = np.partition(flat, flat.size - k)[flat.size - k]
        better = np.nonzero(flat > kth)[0]
        tied = np.nonzero(flat == kth)[0]
        tied = tied[np.lexsort((tied // n_cols, tied % n_cols))]
        idx = np.concatenate([better, tied[: k - better.size]])
    else:
        idx = np.arange(flat.size)
    return idx[np.lexsort((idx // n_cols, idx % n_cols, -flat[idx]))]


def _validate_models(models: Sequence[ModelParams]) -> None:
    if len(models) == 0:
        raise ValueError("at least one model is required")
    v_src, v_trg = models[0].config.v_src, models[0].config.v_trg
    for m in models[1:]:
        if (m.config.v_src, m.config.v_trg) != (v_src, v_trg):
            raise ValueError(
                f"model vocabulary mismatch: ({m.config.v_src}, {m.config.v_trg}) "
                f"vs ({v_src}, {v_trg})"
            )


@dataclass(eq=False)
class _Beam:
    """Active hypotheses in flat arrays, one row per hypothesis."""

    tokens: list[list[int]]
    scores: np.ndarray
    states: list[np.ndarray]  # per model: B x d_h
    prev: np.ndarray  # last emitted token per hypothesis (EOS_ID to start)


def beam_search(
    models: Sequence[ModelParams],
    src_ids: Sequence[int],
    opts: DecodeOptions = DecodeOptions(),
    shortlist: "ShortList | None" = None,
) -> list[Hypothesis]:
    """Decode one source sentence, returning up to n_best hypotheses.

    All models are encoded up front; every step expands each active
    hypothesis with the ensemble log-probabilities, keeps the global top
    beam_size continuations, and retires those emitting "</s>". Search
    stops when the beam empties, the length cap (max_len_factor *
    src_len + max_len_offset) is reached, or no active hypothesis can
    still beat the best finished score. If nothing finished, the best
    active hypothesis is returned unfinished.
    """
    _validate_models(models)
    if len(src_ids) == 0:
        raise ValueError("cannot decode an empty source sentence")
    if opts.beam_size < 1:
        raise ValueError(f"beam_size must be >= 1, got {opts.beam_size}")
    if opts.n_best < 1:
        raise ValueError(f"n_best must be >= 1, got {opts.n_best}")
    cap = opts.max_target_len(len(src_ids))
    if cap < 1:
        raise ValueError(f"length cap {cap} must be >= 1")
    v_trg = models[0].config.v_trg
    sl_ids = None
    local_to_global: np.ndarray | None = None
    if shortlist is not None:
        sl_ids = np.asarray(shortlist.global_ids, dtype=np.int64)
        if int(sl_ids[-1]) >= v_trg:
            raise ValueError(f"shortlist id {int(sl_ids[-1])} out of range for v_trg={v_trg}")
        local_to_global = sl_ids

    fwds = [Forward.for_params(m) for m in models]
    anns = [f.encode(list(src_ids)) for f in fwds]
    beam = _Beam(
        tokens=[[]],
        scores=np.zeros(1),
        states=[f.init_state_row(a) for f, a in zip(fwds, anns)],
        prev=np.array([EOS_ID], dtype=np.int64),
    )
    finished: list[tuple[float, list[int], list[np.ndarray]]] = []

    for _ in range(cap):
        per_model = [
            f.step_rows(state, beam.prev, a, sl_ids)
            for f, state, a in zip(fwds, beam.states, anns)
        ]
        next_states = [pm[0] for pm in per_model]
        logprobs = _mean_about_first(np.stack([pm[1] for pm in per_model]))
        n_cols = logprobs.shape[1]
        flat = (beam.scores[:, None] + logprobs).ravel()
        chosen = _select_top(flat, opts.beam_size, n_cols)

        parents = chosen // n_cols
        locals_ = chosen % n_cols
        globals_ = locals_ if local_to_global is None else local_to_global[locals_]
        scores = flat[chosen]

        keep: list[int] = []
        new_tokens: list[list[int]] = []
        for i, (p, g) in enumerate(zip(parents, globals_)):
            seq = beam.tokens[p] + [int(g)]
            if int(g) == EOS_ID:
                finished.append((float(scores[i]), seq, [s[p].copy() for s in next_states]))
            else:
                keep.append(i)
                new_tokens.append(seq)
        if not keep:
            break
        keep_idx = np.asarray(keep, dtype=np.int64)
        beam = _Beam(
            tokens=new_tokens,
            scores=scores[keep_idx],
            states=[s[parents[keep_idx]] for s in next_states],
            prev=globals_[keep_idx].astype(np.int64),
        )
        if finished:
            best_finished = max(score for score, _, _ in finished)
            if float(beam.scores.max()) <= best_finished:
                break

    if finished:
        hyps = [
            Hypothesis(tokens=seq, score=score, states=[DecoderState(s) for s in states], finished=True)
            for score, seq, states in finished
        ]
    else:
        hyps = [
            Hypothesis(
                tokens=beam.tokens[i],
                score=float(beam.scores[i]),
                states=[DecoderState(s[i]) for s in beam.states],
                finished=False,
            )
            for i in range(len(beam.tokens))
        ]
    hyps.sort(key=lambda h: (-h.rank_score(opts.length_normalize), h.tokens))
    return hyps[: opts.n_best]


def exhaustive_search(
    models: Sequence[ModelParams],
    src_ids: Sequence[int],
    cap: int,
) -> Hypothesis:
    """Best hypothesis by full enumeration; verification oracle.

    Scores every target sequence of length <= cap that ends in "</s>"
    (falling back to the best unfinished cap-length sequence if none
    finish) with the exact summed ensemble log-probability. Refuses when
    v_trg ** cap exceeds 10**6.
    """
    _validate_models(models)
    if len(src_ids) == 0:
        raise ValueError("cannot decode an empty source sentence")
    if cap < 1:
        raise ValueError(f"length cap {cap} must be >= 1")
    v_trg = models[0].config.v_trg
    space = v_trg**cap
    if space > EXHAUSTIVE_GUARD:
        raise ValueError(
            f"search space v_trg^cap = {v_trg}^{cap} = {space} exceeds the "
            f"{EXHAUSTIVE_GUARD} guard"
        )

    fwds = [Forward.for_params(m) for m in models]
    anns = [f.encode(list(src_ids)) for f in fwds]
    best: list[tuple[float, list[int], list[np.ndarray]] | None] = [None, None]  # finished, unfinished

    def consider(slot: int, score: float, seq: list[int], states: list[np.ndarray]) -> None:
        cur = best[slot]
        if cur is None or score > cur[0] or (score == cur[0] and seq < cur[1]):
            best[slot] = (score, seq, states)

    def expand(prefix: list[int], score: float, prev: int, states: list[np.ndarray]) -> None:
        prev_arr = np.array([prev], dtype=np.int64)
        per_model = [
            f.step_rows(state, prev_arr, a, None)
            for f, state, a in zip(fwds, states, anns)
        ]
        next_states = [pm[0] for pm in per_model]
        row = _mean_about_first(np.stack([pm[1][0] for pm in per_model]))
        consider(0, score + float(row[EOS_ID]), prefix + [EOS_ID], next_states)
        if len(prefix) + 1 < cap:
            for tok in range(1, v_trg):
                expand(prefix + [tok], score + float(row[tok]), tok, next_states)
        else:
            for tok in range(1, v_trg):
                consider(1, score + float(row[tok]), prefix + [tok], next_states)

    expand([], 0.0, EOS_ID, [f.init_state_row(a) for f, a in zip(fwds, anns)])
    slot = 0 if best[0] is not None else 1
    score, seq, states = best[slot]  # type: ignore[misc]
    return Hypothesis(
        tokens=seq,
        score=score,
        states=[DecoderState(s[0]) for s in states],
        finished=(slot == 0),
    )
