"""Forward pass: embeddings, GRU cell, bidirectional encoder, attention,
and the single decoder step producing per-token log-probabilities.

Gate convention, fixed for reproducibility:

    z  = sigmoid(x W_z + h U_z + b_z)
    r  = sigmoid(x W_r + h U_r + b_r)
    h~ = tanh(x W_h + (r*h) U_h + b_h)
    h' = (1 - z) * h + z * h~

The decoder consumes [previous-target embedding ; attention context] as
its input, its initial state is tanh(mean(annotations) W_init + b_init),
and the deep output is t = tanh(s' W_out_s + y W_out_y + c W_out_c +
b_out) with logits t W_logit + b_logit.

All public functions are pure over immutable ModelParams. Hypothesis
batches (one row per hypothesis) and standalone calls share the same
batched kernels, so a batch of one reproduces a single call bitwise.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from .errors import ShapeError
from .model import GruParams, ModelParams
from .tensor import log_softmax_rows, sigmoid, tanh

if TYPE_CHECKING:
    from .shortlist import ShortList


@dataclass(eq=False)
class Annotations:
    """Per-sentence encoder output.

    h holds one row per source position: [forward state ; backward state].
    precomp_att caches h @ W_att_h so attention reuses it every step.
    """

    h: np.ndarray
    precomp_att: np.ndarray

    @property
    def length(self) -> int:
        return self.h.shape[0]


@dataclass(eq=False)
class DecoderState:
    """Current decoder hidden state (length d_h)."""

    s: np.ndarray


class _GruWeights:
    def __init__(self, g: GruParams):
        f8 = lambda a: np.ascontiguousarray(a, dtype=np.float64)
        self.W_z, self.W_r, self.W_h = f8(g.W_z), f8(g.W_r), f8(g.W_h)
        self.U_z, self.U_r, self.U_h = f8(g.U_z), f8(g.U_r), f8(g.U_h)
        self.b_z, self.b_r, self.b_h = f8(g.b_z), f8(g.b_r), f8(g.b_h)

    def step_rows(self, x: np.ndarray, h: np.ndarray) -> np.ndarray:
        z = sigmoid(x @ self.W_z + h @ self.U_z + self.b_z)
        r = sigmoid(x @ self.W_r + h @ self.U_r + self.b_r)
        h_tilde = tanh(x @ self.W_h + (r * h) @ self.U_h + self.b_h)
        return (1.0 - z) * h + z * h_tilde


class Forward:
    """Float64 working copies of one model's parameters for decoding.

    The output projection is additionally cached transposed (one row per
    target word) so a vocabulary shortlist is a contiguous row-gather.
    Built once per ModelParams and cached on it; safe to share between
    threads because everything here is read-only after construction.
    """

    def __init__(self, params: ModelParams):
        f8 = lambda a: np.ascontiguousarray(a, dtype=np.float64)
        self.config = params.config
        self.E_src = f8(params.E_src)
        self.E_trg = f8(params.E_trg)
        self.enc_fwd = _GruWeights(params.enc_fwd)
        self.enc_bwd = _GruWeights(params.enc_bwd)
        self.dec = _GruWeights(params.dec)
        self.W_init = f8(params.W_init)
        self.b_init = f8(params.b_init)
        self.W_att_s = f8(params.W_att_s)
        self.W_att_h = f8(params.W_att_h)
        self.v_att = f8(params.v_att)
        self.W_out_s = f8(params.W_out_s)
        self.W_out_y = f8(params.W_out_y)
        self.W_out_c = f8(params.W_out_c)
        self.b_out = f8(params.b_out)
        self.logit_rows = np.ascontiguousarray(params.W_logit.T, dtype=np.float64)
        self.b_logit = f8(params.b_logit)

    @classmethod
    def for_params(cls, params: ModelParams) -> "Forward":
        cached = params._fwd_cache
        if cached is None:
            cached = cls(params)
            params._fwd_cache = cached
        return cached  # type: ignore[return-value]

    def encode(self, src_ids: list[int]) -> Annotations:
        if len(src_ids) == 0:
            raise ValueError("cannot encode an empty source sentence")
        emb = embed(self.E_src, src_ids)
        J, d_h = emb.shape[0], self.config.d_h
        fwd = np.empty((J, d_h))
        state = np.zeros((1, d_h))
        for j in range(J):
            state = self.enc_fwd.step_rows(emb[j : j + 1], state)
            fwd[j] = state[0]
        bwd = np.empty((J, d_h))
        state = np.zeros((1, d_h))
        for j in range(J - 1, -1, -1):
            state = self.enc_bwd.step_rows(emb[j : j + 1], state)
            bwd[j] = state[0]
        h = np.concatenate([fwd, bwd], axis=1)
        return Annotations(h=h, precomp_att=h @ self.W_att_h)

    def init_state_row(self, a: Annotations) -> np.ndarray:
        mean = a.h.mean(axis=0, keepdims=True)
        return tanh(mean @ self.W_init + self.b_init)

    def attention_rows(self, s_rows: np.ndarray, a: Annotations) -> tuple[np.ndarray, np.ndarray]:
        """Attention for a batch of states: (alpha B x J, context B x 2*d_h)."""
        B, J = s_rows.shape[0], a.length
        energy_in = tanh(a.precomp_att[None, :, :] + (s_rows @ self.W_att_s)[:, None, :])
        e = energy_in.reshape(B * J, -1) @ self.v_att
        e = e.reshape(B, J)
        e -= e.max(axis=1, keepdims=True)
        weights = np.exp(e)
        alpha = weights / weights.sum(axis=1, keepdims=True)
        return alpha, alpha @ a.h

    def step_rows(
        self,
        s_rows: np.ndarray,
        y_prev: np.ndarray,
        a: Annotations,
        shortlist_ids: np.ndarray | None = None,
    ) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """One decoder step for a batch of hypotheses.

        Returns (next states B x d_h, log-probs B x n, alpha B x J) where
        n is the shortlist size, or v_trg without a shortlist.
        """
        y_emb = self.E_trg[np.asarray(y_prev, dtype=np.int64)]
        alpha, context = self.attention_rows(s_rows, a)
        x = np.concatenate([y_emb, context], axis=1)
        s_next = self.dec.step_rows(x, s_rows)
        t = tanh(s_next @ self.W_out_s + y_emb @ self.W_out_y + context @ self.W_out_c + self.b_out)
        if shortlist_ids is None:
            logits = t @ self.logit_rows.T + self.b_logit
        else:
            logits = t @ self.logit_rows[shortlist_ids].T + self.b_logit[shortlist_ids]
        return s_next, log_softmax_rows(logits), alpha


def embed(table: np.ndarray, ids: list[int] | np.ndarray) -> np.ndarray:
    """Gather embedding rows for a token-id sequence."""
    table = np.asarray(table)
    ids = list(ids)
    for pos, i in enumerate(ids):
        if not 0 <= i < table.shape[0]:
            raise ValueError(f"token id {i} at position {pos} out of range for table with {table.shape[0]} rows")
    return table[np.asarray(ids, dtype=np.int64)]


def gru_step(g: GruParams, x: np.ndarray, h: np.ndarray) -> np.ndarray:
    """One GRU cell update for a single input/state vector pair."""
    x = np.asarray(x, dtype=np.float64)
    h = np.asarray(h, dtype=np.float64)
    if x.shape != (g.d_in,):
        raise ShapeError(f"input has shape {x.shape}, cell expects ({g.d_in},)")
    if h.shape != (g.d_h,):
        raise ShapeError(f"state has shape {h.shape}, cell expects ({g.d_h},)")
    return _GruWeights(g).step_rows(x.reshape(1, -1), h.reshape(1, -1))[0]


def encode(m: ModelParams, src_ids: list[int]) -> Annotations:
    """Bidirectional GRU encoding of a source-id sequence (length >= 1)."""
    for pos, i in enumerate(src_ids):
        if not 0 <= i < m.config.v_src:
            raise ValueError(f"source id {i} at position {pos} out of range for v_src={m.config.v_src}")
    return Forward.for_params(m).encode(list(src_ids))


def init_decoder_state(m: ModelParams, a: Annotations) -> DecoderState:
    return DecoderState(s=Forward.for_params(m).init_state_row(a)[0])


def attention(m: ModelParams, s: DecoderState, a: Annotations) -> tuple[np.ndarray, np.ndarray]:
    """Attention weights over source positions and the context vector."""
    alpha, context = Forward.for_params(m).attention_rows(s.s.reshape(1, -1), a)
    return alpha[0], context[0]


def decoder_step(
    m: ModelParams,
    s: DecoderState,
    y_prev: int,
    a: Annotations,
    shortlist: "ShortList | None" = None,
) -> tuple[DecoderState, np.ndarray, np.ndarray]:
    """Advance the decoder one token.

    Returns (next state, log-probs, attention weights). With a shortlist
    the log-probs cover only its entries, index i meaning global id
    shortlist.global_ids[i]; otherwise they cover the whole vocabulary.
    """
    v_trg = m.config.v_trg
    if not 0 <= y_prev < v_trg:
        raise ValueError(f"previous token id {y_prev} out of range for v_trg={v_trg}")
    ids = None
    if shortlist is not None:
        ids = shortlist.global_ids
        if len(ids) and int(ids[-1]) >= v_trg:
            raise ValueError(f"shortlist id {int(ids[-1])} out of range for v_trg={v_trg}")
    fwd = Forward.for_params(m)
    s_rows, logprobs, alpha = fwd.step_rows(
        s.s.reshape(1, -1), np.array([y_prev], dtype=np.int64), a, ids
    )
    return DecoderState(s=s_rows[0]), logprobs[0], alpha[0]
