"""Model parameters, vocabulary, binary container format, and averaging.

Container layout (little-endian throughout):

    magic   4 bytes         b"AMNT"
    version u32             1
    hlen    u64             byte length of the JSON header
    header  hlen bytes      UTF-8 JSON: {d_emb, d_h, d_att, v_src, v_trg,
                            tensors: [{name, rows, cols}, ...]} with the
                            tensor list in canonical schema order
    payload                 raw float32 row-major tensor data, header order

Vocabulary files are UTF-8 text with one token per line; ids 0 ("</s>")
and 1 ("<unk>") are implicit and must not appear in the file.

Random models are generated with numpy's default PCG64 generator seeded
directly with the given integer. Weight tensors are drawn in canonical
schema order as float64 uniform on [-0.1, 0.1) and rounded to float32;
bias tensors are zero and consume no randomness.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator

import numpy as np

from .errors import FormatError

MAGIC = b"AMNT"
FORMAT_VERSION = 1

EOS_TOKEN = "</s>"
UNK_TOKEN = "<unk>"
EOS_ID = 0
UNK_ID = 1

_GRU_NAMES = ("W_z", "W_r", "W_h", "U_z", "U_r", "U_h", "b_z", "b_r", "b_h")


@dataclass(frozen=True)
class ModelConfig:
    """Dimension bundle; d_att defaults to d_h when not given."""

    v_src: int
    v_trg: int
    d_emb: int = 500
    d_h: int = 1024
    d_att: int | None = None

    def __post_init__(self) -> None:
        if self.d_att is None:
            object.__setattr__(self, "d_att", self.d_h)
        for name in ("d_emb", "d_h", "d_att"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1, got {getattr(self, name)}")
        for name in ("v_src", "v_trg"):
            if getattr(self, name) < 2:
                raise ValueError(f"{name} must be >= 2 to fit the reserved tokens")


@dataclass(eq=False)
class GruParams:
    """One GRU cell: input and recurrent weights plus gate biases."""

    W_z: np.ndarray
    W_r: np.ndarray
    W_h: np.ndarray
    U_z: np.ndarray
    U_r: np.ndarray
    U_h: np.ndarray
    b_z: np.ndarray
    b_r: np.ndarray
    b_h: np.ndarray

    @property
    def d_in(self) -> int:
        return self.W_z.shape[0]

    @property
    def d_h(self) -> int:
        return self.W_z.shape[1]


def _gru_schema(prefix: str, d_in: int, d_h: int) -> list[tuple[str, int, int]]:
    shapes = {"W": (d_in, d_h), "U": (d_h, d_h), "b": (1, d_h)}
    return [(f"{prefix}.{n}", *shapes[n[0]]) for n in _GRU_NAMES]


def schema(config: ModelConfig) -> list[tuple[str, int, int]]:
    """Canonical (name, rows, cols) list; vectors are stored as one row."""
    d_emb, d_h, d_att = config.d_emb, config.d_h, config.d_att
    entries: list[tuple[str, int, int]] = [
        ("E_src", config.v_src, d_emb),
        ("E_trg", config.v_trg, d_emb),
    ]
    entries += _gru_schema("enc_fwd", d_emb, d_h)
    entries += _gru_schema("enc_bwd", d_emb, d_h)
    entries += _gru_schema("dec", d_emb + 2 * d_h, d_h)
    entries += [
        ("W_init", 2 * d_h, d_h),
        ("b_init", 1, d_h),
        ("W_att_s", d_h, d_att),
        ("W_att_h", 2 * d_h, d_att),
        ("v_att", 1, d_att),
        ("W_out_s", d_h, d_emb),
        ("W_out_y", d_emb, d_emb),
        ("W_out_c", 2 * d_h, d_emb),
        ("b_out", 1, d_emb),
        ("W_logit", d_emb, config.v_trg),
        ("b_logit", 1, config.v_trg),
    ]
    return entries


def _is_vector(name: str) -> bool:
    base = name.rsplit(".", 1)[-1]
    return base.startswith("b_") or base == "v_att"


@dataclass(eq=False)
class ModelParams:
    """Full parameter set for one encoder-decoder model.

    Tensors are float32 and marked read-only after construction so a model
    can be shared freely across decoding threads.
    """

    config: ModelConfig
    E_src: np.ndarray
    E_trg: np.ndarray
    enc_fwd: GruParams
    enc_bwd: GruParams
    dec: GruParams
    W_init: np.ndarray
    b_init: np.ndarray
    W_att_s: np.ndarray
    W_att_h: np.ndarray
    v_att: np.ndarray
    W_out_s: np.ndarray
    W_out_y: np.ndarray
    W_out_c: np.ndarray
    b_out: np.ndarray
    W_logit: np.ndarray
    b_logit: np.ndarray
    _fwd_cache: object = field(default=None, init=False, repr=False)

    def __post_init__(self) -> None:
        for name, arr in self.tensor_items():
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"tensor {name} contains non-finite values")
            arr.flags.writeable = False

    def tensor_items(self) -> Iterator[tuple[str, np.ndarray]]:
        """Yield (name, array) pairs in canonical schema order."""
        for name, _, _ in schema(self.config):
            if "." in name:
                prefix, base = name.split(".", 1)
                yield name, getattr(getattr(self, prefix), base)
            else:
                yield name, getattr(self, name)

    @classmethod
    def from_tensors(cls, config: ModelConfig, tensors: dict[str, np.ndarray]) -> "ModelParams":
        """Assemble params from a name->array map, validating the schema."""
        expected = schema(config)
        expected_names = {name for name, _, _ in expected}
        for name in tensors:
            if name not in expected_names:
                raise FormatError(f"unexpected tensor {name!r}")
        kwargs: dict[str, object] = {"config": config}
        grus: dict[str, dict[str, np.ndarray]] = {"enc_fwd": {}, "enc_bwd": {}, "dec": {}}
        for name, rows, cols in expected:
            if name not in tensors:
                raise FormatError(f"missing tensor {name!r}")
            arr = np.ascontiguousarray(tensors[name], dtype=np.float32)
            want = (cols,) if _is_vector(name) else (rows, cols)
            if arr.shape == (rows, cols) and _is_vector(name):
                arr = arr.reshape(cols)
            if arr.shape != want:
                raise FormatError(f"tensor {name!r} has shape {arr.shape}, expected {want}")
            if "." in name:
                prefix, base = name.split(".", 1)
                grus[prefix][base] = arr
            else:
                kwargs[name] = arr
        for prefix, parts in grus.items():
            kwargs[prefix] = GruParams(**parts)
        return cls(**kwargs)  # type: ignore[arg-type]


class Vocabulary:
    """Ordered token list with the inverse token->id map.

    Id 0 is "</s>" and id 1 is "<unk>"; both are implicit.
    """

    def __init__(self, tokens: list[str]):
        if tokens[:2] != [EOS_TOKEN, UNK_TOKEN]:
            raise ValueError("vocabulary must start with the reserved tokens")
        self.tokens = tokens
        self._index = {tok: i for i, tok in enumerate(tokens)}
        if len(self._index) != len(tokens):
            raise ValueError("vocabulary contains duplicate tokens")

    @classmethod
    def from_tokens(cls, extra: list[str]) -> "Vocabulary":
        return cls([EOS_TOKEN, UNK_TOKEN] + list(extra))

    def __len__(self) -> int:
        return len(self.tokens)

    def __contains__(self, token: str) -> bool:
        return token in self._index

    def id(self, token: str) -> int:
        """Id of token, or the <unk> id when absent."""
        return self._index.get(token, UNK_ID)

    def token(self, i: int) -> str:
        return self.tokens[i]


def load_vocab(path: str | Path) -> Vocabulary:
    """Read a one-token-per-line vocabulary file.

    Line i (1-based) gets id i+1; the reserved tokens must not appear.
    """
    path = Path(path)
    tokens = [EOS_TOKEN, UNK_TOKEN]
    seen = {EOS_TOKEN: 0, UNK_TOKEN: 0}
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        if line in (EOS_TOKEN, UNK_TOKEN):
            raise FormatError(f"{path}:{lineno}: reserved token {line!r} must not appear in the file")
        if line in seen:
            raise FormatError(f"{path}:{lineno}: duplicate token {line!r}")
        seen[line] = lineno
        tokens.append(line)
    return Vocabulary(tokens)


def save_model(params: ModelParams, path: str | Path) -> None:
    """Write params to the binary container format."""
    entries = schema(params.config)
    header = {
        "d_emb": params.config.d_emb,
        "d_h": params.config.d_h,
        "d_att": params.config.d_att,
        "v_src": params.config.v_src,
        "v_trg": params.config.v_trg,
        "tensors": [{"name": n, "rows": r, "cols": c} for n, r, c in entries],
    }
    header_bytes = json.dumps(header).encode("utf-8")
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(struct.pack("<I", FORMAT_VERSION))
        f.write(struct.pack("<Q", len(header_bytes)))
        f.write(header_bytes)
        for _, arr in params.tensor_items():
            f.write(arr.astype("<f4", copy=False).tobytes(order="C"))


def _read_header(buf: bytes, path: Path) -> tuple[ModelConfig, list[dict], int]:
    if len(buf) < 16:
        raise FormatError(f"{path}: truncated file")
    if buf[:4] != MAGIC:
        raise FormatError(f"{path}: bad magic {buf[:4]!r}, expected {MAGIC!r}")
    (version,) = struct.unpack_from("<I", buf, 4)
    if version != FORMAT_VERSION:
        raise FormatError(f"{path}: unsupported format version {version}")
    (hlen,) = struct.unpack_from("<Q", buf, 8)
    if len(buf) < 16 + hlen:
        raise FormatError(f"{path}: truncated header")
    try:
        header = json.loads(buf[16 : 16 + hlen].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise FormatError(f"{path}: malformed header: {e}") from e
    required = {"d_emb", "d_h", "d_att", "v_src", "v_trg", "tensors"}
    if not isinstance(header, dict) or set(header) != required:
        raise FormatError(f"{path}: header keys must be exactly {sorted(required)}")
    try:
        config = ModelConfig(
            v_src=header["v_src"],
            v_trg=header["v_trg"],
            d_emb=header["d_emb"],
            d_h=header["d_h"],
            d_att=header["d_att"],
        )
    except (TypeError, ValueError) as e:
        raise FormatError(f"{path}: invalid config in header: {e}") from e
    return config, header["tensors"], 16 + hlen


def load_model(path: str | Path) -> ModelParams:
    """Read a model container; the inverse of save_model, bitwise."""
    path = Path(path)
    buf = path.read_bytes()
    config, declared, offset = _read_header(buf, path)
    expected = schema(config)
    if len(declared) != len(expected):
        raise FormatError(f"{path}: header lists {len(declared)} tensors, expected {len(expected)}")
    tensors: dict[str, np.ndarray] = {}
    for entry, (name, rows, cols) in zip(declared, expected):
        if not isinstance(entry, dict) or set(entry) != {"name", "rows", "cols"}:
            raise FormatError(f"{path}: malformed tensor entry {entry!r}")
        if entry["name"] != name:
            raise FormatError(f"{path}: tensor {entry['name']!r} out of place, expected {name!r}")
        if (entry["rows"], entry["cols"]) != (rows, cols):
            raise FormatError(
                f"{path}: tensor {name!r} declared {entry['rows']}x{entry['cols']}, "
                f"config requires {rows}x{cols}"
            )
        nbytes = rows * cols * 4
        if offset + nbytes > len(buf):
            raise FormatError(f"{path}: truncated payload for tensor {name!r}")
        arr = np.frombuffer(buf, dtype="<f4", count=rows * cols, offset=offset)
        tensors[name] = arr.reshape(cols) if _is_vector(name) else arr.reshape(rows, cols)
        offset += nbytes
    if offset != len(buf):
        raise FormatError(f"{path}: {len(buf) - offset} trailing bytes after payload")
    return ModelParams.from_tensors(config, tensors)


def random_model(config: ModelConfig, seed: int) -> ModelParams:
    """Deterministic random model: PCG64(seed), uniform [-0.1, 0.1) weights,
    zero biases."""
    rng = np.random.default_rng(seed)
    tensors: dict[str, np.ndarray] = {}
    for name, rows, cols in schema(config):
        if _is_vector(name) and name != "v_att":
            tensors[name] = np.zeros((rows, cols), dtype=np.float32)
        else:
            tensors[name] = rng.uniform(-0.1, 0.1, size=(rows, cols)).astype(np.float32)
    return ModelParams.from_tensors(config, tensors)


def average_checkpoints(paths: list[str | Path]) -> ModelParams:
    """Elementwise mean of the parameters of one or more saved models.

    Accumulates in float64 and rounds once to float32. All inputs must
    share the same config (and therefore the same tensor schema).
    """
    if not paths:
        raise ValueError("average_checkpoints requires at least one model path")
    first = load_model(paths[0])
    sums = {name: arr.astype(np.float64) for name, arr in first.tensor_items()}
    for path in paths[1:]:
        other = load_model(path)
        if other.config != first.config:
            for (name_a, ra, ca), (_, rb, cb) in zip(schema(first.config), schema(other.config)):
                if (ra, ca) != (rb, cb):
                    raise ValueError(
                        f"{path}: tensor {name_a!r} has shape {rb}x{cb}, expected {ra}x{ca}"
                    )
            raise ValueError(f"{path}: config differs from {paths[0]}")
        for name, arr in other.tensor_items():
            sums[name] += arr
    n = float(len(paths))
    averaged = {name: (acc / n).astype(np.float32) for name, acc in sums.items()}
    return ModelParams.from_tensors(first.config, averaged)
