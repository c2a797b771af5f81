"""Small dense multilayer perceptrons with a flat binary checkpoint format.

Networks are fully described by ``MlpParams``: a chain of (weights, bias)
pairs with rectified-linear activations between layers and a linear output.
Weight matrices are stored as (fan_in, fan_out) so the forward pass is a
plain ``x @ w + b`` per layer.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..numkit import RngStream

DEFAULT_HIDDEN = (50, 50)

_MAGIC = b"MLP1"
_U32 = np.dtype("<u4")
_F64 = np.dtype("<f8")


@dataclass(frozen=True)
class MlpParams:
    """Parameters of a rectified-linear MLP as ((weights, bias), ...) pairs."""

    layers: tuple

    def __post_init__(self):
        if len(self.layers) < 1:
            raise ValueError("an MLP needs at least one layer")
        cleaned = []
        prev_out = None
        for w, b in self.layers:
            w = np.asarray(w, dtype=float)
            b = np.asarray(b, dtype=float)
            if w.ndim != 2 or b.shape != (w.shape[1],):
                raise ValueError(f"bad layer shapes {w.shape} / {b.shape}")
            if prev_out is not None and w.shape[0] != prev_out:
                raise ValueError("layer input width does not match previous output")
            if not (np.isfinite(w).all() and np.isfinite(b).all()):
                raise ValueError("parameters must be finite")
            prev_out = w.shape[1]
            cleaned.append((w, b))
        object.__setattr__(self, "layers", tuple(cleaned))

    @property
    def widths(self) -> tuple:
        return (self.layers[0][0].shape[0],) + tuple(w.shape[1] for w, _ in self.layers)

    @property
    def in_dim(self) -> int:
        return self.widths[0]

    @property
    def out_dim(self) -> int:
        return self.widths[-1]


def init_mlp(widths: Sequence[int], rng: RngStream) -> MlpParams:
    """Draw parameters with fan-in-scaled uniform entries.

    Each layer's weights and bias are U(-1/sqrt(fan_in), 1/sqrt(fan_in)).
    """
    widths = tuple(int(w) for w in widths)
    if len(widths) < 2 or any(w < 1 for w in widths):
        raise ValueError(f"need at least input and output widths, got {widths}")
    gen = rng.generator()
    layers = []
    for fan_in, fan_out in zip(widths[:-1], widths[1:]):
        bound = 1.0 / np.sqrt(fan_in)
        w = gen.uniform(-bound, bound, size=(fan_in, fan_out))
        b = gen.uniform(-bound, bound, size=fan_out)
        layers.append((w, b))
    return MlpParams(tuple(layers))


def mlp_logits(params: MlpParams, x: np.ndarray) -> np.ndarray:
    """Forward pass: hidden layers rectified, output layer linear."""
    h = np.asarray(x, dtype=float)
    if h.ndim != 2 or h.shape[1] != params.in_dim:
        raise ValueError(f"inputs must be (n, {params.in_dim}), got {h.shape}")
    for w, b in params.layers[:-1]:
        h = np.maximum(h @ w + b, 0.0)
    w, b = params.layers[-1]
    return h @ w + b


def softmax(logits: np.ndarray) -> np.ndarray:
    """Row-wise softmax, stabilized by subtracting the row max."""
    z = np.asarray(logits, dtype=float)
    z = z - z.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def mlp_to_bytes(params: MlpParams) -> bytes:
    """Serialize: magic, u32 layer count, u32 widths, then per-layer
    row-major f64 weights followed by f64 bias. Everything little-endian."""
    parts = [_MAGIC, np.array([len(params.layers)], dtype=_U32).tobytes()]
    parts.append(np.array(params.widths, dtype=_U32).tobytes())
    for w, b in params.layers:
        parts.append(np.ascontiguousarray(w, dtype=_F64).tobytes())
        parts.append(np.ascontiguousarray(b, dtype=_F64).tobytes())
    return b"".join(parts)


def mlp_from_bytes(data: bytes) -> MlpParams:
    if data[:4] != _MAGIC:
        raise ValueError("not an MLP checkpoint")
    n_layers = int(np.frombuffer(data, dtype=_U32, count=1, offset=4)[0])
    widths = np.frombuffer(data, dtype=_U32, count=n_layers + 1, offset=8).astype(int)
    offset = 8 + 4 * (n_layers + 1)
    layers = []
    for fan_in, fan_out in zip(widths[:-1], widths[1:]):
        w = np.frombuffer(data, dtype=_F64, count=fan_in * fan_out, offset=offset)
        offset += 8 * fan_in * fan_out
        b = np.frombuffer(data, dtype=_F64, count=fan_out, offset=offset)
        offset += 8 * fan_out
        layers.append((w.reshape(fan_in, fan_out).copy(), b.copy()))
    if offset != len(data):
        raise ValueError("checkpoint has trailing or missing bytes")
    return MlpParams(tuple(layers))


def save_mlp(params: MlpParams, path: str | os.PathLike) -> None:
    with open(path, "wb") as fh:
        fh.write(mlp_to_bytes(params))


def load_mlp(path: str | os.PathLike) -> MlpParams:
    with open(path, "rb") as fh:
        return mlp_from_bytes(fh.read())
