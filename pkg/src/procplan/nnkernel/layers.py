"""Building blocks for the planner networks: affine maps, layer norm,
multi-head causal self-attention, and the pre-norm transformer block.

All forward functions build autodiff graphs over `Tensor` inputs. Parameter
creation is separated (`init_*`) from application so the same parameters can
be re-applied under finite-difference probing.
"""

from __future__ import annotations

import numpy as np

from .autodiff import (
    ParameterStore,
    Tensor,
    add,
    concat,
    matmul,
    mul,
    pow_scalar,
    relu,
    reshape,
    softmax,
    tmean,
    transpose,
)


def affine(x: Tensor, weight: Tensor, bias: Tensor) -> Tensor:
    """y = x @ W + b for x of shape (..., in), W (in, out), b (out,)."""
    if x.shape[-1] != weight.shape[0]:
        raise ValueError(
            f"affine shape mismatch: input {x.shape} vs weight {weight.shape}"
        )
    if bias.shape != (weight.shape[1],):
        raise ValueError(f"affine bias shape {bias.shape} != ({weight.shape[1]},)")
    return add(matmul(x, weight), bias)


def layer_norm(x: Tensor, gain: Tensor, bias: Tensor, eps: float = 1e-5) -> Tensor:
    """Normalize over the last axis, then scale and shift."""
    mu = tmean(x, axis=-1, keepdims=True)
    centered = x - mu
    var = tmean(mul(centered, centered), axis=-1, keepdims=True)
    inv = pow_scalar(add(var, eps), -0.5)
    return add(mul(mul(centered, inv), gain), bias)


def init_mlp(store: ParameterStore, prefix: str, dims: list[int]) -> None:
    for i in range(len(dims) - 1):
        store.create(f"{prefix}.w{i}", (dims[i], dims[i + 1]))
        store.create(f"{prefix}.b{i}", (dims[i + 1],), init="zeros")


def mlp_forward(x: Tensor, store: ParameterStore, prefix: str, num_layers: int) -> Tensor:
    """Affine stack with relu between layers (none after the last)."""
    h = x
    for i in range(num_layers):
        h = affine(h, store[f"{prefix}.w{i}"], store[f"{prefix}.b{i}"])
        if i < num_layers - 1:
            h = relu(h)
    return h


def causal_mask(length: int) -> np.ndarray:
    """Additive attention mask: 0 on/below the diagonal, large negative above."""
    mask = np.zeros((length, length))
    mask[np.triu_indices(length, k=1)] = -1e30
    return mask


def init_transformer_block(store: ParameterStore, prefix: str, d_model: int) -> None:
    for name in ("wq", "wk", "wv", "wo"):
        store.create(f"{prefix}.{name}", (d_model, d_model))
    store.create(f"{prefix}.bo", (d_model,), init="zeros")
    store.create(f"{prefix}.ln1.g", (d_model,), init="ones")
    store.create(f"{prefix}.ln1.b", (d_model,), init="zeros")
    store.create(f"{prefix}.ln2.g", (d_model,), init="ones")
    store.create(f"{prefix}.ln2.b", (d_model,), init="zeros")
    init_mlp(store, f"{prefix}.mlp", [d_model, 4 * d_model, d_model])


def attention(x: Tensor, store: ParameterStore, prefix: str, heads: int,
              mask: np.ndarray) -> Tensor:
    """Masked multi-head self-attention over x of shape (B, S, d)."""
    batch, length, d_model = x.shape
    if d_model % heads != 0:
        raise ValueError(f"heads ({heads}) must divide d_model ({d_model})")
    d_head = d_model // heads

    def split(t: Tensor) -> Tensor:
        t = reshape(t, (batch, length, heads, d_head))
        return transpose(t, (0, 2, 1, 3))  # (B, H, S, dh)

    q = split(matmul(x, store[f"{prefix}.wq"]))
    k = split(matmul(x, store[f"{prefix}.wk"]))
    v = split(matmul(x, store[f"{prefix}.wv"]))

    scores = mul(matmul(q, transpose(k, (0, 1, 3, 2))), 1.0 / np.sqrt(d_head))
    scores = add(scores, Tensor(mask))
    weights = softmax(scores, axis=-1)
    mixed = matmul(weights, v)  # (B, H, S, dh)
    merged = reshape(transpose(mixed, (0, 2, 1, 3)), (batch, length, d_model))
    return affine(merged, store[f"{prefix}.wo"], store[f"{prefix}.bo"])


def transformer_block(x: Tensor, store: ParameterStore, prefix: str, heads: int,
                      mask: np.ndarray) -> Tensor:
    """Pre-norm residual block: attention sublayer then relu MLP sublayer."""
    h = layer_norm(x, store[f"{prefix}.ln1.g"], store[f"{prefix}.ln1.b"])
    x = add(x, attention(h, store, prefix, heads, mask))
    h = layer_norm(x, store[f"{prefix}.ln2.g"], store[f"{prefix}.ln2.b"])
    x = add(x, mlp_forward(h, store, f"{prefix}.mlp", 2))
    return x


def init_decoder(store: ParameterStore, prefix: str, layers: int, d_model: int) -> None:
    for i in range(layers):
        init_transformer_block(store, f"{prefix}.block{i}", d_model)
    store.create(f"{prefix}.lnf.g", (d_model,), init="ones")
    store.create(f"{prefix}.lnf.b", (d_model,), init="zeros")
    store.create(f"{prefix}.head.w", (d_model, d_model))
    store.create(f"{prefix}.head.b", (d_model,), init="zeros")


def decoder_forward(x: Tensor, store: ParameterStore, prefix: str, layers: int,
                    heads: int) -> Tensor:
    """Causal decoder stack; returns one output embedding per position."""
    mask = causal_mask(x.shape[1])
    for i in range(layers):
        x = transformer_block(x, store, f"{prefix}.block{i}", heads, mask)
    x = layer_norm(x, store[f"{prefix}.lnf.g"], store[f"{prefix}.lnf.b"])
    return affine(x, store[f"{prefix}.head.w"], store[f"{prefix}.head.b"])
