"""Training losses: softmax cross-entropy and the contrastive step loss
(positive = ground-truth step embedding, negatives = rest of the vocabulary).
"""

from __future__ import annotations

import numpy as np

from .autodiff import Tensor, as_tensor, logsumexp, matmul, mul, transpose, tsum


def softmax_cross_entropy(logits: Tensor, one_hot: np.ndarray) -> Tensor:
    """Per-row cross-entropy: -log softmax(logits)[target].

    `logits` has shape (..., n); `one_hot` the same shape with exactly one 1
    per row. Returns losses of shape (...,). The gradient of the summed loss
    w.r.t. logits is softmax(logits) - one_hot.
    """
    one_hot = np.asarray(one_hot, dtype=np.float64)
    if one_hot.shape != tuple(logits.shape):
        raise ValueError(f"one-hot shape {one_hot.shape} != logits {logits.shape}")
    row_sums = one_hot.sum(axis=-1)
    if not np.allclose(row_sums, 1.0) or not np.all((one_hot == 0) | (one_hot == 1)):
        raise ValueError("target is not one-hot")
    picked = tsum(mul(logits, Tensor(one_hot)), axis=-1)
    return logsumexp(logits, axis=-1) - picked


def contrastive_step_loss(predicted: Tensor, target_ids: np.ndarray,
                          vocab_matrix) -> Tensor:
    """InfoNCE over the action vocabulary with raw dot-product logits.

    predicted: (..., d) output embeddings; target_ids: (...) integer ids into
    the vocabulary; vocab_matrix: (n, d) embeddings serving as the positive
    (at target) and negatives (everything else). Returns per-position losses.
    """
    vocab = as_tensor(vocab_matrix)
    n = vocab.shape[0]
    if n < 2:
        raise ValueError("contrastive loss needs a vocabulary of >= 2 entries")
    logits = matmul(predicted, transpose(vocab, (1, 0)))
    one_hot = np.eye(n)[np.asarray(target_ids, dtype=int)]
    return softmax_cross_entropy(logits, one_hot)
