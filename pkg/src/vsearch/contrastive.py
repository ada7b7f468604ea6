"""Contrastive training objective over embedding batches.

Each query is scored against every positive in the batch (in-batch
negatives) plus its own hard negative; the loss is the mean negative
log-softmax weight of the query's own positive. An analytic gradient is
exposed so the finite-difference property check has something to bite on.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, NonFiniteInput


@dataclass
class ContrastiveBatch:
    """Aligned (query, positive, hard-negative) rows, all shape (B, D)."""

    queries: np.ndarray
    positives: np.ndarray
    negatives: np.ndarray
    temperature: float = 1.0

    def __post_init__(self) -> None:
        self.queries = np.atleast_2d(np.asarray(self.queries, dtype=np.float64))
        self.positives = np.atleast_2d(np.asarray(self.positives, dtype=np.float64))
        self.negatives = np.atleast_2d(np.asarray(self.negatives, dtype=np.float64))
        if not (self.queries.shape == self.positives.shape == self.negatives.shape):
            raise DimensionMismatch("queries, positives, negatives must share shape (B, D)")
        if self.queries.shape[0] < 1:
            raise ValueError("batch size must be >= 1")
        if self.temperature <= 0:
            raise ValueError("temperature must be > 0")

    @property
    def size(self) -> int:
        return int(self.queries.shape[0])


def _candidate_logits(batch: ContrastiveBatch) -> np.ndarray:
    """Logits (B, B+1): columns 0..B-1 are all positives, column B is the
    row's own hard negative."""
    for arr in (batch.queries, batch.positives, batch.negatives):
        if not np.all(np.isfinite(arr)):
            raise NonFiniteInput("batch contains non-finite values")
    sims = batch.queries @ batch.positives.T
    neg_sims = np.sum(batch.queries * batch.negatives, axis=1, keepdims=True)
    return np.concatenate([sims, neg_sims], axis=1) / batch.temperature


def info_nce(batch: ContrastiveBatch) -> float:
    logits = _candidate_logits(batch)
    b = batch.size
    shift = logits.max(axis=1, keepdims=True)
    log_z = shift[:, 0] + np.log(np.exp(logits - shift).sum(axis=1))
    own = logits[np.arange(b), np.arange(b)]
    return float(np.mean(log_z - own))


def info_nce_with_grad(batch: ContrastiveBatch):
    """Loss plus gradients w.r.t. (queries, positives, negatives)."""
    logits = _candidate_logits(batch)
    b = batch.size
    shift = logits.max(axis=1, keepdims=True)
    exp = np.exp(logits - shift)
    probs = exp / exp.sum(axis=1, keepdims=True)  # (B, B+1)
    own = logits[np.arange(b), np.arange(b)]
    log_z = shift[:, 0] + np.log(exp.sum(axis=1))
    loss = float(np.mean(log_z - own))

    # dloss/dlogits: softmax weight minus the one-hot of the own positive,
    # scaled by the batch mean.
    dlogits = probs.copy()
    dlogits[np.arange(b), np.arange(b)] -= 1.0
    dlogits /= b * batch.temperature

    d_queries = dlogits[:, :b] @ batch.positives + dlogits[:, b:] * batch.negatives
    d_positives = dlogits[:, :b].T @ batch.queries
    d_negatives = dlogits[:, b:] * batch.queries
    return loss, (d_queries, d_positives, d_negatives)
