"""Gradient boosting with multinomial deviance.

Per-class scores start at the log class priors.  Every round fits one
depth-limited regression tree per class to the residual (one-hot minus
softmax); leaf values take the usual Newton step
    (K-1)/K * sum(r) / sum(|r| (1 - |r|))
scaled by the learning rate.  Prediction is the softmax of the summed
scores.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..sparse import SparseVector
from .base import Dataset, LearnerError, densify
from .trees import Tree, grow_tree, sorted_entries

_PRIOR_FLOOR = 1e-12


@dataclass(frozen=True)
class GBConfig:
    rounds: int = 100
    depth: int = 3
    learning_rate: float = 0.1
    min_leaf: int = 1
    seed: int = 0


@dataclass(eq=False)
class GBModel:
    init_score: np.ndarray            # (K,) log priors
    stages: list[list[Tree]]          # stages[round][class]
    learning_rate: float
    class_names: list[str]
    dim: int

    @property
    def n_rounds(self) -> int:
        return len(self.stages)

    def decision_scores(self, x_dense: np.ndarray, n_rounds: int | None = None) -> np.ndarray:
        """Raw per-class scores after the first ``n_rounds`` stages."""
        upto = len(self.stages) if n_rounds is None else n_rounds
        scores = np.tile(self.init_score, (x_dense.shape[0], 1))
        for stage in self.stages[:upto]:
            for klass, tree in enumerate(stage):
                scores[:, klass] += self.learning_rate * tree.leaf_values_dense(x_dense)[:, 0]
        return scores

    def predict_proba_batch(self, vectors: list[SparseVector]) -> np.ndarray:
        return softmax(self.decision_scores(densify(vectors, self.dim)))


def softmax(scores: np.ndarray) -> np.ndarray:
    shifted = scores - scores.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


def multinomial_deviance(onehot: np.ndarray, probs: np.ndarray) -> float:
    """Mean negative log-likelihood of the true classes."""
    p = np.clip((onehot * probs).sum(axis=1), 1e-300, None)
    return float(-np.log(p).mean())


def training_loss_curve(model: GBModel, data: Dataset, every: int = 1) -> list[tuple[int, float]]:
    """Replay the stages and report (rounds_used, training loss) points."""
    x = densify(data.vectors, model.dim)
    onehot = np.zeros((data.n, len(model.class_names)))
    onehot[np.arange(data.n), data.labels] = 1.0
    scores = np.tile(model.init_score, (data.n, 1))
    curve = [(0, multinomial_deviance(onehot, softmax(scores)))]
    for r, stage in enumerate(model.stages, start=1):
        for klass, tree in enumerate(stage):
            scores[:, klass] += model.learning_rate * tree.leaf_values_dense(x)[:, 0]
        if r % every == 0 or r == len(model.stages):
            curve.append((r, multinomial_deviance(onehot, softmax(scores))))
    return curve


def train_gradient_boosting(data: Dataset, cfg: GBConfig = GBConfig()) -> GBModel:
    if data.n == 0:
        raise LearnerError("empty dataset")
    if np.unique(data.labels).size < 2:
        raise LearnerError("gradient boosting needs at least two observed classes")
    k = data.n_classes
    n = data.n
    mat = data.matrix()
    if np.any(mat.vals < 0):
        raise LearnerError("tree learners require nonnegative feature values")

    priors = np.bincount(data.labels, minlength=k) / n
    init_score = np.log(np.maximum(priors, _PRIOR_FLOOR))
    onehot = np.zeros((n, k))
    onehot[np.arange(n), data.labels] = 1.0

    all_rows = np.arange(n)
    root_entries = sorted_entries(mat.rows, mat.cols, mat.vals)
    counts = np.ones(n)

    scores = np.tile(init_score, (n, 1))
    stages: list = []
    for _ in range(cfg.rounds):
        probs = softmax(scores)
        residual = onehot - probs
        stage = []
        for klass in range(k):
            r = residual[:, klass]
            leaf_rows: list = []
            tree = grow_tree(
                root_rows=all_rows,
                root_entries=root_entries,
                counts_by_row=counts,
                stats_by_row=r[:, None],
                n_total_rows=n,
                min_leaf=float(cfg.min_leaf),
                max_depth=cfg.depth,
                leaf_rows_out=leaf_rows,
            )
            # Newton leaf values replace the raw residual sums.
            for node_id, rows in leaf_rows:
                num = r[rows].sum()
                den = (np.abs(r[rows]) * (1.0 - np.abs(r[rows]))).sum()
                value = 0.0 if den < _PRIOR_FLOOR else (k - 1) / k * num / den
                tree.value[node_id, 0] = value
                scores[rows, klass] += cfg.learning_rate * value
            stage.append(tree)
        stages.append(stage)
    return GBModel(
        init_score=init_score,
        stages=stages,
        learning_rate=cfg.learning_rate,
        class_names=list(data.class_names),
        dim=data.dim,
    )
