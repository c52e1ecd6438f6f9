"""Shared dataset container and the prediction contract for all learners."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..sparse import CsrMatrix, SparseVector, stack


class LearnerError(ValueError):
    pass


@dataclass(eq=False)
class Dataset:
    vectors: list[SparseVector]
    labels: np.ndarray
    class_names: list[str]

    def __post_init__(self):
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if len(self.vectors) != self.labels.size:
            raise LearnerError("vectors and labels must have equal length")
        if len(self.class_names) < 2:
            raise LearnerError("need at least two classes")
        if self.labels.size and (self.labels.min() < 0 or self.labels.max() >= len(self.class_names)):
            raise LearnerError("label outside class range")

    @property
    def n(self) -> int:
        return len(self.vectors)

    @property
    def n_classes(self) -> int:
        return len(self.class_names)

    @property
    def dim(self) -> int:
        return self.vectors[0].dim if self.vectors else 0

    def matrix(self) -> CsrMatrix:
        return stack(self.vectors)


def check_distribution(probs: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    probs = np.asarray(probs, dtype=np.float64)
    if np.any(probs < 0) or abs(probs.sum() - 1.0) > tol:
        raise LearnerError(f"invalid probability distribution {probs}")
    return probs


def argmax_class(probs: np.ndarray) -> int:
    """Most probable class; equal maxima resolve to the lowest class id."""
    return int(np.argmax(probs))


def densify(vectors: list[SparseVector], dim: int) -> np.ndarray:
    out = np.zeros((len(vectors), dim))
    for i, v in enumerate(vectors):
        if v.dim != dim:
            raise LearnerError(f"vector dimension {v.dim} != model dimension {dim}")
        out[i, v.cols] = v.vals
    return out


def predict_proba(model, vec: SparseVector) -> np.ndarray:
    """Per-class probabilities for one vector (any trained learner)."""
    return model.predict_proba_batch([vec])[0]


def predict(model, vec: SparseVector) -> int:
    return argmax_class(predict_proba(model, vec))


def predict_batch(model, vectors: list[SparseVector]) -> np.ndarray:
    probs = model.predict_proba_batch(vectors)
    return probs.argmax(axis=1)
