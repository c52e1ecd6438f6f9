"""Random forest: bagged Gini trees over sparse feature vectors.

Each tree gets its own RNG stream (spawned from the config seed), a
bootstrap sample of size n drawn with replacement, and a fresh random
subset of ceil(sqrt(F)) features at every node.  Bootstrap multiplicity is
handled as an integer sample weight so the sparse entry arrays are never
duplicated.  Leaves store weighted class histograms; prediction averages
the per-tree leaf proportions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..sparse import SparseVector
from .base import Dataset, LearnerError, densify
from .trees import Tree, grow_tree, sorted_entries


@dataclass(frozen=True)
class ForestConfig:
    n_trees: int = 100
    max_features: str | int = "sqrt"   # "sqrt", "all", or an explicit count
    min_leaf: int = 1
    bootstrap: bool = True             # test hook; production forests bag
    seed: int = 0


@dataclass(eq=False)
class ForestModel:
    trees: list[Tree]
    class_names: list[str]
    dim: int

    @property
    def n_trees(self) -> int:
        return len(self.trees)

    def predict_proba_batch(self, vectors: list[SparseVector]) -> np.ndarray:
        x = densify(vectors, self.dim)
        probs = np.zeros((len(vectors), len(self.class_names)))
        for tree in self.trees:
            hist = tree.leaf_values_dense(x)
            probs += hist / hist.sum(axis=1, keepdims=True)
        return probs / len(self.trees)


def _n_candidate_features(cfg: ForestConfig, n_features: int) -> int:
    if cfg.max_features == "sqrt":
        return max(1, math.ceil(math.sqrt(n_features)))
    if cfg.max_features == "all":
        return n_features
    return max(1, min(int(cfg.max_features), n_features))


def train_random_forest(data: Dataset, cfg: ForestConfig = ForestConfig()) -> ForestModel:
    """Fit the forest; a single-class dataset yields a degenerate constant
    model rather than an error."""
    if data.n == 0:
        raise LearnerError("empty dataset")
    k = data.n_classes
    n = data.n
    mat = data.matrix()
    classes_present = np.unique(data.labels)
    if classes_present.size == 1:
        hist = np.zeros((1, k))
        hist[0, classes_present[0]] = n
        constant = Tree(
            feature=np.array([-1]), threshold=np.array([0.0]),
            left=np.array([-1]), right=np.array([-1]), value=hist,
        )
        return ForestModel(trees=[constant], class_names=list(data.class_names), dim=data.dim)
    if np.any(mat.vals < 0):
        raise LearnerError("tree learners require nonnegative feature values")

    onehot = np.zeros((n, k))
    onehot[np.arange(n), data.labels] = 1.0
    n_cand = _n_candidate_features(cfg, data.dim)
    streams = np.random.SeedSequence(cfg.seed).spawn(cfg.n_trees)
    all_entries = sorted_entries(mat.rows, mat.cols, mat.vals)

    trees = []
    for ss in streams:
        rng = np.random.Generator(np.random.PCG64(ss))
        if cfg.bootstrap:
            picks = rng.integers(0, n, size=n)
            weights = np.bincount(picks, minlength=n).astype(np.float64)
        else:
            weights = np.ones(n)
        rows = np.flatnonzero(weights > 0)
        entries = all_entries.restrict_rows(weights > 0)
        stats = onehot * weights[:, None]

        def sample_features():
            if n_cand >= data.dim:
                return np.arange(data.dim)
            return np.sort(rng.choice(data.dim, size=n_cand, replace=False))

        tree = grow_tree(
            root_rows=rows,
            root_entries=entries,
            counts_by_row=weights,
            stats_by_row=stats,
            n_total_rows=n,
            min_leaf=float(cfg.min_leaf),
            max_depth=None,
            feature_sampler=sample_features,
        )
        trees.append(tree)
    return ForestModel(trees=trees, class_names=list(data.class_names), dim=data.dim)
