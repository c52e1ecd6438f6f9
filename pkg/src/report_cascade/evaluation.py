"""K-fold plans, precision/recall/F1 reports, and ranking metrics.

Cross-validation aggregates by the plain mean of per-fold metric values
(per class and for the weighted row); supports and confusion matrices are
summed.  Zero denominators always yield 0.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

RANKING_K_GRID = (25, 50, 100, 300, 500, 1000, 2500)


class EvalError(ValueError):
    pass


@dataclass
class FoldPlan:
    k: int
    assignments: np.ndarray
    seed: int
    stratified: bool

    def fold_indices(self, fold: int) -> tuple[np.ndarray, np.ndarray]:
        test = np.flatnonzero(self.assignments == fold)
        train = np.flatnonzero(self.assignments != fold)
        return train, test


def kfold(n: int, k: int, seed: int = 0, labels=None, stratified: bool = False) -> FoldPlan:
    """Seeded shuffle, then round-robin fold ids; the stratified variant
    round-robins within each class, carrying the fold cursor across classes
    so fold sizes still differ by at most one."""
    if k < 2:
        raise EvalError("need at least 2 folds")
    if k > n:
        raise EvalError(f"cannot split {n} examples into {k} folds")
    rng = np.random.Generator(np.random.PCG64(seed))
    assignments = np.empty(n, dtype=np.int64)
    if not stratified:
        order = rng.permutation(n)
        assignments[order] = np.arange(n) % k
    else:
        if labels is None:
            raise EvalError("stratified folding needs labels")
        labels = np.asarray(labels)
        cursor = 0
        for cls in np.unique(labels):
            idx = np.flatnonzero(labels == cls)
            idx = idx[rng.permutation(idx.size)]
            assignments[idx] = (cursor + np.arange(idx.size)) % k
            cursor += idx.size
    return FoldPlan(k=k, assignments=assignments, seed=seed, stratified=stratified)


@dataclass
class MetricsReport:
    class_names: list[str]
    precision: np.ndarray
    recall: np.ndarray
    f1: np.ndarray
    support: np.ndarray
    confusion: np.ndarray
    weighted: dict = field(default_factory=dict)

    def row(self, name: str) -> tuple[float, float, float, int]:
        i = self.class_names.index(name)
        return (
            float(self.precision[i]),
            float(self.recall[i]),
            float(self.f1[i]),
            int(self.support[i]),
        )


def _safe_div(num, den):
    num = np.asarray(num, dtype=np.float64)
    den = np.asarray(den, dtype=np.float64)
    return np.where(den > 0, num / np.where(den > 0, den, 1.0), 0.0)


def prf(predictions, golds, class_names: list[str]) -> MetricsReport:
    predictions = np.asarray(predictions, dtype=np.int64)
    golds = np.asarray(golds, dtype=np.int64)
    if predictions.shape != golds.shape:
        raise EvalError("predictions and golds must have equal length")
    k = len(class_names)
    confusion = np.zeros((k, k), dtype=np.int64)
    np.add.at(confusion, (golds, predictions), 1)
    support = confusion.sum(axis=1)
    tp = np.diag(confusion).astype(np.float64)
    precision = _safe_div(tp, confusion.sum(axis=0))
    recall = _safe_div(tp, support)
    f1 = _safe_div(2 * precision * recall, precision + recall)
    total = support.sum()
    weighted = {
        "precision": float(_safe_div(np.dot(support, precision), total)),
        "recall": float(_safe_div(np.dot(support, recall), total)),
        "f1": float(_safe_div(np.dot(support, f1), total)),
        "support": int(total),
    }
    return MetricsReport(
        class_names=list(class_names),
        precision=precision,
        recall=recall,
        f1=f1,
        support=support,
        confusion=confusion,
        weighted=weighted,
    )


def average_reports(reports: list[MetricsReport]) -> MetricsReport:
    """Fold aggregation: plain mean of per-class and weighted values;
    supports and confusion matrices are summed, so the weighted row is the
    mean of fold-level weighted rows, not a recomputation."""
    if not reports:
        raise EvalError("no reports to average")
    names = reports[0].class_names
    for r in reports:
        if r.class_names != names:
            raise EvalError("reports disagree on class names")
    return MetricsReport(
        class_names=list(names),
        precision=np.mean([r.precision for r in reports], axis=0),
        recall=np.mean([r.recall for r in reports], axis=0),
        f1=np.mean([r.f1 for r in reports], axis=0),
        support=np.sum([r.support for r in reports], axis=0),
        confusion=np.sum([r.confusion for r in reports], axis=0),
        weighted={
            "precision": float(np.mean([r.weighted["precision"] for r in reports])),
            "recall": float(np.mean([r.weighted["recall"] for r in reports])),
            "f1": float(np.mean([r.weighted["f1"] for r in reports])),
            "support": int(np.sum([r.weighted["support"] for r in reports])),
        },
    )


def precision_at_k(ranked_relevance, k: int) -> float:
    rel = np.asarray(ranked_relevance)
    if not (1 <= k <= rel.size):
        raise EvalError(f"k={k} out of range for a list of {rel.size}")
    return float(rel[:k].sum() / k)


def avg_precision_at_k(ranked_relevance, k: int) -> float:
    """Mean of P@i over the relevant positions i <= k, normalized by the
    number of relevant items retrieved in the top k (0 when none)."""
    rel = np.asarray(ranked_relevance, dtype=np.float64)
    if not (1 <= k <= rel.size):
        raise EvalError(f"k={k} out of range for a list of {rel.size}")
    head = rel[:k]
    p_at = np.cumsum(head) / np.arange(1, k + 1)
    hits = head.sum()
    return float(np.dot(p_at, head) / max(1.0, hits))


def ranking_table(ranked_relevance, k_grid=RANKING_K_GRID) -> dict:
    """P@k and AvgP@k on the fixed k grid; entries beyond the list length
    are None so the table shape never varies."""
    n = len(ranked_relevance)
    table = {"k": list(k_grid), "p_at_k": [], "avgp_at_k": []}
    for k in k_grid:
        if k <= n:
            table["p_at_k"].append(precision_at_k(ranked_relevance, k))
            table["avgp_at_k"].append(avg_precision_at_k(ranked_relevance, k))
        else:
            table["p_at_k"].append(None)
            table["avgp_at_k"].append(None)
    return table


def cross_validate(vectors, labels, class_names, trainer, plan: FoldPlan):
    """Train/evaluate per fold with a ``trainer(train_vectors, train_labels)
    -> predict_batch`` handle; returns (averaged report, fold reports)."""
    labels = np.asarray(labels, dtype=np.int64)
    if plan.assignments.size != len(vectors):
        raise EvalError("fold plan does not match the data size")
    reports = []
    for fold in range(plan.k):
        train_idx, test_idx = plan.fold_indices(fold)
        try:
            predict_batch = trainer(
                [vectors[i] for i in train_idx], labels[train_idx]
            )
            preds = predict_batch([vectors[i] for i in test_idx])
        except Exception as exc:
            raise EvalError(f"fold {fold}: {exc}") from exc
        reports.append(prf(preds, labels[test_idx], class_names))
    return average_reports(reports), reports


def span_exact_match_f1(predicted: list[list[tuple[int, int]]], gold: list[list[tuple[int, int]]]) -> float:
    """Micro F1 over whole spans: a prediction counts only on exact
    (start, end) match within its document."""
    tp = fp = fn = 0
    for pred, gld in zip(predicted, gold):
        p, g = set(pred), set(gld)
        tp += len(p & g)
        fp += len(p - g)
        fn += len(g - p)
    if tp == 0:
        return 0.0
    precision = tp / (tp + fp)
    recall = tp / (tp + fn)
    return 2 * precision * recall / (precision + recall)
