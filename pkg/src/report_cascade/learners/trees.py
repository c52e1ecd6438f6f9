"""Decision-tree machinery shared by the forest and boosting learners.

Split search runs directly on the node's nonzero (row, col, val) entries,
sorted by (col, val); samples whose value for a feature is zero form an
implicit block that every positive threshold sends left.  This keeps the
cost of a node proportional to its nonzero count rather than to
n_samples * n_features.  Feature values must be nonnegative (BOW counts
and TF-IDF weights always are).

Both impurity criteria reduce to maximizing sum_d(stat_d^2)/n over the two
children: with per-class weighted counts as stats this is the Gini
criterion, with the regression target as a single stat it is variance
reduction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_MIN_GAIN = 1e-12


@dataclass(eq=False)
class NodeEntries:
    """Nonzero entries of the samples sitting in one tree node, kept in
    (col, val) sort order.  Boolean-mask selection preserves that order, so
    sorting happens once per dataset (``sorted_entries``) and children
    inherit it for free."""

    rows: np.ndarray
    cols: np.ndarray
    vals: np.ndarray

    def restrict_features(self, features: np.ndarray) -> "NodeEntries":
        mask = np.isin(self.cols, features)
        return NodeEntries(self.rows[mask], self.cols[mask], self.vals[mask])

    def restrict_rows(self, keep: np.ndarray) -> "NodeEntries":
        """Entries whose row is flagged in the bool array ``keep``."""
        mask = keep[self.rows]
        return NodeEntries(self.rows[mask], self.cols[mask], self.vals[mask])

    def partition(self, is_right: np.ndarray) -> tuple["NodeEntries", "NodeEntries"]:
        """Split entries by row membership; ``is_right`` is a bool buffer
        over all sample rows, true exactly on the right child's rows."""
        mask = is_right[self.rows]
        left = NodeEntries(self.rows[~mask], self.cols[~mask], self.vals[~mask])
        right = NodeEntries(self.rows[mask], self.cols[mask], self.vals[mask])
        return left, right


def sorted_entries(rows: np.ndarray, cols: np.ndarray, vals: np.ndarray) -> NodeEntries:
    order = np.lexsort((vals, cols))
    return NodeEntries(rows[order], cols[order], vals[order])


@dataclass
class Split:
    feature: int
    threshold: float
    gain: float
    right_rows: np.ndarray  # rows strictly above the threshold on feature


def best_split(
    entries: NodeEntries,
    entry_counts: np.ndarray,
    entry_stats: np.ndarray,
    node_count: float,
    node_stat: np.ndarray,
    min_leaf: float,
) -> Split | None:
    """Exhaustive best threshold over the features present in ``entries``.

    ``entries`` must already be in (col, val) order.  ``entry_counts`` /
    ``entry_stats`` carry the per-entry sample weight and additive
    statistics; ``node_count``/``node_stat`` are their node totals
    (including samples with no entry on any given feature).  Ties break
    toward the lowest (feature, threshold) pair.
    """
    m = entries.rows.size
    if m == 0 or node_count < 2 * min_leaf:
        return None
    c = entries.cols
    v = entries.vals
    cnt = entry_counts
    st = entry_stats

    cum_cnt = np.cumsum(cnt)
    cum_st = np.cumsum(st, axis=0)
    starts = np.concatenate([[0], np.flatnonzero(np.diff(c) != 0) + 1])
    ends = np.concatenate([starts[1:], [m]]) - 1
    seg_id = np.searchsorted(starts, np.arange(m), side="right") - 1

    base_cnt = np.where(starts > 0, cum_cnt[np.maximum(starts - 1, 0)], 0.0)
    base_st = np.where((starts > 0)[:, None], cum_st[np.maximum(starts - 1, 0)], 0.0)
    prefix_cnt = cum_cnt - base_cnt[seg_id]
    prefix_st = cum_st - base_st[seg_id]

    seg_cnt = prefix_cnt[ends]
    seg_st = prefix_st[ends]
    zero_cnt = node_count - seg_cnt          # per segment: weight at value 0
    zero_st = node_stat[None, :] - seg_st

    # Candidates between consecutive distinct values of one feature.
    mid = np.flatnonzero((c[1:] == c[:-1]) & (v[1:] > v[:-1]))
    nl_mid = zero_cnt[seg_id[mid]] + prefix_cnt[mid]
    sl_mid = zero_st[seg_id[mid]] + prefix_st[mid]
    thr_mid = 0.5 * (v[mid] + v[mid + 1])
    col_mid = c[mid]
    rank_mid = 2 * mid + 1

    # Candidates between the implicit zero block and the first nonzero.
    thr_zb = 0.5 * v[starts]
    col_zb = c[starts]
    rank_zb = 2 * starts

    nl = np.concatenate([zero_cnt, nl_mid])
    sl = np.concatenate([zero_st, sl_mid])
    thr = np.concatenate([thr_zb, thr_mid])
    col = np.concatenate([col_zb, col_mid])
    rank = np.concatenate([rank_zb, rank_mid])

    nr = node_count - nl
    valid = (nl >= min_leaf) & (nr >= min_leaf)
    if not valid.any():
        return None
    sr = node_stat[None, :] - sl
    score = np.where(
        valid,
        (sl * sl).sum(axis=1) / np.where(nl > 0, nl, 1.0)
        + (sr * sr).sum(axis=1) / np.where(nr > 0, nr, 1.0),
        -np.inf,
    )
    # rank encodes position in (feature, threshold) order; stable sort plus
    # first-argmax makes the tie-break deterministic.
    order2 = np.argsort(rank, kind="stable")
    best = int(np.argmax(score[order2]))
    parent = (node_stat * node_stat).sum() / node_count
    gain = score[order2][best] - parent
    if not np.isfinite(gain) or gain <= _MIN_GAIN:
        return None
    idx = order2[best]
    feature = int(col[idx])
    threshold = float(thr[idx])
    in_col = c == feature
    right_rows = entries.rows[in_col & (v > threshold)]
    return Split(feature=feature, threshold=threshold, gain=float(gain), right_rows=right_rows)


@dataclass(eq=False)
class Tree:
    """Array-encoded binary tree; feature == -1 marks a leaf."""

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray  # (n_nodes, D): class histogram or scalar leaf value

    @property
    def n_nodes(self) -> int:
        return int(self.feature.size)

    def apply_dense(self, x_dense: np.ndarray) -> np.ndarray:
        """Leaf index for every row of a dense (n, F) matrix."""
        node = np.zeros(x_dense.shape[0], dtype=np.int64)
        active = self.feature[node] >= 0
        while active.any():
            idx = np.flatnonzero(active)
            nd = node[idx]
            go_left = x_dense[idx, self.feature[nd]] <= self.threshold[nd]
            node[idx] = np.where(go_left, self.left[nd], self.right[nd])
            active = self.feature[node] >= 0
        return node

    def leaf_values_dense(self, x_dense: np.ndarray) -> np.ndarray:
        return self.value[self.apply_dense(x_dense)]


class _TreeBuilder:
    def __init__(self):
        self.feature: list[int] = []
        self.threshold: list[float] = []
        self.left: list[int] = []
        self.right: list[int] = []
        self.value: list[np.ndarray] = []

    def add(self, value: np.ndarray) -> int:
        self.feature.append(-1)
        self.threshold.append(0.0)
        self.left.append(-1)
        self.right.append(-1)
        self.value.append(np.asarray(value, dtype=np.float64))
        return len(self.feature) - 1

    def finish(self) -> Tree:
        return Tree(
            feature=np.array(self.feature, dtype=np.int64),
            threshold=np.array(self.threshold, dtype=np.float64),
            left=np.array(self.left, dtype=np.int64),
            right=np.array(self.right, dtype=np.int64),
            value=np.vstack(self.value) if self.value else np.zeros((0, 1)),
        )


def _node_is_uniform(stats_by_row: np.ndarray, rows: np.ndarray) -> bool:
    """True when the node has zero within-node spread (pure class /
    identical targets), so no split can gain."""
    s = stats_by_row[rows]
    if s.shape[1] > 1:
        return int(np.count_nonzero(s.sum(axis=0))) <= 1
    return bool(np.all(s == s[0]))


def grow_tree(
    root_rows: np.ndarray,
    root_entries: NodeEntries,
    counts_by_row: np.ndarray,
    stats_by_row: np.ndarray,
    n_total_rows: int,
    min_leaf: float,
    max_depth: int | None,
    feature_sampler=None,
    leaf_rows_out: list | None = None,
) -> Tree:
    """Grow a tree depth-first (left child first, so node ids are stable).

    ``counts_by_row``/``stats_by_row`` are indexed by global row id.
    ``feature_sampler()`` returns candidate feature ids for a node (None
    means all features).  Node values hold the stat totals; callers rewrite
    leaf values afterwards when they need something else.  When
    ``leaf_rows_out`` is given, it receives (node_id, rows) per leaf.
    """
    builder = _TreeBuilder()
    is_right = np.zeros(n_total_rows, dtype=bool)
    # (rows, entries, depth, parent_id, as_left) work items; right child is
    # pushed first so the left subtree is numbered before the right one.
    stack = [(root_rows, root_entries, 0, -1, False)]
    while stack:
        rows, entries, depth, parent, as_left = stack.pop()
        node_count = float(counts_by_row[rows].sum())
        node_stat = stats_by_row[rows].sum(axis=0)
        node_id = builder.add(node_stat)
        if parent >= 0:
            if as_left:
                builder.left[parent] = node_id
            else:
                builder.right[parent] = node_id

        split = None
        depth_ok = max_depth is None or depth < max_depth
        if depth_ok and node_count >= 2 * min_leaf and not _node_is_uniform(stats_by_row, rows):
            cand = entries if feature_sampler is None else entries.restrict_features(feature_sampler())
            split = best_split(
                cand,
                counts_by_row[cand.rows],
                stats_by_row[cand.rows],
                node_count,
                node_stat,
                min_leaf,
            )
        if split is None:
            if leaf_rows_out is not None:
                leaf_rows_out.append((node_id, rows))
            continue
        is_right[split.right_rows] = True
        row_mask = is_right[rows]
        left_entries, right_entries = entries.partition(is_right)
        is_right[split.right_rows] = False

        builder.feature[node_id] = split.feature
        builder.threshold[node_id] = split.threshold
        stack.append((rows[row_mask], right_entries, depth + 1, node_id, False))
        stack.append((rows[~row_mask], left_entries, depth + 1, node_id, True))
    return builder.finish()
