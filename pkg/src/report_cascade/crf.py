"""Linear-chain CRF for perpetrator-span tagging in the BIE-O scheme.

Tags are O=0, B=1, I=2, E=3.  A span of one token is encoded as a lone B,
two tokens as B,E and longer spans as B,I...,E; everything else is O.

The model scores a tag sequence y for emissions per position plus a 4x4
transition table and start/end vectors:

    score(x, y) = start[y_0] + sum_t emit_t[y_t]
                  + sum_{t>0} trans[y_{t-1}, y_t] + end[y_{n-1}]

Training maximizes sum log p(y|x) - |w|^2 / (2 sigma^2) by full-batch
gradient ascent with a backtracking (Armijo) line search; the gradient is
empirical minus expected feature counts, with expectations from the
forward-backward recursions run in log space.  All sequences of a batch
are padded to a common length so each recursion step is one vectorized
operation over the whole batch.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .preprocess import TokenizedDocument

O, B, I, E = 0, 1, 2, 3
TAG_NAMES = ("O", "B", "I", "E")
N_TAGS = 4

_NEG = -np.inf


class CrfError(ValueError):
    pass


# --- BIE-O encoding ----------------------------------------------------------


def encode_span(span: tuple[int, int] | None, n: int) -> list[int]:
    if span is None:
        return [O] * n
    s, e = span
    if not (0 <= s < e <= n):
        raise CrfError(f"span [{s}, {e}) invalid for length {n}")
    tags = [O] * n
    if e - s == 1:
        tags[s] = B
    else:
        tags[s] = B
        tags[e - 1] = E
        for i in range(s + 1, e - 1):
            tags[i] = I
    return tags


def extract_spans(tags: list[int]) -> list[tuple[int, int]]:
    """Token ranges of the tagged runs.

    A run is a B followed by any number of I and an optional closing E; a
    lone B is a single-token span.  I/E tags with no opening B are dropped.
    """
    spans = []
    i = 0
    n = len(tags)
    while i < n:
        if tags[i] != B:
            i += 1
            continue
        j = i + 1
        while j < n and tags[j] == I:
            j += 1
        if j < n and tags[j] == E:
            j += 1
        spans.append((i, j))
        i = j
    return spans


# --- feature templates -------------------------------------------------------

_BOS = "<BOS>"
_EOS = "<EOS>"


def feature_strings(tdoc: TokenizedDocument) -> list[list[str]]:
    """Template instantiations per position: bias, word and POS in a +/-1
    window, and prefixes/suffixes of the current word up to length 3 (whole
    word when shorter)."""
    words = tdoc.tokens
    pos = tdoc.pos
    n = len(words)
    out = []
    for t in range(n):
        w = words[t]
        feats = [
            "bias",
            f"w0={w}",
            f"w-1={words[t - 1] if t > 0 else _BOS}",
            f"w+1={words[t + 1] if t + 1 < n else _EOS}",
            f"p0={pos[t]}",
            f"p-1={pos[t - 1] if t > 0 else _BOS}",
            f"p+1={pos[t + 1] if t + 1 < n else _EOS}",
        ]
        for k in (1, 2, 3):
            feats.append(f"pre{k}={w[:k]}")
            feats.append(f"suf{k}={w[-k:]}")
        out.append(feats)
    return out


@dataclass
class FeatureIndex:
    index: dict[str, int] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.index)

    def fit(self, docs_features: list[list[list[str]]]) -> "FeatureIndex":
        for doc in docs_features:
            for feats in doc:
                for f in feats:
                    if f not in self.index:
                        self.index[f] = len(self.index)
        return self

    def encode(self, doc_features: list[list[str]]) -> list[np.ndarray]:
        """Known-feature id lists per position; unknown strings are skipped."""
        return [
            np.array(sorted(self.index[f] for f in feats if f in self.index), dtype=np.int64)
            for feats in doc_features
        ]


def extract_features(tdoc: TokenizedDocument, index: FeatureIndex) -> list[np.ndarray]:
    return index.encode(feature_strings(tdoc))


# --- model -------------------------------------------------------------------


@dataclass(eq=False)
class CRFModel:
    feature_index: FeatureIndex
    emission: np.ndarray     # (F, 4)
    transition: np.ndarray   # (4, 4)
    start: np.ndarray        # (4,)
    end: np.ndarray          # (4,)
    l2_sigma: float = 10.0
    objective_history: list[float] = field(default_factory=list)

    def emissions_for(self, feats: list[np.ndarray]) -> np.ndarray:
        out = np.zeros((len(feats), N_TAGS))
        for t, ids in enumerate(feats):
            if ids.size:
                out[t] = self.emission[ids].sum(axis=0)
        return out


def _logsumexp(a: np.ndarray, axis: int) -> np.ndarray:
    m = a.max(axis=axis, keepdims=True)
    m = np.where(np.isfinite(m), m, 0.0)
    return np.squeeze(m, axis=axis) + np.log(np.exp(a - m).sum(axis=axis))


def sequence_score(model: CRFModel, feats: list[np.ndarray], tags: list[int]) -> float:
    em = model.emissions_for(feats)
    tags = list(tags)
    score = model.start[tags[0]] + model.end[tags[-1]]
    score += sum(em[t, y] for t, y in enumerate(tags))
    score += sum(model.transition[tags[t - 1], tags[t]] for t in range(1, len(tags)))
    return float(score)


def log_partition(model: CRFModel, feats: list[np.ndarray]) -> float:
    em = model.emissions_for(feats)
    alpha = model.start + em[0]
    for t in range(1, len(feats)):
        alpha = _logsumexp(alpha[:, None] + model.transition, axis=0) + em[t]
    return float(_logsumexp(alpha + model.end, axis=0))


def marginals(model: CRFModel, feats: list[np.ndarray]) -> np.ndarray:
    """(n, 4) per-position tag posteriors via forward-backward."""
    n = len(feats)
    em = model.emissions_for(feats)
    alpha = np.zeros((n, N_TAGS))
    alpha[0] = model.start + em[0]
    for t in range(1, n):
        alpha[t] = _logsumexp(alpha[t - 1][:, None] + model.transition, axis=0) + em[t]
    beta = np.zeros((n, N_TAGS))
    beta[n - 1] = model.end
    for t in range(n - 2, -1, -1):
        beta[t] = _logsumexp(model.transition + em[t + 1] + beta[t + 1], axis=1)
    log_z = _logsumexp(alpha[n - 1] + model.end, axis=0)
    return np.exp(alpha + beta - log_z)


# --- decoding ----------------------------------------------------------------

# Transitions and boundary tags kept by the constrained decoder: spans are
# well-formed BIE runs; B->O covers single-token spans, so sequences that
# encode_span emits always stay reachable.
ALLOWED_TRANSITIONS = {
    (O, O), (O, B),
    (B, I), (B, E), (B, O),
    (I, I), (I, E),
    (E, O), (E, B),
}
ALLOWED_START = (O, B)
ALLOWED_END = (O, E, B)


def _viterbi(em: np.ndarray, trans: np.ndarray, start: np.ndarray, end: np.ndarray) -> list[int]:
    n = em.shape[0]
    delta = start + em[0]
    back = np.zeros((n, N_TAGS), dtype=np.int64)
    for t in range(1, n):
        cand = delta[:, None] + trans
        back[t] = cand.argmax(axis=0)  # first max: lowest previous tag wins
        delta = cand.max(axis=0) + em[t]
    final = delta + end
    tag = int(final.argmax())
    tags = [tag]
    for t in range(n - 1, 0, -1):
        tag = int(back[t, tag])
        tags.append(tag)
    tags.reverse()
    return tags


def decode(model: CRFModel, feats: list[np.ndarray]) -> list[int]:
    if not feats:
        return []
    em = model.emissions_for(feats)
    return _viterbi(em, model.transition, model.start, model.end)


def decode_constrained(model: CRFModel, feats: list[np.ndarray]) -> list[int]:
    if not feats:
        return []
    em = model.emissions_for(feats)
    trans = np.full((N_TAGS, N_TAGS), _NEG)
    for i, j in ALLOWED_TRANSITIONS:
        trans[i, j] = model.transition[i, j]
    start = np.full(N_TAGS, _NEG)
    start[list(ALLOWED_START)] = model.start[list(ALLOWED_START)]
    end = np.full(N_TAGS, _NEG)
    end[list(ALLOWED_END)] = model.end[list(ALLOWED_END)]
    return _viterbi(em, trans, start, end)


def brute_force_best(model: CRFModel, feats: list[np.ndarray]) -> tuple[float, list[int]]:
    """Exhaustive max over all tag sequences (oracle for small n)."""
    best, best_tags = -np.inf, None
    for tags in itertools.product(range(N_TAGS), repeat=len(feats)):
        s = sequence_score(model, feats, list(tags))
        if s > best:
            best, best_tags = s, list(tags)
    return best, best_tags


def brute_force_log_partition(model: CRFModel, feats: list[np.ndarray]) -> float:
    scores = [
        sequence_score(model, feats, list(tags))
        for tags in itertools.product(range(N_TAGS), repeat=len(feats))
    ]
    arr = np.array(scores)
    m = arr.max()
    return float(m + np.log(np.exp(arr - m).sum()))


# --- training ----------------------------------------------------------------


@dataclass(frozen=True)
class CRFConfig:
    l2_sigma: float = 10.0
    max_iter: int = 200
    grad_tol: float = 1e-5
    seed: int = 0


class _Batch:
    """Padded arrays for a training set, built once."""

    def __init__(self, data: list[tuple[list[np.ndarray], list[int]]], n_features: int):
        self.n_features = n_features
        self.n_seq = len(data)
        self.lengths = np.array([len(feats) for feats, _ in data], dtype=np.int64)
        if np.any(self.lengths == 0):
            raise CrfError("empty sequences cannot be trained on")
        self.max_len = int(self.lengths.max())
        s, l = self.n_seq, self.max_len

        self.mask = np.arange(l)[None, :] < self.lengths[:, None]
        self.tags = np.zeros((s, l), dtype=np.int64)
        for i, (_, tags) in enumerate(data):
            if len(tags) != self.lengths[i]:
                raise CrfError("tag sequence length differs from feature length")
            self.tags[i, : len(tags)] = tags

        # Flat (position, feature) incidence for scatter/gather operations.
        pos_ids = []
        feat_ids = []
        flat_pos = 0
        self.pos_of = np.full((s, l), -1, dtype=np.int64)
        for i, (feats, _) in enumerate(data):
            for t, ids in enumerate(feats):
                self.pos_of[i, t] = flat_pos
                pos_ids.extend([flat_pos] * ids.size)
                feat_ids.extend(ids.tolist())
                flat_pos += 1
        self.n_positions = flat_pos
        self.flat_pos = np.array(pos_ids, dtype=np.int64)
        self.flat_feat = np.array(feat_ids, dtype=np.int64)

        # Reverse-order position index per sequence for the backward pass.
        self.rev = np.zeros((s, l), dtype=np.int64)
        for i in range(s):
            n = self.lengths[i]
            self.rev[i, :n] = np.arange(n - 1, -1, -1)

        self.final_idx = self.lengths - 1
        self.seq_ids = np.arange(s)

    def emissions(self, emission_weights: np.ndarray) -> np.ndarray:
        """(S, L, 4) padded emission scores from the flat incidence."""
        flat = np.zeros((self.n_positions, N_TAGS))
        np.add.at(flat, self.flat_pos, emission_weights[self.flat_feat])
        out = np.zeros((self.n_seq, self.max_len, N_TAGS))
        out[self.mask] = flat
        return out


def _forward(batch: _Batch, em: np.ndarray, trans: np.ndarray, start: np.ndarray):
    s, l = batch.n_seq, batch.max_len
    alpha = np.zeros((s, l, N_TAGS))
    alpha[:, 0] = start + em[:, 0]
    for t in range(1, l):
        prev = alpha[:, t - 1]
        alpha[:, t] = _logsumexp(prev[:, :, None] + trans[None], axis=1) + em[:, t]
    return alpha


def _objective_and_gradient(theta: dict, batch: _Batch, sigma2: float, want_gradient: bool):
    em = batch.emissions(theta["emission"])
    trans, start, end = theta["transition"], theta["start"], theta["end"]
    s = batch.n_seq

    alpha = _forward(batch, em, trans, start)
    final_alpha = alpha[batch.seq_ids, batch.final_idx]
    log_z = _logsumexp(final_alpha + end, axis=1)

    # Gold-path scores, vectorized over the batch.
    t_idx = np.arange(batch.max_len)
    em_gold = np.where(batch.mask, em[batch.seq_ids[:, None], t_idx[None, :], batch.tags], 0.0).sum(axis=1)
    pair_valid = batch.mask[:, 1:]
    trans_gold = np.where(pair_valid, trans[batch.tags[:, :-1], batch.tags[:, 1:]], 0.0).sum(axis=1)
    start_gold = start[batch.tags[:, 0]]
    end_gold = end[batch.tags[batch.seq_ids, batch.final_idx]]
    gold = em_gold + trans_gold + start_gold + end_gold

    penalty = sum(float((v * v).sum()) for v in theta.values()) / (2.0 * sigma2)
    objective = float((gold - log_z).sum()) - penalty
    if not want_gradient:
        return objective, None

    # Backward pass on reversed, left-aligned sequences.
    em_rev = em[batch.seq_ids[:, None], batch.rev]
    gamma = np.zeros_like(alpha)
    gamma[:, 0] = end
    for u in range(1, batch.max_len):
        nxt = gamma[:, u - 1] + em_rev[:, u - 1]
        gamma[:, u] = _logsumexp(trans[None] + nxt[:, None, :], axis=2)
    beta = gamma[batch.seq_ids[:, None], batch.rev]

    # Unary marginals, zeroed on padding.
    mu = np.exp(alpha + beta - log_z[:, None, None])
    mu[~batch.mask] = 0.0

    grad_emission = np.zeros_like(theta["emission"])
    mu_flat = mu[batch.mask]
    gold_onehot = np.zeros_like(mu_flat)
    gold_onehot[np.arange(mu_flat.shape[0]), batch.tags[batch.mask]] = 1.0
    np.add.at(grad_emission, batch.flat_feat, (gold_onehot - mu_flat)[batch.flat_pos])

    # Pairwise marginals for the transition gradient.
    a_part = alpha[:, :-1, :, None]
    b_part = (em + beta)[:, 1:, None, :]
    pair = np.exp(a_part + trans[None, None] + b_part - log_z[:, None, None, None])
    pair[~pair_valid] = 0.0
    expected_trans = pair.sum(axis=(0, 1))
    emp_trans = np.zeros((N_TAGS, N_TAGS))
    np.add.at(
        emp_trans,
        (batch.tags[:, :-1][pair_valid], batch.tags[:, 1:][pair_valid]),
        1.0,
    )
    grad_trans = emp_trans - expected_trans

    emp_start = np.bincount(batch.tags[:, 0], minlength=N_TAGS).astype(float)
    grad_start = emp_start - mu[:, 0].sum(axis=0)
    final_tags = batch.tags[batch.seq_ids, batch.final_idx]
    emp_end = np.bincount(final_tags, minlength=N_TAGS).astype(float)
    grad_end = emp_end - mu[batch.seq_ids, batch.final_idx].sum(axis=0)

    grad = {
        "emission": grad_emission - theta["emission"] / sigma2,
        "transition": grad_trans - trans / sigma2,
        "start": grad_start - start / sigma2,
        "end": grad_end - end / sigma2,
    }
    return objective, grad


def train_crf(
    data: list[tuple[list[np.ndarray], list[int]]],
    n_features: int,
    cfg: CRFConfig = CRFConfig(),
    feature_index: FeatureIndex | None = None,
) -> CRFModel:
    """Penalized maximum likelihood by line-searched batch gradient ascent.

    ``data`` pairs per-position feature-id arrays with gold tag sequences
    over a consistent feature space of size ``n_features``.
    """
    if not data:
        raise CrfError("cannot train a CRF on empty data")
    batch = _Batch(data, n_features)
    sigma2 = cfg.l2_sigma**2
    theta = {
        "emission": np.zeros((n_features, N_TAGS)),
        "transition": np.zeros((N_TAGS, N_TAGS)),
        "start": np.zeros(N_TAGS),
        "end": np.zeros(N_TAGS),
    }
    history: list[float] = []
    obj, grad = _objective_and_gradient(theta, batch, sigma2, True)
    step = 1.0
    for _ in range(cfg.max_iter):
        history.append(obj)
        gnorm2 = sum(float((g * g).sum()) for g in grad.values())
        if np.sqrt(gnorm2) < cfg.grad_tol:
            break
        # Backtracking Armijo line search along the gradient.
        accepted = False
        trial = step * 2.0
        for _ in range(60):
            cand = {k: v + trial * grad[k] for k, v in theta.items()}
            cand_obj, _ = _objective_and_gradient(cand, batch, sigma2, False)
            if cand_obj >= obj + 1e-4 * trial * gnorm2:
                accepted = True
                break
            trial *= 0.5
        if not accepted:
            break
        theta = cand
        step = trial
        obj, grad = _objective_and_gradient(theta, batch, sigma2, True)
    history.append(obj)

    model = CRFModel(
        feature_index=feature_index or FeatureIndex(),
        emission=theta["emission"],
        transition=theta["transition"],
        start=theta["start"],
        end=theta["end"],
        l2_sigma=cfg.l2_sigma,
    )
    model.objective_history = history
    return model


def train_tagger(
    tdocs: list[TokenizedDocument],
    spans: list[tuple[int, int] | None],
    cfg: CRFConfig = CRFConfig(),
) -> CRFModel:
    """Build the feature index from the documents and train on their spans."""
    all_strings = [feature_strings(td) for td in tdocs]
    index = FeatureIndex().fit(all_strings)
    data = [
        (index.encode(strings), encode_span(span, len(td.tokens)))
        for strings, td, span in zip(all_strings, tdocs, spans)
    ]
    return train_crf(data, len(index), cfg, feature_index=index)


def tag_document(model: CRFModel, tdoc: TokenizedDocument, constrained: bool = False) -> list[int]:
    feats = extract_features(tdoc, model.feature_index)
    return decode_constrained(model, feats) if constrained else decode(model, feats)
