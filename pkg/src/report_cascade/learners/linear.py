"""Linear max-margin classifier: one-vs-rest L2-regularized hinge loss.

Training is Pegasos-style stochastic subgradient descent (per-epoch
shuffle from the seed, step size 1/(l2 * t), lazily scaled weights so each
update touches only the sample's nonzeros).  Probabilities come from
per-class Platt sigmoids fitted on 3-fold out-of-fold margins and
renormalized to sum to one.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..sparse import CsrMatrix, SparseVector, take_rows
from .base import Dataset, LearnerError


@dataclass(frozen=True)
class LinearConfig:
    l2: float = 1e-4
    epochs: int = 30
    seed: int = 0
    calibration_folds: int = 3


@dataclass(eq=False)
class LinearModel:
    weights: np.ndarray   # (K, F)
    bias: np.ndarray      # (K,)
    platt_a: np.ndarray   # (K,)
    platt_b: np.ndarray   # (K,)
    class_names: list[str]

    @property
    def dim(self) -> int:
        return self.weights.shape[1]

    def margins(self, vec: SparseVector) -> np.ndarray:
        if vec.dim != self.dim:
            raise LearnerError(f"vector dimension {vec.dim} != model dimension {self.dim}")
        return self.weights[:, vec.cols] @ vec.vals + self.bias

    def predict_proba_batch(self, vectors: list[SparseVector]) -> np.ndarray:
        out = np.zeros((len(vectors), len(self.class_names)))
        for i, vec in enumerate(vectors):
            m = self.margins(vec)
            p = _sigmoid(-(self.platt_a * m + self.platt_b))
            total = p.sum()
            out[i] = p / total if total > 0 else np.full(p.size, 1.0 / p.size)
        return out


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z, dtype=np.float64)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _pegasos(mat: CsrMatrix, y_signs: np.ndarray, l2: float, epochs: int, rng: np.random.Generator):
    """All one-vs-rest problems trained in lockstep; returns (W, b).

    ``y_signs`` is (n, K) of +/-1.  The weight matrix is kept as scale * U
    so the per-step shrink is O(1); U columns are touched only at the
    sample's nonzero features.
    """
    n = mat.n_rows
    k = y_signs.shape[1]
    u = np.zeros((k, mat.n_cols))
    b = np.zeros(k)
    scale = 1.0
    t = 0
    for _ in range(epochs):
        order = rng.permutation(n)
        for i in order:
            t += 1
            eta = 1.0 / (l2 * t)
            lo, hi = mat.indptr[i], mat.indptr[i + 1]
            cols = mat.cols[lo:hi]
            vals = mat.vals[lo:hi]
            margins = scale * (u[:, cols] @ vals) + b
            if t > 1:  # the t == 1 shrink factor is 0 but w is still zero
                scale *= 1.0 - 1.0 / t
                if scale < 1e-9:
                    u *= scale
                    scale = 1.0
            viol = y_signs[i] * margins < 1.0
            if viol.any():
                step = eta * y_signs[i] * viol
                u[:, cols] += np.outer(step / scale, vals)
                b += step
    return scale * u, b


def _platt_fit(margins: np.ndarray, positive: np.ndarray, max_iter: int = 100) -> tuple[float, float]:
    """Sigmoid calibration p = 1/(1 + exp(A*m + B)) by Newton iterations on
    the regularized targets (N+ + 1)/(N+ + 2) and 1/(N- + 2)."""
    n_pos = int(positive.sum())
    n_neg = int(positive.size - n_pos)
    if n_pos == 0:
        return 0.0, 35.0
    if n_neg == 0:
        return 0.0, -35.0
    hi = (n_pos + 1.0) / (n_pos + 2.0)
    lo = 1.0 / (n_neg + 2.0)
    t = np.where(positive, hi, lo)
    a, b = 0.0, np.log((n_neg + 1.0) / (n_pos + 1.0))
    for _ in range(max_iter):
        z = a * margins + b
        p = _sigmoid(-z)
        # Gradient and Hessian of the cross-entropy in (a, b); the Newton
        # step below subtracts H^-1 g.
        d = t - p
        g_a = np.dot(d, margins)
        g_b = d.sum()
        w = np.maximum(p * (1.0 - p), 1e-12)
        h_aa = np.dot(w, margins * margins) + 1e-12
        h_ab = np.dot(w, margins)
        h_bb = w.sum() + 1e-12
        det = h_aa * h_bb - h_ab * h_ab
        if abs(det) < 1e-300:
            break
        da = (h_bb * g_a - h_ab * g_b) / det
        db = (h_aa * g_b - h_ab * g_a) / det
        a -= da
        b -= db
        if abs(da) < 1e-10 and abs(db) < 1e-10:
            break
    return float(a), float(b)


def train_linear(data: Dataset, cfg: LinearConfig = LinearConfig()) -> LinearModel:
    if data.n == 0:
        raise LearnerError("empty dataset")
    if np.unique(data.labels).size < 2:
        raise LearnerError("linear model needs at least two observed classes")
    k = data.n_classes
    n = data.n
    mat = data.matrix()
    y_signs = np.where(
        data.labels[:, None] == np.arange(k)[None, :], 1.0, -1.0
    )

    # Out-of-fold margins for calibration: round-robin folds over a seeded
    # shuffle, one Pegasos run per held-out fold.
    folds = min(cfg.calibration_folds, n)
    assign = np.empty(n, dtype=np.int64)
    shuffled = np.random.Generator(np.random.PCG64(cfg.seed)).permutation(n)
    assign[shuffled] = np.arange(n) % folds
    oof_margins = np.zeros((n, k))
    if folds >= 2:
        for f in range(folds):
            tr = np.flatnonzero(assign != f)
            te = np.flatnonzero(assign == f)
            sub = take_rows(mat, tr)
            rng = np.random.Generator(np.random.PCG64([cfg.seed, f]))
            w, b = _pegasos(sub, y_signs[tr], cfg.l2, cfg.epochs, rng)
            for i in te:
                lo, hi2 = mat.indptr[i], mat.indptr[i + 1]
                oof_margins[i] = w[:, mat.cols[lo:hi2]] @ mat.vals[lo:hi2] + b

    rng = np.random.Generator(np.random.PCG64([cfg.seed, folds]))
    weights, bias = _pegasos(mat, y_signs, cfg.l2, cfg.epochs, rng)
    if folds < 2:
        for i in range(n):
            lo, hi2 = mat.indptr[i], mat.indptr[i + 1]
            oof_margins[i] = weights[:, mat.cols[lo:hi2]] @ mat.vals[lo:hi2] + bias

    platt_a = np.zeros(k)
    platt_b = np.zeros(k)
    for klass in range(k):
        platt_a[klass], platt_b[klass] = _platt_fit(
            oof_margins[:, klass], data.labels == klass
        )
    return LinearModel(
        weights=weights,
        bias=bias,
        platt_a=platt_a,
        platt_b=platt_b,
        class_names=list(data.class_names),
    )
