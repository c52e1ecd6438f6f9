"""The two-step tracker: detect, then characterize and tag.

Scoring order per document: detection vote; stop on a negative verdict;
otherwise predict the victim class, apply the probability gate (positive
class probability >= threshold, default 0.7), and only for gated records
predict violence / gender / perpetrator and, when a specific perpetrator
class is predicted, run the CRF tagger and keep its first span as the
perpetrator text (all decoded spans are retained alongside).
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import crf as crf_mod
from .corpus import (
    AnnotationRecord,
    DETECTION_CLASSES,
    Document,
    GENDER_CLASSES,
    PERPETRATOR_CLASSES,
    VICTIM_CLASSES,
    VIOLENCE_CLASSES,
    collapse_labels,
)
from .crf import CRFConfig, CRFModel, train_tagger
from .ensemble import VotingModel
from .learners import (
    Dataset,
    ForestConfig,
    GBConfig,
    LinearConfig,
    train_gradient_boosting,
    train_linear,
    train_random_forest,
)
from .preprocess import TokenizedDocument, map_span, prepare
from .sparse import SparseVector
from .vectorizer import FeatureConfig, Vocabulary, fit as fit_vocabulary, transform

DEFAULT_SVR_THRESHOLD = 0.7


class CascadeError(ValueError):
    pass


@dataclass(frozen=True)
class PipelineConfig:
    feature: FeatureConfig = FeatureConfig()
    linear: LinearConfig = LinearConfig()
    forest: ForestConfig = ForestConfig()
    boosting: GBConfig = GBConfig()
    crf: CRFConfig = CRFConfig()
    svr_threshold: float = DEFAULT_SVR_THRESHOLD
    seed: int = 42

    def __post_init__(self):
        if not (0.0 < self.svr_threshold <= 1.0):
            raise CascadeError("svr_threshold must lie in (0, 1]")

    def reseeded(self) -> "PipelineConfig":
        """Copy with the per-learner seeds derived from the pipeline seed."""
        from dataclasses import replace

        return replace(
            self,
            linear=replace(self.linear, seed=self.seed + 1),
            forest=replace(self.forest, seed=self.seed + 2),
            boosting=replace(self.boosting, seed=self.seed + 3),
            crf=replace(self.crf, seed=self.seed + 4),
        )


@dataclass(eq=False)
class PipelineModel:
    vocab: Vocabulary
    feature_cfg: FeatureConfig
    detector: VotingModel
    violence: VotingModel
    victim: VotingModel
    gender: VotingModel
    perpetrator: VotingModel
    tagger: CRFModel
    svr_threshold: float = DEFAULT_SVR_THRESHOLD

    def heads(self) -> dict[str, VotingModel]:
        return {
            "detection": self.detector,
            "violence": self.violence,
            "victim": self.victim,
            "gender": self.gender,
            "perpetrator": self.perpetrator,
        }


@dataclass
class ReportRecord:
    doc_id: str
    svr_prob: float
    detection: str
    gated: bool = False
    victim: str | None = None
    violence: str | None = None
    gender: str | None = None
    perpetrator: str | None = None
    perpetrator_text: str | None = None
    perpetrator_span: tuple[int, int] | None = None
    perpetrator_spans: list[tuple[int, int]] = field(default_factory=list)

    def to_obj(self) -> dict:
        obj: dict = {
            "doc_id": self.doc_id,
            "svr_prob": self.svr_prob,
            "detection": self.detection,
            "gated": self.gated,
        }
        for key in ("victim", "violence", "gender", "perpetrator", "perpetrator_text"):
            value = getattr(self, key)
            if value is not None:
                obj[key] = value
        if self.perpetrator_span is not None:
            obj["perpetrator_span"] = list(self.perpetrator_span)
        if self.perpetrator_spans:
            obj["perpetrator_spans"] = [list(s) for s in self.perpetrator_spans]
        return obj

    @classmethod
    def from_obj(cls, obj: dict) -> "ReportRecord":
        return cls(
            doc_id=obj["doc_id"],
            svr_prob=float(obj["svr_prob"]),
            detection=obj["detection"],
            gated=bool(obj.get("gated", False)),
            victim=obj.get("victim"),
            violence=obj.get("violence"),
            gender=obj.get("gender"),
            perpetrator=obj.get("perpetrator"),
            perpetrator_text=obj.get("perpetrator_text"),
            perpetrator_span=tuple(obj["perpetrator_span"]) if obj.get("perpetrator_span") else None,
            perpetrator_spans=[tuple(s) for s in obj.get("perpetrator_spans", [])],
        )


def _train_head(
    name: str,
    vectors: list[SparseVector],
    labels: list[str],
    class_names: tuple[str, ...],
    cfg: PipelineConfig,
) -> VotingModel:
    observed = set(labels)
    missing = [c for c in class_names if c not in observed]
    if missing:
        raise CascadeError(f"task {name!r} has no examples of classes {missing}")
    ids = np.array([class_names.index(lab) for lab in labels], dtype=np.int64)
    data = Dataset(vectors=vectors, labels=ids, class_names=list(class_names))
    return VotingModel(
        members=[
            train_linear(data, cfg.linear),
            train_random_forest(data, cfg.forest),
            train_gradient_boosting(data, cfg.boosting),
        ],
        class_names=list(class_names),
    )


def train_pipeline(
    corpus: list[tuple[Document, AnnotationRecord]],
    cfg: PipelineConfig = PipelineConfig(),
) -> PipelineModel:
    """Fit one vocabulary on every training document, the detector on all of
    them, each characterizer on the positive subset where its field is
    annotated, and the tagger on the documents carrying spans."""
    if not corpus:
        raise CascadeError("empty training corpus")
    cfg = cfg.reseeded()
    tdocs = [prepare(doc.id, doc.text) for doc, _ in corpus]
    vocab = fit_vocabulary(tdocs, cfg.feature)
    vectors = [transform(td, vocab, cfg.feature) for td in tdocs]
    labels = [collapse_labels(ann) for _, ann in corpus]

    detector = _train_head(
        "detection", vectors, [lab.detection for lab in labels], DETECTION_CLASSES, cfg
    )

    svr_idx = [i for i, lab in enumerate(labels) if lab.detection == "SVR"]
    heads = {}
    for name, classes, getter in (
        ("violence", VIOLENCE_CLASSES, lambda lab: lab.violence),
        ("victim", VICTIM_CLASSES, lambda lab: lab.victim),
        ("gender", GENDER_CLASSES, lambda lab: lab.gender),
        ("perpetrator", PERPETRATOR_CLASSES, lambda lab: lab.perpetrator),
    ):
        idx = [i for i in svr_idx if getter(labels[i]) is not None]
        heads[name] = _train_head(
            name, [vectors[i] for i in idx], [getter(labels[i]) for i in idx], classes, cfg
        )

    span_tdocs = []
    span_ranges = []
    for i, (doc, ann) in enumerate(corpus):
        if ann.perpetrator_span is None:
            continue
        token_range = map_span(ann.perpetrator_span, tdocs[i])
        if token_range is None:
            continue
        span_tdocs.append(tdocs[i])
        span_ranges.append(token_range)
    if not span_tdocs:
        raise CascadeError("no training documents carry a perpetrator span")
    tagger = train_tagger(span_tdocs, span_ranges, cfg.crf)

    return PipelineModel(
        vocab=vocab,
        feature_cfg=cfg.feature,
        detector=detector,
        violence=heads["violence"],
        victim=heads["victim"],
        gender=heads["gender"],
        perpetrator=heads["perpetrator"],
        tagger=tagger,
        svr_threshold=cfg.svr_threshold,
    )


def _span_text(tdoc: TokenizedDocument, span: tuple[int, int]) -> str:
    return " ".join(tdoc.tokens[span[0]: span[1]])


def score_prepared(model: PipelineModel, tdoc: TokenizedDocument) -> ReportRecord:
    vec = transform(tdoc, model.vocab, model.feature_cfg)
    det_probs = model.detector.predict_proba_batch([vec])[0]
    svr_prob = float(det_probs[DETECTION_CLASSES.index("SVR")])
    detection = DETECTION_CLASSES[int(det_probs.argmax())]
    record = ReportRecord(doc_id=tdoc.doc_id, svr_prob=svr_prob, detection=detection)
    if detection == "nSVR":
        return record
    victim_probs = model.victim.predict_proba_batch([vec])[0]
    record.victim = VICTIM_CLASSES[int(victim_probs.argmax())]
    record.gated = svr_prob >= model.svr_threshold
    if not record.gated:
        return record
    record.violence = VIOLENCE_CLASSES[int(model.violence.predict_proba_batch([vec])[0].argmax())]
    record.gender = GENDER_CLASSES[int(model.gender.predict_proba_batch([vec])[0].argmax())]
    record.perpetrator = PERPETRATOR_CLASSES[
        int(model.perpetrator.predict_proba_batch([vec])[0].argmax())
    ]
    if record.perpetrator != "PNM" and tdoc.tokens:
        tags = crf_mod.tag_document(model.tagger, tdoc)
        spans = crf_mod.extract_spans(tags)
        record.perpetrator_spans = spans
        if spans:
            record.perpetrator_span = spans[0]
            record.perpetrator_text = _span_text(tdoc, spans[0])
    return record


def score(model: PipelineModel, doc: Document) -> ReportRecord:
    return score_prepared(model, prepare(doc.id, doc.text))


def score_batch(
    model: PipelineModel, docs: list[Document], threads: int | None = None
) -> list[ReportRecord]:
    """Score documents in input order, batching each cascade stage over the
    subset of documents that reaches it.  A thread pool (when requested)
    only parallelizes the per-document preparation and CRF decoding, so
    results never depend on scheduling."""
    if threads is not None and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            tdocs = list(pool.map(lambda d: prepare(d.id, d.text), docs))
    else:
        tdocs = [prepare(d.id, d.text) for d in docs]
    vectors = [transform(td, model.vocab, model.feature_cfg) for td in tdocs]
    if not docs:
        return []

    det_probs = model.detector.predict_proba_batch(vectors)
    svr_col = DETECTION_CLASSES.index("SVR")
    records = []
    for td, probs in zip(tdocs, det_probs):
        records.append(
            ReportRecord(
                doc_id=td.doc_id,
                svr_prob=float(probs[svr_col]),
                detection=DETECTION_CLASSES[int(probs.argmax())],
            )
        )

    svr_idx = [i for i, r in enumerate(records) if r.detection == "SVR"]
    if svr_idx:
        victim = model.victim.predict_proba_batch([vectors[i] for i in svr_idx])
        for j, i in enumerate(svr_idx):
            records[i].victim = VICTIM_CLASSES[int(victim[j].argmax())]
            records[i].gated = records[i].svr_prob >= model.svr_threshold

    gated_idx = [i for i in svr_idx if records[i].gated]
    if gated_idx:
        gated_vecs = [vectors[i] for i in gated_idx]
        violence = model.violence.predict_proba_batch(gated_vecs)
        gender = model.gender.predict_proba_batch(gated_vecs)
        perp = model.perpetrator.predict_proba_batch(gated_vecs)
        for j, i in enumerate(gated_idx):
            records[i].violence = VIOLENCE_CLASSES[int(violence[j].argmax())]
            records[i].gender = GENDER_CLASSES[int(gender[j].argmax())]
            records[i].perpetrator = PERPETRATOR_CLASSES[int(perp[j].argmax())]

    tag_idx = [i for i in gated_idx if records[i].perpetrator != "PNM" and tdocs[i].tokens]

    def _tag(i: int) -> None:
        tags = crf_mod.tag_document(model.tagger, tdocs[i])
        spans = crf_mod.extract_spans(tags)
        records[i].perpetrator_spans = spans
        if spans:
            records[i].perpetrator_span = spans[0]
            records[i].perpetrator_text = _span_text(tdocs[i], spans[0])

    if threads is not None and threads > 1 and tag_idx:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(_tag, tag_idx))
    else:
        for i in tag_idx:
            _tag(i)
    return records


@dataclass
class AnalysisSummary:
    n_input: int
    n_selected: int
    task_counts: dict           # task -> {label: count} over selected records
    perpetrator_distribution: list  # rows: (category, freq, pct, tagged, tagged_pct)
    contingency: dict           # (violence, perpetrator) -> count, PNM excluded
    violence_given_perpetrator: dict  # perp -> {violence: pct}, rows sum to 100
    perpetrator_given_violence: dict  # violence -> {perp: pct}, rows sum to 100

    def to_obj(self) -> dict:
        return {
            "n_input": self.n_input,
            "n_selected": self.n_selected,
            "task_counts": self.task_counts,
            "perpetrator_distribution": [
                {
                    "category": cat,
                    "frequency": freq,
                    "percentage": pct,
                    "tagged": tagged,
                    "tagged_percentage": tagged_pct,
                }
                for cat, freq, pct, tagged, tagged_pct in self.perpetrator_distribution
            ],
            "contingency": {f"{v}|{p}": c for (v, p), c in self.contingency.items()},
            "violence_given_perpetrator": self.violence_given_perpetrator,
            "perpetrator_given_violence": self.perpetrator_given_violence,
        }


def analyze(
    records: list[ReportRecord],
    victim: str | None = "SLF",
    gated_only: bool = True,
) -> AnalysisSummary:
    """Aggregate records into the distribution and cross-tab tables.

    The perpetrator tables cover only the five specific categories (PNM is
    excluded); ``tagged`` counts records with extracted perpetrator text.
    """
    selected = [
        r
        for r in records
        if r.detection == "SVR"
        and (victim is None or r.victim == victim)
        and (not gated_only or r.gated)
    ]
    task_counts: dict = {}
    for task, classes in (
        ("violence", VIOLENCE_CLASSES),
        ("victim", VICTIM_CLASSES),
        ("gender", GENDER_CLASSES),
        ("perpetrator", PERPETRATOR_CLASSES),
    ):
        counts = {c: 0 for c in classes}
        for r in selected:
            value = getattr(r, task)
            if value is not None:
                counts[value] += 1
        task_counts[task] = counts

    specific = [c for c in PERPETRATOR_CLASSES if c != "PNM"]
    perp_counts = {c: task_counts["perpetrator"][c] for c in specific}
    perp_total = sum(perp_counts.values())
    tagged = {c: 0 for c in specific}
    for r in selected:
        if r.perpetrator in tagged and r.perpetrator_text is not None:
            tagged[r.perpetrator] += 1
    distribution = []
    for c in specific:
        freq = perp_counts[c]
        pct = 100.0 * freq / perp_total if perp_total else 0.0
        tag_pct = 100.0 * tagged[c] / freq if freq else 0.0
        distribution.append((c, freq, pct, tagged[c], tag_pct))

    contingency = {(v, p): 0 for v in VIOLENCE_CLASSES for p in specific}
    for r in selected:
        if r.violence is not None and r.perpetrator in perp_counts:
            contingency[(r.violence, r.perpetrator)] += 1
    v_given_p = {}
    for p in specific:
        col_total = sum(contingency[(v, p)] for v in VIOLENCE_CLASSES)
        v_given_p[p] = {
            v: (100.0 * contingency[(v, p)] / col_total if col_total else 0.0)
            for v in VIOLENCE_CLASSES
        }
    p_given_v = {}
    for v in VIOLENCE_CLASSES:
        row_total = sum(contingency[(v, p)] for p in specific)
        p_given_v[v] = {
            p: (100.0 * contingency[(v, p)] / row_total if row_total else 0.0)
            for p in specific
        }
    return AnalysisSummary(
        n_input=len(records),
        n_selected=len(selected),
        task_counts=task_counts,
        perpetrator_distribution=distribution,
        contingency=contingency,
        violence_given_perpetrator=v_given_p,
        perpetrator_given_violence=p_given_v,
    )
