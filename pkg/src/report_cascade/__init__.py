"""Violence-report tracking for short social-media texts.

Feature pipeline, three base classifiers with a soft-voting ensemble, a
linear-chain CRF for perpetrator-span tagging, a shallow agent-verb-detail
prefilter, and the evaluation harness around them.
"""

__version__ = "0.1.0"

from .cascade import (
    AnalysisSummary,
    PipelineConfig,
    PipelineModel,
    ReportRecord,
    analyze,
    score,
    score_batch,
    train_pipeline,
)
from .corpus import AnnotationRecord, Document, TaskLabels, collapse_labels, deduplicate, read_corpus
from .ensemble import VotingModel, vote, vote_proba
from .preprocess import TokenizedDocument, clean, prepare, tag_pos, tokenize
from .synth import SynthConfig, generate
from .vectorizer import FeatureConfig, Vocabulary

__all__ = [
    "AnalysisSummary",
    "AnnotationRecord",
    "Document",
    "FeatureConfig",
    "PipelineConfig",
    "PipelineModel",
    "ReportRecord",
    "SynthConfig",
    "TaskLabels",
    "TokenizedDocument",
    "Vocabulary",
    "VotingModel",
    "analyze",
    "clean",
    "collapse_labels",
    "deduplicate",
    "generate",
    "prepare",
    "read_corpus",
    "score",
    "score_batch",
    "tag_pos",
    "tokenize",
    "train_pipeline",
    "vote",
    "vote_proba",
]
