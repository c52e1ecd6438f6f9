"""Deterministic synthetic corpus generator.

Every task's classes get disjoint marker vocabularies; each marker slot in
a document template carries a class-indicative token with probability
``signal_strength`` and a neutral filler otherwise.  Positive documents
with a specific perpetrator embed a 1-3 token span drawn from
category-specific role words (with an optional determiner/adjective), and
the gold character offsets of that span are recorded.  Texts are emitted
already lowercase and whitespace-normal, so cleaning is the identity and
raw offsets align with tokens exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .corpus import (
    AnnotationRecord,
    Document,
    GENDER_CLASSES,
    PERPETRATOR_CLASSES,
    VICTIM_CLASSES,
    VIOLENCE_CLASSES,
)


class SynthError(ValueError):
    pass


_FILLERS = (
    "today again maybe honestly somehow really still always quietly nearly "
    "almost perhaps later early evening morning downtown suddenly finally once"
).split()

_SVR_MARKERS = ("assaulted", "groped", "harassed", "attacked", "molested", "cornered")
_NSVR_MARKERS = ("movement", "solidarity", "awareness", "support", "hashtag", "news")

_VIOLENCE_MARKERS = {
    "PEN": ("raped", "forced"),
    "USC": ("touched", "fondled"),
    "NSE": ("catcalled", "whistled"),
    "OTH": ("bullied", "threatened"),
}
_VICTIM_MARKERS = {
    "SLF": ("myself", "personally"),
    "nSLF": ("witnessed", "coworker"),
}
_GENDER_MARKERS = {
    "FEM": ("female", "women"),
    "MAL": ("male", "men"),
    "UNS": ("unspecified", "anonymous"),
}
# Context words that co-occur with a perpetrator category without being
# part of the tagged span.
_PERP_CONTEXT = {
    "INT": ("relationship", "dating"),
    "FAM": ("family", "home"),
    "POW": ("workplace", "office"),
    "FRN": ("college", "party"),
    "STR": ("street", "subway"),
    "PNM": ("someone", "somebody"),
}
_PERP_ROLES = {
    "INT": ("boyfriend", "husband", "partner", "girlfriend"),
    "FAM": ("father", "uncle", "brother", "cousin", "stepdad"),
    "POW": ("boss", "teacher", "manager", "professor", "coach"),
    "FRN": ("friend", "classmate", "neighbor", "roommate"),
    "STR": ("stranger", "guy", "man", "dude"),
}
_SPAN_DETS = ("my", "a", "the")
_SPAN_ADJS = ("old", "drunk", "creepy", "random")

_PEN_RAW_CODES = "abcde"
_RAW_CODE = {"USC": "f", "NSE": "g", "OTH": "h"}


@dataclass(frozen=True)
class SynthConfig:
    n_docs: int = 1000
    detection_mix: dict = field(
        default_factory=lambda: {"SVR": 0.6, "nSVR": 0.4}
    )
    violence_mix: dict = field(
        default_factory=lambda: {"PEN": 0.3, "USC": 0.3, "NSE": 0.2, "OTH": 0.2}
    )
    victim_mix: dict = field(default_factory=lambda: {"SLF": 0.6, "nSLF": 0.4})
    gender_mix: dict = field(
        default_factory=lambda: {"FEM": 0.4, "MAL": 0.2, "UNS": 0.4}
    )
    perpetrator_mix: dict = field(
        default_factory=lambda: {
            "FAM": 0.15, "FRN": 0.15, "INT": 0.12, "PNM": 0.28, "POW": 0.15, "STR": 0.15,
        }
    )
    signal_strength: float = 0.9
    seed: int = 0

    def __post_init__(self):
        if self.n_docs < 1:
            raise SynthError("n_docs must be positive")
        if not (0.0 <= self.signal_strength <= 1.0):
            raise SynthError("signal_strength must lie in [0, 1]")
        for name, mix, classes in (
            ("detection", self.detection_mix, ("SVR", "nSVR")),
            ("violence", self.violence_mix, VIOLENCE_CLASSES),
            ("victim", self.victim_mix, VICTIM_CLASSES),
            ("gender", self.gender_mix, GENDER_CLASSES),
            ("perpetrator", self.perpetrator_mix, PERPETRATOR_CLASSES),
        ):
            if set(mix) - set(classes):
                raise SynthError(f"{name} mixture names unknown classes")
            total = sum(mix.values())
            if abs(total - 1.0) > 1e-9 or any(p < 0 for p in mix.values()):
                raise SynthError(f"{name} mixture must be nonnegative and sum to 1")


def _draw(rng: np.random.Generator, mix: dict) -> str:
    names = sorted(mix)
    probs = np.array([mix[n] for n in names])
    return names[int(rng.choice(len(names), p=probs))]


def _slot(rng, signal: float, markers, fillers=_FILLERS) -> str:
    pool = markers if rng.random() < signal else fillers
    return pool[int(rng.integers(len(pool)))]


def _filler(rng) -> str:
    return _FILLERS[int(rng.integers(len(_FILLERS)))]


def _span_tokens(rng, category: str) -> list[str]:
    roles = _PERP_ROLES[category]
    role = roles[int(rng.integers(len(roles)))]
    shape = int(rng.integers(3))  # 0: role, 1: det+role, 2: det+adj+role
    if shape == 0:
        return [role]
    det = _SPAN_DETS[int(rng.integers(len(_SPAN_DETS)))]
    if shape == 1:
        return [det, role]
    adj = _SPAN_ADJS[int(rng.integers(len(_SPAN_ADJS)))]
    return [det, adj, role]


def generate(cfg: SynthConfig) -> list[tuple[Document, AnnotationRecord]]:
    rng = np.random.Generator(np.random.PCG64(cfg.seed))
    s = cfg.signal_strength
    out = []
    for i in range(cfg.n_docs):
        doc_id = f"synth-{i:06d}"
        detection = _draw(rng, cfg.detection_mix)
        if detection == "nSVR":
            tokens = [_filler(rng)]
            tokens.append(_slot(rng, s, _NSVR_MARKERS))
            tokens.append(_filler(rng))
            tokens.append(_slot(rng, s, _NSVR_MARKERS))
            tokens.extend(_filler(rng) for _ in range(int(rng.integers(2, 5))))
            text = " ".join(tokens)
            out.append((Document(id=doc_id, text=text), AnnotationRecord(doc_id, "i")))
            continue

        violence = _draw(rng, cfg.violence_mix)
        victim = _draw(rng, cfg.victim_mix)
        gender = _draw(rng, cfg.gender_mix)
        perpetrator = _draw(rng, cfg.perpetrator_mix)

        tokens = [_filler(rng)]
        tokens.append(_slot(rng, s, _VICTIM_MARKERS[victim]))
        tokens.append(_slot(rng, s, _SVR_MARKERS))

        span_range = None
        if perpetrator != "PNM" and rng.random() < s:
            span = _span_tokens(rng, perpetrator)
            span_range = (len(tokens), len(tokens) + len(span))
            tokens.extend(span)
        tokens.append(_slot(rng, s, _VIOLENCE_MARKERS[violence]))
        tokens.append(_slot(rng, s, _VICTIM_MARKERS[victim]))
        tokens.append(_slot(rng, s, _PERP_CONTEXT[perpetrator]))
        tokens.append(_slot(rng, s, _SVR_MARKERS))
        tokens.append(_slot(rng, s, _GENDER_MARKERS[gender]))
        tokens.append(_slot(rng, s, _VIOLENCE_MARKERS[violence]))
        tokens.append(_slot(rng, s, _GENDER_MARKERS[gender]))
        tokens.extend(_filler(rng) for _ in range(int(rng.integers(1, 4))))

        text = " ".join(tokens)
        char_span = None
        if span_range is not None:
            start = sum(len(t) + 1 for t in tokens[: span_range[0]])
            end = start + len(" ".join(tokens[span_range[0]: span_range[1]]))
            char_span = (start, end)

        if violence == "PEN":
            code = _PEN_RAW_CODES[int(rng.integers(len(_PEN_RAW_CODES)))]
        else:
            code = _RAW_CODE[violence]
        ann = AnnotationRecord(
            doc_id=doc_id,
            raw_violence_code=code,
            victim=victim,
            gender=gender,
            perpetrator=perpetrator,
            perpetrator_span=char_span,
        )
        out.append((Document(id=doc_id, text=text), ann))
    return out
