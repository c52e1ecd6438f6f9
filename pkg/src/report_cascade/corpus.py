"""Document/annotation data model, on-disk corpus formats, dedup, label maps.

A corpus is a sequence of (Document, AnnotationRecord | None) pairs.  The
annotation carries the raw five-field coding (violence code a..i, victim,
gender, perpetrator class, optional character span); ``collapse_labels``
folds the raw violence code into the per-task label sets used for training.
"""

from __future__ import annotations

import csv
import hashlib
import json
from dataclasses import dataclass, field

# Fixed label sets, in the class-id order used everywhere downstream.
DETECTION_CLASSES = ("nSVR", "SVR")
VIOLENCE_CLASSES = ("NSE", "OTH", "PEN", "USC")
VICTIM_CLASSES = ("SLF", "nSLF")
GENDER_CLASSES = ("FEM", "MAL", "UNS")
PERPETRATOR_CLASSES = ("FAM", "FRN", "INT", "PNM", "POW", "STR")

RAW_VIOLENCE_CODES = tuple("abcdefghi")

# Raw annotation code -> collapsed violence category ("i" means no report).
_CODE_TO_VIOLENCE = {
    "a": "PEN",
    "b": "PEN",
    "c": "PEN",
    "d": "PEN",
    "e": "PEN",
    "f": "USC",
    "g": "NSE",
    "h": "OTH",
}

_CSV_COLUMNS = [
    "id",
    "text",
    "source_url",
    "violence_code",
    "victim",
    "gender",
    "perpetrator",
    "span",
]


class CorpusError(ValueError):
    """Malformed corpus data (bad line, duplicate id, unknown code, ...)."""


@dataclass(frozen=True)
class Document:
    id: str
    text: str
    source_url: str | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.id:
            raise CorpusError("document id must be nonempty")
        if not self.text.strip():
            raise CorpusError(f"document {self.id!r} has empty text")

    @property
    def is_retweet(self) -> bool:
        return self.text.strip().lower().startswith("rt @")


@dataclass(frozen=True)
class AnnotationRecord:
    doc_id: str
    raw_violence_code: str
    victim: str | None = None
    gender: str | None = None
    perpetrator: str | None = None
    perpetrator_span: tuple[int, int] | None = None

    def __post_init__(self):
        if self.raw_violence_code not in RAW_VIOLENCE_CODES:
            raise CorpusError(
                f"unknown violence code {self.raw_violence_code!r} for doc {self.doc_id!r}"
            )
        if self.raw_violence_code == "i":
            if any(x is not None for x in (self.victim, self.gender, self.perpetrator, self.perpetrator_span)):
                raise CorpusError(
                    f"doc {self.doc_id!r}: code 'i' forbids characterization fields"
                )
        else:
            if self.victim is not None and self.victim not in VICTIM_CLASSES:
                raise CorpusError(f"doc {self.doc_id!r}: bad victim {self.victim!r}")
            if self.gender is not None and self.gender not in GENDER_CLASSES:
                raise CorpusError(f"doc {self.doc_id!r}: bad gender {self.gender!r}")
            if self.perpetrator is not None and self.perpetrator not in PERPETRATOR_CLASSES:
                raise CorpusError(
                    f"doc {self.doc_id!r}: bad perpetrator {self.perpetrator!r}"
                )
        if self.perpetrator_span is not None:
            if self.perpetrator == "PNM":
                raise CorpusError(f"doc {self.doc_id!r}: PNM forbids a perpetrator span")
            s, e = self.perpetrator_span
            if not (0 <= s < e):
                raise CorpusError(f"doc {self.doc_id!r}: bad span [{s}, {e})")

    def validate_against(self, doc: Document) -> None:
        if self.perpetrator_span is not None and self.perpetrator_span[1] > len(doc.text):
            raise CorpusError(
                f"doc {doc.id!r}: span end {self.perpetrator_span[1]} beyond text length"
            )


@dataclass(frozen=True)
class TaskLabels:
    """Per-task labels after collapsing the raw annotation code."""

    detection: str
    violence: str | None = None
    victim: str | None = None
    gender: str | None = None
    perpetrator: str | None = None

    def __post_init__(self):
        if self.detection not in DETECTION_CLASSES:
            raise CorpusError(f"bad detection label {self.detection!r}")
        if self.detection == "nSVR" and any(
            x is not None for x in (self.violence, self.victim, self.gender, self.perpetrator)
        ):
            raise CorpusError("nSVR forbids characterization labels")


def collapse_labels(record: AnnotationRecord) -> TaskLabels:
    """Map the raw violence code onto the detection + violence label pair.

    Codes a..e collapse to PEN, f to USC, g to NSE, h to OTH; code i means
    the document reports nothing and every characterization field is absent.
    """
    code = record.raw_violence_code
    if code == "i":
        return TaskLabels(detection="nSVR")
    return TaskLabels(
        detection="SVR",
        violence=_CODE_TO_VIOLENCE[code],
        victim=record.victim,
        gender=record.gender,
        perpetrator=record.perpetrator,
    )


def _normalized_text_key(text: str) -> str:
    digest = hashlib.sha256(" ".join(text.lower().split()).encode("utf-8")).hexdigest()
    return "text:" + digest


def deduplicate(docs: list[Document]) -> list[Document]:
    """Drop retweets, then keep the first document per duplicate key.

    The duplicate key is the source URL when present, otherwise a hash of
    the whitespace-normalized, lowercased text.
    """
    seen: set[str] = set()
    kept = []
    for doc in docs:
        if doc.is_retweet:
            continue
        key = doc.source_url if doc.source_url else _normalized_text_key(doc.text)
        if key in seen:
            continue
        seen.add(key)
        kept.append(doc)
    return kept


# --- JSONL / CSV round-trip ------------------------------------------------


def _annotation_to_obj(ann: AnnotationRecord) -> dict:
    obj: dict = {"violence_code": ann.raw_violence_code}
    if ann.victim is not None:
        obj["victim"] = ann.victim
    if ann.gender is not None:
        obj["gender"] = ann.gender
    if ann.perpetrator is not None:
        obj["perpetrator"] = ann.perpetrator
    if ann.perpetrator_span is not None:
        obj["span"] = list(ann.perpetrator_span)
    return obj


def _annotation_from_obj(doc_id: str, obj: dict) -> AnnotationRecord:
    span = obj.get("span")
    if span is not None:
        if not (isinstance(span, (list, tuple)) and len(span) == 2):
            raise CorpusError(f"doc {doc_id!r}: span must be a [start, end] pair")
        span = (int(span[0]), int(span[1]))
    return AnnotationRecord(
        doc_id=doc_id,
        raw_violence_code=obj.get("violence_code", ""),
        victim=obj.get("victim"),
        gender=obj.get("gender"),
        perpetrator=obj.get("perpetrator"),
        perpetrator_span=span,
    )


def _record_from_obj(obj: dict, where: str):
    if "id" not in obj or "text" not in obj:
        raise CorpusError(f"{where}: missing required keys 'id'/'text'")
    doc = Document(id=str(obj["id"]), text=obj["text"], source_url=obj.get("source_url"))
    ann = None
    if obj.get("annotation") is not None:
        ann = _annotation_from_obj(doc.id, obj["annotation"])
        ann.validate_against(doc)
    return doc, ann


def read_jsonl(path) -> list[tuple[Document, AnnotationRecord | None]]:
    records = []
    ids: set[str] = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusError(f"{path}:{lineno}: malformed JSON ({exc.msg})") from exc
            try:
                doc, ann = _record_from_obj(obj, f"{path}:{lineno}")
            except CorpusError as exc:
                raise CorpusError(f"{path}:{lineno}: {exc}") from exc
            if doc.id in ids:
                raise CorpusError(f"{path}:{lineno}: duplicate id {doc.id!r}")
            ids.add(doc.id)
            records.append((doc, ann))
    return records


def write_jsonl(path, records) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for doc, ann in records:
            obj: dict = {"id": doc.id, "text": doc.text}
            if doc.source_url is not None:
                obj["source_url"] = doc.source_url
            if ann is not None:
                obj["annotation"] = _annotation_to_obj(ann)
            fh.write(json.dumps(obj, ensure_ascii=False) + "\n")


def read_csv(path) -> list[tuple[Document, AnnotationRecord | None]]:
    records = []
    ids: set[str] = set()
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        for lineno, row in enumerate(reader, start=2):
            try:
                obj: dict = {"id": row.get("id", ""), "text": row.get("text", "")}
                if row.get("source_url"):
                    obj["source_url"] = row["source_url"]
                if row.get("violence_code"):
                    ann_obj: dict = {"violence_code": row["violence_code"]}
                    for key in ("victim", "gender", "perpetrator"):
                        if row.get(key):
                            ann_obj[key] = row[key]
                    if row.get("span"):
                        start, _, end = row["span"].partition(":")
                        ann_obj["span"] = [int(start), int(end)]
                    obj["annotation"] = ann_obj
                doc, ann = _record_from_obj(obj, f"{path}:{lineno}")
            except (CorpusError, ValueError) as exc:
                raise CorpusError(f"{path}:{lineno}: {exc}") from exc
            if doc.id in ids:
                raise CorpusError(f"{path}:{lineno}: duplicate id {doc.id!r}")
            ids.add(doc.id)
            records.append((doc, ann))
    return records


def write_csv(path, records) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(_CSV_COLUMNS)
        for doc, ann in records:
            row = [doc.id, doc.text, doc.source_url or ""]
            if ann is None:
                row += ["", "", "", "", ""]
            else:
                span = ""
                if ann.perpetrator_span is not None:
                    span = f"{ann.perpetrator_span[0]}:{ann.perpetrator_span[1]}"
                row += [
                    ann.raw_violence_code,
                    ann.victim or "",
                    ann.gender or "",
                    ann.perpetrator or "",
                    span,
                ]
            writer.writerow(row)


def read_corpus(path, format: str = "jsonl"):
    """Read a corpus file; ``format`` is "jsonl" or "csv"."""
    if format == "jsonl":
        return read_jsonl(path)
    if format == "csv":
        return read_csv(path)
    raise CorpusError(f"unknown corpus format {format!r}")


def write_corpus(path, records, format: str = "jsonl") -> None:
    if format == "jsonl":
        write_jsonl(path, records)
    elif format == "csv":
        write_csv(path, records)
    else:
        raise CorpusError(f"unknown corpus format {format!r}")
