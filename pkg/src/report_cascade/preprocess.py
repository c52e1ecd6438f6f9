"""Text cleaning, tokenization, rule-based POS tagging, span mapping.

Cleaning lowercases, strips URLs / emoji / ASCII smileys / the "#metoo"
token, de-hashes remaining hashtags and collapses whitespace.  An offset
map from cleaned characters back to the original string is kept so
annotation spans (anchored to raw text) can be aligned with tokens.

No stopword removal and no stemming are offered anywhere: both hurt
downstream accuracy on this kind of text, so they are deliberately
unavailable rather than optional.
"""

from __future__ import annotations

import string
from dataclasses import dataclass
from typing import Callable, Sequence

# Coarse part-of-speech tags (closed set).
NOUN = "NOUN"
VERB = "VERB"
PRON3 = "PRON3"
PRONOTHER = "PRONOTHER"
ADJ = "ADJ"
ADV = "ADV"
DET = "DET"
PREP = "PREP"
CONJ = "CONJ"
NUM = "NUM"
PUNCT = "PUNCT"
OTHER = "OTHER"

POS_TAGS = frozenset(
    {NOUN, VERB, PRON3, PRONOTHER, ADJ, ADV, DET, PREP, CONJ, NUM, PUNCT, OTHER}
)

PosTagger = Callable[[Sequence[str]], "list[str]"]

# Emoji codepoint ranges: emoticons, pictographs, transport, flags.
_EMOJI_RANGES = (
    (0x1F300, 0x1F5FF),
    (0x1F600, 0x1F64F),
    (0x1F680, 0x1F6FF),
    (0x1F1E6, 0x1F1FF),
)

# ASCII smileys (post-lowercase forms) and their reversals, matched as
# whole whitespace-delimited tokens.
_SMILEYS = frozenset(
    {
        ":)", ":-)", ":(", ":-(", ";)", ";-)", ":d", ":p", ":-d", ":-p",
        "(:", "(-:", "):", ")-:", "(;", "(-;", "d:", "p:", "d-:", "p-:",
    }
)

_PUNCT_CHARS = frozenset(string.punctuation)


def _is_emoji(ch: str) -> bool:
    cp = ord(ch)
    return any(lo <= cp <= hi for lo, hi in _EMOJI_RANGES)


def _is_url_token(tok: str) -> bool:
    if tok.startswith("www.") and len(tok) > 4:
        return True
    head, sep, _ = tok.partition("://")
    return bool(sep) and head.isalnum() and head[:1].isalpha()


def _clean_token(tok: str) -> str | None:
    """Normalize one whitespace-delimited token; None drops it."""
    if tok == "#metoo":
        return None
    tok = tok.lstrip("#")
    if not tok:
        return None
    if _is_url_token(tok):
        return None
    if tok in _SMILEYS:
        return None
    return tok


def clean_with_offsets(text: str) -> tuple[str, list[int]]:
    """Clean ``text`` and return (cleaned, offsets) where offsets[i] is the
    index in the original string that produced cleaned character i."""
    # Lowercase char by char so the offset map stays exact even when a
    # character lowercases to more than one codepoint.
    chars: list[tuple[str, int]] = []
    for i, ch in enumerate(text):
        if _is_emoji(ch):
            chars.append((" ", i))
            continue
        for low in ch.lower():
            chars.append((low, i))

    # Split into tokens on whitespace, keeping per-char origins.
    tokens: list[list[tuple[str, int]]] = []
    current: list[tuple[str, int]] = []
    for ch, idx in chars:
        if ch.isspace():
            if current:
                tokens.append(current)
                current = []
        else:
            current.append((ch, idx))
    if current:
        tokens.append(current)

    out_chars: list[str] = []
    out_offsets: list[int] = []
    for tok_pairs in tokens:
        tok = "".join(ch for ch, _ in tok_pairs)
        kept = _clean_token(tok)
        if kept is None:
            continue
        kept_pairs = tok_pairs[len(tok) - len(kept):]  # only '#' prefixes are stripped
        if out_chars:
            out_chars.append(" ")
            out_offsets.append(kept_pairs[0][1])
        for ch, idx in kept_pairs:
            out_chars.append(ch)
            out_offsets.append(idx)
    return "".join(out_chars), out_offsets


def clean(text: str) -> str:
    return clean_with_offsets(text)[0]


@dataclass
class TokenizedDocument:
    doc_id: str
    tokens: list[str]
    pos: list[str]
    char_spans: list[tuple[int, int]]      # into the cleaned text
    raw_char_spans: list[tuple[int, int]]  # into the original text

    def __post_init__(self):
        n = len(self.tokens)
        if not (len(self.pos) in (0, n) and len(self.char_spans) == n == len(self.raw_char_spans)):
            raise ValueError("token/pos/span lengths disagree")


def _split_token(tok: str, start: int) -> list[tuple[str, int, int]]:
    """Split leading/trailing punctuation off a whitespace token.

    Apostrophes are never split so contractions stay single tokens.
    """
    lo, hi = 0, len(tok)
    lead: list[tuple[str, int, int]] = []
    while lo < hi and tok[lo] in _PUNCT_CHARS and tok[lo] != "'":
        lead.append((tok[lo], start + lo, start + lo + 1))
        lo += 1
    trail: list[tuple[str, int, int]] = []
    while hi > lo and tok[hi - 1] in _PUNCT_CHARS and tok[hi - 1] != "'":
        trail.append((tok[hi - 1], start + hi - 1, start + hi))
        hi -= 1
    middle = []
    if hi > lo:
        middle.append((tok[lo:hi], start + lo, start + hi))
    return lead + middle + list(reversed(trail))


def tokenize(text: str, doc_id: str = "") -> TokenizedDocument:
    """Tokenize cleaned text: whitespace split, then peel edge punctuation."""
    pieces: list[tuple[str, int, int]] = []
    i = 0
    n = len(text)
    while i < n:
        if text[i].isspace():
            i += 1
            continue
        j = i
        while j < n and not text[j].isspace():
            j += 1
        pieces.extend(_split_token(text[i:j], i))
        i = j
    return TokenizedDocument(
        doc_id=doc_id,
        tokens=[t for t, _, _ in pieces],
        pos=[],
        char_spans=[(s, e) for _, s, e in pieces],
        raw_char_spans=[(s, e) for _, s, e in pieces],
    )


# --- rule-based POS tagging -------------------------------------------------

_PRON3_WORDS = frozenset(
    """he she it they him them his her hers its their theirs himself herself
    itself themselves someone somebody anyone anybody everyone everybody
    nobody whoever""".split()
)

_PRONOTHER_WORDS = frozenset(
    """i you we me us my mine your yours our ours myself yourself ourselves
    yourselves who whom""".split()
)

_DET_WORDS = frozenset(
    """a an the this that these those some any no every each either neither
    another both all""".split()
)

_PREP_WORDS = frozenset(
    """in on at by for from to of with without about against between into
    through during before after above below under over off out up down near
    behind beside toward towards upon onto within across around along""".split()
)

_CONJ_WORDS = frozenset(
    """and or but nor so yet because although though while if when since
    unless until whereas as""".split()
)

_AUX_VERBS = frozenset(
    """is am are was were be been being have has had do does did will would
    can could may might shall should must won't don't didn't doesn't can't
    couldn't wouldn't shouldn't isn't aren't wasn't weren't hasn't haven't
    hadn't""".split()
)

# Lemmas recognized as verbs, including every violence-related lexicon verb
# so its inflections tag as VERB for the tuple filter.
VERB_LEMMAS = frozenset(
    """abuse assault attack beat bully catcall flirt fondle force fuck grab
    grope harass hit hurt kiss masturbate molest pull rape rub slap stalk
    threat touch use whistle
    go get say tell take make know think see come want look give find walk
    move stop start run talk call ask work feel try leave put mean keep let
    begin seem help show hear play move live believe happen write sit stand
    lose pay meet include continue learn change lead understand watch follow
    speak report share scream yell shout cry push shove corner trap follow
    """.split()
)


def _verb_stem_candidates(word: str, suffix: str) -> list[str]:
    stem = word[: -len(suffix)]
    cands = [stem]
    if len(stem) >= 2 and stem[-1] == stem[-2]:
        cands.append(stem[:-1])  # doubling: grabb -> grab
    cands.append(stem + "e")     # e-drop: rap -> rape
    if suffix in ("ed", "es") and stem.endswith("i"):
        cands.append(stem[:-1] + "y")  # bullied -> bully
    return cands


def _is_lexicon_verb_form(word: str) -> bool:
    if word in VERB_LEMMAS:
        return True
    for suffix in ("ing", "ed", "es", "s", "d"):
        if word.endswith(suffix) and len(word) > len(suffix) + 1:
            if any(c in VERB_LEMMAS for c in _verb_stem_candidates(word, suffix)):
                return True
    return False


def rule_pos_tagger(tokens: Sequence[str]) -> list[str]:
    """Deterministic lexicon-plus-suffix tagger over the coarse tagset."""
    tags = []
    for tok in tokens:
        word = tok.lower()
        if all(ch in _PUNCT_CHARS for ch in word):
            tags.append(PUNCT)
        elif word.replace(",", "").replace(".", "").isdigit():
            tags.append(NUM)
        elif word in _PRON3_WORDS:
            tags.append(PRON3)
        elif word in _PRONOTHER_WORDS:
            tags.append(PRONOTHER)
        elif word in _DET_WORDS:
            tags.append(DET)
        elif word in _PREP_WORDS:
            tags.append(PREP)
        elif word in _CONJ_WORDS:
            tags.append(CONJ)
        elif word in _AUX_VERBS or _is_lexicon_verb_form(word):
            tags.append(VERB)
        elif word.endswith("ly") and len(word) > 3:
            tags.append(ADV)
        elif word.endswith(("ful", "ous", "ive", "able", "ible")) and len(word) > 4:
            tags.append(ADJ)
        else:
            tags.append(NOUN)
    return tags


def tag_pos(tokens: Sequence[str], tagger: PosTagger = rule_pos_tagger) -> list[str]:
    tags = tagger(tokens)
    if len(tags) != len(tokens):
        raise ValueError("tagger returned wrong number of tags")
    bad = set(tags) - POS_TAGS
    if bad:
        raise ValueError(f"tagger produced unknown tags {sorted(bad)}")
    return tags


def prepare(doc_id: str, text: str, tagger: PosTagger = rule_pos_tagger) -> TokenizedDocument:
    """Clean, tokenize and tag a raw document, wiring spans back to it."""
    cleaned, offsets = clean_with_offsets(text)
    tdoc = tokenize(cleaned, doc_id=doc_id)
    tdoc.raw_char_spans = [
        (offsets[s], offsets[e - 1] + 1) for s, e in tdoc.char_spans
    ]
    tdoc.pos = tag_pos(tdoc.tokens, tagger)
    return tdoc


def map_span(raw_span: tuple[int, int], tdoc: TokenizedDocument) -> tuple[int, int] | None:
    """Smallest token range whose raw spans overlap ``raw_span``; None if empty."""
    lo, hi = raw_span
    first = last = None
    for i, (s, e) in enumerate(tdoc.raw_char_spans):
        if s < hi and lo < e:
            if first is None:
                first = i
            last = i
    if first is None:
        return None
    return (first, last + 1)
