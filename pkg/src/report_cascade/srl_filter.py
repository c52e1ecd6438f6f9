"""Shallow agent-verb-detail pattern filter over tokenized documents.

A document passes when some token is an inflected form of a violence-related
lexicon verb, tagged VERB, preceded (within the same clause) by a span
containing a noun or third-person pronoun, followed by a nonempty detail
span, and not negated or preceded by a modal in the three tokens before the
verb.  Clause boundaries are the sentence edges and punctuation tokens.
"""

from __future__ import annotations

from dataclasses import dataclass

from .preprocess import NOUN, PRON3, PUNCT, VERB, TokenizedDocument

# The 27 lexicon lemmas with explicit inflection tables (base, third-person
# singular, past, gerund; irregulars spelled out).
VERB_LEXICON: dict[str, tuple[str, ...]] = {
    "abuse": ("abuse", "abuses", "abused", "abusing"),
    "assault": ("assault", "assaults", "assaulted", "assaulting"),
    "attack": ("attack", "attacks", "attacked", "attacking"),
    "beat": ("beat", "beats", "beaten", "beating"),
    "bully": ("bully", "bullies", "bullied", "bullying"),
    "catcall": ("catcall", "catcalls", "catcalled", "catcalling"),
    "flirt": ("flirt", "flirts", "flirted", "flirting"),
    "fondle": ("fondle", "fondles", "fondled", "fondling"),
    "force": ("force", "forces", "forced", "forcing"),
    "fuck": ("fuck", "fucks", "fucked", "fucking"),
    "grab": ("grab", "grabs", "grabbed", "grabbing"),
    "grope": ("grope", "gropes", "groped", "groping"),
    "harass": ("harass", "harasses", "harassed", "harassing"),
    "hit": ("hit", "hits", "hitting"),
    "hurt": ("hurt", "hurts", "hurting"),
    "kiss": ("kiss", "kisses", "kissed", "kissing"),
    "masturbate": ("masturbate", "masturbates", "masturbated", "masturbating"),
    "molest": ("molest", "molests", "molested", "molesting"),
    "pull": ("pull", "pulls", "pulled", "pulling"),
    "rape": ("rape", "rapes", "raped", "raping"),
    "rub": ("rub", "rubs", "rubbed", "rubbing"),
    "slap": ("slap", "slaps", "slapped", "slapping"),
    "stalk": ("stalk", "stalks", "stalked", "stalking"),
    "threat": ("threat", "threats", "threated", "threating"),
    "touch": ("touch", "touches", "touched", "touching"),
    "use": ("use", "uses", "used", "using"),
    "whistle": ("whistle", "whistles", "whistled", "whistling"),
}

_ALL_FORMS = frozenset(form for forms in VERB_LEXICON.values() for form in forms)

NEGATION_WORDS = frozenset(
    "not never no didn't don't doesn't won't can't couldn't wouldn't shouldn't".split()
)
MODAL_WORDS = frozenset("can could may might shall should will would must".split())

_NEGATION_WINDOW = 3


class FilterError(ValueError):
    pass


@dataclass(frozen=True)
class PatternTuple:
    agent: tuple[int, int]   # token range, entirely before the verb
    verb: int                # token index
    detail: tuple[int, int]  # token range, entirely after the verb

    def __post_init__(self):
        if not (self.agent[0] <= self.agent[1] <= self.verb):
            raise FilterError("agent must end at or before the verb")
        if not (self.verb < self.detail[0] < self.detail[1]):
            raise FilterError("detail must be a nonempty range after the verb")


def inflect(lemma: str) -> list[str]:
    try:
        return list(VERB_LEXICON[lemma])
    except KeyError:
        raise FilterError(f"unknown lexicon lemma {lemma!r}") from None


def _is_negating(token: str) -> bool:
    return token in NEGATION_WORDS or token.endswith("n't")


def extract_tuples(tdoc: TokenizedDocument) -> list[PatternTuple]:
    tokens = [t.lower() for t in tdoc.tokens]
    pos = tdoc.pos
    n = len(tokens)
    boundaries = [i for i, p in enumerate(pos) if p == PUNCT]
    tuples = []
    for v in range(n):
        if tokens[v] not in _ALL_FORMS or pos[v] != VERB:
            continue
        window = tokens[max(0, v - _NEGATION_WINDOW): v]
        if any(_is_negating(w) or w in MODAL_WORDS for w in window):
            continue
        agent_start = 0
        for b in boundaries:
            if b < v:
                agent_start = b + 1
            else:
                break
        if agent_start >= v:
            continue
        agent_pos = pos[agent_start:v]
        if not any(p in (NOUN, PRON3) for p in agent_pos):
            continue
        detail_end = n
        for b in boundaries:
            if b > v:
                detail_end = b
                break
        if detail_end <= v + 1:
            continue
        tuples.append(PatternTuple(agent=(agent_start, v), verb=v, detail=(v + 1, detail_end)))
    return tuples


def passes_filter(tdoc: TokenizedDocument) -> bool:
    return bool(extract_tuples(tdoc))
