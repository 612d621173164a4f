"""Surface clean-up applied to optimized text before re-scoring it.

Substituting words can leave "a" in front of a vowel or a lowercase word
right after a full stop. :func:`correct_text` repairs those spots and tidies
spacing; it never adds or removes a word.
"""

from __future__ import annotations

import re

from . import metrics
from .errors import EmptyInput
from .metrics import MetricId
from .textmodel import ABBREVIATIONS, CLOSERS, OPENERS, TERMINATORS, compute_stats, tokenize

# words whose spelling misleads the letter rule; value is the article they take
ARTICLE_EXCEPTIONS = {
    "hour": "an", "honest": "an", "honor": "an", "heir": "an",
    "one": "a", "once": "a", "university": "a", "unique": "a", "unit": "a", "european": "a",
}
# inflected forms ("hours", "units", "honorable") follow their stem; "one" and
# "once" only match exactly so that "onerous" still takes "an"
EXACT_ONLY = frozenset({"one", "once"})

MULTI_SPACE_RE = re.compile(r" {2,}")
SPACE_BEFORE_PUNCT_RE = re.compile(r"[ \t]+(?=[,.;:!?])")
MAX_PASSES = 10


def article_for(word: str) -> str:
    w = word.lower()
    for stem, article in ARTICLE_EXCEPTIONS.items():
        if w == stem or (stem not in EXACT_ONLY and w.startswith(stem)):
            return article
    return "an" if w[:1] in "aeiou" else "a"


def _with_case(template: str, word: str) -> str:
    if template.isupper() and len(template) > 1:
        return word.upper()
    if template[:1].isupper():
        return word[:1].upper() + word[1:]
    return word


def _token_edits(text: str) -> list[tuple[int, int, str]]:
    doc = tokenize(text)
    edits = []
    tokens = doc.tokens
    for k, tok in enumerate(tokens[:-1]):
        if tok.normalized not in ("a", "an"):
            continue
        nxt = tokens[k + 1]
        if not nxt.is_word or not nxt.surface[:1].isalpha():
            continue
        if not text[tok.end:nxt.start].isspace():
            continue
        wanted = article_for(nxt.surface)
        if wanted != tok.normalized:
            edits.append((tok.start, tok.end, _with_case(tok.surface, wanted)))
    for k in _sentence_openers(text, tokens):
        tok = tokens[k]
        edits.append((tok.start, tok.start + 1, tok.surface[0].upper()))
    return sorted(edits)


def _sentence_openers(text: str, tokens) -> list[int]:
    """Lowercase words that follow a terminator and whitespace.

    The start of the text is left alone, and so is anything after an
    abbreviation such as "e.g." or after a closing quote.
    """
    found = []
    for k, tok in enumerate(tokens):
        if tok.surface not in TERMINATORS:
            continue
        if k > 0 and tokens[k - 1].end == tok.start and (
                tokens[k - 1].normalized in ABBREVIATIONS or "." in tokens[k - 1].surface):
            continue
        j = k
        quoted = False
        while j + 1 < len(tokens) and tokens[j + 1].start == tokens[j].end and (
                tokens[j + 1].surface in TERMINATORS or tokens[j + 1].surface in CLOSERS):
            j += 1
            quoted = quoted or tokens[j].surface in CLOSERS
        if quoted:  # dialogue: '"Why?" she asked.' keeps going
            continue
        if j + 1 >= len(tokens) or not text[tokens[j].end:tokens[j + 1].start].isspace():
            continue
        nxt = j + 1
        if tokens[nxt].surface in OPENERS and nxt + 1 < len(tokens) \
                and tokens[nxt + 1].start == tokens[nxt].end:
            nxt += 1
        if tokens[nxt].is_word and tokens[nxt].surface[:1].islower():
            found.append(nxt)
    return found


def _apply(text: str, edits: list[tuple[int, int, str]]) -> str:
    out, pos = [], 0
    for start, end, replacement in edits:
        if start < pos:  # an article that also opens a sentence: next pass
            continue
        out.append(text[pos:start])
        out.append(replacement)
        pos = end
    out.append(text[pos:])
    return "".join(out)


def _one_pass(text: str) -> str:
    try:
        text = _apply(text, _token_edits(text))
    except EmptyInput:
        return text
    text = MULTI_SPACE_RE.sub(" ", text)
    return SPACE_BEFORE_PUNCT_RE.sub("", text)


def correct_text(rendered: str) -> str:
    """Repair article agreement and sentence capitals, then tidy spacing.

    The rules run in that order and repeat until nothing changes, so the
    result is a fixpoint: correcting it again returns it unchanged.
    """
    text = rendered
    for _ in range(MAX_PASSES):
        fixed = _one_pass(text)
        if fixed == text:
            break
        text = fixed
    return text


def corrected_score(rendered: str, metric: MetricId | str, lexicons) -> tuple[str, float]:
    """The corrected text and its readability score under ``metric``."""
    corrected = correct_text(rendered)
    stats = compute_stats(tokenize(corrected), lexicons.easy_words)
    return corrected, metrics.score(metric, stats)
