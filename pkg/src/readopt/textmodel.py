"""Tokenized documents with their statistics, plus rendering genomes back to text.

A :class:`Document` keeps the raw text together with character offsets for
every token, so the inter-token separators can always be recovered and the
text reproduced byte-for-byte.
"""

from __future__ import annotations

import enum
import math
import re
import unicodedata
from functools import lru_cache
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .errors import EmptyInput, InvalidGenome

TOKEN_RE = re.compile(
    r"""
    (?P<abbr>(?:[^\W\d_]\.){2,})                  # e.g. / i.e. / U.S.
    |(?P<number>\d+(?:[.,]\d+)+(?![^\W_]))        # 168,000 / 5.9
    |(?P<alnum>[^\W_]+(?:['’\-][^\W_]+)*)    # words, plain digits, m3
    |(?P<punct>\S)
    """,
    re.VERBOSE,
)

TERMINATORS = frozenset(".!?")
CLOSERS = frozenset("\"')]}’”")
OPENERS = frozenset("\"'([{‘“")
ABBREVIATIONS = frozenset({"dr", "mr", "mrs", "ms", "st", "vs", "etc", "e.g", "i.e"})

VOWEL_GROUP_RE = re.compile(r"[aeiouy]+")
VOWELS = frozenset("aeiouy")

EASY_SUFFIXES = ("s", "es", "ed", "ing", "d")


class TokenKind(str, enum.Enum):
    WORD = "word"
    NUMBER = "number"
    PUNCTUATION = "punctuation"


@dataclass(frozen=True)
class Token:
    surface: str
    normalized: str
    kind: TokenKind
    sentence_index: int
    leading_capital: bool
    start: int
    end: int

    @property
    def is_word(self) -> bool:
        return self.kind is TokenKind.WORD


@dataclass(frozen=True)
class Document:
    text: str
    tokens: tuple[Token, ...]
    sentence_count: int

    @property
    def separators(self) -> tuple[str, ...]:
        """Spans around the tokens; ``len(tokens) + 1`` entries."""
        seps = []
        pos = 0
        for tok in self.tokens:
            seps.append(self.text[pos:tok.start])
            pos = tok.end
        seps.append(self.text[pos:])
        return tuple(seps)

    def words(self) -> list[Token]:
        return [t for t in self.tokens if t.is_word]


@dataclass(frozen=True)
class TextStats:
    words: int
    sentences: int
    characters: int
    syllables: int
    polysyllables: int
    difficult_words: int

    def scaled(self, k: int) -> "TextStats":
        return TextStats(*(k * v for v in self.as_tuple()))

    def as_tuple(self) -> tuple[int, ...]:
        return (self.words, self.sentences, self.characters, self.syllables,
                self.polysyllables, self.difficult_words)

    def __add__(self, other: "TextStats") -> "TextStats":
        return TextStats(*(a + b for a, b in zip(self.as_tuple(), other.as_tuple())))


@dataclass(frozen=True)
class CandidateSlot:
    token_index: int
    original: str
    synonyms: tuple[str, ...] = field(default=())

    @property
    def domain_size(self) -> int:
        """Number of admissible gene values, including 0 (keep original)."""
        return len(self.synonyms) + 1


def normalize_word(surface: str) -> str:
    return surface.lower().replace("’", "'")


def _kind(match: re.Match) -> TokenKind:
    group = match.lastgroup
    if group == "punct":
        return TokenKind.PUNCTUATION
    text = match.group()
    if any(c.isalpha() for c in text):
        return TokenKind.WORD
    return TokenKind.NUMBER


def _next_sentence_start(text: str, raw: list[tuple[str, int, int, TokenKind]], i: int) -> int | None:
    """Index of the token opening a new sentence after the terminator ``raw[i]``."""
    surface, start, _, _ = raw[i]
    if i > 0:
        prev, _, prev_end, prev_kind = raw[i - 1]
        if surface == "." and prev_end == start and prev_kind is TokenKind.WORD \
                and normalize_word(prev).rstrip(".") in ABBREVIATIONS:
            return None
    # swallow runs like "?!" or ".)" glued to the terminator
    j = i
    while j + 1 < len(raw) and raw[j + 1][1] == raw[j][2] and (
            raw[j + 1][0] in TERMINATORS or raw[j + 1][0] in CLOSERS):
        j += 1
    if j + 1 == len(raw):
        return None
    nxt, nstart, nend, _ = raw[j + 1]
    gap = text[raw[j][2]:nstart]
    if not gap.isspace():
        return None
    if nxt in OPENERS and j + 2 < len(raw) and raw[j + 2][1] == nend:
        nxt = raw[j + 2][0]
    return j + 1 if nxt[:1].isupper() else None


def tokenize(raw: str) -> Document:
    """Split ``raw`` into typed tokens, each tagged with its sentence index.

    A sentence ends at ``.``, ``!`` or ``?`` followed by whitespace and an
    uppercase letter (an opening quote or bracket may sit in between), or by
    the end of the input. A period glued to one of the abbreviations in
    :data:`ABBREVIATIONS` never ends a sentence.
    """
    if not raw or raw.isspace():
        raise EmptyInput("input text is empty")
    raw_tokens = [(m.group(), m.start(), m.end(), _kind(m)) for m in TOKEN_RE.finditer(raw)]
    starts = set()
    for i, (surface, _, _, _) in enumerate(raw_tokens):
        if surface in TERMINATORS:
            nxt = _next_sentence_start(raw, raw_tokens, i)
            if nxt is not None:
                starts.add(nxt)
    tokens = []
    sentence = 0
    for i, (surface, start, end, kind) in enumerate(raw_tokens):
        if i in starts:
            sentence += 1
        tokens.append(Token(
            surface=surface,
            normalized=normalize_word(surface),
            kind=kind,
            sentence_index=sentence,
            leading_capital=surface[:1].isupper(),
            start=start,
            end=end,
        ))
    return Document(text=raw, tokens=tuple(tokens), sentence_count=sentence + 1)


def count_syllables(word: str) -> int:
    """Vowel-group syllable estimate, never below 1.

    Counts maximal runs of ``aeiouy`` and drops one for a silent final ``e``
    unless the word ends in consonant + ``le`` (``table``).
    """
    letters = "".join(
        c for c in unicodedata.normalize("NFKD", word.lower()) if "a" <= c <= "z"
    )
    count = len(VOWEL_GROUP_RE.findall(letters))
    if count > 1 and letters.endswith("e"):
        consonant_le = len(letters) >= 3 and letters.endswith("le") and letters[-3] not in VOWELS
        if not consonant_le:
            count -= 1
    return max(count, 1)


def is_easy_word(word: str, easy_words: frozenset[str] | set[str]) -> bool:
    w = normalize_word(word)
    if w in easy_words:
        return True
    for suffix in EASY_SUFFIXES:
        if w.endswith(suffix) and len(w) > len(suffix) and w[: -len(suffix)] in easy_words:
            return True
    return False


def word_stats(surface: str, easy_words) -> TextStats:
    """Statistics contributed by a single word token (sentences = 0)."""
    if isinstance(easy_words, frozenset):
        return _cached_word_stats(surface, easy_words)
    return _word_stats(surface, easy_words)


def _word_stats(surface: str, easy_words) -> TextStats:
    syl = count_syllables(surface)
    return TextStats(
        words=1,
        sentences=0,
        characters=sum(1 for c in surface if c.isalnum()),
        syllables=syl,
        polysyllables=int(syl >= 3),
        difficult_words=int(not is_easy_word(surface, easy_words)),
    )


_cached_word_stats = lru_cache(maxsize=65536)(_word_stats)


def compute_stats(doc: Document, easy_words) -> TextStats:
    words = characters = syllables = polysyllables = difficult = 0
    for tok in doc.tokens:
        if not tok.is_word:
            continue
        ws = word_stats(tok.surface, easy_words)
        words += 1
        characters += ws.characters
        syllables += ws.syllables
        polysyllables += ws.polysyllables
        difficult += ws.difficult_words
    return TextStats(words, doc.sentence_count, characters, syllables, polysyllables, difficult)


def _sentence_initial(doc: Document) -> set[int]:
    """Token indices of the first word of each sentence."""
    seen = set()
    initial = set()
    for i, tok in enumerate(doc.tokens):
        if tok.is_word and tok.sentence_index not in seen:
            seen.add(tok.sentence_index)
            initial.add(i)
    return initial


def identify_candidates(doc: Document, stop_words, prepositions) -> list[CandidateSlot]:
    """Word positions eligible for substitution, in document order.

    Function words and numbers are skipped, and so is anything that
    looks like a proper name: a capitalized word inside a sentence, or a
    sentence-initial word that also shows up capitalized mid-sentence.
    """
    initial = _sentence_initial(doc)
    capitalized_inside = {
        t.normalized for i, t in enumerate(doc.tokens)
        if t.is_word and t.leading_capital and i not in initial
    }
    slots = []
    for i, tok in enumerate(doc.tokens):
        if not tok.is_word:
            continue
        if tok.normalized in stop_words or tok.normalized in prepositions:
            continue
        if tok.leading_capital:
            if i not in initial or tok.normalized in capitalized_inside:
                continue
        slots.append(CandidateSlot(token_index=i, original=tok.surface))
    return slots


def duplicate_to_min_sentences(doc: Document, minimum: int) -> Document:
    """Repeat the whole text the fewest times that yields ``minimum`` sentences."""
    r = max(1, math.ceil(minimum / doc.sentence_count))
    if r == 1:
        return doc
    body = doc.text
    # copies must stay separate sentences even if the text has no trailing space
    joiner = "" if body[-1:].isspace() or body[:1].isspace() else " "
    tokens = []
    text_parts = []
    offset = 0
    for copy in range(r):
        part = body if copy == 0 else joiner + body
        shift = offset + (0 if copy == 0 else len(joiner))
        for tok in doc.tokens:
            tokens.append(Token(
                surface=tok.surface,
                normalized=tok.normalized,
                kind=tok.kind,
                sentence_index=tok.sentence_index + copy * doc.sentence_count,
                leading_capital=tok.leading_capital,
                start=tok.start + shift,
                end=tok.end + shift,
            ))
        text_parts.append(part)
        offset += len(part)
    return Document(text="".join(text_parts), tokens=tuple(tokens),
                    sentence_count=r * doc.sentence_count)


def match_capitalization(original: str, substitute: str) -> str:
    if original[:1].isupper():
        return substitute[:1].upper() + substitute[1:]
    return substitute


def _check_genome(slots: Sequence[CandidateSlot], genome: Sequence[int]) -> None:
    if len(genome) != len(slots):
        raise InvalidGenome(f"genome has {len(genome)} genes for {len(slots)} slots")
    for i, (slot, gene) in enumerate(zip(slots, genome)):
        if not 0 <= int(gene) <= len(slot.synonyms):
            raise InvalidGenome(f"gene {i} = {gene} outside [0, {len(slot.synonyms)}]")


def substitutions(slots: Sequence[CandidateSlot], genome: Sequence[int]) -> list[tuple[int, str, str]]:
    """``(token_index, original, substitute)`` for every nonzero gene."""
    _check_genome(slots, genome)
    out = []
    for slot, gene in zip(slots, genome):
        if gene:
            synonym = " ".join(slot.synonyms[int(gene) - 1].split())
            out.append((slot.token_index, slot.original,
                        match_capitalization(slot.original, synonym)))
    return out


def render(doc: Document, slots: Sequence[CandidateSlot], genome: Sequence[int]) -> str:
    """Text with every nonzero gene's synonym put in place of its token."""
    subs = substitutions(slots, genome)
    if not subs:
        return doc.text
    pieces = []
    pos = 0
    for index, _, substitute in sorted(subs):
        tok = doc.tokens[index]
        pieces.append(doc.text[pos:tok.start])
        pieces.append(substitute)
        pos = tok.end
    pieces.append(doc.text[pos:])
    return "".join(pieces)


def replacement_count(genome: Iterable[int]) -> int:
    return sum(1 for g in genome if g)
