"""Bundled word lists for candidate filtering and difficult-word counts."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from pathlib import Path

from .textmodel import normalize_word


def parse_word_list(text: str) -> frozenset[str]:
    words = set()
    for line in text.splitlines():
        entry = line.split("#", 1)[0].strip()
        if entry:
            words.add(normalize_word(entry))
    return frozenset(words)


def load_word_list(path: str | Path) -> frozenset[str]:
    return parse_word_list(Path(path).read_text(encoding="utf-8"))


def data_path(name: str) -> Path:
    return Path(str(resources.files("readopt") / "data" / name))


@dataclass(frozen=True)
class Lexicons:
    stop_words: frozenset[str]
    prepositions: frozenset[str]
    easy_words: frozenset[str]

    @classmethod
    def from_paths(cls, stop_words=None, prepositions=None, easy_words=None) -> "Lexicons":
        base = default_lexicons()
        return cls(
            stop_words=load_word_list(stop_words) if stop_words else base.stop_words,
            prepositions=load_word_list(prepositions) if prepositions else base.prepositions,
            easy_words=load_word_list(easy_words) if easy_words else base.easy_words,
        )


@lru_cache(maxsize=1)
def default_lexicons() -> Lexicons:
    return Lexicons(
        stop_words=load_word_list(data_path("stopwords.txt")),
        prepositions=load_word_list(data_path("prepositions.txt")),
        easy_words=load_word_list(data_path("dale_chall_easy.txt")),
    )
