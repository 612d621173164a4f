from pathlib import Path

import pytest

from readopt.lexicons import data_path, default_lexicons
from readopt.synonyms import ThesaurusProvider, load_thesaurus
from readopt.textmodel import CandidateSlot, tokenize

CORPUS = data_path("corpus")


def corpus_text(name: str) -> str:
    return (CORPUS / name).read_text(encoding="utf-8")


@pytest.fixture(scope="session")
def lex():
    return default_lexicons()


@pytest.fixture(scope="session")
def bundled_provider():
    return ThesaurusProvider(load_thesaurus(data_path("thesaurus_wordnet.tsv")))


@pytest.fixture(scope="session")
def corpus_paths() -> list[Path]:
    return sorted(CORPUS.glob("*.txt"))


def tiny_instance(text: str, synonyms: dict[str, list[str]], lex):
    """Document plus slots for the words listed in ``synonyms`` (in text order)."""
    doc = tokenize(text)
    slots = []
    for i, tok in enumerate(doc.tokens):
        if tok.normalized in synonyms:
            slots.append(CandidateSlot(i, tok.surface, tuple(synonyms[tok.normalized])))
    return doc, slots


TINY_TEXTS = [
    ("The enormous elephant walked slowly. It consumed vegetation constantly.",
     {"enormous": ["big", "huge", "gigantic"], "elephant": ["beast"], "walked": ["ambulated", "went"],
      "slowly": ["leisurely", "lazily"], "consumed": ["ate", "devoured"],
      "vegetation": ["plants", "greenery", "flora"], "constantly": ["always", "continually"]}),
    ("Scientists investigate complicated phenomena. Results frequently surprise everybody.",
     {"scientists": ["researchers"], "investigate": ["study", "examine", "explore"],
      "complicated": ["hard", "complex", "intricate"], "phenomena": ["events"],
      "results": ["outcomes", "findings"], "frequently": ["often"],
      "surprise": ["astonish", "amaze"], "everybody": ["everyone", "all"]}),
    ("The committee approved the proposal unanimously yesterday.",
     {"committee": ["board", "panel"], "approved": ["passed", "ratified", "endorsed"],
      "proposal": ["plan", "suggestion"], "unanimously": ["jointly"],
      "yesterday": ["recently"]}),
    ("Photosynthesis transforms sunlight into chemical energy. Plants require water.",
     {"photosynthesis": ["light synthesis"], "transforms": ["turns", "converts", "changes"],
      "sunlight": ["light", "daylight"], "chemical": ["synthetic"], "energy": ["power", "vigor"],
      "require": ["need", "demand", "necessitate"], "water": ["liquid"]}),
    ("Municipal authorities announced significant infrastructure improvements.",
     {"municipal": ["city", "civic", "urban"], "authorities": ["officials", "leaders"],
      "announced": ["said", "declared", "proclaimed"], "significant": ["big", "major", "considerable"],
      "infrastructure": ["roads"], "improvements": ["upgrades", "advances"]}),
]


# one line per acceptance criterion, echoed after the test run
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
