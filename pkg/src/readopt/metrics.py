"""Readability formulas over :class:`~readopt.textmodel.TextStats`.

Every formula divides integer counts directly (``words / sentences``, never
``words * (1 / sentences)``) so that scaling all counts by the same factor
reproduces the score bit for bit.
"""

from __future__ import annotations

import enum
import math

from .errors import DegenerateStats, InsufficientSentences
from .textmodel import TextStats

SMOG_MIN_SENTENCES = 30


class MetricId(str, enum.Enum):
    DCRF = "dcrf"
    SMOG = "smog"
    ARI = "ari"
    FLESCH_PRINTED = "flesch"
    FKGL_GRADE = "fkgl"


class Direction(str, enum.Enum):
    MINIMIZE = "min"
    MAXIMIZE = "max"

    def better(self, a: float, b: float) -> bool:
        """True when ``a`` is strictly better than ``b``."""
        return a < b if self is Direction.MINIMIZE else a > b

    def sign(self) -> int:
        return 1 if self is Direction.MINIMIZE else -1


def _check(stats: TextStats) -> None:
    if stats.words <= 0 or stats.sentences <= 0:
        raise DegenerateStats(f"need words > 0 and sentences > 0, got {stats}")


def dcrf(stats: TextStats) -> float:
    """Dale-Chall score without the +3.6365 adjustment."""
    _check(stats)
    return 0.1579 * (stats.difficult_words * 100 / stats.words) + 0.0496 * (stats.words / stats.sentences)


def smog(stats: TextStats) -> float:
    if stats.sentences < SMOG_MIN_SENTENCES:
        raise InsufficientSentences(
            f"SMOG needs at least {SMOG_MIN_SENTENCES} sentences, got {stats.sentences}")
    return 1.0430 * math.sqrt(stats.polysyllables * 30 / stats.sentences) + 3.1291


def ari(stats: TextStats) -> float:
    _check(stats)
    return 4.71 * (stats.characters / stats.words) + 0.5 * (stats.words / stats.sentences) - 21.43


def flesch_printed(stats: TextStats) -> float:
    """Flesch reading ease; higher is easier."""
    _check(stats)
    return 206.835 - 1.015 * (stats.words / stats.sentences) - 84.6 * (stats.syllables / stats.words)


def fkgl_grade(stats: TextStats) -> float:
    """Flesch-Kincaid grade level; lower is easier."""
    _check(stats)
    return 0.39 * (stats.words / stats.sentences) + 11.8 * (stats.syllables / stats.words) - 15.59


FORMULAS = {
    MetricId.DCRF: dcrf,
    MetricId.SMOG: smog,
    MetricId.ARI: ari,
    MetricId.FLESCH_PRINTED: flesch_printed,
    MetricId.FKGL_GRADE: fkgl_grade,
}


def smog_factor(sentences: int) -> int:
    """Copies of a text needed to reach the SMOG sentence minimum."""
    return max(1, math.ceil(SMOG_MIN_SENTENCES / sentences))


def score(metric: MetricId | str, stats: TextStats) -> float:
    """Score ``stats`` under ``metric``.

    SMOG is scored on the whole-text repetition that reaches 30 sentences,
    which is exactly ``stats`` scaled by :func:`smog_factor`.
    """
    metric = MetricId(metric)
    if metric is MetricId.SMOG and stats.sentences > 0:
        stats = stats.scaled(smog_factor(stats.sentences))
    return FORMULAS[metric](stats)


# FKGL grade bands used to color use cases
BANDS = (
    (15.0, "magenta"),
    (12.0, "red"),
    (9.0, "black"),
    (6.0, "blue"),
)


def band(fkgl: float) -> str:
    for floor, name in BANDS:
        if fkgl >= floor:
            return name
    return "below-6"
