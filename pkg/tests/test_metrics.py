import math

import pytest

from readopt import metrics
from readopt.errors import DegenerateStats, InsufficientSentences
from readopt.metrics import Direction, MetricId
from readopt.textmodel import TextStats, compute_stats, duplicate_to_min_sentences, tokenize


def stats(words=1, sentences=1, characters=0, syllables=1, polysyllables=0, difficult=0):
    return TextStats(words, sentences, characters, syllables, polysyllables, difficult)


@pytest.mark.parametrize("s,expected", [
    (stats(words=3, sentences=1, difficult=0), 0.1488),
    (stats(words=100, sentences=5, difficult=50, syllables=100), 8.887),
    (stats(words=100, sentences=10, difficult=100, syllables=100), 16.286),
])
def test_dcrf(s, expected):
    assert metrics.dcrf(s) == pytest.approx(expected, abs=1e-9)


def test_smog_hand_values():
    assert metrics.smog(stats(sentences=30, polysyllables=0)) == pytest.approx(3.1291, abs=1e-9)
    assert metrics.smog(stats(words=30, syllables=90, sentences=30, polysyllables=30)) == \
        pytest.approx(1.0430 * math.sqrt(30) + 3.1291, abs=1e-9)
    assert metrics.smog(stats(words=30, syllables=90, sentences=30, polysyllables=30)) == \
        pytest.approx(8.8419, abs=1e-4)


def test_smog_duplicated_five_sentences():
    five = stats(words=50, syllables=80, sentences=5, polysyllables=10)
    assert metrics.smog(five.scaled(6)) == pytest.approx(11.208, abs=1e-3)
    assert metrics.score(MetricId.SMOG, five) == metrics.smog(five.scaled(6))


def test_smog_needs_thirty_sentences():
    with pytest.raises(InsufficientSentences):
        metrics.smog(stats(sentences=29))


def test_ari_hand_values():
    assert metrics.ari(stats(words=3, sentences=1, characters=9, syllables=3)) == pytest.approx(-5.80, abs=1e-9)
    assert metrics.ari(stats(words=100, sentences=10, characters=500, syllables=100)) == pytest.approx(7.12, abs=1e-9)


def test_flesch_hand_values():
    assert metrics.flesch_printed(stats(words=3, syllables=3)) == pytest.approx(119.19, abs=1e-9)
    assert metrics.flesch_printed(stats(words=100, sentences=10, syllables=170)) == pytest.approx(52.865, abs=1e-9)
    assert metrics.flesch_printed(stats(words=1, sentences=1, syllables=1)) == pytest.approx(121.22, abs=1e-9)


def test_fkgl_hand_value():
    assert metrics.fkgl_grade(stats(words=3, syllables=3)) == pytest.approx(-2.62, abs=1e-9)


@pytest.mark.parametrize("fn", [metrics.dcrf, metrics.ari, metrics.flesch_printed, metrics.fkgl_grade])
def test_degenerate(fn):
    with pytest.raises(DegenerateStats):
        fn(stats(words=0, syllables=0))
    with pytest.raises(DegenerateStats):
        fn(stats(sentences=0))


def test_direction():
    assert Direction.MINIMIZE.better(1.0, 2.0)
    assert Direction.MAXIMIZE.better(2.0, 1.0)
    assert not Direction.MINIMIZE.better(1.0, 1.0)


def test_cli_names_map_to_metrics():
    assert MetricId("fkgl") is MetricId.FKGL_GRADE
    assert MetricId("flesch") is MetricId.FLESCH_PRINTED


@pytest.mark.parametrize("value,name", [(16.0, "magenta"), (12.0, "red"), (10.5, "black"), (6.0, "blue"), (3.0, "below-6")])
def test_bands(value, name):
    assert metrics.band(value) == name


def test_direction_sanity_on_stats():
    before = stats(words=10, sentences=1, characters=60, syllables=18, polysyllables=2, difficult=3)
    # one word (7 chars, 3 syllables, difficult) becomes a 3-char, 1-syllable easy word
    after = TextStats(10, 1, 56, 16, 1, 2)
    for m in (MetricId.ARI, MetricId.FKGL_GRADE, MetricId.DCRF):
        assert metrics.score(m, after) <= metrics.score(m, before)
    assert metrics.score(MetricId.FLESCH_PRINTED, after) >= metrics.score(MetricId.FLESCH_PRINTED, before)


def test_duplication_invariance(lex, corpus_paths):
    for path in corpus_paths:
        doc = tokenize(path.read_text(encoding="utf-8"))
        for k in (2, 3):
            dup = duplicate_to_min_sentences(doc, k * doc.sentence_count)
            a, b = compute_stats(doc, lex.easy_words), compute_stats(dup, lex.easy_words)
            for m in MetricId:
                assert metrics.score(m, b) == pytest.approx(metrics.score(m, a), abs=1e-9)
