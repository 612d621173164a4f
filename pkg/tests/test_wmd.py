import math
from fractions import Fraction

import numpy as np
import pytest
from scipy.optimize import linprog

from readopt.errors import EmptyDistribution, NumericalError, OracleScaleExceeded
from readopt.synonyms import EmbeddingTable
from readopt.wmd import (
    Distribution,
    GroundCost,
    WmdObjective,
    distribution_distance,
    ground_cost,
    nbow,
    solve_transport,
    text_nbow,
    transport_oracle,
    wmd,
)


def dist(**weights):
    return Distribution(tuple(sorted(weights.items())))


def test_nbow_counts():
    d = nbow(["cat", "sat", "cat"], None)
    assert dict(d.entries) == pytest.approx({"cat": 2 / 3, "sat": 1 / 3})


def test_nbow_all_stop_words():
    with pytest.raises(EmptyDistribution):
        nbow(["the", "of"], None, stop_words=frozenset({"the", "of"}))


def test_nbow_drops_oov():
    table = EmbeddingTable.from_dict({"cat": (0, 1), "sat": (1, 0)})
    oov = set()
    d = nbow(["cat", "zebra", "sat", "sat"], table, oov=oov)
    assert dict(d.entries) == pytest.approx({"cat": 1 / 3, "sat": 2 / 3})
    assert oov == {"zebra"}


def test_distribution_validation():
    with pytest.raises(NumericalError):
        Distribution((("a", 0.5), ("b", 0.4)))
    with pytest.raises(NumericalError):
        Distribution((("a", 1.5), ("b", -0.5)))
    with pytest.raises(ValueError):
        Distribution((("a", 0.5), ("a", 0.5)))


def test_identity_transport():
    d = dist(a=0.25, b=0.75)
    cost = GroundCost(("a", "b"), ("a", "b"), np.array([[0.0, 3.0], [3.0, 0.0]]))
    total, plan = solve_transport(d, d, cost)
    assert total == 0.0
    assert plan.check(d, d)
    assert transport_oracle(d, d, cost) == 0.0


def test_single_edge_euclidean():
    table = EmbeddingTable.from_dict({"a": (0, 0), "c": (3, 4)})
    d, d2 = dist(a=1.0), dist(c=1.0)
    total, plan = solve_transport(d, d2, ground_cost(d, d2, table))
    assert total == pytest.approx(5.0, abs=1e-12)
    assert plan.flow.tolist() == [[1.0]]


def test_forced_plan():
    d, d2 = dist(a=0.5, b=0.5), dist(c=1.0)
    cost = GroundCost(("a", "b"), ("c",), np.array([[1.0], [2.0]]))
    total, plan = solve_transport(d, d2, cost)
    assert total == pytest.approx(1.5, abs=1e-12)
    assert plan.check(d, d2)
    assert transport_oracle(d, d2, cost) == pytest.approx(1.5, abs=1e-12)


def test_oracle_scale_guard():
    d = Distribution(tuple((f"w{i}", 1 / 7) for i in range(7)))
    cost = GroundCost(d.words, d.words, np.zeros((7, 7)))
    with pytest.raises(OracleScaleExceeded):
        transport_oracle(d, d, cost)
    d = dist(a=1 / 61, b=60 / 61)
    cost = GroundCost(d.words, d.words, np.zeros((2, 2)))
    with pytest.raises(OracleScaleExceeded):
        transport_oracle(d, d, cost)


def rational_distribution(rng, prefix, q):
    k = int(rng.integers(1, 7))
    cuts = np.sort(rng.choice(np.arange(1, q), size=min(k - 1, q - 1), replace=False))
    counts = np.diff(np.concatenate([[0], cuts, [q]]))
    return Distribution(tuple((f"{prefix}{i}", float(Fraction(int(c), q))) for i, c in enumerate(counts)))


@pytest.mark.parametrize("seed", range(100))
def test_oracle_agreement(seed):
    rng = np.random.default_rng(seed)
    q = int(rng.choice([2, 3, 4, 5, 6, 8, 10, 12]))
    d, d2 = rational_distribution(rng, "x", q), rational_distribution(rng, "y", q)
    cost = GroundCost(d.words, d2.words, rng.uniform(0, 10, size=(len(d), len(d2))))
    total, plan = solve_transport(d, d2, cost)
    assert plan.check(d, d2)
    assert total == pytest.approx(transport_oracle(d, d2, cost), abs=1e-6)


@pytest.mark.parametrize("seed", range(20))
def test_matches_linear_program(seed):
    rng = np.random.default_rng(1000 + seed)
    m, n = rng.integers(1, 25, size=2)
    a, b = rng.random(m), rng.random(n)
    d = Distribution(tuple((f"r{i}", x) for i, x in enumerate(a / a.sum())))
    d2 = Distribution(tuple((f"c{j}", x) for j, x in enumerate(b / b.sum())))
    c = rng.uniform(0, 5, size=(m, n))
    cost = GroundCost(d.words, d2.words, c)
    total, plan = solve_transport(d, d2, cost)
    assert plan.check(d, d2)
    a_eq = np.vstack([np.kron(np.eye(m), np.ones(n)), np.kron(np.ones(m), np.eye(n))])
    ref = linprog(c.ravel(), A_eq=a_eq, b_eq=np.concatenate([d.weights, d2.weights]), method="highs")
    assert total == pytest.approx(ref.fun, abs=1e-7)


def random_fixture(seed):
    rng = np.random.default_rng(seed)
    vocab = [f"w{i}" for i in range(8)]
    table = EmbeddingTable(tuple(vocab), rng.normal(size=(8, 3)).astype(np.float32))
    texts = [" ".join(rng.choice(vocab, size=int(rng.integers(1, 7)))) for _ in range(3)]
    return table, texts


@pytest.mark.parametrize("seed", range(100))
def test_metric_axioms(seed):
    table, (a, b, c) = random_fixture(seed)
    ab, ba = wmd(a, b, table), wmd(b, a, table)
    assert ab >= 0
    assert wmd(a, a, table) == 0
    assert ab == pytest.approx(ba, abs=1e-9)
    assert wmd(a, c, table) <= ab + wmd(b, c, table) + 1e-7


@pytest.mark.parametrize("seed", range(30))
def test_shared_mass_cancellation_is_exact(seed):
    table, (a, b, _) = random_fixture(seed)
    d, d2 = text_nbow(a, table), text_nbow(b, table)
    full, _ = solve_transport(d, d2, ground_cost(d, d2, table))
    assert distribution_distance(d, d2, table) == pytest.approx(full, abs=1e-9)


def test_unequal_lengths():
    table = EmbeddingTable.from_dict({
        "considering": (1.0, 0.0, 0.5), "taking": (0.8, 0.2, 0.4),
        "into": (0.0, 1.0, 0.0), "account": (0.9, 0.1, 0.7),
    })
    value = wmd("considering", "taking into account", table)
    assert math.isfinite(value) and value > 0
    assert wmd("considering", "taking into account", table, stop_words=frozenset({"into"})) < value


def test_empty_distribution_propagates():
    table = EmbeddingTable.from_dict({"cat": (0, 1)})
    with pytest.raises(EmptyDistribution):
        wmd("the", "cat", table, stop_words=frozenset({"the"}))


def test_objective_cache_and_degenerate_guard():
    table = EmbeddingTable.from_dict({"cat": (0, 1), "dog": (1, 1), "ran": (2, 0)})
    obj = WmdObjective("The cat ran.", table, stop_words=frozenset({"the"}))
    assert obj("The cat ran.") == 0.0
    first = obj("The dog ran.")
    assert first == pytest.approx(0.5, abs=1e-9)
    assert obj._cache["The dog ran."] == first
    empty = WmdObjective("The.", table, stop_words=frozenset({"the"}))
    assert empty("The.", unchanged=True) == 0.0
    assert empty("The cat.") == math.inf


def test_bundled_embeddings_scale():
    from readopt.lexicons import data_path, default_lexicons
    from readopt.synonyms import load_embeddings
    table = load_embeddings(data_path("embeddings_wordnet96.bin"))
    lex = default_lexicons()
    text = data_path("corpus/05_engineering.txt").read_text(encoding="utf-8")
    words = [w for w in text.split() if w.strip(".,").lower() in table]
    assert words
    changed = text.replace(words[0], words[-1], 1)
    assert wmd(text, changed, table, lex.stop_words) >= 0
