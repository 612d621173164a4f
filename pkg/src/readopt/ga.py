"""Single-objective genetic search over synonym choices.

A genome holds one gene per populated slot: 0 keeps the original word and
``k`` picks the slot's k-th synonym. The loop is steady-state: the best
``parents_mating`` genomes breed, their children replace the worst part of
the population, and the current best genome is never discarded.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from . import metrics
from .errors import InvalidGenome, NoCandidates, SearchSpaceTooLarge
from .metrics import Direction, MetricId
from .textmodel import (
    CandidateSlot,
    Document,
    TextStats,
    compute_stats,
    TERMINATORS,
    render,
    tokenize,
)

Genome = tuple[int, ...]
BRUTE_FORCE_LIMIT = 10**6


@dataclass(frozen=True)
class GaConfig:
    population_size: int = 20
    parents_mating: int = 10
    generations: int = 300
    mutation_rate: float = 0.1
    seed: int = 0
    metric: MetricId = MetricId.FKGL_GRADE
    direction: Direction = Direction.MINIMIZE

    def __post_init__(self):
        if self.population_size < 2:
            raise ValueError("population_size must be >= 2")
        if not 0 < self.parents_mating <= self.population_size:
            raise ValueError("need 0 < parents_mating <= population_size")
        if not 0.0 <= self.mutation_rate <= 1.0:
            raise ValueError("mutation_rate must lie in [0, 1]")
        if self.generations < 0:
            raise ValueError("generations must be >= 0")
        object.__setattr__(self, "metric", MetricId(self.metric))
        object.__setattr__(self, "direction", Direction(self.direction))

    @property
    def offspring_per_generation(self) -> int:
        return min(max(1, self.population_size - self.parents_mating), self.population_size - 1)


@dataclass
class GaResult:
    best_genome: Genome
    best_score: float
    history: list[float] = field(default_factory=list)
    evaluations: int = 0


class FitnessContext:
    """Scores genomes of one document under one metric.

    Statistics are additive over word tokens, so a genome's stats are the
    original stats plus one precomputed delta per nonzero gene. A gene whose
    synonym contains a sentence terminator, or whose substitution alone
    changes the sentence count, is marked unsafe; genomes
    using it are rendered and re-tokenized instead. Without terminators in the
    synonym, a substitution can only move the sentence boundary next to its
    own slot, so checking each substitution alone is enough.
    """

    def __init__(self, doc: Document, slots: Sequence[CandidateSlot], metric: MetricId | str,
                 easy_words):
        self.doc = doc
        self.slots = tuple(slots)
        self.metric = MetricId(metric)
        self.easy_words = easy_words
        self.base_stats = compute_stats(doc, easy_words)
        self.domains = tuple(s.domain_size for s in self.slots)
        self._deltas: list[list[TextStats | None]] = []
        for i, slot in enumerate(self.slots):
            row: list[TextStats | None] = [TextStats(0, 0, 0, 0, 0, 0)]
            for k in range(1, slot.domain_size):
                row.append(self._delta(i, k))
            self._deltas.append(row)

    def _delta(self, i: int, k: int) -> TextStats | None:
        # a terminator inside a synonym can interact with neighbouring slots
        if any(c in TERMINATORS for c in self.slots[i].synonyms[k - 1]):
            return None
        genome = [0] * len(self.slots)
        genome[i] = k
        sub = tokenize(render(self.doc, self.slots, genome))
        if sub.sentence_count != self.doc.sentence_count:
            return None
        stats = compute_stats(sub, self.easy_words)
        return TextStats(*(a - b for a, b in zip(stats.as_tuple(), self.base_stats.as_tuple())))

    def check(self, genome: Sequence[int]) -> None:
        if len(genome) != len(self.slots):
            raise InvalidGenome(f"genome has {len(genome)} genes for {len(self.slots)} slots")
        for i, g in enumerate(genome):
            if not 0 <= g < self.domains[i]:
                raise InvalidGenome(f"gene {i} = {g} outside [0, {self.domains[i] - 1}]")

    def stats(self, genome: Sequence[int]) -> TextStats:
        self.check(genome)
        total = self.base_stats
        for i, g in enumerate(genome):
            if g:
                delta = self._deltas[i][g]
                if delta is None:
                    return self.rendered_stats(genome)
                total = total + delta
        return total

    def rendered_stats(self, genome: Sequence[int]) -> TextStats:
        return compute_stats(tokenize(render(self.doc, self.slots, genome)), self.easy_words)

    def score(self, genome: Sequence[int]) -> float:
        return metrics.score(self.metric, self.stats(genome))

    def render(self, genome: Sequence[int]) -> str:
        return render(self.doc, self.slots, genome)


def evaluate(genome: Sequence[int], ctx: FitnessContext) -> float:
    return ctx.score(genome)


def init_population(cfg: GaConfig, slots: Sequence[CandidateSlot],
                    rng: np.random.Generator) -> list[Genome]:
    if not slots:
        raise NoCandidates("no replaceable words with synonyms")
    highs = np.array([s.domain_size for s in slots])
    return [tuple(int(g) for g in rng.integers(0, highs)) for _ in range(cfg.population_size)]


def crossover(a: Sequence[int], b: Sequence[int], rng: np.random.Generator,
              point: int | None = None) -> Genome:
    """Single-point crossover: head of ``a`` up to ``point``, tail of ``b``."""
    if len(a) != len(b):
        raise InvalidGenome("crossover parents differ in length")
    if len(a) < 2:
        return tuple(a)
    if point is None:
        point = int(rng.integers(1, len(a)))
    return tuple(a[:point]) + tuple(b[point:])


def mutate(genome: Sequence[int], rate: float, rng: np.random.Generator,
           domains: Sequence[int]) -> Genome:
    """Resample each gene from its domain with probability ``rate``."""
    n = len(genome)
    mask = rng.random(n) < rate
    fresh = rng.integers(0, np.asarray(domains)) if n else np.array([], dtype=int)
    return tuple(int(fresh[i]) if mask[i] else int(genome[i]) for i in range(n))


def _rank(scores: Sequence[float], direction: Direction) -> list[int]:
    sign = direction.sign()
    return sorted(range(len(scores)), key=lambda i: (sign * scores[i], i))


def evolve(cfg: GaConfig, ctx: FitnessContext,
           map_fn: Callable[[Callable, Iterable], Iterable] = map) -> GaResult:
    """Run the genetic search; ``map_fn`` may evaluate fitness concurrently."""
    if not ctx.slots:
        raise NoCandidates("no replaceable words with synonyms")
    rng = np.random.default_rng(cfg.seed)
    cache: dict[Genome, float] = {}

    def score_all(genomes: list[Genome]) -> list[float]:
        todo = sorted({g for g in genomes if g not in cache})
        for g, s in zip(todo, map_fn(ctx.score, todo)):
            cache[g] = s
        return [cache[g] for g in genomes]

    population = init_population(cfg, ctx.slots, rng)
    scores = score_all(population)
    order = _rank(scores, cfg.direction)
    history = [scores[order[0]]]
    n_children = cfg.offspring_per_generation
    for _ in range(cfg.generations):
        parents = [population[i] for i in order[:cfg.parents_mating]]
        children = []
        for _ in range(n_children):
            if len(parents) > 1:
                a, b = rng.choice(len(parents), size=2, replace=False)
            else:
                a = b = 0
            child = crossover(parents[a], parents[b], rng)
            children.append(mutate(child, cfg.mutation_rate, rng, ctx.domains))
        survivors = order[:cfg.population_size - n_children]
        population = [population[i] for i in survivors] + children
        scores = [scores[i] for i in survivors] + score_all(children)
        order = _rank(scores, cfg.direction)
        history.append(scores[order[0]])
    best = order[0]
    return GaResult(best_genome=population[best], best_score=scores[best],
                    history=history, evaluations=len(cache))


def search_space_size(slots: Sequence[CandidateSlot]) -> int:
    return math.prod(s.domain_size for s in slots)


def brute_force_optimum(slots: Sequence[CandidateSlot], ctx: FitnessContext,
                        direction: Direction | str) -> tuple[Genome, float]:
    """Exhaustive search; ties go to the lexicographically smallest genome."""
    direction = Direction(direction)
    size = search_space_size(slots)
    if size > BRUTE_FORCE_LIMIT:
        raise SearchSpaceTooLarge(f"{size} genomes exceed the limit of {BRUTE_FORCE_LIMIT}")
    best_genome, best_score = None, None
    for genome in itertools.product(*(range(s.domain_size) for s in slots)):
        s = ctx.score(genome)
        if best_score is None or direction.better(s, best_score):
            best_genome, best_score = genome, s
    return best_genome, best_score
