"""NSGA-II over synonym genomes.

Objectives, in order: the readability score (minimized or maximized), the
number of replaced words (minimized) and, optionally, the Word Mover's
Distance between the rendered and the original text (minimized).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import InvalidObjectives, NoCandidates, SearchSpaceTooLarge
from .ga import BRUTE_FORCE_LIMIT, FitnessContext, Genome, crossover, mutate, search_space_size
from .metrics import Direction, MetricId
from .textmodel import replacement_count
from .wmd import WmdObjective

PROFILES = ("conservative", "medium", "aggressive")


@dataclass(frozen=True)
class ObjectiveVector:
    values: tuple[float, ...]
    directions: tuple[Direction, ...]

    def __post_init__(self):
        if len(self.values) != len(self.directions):
            raise InvalidObjectives("values and directions differ in length")
        if len(self.values) not in (2, 3):
            raise InvalidObjectives("expected 2 or 3 objectives")
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        object.__setattr__(self, "directions", tuple(Direction(d) for d in self.directions))
        object.__setattr__(self, "_minimized",
                           tuple(v * d.sign() for v, d in zip(self.values, self.directions)))

    def minimized(self) -> tuple[float, ...]:
        """Values with maximized objectives negated."""
        return self._minimized


@dataclass
class RankedIndividual:
    genome: Genome
    objectives: ObjectiveVector
    rank: int = 0
    crowding: float = 0.0


@dataclass(frozen=True)
class ParetoSolution:
    genome: Genome
    objectives: ObjectiveVector
    rendered_text: str

    @property
    def readability(self) -> float:
        return self.objectives.values[0]

    @property
    def replacements(self) -> int:
        return int(self.objectives.values[1])

    @property
    def wmd(self) -> float | None:
        return self.objectives.values[2] if len(self.objectives.values) > 2 else None


def dominates(a: ObjectiveVector, b: ObjectiveVector) -> bool:
    """True when ``a`` is nowhere worse than ``b`` and strictly better somewhere."""
    if len(a.values) != len(b.values) or a.directions != b.directions:
        raise InvalidObjectives("objective vectors are not comparable")
    strictly = False
    for x, y in zip(a.minimized(), b.minimized()):
        if x > y:
            return False
        if x < y:
            strictly = True
    return strictly


def _objectives(item) -> ObjectiveVector:
    return item.objectives if isinstance(item, RankedIndividual) else item


def non_dominated_sort(pop: Sequence[RankedIndividual | ObjectiveVector]) -> list[list[int]]:
    """Fronts as index lists: front 0 is non-dominated, front k after removing fronts < k."""
    objs = [_objectives(p) for p in pop]
    n = len(objs)
    dominated_by: list[list[int]] = [[] for _ in range(n)]
    counts = [0] * n
    for i in range(n):
        for j in range(i + 1, n):
            if dominates(objs[i], objs[j]):
                dominated_by[i].append(j)
                counts[j] += 1
            elif dominates(objs[j], objs[i]):
                dominated_by[j].append(i)
                counts[i] += 1
    fronts = []
    current = [i for i in range(n) if counts[i] == 0]
    while current:
        fronts.append(current)
        nxt = []
        for i in current:
            for j in dominated_by[i]:
                counts[j] -= 1
                if counts[j] == 0:
                    nxt.append(j)
        current = sorted(nxt)
    return fronts


def crowding_distances(front: Sequence[RankedIndividual | ObjectiveVector]) -> list[float]:
    """Normalized neighbour-gap sum per point; boundary points get +inf."""
    objs = [_objectives(p).values for p in front]
    n = len(objs)
    if n <= 2:
        return [math.inf] * n
    dist = [0.0] * n
    for m in range(len(objs[0])):
        order = sorted(range(n), key=lambda i: (objs[i][m], i))
        lo, hi = objs[order[0]][m], objs[order[-1]][m]
        dist[order[0]] = dist[order[-1]] = math.inf
        if hi == lo:
            continue
        for pos in range(1, n - 1):
            i = order[pos]
            dist[i] += (objs[order[pos + 1]][m] - objs[order[pos - 1]][m]) / (hi - lo)
    return dist


@dataclass(frozen=True)
class MooConfig:
    population_size: int = 20
    parents_mating: int = 20
    generations: int = 900
    mutation_rate: float = 0.1
    seed: int = 0
    metric: MetricId = MetricId.FKGL_GRADE
    direction: Direction = Direction.MINIMIZE

    def __post_init__(self):
        if self.population_size < 2:
            raise ValueError("population_size must be >= 2")
        if not 2 <= self.parents_mating <= self.population_size:
            raise ValueError("need 2 <= parents_mating <= population_size")
        if not 0.0 <= self.mutation_rate <= 1.0:
            raise ValueError("mutation_rate must lie in [0, 1]")
        if self.generations < 0:
            raise ValueError("generations must be >= 0")
        object.__setattr__(self, "metric", MetricId(self.metric))
        object.__setattr__(self, "direction", Direction(self.direction))


class ObjectiveContext:
    """Maps a genome to its objective vector (WMD only when configured)."""

    def __init__(self, fitness: FitnessContext, direction: Direction | str,
                 wmd: WmdObjective | None = None):
        self.fitness = fitness
        self.direction = Direction(direction)
        self.wmd = wmd
        self.directions = (self.direction, Direction.MINIMIZE) + \
            ((Direction.MINIMIZE,) if wmd is not None else ())

    @property
    def slots(self):
        return self.fitness.slots

    def evaluate(self, genome: Sequence[int]) -> ObjectiveVector:
        values = [self.fitness.score(genome), replacement_count(genome)]
        if self.wmd is not None:
            values.append(self.wmd(self.fitness.render(genome), unchanged=not any(genome)))
        return ObjectiveVector(tuple(values), self.directions)


def _assign_rank_and_crowding(pop: list[RankedIndividual]) -> list[list[int]]:
    fronts = non_dominated_sort(pop)
    for rank, front in enumerate(fronts):
        for i, d in zip(front, crowding_distances([pop[i] for i in front])):
            pop[i].rank = rank
            pop[i].crowding = d
    return fronts


def _tournament(pop: list[RankedIndividual], rng: np.random.Generator) -> RankedIndividual:
    a, b = (pop[int(i)] for i in rng.integers(0, len(pop), size=2))
    if (a.rank, -a.crowding) <= (b.rank, -b.crowding):
        return a
    return b


def nsga2(cfg: MooConfig, ctx: ObjectiveContext,
          map_fn: Callable[[Callable, Iterable], Iterable] = map) -> list[ParetoSolution]:
    """Run NSGA-II and return the final non-dominated set, fewest replacements first.

    The unchanged text (the all-zero genome) seeds the first population, so
    the front always holds the zero-replacement end of the trade-off.
    Duplicate genomes are dropped whenever parents and children merge.
    """
    slots = ctx.slots
    if not slots:
        raise NoCandidates("no replaceable words with synonyms")
    rng = np.random.default_rng(cfg.seed)
    domains = np.array([s.domain_size for s in slots])
    cache: dict[Genome, ObjectiveVector] = {}

    def individuals(genomes: list[Genome]) -> list[RankedIndividual]:
        todo = sorted({g for g in genomes if g not in cache})
        for g, obj in zip(todo, map_fn(ctx.evaluate, todo)):
            cache[g] = obj
        return [RankedIndividual(g, cache[g]) for g in genomes]

    def random_genome() -> Genome:
        return tuple(int(g) for g in rng.integers(0, domains))

    genomes = [tuple([0] * len(slots))] + [random_genome() for _ in range(cfg.population_size - 1)]
    population = individuals(genomes)
    _assign_rank_and_crowding(population)
    for _ in range(cfg.generations):
        pool = [_tournament(population, rng) for _ in range(cfg.parents_mating)]
        children = []
        for _ in range(cfg.population_size):
            a, b = (pool[int(i)] for i in rng.integers(0, len(pool), size=2))
            child = crossover(a.genome, b.genome, rng)
            children.append(mutate(child, cfg.mutation_rate, rng, domains))
        merged = list(dict.fromkeys([p.genome for p in population] + children))
        # refill with fresh genomes; tiny search spaces may not have enough
        for _ in range(10 * cfg.population_size):
            if len(merged) >= cfg.population_size:
                break
            g = random_genome()
            if g not in merged:
                merged.append(g)
        combined = individuals(merged)
        fronts = _assign_rank_and_crowding(combined)
        survivors: list[int] = []
        for front in fronts:
            if len(survivors) + len(front) <= cfg.population_size:
                survivors.extend(front)
                continue
            by_crowding = sorted(front, key=lambda i: -combined[i].crowding)
            survivors.extend(by_crowding[:cfg.population_size - len(survivors)])
            break
        population = [RankedIndividual(combined[i].genome, combined[i].objectives) for i in survivors]
        _assign_rank_and_crowding(population)

    best: dict[tuple[float, ...], Genome] = {}
    for ind in population:
        if ind.rank == 0:
            key = ind.objectives.values
            best[key] = min(best.get(key, ind.genome), ind.genome)
    ordered = sorted(best.items(), key=lambda kv: (kv[0][1], kv[0][0] * ctx.direction.sign(), kv[0]))
    return [ParetoSolution(g, cache[g], ctx.fitness.render(g)) for _, g in ordered]


def brute_force_front(ctx: ObjectiveContext) -> list[ObjectiveVector]:
    """Exact Pareto set by enumerating every genome (small instances only)."""
    size = search_space_size(ctx.slots)
    if size > BRUTE_FORCE_LIMIT:
        raise SearchSpaceTooLarge(f"{size} genomes exceed the limit of {BRUTE_FORCE_LIMIT}")
    objs = list({ctx.evaluate(g): None for g in itertools.product(
        *(range(s.domain_size) for s in ctx.slots))})
    front = non_dominated_sort(objs)[0]
    return sorted((objs[i] for i in front), key=lambda o: (o.values[1], o.minimized()))


def select_profile(front: Sequence[ParetoSolution], profile: str,
                   direction: Direction | str = Direction.MINIMIZE) -> ParetoSolution:
    """Pick one solution from a front sorted by replacement count.

    conservative: fewest replacements; medium: the median replacement count;
    aggressive: best readability. The unchanged text is only chosen when the
    front holds nothing else.
    """
    if profile not in PROFILES:
        raise ValueError(f"unknown profile {profile!r}; choose from {', '.join(PROFILES)}")
    if not front:
        raise ValueError("empty front")
    direction = Direction(direction)
    changed = [s for s in front if s.replacements > 0] or list(front)
    changed.sort(key=lambda s: (s.replacements, s.readability * direction.sign()))
    if profile == "conservative":
        return changed[0]
    if profile == "medium":
        return changed[(len(changed) - 1) // 2]
    return min(changed, key=lambda s: (s.readability * direction.sign(), s.replacements))
