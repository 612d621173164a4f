"""``readopt`` command line: scoring, optimization, Pareto fronts, the
experiment harness and data converters.

Exit codes: 0 success, 2 input error, 3 no replaceable words, 4 synonym
provider or embedding file could not be loaded.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import hashlib
import json
import logging
import statistics
import sys
import time
from dataclasses import asdict, dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Sequence

from . import __version__, metrics
from .errors import (
    EmptyDistribution,
    FormatError,
    NoCandidates,
    ProviderError,
    ReadoptError,
)
from .ga import FitnessContext, GaConfig, evolve
from .lexicons import Lexicons, data_path
from .metrics import Direction, MetricId
from .moo import PROFILES, MooConfig, ObjectiveContext, ParetoSolution, nsga2, select_profile
from .postprocess import corrected_score
from .synonyms import (
    DEFAULT_CAP,
    EmbeddingKnnProvider,
    HttpProvider,
    SynonymProviderKind,
    ThesaurusProvider,
    convert_wordnet,
    load_embeddings,
    load_thesaurus,
    populate_slots,
    save_embeddings,
)
from .textmodel import compute_stats, identify_candidates, substitutions, tokenize
from .wmd import WmdObjective, wmd

log = logging.getLogger("readopt")

SCHEMA_VERSION = 1
EXIT_OK, EXIT_INPUT, EXIT_NO_CANDIDATES, EXIT_PROVIDER = 0, 2, 3, 4
BUNDLED = "bundled"
BUNDLED_FILES = {
    "thesaurus": "thesaurus_wordnet.tsv",
    "embeddings": "embeddings_wordnet96.bin",
}
EXPERIMENT_COLUMNS = ("use_case", "provider", "metric", "direction", "run", "seed",
                      "before", "after", "improvement", "gain", "replacements",
                      "band_before", "band_after")
SUMMARY_COLUMNS = ("provider", "metric", "direction", "runs", "positive",
                   "min", "median", "max", "mean", "std")


class InputError(ReadoptError):
    """Bad command-line input (unreadable file, inconsistent flags)."""


# -- shared helpers ----------------------------------------------------------------

def resolve(path: str | None, kind: str) -> Path | None:
    if path is None:
        return None
    return data_path(BUNDLED_FILES[kind]) if path == BUNDLED else Path(path)


def read_input(path: str) -> str:
    try:
        if path == "-":
            return sys.stdin.read()
        return Path(path).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc


def digest(text: str) -> str:
    return "sha256:" + hashlib.sha256(text.encode("utf-8")).hexdigest()


def lexicons_from(args) -> Lexicons:
    try:
        return Lexicons.from_paths(args.stop_words, args.prepositions, args.easy_words)
    except OSError as exc:
        raise InputError(f"cannot read word list: {exc}") from exc


@lru_cache(maxsize=8)
def _embeddings(path: str):
    try:
        return load_embeddings(path)
    except (OSError, FormatError, ValueError) as exc:
        raise ProviderError(f"cannot load embeddings {path}: {exc}") from exc


@lru_cache(maxsize=8)
def _thesaurus(path: str):
    try:
        return load_thesaurus(path)
    except (OSError, FormatError) as exc:
        raise ProviderError(f"cannot load thesaurus {path}: {exc}") from exc


def build_provider(kind: str, thesaurus: str | None, embeddings: str | None, endpoint: str | None,
                   cache_dir: str | None, knn: int):
    kind = SynonymProviderKind(kind)
    if kind is SynonymProviderKind.THESAURUS:
        return ThesaurusProvider(_thesaurus(str(resolve(thesaurus or BUNDLED, "thesaurus"))))
    if kind is SynonymProviderKind.EMBEDDING_KNN:
        return EmbeddingKnnProvider(_embeddings(str(resolve(embeddings or BUNDLED, "embeddings"))), n=knn)
    if not endpoint:
        raise ProviderError("--provider http needs --endpoint URL")
    return HttpProvider(endpoint, cache_dir=cache_dir)


def text_score(text: str, metric: MetricId, lex: Lexicons) -> float:
    return metrics.score(metric, compute_stats(tokenize(text), lex.easy_words))


def fkgl_band(text: str, lex: Lexicons) -> str:
    return metrics.band(text_score(text, MetricId.FKGL_GRADE, lex))


@dataclass
class Problem:
    text: str
    lexicons: Lexicons
    fitness: FitnessContext


def prepare(text: str, lex: Lexicons, metric: MetricId, provider, cap: int) -> Problem:
    doc = tokenize(text)
    slots = identify_candidates(doc, lex.stop_words, lex.prepositions)
    slots = populate_slots(doc, slots, provider, cap=cap)
    if not slots:
        raise NoCandidates("no candidate word has a synonym from this provider")
    return Problem(text, lex, FitnessContext(doc, slots, metric, lex.easy_words))


def provider_params(args) -> dict:
    return {
        "provider": args.provider,
        "thesaurus": args.thesaurus if args.provider == "thesaurus" else None,
        "embeddings": args.embeddings,
        "endpoint": args.endpoint if args.provider == "http" else None,
        "knn": args.knn if args.provider == "knn" else None,
        "cap": args.cap,
    }


def dump_json(obj, fh) -> None:
    json.dump(obj, fh, indent=2, ensure_ascii=False, allow_nan=True)
    fh.write("\n")


def emit(obj, output: str | None) -> None:
    if output:
        with open(output, "w", encoding="utf-8") as fh:
            dump_json(obj, fh)
    else:
        dump_json(obj, sys.stdout)


# -- score ---------------------------------------------------------------------------

def cmd_score(args) -> int:
    text = read_input(args.input)
    lex = lexicons_from(args)
    doc = tokenize(text)
    stats = compute_stats(doc, lex.easy_words)
    scores = {m.name.lower(): metrics.score(m, stats) for m in MetricId}
    factor = metrics.smog_factor(stats.sentences)
    report = {
        "schema_version": SCHEMA_VERSION,
        "input_digest": digest(text),
        "stats": asdict(stats),
        "scores": scores,
        "smog_note": (f"text has {stats.sentences} sentences; SMOG scored on {factor} copies"
                      if factor > 1 else "text has at least 30 sentences"),
        "band": metrics.band(scores["fkgl_grade"]),
    }
    emit(report, args.output)
    return EXIT_OK


# -- optimize ----------------------------------------------------------------------

@dataclass
class RunReport:
    input_digest: str
    params: dict
    original_text: str
    optimized_text: str
    corrected_text: str
    replacements: list[dict]
    scores: dict
    band: dict
    wmd_to_original: float | None = None
    wall_time_ms: int = 0
    schema_version: int = SCHEMA_VERSION

    def to_dict(self) -> dict:
        d = asdict(self)
        return {"schema_version": d.pop("schema_version"), **d}


def cmd_optimize(args) -> int:
    start = time.perf_counter()
    text = read_input(args.input)
    lex = lexicons_from(args)
    metric = MetricId(args.metric)
    cfg = GaConfig(population_size=args.population, parents_mating=args.parents,
                   generations=args.generations, mutation_rate=args.mutation_rate,
                   seed=args.seed, metric=metric, direction=Direction(args.direction))
    provider = build_provider(args.provider, args.thesaurus, args.embeddings, args.endpoint,
                              args.cache_dir, args.knn)
    problem = prepare(text, lex, metric, provider, args.cap)
    result = evolve(cfg, problem.fitness)
    genome = result.best_genome
    optimized = problem.fitness.render(genome)
    corrected, corrected_value = corrected_score(optimized, metric, lex)
    distance = None
    if args.embeddings:
        stop = frozenset() if args.wmd_keep_stopwords else lex.stop_words
        try:
            distance = wmd(text, optimized, _embeddings(str(resolve(args.embeddings, "embeddings"))), stop)
        except EmptyDistribution:
            log.warning("no in-vocabulary words; WMD left empty")
    report = RunReport(
        input_digest=digest(text),
        params={
            "command": "optimize",
            "metric": metric.value,
            "direction": cfg.direction.value,
            **provider_params(args),
            "seed": cfg.seed,
            "population": cfg.population_size,
            "parents": cfg.parents_mating,
            "generations": cfg.generations,
            "mutation_rate": cfg.mutation_rate,
            "slots": len(problem.fitness.slots),
        },
        original_text=text,
        optimized_text=optimized,
        corrected_text=corrected,
        replacements=[{"token_index": i, "original": o, "substitute": s}
                      for i, o, s in substitutions(problem.fitness.slots, genome)],
        scores={
            "raw_before": text_score(text, metric, lex),
            "raw_after": result.best_score,
            "corrected_after": corrected_value,
        },
        band={"before": fkgl_band(text, lex), "after": fkgl_band(corrected, lex)},
        wmd_to_original=distance,
    )
    report.wall_time_ms = round((time.perf_counter() - start) * 1000)
    emit(report.to_dict(), args.output)
    return EXIT_OK


# -- pareto --------------------------------------------------------------------------

def parse_objectives(spec: str) -> tuple[MetricId, bool]:
    parts = [p.strip() for p in spec.split(",")]
    if len(parts) not in (2, 3) or parts[1] != "repl" or (len(parts) == 3 and parts[2] != "wmd"):
        raise InputError(f"--objectives must look like METRIC,repl[,wmd]; got {spec!r}")
    try:
        metric = MetricId(parts[0])
    except ValueError:
        raise InputError(f"unknown metric {parts[0]!r}") from None
    return metric, len(parts) == 3


def solution_record(sol: ParetoSolution, text_file: str) -> dict:
    return {
        "replacements": sol.replacements,
        "readability": sol.readability,
        "wmd": sol.wmd,
        "genome": list(sol.genome),
        "text_file": text_file,
    }


def cmd_pareto(args) -> int:
    start = time.perf_counter()
    text = read_input(args.input)
    lex = lexicons_from(args)
    metric, use_wmd = parse_objectives(args.objectives)
    if use_wmd and not args.embeddings:
        raise InputError("the wmd objective needs --embeddings (use 'bundled' for the fixture)")
    direction = Direction(args.direction)
    cfg = MooConfig(population_size=args.population, parents_mating=args.parents,
                    generations=args.generations, mutation_rate=args.mutation_rate,
                    seed=args.seed, metric=metric, direction=direction)
    provider = build_provider(args.provider, args.thesaurus, args.embeddings, args.endpoint,
                              args.cache_dir, args.knn)
    problem = prepare(text, lex, metric, provider, args.cap)
    objective = None
    if use_wmd:
        stop = frozenset() if args.wmd_keep_stopwords else lex.stop_words
        objective = WmdObjective(text, _embeddings(str(resolve(args.embeddings, "embeddings"))), stop)
    front = nsga2(cfg, ObjectiveContext(problem.fitness, direction, objective))

    out = Path(args.out_dir)
    (out / "texts").mkdir(parents=True, exist_ok=True)
    rows, records = [], []
    for k, sol in enumerate(front):
        name = f"texts/solution_{k:03d}.txt"
        (out / name).write_text(sol.rendered_text, encoding="utf-8")
        records.append(solution_record(sol, name))
        row = [str(sol.replacements), f"{sol.readability:.6f}"]
        if use_wmd:
            row.append(f"{sol.wmd:.6f}")
        rows.append("\t".join(row + [name]))
    header = ["replacements", metric.value] + (["wmd"] if use_wmd else []) + ["text_file"]
    (out / "front.tsv").write_text("\t".join(header) + "\n" + "".join(r + "\n" for r in rows),
                                   encoding="utf-8")
    report = {
        "schema_version": SCHEMA_VERSION,
        "input_digest": digest(text),
        "params": {
            "command": "pareto",
            "objectives": args.objectives,
            "direction": direction.value,
            **provider_params(args),
            "wmd_keep_stopwords": args.wmd_keep_stopwords,
            "seed": cfg.seed,
            "population": cfg.population_size,
            "parents": cfg.parents_mating,
            "generations": cfg.generations,
            "mutation_rate": cfg.mutation_rate,
            "slots": len(problem.fitness.slots),
        },
        "original_score": text_score(text, metric, lex),
        "front": records,
        "profile": None,
        "wall_time_ms": 0,
    }
    if args.profile:
        chosen = select_profile(front, args.profile, direction)
        name = f"profile_{args.profile}.txt"
        (out / name).write_text(chosen.rendered_text, encoding="utf-8")
        report["profile"] = {"name": args.profile, **solution_record(chosen, name)}
    report["wall_time_ms"] = round((time.perf_counter() - start) * 1000)
    with open(out / "front.json", "w", encoding="utf-8") as fh:
        dump_json(report, fh)
    print(f"{len(front)} solutions written to {out}", file=sys.stderr)
    return EXIT_OK


# -- experiment ----------------------------------------------------------------------

@dataclass(frozen=True)
class Cell:
    use_case: str
    text: str
    provider: str
    run: int
    seed: int
    metric: str
    direction: str
    generations: int
    population: int
    parents: int
    mutation_rate: float
    cap: int
    thesaurus: str | None
    embeddings: str | None
    endpoint: str | None
    cache_dir: str | None
    knn: int
    lexicon_paths: tuple = field(default=(None, None, None))


@dataclass(frozen=True)
class ExperimentRow:
    use_case: str
    provider: str
    metric: str
    direction: str
    run: int
    seed: int
    before: float
    after: float
    improvement: float
    gain: float
    replacements: int
    band_before: str
    band_after: str

    def tsv(self) -> str:
        values = []
        for name in EXPERIMENT_COLUMNS:
            v = getattr(self, name)
            values.append(f"{v:.6f}" if isinstance(v, float) else str(v))
        return "\t".join(values)


def run_cell(cell: Cell) -> ExperimentRow:
    """One seeded optimization of one text; safe to run in a worker process."""
    lex = Lexicons.from_paths(*cell.lexicon_paths)
    metric, direction = MetricId(cell.metric), Direction(cell.direction)
    provider = build_provider(cell.provider, cell.thesaurus, cell.embeddings, cell.endpoint,
                              cell.cache_dir, cell.knn)
    try:
        problem = prepare(cell.text, lex, metric, provider, cell.cap)
        cfg = GaConfig(population_size=cell.population, parents_mating=cell.parents,
                       generations=cell.generations, mutation_rate=cell.mutation_rate,
                       seed=cell.seed, metric=metric, direction=direction)
        result = evolve(cfg, problem.fitness)
    except ReadoptError as exc:
        raise type(exc)(f"{cell.use_case} / {cell.provider} / seed {cell.seed}: {exc}") from exc
    before = text_score(cell.text, metric, lex)
    after = result.best_score
    optimized = problem.fitness.render(result.best_genome)
    return ExperimentRow(
        use_case=cell.use_case, provider=cell.provider, metric=metric.value,
        direction=direction.value, run=cell.run, seed=cell.seed,
        before=before, after=after, improvement=abs(before - after),
        gain=(before - after) * direction.sign(),
        replacements=sum(1 for g in result.best_genome if g),
        band_before=fkgl_band(cell.text, lex), band_after=fkgl_band(optimized, lex),
    )


def summarize(rows: Sequence[ExperimentRow]) -> list[dict]:
    groups: dict[tuple, list[ExperimentRow]] = {}
    for row in rows:
        groups.setdefault((row.provider, row.metric, row.direction), []).append(row)
    out = []
    for (provider, metric, direction), members in sorted(groups.items()):
        gains = [r.gain for r in members]
        out.append({
            "provider": provider, "metric": metric, "direction": direction,
            "runs": len(members),
            "positive": sum(1 for g in gains if g > 0),
            "min": min(gains), "median": statistics.median(gains), "max": max(gains),
            "mean": statistics.fmean(gains),
            "std": statistics.stdev(gains) if len(gains) > 1 else 0.0,
        })
    return out


def summary_tsv(summary: list[dict]) -> str:
    lines = ["\t".join(SUMMARY_COLUMNS)]
    for s in summary:
        lines.append("\t".join(f"{s[c]:.6f}" if isinstance(s[c], float) else str(s[c])
                               for c in SUMMARY_COLUMNS))
    return "\n".join(lines) + "\n"


def corpus_texts(directory: str | None) -> list[tuple[str, str]]:
    root = Path(directory) if directory else data_path("corpus")
    paths = sorted(root.glob("*.txt"))
    if not paths:
        raise InputError(f"no .txt files in {root}")
    return [(p.stem, read_input(str(p))) for p in paths]


def run_experiment(cells: Sequence[Cell], jobs: int = 1) -> list[ExperimentRow]:
    if jobs > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(run_cell, cells))
    else:
        rows = [run_cell(c) for c in cells]
    # workers may finish in any order; sorting keeps the output byte-stable
    return sorted(rows, key=lambda r: (r.use_case, r.provider, r.metric, r.direction, r.run))


def cmd_experiment(args) -> int:
    texts = corpus_texts(args.corpus)
    providers = [p.strip() for p in args.providers.split(",") if p.strip()]
    for p in providers:
        SynonymProviderKind(p)
    cells = [
        Cell(use_case=label, text=text, provider=provider, run=run, seed=args.seed + run,
             metric=args.metric, direction=args.direction, generations=args.generations,
             population=args.population, parents=args.parents,
             mutation_rate=args.mutation_rate, cap=args.cap, thesaurus=args.thesaurus,
             embeddings=args.embeddings, endpoint=args.endpoint, cache_dir=args.cache_dir,
             knn=args.knn, lexicon_paths=(args.stop_words, args.prepositions, args.easy_words))
        for provider in providers
        for label, text in texts
        for run in range(args.runs)
    ]
    rows = run_experiment(cells, jobs=args.jobs)
    body = "\t".join(EXPERIMENT_COLUMNS) + "\n" + "".join(r.tsv() + "\n" for r in rows)
    summary = summary_tsv(summarize(rows))
    if args.output:
        Path(args.output).write_text(body, encoding="utf-8")
    else:
        sys.stdout.write(body)
    if args.summary:
        Path(args.summary).write_text(summary, encoding="utf-8")
    sys.stderr.write(summary)
    return EXIT_OK


# -- converters ----------------------------------------------------------------------

def cmd_convert_thesaurus(args) -> int:
    table = convert_wordnet(args.wordnet_dir)
    Path(args.output).write_text(table.dumps(), encoding="utf-8")
    print(f"{len(table)} headwords written to {args.output}", file=sys.stderr)
    return EXIT_OK


def cmd_convert_embeddings(args) -> int:
    table = load_embeddings(args.input)
    binary = args.to == "binary" if args.to else Path(args.output).suffix == ".bin"
    save_embeddings(table, args.output, binary=binary)
    print(f"{len(table)} vectors of dimension {table.dimension} written to {args.output}",
          file=sys.stderr)
    return EXIT_OK


# -- argument parsing ----------------------------------------------------------------

def add_lexicon_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("word lists (default: bundled)")
    g.add_argument("--stop-words", metavar="PATH")
    g.add_argument("--prepositions", metavar="PATH")
    g.add_argument("--easy-words", metavar="PATH", help="Dale-Chall easy word list")


def add_search_flags(p: argparse.ArgumentParser, parents: int, generations: int) -> None:
    p.add_argument("--metric", choices=[m.value for m in MetricId], default="fkgl")
    p.add_argument("--direction", choices=[d.value for d in Direction], default="min")
    p.add_argument("--provider", choices=[k.value for k in SynonymProviderKind], default="thesaurus")
    p.add_argument("--thesaurus", metavar="PATH", default=BUNDLED,
                   help="tab-separated thesaurus (default: %(default)s)")
    p.add_argument("--embeddings", metavar="PATH", default=None,
                   help="word2vec text or binary file, or 'bundled' for the small fixture")
    p.add_argument("--endpoint", metavar="URL", help="HTTP synonym endpoint (provider http)")
    p.add_argument("--cache-dir", metavar="DIR", help="HTTP cache (default: $READOPT_CACHE_DIR)")
    p.add_argument("--knn", type=int, default=10, help="neighbours per word for provider knn")
    p.add_argument("--cap", type=int, default=DEFAULT_CAP, help="synonyms kept per word")
    p.add_argument("--population", type=int, default=20)
    p.add_argument("--parents", type=int, default=parents)
    p.add_argument("--generations", type=int, default=generations)
    p.add_argument("--mutation-rate", type=float, default=0.1)
    p.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="readopt", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("score", help="print all readability metrics as JSON")
    p.add_argument("input", help="text file, or - for stdin")
    p.add_argument("-o", "--output", metavar="PATH")
    add_lexicon_flags(p)
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("optimize", help="single-objective genetic search")
    p.add_argument("input")
    p.add_argument("-o", "--output", metavar="PATH", help="report file (default: stdout)")
    add_search_flags(p, parents=10, generations=300)
    p.add_argument("--wmd-keep-stopwords", action="store_true")
    add_lexicon_flags(p)
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("pareto", help="NSGA-II front over readability, replacements and WMD")
    p.add_argument("input")
    p.add_argument("--objectives", default="fkgl,repl", help="METRIC,repl[,wmd]")
    p.add_argument("--out-dir", required=True, metavar="DIR")
    p.add_argument("--profile", choices=PROFILES)
    add_search_flags(p, parents=20, generations=900)
    p.add_argument("--wmd-keep-stopwords", action="store_true")
    add_lexicon_flags(p)
    p.set_defaults(func=cmd_pareto)

    p = sub.add_parser("experiment", help="seeded runs over a corpus with a summary table")
    p.add_argument("--corpus", metavar="DIR", help="directory of .txt files (default: bundled)")
    p.add_argument("--providers", default="thesaurus", help="comma-separated provider kinds")
    p.add_argument("--runs", type=int, default=10)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("-o", "--output", metavar="PATH", help="per-run TSV (default: stdout)")
    p.add_argument("--summary", metavar="PATH", help="summary TSV (always echoed to stderr)")
    add_search_flags(p, parents=10, generations=300)
    add_lexicon_flags(p)
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("convert-thesaurus", help="WordNet 3.x database to thesaurus TSV")
    p.add_argument("wordnet_dir")
    p.add_argument("output")
    p.set_defaults(func=cmd_convert_thesaurus)

    p = sub.add_parser("convert-embeddings", help="word2vec text <-> binary")
    p.add_argument("input")
    p.add_argument("output")
    p.add_argument("--to", choices=("text", "binary"), help="default: binary iff output ends in .bin")
    p.set_defaults(func=cmd_convert_embeddings)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except NoCandidates as exc:
        print(f"readopt: nothing to optimize: {exc}", file=sys.stderr)
        return EXIT_NO_CANDIDATES
    except ProviderError as exc:
        print(f"readopt: {exc}", file=sys.stderr)
        return EXIT_PROVIDER
    except (ReadoptError, ValueError, OSError) as exc:
        print(f"readopt: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
