#!/usr/bin/env python3
"""Regenerate the bundled thesaurus and embedding fixture from WordNet 3.0.

    python scripts/build_data.py --wordnet /path/to/wordnet-3.0/dict

The thesaurus keeps only headwords reachable from the bundled corpus (the
candidate words and their de-inflected bases). The embedding file is a small
deterministic stand-in for word2vec: each word is a weighted sum of seeded
random directions, one per WordNet synset it belongs to (earlier senses
within a part of speech weigh more), plus a word-specific direction. Words sharing a synset end up
close together, which is all the kNN provider and WMD tests rely on.
"""

import argparse
import hashlib
from pathlib import Path

import numpy as np

from readopt.lexicons import data_path, default_lexicons
from readopt.synonyms import (
    DETACHMENTS,
    WORDNET_POS,
    EmbeddingTable,
    ThesaurusTable,
    convert_wordnet,
    read_wordnet_index,
    save_embeddings,
)
from readopt.textmodel import identify_candidates, tokenize

DIM = 96
SYNONYMS_PER_HEADWORD = 12


def seeded_unit(key: str, dim: int) -> np.ndarray:
    seed = int.from_bytes(hashlib.sha256(key.encode()).digest()[:8], "little")
    v = np.random.default_rng(seed).standard_normal(dim)
    return v / np.linalg.norm(v)


def bases(word: str) -> set[str]:
    out = {word}
    for suffix, repl in DETACHMENTS:
        if word.endswith(suffix) and len(word) > len(suffix) + 1:
            out.add(word[: -len(suffix)] + repl)
    return out


def corpus_words():
    lex = default_lexicons()
    candidates, everything = set(), set()
    for path in sorted((data_path("corpus")).glob("*.txt")):
        doc = tokenize(path.read_text(encoding="utf-8"))
        everything.update(t.normalized for t in doc.words())
        slots = identify_candidates(doc, lex.stop_words, lex.prepositions)
        candidates.update(doc.tokens[s.token_index].normalized for s in slots)
    return candidates, everything


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--wordnet", required=True, type=Path, help="WordNet 3.x dict directory")
    ap.add_argument("--out", type=Path, default=data_path(""))
    args = ap.parse_args()

    candidates, everything = corpus_words()
    heads = set().union(*(bases(w) for w in candidates))
    full = convert_wordnet(args.wordnet, headwords=heads)
    table = ThesaurusTable({k: v[:SYNONYMS_PER_HEADWORD] for k, v in full.entries.items()})
    header = ("# Synonyms from WordNet 3.0 (Princeton University, WordNet 3.0 license),\n"
              "# converted with `readopt convert-thesaurus` and restricted to the bundled corpus.\n")
    (args.out / "thesaurus_wordnet.tsv").write_text(header + table.dumps(), encoding="utf-8")

    senses: dict[str, list[str]] = {}
    for pos in WORDNET_POS:
        for lemma, offsets in read_wordnet_index(args.wordnet / f"index.{pos}"):
            senses.setdefault(lemma.lower(), []).extend(
                (rank, f"{pos}:{o}") for rank, o in enumerate(offsets[:3]))

    vocab = set(everything)
    for syns in table.entries.values():
        for s in syns:
            vocab.update(w.lower() for w in s.split())
    words = sorted(vocab)
    vectors = np.empty((len(words), DIM), dtype=np.float32)
    for i, w in enumerate(words):
        synsets = next((senses[b] for b in sorted(bases(w), key=lambda b: (b != w, b)) if b in senses), [])
        v = 0.1 * seeded_unit("word:" + w, DIM)
        for rank, s in synsets:
            v = v + seeded_unit("synset:" + s, DIM) / (rank + 1) ** 2
        vectors[i] = v / np.linalg.norm(v)
    save_embeddings(EmbeddingTable(tuple(words), vectors), args.out / "embeddings_wordnet96.bin", binary=True)
    print(f"{len(table)} thesaurus headwords, {len(words)} embedding rows")


if __name__ == "__main__":
    main()
