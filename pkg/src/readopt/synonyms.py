"""Synonym providers and the code that fills candidate slots from them.

Providers read a thesaurus table, search embedding neighbours or query a JSON
HTTP endpoint.
"""

from __future__ import annotations

import enum
import hashlib
import json
import logging
import os
import threading
import time
import urllib.error
import urllib.parse
import urllib.request
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Protocol, Sequence

import numpy as np

from .errors import FormatError, OutOfVocabulary
from .textmodel import CandidateSlot, Document, normalize_word

log = logging.getLogger(__name__)

DEFAULT_CAP = 5

# WordNet-style suffix detachment, tried in order when a headword is missing
DETACHMENTS = (
    ("ies", "y"), ("ses", "s"), ("xes", "x"), ("zes", "z"), ("ches", "ch"),
    ("shes", "sh"), ("men", "man"), ("es", "e"), ("es", ""), ("s", ""),
    ("ed", "e"), ("ed", ""), ("ing", "e"), ("ing", ""),
    ("est", ""), ("est", "e"), ("er", ""), ("er", "e"),
)


class SynonymProviderKind(str, enum.Enum):
    THESAURUS = "thesaurus"
    EMBEDDING_KNN = "knn"
    HTTP_ENDPOINT = "http"


class SynonymProvider(Protocol):
    kind: SynonymProviderKind

    def lookup(self, word: str) -> list[str]: ...


def clean_synonyms(word: str, candidates: Iterable[str]) -> list[str]:
    """Whitespace-normalized, deduplicated candidates without ``word`` itself."""
    own = normalize_word(word)
    seen = {own}
    out = []
    for cand in candidates:
        cand = " ".join(str(cand).split())
        key = normalize_word(cand)
        if not cand or key in seen:
            continue
        seen.add(key)
        out.append(cand)
    return out


# -- thesaurus -----------------------------------------------------------------

@dataclass(frozen=True)
class ThesaurusTable:
    entries: dict[str, tuple[str, ...]] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, word: str) -> bool:
        return normalize_word(word) in self.entries

    def get(self, word: str, inflections: bool = True) -> list[str]:
        key = normalize_word(word)
        if key in self.entries:
            return list(self.entries[key])
        if inflections:
            for suffix, repl in DETACHMENTS:
                if key.endswith(suffix) and len(key) > len(suffix) + 1:
                    base = key[: -len(suffix)] + repl
                    if base in self.entries:
                        return [s for s in self.entries[base] if normalize_word(s) != key]
        return []

    def dumps(self) -> str:
        return "".join(f"{head}\t{','.join(syns)}\n" for head, syns in sorted(self.entries.items()))


def parse_thesaurus(lines: Iterable[str], path=None) -> ThesaurusTable:
    entries: dict[str, tuple[str, ...]] = {}
    for lineno, line in enumerate(lines, start=1):
        line = line.rstrip("\r\n")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        if line.count("\t") != 1:
            raise FormatError("expected 'headword<TAB>syn1,syn2,...'", line=lineno, path=path)
        head, syns = line.split("\t")
        head = " ".join(head.split())
        if not head:
            raise FormatError("empty headword", line=lineno, path=path)
        cleaned = clean_synonyms(head, syns.split(","))
        key = normalize_word(head)
        merged = clean_synonyms(head, list(entries.get(key, ())) + cleaned)
        entries[key] = tuple(merged)
    return ThesaurusTable(entries)


def load_thesaurus(path: str | Path) -> ThesaurusTable:
    path = Path(path)
    with path.open(encoding="utf-8") as fh:
        return parse_thesaurus(fh, path=path)


@dataclass
class ThesaurusProvider:
    table: ThesaurusTable
    inflections: bool = True
    kind: SynonymProviderKind = SynonymProviderKind.THESAURUS

    def lookup(self, word: str) -> list[str]:
        return self.table.get(word, inflections=self.inflections)


# -- WordNet database conversion --------------------------------------------------

WORDNET_POS = ("noun", "verb", "adj", "adv")


def _wordnet_lemma(raw: str) -> str:
    word = raw.split("(", 1)[0]  # adjective markers: (a) (p) (ip)
    return word.replace("_", " ")


def read_wordnet_data(path: Path) -> dict[str, list[str]]:
    """Synset offset -> member words from a WordNet ``data.<pos>`` file."""
    synsets = {}
    with path.open(encoding="utf-8", errors="replace") as fh:
        for lineno, line in enumerate(fh, start=1):
            if line.startswith("  ") or not line.strip():
                continue  # license header
            parts = line.split(" | ", 1)[0].split()
            try:
                offset = parts[0]
                w_cnt = int(parts[3], 16)
                words = [_wordnet_lemma(parts[4 + 2 * k]) for k in range(w_cnt)]
            except (IndexError, ValueError) as exc:
                raise FormatError(f"bad synset record ({exc})", line=lineno, path=path) from None
            synsets[offset] = words
    return synsets


def read_wordnet_index(path: Path) -> list[tuple[str, list[str]]]:
    """``(lemma, [synset offsets in sense order])`` from ``index.<pos>``."""
    out = []
    with path.open(encoding="utf-8", errors="replace") as fh:
        for lineno, line in enumerate(fh, start=1):
            if line.startswith("  ") or not line.strip():
                continue
            parts = line.split()
            try:
                lemma = parts[0].replace("_", " ")
                synset_cnt = int(parts[2])
                p_cnt = int(parts[3])
                offsets = parts[4 + p_cnt + 2:4 + p_cnt + 2 + synset_cnt]
                if len(offsets) != synset_cnt:
                    raise ValueError("truncated offset list")
            except (IndexError, ValueError) as exc:
                raise FormatError(f"bad index record ({exc})", line=lineno, path=path) from None
            out.append((lemma, offsets))
    return out


def convert_wordnet(dict_dir: str | Path, headwords: set[str] | None = None) -> ThesaurusTable:
    """Build a thesaurus from a WordNet 3.x database directory.

    Synonyms of a lemma are the other members of its synsets, visited part of
    speech by part of speech (noun, verb, adj, adv) and sense by sense.
    Members with capital letters are proper names or acronyms (``W. C.
    Fields`` for *fields*) and are skipped. When ``headwords`` is given only
    those lemmas are kept.
    """
    dict_dir = Path(dict_dir)
    gathered: dict[str, list[str]] = {}
    for pos in WORDNET_POS:
        index_path = dict_dir / f"index.{pos}"
        data_path = dict_dir / f"data.{pos}"
        if not index_path.exists() or not data_path.exists():
            continue
        synsets = read_wordnet_data(data_path)
        for lemma, offsets in read_wordnet_index(index_path):
            key = normalize_word(lemma)
            if headwords is not None and key not in headwords:
                continue
            bucket = gathered.setdefault(key, [])
            for off in offsets:
                if off not in synsets:
                    raise FormatError(f"index refers to missing synset {off}", path=index_path)
                bucket.extend(w for w in synsets[off]
                              if w == w.lower() and "," not in w and "\t" not in w)
    if not gathered and headwords is None:
        raise FormatError(f"no WordNet index/data files found in {dict_dir}")
    entries = {}
    for key, words in gathered.items():
        syns = clean_synonyms(key, words)
        if syns:
            entries[key] = tuple(syns)
    return ThesaurusTable(entries)


# -- embeddings -------------------------------------------------------------------

@dataclass(frozen=True)
class EmbeddingTable:
    words: tuple[str, ...]
    vectors: np.ndarray  # (V, D) float32

    def __post_init__(self):
        if self.vectors.ndim != 2 or self.vectors.shape[0] != len(self.words):
            raise ValueError("vectors must be (len(words), D)")
        index = {}
        for i, w in enumerate(self.words):
            index.setdefault(normalize_word(w), i)
        object.__setattr__(self, "_index", index)
        norms = np.linalg.norm(self.vectors.astype(np.float64), axis=1)
        object.__setattr__(self, "_norms", norms)

    @property
    def dimension(self) -> int:
        return self.vectors.shape[1]

    def __contains__(self, word: str) -> bool:
        return normalize_word(word) in self._index

    def __len__(self) -> int:
        return len(self.words)

    def index(self, word: str) -> int:
        try:
            return self._index[normalize_word(word)]
        except KeyError:
            raise OutOfVocabulary(f"{word!r} not in embedding vocabulary") from None

    def vector(self, word: str) -> np.ndarray:
        return self.vectors[self.index(word)]

    @classmethod
    def from_dict(cls, mapping: dict[str, Sequence[float]]) -> "EmbeddingTable":
        words = tuple(mapping)
        return cls(words, np.asarray([mapping[w] for w in words], dtype=np.float32).reshape(len(words), -1))


def _parse_header(line: bytes | str, path) -> tuple[int, int]:
    if isinstance(line, bytes):
        line = line.decode("utf-8", errors="replace")
    parts = line.split()
    if len(parts) != 2 or not all(p.isdigit() for p in parts):
        raise FormatError("expected header 'V D'", line=1, path=path)
    return int(parts[0]), int(parts[1])


def _read_text_embeddings(path: Path) -> EmbeddingTable:
    with path.open(encoding="utf-8") as fh:
        n, dim = _parse_header(fh.readline(), path)
        words = []
        vectors = np.empty((n, dim), dtype=np.float32)
        for lineno, line in enumerate(fh, start=2):
            if not line.strip():
                continue
            parts = line.rstrip().split(" ")
            if len(parts) != dim + 1 or len(words) >= n:
                raise FormatError(f"expected a word and {dim} floats", line=lineno, path=path)
            try:
                vectors[len(words)] = np.asarray(parts[1:], dtype=np.float32)
            except ValueError:
                raise FormatError("unparseable float", line=lineno, path=path) from None
            words.append(parts[0])
    if len(words) != n:
        raise FormatError(f"header promises {n} vectors, found {len(words)}", path=path)
    return EmbeddingTable(tuple(words), vectors)


def _read_binary_embeddings(path: Path) -> EmbeddingTable:
    data = path.read_bytes()
    nl = data.index(b"\n")
    n, dim = _parse_header(data[:nl], path)
    pos = nl + 1
    words = []
    vectors = np.empty((n, dim), dtype=np.float32)
    width = 4 * dim
    for k in range(n):
        while pos < len(data) and data[pos:pos + 1] in (b"\n", b" "):
            pos += 1
        sp = data.find(b" ", pos)
        if sp < 0 or sp + 1 + width > len(data):
            raise FormatError("truncated binary record", line=k + 2, path=path)
        words.append(data[pos:sp].decode("utf-8", errors="replace"))
        vectors[k] = np.frombuffer(data, dtype="<f4", count=dim, offset=sp + 1)
        pos = sp + 1 + width
    return EmbeddingTable(tuple(words), vectors)


def _looks_binary(path: Path) -> bool:
    with path.open("rb") as fh:
        fh.readline()
        sample = fh.read(4096)
    try:
        sample.decode("utf-8")
    except UnicodeDecodeError:
        return True
    return b"\x00" in sample


def load_embeddings(path: str | Path, binary: bool | None = None) -> EmbeddingTable:
    """Read word2vec text or binary format (auto-detected unless ``binary`` is set)."""
    path = Path(path)
    if binary is None:
        binary = _looks_binary(path)
    return _read_binary_embeddings(path) if binary else _read_text_embeddings(path)


def format_float32(x: float) -> str:
    return str(np.float32(x))


def save_embeddings(table: EmbeddingTable, path: str | Path, binary: bool = False) -> None:
    path = Path(path)
    header = f"{len(table)} {table.dimension}\n"
    if binary:
        with path.open("wb") as fh:
            fh.write(header.encode())
            for word, vec in zip(table.words, table.vectors):
                fh.write(word.encode("utf-8") + b" " + np.asarray(vec, dtype="<f4").tobytes() + b"\n")
    else:
        with path.open("w", encoding="utf-8") as fh:
            fh.write(header)
            for word, vec in zip(table.words, table.vectors):
                fh.write(word + " " + " ".join(format_float32(x) for x in vec) + "\n")


def nearest_neighbors(table: EmbeddingTable, word: str, n: int) -> list[tuple[str, float]]:
    """The ``n`` most cosine-similar vocabulary words, best first, ties by word."""
    if n < 1:
        raise ValueError("n must be >= 1")
    qi = table.index(word)
    vecs = table.vectors.astype(np.float64)
    norms = table._norms
    q = vecs[qi]
    with np.errstate(divide="ignore", invalid="ignore"):
        sims = vecs @ q / (norms * norms[qi])
    sims = np.nan_to_num(sims, nan=-1.0)
    query_key = normalize_word(word)
    ranked = sorted(
        (i for i in range(len(table)) if i != qi and normalize_word(table.words[i]) != query_key),
        key=lambda i: (-sims[i], table.words[i]),
    )
    return [(table.words[i], float(sims[i])) for i in ranked[:n]]


@dataclass
class EmbeddingKnnProvider:
    table: EmbeddingTable
    n: int = 10
    kind: SynonymProviderKind = SynonymProviderKind.EMBEDDING_KNN

    def lookup(self, word: str) -> list[str]:
        if word not in self.table:
            return []
        return [w for w, _ in nearest_neighbors(self.table, word, self.n)]


# -- HTTP endpoint ----------------------------------------------------------------

def default_cache_dir() -> Path:
    env = os.environ.get("READOPT_CACHE_DIR")
    if env:
        return Path(env)
    return Path.home() / ".cache" / "readopt"


class HttpProvider:
    """Client for ``GET {base_url}?word=<w>`` returning a JSON array of strings.

    Requests are serialized and spaced at least ``min_interval`` seconds
    apart. Successful answers are kept in an on-disk JSON cache keyed by word;
    failures degrade to an empty list for the rest of the run.
    """

    kind = SynonymProviderKind.HTTP_ENDPOINT

    def __init__(self, base_url: str, cache_dir: str | Path | None = None,
                 min_interval: float = 0.25, timeout: float = 10.0):
        self.base_url = base_url
        self.min_interval = min_interval
        self.timeout = timeout
        cache_dir = Path(cache_dir) if cache_dir is not None else default_cache_dir()
        digest = hashlib.sha256(base_url.encode()).hexdigest()[:16]
        self.cache_path = cache_dir / f"http-synonyms-{digest}.json"
        self._lock = threading.Lock()
        self._last_request = float("-inf")
        self._memory: dict[str, list[str]] = {}
        self._disk: dict[str, list[str]] = {}
        if self.cache_path.exists():
            try:
                self._disk = json.loads(self.cache_path.read_text(encoding="utf-8"))
            except (OSError, ValueError):
                log.warning("ignoring unreadable synonym cache %s", self.cache_path)
        self.requests_made = 0

    def url_for(self, word: str) -> str:
        sep = "&" if "?" in self.base_url else "?"
        return f"{self.base_url}{sep}{urllib.parse.urlencode({'word': word})}"

    def _fetch(self, word: str) -> list[str] | None:
        wait = self._last_request + self.min_interval - time.monotonic()
        if wait > 0:
            time.sleep(wait)
        self._last_request = time.monotonic()
        self.requests_made += 1
        try:
            with urllib.request.urlopen(self.url_for(word), timeout=self.timeout) as resp:
                payload = json.loads(resp.read().decode("utf-8"))
        except (urllib.error.URLError, OSError, ValueError) as exc:
            log.warning("synonym endpoint failed for %r: %s", word, exc)
            return None
        if not isinstance(payload, list) or not all(isinstance(x, str) for x in payload):
            log.warning("synonym endpoint returned non-list payload for %r", word)
            return None
        return payload

    def _save(self) -> None:
        try:
            self.cache_path.parent.mkdir(parents=True, exist_ok=True)
            tmp = self.cache_path.with_suffix(".tmp")
            tmp.write_text(json.dumps(self._disk, sort_keys=True, ensure_ascii=False), encoding="utf-8")
            tmp.replace(self.cache_path)
        except OSError as exc:
            log.warning("could not write synonym cache: %s", exc)

    def lookup(self, word: str) -> list[str]:
        key = normalize_word(word)
        with self._lock:
            if key in self._memory:
                return list(self._memory[key])
            if key in self._disk:
                result = self._disk[key]
            else:
                fetched = self._fetch(key)
                if fetched is None:
                    result = []
                else:
                    result = fetched
                    self._disk[key] = fetched
                    self._save()
            self._memory[key] = clean_synonyms(key, result)
            return list(self._memory[key])


# -- slots ------------------------------------------------------------------------

def populate_slots(doc: Document, slots: Sequence[CandidateSlot], provider: SynonymProvider,
                   cap: int = DEFAULT_CAP) -> list[CandidateSlot]:
    """Attach up to ``cap`` synonyms to each slot; slots left empty are dropped."""
    if cap < 1:
        raise ValueError("cap must be >= 1")
    out = []
    for slot in slots:
        token = doc.tokens[slot.token_index]
        syns = clean_synonyms(token.surface, provider.lookup(token.normalized))[:cap]
        if syns:
            out.append(replace(slot, synonyms=tuple(syns)))
    return out
