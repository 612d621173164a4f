"""Word Mover's Distance between two texts.

Each text becomes a normalized bag of words (nBOW) over its in-vocabulary,
non-stop words. The distance is the cheapest way to move one distribution's
mass onto the other when moving a unit from word i to word j costs the
Euclidean distance between their embedding vectors.

The exact optimum comes from a transportation simplex (MODI potentials on a
spanning-tree basis). :func:`transport_oracle` solves the same problem a
second, unrelated way, as a min-cost perfect assignment over unit atoms, and
exists for cross-checking.
"""

from __future__ import annotations

import logging
import math
from collections import Counter, deque
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

import numpy as np

from .errors import EmptyDistribution, EmptyInput, NumericalError, OracleScaleExceeded
from .synonyms import EmbeddingTable
from .textmodel import normalize_word, tokenize

log = logging.getLogger(__name__)

WEIGHT_TOLERANCE = 1e-9
MARGINAL_TOLERANCE = 1e-7
ORACLE_MAX_Q = 60
ORACLE_MAX_WORDS = 6


@dataclass(frozen=True)
class Distribution:
    """Normalized word weights; the order of ``entries`` fixes matrix rows."""

    entries: tuple[tuple[str, float], ...]

    def __post_init__(self):
        words = [w for w, _ in self.entries]
        if len(set(words)) != len(words):
            raise ValueError("distribution words must be unique")
        weights = [x for _, x in self.entries]
        if any(not math.isfinite(x) or x < 0 for x in weights):
            raise NumericalError("weights must be finite and non-negative")
        if abs(sum(weights) - 1.0) > WEIGHT_TOLERANCE:
            raise NumericalError(f"weights sum to {sum(weights)!r}, not 1")

    @classmethod
    def from_counts(cls, counts: dict[str, float]) -> "Distribution":
        total = sum(counts.values())
        if not counts or total <= 0:
            raise EmptyDistribution("no words left to build a distribution")
        return cls(tuple((w, counts[w] / total) for w in sorted(counts)))

    @property
    def words(self) -> tuple[str, ...]:
        return tuple(w for w, _ in self.entries)

    @property
    def weights(self) -> np.ndarray:
        return np.array([x for _, x in self.entries], dtype=np.float64)

    def __len__(self) -> int:
        return len(self.entries)


@dataclass(frozen=True)
class GroundCost:
    """Cost of moving a unit of mass from ``rows[i]`` to ``cols[j]``."""

    rows: tuple[str, ...]
    cols: tuple[str, ...]
    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=np.float64)
        if m.shape != (len(self.rows), len(self.cols)):
            raise ValueError(f"cost matrix is {m.shape}, expected {(len(self.rows), len(self.cols))}")
        if not np.all(np.isfinite(m)) or np.any(m < 0):
            raise NumericalError("costs must be finite and non-negative")
        object.__setattr__(self, "matrix", m)


@dataclass(frozen=True)
class TransportPlan:
    flow: np.ndarray

    def check(self, d: Distribution, d2: Distribution, tol: float = MARGINAL_TOLERANCE) -> bool:
        return bool(np.all(self.flow >= 0)
                    and np.allclose(self.flow.sum(axis=1), d.weights, rtol=0, atol=tol)
                    and np.allclose(self.flow.sum(axis=0), d2.weights, rtol=0, atol=tol))


def nbow(tokens: Iterable[str], embeddings: EmbeddingTable | None, stop_words=frozenset(),
         oov: set[str] | None = None) -> Distribution:
    """Normalized word counts after dropping stop words and unknown words.

    Pass ``embeddings=None`` to skip the vocabulary filter. Dropped unknown
    words are added to ``oov`` when a set is supplied.
    """
    counts: Counter[str] = Counter()
    for tok in tokens:
        w = normalize_word(tok)
        if w in stop_words:
            continue
        if embeddings is not None and w not in embeddings:
            if oov is not None:
                oov.add(w)
            continue
        counts[w] += 1
    return Distribution.from_counts(counts)


def text_nbow(text: str, embeddings: EmbeddingTable | None, stop_words=frozenset(),
              oov: set[str] | None = None) -> Distribution:
    try:
        words = [t.surface for t in tokenize(text).words()]
    except EmptyInput as exc:
        raise EmptyDistribution(str(exc)) from exc
    return nbow(words, embeddings, stop_words, oov)


def ground_cost(d: Distribution, d2: Distribution, embeddings: EmbeddingTable) -> GroundCost:
    a = np.array([embeddings.vector(w) for w in d.words], dtype=np.float64)
    b = np.array([embeddings.vector(w) for w in d2.words], dtype=np.float64)
    diff = a[:, None, :] - b[None, :, :]
    return GroundCost(d.words, d2.words, np.sqrt(np.einsum("ijk,ijk->ij", diff, diff)))


# -- transportation simplex ---------------------------------------------------------

def _initial_basis(supply: np.ndarray, demand: np.ndarray, cost: np.ndarray):
    """Least-cost starting solution with exactly m + n - 1 basic cells."""
    m, n = cost.shape
    s, d = supply.copy(), demand.copy()
    masked = cost.copy()
    rows_left, cols_left = m, n
    flow = np.zeros((m, n))
    basis = []
    while True:
        i, j = np.unravel_index(int(np.argmin(masked)), masked.shape)
        q = min(s[i], d[j])
        flow[i, j] = q
        basis.append((int(i), int(j)))
        s[i] -= q
        d[j] -= q
        if rows_left == 1 and cols_left == 1:
            break
        if cols_left == 1 or (rows_left > 1 and s[i] <= d[j]):
            masked[i, :] = np.inf
            rows_left -= 1
            d[j] += s[i]  # push rounding crumbs along instead of losing them
        else:
            masked[:, j] = np.inf
            cols_left -= 1
            s[i] += d[j]
    return flow, basis


def _adjacency(basis, m: int, n: int) -> list[dict[int, int]]:
    """Spanning tree over rows 0..m-1 and columns m..m+n-1; edge -> basic cell index."""
    adj: list[dict[int, int]] = [{} for _ in range(m + n)]
    for k, (i, j) in enumerate(basis):
        adj[i][m + j] = k
        adj[m + j][i] = k
    return adj


def _potentials(basis, cost: list[list[float]], adj, m: int) -> tuple[np.ndarray, np.ndarray]:
    pot: list[float | None] = [None] * len(adj)
    pot[0] = 0.0
    queue = deque([0])
    while queue:
        node = queue.popleft()
        for other, k in adj[node].items():
            if pot[other] is None:
                i, j = basis[k]
                # u_i + v_j = c_ij on every basic cell
                pot[other] = cost[i][j] - pot[node]
                queue.append(other)
    if any(p is None for p in pot):
        raise NumericalError("basis is not a spanning tree")
    return np.array(pot[:m]), np.array(pot[m:])


class _Tree:
    """The basis as a tree rooted at row 0, with parent links and depths."""

    def __init__(self, adj: list[dict[int, int]]):
        self.adj = adj
        size = len(adj)
        self.parent = [-1] * size
        self.edge = [-1] * size
        self.depth = [0] * size
        self._hang(0, -1, -1, 0)

    def _hang(self, node: int, parent: int, edge: int, depth: int) -> list[int]:
        """Attach the component of ``node`` below ``parent``; returns its nodes."""
        self.parent[node], self.edge[node], self.depth[node] = parent, edge, depth
        stack, seen = [node], [node]
        while stack:
            x = stack.pop()
            for y, k in self.adj[x].items():
                if y != self.parent[x]:
                    self.parent[y], self.edge[y], self.depth[y] = x, k, self.depth[x] + 1
                    stack.append(y)
                    seen.append(y)
        return seen

    def path(self, a: int, b: int) -> list[int]:
        """Edge indices from ``a`` to ``b`` in walking order."""
        head, tail = [], []
        while self.depth[a] > self.depth[b]:
            head.append(self.edge[a])
            a = self.parent[a]
        while self.depth[b] > self.depth[a]:
            tail.append(self.edge[b])
            b = self.parent[b]
        while a != b:
            head.append(self.edge[a])
            tail.append(self.edge[b])
            a, b = self.parent[a], self.parent[b]
        return head + tail[::-1]

    def swap(self, out: tuple[int, int], into: tuple[int, int], k: int) -> list[int]:
        """Replace tree edge ``out`` by ``into`` (both as node pairs); returns the moved nodes."""
        x, y = out
        child = x if self.parent[x] == y else y
        del self.adj[x][y], self.adj[y][x]
        p, q = into
        self.adj[p][q] = k
        self.adj[q][p] = k
        # cut at ``child`` and re-hang that subtree from the entering edge
        inside = set(self._subtree(child))
        low, high = (p, q) if p in inside else (q, p)
        return self._hang(low, high, k, self.depth[high] + 1)

    def _subtree(self, root: int) -> list[int]:
        out, stack = [root], [root]
        while stack:
            x = stack.pop()
            for y in self.adj[x]:
                if self.parent[y] == x and y != self.parent[x]:
                    out.append(y)
                    stack.append(y)
        return out


def solve_transport(d: Distribution, d2: Distribution, cost: GroundCost,
                    max_iter: int = 100_000) -> tuple[float, TransportPlan]:
    """Exact minimum-cost plan moving ``d`` onto ``d2``.

    Each pivot brings in the most negative reduced cost (Bland's rule takes
    over after a long run of degenerate pivots). Potentials are not solved
    from scratch per pivot: only the subtree cut off by the leaving cell
    shifts, and the reduced costs shift with it.
    """
    if cost.rows != d.words or cost.cols != d2.words:
        raise ValueError("cost matrix does not line up with the distributions")
    supply, demand, c = d.weights, d2.weights, cost.matrix
    if abs(supply.sum() - demand.sum()) > MARGINAL_TOLERANCE:
        raise NumericalError("marginals carry different total mass")
    m, n = c.shape
    flow, basis = _initial_basis(supply, demand, c)
    c_list = c.tolist()
    adj = _adjacency(basis, m, n)
    tree = _Tree(adj)
    tol = 1e-12 * max(1.0, float(c.max(initial=0.0)))
    degenerate_run = 0
    reduced = None
    for step in range(max_iter):
        if step % 64 == 0:  # resync against accumulated rounding
            u, v = _potentials(basis, c_list, adj, m)
            reduced = c - u[:, None] - v[None, :]
        if degenerate_run < 50:
            flat = int(np.argmin(reduced))
            if reduced.flat[flat] >= -tol:
                break
        else:
            candidates = np.flatnonzero(reduced < -tol)
            if candidates.size == 0:
                break
            flat = int(candidates[0])
        i, j = divmod(flat, n)
        r = float(reduced[i, j])
        # entering (i, j) closes a cycle with the tree path col j -> row i;
        # cells on that path alternate -, +, -, ... starting next to col j
        path = tree.path(m + j, i)
        theta_k = min(path[0::2], key=lambda k: (flow[basis[k]], k))
        theta = flow[basis[theta_k]]
        for pos, k in enumerate(path):
            flow[basis[k]] += -theta if pos % 2 == 0 else theta
        li, lj = basis[theta_k]
        flow[li, lj] = 0.0
        flow[i, j] = theta
        basis[theta_k] = (i, j)
        moved = tree.swap((li, m + lj), (i, m + j), theta_k)
        rows = [x for x in moved if x < m]
        cols = [x - m for x in moved if x >= m]
        # the moved subtree holds exactly one end of (i, j); shifting its
        # potentials by r makes (i, j) tight and leaves other tree cells tight
        sign = 1.0 if i in rows else -1.0
        reduced[rows, :] -= sign * r
        reduced[:, cols] += sign * r
        reduced[i, j] = 0.0
        degenerate_run = degenerate_run + 1 if theta == 0 else 0
    else:
        raise NumericalError(f"transport simplex did not converge in {max_iter} pivots")
    np.maximum(flow, 0.0, out=flow)
    total = float(np.sum(flow * c))
    if not math.isfinite(total):
        raise NumericalError("transport cost is not finite")
    return total, TransportPlan(flow)


def transport_oracle(d: Distribution, d2: Distribution, cost: GroundCost) -> float:
    """Reference optimum via assignment on unit atoms (small rational cases only)."""
    from scipy.optimize import linear_sum_assignment

    if len(d) > ORACLE_MAX_WORDS or len(d2) > ORACLE_MAX_WORDS:
        raise OracleScaleExceeded(f"oracle handles at most {ORACLE_MAX_WORDS} words per side")
    fractions = [Fraction(x).limit_denominator(ORACLE_MAX_Q) for x in (*d.weights, *d2.weights)]
    if any(abs(float(f) - x) > WEIGHT_TOLERANCE for f, x in zip(fractions, (*d.weights, *d2.weights))):
        raise OracleScaleExceeded(f"weights are not multiples of 1/Q with Q <= {ORACLE_MAX_Q}")
    q = math.lcm(*(f.denominator for f in fractions))
    if q > ORACLE_MAX_Q:
        raise OracleScaleExceeded(f"common denominator {q} exceeds {ORACLE_MAX_Q}")
    counts = [int(f * q) for f in fractions]
    rows = np.repeat(np.arange(len(d)), counts[:len(d)])
    cols = np.repeat(np.arange(len(d2)), counts[len(d):])
    expanded = cost.matrix[np.ix_(rows, cols)]
    r, k = linear_sum_assignment(expanded)
    return float(expanded[r, k].sum()) / q


# -- text-level distance ------------------------------------------------------------

def distribution_distance(d: Distribution, d2: Distribution, embeddings: EmbeddingTable) -> float:
    """WMD between two distributions under Euclidean embedding cost.

    Mass shared by both sides stays in place first. With a metric ground
    cost this never loses optimality, and after a few substitutions it
    leaves only the changed words to transport.
    """
    a, b = dict(d.entries), dict(d2.entries)
    for w in set(a) & set(b):
        shared = min(a[w], b[w])
        a[w] -= shared
        b[w] -= shared
    a = {w: x for w, x in a.items() if x > 1e-15}
    b = {w: x for w, x in b.items() if x > 1e-15}
    if not a or not b:
        return 0.0
    # both residuals hold the same mass; rescale to unit mass and back
    mass = sum(a.values())
    ra, rb = Distribution(_unit(a)), Distribution(_unit(b))
    total, _ = solve_transport(ra, rb, ground_cost(ra, rb, embeddings))
    return total * mass


def _unit(weights: dict[str, float]) -> tuple[tuple[str, float], ...]:
    mass = sum(weights.values())
    return tuple((w, weights[w] / mass) for w in sorted(weights))


def wmd(text_a: str, text_b: str, embeddings: EmbeddingTable, stop_words=frozenset()) -> float:
    """Word Mover's Distance between two texts; pass no stop words to keep them all."""
    d = text_nbow(text_a, embeddings, stop_words)
    d2 = text_nbow(text_b, embeddings, stop_words)
    return distribution_distance(d, d2, embeddings)


class WmdObjective:
    """Distance from a fixed original text, cached per rendered text.

    If either side has no usable words the distance is 0 for the unchanged
    text and +inf for anything else, so such candidates never win silently.
    """

    def __init__(self, original_text: str, embeddings: EmbeddingTable, stop_words=frozenset()):
        self.original_text = original_text
        self.embeddings = embeddings
        self.stop_words = stop_words
        self.oov: set[str] = set()
        try:
            self._original = text_nbow(original_text, embeddings, stop_words, self.oov)
        except EmptyDistribution:
            self._original = None
        if self.oov:
            log.warning("%d words have no embedding and are ignored by WMD: %s",
                        len(self.oov), ", ".join(sorted(self.oov)[:20]))
        self._cache: dict[str, float] = {}

    def __call__(self, text: str, unchanged: bool = False) -> float:
        if unchanged or text == self.original_text:
            return 0.0
        hit = self._cache.get(text)
        if hit is not None:
            return hit
        try:
            d2 = text_nbow(text, self.embeddings, self.stop_words, self.oov)
        except EmptyDistribution:
            d2 = None
        if self._original is None or d2 is None:
            value = math.inf
        else:
            value = distribution_distance(self._original, d2, self.embeddings)
        self._cache[text] = value
        return value

