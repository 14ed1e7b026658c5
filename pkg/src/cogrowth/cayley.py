"""Finite Cayley balls and exact counting of trivial words.

A :class:`CayleyBall` is built breadth-first from the identity using a
triviality oracle to identify words. Exact counts of trivial words come
from closed-walk dynamic programming on the ball; all counts are Python
integers. A closed walk of length ``ell`` never leaves the ball of radius
``ceil(ell / 2)``, so a radius-``R`` ball gives exact counts up to
``2R``.
"""

from __future__ import annotations

import csv
import hashlib
import io
import math
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, NamedTuple, Optional, Sequence

import numpy as np

from .errors import InsufficientRadius, PartialBallError
from .word_problem import TrivialityOracle, are_equal
from .words import Word, alphabet, as_rng, format_word, letter_index, sample_plain_words

OUTSIDE = -1
DEFAULT_BALL_BUDGET = 3_000_000
_INT64_LIMIT = 2 ** 62


@dataclass
class CayleyBall:
    m: int
    radius: int
    words: List[Word]
    adjacency: np.ndarray  # (n, 2m) int32, OUTSIDE for moves leaving the ball
    depth: np.ndarray
    exact: bool = True
    oracle: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.words)

    def walk(self, w: Sequence[int], start: int = 0) -> Optional[int]:
        """Index reached by reading ``w`` from ``start``; ``None`` if it leaves."""
        adj = self.adjacency
        i = start
        for x in w:
            i = int(adj[i, letter_index(x)])
            if i < 0:
                return None
        return i

    def sphere_sizes(self) -> List[int]:
        return np.bincount(self.depth, minlength=self.radius + 1).tolist()

    def dump(self) -> str:
        """Debug listing: index, normal form, then the ``2m`` neighbours."""
        out = io.StringIO()
        for i, w in enumerate(self.words):
            nbrs = " ".join(str(int(j)) for j in self.adjacency[i])
            out.write(f"{i} {format_word(w)} {nbrs}\n")
        return out.getvalue()


def build_ball(oracle: TrivialityOracle, m: int, radius: int, budget: int = DEFAULT_BALL_BUDGET) -> CayleyBall:
    """Breadth-first ball of the given radius.

    Each move ``g -> g*x`` is identified through ``oracle.key``. For exact
    but non-canonical oracles, a key miss is followed by equality tests
    against known elements with the same ``oracle.invariant`` and large
    enough length (``oracle.min_relation`` bounds the length of any
    nonempty cyclically reduced relation). One-sided oracles skip that
    step and may leave out edges. Every closed walk in such a ball still
    reads a trivial word, so each count taken on it is a lower bound.
    """
    if radius < 0:
        raise ValueError("radius must be >= 0")
    if oracle.m != m:
        raise ValueError("oracle and ball disagree on the generator count")
    letters = alphabet(m)
    q = 2 * m
    pairwise = oracle.exact and not oracle.canonical
    min_rel = getattr(oracle, "min_relation", 1) or 1

    words: List[Word] = [()]
    keys = [oracle.key(())]
    index: Dict = {keys[0]: 0}
    depth = [0]
    adj = [OUTSIDE] * q
    buckets = defaultdict(list)
    if pairwise:
        buckets[oracle.invariant(())].append(0)

    merges = []
    layer_start, layer_end = 0, 1
    for k in range(radius + 1):
        for g in range(layer_start, layer_end):
            wg = words[g]
            for j, x in enumerate(letters):
                if adj[g * q + j] != OUTSIDE:
                    continue
                if wg and wg[-1] == -x:
                    continue  # parent edge, set when g was discovered
                w = wg + (x,)
                key = oracle.step_key(keys[g], x)
                if key is None:
                    key = oracle.key(w)
                h = index.get(key)
                if h is None and pairwise:
                    inv = oracle.invariant(w)
                    for v in buckets.get(inv, ()):
                        if depth[v] + k + 1 >= min_rel and are_equal(oracle, w, words[v]):
                            h = v
                            index[key] = v
                            break
                if h is None:
                    if k == radius:
                        continue
                    if len(words) >= budget:
                        raise PartialBallError(
                            f"ball budget of {budget} elements exhausted at radius {k + 1}", k
                        )
                    h = len(words)
                    words.append(w)
                    keys.append(key)
                    index[key] = h
                    depth.append(k + 1)
                    adj.extend([OUTSIDE] * q)
                    if pairwise:
                        buckets[inv].append(h)
                back = adj[h * q + (j ^ 1)]
                if back != OUTSIDE and back != g:
                    # g*x = back*x, so g = back: a relation the one-sided
                    # oracle missed. Fold the two vertices afterwards.
                    if oracle.exact:
                        raise AssertionError("exact oracle produced an inconsistent ball")
                    merges.append((g, back))
                    continue
                adj[g * q + j] = h
                adj[h * q + (j ^ 1)] = g
        layer_start, layer_end = layer_end, len(words)

    adjacency = np.asarray(adj, dtype=np.int32).reshape(-1, q)
    depth_arr = np.asarray(depth, dtype=np.int64)
    if merges:
        words, adjacency, depth_arr = _fold(words, adjacency, depth_arr, merges)
    return CayleyBall(
        m=m,
        radius=radius,
        words=words,
        adjacency=adjacency,
        depth=depth_arr,
        exact=oracle.exact,
        oracle=oracle.describe(),
    )


def _fold(words, adjacency, depth, merges):
    """Identify vertex pairs and fold until the labelled graph is deterministic.

    Merging two vertices that both have an edge with the same label forces
    the two targets together too (Stallings folding). Each class keeps its
    lowest index, so the identity stays at 0 and normal forms stay shortest.
    """
    n, q = adjacency.shape
    parent = list(range(n))
    out = [{j: int(t) for j, t in enumerate(row) if t != OUTSIDE} for row in adjacency]

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    todo = list(merges)
    while todo:
        a, b = todo.pop()
        ra, rb = find(a), find(b)
        if ra == rb:
            continue
        if rb < ra:
            ra, rb = rb, ra
        parent[rb] = ra
        for j, t in out[rb].items():
            if j in out[ra]:
                todo.append((out[ra][j], t))
            else:
                out[ra][j] = t
        out[rb] = {}
    reps = [v for v in range(n) if find(v) == v]
    new_id = {v: i for i, v in enumerate(reps)}
    adj = np.full((len(reps), q), OUTSIDE, dtype=np.int32)
    for v in reps:
        for j, t in out[v].items():
            adj[new_id[v], j] = new_id[find(t)]
    return [words[v] for v in reps], adj, depth[reps]


# -- closed-walk counting ----------------------------------------------------

def _sentinel_adjacency(ball: CayleyBall) -> np.ndarray:
    n = len(ball)
    adj = ball.adjacency.astype(np.int64)
    adj[adj < 0] = n
    return adj


def _check_radius(ball: CayleyBall, ell: int):
    if ell < 0:
        raise ValueError("length must be >= 0")
    if 2 * ball.radius < ell:
        raise InsufficientRadius(
            f"length {ell} needs a ball of radius {math.ceil(ell / 2)}, have {ball.radius}"
        )


def closed_walk_counts(ball: CayleyBall, max_length: int) -> List[int]:
    """``|W_l|`` for ``l = 0..max_length``: closed walks at the identity."""
    _check_radius(ball, max_length)
    n = len(ball)
    adj = _sentinel_adjacency(ball)
    q = 2 * ball.m
    dtype = np.int64 if q ** max_length < _INT64_LIMIT else object
    v = np.zeros(n + 1, dtype=dtype)
    v[0] = 1
    counts = [1]
    for _ in range(max_length):
        nv = np.zeros(n + 1, dtype=dtype)
        for j in range(q):
            nv[:n] += v[adj[:, j]]
        v = nv
        counts.append(int(v[0]))
    return counts


def reduced_closed_walk_counts(ball: CayleyBall, max_length: int) -> List[int]:
    """``|W'_l|`` for ``l = 0..max_length``: closed non-backtracking walks.

    State is (element, last letter); a step may not use the inverse of the
    last letter. The empty walk counts once at length 0.
    """
    _check_radius(ball, max_length)
    n = len(ball)
    adj = _sentinel_adjacency(ball)
    q = 2 * ball.m
    bound = q * (q - 1) ** max(max_length - 1, 0)
    dtype = np.int64 if bound < _INT64_LIMIT else object
    counts = [1]
    if max_length == 0:
        return counts
    V = np.zeros((n + 1, q), dtype=dtype)
    for b in range(q):
        y = adj[0, b]
        if y < n:
            V[y, b] = 1
    counts.append(int(V[0].sum()))
    inv_cols = np.arange(q) ^ 1
    for _ in range(max_length - 1):
        S = V.sum(axis=1)
        Z = adj[:, inv_cols]  # Z[x, b] = x * b^-1
        NV = np.zeros_like(V)
        for b in range(q):
            z = Z[:, b]
            NV[:n, b] = S[z] - V[z, b ^ 1]
        V = NV
        counts.append(int(V[0].sum()))
    return counts


def count_trivial_words(ball: CayleyBall, ell: int) -> int:
    return closed_walk_counts(ball, ell)[ell]


def count_trivial_reduced_words(ball: CayleyBall, ell: int) -> int:
    return reduced_closed_walk_counts(ball, ell)[ell]


@dataclass
class CountTable:
    """Exact counts of trivial words by length.

    ``kind`` is ``plain`` (``|W_l|``, base ``2m``) or ``reduced``
    (``|W'_l|``, base ``2m-1``). With ``lower_bound`` set the entries are
    certified lower bounds rather than exact values.
    """

    kind: str
    base: int
    entries: Dict[int, int]
    exact_up_to: int
    lower_bound: bool = False

    def __post_init__(self):
        if self.kind not in ("plain", "reduced"):
            raise ValueError(f"unknown count kind {self.kind!r}")
        self.entries = {int(k): int(v) for k, v in sorted(self.entries.items())}

    @property
    def m(self) -> int:
        return self.base // 2 if self.kind == "plain" else (self.base + 1) // 2

    def __getitem__(self, ell: int) -> int:
        return self.entries[ell]

    def __contains__(self, ell: int) -> bool:
        return ell in self.entries

    def lengths(self) -> List[int]:
        return list(self.entries)

    def to_csv(self) -> str:
        out = io.StringIO()
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["kind", "base", "length", "count"])
        for ell, c in self.entries.items():
            w.writerow([self.kind, self.base, ell, str(c)])
        return out.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "CountTable":
        rows = list(csv.DictReader(io.StringIO(text)))
        if not rows:
            raise ValueError("empty count table")
        kinds = {r["kind"] for r in rows}
        bases = {int(r["base"]) for r in rows}
        if len(kinds) != 1 or len(bases) != 1:
            raise ValueError("a count table holds a single kind and base")
        entries = {int(r["length"]): int(r["count"]) for r in rows}
        return cls(kinds.pop(), bases.pop(), entries, max(entries))

    def digest(self) -> str:
        return hashlib.sha256(self.to_csv().encode()).hexdigest()[:16]

    def write(self, path) -> Path:
        path = Path(path)
        path.write_text(self.to_csv())
        return path


def count_table(ball: CayleyBall, kind: str = "plain", max_length: int | None = None) -> CountTable:
    if max_length is None:
        max_length = 2 * ball.radius
    if kind == "plain":
        counts = closed_walk_counts(ball, max_length)
        base = 2 * ball.m
    elif kind == "reduced":
        counts = reduced_closed_walk_counts(ball, max_length)
        base = 2 * ball.m - 1
    else:
        raise ValueError(f"unknown count kind {kind!r}")
    return CountTable(kind, base, dict(enumerate(counts)), max_length, lower_bound=not ball.exact)


def free_group_counts(m: int, max_length: int) -> List[int]:
    """``|W_l|`` in ``F_m`` by the distance-from-root recursion on the tree."""
    q = 2 * m
    v = {0: 1}
    out = [1]
    for _ in range(max_length):
        nv = defaultdict(int)
        for k, c in v.items():
            if k == 0:
                nv[1] += q * c
            else:
                nv[k + 1] += (q - 1) * c
                nv[k - 1] += c
        v = nv
        out.append(v.get(0, 0))
    return out


# -- spectral radius ---------------------------------------------------------

class SpectralEstimate(NamedTuple):
    value: float
    converged: bool
    iterations: int


def spectral_radius_lower_bound(ball: CayleyBall, iterations: int = 5000, tolerance: float = 1e-10) -> SpectralEstimate:
    """Top eigenvalue of the random-walk operator killed outside the ball.

    Power iteration on the lazy operator ``(I + M) / 2`` avoids the parity
    oscillation of bipartite balls. The returned value is the Rayleigh
    quotient of ``M`` at the current iterate; since ``M`` restricted to the
    ball is symmetric, it never exceeds the restricted top eigenvalue and
    so is a lower bound for the spectral radius of the whole group.
    """
    n = len(ball)
    adj = _sentinel_adjacency(ball)
    q = 2 * ball.m

    def apply(f):
        g = np.zeros(n + 1)
        for j in range(q):
            g[:n] += f[adj[:, j]]
        g /= q
        return g

    x = np.ones(n + 1)
    x[n] = 0.0
    x /= np.linalg.norm(x)
    prev = -1.0
    for it in range(1, iterations + 1):
        mx = apply(x)
        r = float(x @ mx)
        if abs(r - prev) < tolerance:
            return SpectralEstimate(max(r, 0.0), True, it)
        prev = r
        y = 0.5 * (x + mx)
        norm = np.linalg.norm(y)
        if norm == 0.0:
            return SpectralEstimate(0.0, True, it)
        x = y / norm
    return SpectralEstimate(max(prev, 0.0), False, iterations)


# -- Monte Carlo -------------------------------------------------------------

Z95 = 1.959963984540054


def wilson_interval(hits: int, trials: int, z: float = Z95):
    if trials <= 0:
        raise ValueError("need at least one trial")
    p = hits / trials
    denom = 1 + z * z / trials
    centre = (p + z * z / (2 * trials)) / denom
    half = z * math.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials)) / denom
    return max(0.0, centre - half), min(1.0, centre + half)


class MonteCarloResult(NamedTuple):
    estimate: float
    interval: tuple
    hits: int
    trials: int


def _count_hits(oracle, m, ell, size, seed_seq):
    words = sample_plain_words(m, ell, size, np.random.default_rng(seed_seq))
    return sum(1 for row in words.tolist() if oracle.is_trivial(row))


def _count_hits_on_ball(ball, ell, size, seed_seq):
    rng = np.random.default_rng(seed_seq)
    codes = rng.integers(0, 2 * ball.m, size=(size, ell))
    n = len(ball)
    # extra row keeps walks that left the ball at the sentinel
    adj = np.vstack([_sentinel_adjacency(ball), np.full(2 * ball.m, n)])
    pos = np.zeros(size, dtype=np.int64)
    for j in range(ell):
        pos = adj[pos, codes[:, j]]
    return int(np.count_nonzero(pos == 0))


def monte_carlo_return(oracle: TrivialityOracle, m: int, ell: int, trials: int, rng,
                       ball: CayleyBall | None = None, chunk: int = 100_000,
                       workers: int = 1) -> MonteCarloResult:
    """Estimate the return probability ``|W_l| / (2m)^l`` with a 95% Wilson interval.

    Trials are split into chunks with independent spawned RNG streams, so
    the result does not depend on ``workers``. If ``ball`` is given (radius
    at least ``ceil(l/2)``), walks run on its adjacency instead of calling
    the oracle per word; a walk that leaves the ball cannot return.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if ball is not None and 2 * ball.radius < ell:
        raise InsufficientRadius("ball too small for this walk length")
    rng = as_rng(rng)
    sizes = [chunk] * (trials // chunk) + ([trials % chunk] if trials % chunk else [])
    streams = rng.bit_generator.seed_seq.spawn(len(sizes)) if hasattr(rng.bit_generator, "seed_seq") else None
    if streams is None:
        streams = [np.random.SeedSequence(int(rng.integers(2 ** 63))) for _ in sizes]
    if ball is not None:
        jobs = [(_count_hits_on_ball, (ball, ell, s, ss)) for s, ss in zip(sizes, streams)]
    else:
        jobs = [(_count_hits, (oracle, m, ell, s, ss)) for s, ss in zip(sizes, streams)]
    if workers > 1 and len(jobs) > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=workers) as ex:
            hits = sum(ex.map(_call, jobs))
    else:
        hits = sum(_call(j) for j in jobs)
    return MonteCarloResult(hits / trials, wilson_interval(hits, trials), hits, trials)


def _call(job):
    fn, args = job
    return fn(*args)


def trivial_by_walk(ball: CayleyBall, w: Sequence[int]) -> bool:
    """Ball-membership decision for ``|w| <= 2 * radius``.

    A trivial word never moves farther than ``|w|/2`` from the identity,
    so leaving the ball proves nontriviality.
    """
    if len(w) > 2 * ball.radius:
        raise InsufficientRadius("word too long for ball-membership decision")
    return ball.walk(w) == 0


__all__ = [
    "CayleyBall",
    "CountTable",
    "MonteCarloResult",
    "SpectralEstimate",
    "build_ball",
    "closed_walk_counts",
    "count_table",
    "count_trivial_reduced_words",
    "count_trivial_words",
    "free_group_counts",
    "monte_carlo_return",
    "reduced_closed_walk_counts",
    "spectral_radius_lower_bound",
    "trivial_by_walk",
    "wilson_interval",
]
