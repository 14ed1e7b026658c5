"""Finite presentations, the density-model sampler and piece analysis."""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Dict, List, NamedTuple, Sequence, Tuple

from .errors import BudgetExceeded
from .words import (
    Word,
    as_rng,
    check_word,
    cyclic_reduce,
    format_word,
    inverse,
    is_cyclically_reduced,
    parse_word,
    rotate,
    sample_plain_words,
    sample_reduced_words,
)

DEFAULT_RELATOR_BUDGET = 2_000_000


@dataclass(frozen=True)
class Presentation:
    """``<a_1..a_m | relators>`` with cyclically reduced, nonempty relators.

    ``relators`` is a multiset (a tuple, duplicates allowed). ``dropped``
    holds sampled words that freely reduced to the empty word; they impose
    no relation and are kept only as metadata.
    """

    m: int
    relators: Tuple[Word, ...] = ()
    dropped: Tuple[Word, ...] = field(default=(), compare=False)
    metadata: Dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.m < 1:
            raise ValueError("need at least one generator")
        for r in self.relators:
            check_word(r, self.m)
            if not r or not is_cyclically_reduced(r):
                raise ValueError(f"relator {format_word(r)} is not cyclically reduced and nonempty")

    @classmethod
    def from_words(cls, m: int, words, metadata=None) -> "Presentation":
        """Build from arbitrary words, storing their cyclic cores."""
        rels, dropped = [], []
        for w in words:
            w = tuple(w)
            check_word(w, m)
            core, _ = cyclic_reduce(w)
            (rels if core else dropped).append(core if core else w)
        return cls(m, tuple(rels), tuple(dropped), dict(metadata or {}))

    @classmethod
    def parse(cls, m: int, relators: Sequence[str]) -> "Presentation":
        return cls.from_words(m, [parse_word(s, m) for s in relators])

    @property
    def max_length(self) -> int:
        """The maximal relator length (0 without relators)."""
        return max((len(r) for r in self.relators), default=0)

    lam = max_length

    @property
    def min_length(self) -> int:
        return min((len(r) for r in self.relators), default=0)

    def __str__(self):
        gens = ",".join(format_word((i,)) for i in range(1, self.m + 1))
        rels = ", ".join(format_word(r) for r in self.relators)
        return f"<{gens} | {rels}>"


# -- density model ---------------------------------------------------------

@dataclass(frozen=True)
class DensityConfig:
    m: int
    d: float
    ell: int
    kind: str = "reduced"

    def __post_init__(self):
        if self.kind not in ("reduced", "plain"):
            raise ValueError(f"unknown word kind {self.kind!r}")
        if not 0.0 <= self.d <= 1.0:
            raise ValueError("density must lie in [0, 1]")
        if self.ell < 1:
            raise ValueError("relator length must be >= 1")
        if self.m < 2:
            raise ValueError("the density model needs m >= 2")

    @property
    def base(self) -> int:
        return 2 * self.m - 1 if self.kind == "reduced" else 2 * self.m

    @property
    def relator_count(self) -> int:
        """``round(base ** (d * ell))``, nearest integer, at least 1."""
        return max(1, math.floor(self.base ** (self.d * self.ell) + 0.5))


def sample_density_presentation(cfg: DensityConfig, rng, budget: int = DEFAULT_RELATOR_BUDGET) -> Presentation:
    """Draw ``cfg.relator_count`` i.i.d. uniform words and quotient by them.

    Reduced words whose end letters are mutually inverse, and plain words
    that are not reduced, shorten when stored as cyclic cores; the sampled
    words are kept in ``metadata['sampled']``.
    """
    n = cfg.relator_count
    if n > budget:
        raise BudgetExceeded(f"density model asks for {n} relators, budget is {budget}")
    rng = as_rng(rng)
    if cfg.kind == "reduced":
        arr = sample_reduced_words(cfg.m, cfg.ell, n, rng)
    else:
        arr = sample_plain_words(cfg.m, cfg.ell, n, rng)
    sampled = [tuple(int(x) for x in row) for row in arr]
    p = Presentation.from_words(cfg.m, sampled)
    cores = [len(cyclic_reduce(w)[0]) for w in sampled]
    meta = {
        "d": cfg.d,
        "ell": cfg.ell,
        "kind": cfg.kind,
        "relator_count": n,
        "shortened": sum(1 for c in cores if 0 < c < cfg.ell),
        "dropped": len(p.dropped),
        "sampled": tuple(sampled),
    }
    return Presentation(p.m, p.relators, p.dropped, meta)


# -- symmetrization ----------------------------------------------------------

class Occurrence(NamedTuple):
    """An element of the symmetrized set, with its provenance.

    ``word == rotate(r if orientation > 0 else inverse(r), offset)`` where
    ``r`` is relator number ``relator``.
    """

    word: Word
    relator: int
    offset: int
    orientation: int


def symmetrized_occurrences(p: Presentation) -> List[Occurrence]:
    """Rotations and inverse rotations of every relator, deduplicated per relator."""
    out = []
    for i, r in enumerate(p.relators):
        seen = set()
        for orient, base in ((1, r), (-1, inverse(r))):
            for k in range(len(base)):
                w = rotate(base, k)
                if w not in seen:
                    seen.add(w)
                    out.append(Occurrence(w, i, k, orient))
    return out


def symmetrize(p: Presentation) -> frozenset:
    """The symmetrized closure as a set of words."""
    return frozenset(o.word for o in symmetrized_occurrences(p))


# -- pieces ------------------------------------------------------------------

@dataclass(frozen=True)
class PieceReport:
    max_piece_length: int
    # ((relator, offset, orientation), (relator, offset, orientation), length)
    witness: Tuple | None
    piece_length_histogram: Dict[int, int]
    # longest piece starting each symmetrized occurrence, aligned with ``occurrences``
    longest: Tuple[int, ...] = field(default=(), repr=False, compare=False)
    occurrences: Tuple[Occurrence, ...] = field(default=(), repr=False, compare=False)


def _lcp(u: Word, v: Word) -> int:
    n = min(len(u), len(v))
    k = 0
    while k < n and u[k] == v[k]:
        k += 1
    return k


def max_piece(p: Presentation) -> PieceReport:
    """Exact piece analysis of the symmetrized relators.

    A piece is a common prefix of two distinct symmetrized occurrences:
    different relators (copies of one word count as different), or the same
    relator giving two different words. Every subword of a cyclic relator
    is a prefix of some rotation, so this covers all common subwords. After
    sorting, the longest common prefix of any pair is attained by
    neighbours, which makes the scan ``O(N log N)`` in the number of
    occurrences.
    """
    occ = symmetrized_occurrences(p)
    if not occ:
        return PieceReport(0, None, {})
    order = sorted(range(len(occ)), key=lambda i: (occ[i].word, occ[i].relator))
    longest = [0] * len(occ)
    best, witness = -1, None
    for a, b in zip(order, order[1:]):
        k = _lcp(occ[a].word, occ[b].word)
        if k > longest[a]:
            longest[a] = k
        if k > longest[b]:
            longest[b] = k
        if k > best:
            best = k
            witness = (occ[a][1:], occ[b][1:], k)
    if best < 0:  # a single occurrence, e.g. the relator ``a``
        best = 0
    hist = dict(sorted(Counter(longest).items()))
    return PieceReport(best, witness, hist, tuple(longest), tuple(occ))


def check_small_cancellation(p: Presentation, alpha) -> Tuple[bool, PieceReport]:
    """Decide ``C'(alpha)``: every piece is strictly shorter than ``alpha * |r|``.

    ``alpha`` may be a ``Fraction``, an int, a string like ``"1/6"`` or a
    float (floats are snapped to the nearest fraction with a small
    denominator, so ``1/6`` behaves exactly).
    """
    a = _as_fraction(alpha)
    if not 0 < a <= 1:
        raise ValueError("alpha must lie in (0, 1]")
    report = max_piece(p)
    ok = all(
        k < a * len(o.word) for k, o in zip(report.longest, report.occurrences)
    )
    return ok, report


def _as_fraction(x) -> Fraction:
    if isinstance(x, float):
        return Fraction(x).limit_denominator(10_000)
    return Fraction(x)


def small_cancellation_constant(alpha) -> float:
    """Isoperimetric constant ``1 - 6 alpha`` attached to ``C'(alpha)``."""
    return float(1 - 6 * _as_fraction(alpha))


# -- file format -------------------------------------------------------------

def format_presentation(p: Presentation, comment: str | None = None) -> str:
    lines = []
    if comment:
        lines.extend(f"# {c}" for c in comment.splitlines())
    lines.append(f"m={p.m}")
    lines.extend(format_word(r) for r in p.relators)
    return "\n".join(lines) + "\n"


def parse_presentation(text: str) -> Presentation:
    m = None
    rels = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if m is None:
            key, _, val = line.partition("=")
            if key.strip() != "m" or not val.strip():
                raise ValueError("presentation file must start with 'm=<int>'")
            m = int(val)
            continue
        rels.append(parse_word(line, m))
    if m is None:
        raise ValueError("missing 'm=<int>' line")
    return Presentation.from_words(m, rels)


def write_presentation(p: Presentation, path, sidecar: Dict | None = None) -> Path:
    path = Path(path)
    path.write_text(format_presentation(p))
    if sidecar is not None:
        path.with_suffix(path.suffix + ".json").write_text(json.dumps(sidecar, indent=2, sort_keys=True) + "\n")
    return path


def read_presentation(path) -> Presentation:
    return parse_presentation(Path(path).read_text())


# -- fixtures ----------------------------------------------------------------

def surface_presentation(genus: int = 2) -> Presentation:
    """``<a1,b1,...| [a1,b1]...[ag,bg]>``, which is C'(1/6) for genus >= 2."""
    rel = []
    for g in range(genus):
        a, b = 2 * g + 1, 2 * g + 2
        rel += [a, b, -a, -b]
    return Presentation(2 * genus, (tuple(rel),))
