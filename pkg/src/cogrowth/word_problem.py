"""Triviality oracles.

Every oracle answers ``is_trivial(w)`` for words over ``m`` generators and
advertises how far the answer can be trusted:

* ``exact``: sound and complete on its presentation.
* ``canonical``: ``key`` is a normal form, so equal keys <=> equal elements.

Non-canonical oracles still provide a *sound* ``key`` (equal keys imply
equal elements) and an ``invariant`` that equal elements always share;
ball construction uses both to avoid quadratic equality testing.

:class:`DehnOracle` in strict mode refuses presentations that are not
C'(1/6). With ``strict=False`` it becomes a one-sided oracle: ``True`` is
always correct (every rewrite applies a relation) but ``False`` only means
"not shown trivial". Counts built on it are lower bounds.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Hashable, List, Sequence, Tuple

from .errors import UnsupportedPresentation
from .presentations import Presentation, check_small_cancellation, symmetrized_occurrences
from .words import Word, exponent_sums, inverse, reduce

DEHN_ALPHA = Fraction(1, 6)


class TrivialityOracle:
    name = "abstract"
    domain = ""
    exact = True
    canonical = False

    def __init__(self, m: int):
        if m < 1:
            raise ValueError("need m >= 1")
        self.m = m

    def is_trivial(self, w: Sequence[int]) -> bool:
        raise NotImplementedError

    def key(self, w: Sequence[int]) -> Hashable:
        """Sound identification key; the default is the free reduction."""
        return reduce(w)

    def invariant(self, w: Sequence[int]) -> Hashable:
        return None

    def step_key(self, key: Hashable, x: int):
        """Key of ``g*x`` from the key of ``g``, or ``None`` if unsupported."""
        return None

    def describe(self) -> dict:
        return {"name": self.name, "domain": self.domain, "exact": self.exact}

    def __repr__(self):
        return f"{type(self).__name__}(m={self.m})"


def are_equal(oracle: TrivialityOracle, u: Sequence[int], v: Sequence[int]) -> bool:
    return oracle.is_trivial(tuple(u) + inverse(v))


class FreeOracle(TrivialityOracle):
    name = "free"
    domain = "free group F_m"
    canonical = True

    def is_trivial(self, w):
        return not reduce(w)

    def step_key(self, key, x):
        if key and key[-1] == -x:
            return key[:-1]
        return key + (x,)


class AbelianOracle(TrivialityOracle):
    name = "abelian"
    domain = "free abelian group Z^m"
    canonical = True

    def is_trivial(self, w):
        return not any(exponent_sums(w, self.m))

    def key(self, w):
        return exponent_sums(w, self.m)

    invariant = key

    def step_key(self, key, x):
        k = list(key)
        k[abs(x) - 1] += 1 if x > 0 else -1
        return tuple(k)


def free_oracle(m: int) -> FreeOracle:
    return FreeOracle(m)


def abelian_oracle(m: int) -> AbelianOracle:
    return AbelianOracle(m)


# -- abelianization ----------------------------------------------------------

def hermite_basis(vectors: Sequence[Sequence[int]], m: int) -> List[List[int]]:
    """Row-style Hermite normal form of the lattice spanned by ``vectors``.

    Pivots are positive and entries above each pivot lie in ``[0, pivot)``,
    so :func:`lattice_reduce` gives a canonical coset representative.
    """
    rows = [list(v) for v in vectors if any(v)]
    basis: List[List[int]] = []
    col = 0
    while rows and col < m:
        nz = [r for r in rows if r[col] != 0]
        if not nz:
            col += 1
            continue
        zero = [r for r in rows if r[col] == 0]
        # Euclid on column ``col`` until a single row keeps a nonzero entry
        while len(nz) > 1:
            nz.sort(key=lambda r: abs(r[col]))
            piv = nz[0]
            rest = []
            for r in nz[1:]:
                q = r[col] // piv[col]
                r = [a - q * b for a, b in zip(r, piv)]
                (rest if r[col] != 0 else zero).append(r)
            nz = [piv] + rest
        piv = nz[0]
        if piv[col] < 0:
            piv = [-a for a in piv]
        basis.append(piv)
        rows = [r for r in zero if any(r)]
        col += 1
    for i, row in enumerate(basis):
        c = next(j for j, a in enumerate(row) if a)
        for k in range(i):
            q = basis[k][c] // row[c]
            if q:
                basis[k] = [a - q * b for a, b in zip(basis[k], row)]
    return basis


def lattice_reduce(v: Sequence[int], basis: Sequence[Sequence[int]]) -> Tuple[int, ...]:
    v = list(v)
    for row in basis:
        c = next(j for j, a in enumerate(row) if a)
        q = v[c] // row[c]
        if q:
            v = [a - q * b for a, b in zip(v, row)]
    return tuple(v)


# -- Dehn's algorithm --------------------------------------------------------

class _Node:
    __slots__ = ("children", "best_len", "best")

    def __init__(self):
        self.children = {}
        self.best_len = None  # length of the shortest relator word through here
        self.best = None  # (word, occurrence index)


class DehnOracle(TrivialityOracle):
    """Dehn's algorithm over the symmetrized relators.

    A rewrite replaces a subword ``u`` with ``|u| > |r|/2``, where
    ``r = u v`` is a symmetrized relator, by ``v^-1``. The leftmost match
    is taken, and at that position the longest one; among relators through
    that prefix the shortest wins, ties to the lowest symmetrized index.
    """

    name = "dehn"

    def __init__(self, p: Presentation, strict: bool = True):
        super().__init__(p.m)
        self.presentation = p
        self.strict = strict
        if strict:
            ok, report = check_small_cancellation(p, DEHN_ALPHA)
            if not ok:
                raise UnsupportedPresentation(
                    f"presentation is not C'(1/6) (max piece {report.max_piece_length}); "
                    "Dehn's algorithm would not be a decision procedure"
                )
        self.exact = strict
        self.domain = "C'(1/6) presentation" if strict else "one-sided: True answers only"
        self.name = "dehn" if strict else "dehn-lower"
        self.occurrences = symmetrized_occurrences(p)
        # Greendlinger: a nonempty cyclically reduced relation is at least this long
        self.min_relation = p.min_length if strict else 1
        self._root = _Node()
        for idx, occ in enumerate(self.occurrences):
            self._insert(occ.word, idx)
        basis_vectors = [exponent_sums(r, p.m) for r in p.relators]
        self._lattice = hermite_basis(basis_vectors, p.m)

    def _insert(self, word: Word, idx: int):
        node = self._root
        n = len(word)
        for depth, x in enumerate(word, 1):
            node = node.children.setdefault(x, _Node())
            if 2 * depth > n and (node.best_len is None or n < node.best_len):
                node.best_len = n
                node.best = (word, idx)

    def _find(self, w: List[int]):
        """Leftmost-longest rewritable subword: ``(start, depth, word, idx)``."""
        root = self._root
        n = len(w)
        for i in range(n):
            node = root
            hit = None
            for j in range(i, n):
                node = node.children.get(w[j])
                if node is None:
                    break
                depth = j - i + 1
                if node.best_len is not None and 2 * depth > node.best_len:
                    hit = (i, depth) + node.best
            if hit is not None:
                return hit
        return None

    def dehn_reduce(self, w: Sequence[int], trace: list | None = None) -> Word:
        """Apply rewrites until none applies; ``trace`` collects the steps.

        Each trace entry is ``(len_before, relator_id, offset, len_after)``.
        """
        cur = list(reduce(w))
        while True:
            hit = self._find(cur)
            if hit is None:
                return tuple(cur)
            i, depth, word, idx = hit
            before = len(cur)
            cur = list(reduce(cur[:i] + list(inverse(word[depth:])) + cur[i + depth:]))
            if trace is not None:
                trace.append((before, self.occurrences[idx].relator, i, len(cur)))

    def is_trivial(self, w, trace: list | None = None) -> bool:
        return not self.dehn_reduce(w, trace)

    def key(self, w):
        return self.dehn_reduce(w)

    def invariant(self, w):
        return lattice_reduce(exponent_sums(w, self.m), self._lattice)


def dehn_is_trivial(p: Presentation, w: Sequence[int], trace: list | None = None) -> bool:
    """Decide triviality of ``w`` in a C'(1/6) presentation.

    Raises :class:`UnsupportedPresentation` otherwise.
    """
    return DehnOracle(p).is_trivial(w, trace)


def format_trace(trace) -> str:
    return "\n".join(f"{a}, {b}, {c}, {d}" for a, b, c, d in trace)

