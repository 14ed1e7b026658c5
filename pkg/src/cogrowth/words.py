"""Words in the free group on ``m`` generators.

A letter is a nonzero integer: ``i`` stands for the generator ``a_i`` and
``-i`` for its inverse. A word is a tuple of letters. Tuples keep words
hashable and immutable, so they can be shared freely and used as keys.

Text form: generator ``i`` is the ``i``-th lowercase ASCII letter, its
inverse the matching uppercase letter (``a``, ``A``, ``b``, ``B``, ...).
The empty word renders as ``1``.
"""

from __future__ import annotations

from typing import Iterable, Iterator, Sequence, Tuple

import numpy as np

Word = Tuple[int, ...]

EMPTY: Word = ()
MAX_GENERATORS = 26


def as_rng(rng) -> np.random.Generator:
    """Coerce a seed, ``SeedSequence`` or generator into a ``Generator``."""
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


def alphabet(m: int) -> Word:
    """All ``2m`` letters in the fixed order ``a, A, b, B, ...``."""
    out = []
    for i in range(1, m + 1):
        out.extend((i, -i))
    return tuple(out)


def letter_index(x: int) -> int:
    """Position of ``x`` in :func:`alphabet`."""
    return 2 * (abs(x) - 1) + (x < 0)


def check_word(w: Sequence[int], m: int) -> None:
    for x in w:
        if x == 0 or abs(x) > m:
            raise ValueError(f"letter {x} outside the alphabet of {m} generators")


def inverse(w: Sequence[int]) -> Word:
    return tuple(-x for x in reversed(w))


def reduce(w: Iterable[int]) -> Word:
    """Free reduction with a single stack pass."""
    stack = []
    for x in w:
        if stack and stack[-1] == -x:
            stack.pop()
        else:
            stack.append(x)
    return tuple(stack)


def is_reduced(w: Sequence[int]) -> bool:
    return all(w[i] != -w[i + 1] for i in range(len(w) - 1))


def is_cyclically_reduced(w: Sequence[int]) -> bool:
    return is_reduced(w) and (len(w) < 2 or w[0] != -w[-1])


def cyclic_reduce(w: Sequence[int]) -> Tuple[Word, Word]:
    """Split ``reduce(w)`` as ``conjugator * core * conjugator^-1``.

    The core is cyclically reduced. For a freely trivial word the core is
    empty and the conjugator is the first half of ``w`` that cancelled,
    e.g. ``aA`` gives ``((), (a,))``.
    """
    r = reduce(w)
    if not r:
        # keep the letter that witnessed the cancellation, if any
        return EMPTY, tuple(w[:1]) if w else EMPTY
    i, j = 0, len(r) - 1
    while i < j and r[i] == -r[j]:
        i += 1
        j -= 1
    return r[i:j + 1], r[:i]


def rotate(w: Sequence[int], k: int) -> Word:
    if not w:
        return EMPTY
    k %= len(w)
    return tuple(w[k:]) + tuple(w[:k])


def rotations(w: Sequence[int]) -> Iterator[Word]:
    for k in range(len(w)):
        yield rotate(w, k)


def min_rotation(w: Sequence[int]) -> Word:
    """Lexicographically least rotation; a canonical key for cyclic words."""
    if not w:
        return EMPTY
    return min(rotations(w))


def equal_up_to_rotation(u: Sequence[int], v: Sequence[int]) -> bool:
    if len(u) != len(v):
        return False
    if not u:
        return True
    doubled = tuple(v) + tuple(v)
    u = tuple(u)
    n = len(u)
    return any(doubled[k:k + n] == u for k in range(n))


def exponent_sums(w: Sequence[int], m: int) -> Tuple[int, ...]:
    sums = [0] * m
    for x in w:
        sums[abs(x) - 1] += 1 if x > 0 else -1
    return tuple(sums)


# -- text form ---------------------------------------------------------------

def format_word(w: Sequence[int]) -> str:
    if not w:
        return "1"
    return "".join(chr(ord("a") + x - 1) if x > 0 else chr(ord("A") - x - 1) for x in w)


def parse_word(s: str, m: int | None = None) -> Word:
    """Parse the ``a/A`` letter encoding; whitespace is ignored, ``1`` is empty."""
    s = "".join(s.split())
    if s in ("", "1"):
        return EMPTY
    out = []
    for ch in s:
        if "a" <= ch <= "z":
            out.append(ord(ch) - ord("a") + 1)
        elif "A" <= ch <= "Z":
            out.append(-(ord(ch) - ord("A") + 1))
        else:
            raise ValueError(f"invalid letter {ch!r} in word {s!r}")
    w = tuple(out)
    if m is not None:
        check_word(w, m)
    return w


# -- sampling ----------------------------------------------------------------

def _letters_from_codes(codes: np.ndarray) -> np.ndarray:
    # code c in 0..2m-1 -> alphabet order a, A, b, B, ...
    gen = codes // 2 + 1
    return np.where(codes % 2 == 0, gen, -gen)


def sample_plain_words(m: int, ell: int, n: int, rng) -> np.ndarray:
    """``n`` uniform words of length ``ell`` as an ``(n, ell)`` letter array."""
    if m < 1 or ell < 0:
        raise ValueError("need m >= 1 and ell >= 0")
    codes = as_rng(rng).integers(0, 2 * m, size=(n, ell))
    return _letters_from_codes(codes)


def sample_reduced_words(m: int, ell: int, n: int, rng) -> np.ndarray:
    """``n`` uniform reduced words of length ``ell`` as an ``(n, ell)`` array.

    The first letter is uniform over ``2m`` letters and every later letter
    uniform over the ``2m - 1`` letters that do not cancel the previous one.
    """
    if m < 2 or ell < 1:
        raise ValueError("need m >= 2 and ell >= 1")
    rng = as_rng(rng)
    codes = np.empty((n, ell), dtype=np.int64)
    codes[:, 0] = rng.integers(0, 2 * m, size=n)
    steps = rng.integers(0, 2 * m - 1, size=(n, ell - 1))
    for j in range(1, ell):
        forbidden = codes[:, j - 1] ^ 1  # inverse letter code
        s = steps[:, j - 1]
        codes[:, j] = s + (s >= forbidden)
    return _letters_from_codes(codes)


def sample_plain_word(m: int, ell: int, rng) -> Word:
    return tuple(int(x) for x in sample_plain_words(m, ell, 1, rng)[0])


def sample_reduced_word(m: int, ell: int, rng) -> Word:
    return tuple(int(x) for x in sample_reduced_words(m, ell, 1, rng)[0])
