import numpy as np
from hypothesis import given, strategies as st

from cogrowth.words import (
    alphabet,
    cyclic_reduce,
    equal_up_to_rotation,
    format_word,
    inverse,
    is_cyclically_reduced,
    is_reduced,
    letter_index,
    min_rotation,
    parse_word,
    reduce,
    rotate,
    sample_plain_words,
    sample_reduced_words,
)

letters = st.sampled_from(alphabet(3))
words = st.lists(letters, max_size=20).map(tuple)


def test_alphabet_order():
    assert alphabet(2) == (1, -1, 2, -2)
    assert [letter_index(x) for x in alphabet(3)] == list(range(6))


def test_text_round_trip():
    assert parse_word("abAB") == (1, 2, -1, -2)
    assert format_word(()) == "1"
    assert parse_word("1") == ()
    assert format_word(parse_word("aBcC")) == "aBcC"


@given(words)
def test_reduce_is_idempotent_and_reduced(w):
    r = reduce(w)
    assert is_reduced(r)
    assert reduce(r) == r
    assert reduce(w + inverse(w)) == ()


@given(words)
def test_cyclic_reduce_conjugates_back(w):
    core, c = cyclic_reduce(w)
    assert is_cyclically_reduced(core)
    if reduce(w):
        assert reduce(c + core + inverse(c)) == reduce(w)


@given(words, st.integers(0, 40))
def test_rotation_classes(w, k):
    assert equal_up_to_rotation(w, rotate(w, k))
    assert min_rotation(w) == min_rotation(rotate(w, k))


def test_cyclic_reduce_examples():
    assert cyclic_reduce(parse_word("abaA")) == ((1, 2), ())
    assert cyclic_reduce(parse_word("bacAB")) == ((3,), (2, 1))
    assert cyclic_reduce(parse_word("aA")) == ((), (1,))


def test_reduced_sampler_never_backtracks():
    arr = sample_reduced_words(2, 30, 500, np.random.default_rng(1))
    assert arr.shape == (500, 30)
    assert all(is_reduced(tuple(row)) for row in arr.tolist())


def test_reduced_sampler_uniform_second_letter():
    arr = sample_reduced_words(2, 2, 60000, np.random.default_rng(2))
    first_a = arr[arr[:, 0] == 1][:, 1]
    vals, counts = np.unique(first_a, return_counts=True)
    assert set(vals.tolist()) == {1, 2, -2}
    assert counts.min() / counts.max() > 0.9


def test_plain_sampler_covers_alphabet():
    arr = sample_plain_words(3, 5, 2000, np.random.default_rng(3))
    assert set(np.unique(arr).tolist()) == set(alphabet(3))
