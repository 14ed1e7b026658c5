import math

import numpy as np
import pytest

from cogrowth.cayley import (
    CountTable,
    build_ball,
    closed_walk_counts,
    count_table,
    count_trivial_reduced_words,
    count_trivial_words,
    free_group_counts,
    monte_carlo_return,
    reduced_closed_walk_counts,
    spectral_radius_lower_bound,
    trivial_by_walk,
    wilson_interval,
)
from cogrowth.errors import InsufficientRadius, PartialBallError
from cogrowth.presentations import surface_presentation
from cogrowth.word_problem import AbelianOracle, DehnOracle, FreeOracle
from cogrowth.words import format_word, parse_word, reduce

from conftest import brute_abelian_count, brute_free_count


def test_free_ball_sizes():
    ball = build_ball(FreeOracle(2), 2, 3)
    assert ball.sphere_sizes() == [1, 4, 12, 36]
    assert ball.walk(parse_word("abBA")) == 0


def test_abelian_ball_sizes():
    ball = build_ball(AbelianOracle(2), 2, 3)
    assert ball.sphere_sizes() == [1, 4, 8, 12]


def test_surface_sphere_sizes():
    ball = build_ball(DehnOracle(surface_presentation()), 4, 4)
    # 8*7^3 reduced words of length 4, minus one per pair of half-relator words
    assert ball.sphere_sizes() == [1, 8, 56, 392, 2744 - 8]


def test_normal_forms_are_shortlex_geodesics():
    ball = build_ball(AbelianOracle(2), 2, 3)
    for w, k in zip(ball.words, ball.depth):
        assert len(w) == k and reduce(w) == w
    assert "1 " in ball.dump()


def test_counts_against_brute_force():
    free = build_ball(FreeOracle(2), 2, 3)
    ab = build_ball(AbelianOracle(2), 2, 3)
    fc = closed_walk_counts(free, 6)
    ac = closed_walk_counts(ab, 6)
    for ell in range(7):
        assert fc[ell] == brute_free_count(2, ell)
        assert ac[ell] == brute_abelian_count(2, ell)
    rc = reduced_closed_walk_counts(ab, 6)
    for ell in range(1, 7):
        assert rc[ell] == brute_abelian_count(2, ell, reduced_only=True)


def test_free_dp_matches_walks():
    ball = build_ball(FreeOracle(3), 3, 5)
    assert closed_walk_counts(ball, 10) == free_group_counts(3, 10)
    assert reduced_closed_walk_counts(ball, 10) == [1] + [0] * 10


def test_big_integers_stay_exact():
    ball = build_ball(AbelianOracle(2), 2, 16)
    counts = closed_walk_counts(ball, 32)
    assert counts[32] == math.comb(32, 16) ** 2
    assert isinstance(counts[32], int)


def test_insufficient_radius():
    ball = build_ball(FreeOracle(2), 2, 2)
    with pytest.raises(InsufficientRadius):
        count_trivial_words(ball, 6)
    with pytest.raises(InsufficientRadius):
        trivial_by_walk(ball, (1,) * 5)


def test_partial_ball():
    with pytest.raises(PartialBallError) as exc:
        build_ball(FreeOracle(2), 2, 10, budget=100)
    assert exc.value.completed_radius == 3


def test_count_table_csv_round_trip(tmp_path):
    ball = build_ball(AbelianOracle(2), 2, 4)
    t = count_table(ball, "reduced")
    assert t.base == 3 and t.m == 2
    back = CountTable.from_csv(t.to_csv())
    assert back == t and back.digest() == t.digest()
    t.write(tmp_path / "c.csv")
    assert (tmp_path / "c.csv").read_text().startswith("kind,base,length,count\n")


def test_spectral_lower_bound_free():
    est = spectral_radius_lower_bound(build_ball(FreeOracle(2), 2, 8))
    assert est.converged
    assert 0.8 < est.value < math.sqrt(3) / 2


def test_spectral_abelian_approaches_one():
    small = spectral_radius_lower_bound(build_ball(AbelianOracle(2), 2, 10)).value
    big = spectral_radius_lower_bound(build_ball(AbelianOracle(2), 2, 20)).value
    assert small < big < 1


def test_wilson_interval_contains_estimate():
    lo, hi = wilson_interval(30, 100)
    assert lo < 0.3 < hi
    assert wilson_interval(0, 10)[0] == 0.0


def test_monte_carlo_matches_exact_and_is_chunk_independent():
    ball = build_ball(AbelianOracle(2), 2, 4)
    exact = count_trivial_words(ball, 8) / 4 ** 8
    res = monte_carlo_return(None, 2, 8, 40000, 5, ball=ball, chunk=10000)
    lo, hi = res.interval
    assert lo <= exact <= hi
    slow = monte_carlo_return(AbelianOracle(2), 2, 8, 40000, 5, chunk=10000)
    assert slow.hits == res.hits
    assert count_trivial_reduced_words(ball, 4) == 8
    assert format_word(ball.words[1]) == "a"


def test_one_sided_ball_gives_lower_bounds():
    from cogrowth.presentations import Presentation

    # not C'(1/6): Dehn rewriting is not confluent here
    p = Presentation.parse(2, ["aBAb", "bAAb"])
    ball = build_ball(DehnOracle(p, strict=False), 2, 6)
    adj = ball.adjacency
    for g in range(len(ball)):
        for j in range(4):
            h = adj[g, j]
            if h >= 0:
                assert adj[h, j ^ 1] == g
    walks = closed_walk_counts(ball, 8)
    assert walks[2] == 4
    # Z^2-like relation abAB is a consequence, so the true counts dominate the free ones
    assert all(c >= f for c, f in zip(walks, free_group_counts(2, 8)))
