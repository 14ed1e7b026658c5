from fractions import Fraction

import numpy as np
import pytest

from cogrowth.errors import BudgetExceeded
from cogrowth.presentations import (
    DensityConfig,
    Presentation,
    check_small_cancellation,
    max_piece,
    parse_presentation,
    read_presentation,
    sample_density_presentation,
    small_cancellation_constant,
    surface_presentation,
    symmetrize,
    write_presentation,
)
from cogrowth.words import inverse, parse_word, rotate


def brute_max_piece(p):
    """Longest common prefix over all pairs of distinct symmetrized occurrences."""
    occ = []
    for i, r in enumerate(p.relators):
        seen = set()
        for base in (r, inverse(r)):
            for k in range(len(base)):
                w = rotate(base, k)
                if w not in seen:
                    seen.add(w)
                    occ.append((i, w))
    best = 0
    for a in range(len(occ)):
        for b in range(a + 1, len(occ)):
            (i, u), (j, v) = occ[a], occ[b]
            if i == j and u == v:
                continue
            k = 0
            while k < min(len(u), len(v)) and u[k] == v[k]:
                k += 1
            best = max(best, k)
    return best


def test_relator_count_rounding():
    assert DensityConfig(2, 0.0, 10).relator_count == 1
    assert DensityConfig(2, 0.1, 12).relator_count == round(3 ** 1.2)
    assert DensityConfig(2, 0.5, 10, "plain").relator_count == 4 ** 5


def test_density_config_validation():
    with pytest.raises(ValueError):
        DensityConfig(2, 1.5, 10)
    with pytest.raises(ValueError):
        DensityConfig(1, 0.1, 10)


def test_sampling_is_seeded():
    cfg = DensityConfig(2, 0.2, 10)
    p1 = sample_density_presentation(cfg, 7)
    p2 = sample_density_presentation(cfg, 7)
    assert p1 == p2
    assert len(p1.metadata["sampled"]) == cfg.relator_count
    assert all(len(w) == 10 for w in p1.metadata["sampled"])


def test_budget():
    with pytest.raises(BudgetExceeded):
        sample_density_presentation(DensityConfig(2, 0.9, 30), 0, budget=1000)


def test_symmetrize_surface():
    p = surface_presentation()
    assert len(symmetrize(p)) == 16


def test_piece_examples():
    p = surface_presentation()
    ok, rep = check_small_cancellation(p, Fraction(1, 6))
    assert ok and rep.max_piece_length == 1
    # <a,b | ab, ab> : duplicated relators share a full piece
    dup = Presentation.parse(2, ["abab", "abab"])
    assert max_piece(dup).max_piece_length == 4
    assert not check_small_cancellation(dup, "1/6")[0]


def test_piece_matches_brute_force():
    rng = np.random.default_rng(11)
    for _ in range(20):
        p = sample_density_presentation(DensityConfig(2, 0.15, 9), rng)
        assert max_piece(p).max_piece_length == brute_max_piece(p)


def test_alpha_as_float_is_exact():
    p = Presentation.parse(2, ["aabbaBBB"])
    assert check_small_cancellation(p, 1 / 6)[0] == check_small_cancellation(p, "1/6")[0]
    assert small_cancellation_constant("1/12") == pytest.approx(0.5)


def test_file_round_trip(tmp_path):
    p = Presentation.parse(3, ["abAB", "ccbA"])
    path = write_presentation(p, tmp_path / "p.txt", sidecar={"seed": 1})
    assert read_presentation(path) == p
    assert (tmp_path / "p.txt.json").exists()
    assert parse_presentation("# comment\nm=2\nab # trailing\n") == Presentation.parse(2, ["ab"])


def test_from_words_drops_trivial():
    p = Presentation.from_words(2, [parse_word("aA"), parse_word("Aab")])
    assert p.relators == ((2,),)
    assert p.dropped == ((1, -1),)
