import math

import numpy as np
import pytest

from cogrowth.cayley import CountTable, free_group_counts
from cogrowth.errors import CorruptTable, CoverageError, DomainError, HypothesisNotMet, IncompleteWindow
from cogrowth.locality import (
    alpha_of,
    b_inequality_lhs,
    certification_window,
    certify_upper_bound,
    heuristic_isoperimetric_constant,
    locality_factor,
    min_B,
    quasimultiplicativity_gap,
    superadditivity_violations,
)


def synthetic(base, eta, L, kind="reduced"):
    return CountTable(kind, base, {l: math.floor(base ** (eta * l)) for l in range(L + 1)}, L)


def test_alpha():
    assert alpha_of(1 - 1 / math.e) == pytest.approx(1.0)
    assert alpha_of(1) == 0
    assert alpha_of(0.5) == pytest.approx(1 / math.log(2))
    for C in np.linspace(0.05, 1, 20):
        assert alpha_of(C) <= 1 / C
    with pytest.raises(DomainError):
        alpha_of(0)


def test_min_B_examples():
    assert b_inequality_lhs(576, 0.5, 0.5, 3) == pytest.approx(58.25, abs=0.05)
    b = min_B(0.5, 2, 0.5)
    assert b <= 576
    assert b_inequality_lhs(b, 0.5, 0.5, 3) <= b
    assert b_inequality_lhs(b * (1 - 1e-6), 0.5, 0.5, 3) > b * (1 - 1e-6)
    assert min_B(0.5, 2, 1.0) < min_B(0.5, 2, 0.5)


def test_factor_examples():
    f = locality_factor(1, 40000, 2, 0.5)
    assert f.exp_bound == pytest.approx(math.e, abs=1e-12)
    assert 1 <= f.product_factor <= f.exp_bound
    g = locality_factor(0.5, 1e6, 2, 0.5)
    assert 1 <= g.product_factor <= math.exp(0.4)
    with pytest.raises(HypothesisNotMet):
        locality_factor(0.5, 10, 2, 0.5)


def test_factor_decreasing_in_A():
    vals = [locality_factor(0.5, A, 2, 0.6).product_factor for A in (40, 100, 1000, 1e5)]
    assert all(a > b for a, b in zip(vals, vals[1:]))


def test_window_rounds_outward():
    assert certification_window(16.3, 8) == (32, 131)


def test_certify_synthetic():
    t = synthetic(3, 0.6, 600)
    cert = certify_upper_bound(t, 0.5, 8, 64)
    assert cert.eta_window == pytest.approx(0.6, abs=1e-3)
    f = locality_factor(0.5, 64, 2, cert.eta_window, 3)
    assert cert.certified_exponent == pytest.approx(cert.eta_window * f.product_factor)
    assert cert.valid_from == 128
    assert '"method": "product"' in cert.to_json()


def test_certify_example_scale_is_refused():
    # A = 16 is below B for C = 1/2, so the certificate must be refused
    with pytest.raises(HypothesisNotMet):
        certify_upper_bound(synthetic(3, 0.6, 200), 0.5, 8, 16)


def test_certify_vacuous_window():
    t = CountTable("reduced", 3, {l: 0 for l in range(0, 201)} | {0: 1}, 200)
    cert = certify_upper_bound(t, 1.0, 1, 200)
    assert cert.eta_window == 0.5
    assert cert.certified_exponent == pytest.approx(cert.factor / 2)


def test_certify_incomplete_and_lower_bound_tables():
    with pytest.raises(IncompleteWindow):
        certify_upper_bound(synthetic(3, 0.6, 100), 0.5, 8, 64)
    t = synthetic(3, 0.6, 600)
    t.lower_bound = True
    with pytest.raises(IncompleteWindow):
        certify_upper_bound(t, 0.5, 8, 64)


def test_abelian_certificate_not_below_window():
    vals = []
    for A in (20, 40, 80):
        L = 4 * A
        z = CountTable("plain", 4, {l: math.comb(l, l // 2) ** 2 if l % 2 == 0 else 0 for l in range(L + 1)}, L)
        cert = certify_upper_bound(z, 1.0, 4, A)
        assert cert.certified_exponent >= cert.eta_window
        vals.append(cert.eta_window)
    assert vals[0] < vals[1] < vals[2] < 1


def test_free_certificate_is_sound():
    counts = free_group_counts(2, 400)
    t = CountTable("plain", 4, dict(enumerate(counts)), 400)
    true_theta = math.log(2 * math.sqrt(3)) / math.log(4)
    for A in (min_B(1.0, 2, 0.5, 4) + 1, 100, 400):
        cert = certify_upper_bound(t, 1.0, 1, A)
        assert cert.certified_exponent >= true_theta


def test_superadditivity_and_corruption():
    free = CountTable("plain", 4, dict(enumerate(free_group_counts(2, 40))), 40)
    assert superadditivity_violations(free) == []
    bad = CountTable("plain", 4, {**free.entries, 20: 1}, 40)
    assert superadditivity_violations(bad)
    with pytest.raises(CorruptTable):
        quasimultiplicativity_gap(bad, 0.5, 1)


def test_quasimultiplicativity_free():
    free = CountTable("plain", 4, dict(enumerate(free_group_counts(2, 120))), 120)
    rows = quasimultiplicativity_gap(free, 0.5, 1)
    assert rows and all(r.holds for r in rows)
    with pytest.raises(CoverageError):
        quasimultiplicativity_gap(CountTable("plain", 4, dict(enumerate(free_group_counts(2, 40))), 40),
                                  0.5, 1, lengths=[40])


def test_quasimultiplicativity_abelian_runs():
    z = CountTable("plain", 4, {l: math.comb(l, l // 2) ** 2 if l % 2 == 0 else 0 for l in range(201)}, 200)
    rows = quasimultiplicativity_gap(z, 0.9, 4)
    assert rows and all(math.isfinite(r.log_slack) or r.lhs == 0 for r in rows)


def test_heuristic_constant():
    assert heuristic_isoperimetric_constant(0.1, 2.0) == pytest.approx(0.2)
    with pytest.raises(DomainError):
        heuristic_isoperimetric_constant(0.6, 1.0)
