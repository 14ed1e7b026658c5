"""Locality certificates for cogrowth exponents.

Given an isoperimetric constant ``C`` (``|dD| >= C * A(D)`` for reduced
van Kampen diagrams, supplied by the caller) and exact counts of trivial
words on the length window ``[A lam / 4, A lam]``, a bound
``|W_l| <= base^(eta l)`` on the window extends to every ``l >= A lam / 4``
with ``eta`` inflated by an explicit factor. Everything here is
conditional on ``C`` being correct; nothing checks it.

The same statement holds for plain words (base ``2m``) and reduced words
(base ``2m - 1``); the base is read off the count table.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import asdict, dataclass
from typing import List, Optional, Sequence

from .cayley import CountTable
from .errors import CorruptTable, CoverageError, DomainError, HypothesisNotMet, IncompleteWindow


def alpha_of(C: float) -> float:
    """``1 / log(1 / (1 - C))``, and 0 at ``C = 1``."""
    if not 0 < C <= 1:
        raise DomainError(f"C = {C} outside (0, 1]")
    if C == 1:
        return 0.0
    return 1.0 / -math.log1p(-C)


def _check_args(C, m, eta):
    if not 0 < C <= 1:
        raise DomainError(f"C = {C} outside (0, 1]")
    if m < 2:
        raise DomainError("need m >= 2")
    if eta < 0.5:
        raise DomainError(f"eta = {eta} below 1/2")


def b_inequality_lhs(B: float, C: float, eta: float, base: int) -> float:
    """``4 alpha log(B/C) + 6 + (1/eta) log_base B``; B is admissible when this is <= B."""
    return 4 * alpha_of(C) * math.log(B / C) + 6 + math.log(B) / (eta * math.log(base))


def min_B(C: float, m: int, eta: float, base: int | None = None, rtol: float = 1e-9) -> float:
    """Smallest ``B >= 1`` with ``b_inequality_lhs(B) <= B``.

    ``g(B) = B - lhs(B)`` is convex with ``g(1) < 0``, so the admissible set
    is a half-line and bisection between 1 and the sufficient value
    ``144 / C^2`` finds its left end.
    """
    _check_args(C, m, eta)
    base = base or 2 * m - 1

    def g(B):
        return B - b_inequality_lhs(B, C, eta, base)

    hi = 144.0 / (C * C)
    if g(hi) < 0:
        raise AssertionError(f"144/C^2 = {hi} does not satisfy the B inequality")
    lo = 1.0
    while hi - lo > rtol * hi:
        mid = 0.5 * (lo + hi)
        if g(mid) >= 0:
            hi = mid
        else:
            lo = mid
    return hi


@dataclass(frozen=True)
class LocalityFactor:
    product_factor: float
    exp_bound: float
    B: float
    alpha: float
    terms: int


def locality_factor(C: float, A: float, m: int, eta: float, base: int | None = None) -> LocalityFactor:
    """``prod_{i>=0} (1 + 2 sqrt(B/A) (3/4)^(i/2))`` and its bound ``exp(200 / (C sqrt A))``."""
    _check_args(C, m, eta)
    B = min_B(C, m, eta, base)
    if A < max(B, 1.0):
        raise HypothesisNotMet(f"A = {A:.6g} is below B = {B:.6g}; the window is too short to certify")
    s = 2 * math.sqrt(B / A)
    log_prod, i = 0.0, 0
    while True:
        term = s * 0.75 ** (i / 2)
        if term < 1e-18:
            break
        log_prod += math.log1p(term)
        i += 1
    product = math.exp(log_prod)
    exp_bound = math.exp(200 / (C * math.sqrt(A)))
    if product > exp_bound:
        raise AssertionError(f"product factor {product} exceeds exp bound {exp_bound}")
    return LocalityFactor(product, exp_bound, B, alpha_of(C), i)


# -- certificates ------------------------------------------------------------

@dataclass(frozen=True)
class LocalityConstants:
    C: float
    alpha: float
    B: float
    A: float
    m: int
    eta_window: float
    lam: int
    base: int


@dataclass(frozen=True)
class LocalityCertificate:
    window: tuple
    eta_window: float
    factor: float
    certified_exponent: float
    exp_bound: float
    method: str
    inputs_hash: str
    kind: str
    constants: LocalityConstants

    @property
    def valid_from(self) -> float:
        """The bound is claimed for all lengths ``>= A lam / 4``."""
        return self.constants.A * self.constants.lam / 4

    def to_dict(self) -> dict:
        d = asdict(self)
        d["window"] = list(self.window)
        d["valid_from"] = self.valid_from
        d["conditional_on"] = f"C = {self.constants.C} being an isoperimetric constant"
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def certification_window(A: float, lam: int) -> tuple:
    """``[floor(A lam / 4), ceil(A lam)]``: rounded outward, so a superset is checked."""
    return math.floor(A * lam / 4), math.ceil(A * lam)


def window_exponent(counts: CountTable, lo: int, hi: int) -> float:
    """``max (1/l) log_base |W_l|`` over the window, zero counts skipped, floored at 1/2."""
    best = 0.5
    lb = math.log(counts.base)
    for ell in range(max(lo, 1), hi + 1):
        c = counts[ell]
        if c > 0:
            best = max(best, math.log(c) / (ell * lb))
    return best


def certify_upper_bound(counts: CountTable, C: float, lam: int, A: float, m: int | None = None) -> LocalityCertificate:
    """Certified exponent bound for all lengths ``>= A lam / 4``."""
    m = m or counts.m
    if lam < 1:
        raise DomainError("lam must be >= 1")
    if counts.lower_bound:
        raise IncompleteWindow("counts are lower bounds only and cannot certify an upper bound")
    lo, hi = certification_window(A, lam)
    missing = [l for l in range(max(lo, 1), hi + 1) if l not in counts]
    if missing or hi > counts.exact_up_to:
        raise IncompleteWindow(
            f"window [{lo}, {hi}] not covered by exact counts (exact up to {counts.exact_up_to})"
        )
    eta_w = window_exponent(counts, lo, hi)
    lf = locality_factor(C, A, m, eta_w, counts.base)
    consts = LocalityConstants(C, lf.alpha, lf.B, A, m, eta_w, lam, counts.base)
    payload = f"{counts.digest()}|{C!r}|{lam}|{A!r}|{m}"
    return LocalityCertificate(
        window=(lo, hi),
        eta_window=eta_w,
        factor=lf.product_factor,
        certified_exponent=eta_w * lf.product_factor,
        exp_bound=lf.exp_bound,
        method="product",
        inputs_hash=hashlib.sha256(payload.encode()).hexdigest()[:16],
        kind=counts.kind,
        constants=consts,
    )


# -- quasimultiplicativity ---------------------------------------------------

def superadditivity_violations(counts: CountTable, limit: int = 20) -> List[tuple]:
    """Pairs ``(a, b)`` breaking ``|W_{a+b}| >= |W_a| |W_b|``.

    For reduced tables the shifted form ``|W'_{a+b+2}| >= |W'_a| |W'_b|``
    with ``a, b >= 1`` is checked instead: ``u x v x^-1`` with a letter
    ``x`` avoiding three cancellations is an injection for ``m >= 2``.
    """
    shift = 2 if counts.kind == "reduced" else 0
    lengths = [l for l in counts.lengths() if l >= 1]
    bad = []
    for i, a in enumerate(lengths):
        for b in lengths[i:]:
            t = a + b + shift
            if t in counts and counts[t] < counts[a] * counts[b]:
                bad.append((a, b))
                if len(bad) >= limit:
                    return bad
    return bad


@dataclass(frozen=True)
class QuasiRow:
    ell: int
    lhs: int
    rhs: float  # (ell / lam) * best product
    log_slack: float  # log(rhs) - log(lhs); negative means the inequality fails
    split: int
    inflation: int

    @property
    def holds(self) -> bool:
        return self.log_slack >= 0


def inflation(ell: int, C: float, lam: int) -> int:
    """Length inflation ``2 alpha lam log(l / (C lam)) + 3 lam``, rounded up."""
    v = 2 * alpha_of(C) * lam * math.log(ell / (C * lam)) + 3 * lam
    return max(0, math.ceil(v))


def quasimultiplicativity_gap(counts: CountTable, C: float, lam: int,
                              lengths: Optional[Sequence[int]] = None) -> List[QuasiRow]:
    """Both sides of ``|W_l| <= (l/lam) max_{l/4 <= l' <= 3l/4} |W_{l'+d}| |W_{l-l'+d}|``.

    A diagnostic for whether ``(counts, C)`` are compatible, not a proof.
    """
    if lam < 1:
        raise DomainError("lam must be >= 1")
    bad = superadditivity_violations(counts, limit=1)
    if bad:
        raise CorruptTable(f"counts violate superadditivity at lengths {bad[0]}")

    def needed(ell):
        return ell - math.ceil(ell / 4) + inflation(ell, C, lam)

    top = counts.exact_up_to
    if lengths is None:
        lengths = [l for l in counts.lengths() if l >= 4 and needed(l) <= top]
        if not lengths:
            raise CoverageError("no length whose inflated splits fit in the table")
    rows = []
    for ell in lengths:
        if needed(ell) > top or ell not in counts:
            raise CoverageError(f"length {ell} needs counts up to {needed(ell)}, table stops at {top}")
        d = inflation(ell, C, lam)
        best, split = -1, None
        for lp in range(math.ceil(ell / 4), math.floor(3 * ell / 4) + 1):
            v = counts[lp + d] * counts[ell - lp + d]
            if v > best:
                best, split = v, lp
        lhs = counts[ell]
        if lhs == 0:
            slack = math.inf
        elif best == 0:
            slack = -math.inf
        else:
            slack = math.log(ell) + math.log(best) - math.log(lam) - math.log(lhs)
        rows.append(QuasiRow(ell, lhs, ell / lam * float(best), slack, split, d))
    return rows


def heuristic_isoperimetric_constant(d: float, cartan_hadamard_constant: float) -> float:
    """Heuristic ``C = (1/2 - d) / kappa`` for density-``d`` random groups.

    Not a proof of anything: ``kappa`` is supplied by the user and the
    result should be labelled heuristic wherever it is used.
    """
    if not 0 <= d < 0.5:
        raise DomainError("heuristic needs 0 <= d < 1/2")
    if cartan_hadamard_constant <= 0:
        raise DomainError("the Cartan-Hadamard constant must be positive")
    return min(1.0, (0.5 - d) / cartan_hadamard_constant)
