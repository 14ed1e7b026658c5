"""Cogrowth exponents from count tables.

``eta`` is the reduced-word exponent (base ``2m-1``), ``theta`` the
plain-word exponent (base ``2m``). Lower bounds use that both sequences are
(near-)supermultiplicative, so ``log_base(|W_l|) / l`` never exceeds the
limit. Point estimates are two-point slopes between the largest usable
lengths and are not certified.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Dict, List, NamedTuple, Optional, Tuple

from .cayley import CountTable, build_ball, count_table
from .errors import DomainError, HypothesisNotMet, IncompleteWindow, NoSolution, UndefinedEstimate
from .presentations import Presentation
from .word_problem import TrivialityOracle

# float slack for the closed-form conversions
_EPS = 1e-12


class Bound(NamedTuple):
    value: float
    raw: float
    length: Optional[int]  # length attaining the maximum, None if floored
    empty_kernel: bool = False


@dataclass
class ExponentEstimate:
    kind: str  # "eta" or "theta"
    lower_bound: float
    point_estimate: float
    certified_upper: Optional[float] = None
    window: Tuple[int, ...] = ()
    flags: Dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["window"] = list(self.window)
        return d


def usable_lengths(table: CountTable) -> List[int]:
    """Lengths feeding the estimators.

    If every odd-length count is zero (bipartite Cayley graph) only even
    lengths are used; otherwise both parities. Length 0 never is.
    """
    odd = any(c for l, c in table.entries.items() if l % 2 == 1)
    return [l for l in table.lengths() if l >= 1 and (odd or l % 2 == 0)]


def _log_ratio(count: int, ell: int, base: int) -> float:
    return math.log(count) / (ell * math.log(base))


def theta_lower_bound(table: CountTable) -> Bound:
    """``max_l log_{2m}(|W_l|) / l`` over the usable lengths."""
    if table.kind != "plain":
        raise ValueError("theta needs a plain-word count table")
    best, arg = None, None
    for ell in usable_lengths(table):
        c = table[ell]
        if c > 0:
            v = _log_ratio(c, ell, table.base)
            if best is None or v > best:
                best, arg = v, ell
    if best is None:
        raise UndefinedEstimate("no nonzero counts at usable lengths")
    return Bound(best, best, arg)


def eta_lower_bound(table: CountTable) -> Bound:
    """``max_l (log_{2m-1}(|W'_l|) - 2) / l``, floored at 1/2.

    The ``-2`` comes from the exact inequality ``|W'_l| <= (2m-1)^(eta l + 2)``,
    which holds at every length (not just asymptotically).

    The floor holds for every group, so when no reduced trivial word is
    found (free groups, short tables) the bound is 1/2 with
    ``empty_kernel`` set.
    """
    if table.kind != "reduced":
        raise ValueError("eta needs a reduced-word count table")
    best, arg = None, None
    for ell in usable_lengths(table):
        c = table[ell]
        if c > 0:
            v = _log_ratio(c, ell, table.base) - 2 / ell
            if best is None or v > best:
                best, arg = v, ell
    if best is None:
        return Bound(0.5, float("-inf"), None, True)
    if best < 0.5:
        return Bound(0.5, best, None)
    return Bound(best, best, arg)


def _two_point(table: CountTable) -> Optional[Tuple[float, Tuple[int, int]]]:
    pts = [l for l in usable_lengths(table) if table[l] > 0]
    if len(pts) < 2:
        return None
    l1, l2 = pts[-2], pts[-1]
    slope = (math.log(table[l2]) - math.log(table[l1])) / ((l2 - l1) * math.log(table.base))
    return slope, (l1, l2)


def estimate_from_table(table: CountTable) -> ExponentEstimate:
    """Lower bound and point estimate from a single table."""
    if table.kind == "plain":
        kind, lb = "theta", theta_lower_bound(table)
    else:
        kind, lb = "eta", eta_lower_bound(table)
    flags = {
        "raw_lower": lb.raw,
        "lower_length": lb.length,
        "empty_kernel": lb.empty_kernel,
        "lower_bound_table": table.lower_bound,
        "table_digest": table.digest(),
    }
    tp = _two_point(table)
    if tp is None:
        # one usable length: the single-point ratio is all there is
        point, window = lb.value, (lb.length,) if lb.length else ()
        flags["single_point"] = True
        flags["raw_slope"] = None
    else:
        slope, window = tp
        flags["raw_slope"] = slope
        # the slope undershoots at short lengths; never report below the bound
        point = max(slope, lb.value)
    if kind == "eta":
        point = min(max(point, 0.5), 1.0)
    else:
        point = min(point, 1.0)
    return ExponentEstimate(kind, lb.value, point, None, tuple(window), flags)


# -- closed-form conversion --------------------------------------------------

def grigorchuk_theta_from_eta(eta: float, m: int) -> float:
    """``theta`` with ``(2m)^theta = (2m-1)^eta + (2m-1)^(1-eta)``."""
    if m < 2:
        raise DomainError("the conversion needs m >= 2")
    if not (0.5 - _EPS <= eta <= 1 + _EPS):
        raise DomainError(f"eta = {eta} outside [1/2, 1]")
    eta = min(max(eta, 0.5), 1.0)
    c = 2 * m - 1
    return math.log(c ** eta + c ** (1 - eta)) / math.log(2 * m)


def free_theta(m: int) -> float:
    """``theta`` of ``F_m``: ``log_{2m}(2 sqrt(2m-1))``."""
    return math.log(2 * math.sqrt(2 * m - 1)) / math.log(2 * m)


def grigorchuk_eta_from_theta(theta: float, m: int) -> float:
    """Inverse of :func:`grigorchuk_theta_from_eta` on ``eta >= 1/2``.

    Solves ``x + c/x = (2m)^theta`` with ``c = 2m-1`` for the root
    ``x >= sqrt(c)``. Near ``eta = 1/2`` the map is flat, so a discriminant
    within a few ulps of zero is treated as zero.
    """
    if m < 2:
        raise DomainError("the conversion needs m >= 2")
    if theta > 1 + _EPS:
        raise DomainError(f"theta = {theta} exceeds 1")
    theta = min(theta, 1.0)
    if theta < free_theta(m) - _EPS:
        raise NoSolution(f"theta = {theta} is below the free-group value {free_theta(m):.6f}")
    c = 2 * m - 1
    y = (2 * m) ** theta
    disc = y * y - 4 * c
    if disc <= 16 * 2.220446049250313e-16 * y * y:
        disc = 0.0
    x = (y + math.sqrt(disc)) / 2
    return min(max(math.log(x) / math.log(c), 0.5), 1.0)


# -- full pipeline -----------------------------------------------------------

def estimate_exponents(p: Presentation, oracle: TrivialityOracle, max_radius: int,
                       C: float | None = None, A: float | None = None,
                       budget: int | None = None) -> Tuple[ExponentEstimate, ExponentEstimate]:
    """Build a ball, count trivial words up to ``2 * max_radius`` and estimate both exponents.

    With ``C`` (an isoperimetric constant the caller vouches for) the
    locality certificate is attempted on the reduced table, using the
    maximal relator length of ``p`` (1 for the empty presentation). ``A``
    defaults to the largest value whose window fits in the table. A refused certificate leaves ``certified_upper``
    unset and records the reason in the flags.
    """
    from .locality import certify_upper_bound

    kwargs = {} if budget is None else {"budget": budget}
    m, radius = p.m, max_radius
    ball = build_ball(oracle, m, radius, **kwargs)
    reduced = count_table(ball, "reduced")
    plain = count_table(ball, "plain")
    eta = estimate_from_table(reduced)
    theta = estimate_from_table(plain)
    provenance = {"radius": radius, "ball_size": len(ball), "oracle": ball.oracle}
    eta.flags.update(provenance)
    theta.flags.update(provenance)
    if C is not None:
        lam_eff = max(p.max_length, 1)
        if A is None:
            A = reduced.exact_up_to / lam_eff
        try:
            cert = certify_upper_bound(reduced, C, lam_eff, A)
        except (HypothesisNotMet, IncompleteWindow) as exc:
            eta.flags["certificate_refused"] = str(exc)
        else:
            eta.certified_upper = cert.certified_exponent
            eta.flags["certificate"] = cert.to_dict()
            theta.certified_upper = grigorchuk_theta_from_eta(min(cert.certified_exponent, 1.0), m)
    return eta, theta


def estimates_to_json(estimates, **provenance) -> str:
    payload = {"estimates": [e.to_dict() for e in estimates], "provenance": provenance}
    return json.dumps(payload, indent=2, sort_keys=True, default=str)
