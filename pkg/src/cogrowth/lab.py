"""Experiment harness: reproducible sweeps and their persistence.

Every cell ``(d, ell, seed index)`` draws from its own generator
``default_rng([seed, round(d * 1e6), ell, index])``, so a cell's output
does not depend on which other cells run or in which order.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import statistics
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np

from . import __version__
from .cayley import build_ball, count_table, wilson_interval
from .errors import CogrowthError, DomainError, InsufficientRadius
from .exponents import estimate_from_table
from .locality import certify_upper_bound
from .presentations import DensityConfig, check_small_cancellation, format_presentation, sample_density_presentation
from .word_problem import DehnOracle

log = logging.getLogger(__name__)

KINDS = ("sample", "sc-check", "count", "estimate", "certify", "density-scan", "piece-scan", "curve")
SC_DELTAS = (0.05, 0.1)
# Dehn's algorithm needs C'(1/6), which the density heuristic C'(2d) gives below 1/12
CURVE_MAX_DENSITY = 1 / 12


@dataclass
class ExperimentConfig:
    kind: str = "density-scan"
    m: int = 2
    d: float = 0.0
    d_values: List[float] = field(default_factory=list)
    ell: int = 12
    ell_values: List[int] = field(default_factory=list)
    word_kind: str = "reduced"
    radius: int = 0
    trials: int = 0
    C: Optional[float] = None
    A: Optional[float] = None
    K: int = 2
    n_seeds: int = 30
    seed: int = 0
    threads: int = 1
    budget: int = 3_000_000
    out: Optional[str] = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown experiment kind {self.kind!r}")
        for d in [self.d, *self.d_values]:
            if not 0 <= d <= 1:
                raise ValueError(f"density {d} outside [0, 1]")
        if not 0 <= self.seed < 2 ** 64:
            raise ValueError("seed must be a 64-bit unsigned integer")

    @property
    def densities(self) -> List[float]:
        return list(self.d_values) or [self.d]

    @property
    def lengths(self) -> List[int]:
        return list(self.ell_values) or [self.ell]

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        known = {k: v for k, v in data.items() if k in cls.__dataclass_fields__}
        unknown = set(data) - set(known)
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**known)


@dataclass
class ResultRecord:
    config: dict
    seed: int
    outputs: dict
    wall_clock: float = 0.0
    version: str = __version__

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True, default=str) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "ResultRecord":
        return cls(**json.loads(text))

    def same_outputs(self, other: "ResultRecord") -> bool:
        """Equality ignoring the wall clock."""
        return (self.config, self.seed, self.outputs, self.version) == (
            other.config, other.seed, other.outputs, other.version)


def cell_rng(seed: int, d: float, ell: int, index: int) -> np.random.Generator:
    return np.random.default_rng([seed, int(round(d * 1e6)), ell, index])


def _map(fn, jobs, threads):
    if threads > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=threads) as ex:
            return list(ex.map(fn, jobs))
    return [fn(j) for j in jobs]


# -- density scan ------------------------------------------------------------

def _scan_cell(job) -> dict:
    cfg, d, ell, s = job
    out = {"d": d, "ell": ell, "seed": s}
    try:
        p = sample_density_presentation(DensityConfig(cfg.m, d, ell, cfg.word_kind),
                                        cell_rng(cfg.seed, d, ell, s), budget=cfg.budget)
        ok16, report = check_small_cancellation(p, "1/6")
        out["relators"] = len(p.relators)
        out["max_piece"] = report.max_piece_length
        out["piece_ratio"] = report.max_piece_length / ell
        out["sc16"] = ok16
        for delta in SC_DELTAS:
            alpha = min(1.0, 2 * d + delta)
            out[f"sc_2d+{delta}"] = check_small_cancellation(p, alpha)[0]
        if ok16 and cfg.radius > 0:
            out["estimates"] = _estimate_cell(p, DehnOracle(p), cfg)
    except CogrowthError as exc:
        out["error"] = f"{type(exc).__name__}: {exc}"
    return out


def _estimate_cell(p, oracle, cfg) -> dict:
    ball = build_ball(oracle, p.m, cfg.radius, budget=cfg.budget)
    reduced = count_table(ball, "reduced")
    plain = count_table(ball, "plain")
    eta = estimate_from_table(reduced)
    theta = estimate_from_table(plain)
    res = {
        "eta": eta.to_dict(),
        "theta": theta.to_dict(),
        "counts_reduced": {str(k): str(v) for k, v in reduced.entries.items()},
        "counts_plain": {str(k): str(v) for k, v in plain.entries.items()},
        "exact": ball.exact,
        "oracle": oracle.name,
    }
    if cfg.C is not None and cfg.A is not None:
        try:
            cert = certify_upper_bound(reduced, cfg.C, max(p.max_length, 1), cfg.A)
            res["certificate"] = cert.to_dict()
        except CogrowthError as exc:
            res["certificate_error"] = f"{type(exc).__name__}: {exc}"
    return res


def run_density_scan(cfg: ExperimentConfig) -> ResultRecord:
    t0 = time.perf_counter()
    jobs = [(cfg, d, ell, s) for d in cfg.densities for ell in cfg.lengths for s in range(cfg.n_seeds)]
    cells = _map(_scan_cell, jobs, cfg.threads)
    summary = []
    for d in cfg.densities:
        for ell in cfg.lengths:
            rows = [c for c in cells if c["d"] == d and c["ell"] == ell and "error" not in c]
            n = len(rows)
            hits = sum(c["sc16"] for c in rows)
            summary.append({
                "d": d,
                "ell": ell,
                "n_seeds": n,
                "sc16_rate": hits / n if n else None,
                "sc16_ci": list(wilson_interval(hits, n)) if n else None,
                "mean_piece_ratio": statistics.fmean(c["piece_ratio"] for c in rows) if n else None,
                **{f"sc_2d+{delta}_rate": (sum(c[f"sc_2d+{delta}"] for c in rows) / n if n else None)
                   for delta in SC_DELTAS},
                "errors": sum(1 for c in cells if c["d"] == d and c["ell"] == ell and "error" in c),
            })
    return ResultRecord(cfg.to_dict(), cfg.seed, {"cells": cells, "summary": summary},
                        time.perf_counter() - t0)


# -- cogrowth curve ----------------------------------------------------------

def _curve_cell(job) -> dict:
    cfg, d, ell, s = job
    out = {"d": d, "ell": ell, "seed": s}
    try:
        if cfg.radius < 1:
            raise InsufficientRadius(f"radius {cfg.radius} gives no counts")
        p = sample_density_presentation(DensityConfig(cfg.m, d, ell, cfg.word_kind),
                                        cell_rng(cfg.seed, d, ell, s), budget=cfg.budget)
        ok16, _ = check_small_cancellation(p, "1/6")
        # without C'(1/6) only the one-sided oracle is sound; its counts are lower bounds
        oracle = DehnOracle(p, strict=ok16)
        out["presentation"] = format_presentation(p)
        out["sc16"] = ok16
        out.update(_estimate_cell(p, oracle, cfg))
    except CogrowthError as exc:
        out["error"] = f"{type(exc).__name__}: {exc}"
    return out


def run_cogrowth_curve(cfg: ExperimentConfig) -> ResultRecord:
    """Exponent estimates per (ell, seed) at one density below 1/12."""
    t0 = time.perf_counter()
    d = cfg.d
    if d >= CURVE_MAX_DENSITY:
        raise DomainError(f"cogrowth curves need d < 1/12, got {d}")
    jobs = [(cfg, d, ell, s) for ell in cfg.lengths for s in range(cfg.n_seeds)]
    cells = _map(_curve_cell, jobs, cfg.threads)
    summary = []
    for ell in cfg.lengths:
        ok = [c for c in cells if c["ell"] == ell and "error" not in c]
        pts = [c["eta"]["point_estimate"] for c in ok]
        summary.append({
            "ell": ell,
            "n_seeds": len(ok),
            "errors": sum(1 for c in cells if c["ell"] == ell and "error" in c),
            "eta_point_median": statistics.median(pts) if pts else None,
            "eta_lower_min": min((c["eta"]["lower_bound"] for c in ok), default=None),
            "lower_bound_counts": sum(1 for c in ok if not c["exact"]),
        })
    return ResultRecord(cfg.to_dict(), cfg.seed, {"cells": cells, "summary": summary},
                        time.perf_counter() - t0)


# -- export ------------------------------------------------------------------

ESTIMATE_COLUMNS = ["seed", "d", "ell", "eta_lower", "eta_point", "theta_lower", "theta_point", "cert_upper"]
SCAN_COLUMNS = ["d", "ell", "sc16_rate", "mean_piece_ratio", "n_seeds"]
COUNT_COLUMNS = ["seed", "d", "ell", "kind", "length", "count"]


def _csv(columns, rows) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=columns, lineterminator="\n", extrasaction="ignore")
    w.writeheader()
    for r in rows:
        w.writerow({k: ("" if r.get(k) is None else r.get(k)) for k in columns})
    return buf.getvalue()


def estimate_rows(record: ResultRecord) -> List[dict]:
    rows = []
    for c in record.outputs.get("cells", []):
        est = c.get("estimates", c)
        if "eta" not in est:
            continue
        cert = est.get("certificate", {}).get("certified_exponent")
        rows.append({
            "seed": c["seed"], "d": c["d"], "ell": c["ell"],
            "eta_lower": est["eta"]["lower_bound"], "eta_point": est["eta"]["point_estimate"],
            "theta_lower": est["theta"]["lower_bound"], "theta_point": est["theta"]["point_estimate"],
            "cert_upper": cert,
        })
    return rows


def count_rows(record: ResultRecord) -> List[dict]:
    rows = []
    for c in record.outputs.get("cells", []):
        est = c.get("estimates", c)
        for kind in ("plain", "reduced"):
            for length, count in est.get(f"counts_{kind}", {}).items():
                rows.append({"seed": c["seed"], "d": c["d"], "ell": c["ell"], "kind": kind,
                             "length": length, "count": count})
    return rows


def export(record: ResultRecord, out_dir, stem: str = "result", formats=("json", "csv")) -> List[Path]:
    """Write the JSON archive and one CSV per result family present."""
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        written = []
        if "json" in formats:
            path = out / f"{stem}.json"
            path.write_text(record.to_json())
            written.append(path)
        if "csv" in formats:
            tables = {
                "estimates": (ESTIMATE_COLUMNS, estimate_rows(record)),
                "counts": (COUNT_COLUMNS, count_rows(record)),
                "scan": (SCAN_COLUMNS, record.outputs.get("summary", []) if "sc16_rate" in
                         (record.outputs.get("summary") or [{}])[0] else []),
            }
            for name, (cols, rows) in tables.items():
                if rows:
                    path = out / f"{stem}_{name}.csv"
                    path.write_text(_csv(cols, rows))
                    written.append(path)
    except OSError as exc:
        raise OSError(f"cannot write results under {out}: {exc}") from exc
    return written


def import_record(path) -> ResultRecord:
    return ResultRecord.from_json(Path(path).read_text())


def load_config(path) -> Dict:
    """Read an ExperimentConfig mapping from YAML (JSON is valid YAML too)."""
    import yaml

    with open(path) as fh:
        data = yaml.safe_load(fh) or {}
    if not isinstance(data, dict):
        raise ValueError(f"{path}: config must be a mapping")
    return data
