"""Command-line entry point: ``cogrowth <subcommand> ...``."""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from .cayley import CountTable, build_ball, count_table
from .errors import CogrowthError
from .exponents import estimate_exponents, estimates_to_json
from .lab import ExperimentConfig, export, load_config, run_cogrowth_curve, run_density_scan
from .locality import certify_upper_bound
from .presentations import (
    DensityConfig,
    Presentation,
    check_small_cancellation,
    format_presentation,
    read_presentation,
    sample_density_presentation,
    write_presentation,
)
from .vankampen import diagram_to_json, metrics, render_dot, search_diagram
from .word_problem import AbelianOracle, DehnOracle, FreeOracle
from .words import as_rng, format_word, parse_word

log = logging.getLogger("cogrowth")


def _add_group_args(p: argparse.ArgumentParser):
    g = p.add_argument_group("group")
    g.add_argument("--presentation", "-p", help="presentation file (m=<int> line, then one relator per line)")
    g.add_argument("--m", type=int, default=2, help="generator count for --relators/--free/--abelian")
    g.add_argument("--relators", nargs="*", help="relators in a/A letter form")
    g.add_argument("--free", action="store_true", help="free group on --m generators")
    g.add_argument("--abelian", action="store_true", help="free abelian group Z^m (counting only)")
    g.add_argument("--lower", action="store_true", help="allow the one-sided Dehn oracle (counts become lower bounds)")


def _group(args):
    """(presentation, oracle) from the group options."""
    if args.abelian:
        return Presentation.parse(args.m, ["abAB"]) if args.m == 2 else Presentation(args.m), AbelianOracle(args.m)
    if args.free:
        return Presentation(args.m), FreeOracle(args.m)
    if args.presentation:
        p = read_presentation(args.presentation)
    elif args.relators is not None:
        p = Presentation.parse(args.m, args.relators)
    else:
        raise SystemExit("need --presentation, --relators, --free or --abelian")
    if not p.relators:
        return p, FreeOracle(p.m)
    return p, DehnOracle(p, strict=not args.lower)


def _emit(args, text: str, name: str):
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / name).write_text(text)
        log.info("wrote %s", out / name)
    else:
        sys.stdout.write(text)


def cmd_sample(args):
    rng = as_rng(args.seed)
    cfg = DensityConfig(args.m, args.d, args.ell, args.kind)
    for i in range(args.count):
        p = sample_density_presentation(cfg, rng, budget=args.budget)
        meta = {k: v for k, v in p.metadata.items() if k != "sampled"}
        meta["sampled"] = [format_word(w) for w in p.metadata["sampled"]]
        meta["seed"] = args.seed
        if args.out:
            Path(args.out).mkdir(parents=True, exist_ok=True)
            write_presentation(p, Path(args.out) / f"presentation_{i}.txt", sidecar=meta)
        else:
            sys.stdout.write(format_presentation(p, comment=f"seed={args.seed} index={i}"))


def cmd_sc_check(args):
    p, _ = _group(argparse.Namespace(**{**vars(args), "lower": True}))
    ok, rep = check_small_cancellation(p, args.alpha)
    payload = {
        "alpha": args.alpha,
        "holds": ok,
        "max_piece_length": rep.max_piece_length,
        "witness": rep.witness,
        "piece_length_histogram": {str(k): v for k, v in rep.piece_length_histogram.items()},
    }
    _emit(args, json.dumps(payload, indent=2, sort_keys=True) + "\n", "sc_check.json")


def cmd_count(args):
    p, oracle = _group(args)
    ball = build_ball(oracle, p.m, args.radius, budget=args.budget)
    table = count_table(ball, args.kind)
    if table.lower_bound:
        log.warning("oracle %s is one-sided: counts are lower bounds", oracle.name)
    _emit(args, table.to_csv(), f"counts_{args.kind}.csv")


def cmd_estimate(args):
    p, oracle = _group(args)
    est = estimate_exponents(p, oracle, args.radius, C=args.C, A=args.A, budget=args.budget)
    text = estimates_to_json(est, presentation=format_presentation(p), seed=args.seed, radius=args.radius)
    _emit(args, text + "\n", "estimate.json")


def cmd_certify(args):
    table = CountTable.from_csv(Path(args.counts).read_text())
    cert = certify_upper_bound(table, args.C, args.lam, args.A)
    _emit(args, cert.to_json() + "\n", "certificate.json")


def _sweep_config(args, kind, **extra) -> ExperimentConfig:
    data = load_config(args.config) if args.config else {}
    data.setdefault("kind", kind)
    for k, v in extra.items():
        if v is not None:
            data[k] = v
    data.setdefault("seed", args.seed)
    data.setdefault("threads", args.threads)
    data.setdefault("budget", args.budget)
    return ExperimentConfig.from_dict(data)


def _write_record(args, record, stem):
    out = args.out or "."
    for path in export(record, out, stem):
        log.info("wrote %s", path)


def cmd_scan_density(args):
    cfg = _sweep_config(args, "density-scan", m=args.m, d_values=args.d_values, ell_values=args.ell_values,
                        n_seeds=args.seeds, radius=args.radius)
    record = run_density_scan(cfg)
    for row in record.outputs["summary"]:
        log.info("d=%s ell=%s sc16_rate=%s mean_piece_ratio=%s", row["d"], row["ell"], row["sc16_rate"],
                 row["mean_piece_ratio"])
    _write_record(args, record, "density_scan")


def cmd_curve(args):
    cfg = _sweep_config(args, "curve", m=args.m, d=args.d, ell_values=args.ell_values, n_seeds=args.seeds,
                        radius=args.radius, C=args.C, A=args.A)
    record = run_cogrowth_curve(cfg)
    for row in record.outputs["summary"]:
        log.info("ell=%s median eta=%s", row["ell"], row["eta_point_median"])
    _write_record(args, record, "curve")


def cmd_vk_search(args):
    p, _ = _group(argparse.Namespace(**{**vars(args), "lower": True}))
    w = parse_word(args.word, p.m)
    d = search_diagram(p, w, args.K, budget=args.budget)
    if d is None:
        _emit(args, json.dumps({"word": args.word, "found": False, "max_faces": args.K}) + "\n", "diagram.json")
        return
    if args.dot:
        _emit(args, render_dot(d), "diagram.dot")
        return
    payload = json.loads(diagram_to_json(d))
    mt = metrics(d)
    payload.update(word=args.word, found=True, max_faces=args.K,
                   metrics={"boundary_length": mt.boundary_length, "faces": mt.face_count, "area": mt.area,
                            "external_edges": mt.external_edges, "internal_edges": mt.internal_edges,
                            "filament_edges": mt.filament_edges})
    _emit(args, json.dumps(payload, indent=2, sort_keys=True) + "\n", "diagram.json")


def _int_list(s):
    return [int(x) for x in s.split(",") if x]


def _float_list(s):
    return [float(x) for x in s.split(",") if x]


def _add_global_args(p: argparse.ArgumentParser, top: bool = False):
    """Global flags, accepted before or after the subcommand.

    Subcommand copies default to SUPPRESS so an absent flag does not
    overwrite the value parsed at the top level.
    """
    def dflt(v):
        return v if top else argparse.SUPPRESS

    p.add_argument("--seed", type=int, default=dflt(0))
    p.add_argument("--out", default=dflt(os.environ.get("COGROWTH_OUT")),
                   help="output directory (env COGROWTH_OUT)")
    p.add_argument("--threads", type=int, default=dflt(int(os.environ.get("COGROWTH_THREADS", "1"))),
                   help="worker processes for sweeps (env COGROWTH_THREADS)")
    p.add_argument("--budget", type=int, default=dflt(3_000_000), help="size budget for balls and searches")
    p.add_argument("--config", default=dflt(None), help="YAML file with ExperimentConfig fields")
    p.add_argument("-v", "--verbose", action="count", default=dflt(0))


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="cogrowth", description=__doc__)
    _add_global_args(ap, top=True)
    sub = ap.add_subparsers(dest="command", required=True)

    s = sub.add_parser("sample", help="sample density-model presentations")
    s.add_argument("--m", type=int, default=2)
    s.add_argument("--d", type=float, required=True)
    s.add_argument("--ell", type=int, required=True)
    s.add_argument("--kind", choices=("reduced", "plain"), default="reduced")
    s.add_argument("--count", type=int, default=1)
    _add_global_args(s)
    s.set_defaults(func=cmd_sample)

    s = sub.add_parser("sc-check", help="piece analysis and C'(alpha) test")
    _add_group_args(s)
    s.add_argument("--alpha", default="1/6")
    _add_global_args(s)
    s.set_defaults(func=cmd_sc_check)

    s = sub.add_parser("count", help="exact trivial-word counts on a ball")
    _add_group_args(s)
    s.add_argument("--radius", type=int, required=True)
    s.add_argument("--kind", choices=("plain", "reduced"), default="plain")
    _add_global_args(s)
    s.set_defaults(func=cmd_count)

    s = sub.add_parser("estimate", help="exponent bounds and point estimates")
    _add_group_args(s)
    s.add_argument("--radius", type=int, required=True)
    s.add_argument("--C", type=float)
    s.add_argument("--A", type=float)
    _add_global_args(s)
    s.set_defaults(func=cmd_estimate)

    s = sub.add_parser("certify", help="locality certificate from a count table")
    s.add_argument("--counts", required=True, help="CSV written by 'count'")
    s.add_argument("--C", type=float, required=True)
    s.add_argument("--lam", type=int, required=True)
    s.add_argument("--A", type=float, required=True)
    _add_global_args(s)
    s.set_defaults(func=cmd_certify)

    s = sub.add_parser("scan-density", help="small-cancellation rates across densities")
    s.add_argument("--m", type=int)
    s.add_argument("--d-values", type=_float_list)
    s.add_argument("--ell-values", type=_int_list)
    s.add_argument("--seeds", type=int)
    s.add_argument("--radius", type=int)
    _add_global_args(s)
    s.set_defaults(func=cmd_scan_density)

    s = sub.add_parser("curve", help="exponent estimates across relator lengths")
    s.add_argument("--m", type=int)
    s.add_argument("--d", type=float)
    s.add_argument("--ell-values", type=_int_list)
    s.add_argument("--seeds", type=int)
    s.add_argument("--radius", type=int)
    s.add_argument("--C", type=float)
    s.add_argument("--A", type=float)
    _add_global_args(s)
    s.set_defaults(func=cmd_curve)

    s = sub.add_parser("vk-search", help="search a van Kampen diagram with few faces")
    _add_group_args(s)
    s.add_argument("--word", required=True)
    s.add_argument("--K", type=int, default=2)
    s.add_argument("--dot", action="store_true", help="emit Graphviz instead of JSON")
    _add_global_args(s)
    s.set_defaults(func=cmd_vk_search)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2), format="%(levelname)s %(message)s")
    try:
        args.func(args)
    except (CogrowthError, ValueError, OSError) as exc:
        log.error("%s: %s", type(exc).__name__, exc)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
