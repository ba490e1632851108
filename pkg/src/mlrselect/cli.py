"""Command-line front end.

Commands::

    mlrselect select    --x X.csv --y Y.csv [--methods ...] [--rule sd:2] [--out report.json]
    mlrselect simulate  --setting I --dist normal --n 300 --c 0.2 --alpha 0.1 --reps 50 --seed 7
    mlrselect regions   --grid 20 [--out grid.csv]
    mlrselect diagnose  --alpha 0.1 --c 0.2 [--noncentrality worst.json]

Exit codes: 0 success, 2 usage or parse error, 3 numerical or domain error.
Every JSON report embeds the run manifest; CSV outputs get it in a
``<out>.manifest.json`` sidecar so the CSV header stays the first line.
``MLRSELECT_THREADS`` caps the simulation worker count; it never changes output.
"""

from __future__ import annotations

import argparse
import io
import json
import math
import os
import sys
from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np

from . import __version__
from .consistency import (
    AsymptoticParams,
    NoncentralityReport,
    classify_theorems,
    koo_condition_values,
    phi,
    psi,
    region_grid,
)
from .core import build_full_cache, validate_dataset
from .criteria import ENUMERATION_GUARD, CriterionKind, select_exhaustive
from .csvio import read_matrix, write_rows
from .errors import InputError, MlrSelectError
from .koo import parse_rule, select
from .simulation import METHOD_NAMES, Method, SimulationConfig, run_monte_carlo

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 2, 3
EXHAUSTIVE_METHODS = {
    "exhaustive-aic": CriterionKind.AIC,
    "exhaustive-bic": CriterionKind.BIC,
    "exhaustive-cp": CriterionKind.CP,
}
SELECT_METHODS = tuple(METHOD_NAMES) + tuple(EXHAUSTIVE_METHODS)


@dataclass(frozen=True)
class RunManifest:
    command: str
    inputs: tuple[str, ...]
    methods: tuple[str, ...]
    rule: str | None
    seed: int | None
    output: str | None
    version: str = __version__
    parameters: tuple[tuple[str, object], ...] = ()

    def to_dict(self) -> dict:
        d = asdict(self)
        d["inputs"] = list(self.inputs)
        d["methods"] = list(self.methods)
        d["parameters"] = {k: v for k, v in self.parameters}
        return d


def _dump_json(obj) -> str:
    return json.dumps(obj, indent=2, allow_nan=False) + "\n"


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    with open(out, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _emit_csv(header, rows, out: str | None, manifest: RunManifest) -> None:
    buf = io.StringIO()
    write_rows(buf, header, rows)
    _emit(buf.getvalue(), out)
    if out is not None:
        _emit(_dump_json({"manifest": manifest.to_dict()}), out + ".manifest.json")


def _split_methods(text: str) -> list[str]:
    return [m.strip() for m in text.split(",") if m.strip()]


def _workers(flag: int | None) -> int:
    env = os.environ.get("MLRSELECT_THREADS")
    cap = None
    if env:
        try:
            cap = max(1, int(env))
        except ValueError:
            raise InputError(f"MLRSELECT_THREADS must be an integer, got {env!r}") from None
    n = flag if flag is not None else (cap or 1)
    if cap is not None:
        n = min(n, cap)
    return max(1, n)


def cmd_select(args) -> int:
    methods = _split_methods(args.methods)
    unknown = [m for m in methods if m not in SELECT_METHODS]
    if unknown or not methods:
        raise InputError(f"unknown method(s) {unknown}; choose from {', '.join(SELECT_METHODS)}")
    rule = parse_rule(args.rule)
    y, x = read_matrix(args.y), read_matrix(args.x)
    d = validate_dataset(y, x)
    cache = build_full_cache(d)

    results = {}
    for name in methods:
        if name in EXHAUSTIVE_METHODS:
            res = select_exhaustive(d, EXHAUSTIVE_METHODS[name], max_k=args.max_k,
                                    guard=None if args.no_guard else ENUMERATION_GUARD)
            results[name] = {
                "selected": list(res.best.model.indices),
                "criterion": res.best.kind.value,
                "value": res.best.value,
                "subsets_evaluated": int(res.scores.size),
            }
        else:
            m = Method.parse(name, rule)
            prof = select(cache, m.flavor, m.rule)
            results[name] = {
                "flavor": prof.flavor.value,
                "rule": m.rule_label,
                "threshold": prof.threshold,
                "selected": list(prof.selected.indices),
                "stats": [float(v) for v in prof.stats],
            }
    manifest = RunManifest("select", (args.x, args.y), tuple(methods), str(rule), None, args.out,
                           parameters=(("max_k", args.max_k), ("no_guard", args.no_guard)))
    report = {
        "manifest": manifest.to_dict(),
        "n": d.n, "p": d.p, "k": d.k,
        "alpha_k": d.alpha_k, "c_n": d.c_n,
        "indexing": "1-based column positions of X",
        "results": results,
    }
    _emit(_dump_json(report), args.out)
    return EXIT_OK


def cmd_simulate(args) -> int:
    names = _split_methods(args.methods)
    methods = tuple(Method.parse(nm, args.rule) for nm in names)
    cfg = SimulationConfig(args.setting, args.dist.lower(), args.n, args.c, args.alpha,
                           k_star=args.k_star, reps=args.reps, seed=args.seed, methods=methods)
    report = run_monte_carlo(cfg, workers=_workers(args.threads))
    manifest = RunManifest("simulate", (), tuple(m.key for m in methods), args.rule, args.seed, args.out,
                           parameters=(("setting", cfg.setting.value), ("dist", cfg.dist.value),
                                       ("n", cfg.n), ("c", cfg.c_target), ("alpha", cfg.alpha_target),
                                       ("k_star", cfg.k_star), ("reps", cfg.reps)))
    if args.out is not None and args.out.lower().endswith(".csv"):
        rows = report.to_rows()
        header = list(rows[0])
        _emit_csv(header, ([r[h] for h in header] for r in rows), args.out, manifest)
    else:
        flat = {f"manifest.{k}": (json.dumps(v) if isinstance(v, (list, dict)) else v)
                for k, v in manifest.to_dict().items()}
        flat.update(report.to_flat_dict())
        _emit(_dump_json(flat), args.out)
    return EXIT_OK


def cmd_regions(args) -> int:
    if args.grid < 2:
        raise InputError(f"--grid must be >= 2, got {args.grid}")
    pts = region_grid(args.grid)
    manifest = RunManifest("regions", (), (), None, None, args.out, parameters=(("grid", args.grid),))
    _emit_csv(["alpha", "c", "phi", "psi"], ((g.alpha, g.c, g.phi, g.psi) for g in pts), args.out, manifest)
    return EXIT_OK


def _load_noncentrality(path: str) -> list[NoncentralityReport]:
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON ({exc})") from None
    if isinstance(raw, dict):
        raw = [raw]
    out = []
    for i, item in enumerate(raw):
        try:
            out.append(NoncentralityReport(
                log_tau=float(item["log_tau"]), kappa=float(item["kappa"]),
                m=int(item.get("m", 0)), s=int(item.get("s", 1)),
                kick_one_out=bool(item.get("kick_one_out", False))))
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"{path}: entry {i + 1} needs numeric log_tau and kappa ({exc})") from None
    return out


def _json_number(v: float | None):
    if v is None:
        return None
    return v if math.isfinite(v) else str(v)


def cmd_diagnose(args) -> int:
    params = AsymptoticParams(args.alpha, args.c)
    worst = _load_noncentrality(args.noncentrality) if args.noncentrality else None
    koo = [r for r in (worst or []) if r.kick_one_out and math.isfinite(r.log_tau) and math.isfinite(r.kappa)]
    log_tau = min((r.log_tau for r in koo), default=None)
    kappa = min((r.kappa for r in koo), default=None)
    vals = koo_condition_values(args.alpha, args.c, log_tau=log_tau, kappa=kappa)
    verdicts = classify_theorems(params, worst)
    manifest = RunManifest("diagnose", (args.noncentrality,) if args.noncentrality else (), (), None,
                           None, args.out, parameters=(("alpha", args.alpha), ("c", args.c)))
    report = {
        "manifest": manifest.to_dict(),
        "alpha": args.alpha,
        "c": args.c,
        "phi": phi(args.alpha, args.c),
        "psi": psi(args.alpha, args.c),
        "V1": vals.v1,
        "V2": vals.v2,
        "V3": _json_number(vals.v3),
        "V4": _json_number(vals.v4),
        "verdicts": {k: v.value for k, v in verdicts.items()},
    }
    _emit(_dump_json(report), args.out)
    return EXIT_OK


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="mlrselect", description=__doc__.split("\n\n")[0])
    ap.add_argument("--version", action="version", version=f"mlrselect {__version__}")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("select", help="select predictors for a dataset given as CSV")
    s.add_argument("--x", required=True, help="n x k predictor matrix (CSV)")
    s.add_argument("--y", required=True, help="n x p response matrix (CSV)")
    s.add_argument("--methods", default="koo-aic,koo-bic,koo-cp,gkoo-a,gkoo-c",
                   help=f"comma-separated, from: {', '.join(SELECT_METHODS)}")
    s.add_argument("--rule", default="sd:2", help="general KOO threshold: sd:M, mad:M or theory:V")
    s.add_argument("--max-k", type=int, default=None, help="largest model size for exhaustive search")
    s.add_argument("--no-guard", action="store_true", help=f"allow exhaustive search with k > {ENUMERATION_GUARD}")
    s.add_argument("--out", default=None)
    s.set_defaults(func=cmd_select)

    m = sub.add_parser("simulate", help="Monte Carlo selection percentages")
    m.add_argument("--setting", choices=["I", "II"], required=True)
    m.add_argument("--dist", choices=["normal", "t3", "chisq2"], type=str.lower, default="normal")
    m.add_argument("--n", type=int, required=True)
    m.add_argument("--c", type=float, required=True)
    m.add_argument("--alpha", type=float, required=True)
    m.add_argument("--k-star", type=int, default=5)
    m.add_argument("--reps", type=int, default=200)
    m.add_argument("--seed", type=int, default=0)
    m.add_argument("--methods", default=",".join(METHOD_NAMES))
    m.add_argument("--rule", default="sd:2")
    m.add_argument("--threads", type=int, default=None)
    m.add_argument("--out", default=None, help="*.csv for CSV rows, anything else for JSON")
    m.set_defaults(func=cmd_simulate)

    r = sub.add_parser("regions", help="phi/psi on a lattice over the (alpha, c) simplex")
    r.add_argument("--grid", type=int, default=20)
    r.add_argument("--out", default=None)
    r.set_defaults(func=cmd_regions)

    g = sub.add_parser("diagnose", help="condition values and per-method verdicts")
    g.add_argument("--alpha", type=float, required=True)
    g.add_argument("--c", type=float, required=True)
    g.add_argument("--noncentrality", default=None,
                   help="JSON list of {log_tau, kappa, s, m, kick_one_out}")
    g.add_argument("--out", default=None)
    g.set_defaults(func=cmd_diagnose)
    return ap


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"mlrselect: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (MlrSelectError, np.linalg.LinAlgError) as exc:
        print(f"mlrselect: error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ValueError, OSError) as exc:
        print(f"mlrselect: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
