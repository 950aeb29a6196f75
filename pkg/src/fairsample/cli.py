"""Command-line driver.

Exit codes: 0 success, 1 audit abort (e.g. too few feasible subgroups),
2 usage or I/O errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .audit import AuditError, report_to_json, report_to_markdown, run_audit
from .complexity import (
    ComplexityBudget,
    collaborative_bounds,
    pacf_sample_complexity,
)
from .fairness import build_metric, empirical_metric_fairness, min_gamma_for_alpha
from .ingest import ParseError, SchemaError, builtin_schema, encode, load_schema, parse_table
from .linmodel import DEFAULT_LAMBDA_GRID, NormStats, TrainConfig, TrainedModel, predict_scores

PRESETS = {"adult": "adult", "german": "german"}


def _add_budget_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--delta", type=float, default=0.05, help="failure probability delta")
    p.add_argument("--eps-alpha", type=float, default=0.1, help="tolerance on alpha")
    p.add_argument("--eps-gamma", type=float, default=0.1, help="tolerance on gamma")
    p.add_argument("--constant", type=float, default=1.0, help="leading constant C")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fairsample",
        description="Audit per-subgroup sample complexity for metric-fair learning.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    audit = sub.add_parser("audit", help="run the full subgroup audit")
    src = audit.add_mutually_exclusive_group(required=True)
    src.add_argument("--preset", choices=sorted(PRESETS), help="builtin dataset setup")
    src.add_argument("--dataset", help="path to a dataset file")
    audit.add_argument("--format", choices=["csv", "uci-adult", "uci-german"], default="csv")
    audit.add_argument("--schema", help="path to a schema JSON file (required with --dataset)")
    audit.add_argument("--data-dir", help="directory holding builtin data files")
    audit.add_argument("--seed", type=int, default=7, help="master random seed")
    audit.add_argument("--draws", type=int, default=1000, help="Monte-Carlo sign draws")
    audit.add_argument("--gamma", type=float, action="append", default=None,
                       help="fairness slack gamma (repeatable for a grid)")
    audit.add_argument("--variant", choices=["uniform", "erm"], default="uniform")
    audit.add_argument("--eps", type=float, default=0.1, help="epsilon for multi-group bounds")
    audit.add_argument("--folds", type=int, default=10)
    audit.add_argument("--lambda-grid", help="comma-separated penalty grid")
    audit.add_argument("--max-iters", type=int, default=10_000)
    audit.add_argument("--tol", type=float, default=1e-8)
    audit.add_argument("--out", help="JSON report path (default <dataset>_audit.json)")
    audit.add_argument("--md", help="also write a markdown rendering here")
    _add_budget_flags(audit)
    audit.set_defaults(func=cmd_audit)

    comp = sub.add_parser("complexity", help="evaluate the bound formulas directly")
    comp.add_argument("--R", type=float, help="max input norm")
    comp.add_argument("--phi", type=float, help="weight norm bound")
    comp.add_argument("--m", type=int, help="sample count")
    comp.add_argument("--d", type=int, help="hypothesis dimension")
    comp.add_argument("--k", type=int, help="subgroup count")
    comp.add_argument("--eps", type=float, default=0.1, help="epsilon for multi-group bounds")
    _add_budget_flags(comp)
    comp.set_defaults(func=cmd_complexity)

    fair = sub.add_parser("fairness", help="evaluate metric fairness of a stored model")
    fair.add_argument("--model", required=True, help="JSON file with fields 'w' and 'b'")
    fair.add_argument("--dataset", required=True, help="path to the dataset file")
    fair.add_argument("--format", choices=["csv", "uci-adult", "uci-german"], default="csv")
    fair.add_argument("--schema", required=True, help="path to a schema JSON file")
    fair.add_argument("--gamma", type=float, default=0.1)
    fair.add_argument("--alpha-target", type=float, default=None,
                      help="also report the smallest gamma meeting this alpha")
    fair.add_argument("--cap", type=int, default=2000, help="exhaustive pair cap (rows)")
    fair.add_argument("--pairs", type=int, default=50_000, help="sampled pair count")
    fair.add_argument("--seed", type=int, default=7)
    fair.set_defaults(func=cmd_fairness)

    return parser


def cmd_audit(args: argparse.Namespace) -> int:
    if args.preset:
        dataset_id = args.preset
        table = parse_table(PRESETS[args.preset], data_dir=args.data_dir)
        schema = builtin_schema(args.preset)
    else:
        if not args.schema:
            print("error: --schema is required with --dataset", file=sys.stderr)
            return 2
        dataset_id = Path(args.dataset).stem
        table = parse_table(args.dataset, format=args.format)
        schema = load_schema(args.schema)

    grid = DEFAULT_LAMBDA_GRID
    if args.lambda_grid:
        grid = tuple(float(tok) for tok in args.lambda_grid.split(","))
    train_config = TrainConfig(
        lambda_grid=grid,
        folds=args.folds,
        seed=args.seed,
        max_iters=args.max_iters,
        tol=args.tol,
    )
    budget = ComplexityBudget(
        delta=args.delta,
        eps_alpha=args.eps_alpha,
        eps_gamma=args.eps_gamma,
        constant=args.constant,
    )
    gamma_grid = tuple(args.gamma) if args.gamma else (0.1,)

    report = run_audit(
        table,
        schema,
        train_config,
        budget,
        seed=args.seed,
        n_draws=args.draws,
        gamma_grid=gamma_grid,
        variant=args.variant,
        collab_epsilon=args.eps,
        dataset_id=dataset_id,
    )

    out_path = Path(args.out) if args.out else Path(f"{dataset_id}_audit.json")
    out_path.write_text(report_to_json(report))
    if args.md:
        Path(args.md).write_text(report_to_markdown(report))

    for e in report.entries:
        if e.feasible:
            print(f"subgroup {e.number} ({e.label}): size={e.size} "
                  f"complexity_rank={e.complexity_rank} size_rank={e.size_rank}")
        else:
            print(f"subgroup {e.number} ({e.label}): size={e.size} INFEASIBLE ({e.note})")
    if report.inversions:
        print("inversions: " + ", ".join(f"{a} vs {b}" for a, b in report.inversions))
    else:
        print("inversions: none")
    print(f"kendall_tau: {report.kendall_tau}")
    for label, add in report.recommendations:
        print(f"collect: {label} needs >= {add} additional samples")
    print(f"report written to {out_path}")
    return 0


def cmd_complexity(args: argparse.Namespace) -> int:
    budget = ComplexityBudget(
        delta=args.delta,
        eps_alpha=args.eps_alpha,
        eps_gamma=args.eps_gamma,
        constant=args.constant,
    )
    printed = False
    if args.R is not None or args.phi is not None or args.m is not None:
        if args.R is None or args.phi is None or args.m is None:
            print("error: --R, --phi and --m must be given together", file=sys.stderr)
            return 2
        stats = NormStats(R=args.R, phi=args.phi, m=args.m)
        uniform = pacf_sample_complexity(stats, budget, "uniform")
        erm = pacf_sample_complexity(stats, budget, "erm")
        bound = stats.R * stats.phi / np.sqrt(stats.m)
        print(f"analytic_rademacher_bound: {bound:.10g}")
        print(f"uniform_score: {uniform:.10g}")
        print(f"erm_score: {erm:.10g}")
        printed = True
    if args.d is not None or args.k is not None:
        if args.d is None or args.k is None:
            print("error: --d and --k must be given together", file=sys.stderr)
            return 2
        collab = collaborative_bounds(args.d, args.k, args.eps, args.delta)
        print(f"centralized: {collab.centralized:.10g}")
        print("personalized: "
              + ("undefined" if collab.personalized is None else f"{collab.personalized:.10g}"))
        print(f"uniform_lower: {collab.uniform_lower:.10g}")
        printed = True
    if not printed:
        print("error: give --R/--phi/--m and/or --d/--k", file=sys.stderr)
        return 2
    return 0


def cmd_fairness(args: argparse.Namespace) -> int:
    try:
        doc = json.loads(Path(args.model).read_text())
        w = np.asarray(doc["w"], dtype=np.float64)
        b = float(doc.get("b", 0.0))
    except (OSError, json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        print(f"error: cannot load model {args.model}: {exc}", file=sys.stderr)
        return 2
    model = TrainedModel(w=w, b=b, lambda_star=float(doc.get("lambda", 0.0)) or 1.0,
                         converged=True)

    table = parse_table(args.dataset, format=args.format)
    schema = load_schema(args.schema)
    ds = encode(table, schema)
    if ds.d != model.d:
        print(f"error: model dimension {model.d} != encoded dimension {ds.d}", file=sys.stderr)
        return 2
    metric = build_metric(ds)
    scores = predict_scores(model, ds.X)
    est = empirical_metric_fairness(
        scores, ds, metric, args.gamma,
        exhaustive_cap=args.cap, sample_pairs=args.pairs, seed=args.seed,
    )
    print(f"alpha_hat: {est.alpha_hat}")
    print(f"gamma: {est.gamma}")
    print(f"pairs_evaluated: {est.pairs_evaluated}")
    print(f"exhaustive: {est.exhaustive}")
    if args.alpha_target is not None:
        g = min_gamma_for_alpha(
            scores, ds, metric, args.alpha_target,
            exhaustive_cap=args.cap, sample_pairs=args.pairs, seed=args.seed,
        )
        print(f"min_gamma_for_alpha({args.alpha_target}): {g}")
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except AuditError as exc:
        print(f"audit aborted: {exc}", file=sys.stderr)
        return 1
    except (ParseError, SchemaError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
