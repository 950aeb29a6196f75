"""End-to-end subgroup audit: train, score complexity, rank, and repair.

For every intersectional subgroup the audit trains a cross-validated
logistic model, extracts the norm statistics feeding the sample-complexity
scores, estimates empirical Rademacher complexity and metric fairness, then
ranks subgroups by complexity score and by actual size.  Pairs ranked in
opposite orders by the two criteria are inversions; the repair step
computes the minimal additional samples per subgroup that re-align the size
ordering with the complexity ordering.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace

import numpy as np

from . import __version__
from .complexity import (
    CollaborativeBounds,
    ComplexityBudget,
    RademacherResult,
    collaborative_bounds,
    estimate_rademacher,
    pacf_sample_complexity,
)
from .fairness import FairnessEstimate, build_metric, empirical_metric_fairness
from .ingest import EncodedDataset, RawTable, Schema, encode, extract_subgroups
from .linmodel import NormStats, TrainConfig, fit_with_cv, norm_stats, predict_scores

UNIFORM_BOUND_NOTE = (
    "The uniform-convergence lower bound is computed as d*k*(1-delta)/(4*epsilon). "
    "A common alternative statement of the same bound omits the factor 4 in the "
    "denominator and is therefore 4x larger; only the convention used here is reported."
)


class AuditError(RuntimeError):
    """Raised when an audit cannot proceed (e.g. fewer than 2 usable subgroups)."""


@dataclass(frozen=True)
class SubgroupAuditEntry:
    number: int
    key: tuple[tuple[str, str], ...]
    size: int
    feasible: bool
    note: str | None = None
    norm_stats: NormStats | None = None
    rademacher: RademacherResult | None = None
    complexity_score: float | None = None
    complexity_rank: int | None = None
    size_rank: int | None = None
    fairness: FairnessEstimate | None = None
    fairness_curve: tuple[tuple[float, float], ...] = ()
    lambda_star: float | None = None
    converged: bool | None = None
    cv_log_loss: float | None = None

    @property
    def label(self) -> str:
        return "/".join(value for _, value in self.key)


@dataclass(frozen=True)
class AuditReport:
    dataset: str
    d: int
    k: int
    seed: int
    entries: tuple[SubgroupAuditEntry, ...]
    inversions: tuple[tuple[str, str], ...]
    kendall_tau: float
    recommendations: tuple[tuple[str, int], ...]
    collaborative: CollaborativeBounds
    config: dict
    notes: tuple[str, ...]


def rank_subgroups(entries: list[SubgroupAuditEntry]) -> list[SubgroupAuditEntry]:
    """Fill complexity_rank and size_rank over the feasible entries.

    Rank 1 is the lowest complexity score / the smallest size; ties break by
    the subgroup key so ranking is deterministic.
    """
    feasible = [e for e in entries if e.feasible]
    if not feasible:
        raise AuditError("no feasible subgroups to rank")
    by_score = sorted(feasible, key=lambda e: (e.complexity_score, e.key))
    by_size = sorted(feasible, key=lambda e: (e.size, e.key))
    comp_rank = {e.key: r for r, e in enumerate(by_score, start=1)}
    size_rank = {e.key: r for r, e in enumerate(by_size, start=1)}
    return [
        replace(e, complexity_rank=comp_rank[e.key], size_rank=size_rank[e.key])
        if e.feasible
        else e
        for e in entries
    ]


def find_inversions(
    entries: list[SubgroupAuditEntry],
) -> tuple[tuple[tuple[str, str], ...], float]:
    """Pairs whose complexity and size orders disagree, plus Kendall's tau."""
    ranked = [e for e in entries if e.feasible]
    if any(e.complexity_rank is None or e.size_rank is None for e in ranked):
        raise AuditError("ranks must be filled before searching for inversions")
    k = len(ranked)
    pairs = []
    concordant = discordant = 0
    for a in range(k):
        for b in range(a + 1, k):
            ea, eb = ranked[a], ranked[b]
            sign = (ea.complexity_rank - eb.complexity_rank) * (ea.size_rank - eb.size_rank)
            if sign < 0:
                discordant += 1
                pairs.append(tuple(sorted((ea.label, eb.label))))
            else:
                concordant += 1
    total = k * (k - 1) // 2
    tau = (concordant - discordant) / total if total else 1.0
    return tuple(sorted(pairs)), float(tau)


def recommend_collection(
    entries: list[SubgroupAuditEntry],
) -> tuple[tuple[str, int], ...]:
    """Minimal per-subgroup additions that align size order with complexity order.

    Subgroups are processed by increasing complexity rank; each must end at
    least one sample above the previous requirement, except that an exact
    tie is allowed when the key tie-break already orders the pair correctly.
    Only additions are ever recommended.
    """
    ranked = sorted(
        (e for e in entries if e.feasible), key=lambda e: e.complexity_rank
    )
    if not ranked:
        return ()
    out = []
    required = ranked[0].size
    prev_key = ranked[0].key
    for e in ranked[1:]:
        floor = required if e.key > prev_key else required + 1
        required = max(e.size, floor)
        prev_key = e.key
        if required > e.size:
            out.append((e.label, required - e.size))
    return tuple(out)


def _derived_seed(master: int, *path: int) -> int:
    entropy = [int(master) & (2**63 - 1), *path]
    return int(np.random.SeedSequence(entropy=entropy).generate_state(1)[0])


def _feasibility_note(size: int, pos: int, neg: int) -> str | None:
    if size == 0:
        return (
            "empty intersection: no samples exist for this combination of "
            "sensitive values, so no model of any complexity can be validated "
            "as fair for it; collect data or fall back to individual-level criteria"
        )
    if pos == 0 or neg == 0:
        return "all rows share a single label; no classifier can be trained or validated"
    if min(pos, neg) < 2:
        return "fewer than 2 rows of the rare label; stratified cross-validation impossible"
    return None


def run_audit(
    table: RawTable,
    schema: Schema,
    train_config: TrainConfig | None = None,
    budget: ComplexityBudget | None = None,
    *,
    seed: int = 7,
    n_draws: int = 1000,
    gamma_grid: tuple[float, ...] = (0.1,),
    variant: str = "uniform",
    collab_epsilon: float = 0.1,
    exhaustive_cap: int = 2000,
    sample_pairs: int = 50_000,
    dataset_id: str = "dataset",
) -> AuditReport:
    """Run the full audit pipeline deterministically for a given seed."""
    train_config = train_config or TrainConfig(seed=seed)
    budget = budget or ComplexityBudget(delta=0.05, eps_alpha=0.1, eps_gamma=0.1)
    if not gamma_grid:
        raise ValueError("gamma_grid must contain at least one value")

    ds = encode(table, schema)
    subgroups = extract_subgroups(ds, table, schema)
    metric = build_metric(ds)

    entries: list[SubgroupAuditEntry] = []
    for idx, sg in enumerate(subgroups, start=1):
        y_sub = ds.y[sg.indices]
        pos = int(np.sum(y_sub == 1))
        neg = int(np.sum(y_sub == 0))
        note = _feasibility_note(sg.size, pos, neg)
        if note is not None:
            entries.append(
                SubgroupAuditEntry(
                    number=idx, key=sg.key, size=sg.size, feasible=False, note=note
                )
            )
            continue

        X_sub = ds.X[sg.indices]
        sub_ds = EncodedDataset(
            X=X_sub,
            y=y_sub,
            feature_names=ds.feature_names,
            non_sensitive_mask=ds.non_sensitive_mask,
            row_origin=ds.row_origin[sg.indices],
            categories=ds.categories,
        )
        cfg = replace(train_config, seed=_derived_seed(seed, idx, 0))
        model = fit_with_cv(X_sub, y_sub, cfg)
        stats = norm_stats(X_sub, model)
        rad = estimate_rademacher(
            X_sub, stats.phi, n_draws=n_draws, seed=_derived_seed(seed, idx, 1)
        )
        score = pacf_sample_complexity(stats, budget, variant)
        scores = predict_scores(model, X_sub)
        curve = []
        primary: FairnessEstimate | None = None
        for g in gamma_grid:
            est = empirical_metric_fairness(
                scores,
                sub_ds,
                metric,
                g,
                exhaustive_cap=exhaustive_cap,
                sample_pairs=sample_pairs,
                seed=_derived_seed(seed, idx, 2),
            )
            curve.append((float(g), est.alpha_hat))
            if primary is None:
                primary = est
        entries.append(
            SubgroupAuditEntry(
                number=idx,
                key=sg.key,
                size=sg.size,
                feasible=True,
                norm_stats=stats,
                rademacher=rad,
                complexity_score=score,
                fairness=primary,
                fairness_curve=tuple(curve),
                lambda_star=model.lambda_star,
                converged=model.converged,
                cv_log_loss=model.cv_log_loss,
            )
        )

    k_feasible = sum(1 for e in entries if e.feasible)
    if k_feasible < 2:
        infeasible = [f"{e.label}: {e.note}" for e in entries if not e.feasible]
        raise AuditError(
            "audit needs at least 2 feasible subgroups, found "
            f"{k_feasible}; " + "; ".join(infeasible)
        )

    entries = rank_subgroups(entries)
    inversions, tau = find_inversions(entries)
    recommendations = recommend_collection(entries)
    collab = collaborative_bounds(
        d=ds.d, k=k_feasible, epsilon=collab_epsilon, delta=budget.delta
    )

    notes = [UNIFORM_BOUND_NOTE]
    for e in entries:
        if not e.feasible:
            notes.append(f"subgroup {e.number} ({e.label}) excluded from ranking: {e.note}")

    config_snapshot = {
        "version": __version__,
        "dataset": dataset_id,
        "seed": seed,
        "n_draws": n_draws,
        "gamma_grid": list(gamma_grid),
        "variant": variant,
        "collab_epsilon": collab_epsilon,
        "exhaustive_cap": exhaustive_cap,
        "sample_pairs": sample_pairs,
        "budget": {
            "delta": budget.delta,
            "eps_alpha": budget.eps_alpha,
            "eps_gamma": budget.eps_gamma,
            "constant": budget.constant,
        },
        "train": {
            "lambda_grid": list(train_config.lambda_grid),
            "folds": train_config.folds,
            "max_iters": train_config.max_iters,
            "tol": train_config.tol,
            "fit_intercept": train_config.fit_intercept,
        },
    }
    return AuditReport(
        dataset=dataset_id,
        d=ds.d,
        k=k_feasible,
        seed=seed,
        entries=tuple(entries),
        inversions=inversions,
        kendall_tau=tau,
        recommendations=recommendations,
        collaborative=collab,
        config=config_snapshot,
        notes=tuple(notes),
    )


def report_to_dict(report: AuditReport) -> dict:
    """JSON-ready dictionary with a stable field order."""
    subgroups = []
    for e in report.entries:
        item: dict = {
            "number": e.number,
            "key": {col: val for col, val in e.key},
            "label": e.label,
            "size": e.size,
            "feasible": e.feasible,
        }
        if not e.feasible:
            item["note"] = e.note
        else:
            item["norms"] = {"R": e.norm_stats.R, "phi": e.norm_stats.phi, "m": e.norm_stats.m}
            item["rademacher"] = {
                "estimate": e.rademacher.estimate,
                "std_error": e.rademacher.std_error,
                "n_draws": e.rademacher.n_draws,
                "analytic_bound": e.rademacher.analytic_bound,
                "r_coefficient": e.rademacher.r_coefficient,
            }
            item["model"] = {
                "lambda_star": e.lambda_star,
                "converged": e.converged,
                "cv_log_loss": e.cv_log_loss,
            }
            item["complexity_score"] = e.complexity_score
            item["complexity_rank"] = e.complexity_rank
            item["size_rank"] = e.size_rank
            item["fairness"] = {
                "gamma": e.fairness.gamma,
                "alpha_hat": e.fairness.alpha_hat,
                "pairs_evaluated": e.fairness.pairs_evaluated,
                "exhaustive": e.fairness.exhaustive,
            }
            item["fairness_curve"] = [[g, a] for g, a in e.fairness_curve]
        subgroups.append(item)
    collab = report.collaborative
    return {
        "dataset": report.dataset,
        "d": report.d,
        "k_feasible": report.k,
        "seed": report.seed,
        "config": report.config,
        "subgroups": subgroups,
        "inversions": [list(p) for p in report.inversions],
        "kendall_tau": report.kendall_tau,
        "recommendations": [
            {"label": label, "additional_samples": add} for label, add in report.recommendations
        ],
        "collaborative": {
            "d": collab.d,
            "k": collab.k,
            "epsilon": collab.epsilon,
            "delta": collab.delta,
            "centralized": collab.centralized,
            "personalized": collab.personalized,
            "uniform_lower": collab.uniform_lower,
        },
        "notes": list(report.notes),
    }


def report_to_json(report: AuditReport) -> str:
    return json.dumps(report_to_dict(report), indent=2) + "\n"


def report_to_markdown(report: AuditReport) -> str:
    """Human-readable rendering with the two per-subgroup tables."""
    lines = [f"# Subgroup sample-complexity audit: {report.dataset}", ""]
    lines.append(f"Encoded dimension d = {report.d}; feasible subgroups k = {report.k}; seed = {report.seed}.")
    lines.append("")

    lines.append("## Empirical Rademacher complexity per subgroup")
    lines.append("")
    lines.append("| Subgroup | R_m estimate | std. error | R*phi/sqrt(m) |")
    lines.append("|---|---|---|---|")
    for e in report.entries:
        if e.feasible:
            lines.append(
                f"| {e.number} ({e.label}) | {e.rademacher.estimate:.6f} "
                f"| {e.rademacher.std_error:.6f} | {e.rademacher.analytic_bound:.6f} |"
            )
        else:
            lines.append(f"| {e.number} ({e.label}) | n/a | n/a | n/a |")
    lines.append("")

    lines.append("## Sample-complexity rank vs. actual size")
    lines.append("")
    lines.append("| Subgroup | Sample Complexity Rank | Actual Sample Size (Rank) |")
    lines.append("|---|---|---|")
    for e in report.entries:
        if e.feasible:
            lines.append(
                f"| {e.number} ({e.label}) | {e.complexity_rank} | {e.size:,} ({e.size_rank}) |"
            )
        else:
            lines.append(f"| {e.number} ({e.label}) | excluded | {e.size:,} (n/a) |")
    lines.append("")

    if report.inversions:
        pairs = ", ".join(f"{a} vs {b}" for a, b in report.inversions)
        lines.append(f"Inversions between complexity and size order: {pairs}.")
    else:
        lines.append("No inversions: size order already matches complexity order.")
    lines.append(f"Kendall's tau between the two orders: {report.kendall_tau:.3f}.")
    lines.append("")

    if report.recommendations:
        lines.append("## Recommended data collection")
        lines.append("")
        for label, add in report.recommendations:
            lines.append(f"- {label}: at least {add:,} additional samples")
        lines.append("")

    collab = report.collaborative
    lines.append("## Multi-group PAC bounds")
    lines.append("")
    lines.append(
        f"- uniform-convergence lower bound d*k*(1-delta)/(4*eps) = {collab.uniform_lower:g}"
    )
    lines.append(f"- centralized (single shared model): {collab.centralized:,.1f}")
    if collab.personalized is not None:
        lines.append(f"- personalized (one model per subgroup): {collab.personalized:,.1f}")
    lines.append("")

    lines.append("## Notes")
    lines.append("")
    for note in report.notes:
        lines.append(f"- {note}")
    lines.append("")
    return "\n".join(lines)
