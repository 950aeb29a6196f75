"""Subgroup sample-complexity auditing for metric-fair learning."""

__version__ = "0.1.0"

from .complexity import (
    CollaborativeBounds,
    ComplexityBudget,
    RademacherResult,
    analytic_rademacher_bound,
    collaborative_bounds,
    estimate_rademacher,
    pacf_sample_complexity,
    pacf_sample_complexity_from_r,
)
from .fairness import (
    FairnessEstimate,
    SimilarityMetric,
    build_metric,
    empirical_metric_fairness,
    min_gamma_for_alpha,
)
from .ingest import (
    EncodedDataset,
    ParseError,
    RawTable,
    Schema,
    SchemaError,
    Subgroup,
    builtin_schema,
    encode,
    extract_subgroups,
    load_schema,
    parse_table,
)
from .linmodel import (
    NormStats,
    TrainConfig,
    TrainedModel,
    cross_validate,
    fit_with_cv,
    norm_stats,
    predict_scores,
    train_logistic,
)
from .audit import (
    AuditError,
    AuditReport,
    SubgroupAuditEntry,
    find_inversions,
    rank_subgroups,
    recommend_collection,
    report_to_dict,
    report_to_json,
    report_to_markdown,
    run_audit,
)

__all__ = [
    "AuditError",
    "AuditReport",
    "CollaborativeBounds",
    "ComplexityBudget",
    "EncodedDataset",
    "FairnessEstimate",
    "NormStats",
    "ParseError",
    "RademacherResult",
    "RawTable",
    "Schema",
    "SchemaError",
    "SimilarityMetric",
    "Subgroup",
    "SubgroupAuditEntry",
    "TrainConfig",
    "TrainedModel",
    "analytic_rademacher_bound",
    "build_metric",
    "builtin_schema",
    "collaborative_bounds",
    "cross_validate",
    "empirical_metric_fairness",
    "encode",
    "estimate_rademacher",
    "extract_subgroups",
    "find_inversions",
    "fit_with_cv",
    "load_schema",
    "min_gamma_for_alpha",
    "norm_stats",
    "pacf_sample_complexity",
    "pacf_sample_complexity_from_r",
    "parse_table",
    "predict_scores",
    "rank_subgroups",
    "recommend_collection",
    "report_to_dict",
    "report_to_json",
    "report_to_markdown",
    "run_audit",
    "train_logistic",
]
