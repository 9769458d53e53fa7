"""Automation-risk model laboratory.

Aggregates expert votes into occupation labels, fits binary logit, LDA and
fractional logit models on worker microdata, and compares the predicted risk
distributions they produce.
"""
from .data import (
    TASK_CODES,
    DesignMatrix,
    ResponseKind,
    WorkerRecord,
    build_design_matrix,
    correlation_matrix,
    impute_means,
    parse_worker_csv,
    summary_stats,
    tier_features,
    write_worker_csv,
)
from .diagnostics import (
    Shape,
    aggregate_isco,
    bimodality_coefficient,
    high_risk_share,
    predict_population,
    risk_distribution,
)
from .evaluation import ModelComparison, compare_models, roc_auc, train_test_split
from .glm import (
    FittedGlm,
    GlmKind,
    LdaModel,
    fit_fractional,
    fit_lda,
    fit_logit,
    load_model,
    predict_proba,
    save_model,
)
from .labeling import (
    ExpertVoteSet,
    OccupationLabel,
    aggregate_labels,
    attach_labels,
    label_from_votes,
    parse_labels_csv,
    parse_votes_csv,
)
from .synth import SynthConfig, generate_population, run_pipeline, scenario_table4

__version__ = "0.1.0"

__all__ = [
    "TASK_CODES", "DesignMatrix", "ResponseKind", "WorkerRecord", "build_design_matrix",
    "correlation_matrix", "impute_means", "parse_worker_csv", "summary_stats",
    "tier_features", "write_worker_csv", "Shape", "aggregate_isco",
    "bimodality_coefficient", "high_risk_share", "predict_population",
    "risk_distribution", "ModelComparison", "compare_models", "roc_auc",
    "train_test_split", "FittedGlm", "GlmKind", "LdaModel", "fit_fractional", "fit_lda",
    "fit_logit", "load_model", "predict_proba", "save_model", "ExpertVoteSet",
    "OccupationLabel", "aggregate_labels", "attach_labels", "label_from_votes",
    "parse_labels_csv", "parse_votes_csv", "SynthConfig", "generate_population",
    "run_pipeline", "scenario_table4",
]
