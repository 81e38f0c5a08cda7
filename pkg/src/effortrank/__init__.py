"""Effort-aware defect prediction: EA-Z ranking, rival strategies, CE-curve metrics and a benchmark runner."""
from .dataset import (
    ColumnSchema, DataParseError, Dataset, ExperimentManifest, ManifestPair, ModuleRecord,
    SchemaError, default_manifest, load_dataset, load_manifest, parse_manifest, preprocess,
    skewness, write_dataset,
)
from .learners import LearnerSpec, TrainedModel, learner_from_tag, predict_label, predict_proba, train
from .metrics import (
    CECurve, EvalResult, UndefinedMetricError, ce_curve, evaluate, ifa, optimal_order, popt,
    recall_at, worst_order,
)
from .runner import (
    ConfigError, ResultTable, RunConfig, SyntheticSpec, run_experiment, summarize, sweep_zeta,
    synthetic_benchmark,
)
from .stats import (
    ComparisonRecord, InsufficientPairsError, WilcoxonResult, cliffs_delta, compare,
    effect_size_r, fdr_adjust, scott_knott_esd, wdl, wilcoxon_signed_rank,
)
from .strategies import (
    COMPARED, DEFAULT_THRESHOLD, DEFAULT_ZETA, STRATEGIES, EffortAwareRanker, RankedList,
    ScoredModules, lift_probability, rank, score, score_cbs_plus, score_ea_z, score_label_loc,
    score_manual_up, score_prob, score_prob_loc,
)

__version__ = "0.1.0"

__all__ = [
    "ce_curve",
    "CECurve",
    "cliffs_delta",
    "ColumnSchema",
    "compare",
    "COMPARED",
    "ComparisonRecord",
    "ConfigError",
    "DataParseError",
    "Dataset",
    "default_manifest",
    "DEFAULT_THRESHOLD",
    "DEFAULT_ZETA",
    "effect_size_r",
    "EffortAwareRanker",
    "EvalResult",
    "evaluate",
    "ExperimentManifest",
    "fdr_adjust",
    "ifa",
    "InsufficientPairsError",
    "learner_from_tag",
    "LearnerSpec",
    "lift_probability",
    "load_dataset",
    "load_manifest",
    "ManifestPair",
    "ModuleRecord",
    "optimal_order",
    "parse_manifest",
    "popt",
    "predict_label",
    "predict_proba",
    "preprocess",
    "rank",
    "RankedList",
    "recall_at",
    "ResultTable",
    "run_experiment",
    "RunConfig",
    "SchemaError",
    "score",
    "score_cbs_plus",
    "score_ea_z",
    "score_label_loc",
    "score_manual_up",
    "score_prob",
    "score_prob_loc",
    "ScoredModules",
    "scott_knott_esd",
    "skewness",
    "STRATEGIES",
    "summarize",
    "sweep_zeta",
    "synthetic_benchmark",
    "SyntheticSpec",
    "train",
    "TrainedModel",
    "UndefinedMetricError",
    "wdl",
    "wilcoxon_signed_rank",
    "WilcoxonResult",
    "worst_order",
    "write_dataset",
]

