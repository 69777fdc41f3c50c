"""Full 2-D machine learning in inline coordinates: lossless n-D to 2-D
mapping, box-rule discovery, projection-line models, cross-validation,
rendering, and an interactive discovery service."""

from .boxes import (
    Box,
    BoxStats,
    Candidate,
    DiscoveryConfig,
    DiscoveryEngine,
    DiscoveryTrace,
    TraceStep,
    box_stats,
    covers,
    discover,
    enumerate_candidates,
    GraphGrid,
)
from .crossval import CVConfig, CVReport, make_folds, run_cv, scenario_estimates
from .dataset import (
    ClassLabel,
    LabeledDataset,
    NDPoint,
    class_counts,
    load_csv,
    load_wbc,
    wbc_path,
)
from .linear import (
    ConjunctiveModel,
    LinearModel,
    fit_model,
    fit_threshold,
    project,
    regress,
)
from .mapping import MappingMode, PolylineGraph, arc_heights, decode, encode
from .render import BoxOverlay, RenderOptions, render_scene, view_transform
from .rules import (
    Prediction,
    Rule,
    RuleMetrics,
    RuleSet,
    classify,
    classify_all,
    evaluate,
    from_trace,
    join,
    prune,
    rule_to_text,
    ruleset_to_text,
    simplify,
    simplify_ruleset,
)

__version__ = "0.1.0"
