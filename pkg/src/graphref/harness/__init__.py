"""Campaign harness: config, target protocol, metrics, orchestration."""

from .campaign import STAGE_NAMES, CampaignMetrics, CampaignResult, run_campaign
from .config import (
    CampaignConfig,
    LabelMode,
    TargetSpec,
    load_config,
    parse_config_text,
)
from .metrics import (
    DiversitySummary,
    mutation_diversity,
    pair_dissimilarity,
    semantic_preservation,
)
from .report import (
    emit_report,
    load_report,
    metrics_from_report,
    render_report,
    result_from_report,
    result_to_json_dict,
)
from .target import ExecutionResult, execute_target

__all__ = [
    "STAGE_NAMES",
    "CampaignConfig",
    "CampaignMetrics",
    "CampaignResult",
    "DiversitySummary",
    "ExecutionResult",
    "LabelMode",
    "TargetSpec",
    "emit_report",
    "execute_target",
    "load_config",
    "load_report",
    "metrics_from_report",
    "mutation_diversity",
    "pair_dissimilarity",
    "parse_config_text",
    "render_report",
    "result_from_report",
    "result_to_json_dict",
    "run_campaign",
    "semantic_preservation",
]
