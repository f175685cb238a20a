"""Trace inference, consistency checking and diagnosis over user-defined trace types."""

from ._tracereason import (
    AnalysisResult,
    Model,
    Spec,
    accept_inferred,
    analyze,
    check_model,
    parse_model,
    parse_spec,
    render_report,
    run_cli,
    suggest_targets,
    suggest_trace_types,
)

__all__ = [
    "AnalysisResult",
    "Model",
    "Spec",
    "accept_inferred",
    "analyze",
    "check_model",
    "parse_model",
    "parse_spec",
    "render_report",
    "run_cli",
    "suggest_targets",
    "suggest_trace_types",
]
