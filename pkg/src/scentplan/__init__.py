"""Video-to-scent planning workbench.

Turns short video clips into interpretable, time-aligned scent plans via a
two-stage model pipeline (visual timeline, then schema-constrained plan),
generates two reference baselines, runs blinded user studies over the
results, and analyzes the collected responses.
"""

from .plan import (
    ScentEvent,
    ScentPlan,
    diff_plans,
    load_plan,
    render_plan_text,
    validate_plan,
)
from .schema import OdorSchema, load_schema
from .timeline import VisualTimeline, load_timeline

__version__ = "0.1.0"

__all__ = [
    "OdorSchema",
    "ScentEvent",
    "ScentPlan",
    "VisualTimeline",
    "diff_plans",
    "load_plan",
    "load_schema",
    "load_timeline",
    "render_plan_text",
    "validate_plan",
    "__version__",
]
