"""Stage A/B planning through a model provider, plus the two model-free baselines.

Model responses must carry a single fenced JSON block in the timeline/plan
file format.  Invalid responses trigger a repair prompt quoting the exact
violations; the total number of attempts (initial call plus repairs) is
bounded by ``max_repair_attempts``.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from importlib import resources

from .ingest import ClipRecord
from .plan import (
    PlanError,
    ScentEvent,
    ScentPlan,
    ValidationReport,
    plan_from_dict,
    save_plan,
    validate_plan,
    with_rendered_text,
)
from .providers import ModelProvider, ProviderError
from .schema import OdorSchema
from .timeline import (
    TimelineError,
    VisualTimeline,
    load_timeline,
    save_timeline,
    timeline_from_dict,
    timeline_to_dict,
)
from .workspace import Workspace

DEFAULT_MAX_REPAIR_ATTEMPTS = 2

_FENCED_BLOCK_RE = re.compile(r"```(?:json)?\s*\n(.*?)```", re.DOTALL)


class PlanningError(RuntimeError):
    pass


class PlanInvalidError(PlanningError):
    """The model produced parseable plans, but none passed validation."""

    def __init__(self, message: str, report: ValidationReport):
        super().__init__(message)
        self.report = report


@dataclass(frozen=True)
class StageTranscript:
    stage: str  # A | B
    prompt_text: str
    raw_response: str
    attempts: int
    parsed_ok: bool


def _prompt_template(name: str) -> str:
    return resources.files("scentplan").joinpath("data", "prompts", name).read_text("utf-8")


def extract_json_block(text: str) -> dict:
    """First fenced JSON object in a model response."""
    match = _FENCED_BLOCK_RE.search(text)
    candidate = match.group(1) if match else text
    try:
        doc = json.loads(candidate)
    except json.JSONDecodeError as exc:
        raise PlanningError(f"no parseable JSON block in response: {exc}") from exc
    if not isinstance(doc, dict):
        raise PlanningError("response JSON is not an object")
    return doc


def _repair_prompt(violations: list[str], original_prompt: str) -> str:
    return _prompt_template("repair.txt").format(
        violations="\n".join(f"- {v}" for v in violations),
        original_prompt=original_prompt,
    )


def extract_timeline(
    clip: ClipRecord,
    provider: ModelProvider,
    max_repair_attempts: int = DEFAULT_MAX_REPAIR_ATTEMPTS,
) -> tuple[VisualTimeline, StageTranscript]:
    """Stage A: sampled frames to a validated visual timeline.

    The prompt restricts the model to visual facts only.  Responses failing
    to parse or validate are retried with a repair prompt until the attempt
    bound is reached.
    """
    if not clip.sampled:
        raise PlanningError(f"clip '{clip.clip_id}' has no sampled frames")
    interval_ms = round(1000 / clip.fps_sampled) if clip.fps_sampled else 0
    initial_prompt = _prompt_template("stage_a.txt").format(
        clip_id=clip.clip_id,
        duration_ms=clip.duration_ms,
        frame_count=len(clip.frame_paths),
        frame_interval_ms=interval_ms,
    )
    prompt = initial_prompt
    raw = ""
    for attempt in range(1, max_repair_attempts + 1):
        raw = provider.complete(prompt, clip.frame_paths, tag=f"A/{clip.clip_id}")
        try:
            doc = extract_json_block(raw)
            timeline = timeline_from_dict(doc)
            if timeline.clip_id != clip.clip_id:
                raise PlanningError(
                    f"timeline clip_id '{timeline.clip_id}' does not match '{clip.clip_id}'"
                )
            if timeline.duration_ms != clip.duration_ms:
                raise PlanningError(
                    f"timeline duration {timeline.duration_ms} does not match clip "
                    f"duration {clip.duration_ms}"
                )
        except (PlanningError, TimelineError) as exc:
            if attempt == max_repair_attempts:
                raise PlanningError(
                    f"no valid timeline for '{clip.clip_id}' after {attempt} attempts: {exc}"
                ) from exc
            prompt = _repair_prompt([str(exc)], initial_prompt)
            continue
        return timeline, StageTranscript(
            stage="A", prompt_text=initial_prompt, raw_response=raw,
            attempts=attempt, parsed_ok=True,
        )
    raise AssertionError("unreachable")


def _schema_descriptor_lines(schema: OdorSchema) -> str:
    return "\n".join(
        f"- {d.descriptor_id}: {d.name}" for f in schema.families for d in f.descriptors
    )


def plan_system(
    timeline: VisualTimeline,
    schema: OdorSchema,
    provider: ModelProvider,
    max_concurrent: int = 2,
    max_repair_attempts: int = DEFAULT_MAX_REPAIR_ATTEMPTS,
) -> tuple[ScentPlan, StageTranscript]:
    """Stage B: visual timeline to a validated system scent plan.

    The schema's descriptor list is embedded in the prompt; accepted plans
    pass :func:`validate_plan` including the concurrency cap.  If the last
    attempt parses but fails validation, the error carries that
    :class:`ValidationReport`.
    """
    initial_prompt = _prompt_template("stage_b.txt").format(
        clip_id=timeline.clip_id,
        timeline_json=json.dumps(timeline_to_dict(timeline), indent=2),
        schema_descriptors=_schema_descriptor_lines(schema),
        max_concurrent=max_concurrent,
    )
    prompt = initial_prompt
    last_report: ValidationReport | None = None
    for attempt in range(1, max_repair_attempts + 1):
        raw = provider.complete(prompt, tag=f"B/{timeline.clip_id}")
        violations: list[str] = []
        try:
            doc = extract_json_block(raw)
            doc.setdefault("plan_id", f"{timeline.clip_id}.system")
            doc["strategy"] = "system"
            plan = _plan_from_model_doc(doc, timeline.clip_id)
        except (PlanningError, PlanError) as exc:
            last_report = None
            violations = [str(exc)]
        else:
            report = validate_plan(plan, timeline, schema, max_concurrent)
            if report.ok:
                plan = with_rendered_text(plan, schema)
                return plan, StageTranscript(
                    stage="B", prompt_text=initial_prompt, raw_response=raw,
                    attempts=attempt, parsed_ok=True,
                )
            last_report = report
            violations = list(report.violations)
        if attempt < max_repair_attempts:
            prompt = _repair_prompt(violations, initial_prompt)
    if last_report is not None:
        raise PlanInvalidError(
            f"plan invalid after repairs for '{timeline.clip_id}': "
            + "; ".join(last_report.violations),
            report=last_report,
        )
    raise PlanningError(
        f"no valid plan for '{timeline.clip_id}' after {max_repair_attempts} attempts"
    )


def _plan_from_model_doc(doc: dict, clip_id: str) -> ScentPlan:
    plan = plan_from_dict(doc)
    if plan.clip_id != clip_id:
        raise PlanningError(f"plan clip_id '{plan.clip_id}' does not match '{clip_id}'")
    return plan


def plan_over_inclusive(timeline: VisualTimeline, schema: OdorSchema) -> ScentPlan:
    """Every mappable element becomes one scent event; nothing is prioritized.

    Each element whose label matches a mapping rule yields one step event
    over its full visibility span at the rule's default intensity.  Elements
    with unmapped labels, and elements with zero-length spans (which cannot
    carry a scent event), are omitted.  No concurrency cap applies.
    """
    events = []
    for el in timeline.elements:
        rule = schema.lookup_label(el.label)
        if rule is None or el.start_ms >= el.end_ms or rule.default_intensity <= 0:
            continue
        events.append(
            ScentEvent(
                descriptor_id=rule.descriptor_id,
                onset_ms=el.start_ms,
                offset_ms=el.end_ms,
                intensity=rule.default_intensity,
                envelope="step",
                rationale_element_id=el.element_id,
            )
        )
    plan = ScentPlan(
        plan_id=f"{timeline.clip_id}.over_inclusive",
        clip_id=timeline.clip_id,
        strategy="over_inclusive",
        events=tuple(events),
    )
    return with_rendered_text(plan, schema)


def plan_naive(timeline: VisualTimeline, schema: OdorSchema) -> ScentPlan:
    """Single whole-clip scent from the most salient mappable element.

    Elements are ranked by salience, then span length, then element id; the
    first whose label maps wins.  Its descriptor runs for the entire clip at
    the rule's default intensity.  With no mappable element the plan is
    empty.
    """
    events = []
    if timeline.duration_ms > 0:
        ranked = sorted(
            timeline.elements,
            key=lambda el: (-el.salience, -el.span_ms, el.element_id),
        )
        for el in ranked:
            rule = schema.lookup_label(el.label)
            if rule is None or rule.default_intensity <= 0:
                continue
            events.append(
                ScentEvent(
                    descriptor_id=rule.descriptor_id,
                    onset_ms=0,
                    offset_ms=timeline.duration_ms,
                    intensity=rule.default_intensity,
                    envelope="step",
                    rationale_element_id=el.element_id,
                )
            )
            break
    plan = ScentPlan(
        plan_id=f"{timeline.clip_id}.naive",
        clip_id=timeline.clip_id,
        strategy="naive",
        events=tuple(events),
    )
    return with_rendered_text(plan, schema)


@dataclass(frozen=True)
class StimulusFailure:
    clip_id: str
    strategy: str
    error: str


@dataclass(frozen=True)
class StimulusResult:
    plans: dict  # clip_id -> {strategy: ScentPlan}
    failures: tuple[StimulusFailure, ...]

    @property
    def plan_count(self) -> int:
        return sum(len(v) for v in self.plans.values())


def _save_transcript(ws: Workspace, clip_id: str, transcript: StageTranscript) -> None:
    path = ws.transcript_path(clip_id, transcript.stage)
    path.write_text(
        json.dumps(
            {
                "stage": transcript.stage,
                "prompt_text": transcript.prompt_text,
                "raw_response": transcript.raw_response,
                "attempts": transcript.attempts,
                "parsed_ok": transcript.parsed_ok,
            },
            indent=2,
            ensure_ascii=False,
        )
        + "\n",
        "utf-8",
    )


def generate_stimuli(
    clips: list[ClipRecord],
    schema: OdorSchema,
    provider: ModelProvider,
    workspace: Workspace,
    max_concurrent: int = 2,
    max_repair_attempts: int = DEFAULT_MAX_REPAIR_ATTEMPTS,
    strategies: tuple[str, ...] = ("system", "over_inclusive", "naive"),
) -> StimulusResult:
    """Produce the requested study plans per clip and persist everything.

    A cached ``.timeline.json`` in the workspace is reused so baselines can
    run with no provider budget; otherwise Stage A runs first.  Failures do
    not abort the batch: partial results are written and every failed
    (clip, strategy) lands in the failure manifest.
    """
    workspace.ensure()
    plans: dict[str, dict[str, ScentPlan]] = {}
    failures: list[StimulusFailure] = []
    for clip in clips:
        plans[clip.clip_id] = {}
        timeline = None
        timeline_path = workspace.timeline_path(clip.clip_id)
        if timeline_path.exists():
            timeline = load_timeline(timeline_path)
        else:
            try:
                timeline, transcript = extract_timeline(clip, provider, max_repair_attempts)
                save_timeline(timeline, timeline_path)
                _save_transcript(workspace, clip.clip_id, transcript)
            except (PlanningError, ProviderError) as exc:
                for strategy in strategies:
                    failures.append(StimulusFailure(clip.clip_id, strategy, str(exc)))
                continue

        if "system" in strategies:
            try:
                plan, transcript = plan_system(
                    timeline, schema, provider, max_concurrent, max_repair_attempts
                )
                save_plan(plan, workspace.plan_path(clip.clip_id, "system"))
                _save_transcript(workspace, clip.clip_id, transcript)
                plans[clip.clip_id]["system"] = plan
            except (PlanningError, ProviderError) as exc:
                failures.append(StimulusFailure(clip.clip_id, "system", str(exc)))

        for strategy, generator in (
            ("over_inclusive", plan_over_inclusive),
            ("naive", plan_naive),
        ):
            if strategy not in strategies:
                continue
            plan = generator(timeline, schema)
            save_plan(plan, workspace.plan_path(clip.clip_id, strategy))
            plans[clip.clip_id][strategy] = plan

    failure_doc = [
        {"clip_id": f.clip_id, "strategy": f.strategy, "error": f.error} for f in failures
    ]
    workspace.failures_path().write_text(
        json.dumps(failure_doc, indent=2, ensure_ascii=False) + "\n", "utf-8"
    )
    return StimulusResult(plans=plans, failures=tuple(failures))
