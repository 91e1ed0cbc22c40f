"""Scent plan IR: temporally organized scent events, validation, and rendering.

A plan is an ordered list of :class:`ScentEvent` spans over one clip.  The
renderer produces the standardized text shown to study participants; it never
mentions the clip or the generating strategy, so conditions stay blind.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .schema import OdorSchema
from .timeline import VisualTimeline

STRATEGIES = ("system", "over_inclusive", "naive")
ENVELOPES = ("step", "ramp_in", "ramp_out", "ramp_both")

_ENVELOPE_PHRASE = {
    "step": "steady",
    "ramp_in": "fading in",
    "ramp_out": "fading out",
    "ramp_both": "fading in and out",
}

DEFAULT_MAX_CONCURRENT = 2


class PlanError(ValueError):
    """Raised when a plan document violates a structural invariant."""


@dataclass(frozen=True)
class ScentEvent:
    descriptor_id: str
    onset_ms: int
    offset_ms: int
    intensity: float
    envelope: str = "step"
    rationale_element_id: str | None = None

    def __post_init__(self) -> None:
        if self.onset_ms >= self.offset_ms:
            raise PlanError(
                f"event '{self.descriptor_id}': onset {self.onset_ms} must precede "
                f"offset {self.offset_ms}"
            )
        if not 0.0 < self.intensity <= 1.0:
            raise PlanError(
                f"event '{self.descriptor_id}': intensity {self.intensity} outside (0, 1]"
            )
        if self.envelope not in ENVELOPES:
            raise PlanError(
                f"event '{self.descriptor_id}': envelope '{self.envelope}' not one of {ENVELOPES}"
            )


def _canonical_order(events: tuple[ScentEvent, ...]) -> tuple[ScentEvent, ...]:
    return tuple(sorted(events, key=lambda e: (e.onset_ms, e.offset_ms, e.descriptor_id)))


@dataclass(frozen=True)
class ScentPlan:
    """One strategy's scent plan for one clip.

    Events are normalized to canonical onset order at construction, so two
    plans built from the same events in any input order compare and render
    identically.  Contextual invariants (descriptors in schema, spans inside
    the clip, concurrency cap) are checked by :func:`validate_plan`.
    """

    plan_id: str
    clip_id: str
    strategy: str
    events: tuple[ScentEvent, ...]
    rendered_text: str = ""

    def __post_init__(self) -> None:
        if self.strategy not in STRATEGIES:
            raise PlanError(
                f"plan '{self.plan_id}': strategy '{self.strategy}' not one of {STRATEGIES}"
            )
        object.__setattr__(self, "events", _canonical_order(tuple(self.events)))

    def descriptor_ids(self) -> set[str]:
        return {e.descriptor_id for e in self.events}


@dataclass(frozen=True)
class ValidationReport:
    plan_id: str
    violations: tuple[str, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations


def max_concurrency(events: tuple[ScentEvent, ...]) -> tuple[int, int]:
    """(peak simultaneous events, first ms where the peak occurs).

    Spans are half-open [onset, offset): an event ending at t does not overlap
    one starting at t.  The peak is always attained at some onset, so only
    onsets need checking.
    """
    peak, peak_at = 0, 0
    for ev in events:
        t = ev.onset_ms
        active = sum(1 for e in events if e.onset_ms <= t < e.offset_ms)
        if active > peak:
            peak, peak_at = active, t
    return peak, peak_at


def validate_plan(
    plan: ScentPlan,
    timeline: VisualTimeline,
    schema: OdorSchema,
    max_concurrent: int = DEFAULT_MAX_CONCURRENT,
) -> ValidationReport:
    """Check a plan against its timeline and schema; violations are data, not errors.

    System-strategy plans are additionally held to the concurrency cap and to
    rationale links that resolve in the timeline.  An empty plan is valid.
    """
    if plan.clip_id != timeline.clip_id:
        raise PlanError(
            f"plan clip '{plan.clip_id}' does not match timeline clip '{timeline.clip_id}'"
        )
    if max_concurrent < 1:
        raise PlanError(f"max_concurrent must be positive, got {max_concurrent}")

    violations: list[str] = []
    for ev in plan.events:
        if not schema.has_descriptor(ev.descriptor_id):
            violations.append(f"unknown descriptor '{ev.descriptor_id}'")
        if ev.onset_ms < 0 or ev.offset_ms > timeline.duration_ms:
            violations.append(
                f"event '{ev.descriptor_id}' span [{ev.onset_ms}, {ev.offset_ms}] outside "
                f"clip [0, {timeline.duration_ms}]"
            )
    if plan.strategy == "system":
        peak, peak_at = max_concurrency(plan.events)
        if peak > max_concurrent:
            violations.append(f"{peak} concurrent at {peak_at}ms (cap {max_concurrent})")
        for ev in plan.events:
            if ev.rationale_element_id is not None and timeline.element(ev.rationale_element_id) is None:
                violations.append(
                    f"rationale element '{ev.rationale_element_id}' not in timeline"
                )
    return ValidationReport(plan_id=plan.plan_id, violations=tuple(violations))


def _fmt_time(ms: int) -> str:
    total_s = (ms + 500) // 1000
    return f"{total_s // 60}:{total_s % 60:02d}"


def _intensity_word(value: float) -> str:
    if value <= 0.33:
        return "low"
    if value <= 0.66:
        return "medium"
    return "high"


def render_plan_text(plan: ScentPlan, schema: OdorSchema) -> str:
    """Standardized participant-facing text for a plan.

    Deterministic: one header line, then one line per event in canonical
    order.  The clip id and strategy are deliberately absent.  Empty plans
    render as the single line ``No scent.``
    """
    if not plan.events:
        return "No scent."
    lines = ["Scent plan:"]
    for ev in plan.events:
        name = schema.descriptor(ev.descriptor_id).name
        lines.append(
            f"{_fmt_time(ev.onset_ms)}–{_fmt_time(ev.offset_ms)} — {name}, "
            f"{_intensity_word(ev.intensity)} intensity, {_ENVELOPE_PHRASE[ev.envelope]}"
        )
    return "\n".join(lines)


@dataclass(frozen=True)
class EventDelta:
    descriptor_id: str
    onset_delta_ms: int
    offset_delta_ms: int
    intensity_delta: float


@dataclass(frozen=True)
class PlanDiff:
    only_in_a: tuple[str, ...]
    only_in_b: tuple[str, ...]
    changed: tuple[EventDelta, ...]

    @property
    def empty(self) -> bool:
        return not (self.only_in_a or self.only_in_b or self.changed)


def diff_plans(a: ScentPlan, b: ScentPlan) -> PlanDiff:
    """Descriptor-set symmetric difference plus per-shared-descriptor deltas."""
    if a.clip_id != b.clip_id:
        raise PlanError(f"cannot diff plans for different clips '{a.clip_id}' / '{b.clip_id}'")
    set_a, set_b = a.descriptor_ids(), b.descriptor_ids()
    changed: list[EventDelta] = []
    for desc in sorted(set_a & set_b):
        evs_a = [e for e in a.events if e.descriptor_id == desc]
        evs_b = [e for e in b.events if e.descriptor_id == desc]
        for ev_a, ev_b in zip(evs_a, evs_b):
            delta = EventDelta(
                descriptor_id=desc,
                onset_delta_ms=ev_b.onset_ms - ev_a.onset_ms,
                offset_delta_ms=ev_b.offset_ms - ev_a.offset_ms,
                intensity_delta=ev_b.intensity - ev_a.intensity,
            )
            if delta.onset_delta_ms or delta.offset_delta_ms or delta.intensity_delta:
                changed.append(delta)
    return PlanDiff(
        only_in_a=tuple(sorted(set_a - set_b)),
        only_in_b=tuple(sorted(set_b - set_a)),
        changed=tuple(changed),
    )


def plan_from_dict(doc: dict) -> ScentPlan:
    try:
        events = tuple(
            ScentEvent(
                descriptor_id=e["descriptor_id"],
                onset_ms=int(e["onset_ms"]),
                offset_ms=int(e["offset_ms"]),
                intensity=float(e["intensity"]),
                envelope=e.get("envelope", "step"),
                rationale_element_id=e.get("rationale_element_id"),
            )
            for e in doc.get("events", [])
        )
        return ScentPlan(
            plan_id=doc["plan_id"],
            clip_id=doc["clip_id"],
            strategy=doc["strategy"],
            events=events,
            rendered_text=doc.get("rendered_text", ""),
        )
    except KeyError as exc:
        raise PlanError(f"plan document missing field {exc}") from exc
    except TypeError as exc:
        raise PlanError(f"plan document malformed: {exc}") from exc


def plan_to_dict(plan: ScentPlan) -> dict:
    return {
        "plan_id": plan.plan_id,
        "clip_id": plan.clip_id,
        "strategy": plan.strategy,
        "events": [
            {
                "descriptor_id": e.descriptor_id,
                "onset_ms": e.onset_ms,
                "offset_ms": e.offset_ms,
                "intensity": e.intensity,
                "envelope": e.envelope,
                "rationale_element_id": e.rationale_element_id,
            }
            for e in plan.events
        ],
        "rendered_text": plan.rendered_text,
    }


def with_rendered_text(plan: ScentPlan, schema: OdorSchema) -> ScentPlan:
    return ScentPlan(
        plan_id=plan.plan_id,
        clip_id=plan.clip_id,
        strategy=plan.strategy,
        events=plan.events,
        rendered_text=render_plan_text(plan, schema),
    )


def load_plan(path: str | Path) -> ScentPlan:
    return plan_from_dict(json.loads(Path(path).read_text("utf-8")))


def save_plan(plan: ScentPlan, path: str | Path) -> None:
    Path(path).write_text(
        json.dumps(plan_to_dict(plan), indent=2, ensure_ascii=False) + "\n", "utf-8"
    )
