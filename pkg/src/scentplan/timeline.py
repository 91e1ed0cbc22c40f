"""Visual timeline IR: what is visible in a clip and when, with no olfactory content."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

ELEMENT_CATEGORIES = ("object", "action", "environment", "person")
EVENT_KINDS = ("appear", "disappear", "action_onset", "action_offset", "scene_change")


class TimelineError(ValueError):
    """Raised when a timeline document violates a structural invariant."""


@dataclass(frozen=True)
class TimelineElement:
    element_id: str
    label: str
    category: str
    salience: float
    start_ms: int
    end_ms: int

    def __post_init__(self) -> None:
        if self.category not in ELEMENT_CATEGORIES:
            raise TimelineError(
                f"element '{self.element_id}': category '{self.category}' not one of "
                f"{ELEMENT_CATEGORIES}"
            )
        if not 0.0 <= self.salience <= 1.0:
            raise TimelineError(
                f"element '{self.element_id}': salience {self.salience} outside [0, 1]"
            )
        if self.start_ms > self.end_ms:
            raise TimelineError(
                f"element '{self.element_id}': span start {self.start_ms} > end {self.end_ms}"
            )

    @property
    def span_ms(self) -> int:
        return self.end_ms - self.start_ms


@dataclass(frozen=True)
class TimelineEvent:
    event_id: str
    kind: str
    at_ms: int
    element_id: str | None = None
    note: str = ""

    def __post_init__(self) -> None:
        if self.kind not in EVENT_KINDS:
            raise TimelineError(
                f"event '{self.event_id}': kind '{self.kind}' not one of {EVENT_KINDS}"
            )


@dataclass(frozen=True)
class VisualTimeline:
    """Stage A output for one clip: time-aligned elements plus change events.

    Construction enforces: element spans inside [0, duration_ms], unique
    element ids, events referencing known elements (or none), events in
    ascending time order, event times inside the clip.
    """

    clip_id: str
    duration_ms: int
    elements: tuple[TimelineElement, ...]
    events: tuple[TimelineEvent, ...]

    def __post_init__(self) -> None:
        if self.duration_ms < 0:
            raise TimelineError(f"clip '{self.clip_id}': negative duration {self.duration_ms}")
        seen: set[str] = set()
        for el in self.elements:
            if el.element_id in seen:
                raise TimelineError(f"duplicate element id '{el.element_id}'")
            seen.add(el.element_id)
            if el.start_ms < 0 or el.end_ms > self.duration_ms:
                raise TimelineError(
                    f"element '{el.element_id}': span [{el.start_ms}, {el.end_ms}] outside "
                    f"clip [0, {self.duration_ms}]"
                )
        prev = None
        for ev in self.events:
            if ev.element_id is not None and ev.element_id not in seen:
                raise TimelineError(
                    f"event '{ev.event_id}': unknown element id '{ev.element_id}'"
                )
            if not 0 <= ev.at_ms <= self.duration_ms:
                raise TimelineError(
                    f"event '{ev.event_id}': at {ev.at_ms} outside clip [0, {self.duration_ms}]"
                )
            if prev is not None and ev.at_ms < prev:
                raise TimelineError(f"event '{ev.event_id}': events not sorted by time")
            prev = ev.at_ms

    def element(self, element_id: str) -> TimelineElement | None:
        for el in self.elements:
            if el.element_id == element_id:
                return el
        return None


def timeline_from_dict(doc: dict) -> VisualTimeline:
    try:
        elements = tuple(
            TimelineElement(
                element_id=e["element_id"],
                label=e["label"],
                category=e["category"],
                salience=float(e["salience"]),
                start_ms=int(e["span"][0]),
                end_ms=int(e["span"][1]),
            )
            for e in doc.get("elements", [])
        )
        events = tuple(
            TimelineEvent(
                event_id=ev["event_id"],
                kind=ev["kind"],
                at_ms=int(ev["at_ms"]),
                element_id=ev.get("element_id"),
                note=ev.get("note", ""),
            )
            for ev in doc.get("events", [])
        )
        return VisualTimeline(
            clip_id=doc["clip_id"],
            duration_ms=int(doc["duration_ms"]),
            elements=elements,
            events=events,
        )
    except KeyError as exc:
        raise TimelineError(f"timeline document missing field {exc}") from exc
    except (TypeError, IndexError) as exc:
        raise TimelineError(f"timeline document malformed: {exc}") from exc


def timeline_to_dict(tl: VisualTimeline) -> dict:
    return {
        "clip_id": tl.clip_id,
        "duration_ms": tl.duration_ms,
        "elements": [
            {
                "element_id": el.element_id,
                "label": el.label,
                "category": el.category,
                "salience": el.salience,
                "span": [el.start_ms, el.end_ms],
            }
            for el in tl.elements
        ],
        "events": [
            {
                "event_id": ev.event_id,
                "kind": ev.kind,
                "at_ms": ev.at_ms,
                "element_id": ev.element_id,
                "note": ev.note,
            }
            for ev in tl.events
        ],
    }


def load_timeline(path: str | Path) -> VisualTimeline:
    return timeline_from_dict(json.loads(Path(path).read_text("utf-8")))


def save_timeline(tl: VisualTimeline, path: str | Path) -> None:
    Path(path).write_text(
        json.dumps(timeline_to_dict(tl), indent=2, ensure_ascii=False) + "\n", "utf-8"
    )
