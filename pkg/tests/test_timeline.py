import pytest

from scentplan.timeline import (
    TimelineElement,
    TimelineError,
    TimelineEvent,
    VisualTimeline,
    load_timeline,
    save_timeline,
    timeline_from_dict,
    timeline_to_dict,
)


def test_element_span_and_category_validation():
    with pytest.raises(TimelineError, match="span start"):
        TimelineElement("e", "x", "object", 0.5, 100, 50)
    with pytest.raises(TimelineError, match="category"):
        TimelineElement("e", "x", "prop", 0.5, 0, 100)
    with pytest.raises(TimelineError, match="salience"):
        TimelineElement("e", "x", "object", 1.5, 0, 100)


def test_event_kind_validation():
    with pytest.raises(TimelineError, match="kind"):
        TimelineEvent("ev", "vanish", 0)


def test_timeline_rejects_span_outside_clip(kitchen_timeline):
    el = TimelineElement("late", "x", "object", 0.5, 0, 99999)
    with pytest.raises(TimelineError, match="outside"):
        VisualTimeline("c", 12000, (el,), ())


def test_timeline_rejects_duplicate_element_ids():
    el = TimelineElement("e1", "x", "object", 0.5, 0, 100)
    with pytest.raises(TimelineError, match="duplicate element id"):
        VisualTimeline("c", 1000, (el, el), ())


def test_timeline_rejects_dangling_event_reference():
    ev = TimelineEvent("ev", "appear", 0, "ghost")
    with pytest.raises(TimelineError, match="ghost"):
        VisualTimeline("c", 1000, (), (ev,))


def test_timeline_rejects_unsorted_events():
    events = (TimelineEvent("a", "scene_change", 500), TimelineEvent("b", "scene_change", 100))
    with pytest.raises(TimelineError, match="not sorted"):
        VisualTimeline("c", 1000, (), events)


def test_timeline_allows_simultaneous_events():
    events = (TimelineEvent("a", "scene_change", 500), TimelineEvent("b", "scene_change", 500))
    assert len(VisualTimeline("c", 1000, (), events).events) == 2


def test_zero_length_element_span_is_legal():
    el = TimelineElement("flash", "spark", "object", 0.2, 300, 300)
    tl = VisualTimeline("c", 1000, (el,), ())
    assert tl.element("flash").span_ms == 0


def test_element_lookup(kitchen_timeline):
    assert kitchen_timeline.element("el1").label == "lemon halves"
    assert kitchen_timeline.element("nope") is None


def test_round_trip(tmp_path, kitchen_timeline):
    doc = timeline_to_dict(kitchen_timeline)
    assert timeline_from_dict(doc) == kitchen_timeline
    path = tmp_path / "t.json"
    save_timeline(kitchen_timeline, path)
    assert load_timeline(path) == kitchen_timeline


def test_from_dict_reports_missing_field():
    with pytest.raises(TimelineError, match="missing field"):
        timeline_from_dict({"clip_id": "c"})
