import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from scentplan.ingest import ClipRecord
from scentplan.plan import max_concurrency, validate_plan
from scentplan.planners import (
    PlanInvalidError,
    PlanningError,
    extract_json_block,
    extract_timeline,
    generate_stimuli,
    plan_naive,
    plan_over_inclusive,
    plan_system,
)
from scentplan.providers import BudgetExhaustedError, MockProvider, ProviderError
from scentplan.timeline import TimelineElement, VisualTimeline, timeline_to_dict
from scentplan.workspace import Workspace


def _clip(clip_id="kitchen", duration_ms=12000):
    return ClipRecord(
        clip_id=clip_id,
        path=f"/nowhere/{clip_id}.mp4",
        duration_ms=duration_ms,
        fps_sampled=1.0,
        frame_paths=("f0.png", "f1.png"),
    )


def _fence(doc):
    return "```json\n" + json.dumps(doc) + "\n```"


def _write_fixture(root, stage, clip_id, attempt, text):
    path = root / stage / clip_id / f"{attempt}.txt"
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, "utf-8")


def _timeline_doc(kitchen_timeline):
    return timeline_to_dict(kitchen_timeline)


def _plan_doc(clip_id="kitchen", events=None):
    if events is None:
        events = [
            {
                "descriptor_id": "citrus.lemon",
                "onset_ms": 1000,
                "offset_ms": 9000,
                "intensity": 0.8,
                "envelope": "ramp_in",
                "rationale_element_id": "el1",
            }
        ]
    return {"plan_id": f"{clip_id}.system", "clip_id": clip_id, "strategy": "system",
            "events": events}


# ----------------------------------------------------------- json extraction


def test_extract_json_block_fenced():
    assert extract_json_block('text\n```json\n{"a": 1}\n``` done') == {"a": 1}
    assert extract_json_block('```\n{"a": 1}\n```') == {"a": 1}


def test_extract_json_block_bare_object():
    assert extract_json_block('{"a": 1}') == {"a": 1}


def test_extract_json_block_rejects_garbage():
    with pytest.raises(PlanningError, match="no parseable JSON"):
        extract_json_block("no json here")
    with pytest.raises(PlanningError, match="not an object"):
        extract_json_block("```json\n[1, 2]\n```")


# ------------------------------------------------------------ mock provider


def test_mock_provider_advances_attempts(tmp_path):
    _write_fixture(tmp_path, "A", "c", 1, "first")
    _write_fixture(tmp_path, "A", "c", 2, "second")
    provider = MockProvider(tmp_path)
    assert provider.complete("p", tag="A/c") == "first"
    assert provider.complete("p", tag="A/c") == "second"
    # no 3.txt: highest earlier attempt replays
    assert provider.complete("p", tag="A/c") == "second"


def test_mock_provider_missing_fixture(tmp_path):
    provider = MockProvider(tmp_path)
    with pytest.raises(ProviderError, match="no fixture"):
        provider.complete("p", tag="A/none")


def test_provider_budget_exhausts(tmp_path):
    _write_fixture(tmp_path, "A", "c", 1, "only")
    provider = MockProvider(tmp_path, budget=2)
    provider.complete("p", tag="A/c")
    provider.complete("p", tag="A/c")
    assert provider.remaining_budget == 0
    with pytest.raises(BudgetExhaustedError):
        provider.complete("p", tag="A/c")


# ----------------------------------------------------------------- stage A


def test_extract_timeline_first_attempt(tmp_path, kitchen_timeline):
    _write_fixture(tmp_path, "A", "kitchen", 1, _fence(_timeline_doc(kitchen_timeline)))
    provider = MockProvider(tmp_path)
    timeline, transcript = extract_timeline(_clip(), provider)
    assert timeline == kitchen_timeline
    assert transcript.attempts == 1
    assert transcript.parsed_ok
    assert transcript.stage == "A"


def test_extract_timeline_repairs_once(tmp_path, kitchen_timeline):
    _write_fixture(tmp_path, "A", "kitchen", 1, "not json at all")
    _write_fixture(tmp_path, "A", "kitchen", 2, _fence(_timeline_doc(kitchen_timeline)))
    provider = MockProvider(tmp_path)
    timeline, transcript = extract_timeline(_clip(), provider)
    assert timeline == kitchen_timeline
    assert transcript.attempts == 2


def test_extract_timeline_exhausts_attempts(tmp_path):
    _write_fixture(tmp_path, "A", "kitchen", 1, "still not json")
    provider = MockProvider(tmp_path)
    with pytest.raises(PlanningError, match="after 2 attempts"):
        extract_timeline(_clip(), provider)


def test_extract_timeline_rejects_wrong_clip(tmp_path, kitchen_timeline):
    doc = _timeline_doc(kitchen_timeline) | {"clip_id": "other"}
    doc["elements"] = []
    doc["events"] = []
    _write_fixture(tmp_path, "A", "kitchen", 1, _fence(doc))
    provider = MockProvider(tmp_path)
    with pytest.raises(PlanningError, match="does not match"):
        extract_timeline(_clip(), provider)


def test_extract_timeline_rejects_duration_mismatch(tmp_path, kitchen_timeline):
    doc = _timeline_doc(kitchen_timeline) | {"duration_ms": 99}
    doc["elements"] = []
    doc["events"] = []
    _write_fixture(tmp_path, "A", "kitchen", 1, _fence(doc))
    with pytest.raises(PlanningError, match="duration"):
        extract_timeline(_clip(), MockProvider(tmp_path))


def test_extract_timeline_requires_frames(tmp_path):
    clip = ClipRecord("c", "/x.mp4", 1000)
    with pytest.raises(PlanningError, match="no sampled frames"):
        extract_timeline(clip, MockProvider(tmp_path))


# ----------------------------------------------------------------- stage B


def test_plan_system_first_attempt(tmp_path, kitchen_timeline, default_schema):
    _write_fixture(tmp_path, "B", "kitchen", 1, _fence(_plan_doc()))
    plan, transcript = plan_system(kitchen_timeline, default_schema, MockProvider(tmp_path))
    assert plan.strategy == "system"
    assert plan.rendered_text.startswith("Scent plan:")
    assert transcript.attempts == 1


def test_plan_system_repairs_concurrency_violation(tmp_path, kitchen_timeline, default_schema):
    crowded = [
        {"descriptor_id": d, "onset_ms": 0, "offset_ms": 5000, "intensity": 0.5,
         "envelope": "step", "rationale_element_id": None}
        for d in ("citrus.lemon", "floral.rose", "herbal.mint")
    ]
    _write_fixture(tmp_path, "B", "kitchen", 1, _fence(_plan_doc(events=crowded)))
    _write_fixture(tmp_path, "B", "kitchen", 2, _fence(_plan_doc()))
    plan, transcript = plan_system(kitchen_timeline, default_schema, MockProvider(tmp_path))
    assert transcript.attempts == 2
    assert max_concurrency(plan.events)[0] <= 2


def test_plan_system_invalid_after_repairs_carries_report(tmp_path, kitchen_timeline, default_schema):
    bad = [{"descriptor_id": "citrus.durian", "onset_ms": 0, "offset_ms": 1000,
            "intensity": 0.5, "envelope": "step", "rationale_element_id": None}]
    _write_fixture(tmp_path, "B", "kitchen", 1, _fence(_plan_doc(events=bad)))
    with pytest.raises(PlanInvalidError) as excinfo:
        plan_system(kitchen_timeline, default_schema, MockProvider(tmp_path))
    assert any("citrus.durian" in v for v in excinfo.value.report.violations)


def test_plan_system_unparseable_raises_planning_error(tmp_path, kitchen_timeline, default_schema):
    _write_fixture(tmp_path, "B", "kitchen", 1, "garbage")
    with pytest.raises(PlanningError, match="no valid plan"):
        plan_system(kitchen_timeline, default_schema, MockProvider(tmp_path))


# ---------------------------------------------------------------- baselines


def test_over_inclusive_maps_every_matching_element(kitchen_timeline, default_schema):
    plan = plan_over_inclusive(kitchen_timeline, default_schema)
    # lemon halves and chef knife map; cutting board does not
    assert len(plan.events) == 2
    by_desc = {e.descriptor_id: e for e in plan.events}
    lemon = by_desc["citrus.lemon"]
    assert (lemon.onset_ms, lemon.offset_ms) == (1000, 10000)
    assert lemon.intensity == pytest.approx(0.8)
    assert lemon.envelope == "step"
    assert by_desc["chemical.metallic"].rationale_element_id == "el2"
    assert validate_plan(plan, kitchen_timeline, default_schema).ok


def test_over_inclusive_skips_zero_span(default_schema):
    tl = VisualTimeline(
        "c", 1000,
        (TimelineElement("e1", "lemon", "object", 0.9, 500, 500),),
        (),
    )
    assert plan_over_inclusive(tl, default_schema).events == ()


def test_naive_single_whole_clip_event(kitchen_timeline, default_schema):
    plan = plan_naive(kitchen_timeline, default_schema)
    assert len(plan.events) == 1
    (event,) = plan.events
    assert event.descriptor_id == "citrus.lemon"  # highest salience mappable
    assert (event.onset_ms, event.offset_ms) == (0, kitchen_timeline.duration_ms)


def test_naive_skips_unmappable_top_salience(default_schema):
    tl = VisualTimeline(
        "c", 5000,
        (
            TimelineElement("e1", "plastic tarpaulin", "object", 0.99, 0, 5000),
            TimelineElement("e2", "rose bush", "object", 0.4, 0, 5000),
        ),
        (),
    )
    (event,) = plan_naive(tl, default_schema).events
    assert event.descriptor_id == "floral.rose"


def test_naive_empty_when_nothing_maps(default_schema):
    tl = VisualTimeline(
        "c", 5000,
        (TimelineElement("e1", "plastic tarpaulin", "object", 0.9, 0, 5000),),
        (),
    )
    plan = plan_naive(tl, default_schema)
    assert plan.events == ()
    assert plan.rendered_text == "No scent."


def test_naive_tie_breaks_by_element_id(default_schema):
    tl = VisualTimeline(
        "c", 5000,
        (
            TimelineElement("b", "rose bush", "object", 0.5, 0, 5000),
            TimelineElement("a", "lemon crate", "object", 0.5, 0, 5000),
        ),
        (),
    )
    (event,) = plan_naive(tl, default_schema).events
    assert event.rationale_element_id == "a"


_LABELS = [
    "lemon", "rose", "campfire", "espresso machine", "pine trees", "rain puddle",
    "plastic tarpaulin", "cardboard box", "television", "keyboard",
]


@st.composite
def random_timelines(draw):
    duration = draw(st.integers(1000, 30000))
    n = draw(st.integers(0, 8))
    elements = []
    for i in range(n):
        start = draw(st.integers(0, duration))
        end = draw(st.integers(start, duration))
        elements.append(
            TimelineElement(
                element_id=f"e{i}",
                label=draw(st.sampled_from(_LABELS)),
                category=draw(st.sampled_from(("object", "environment", "action"))),
                salience=draw(st.floats(0, 1, allow_nan=False)),
                start_ms=start,
                end_ms=end,
            )
        )
    return VisualTimeline("c", duration, tuple(elements), ())


@settings(max_examples=50, deadline=None)
@given(random_timelines())
def test_baseline_determinism_properties(default_schema, tl):
    over = plan_over_inclusive(tl, default_schema)
    mapped = [
        el for el in tl.elements
        if default_schema.lookup_label(el.label) is not None and el.start_ms < el.end_ms
    ]
    assert len(over.events) == len(mapped)

    naive = plan_naive(tl, default_schema)
    assert len(naive.events) <= 1
    for event in naive.events:
        assert (event.onset_ms, event.offset_ms) == (0, tl.duration_ms)

    # repeat runs are byte-identical
    assert plan_over_inclusive(tl, default_schema) == over
    assert plan_naive(tl, default_schema) == naive


# ------------------------------------------------------------ batch planning


@pytest.fixture()
def batch_ws(tmp_path, kitchen_timeline):
    ws = Workspace.at(tmp_path / "ws").ensure()
    _write_fixture(ws.fixtures_dir, "A", "kitchen", 1, _fence(timeline_to_dict(kitchen_timeline)))
    _write_fixture(ws.fixtures_dir, "B", "kitchen", 1, _fence(_plan_doc()))
    return ws


def test_generate_stimuli_happy_path(batch_ws, default_schema):
    provider = MockProvider(batch_ws.fixtures_dir)
    result = generate_stimuli([_clip()], default_schema, provider, batch_ws)
    assert result.plan_count == 3
    assert not result.failures
    for strategy in ("system", "over_inclusive", "naive"):
        assert batch_ws.plan_path("kitchen", strategy).exists()
    assert batch_ws.timeline_path("kitchen").exists()
    assert batch_ws.transcript_path("kitchen", "A").exists()
    assert batch_ws.transcript_path("kitchen", "B").exists()
    assert json.loads(batch_ws.failures_path().read_text("utf-8")) == []


def test_generate_stimuli_stage_a_failure_fails_all_three(tmp_path, default_schema):
    ws = Workspace.at(tmp_path / "ws").ensure()
    _write_fixture(ws.fixtures_dir, "A", "kitchen", 1, "never json")
    provider = MockProvider(ws.fixtures_dir)
    result = generate_stimuli([_clip()], default_schema, provider, ws)
    assert result.plan_count == 0
    assert {f.strategy for f in result.failures} == {"system", "over_inclusive", "naive"}
    assert len(result.failures) == 3


def test_generate_stimuli_system_failure_keeps_baselines(tmp_path, kitchen_timeline, default_schema):
    ws = Workspace.at(tmp_path / "ws").ensure()
    _write_fixture(ws.fixtures_dir, "A", "kitchen", 1, _fence(timeline_to_dict(kitchen_timeline)))
    _write_fixture(ws.fixtures_dir, "B", "kitchen", 1, "never json")
    provider = MockProvider(ws.fixtures_dir)
    result = generate_stimuli([_clip()], default_schema, provider, ws)
    assert result.plan_count == 2
    assert [f.strategy for f in result.failures] == ["system"]
    manifest = json.loads(ws.failures_path().read_text("utf-8"))
    assert manifest[0]["clip_id"] == "kitchen"


def test_generate_stimuli_cached_timeline_spares_budget(batch_ws, default_schema):
    provider = MockProvider(batch_ws.fixtures_dir)
    generate_stimuli([_clip()], default_schema, provider, batch_ws)
    # exhausted provider: cached timeline still allows both baselines
    broke = MockProvider(batch_ws.fixtures_dir, budget=0)
    result = generate_stimuli([_clip()], default_schema, broke, batch_ws)
    assert set(result.plans["kitchen"]) == {"over_inclusive", "naive"}
    assert [f.strategy for f in result.failures] == ["system"]


def test_generate_stimuli_strategy_filter(batch_ws, default_schema):
    provider = MockProvider(batch_ws.fixtures_dir)
    result = generate_stimuli(
        [_clip()], default_schema, provider, batch_ws, strategies=("naive",)
    )
    assert set(result.plans["kitchen"]) == {"naive"}
    assert not batch_ws.plan_path("kitchen", "system").exists()
