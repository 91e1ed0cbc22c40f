import shutil

import pytest

from scentplan.demo import run_demo
from scentplan.schema import load_schema
from scentplan.timeline import TimelineElement, TimelineEvent, VisualTimeline
from scentplan.workspace import Workspace


@pytest.fixture(scope="session")
def default_schema():
    return load_schema("default")


@pytest.fixture(scope="session")
def demo_result(tmp_path_factory):
    """One shared offline pipeline run; treat its workspace as read-only."""
    result = run_demo(tmp_path_factory.mktemp("demo"))
    assert not result.stimuli.failures
    return result


@pytest.fixture()
def fresh_demo_ws(demo_result, tmp_path):
    """Private copy of the demo workspace for tests that mutate study stores."""
    root = tmp_path / "ws"
    shutil.copytree(demo_result.workspace.root, root)
    return Workspace.at(root)


@pytest.fixture()
def kitchen_timeline():
    return VisualTimeline(
        clip_id="kitchen",
        duration_ms=12000,
        elements=(
            TimelineElement("el1", "lemon halves", "object", 0.9, 1000, 10000),
            TimelineElement("el2", "chef knife", "object", 0.5, 0, 10000),
            TimelineElement("el3", "cutting board", "object", 0.4, 0, 12000),
        ),
        events=(
            TimelineEvent("ev1", "appear", 1000, "el1"),
            TimelineEvent("ev2", "scene_change", 10000, None, "cut to sink"),
        ),
    )
