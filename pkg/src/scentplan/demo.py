"""Offline end-to-end demonstration on ten bundled clips.

No network, no codecs: placeholder clip files carry duration sidecars for the
stub media tool, and a mock provider replays bundled model responses.  The
result is a fully populated workspace — manifest, frames, timelines, thirty
plans, and study configurations — ready for ``serve``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .harness import StudyStore, default_study1, default_study2
from .ingest import ClipManifest, ClipRecord, MediaToolConfig, register_clip, sample_frames
from .planners import StimulusResult, generate_stimuli
from .providers import MockProvider
from .schema import load_schema
from .workspace import Workspace

DEMO_FPS = 0.5
DEMO_SEED = 20240613


def demo_clip_docs() -> list[dict]:
    raw = resources.files("scentplan").joinpath("data", "demo", "clips.json").read_text("utf-8")
    return json.loads(raw)


def _fenced(doc: dict) -> str:
    return "```json\n" + json.dumps(doc, indent=2) + "\n```\n"


def _media_config_doc(media: MediaToolConfig) -> dict:
    return {
        "probe": list(media.probe),
        "extract": list(media.extract),
        "frame_ext": media.frame_ext,
    }


@dataclass(frozen=True)
class DemoResult:
    workspace: Workspace
    clip_ids: tuple[str, ...]
    stimuli: StimulusResult


def run_demo(root: str | Path, fps: float = DEMO_FPS, seed: int = DEMO_SEED) -> DemoResult:
    """Populate ``root`` with the complete bundled pipeline run.

    Idempotent: re-running against the same workspace reuses registered clips
    and cached timelines.
    """
    ws = Workspace.at(root).ensure()
    media = MediaToolConfig.stub()
    ws.media_config_path.write_text(
        json.dumps(_media_config_doc(media), indent=2) + "\n", "utf-8"
    )

    manifest = ClipManifest.load(ws.clip_manifest_path)
    docs = demo_clip_docs()
    clips: list[ClipRecord] = []
    for doc in docs:
        clip_id = doc["clip_id"]
        clip_path = ws.clips_dir / f"{clip_id}.mp4"
        if not clip_path.exists():
            clip_path.write_bytes(b"placeholder clip: " + doc["title"].encode() + b"\n")
        Path(str(clip_path) + ".meta.json").write_text(
            json.dumps({"duration_s": doc["duration_s"]}) + "\n", "utf-8"
        )
        clip = manifest.clips.get(clip_id)
        if clip is None:
            clip = register_clip(clip_path, clip_id, media, manifest)
        if not clip.sampled:
            clip = sample_frames(clip, fps, media, ws.frames_dir, manifest)
        clips.append(clip)

        fixtures = {
            "A": doc["timeline"],
            "B": doc["system_plan"],
        }
        for stage, payload in fixtures.items():
            fixture_path = ws.fixtures_dir / stage / clip_id / "1.txt"
            fixture_path.parent.mkdir(parents=True, exist_ok=True)
            fixture_path.write_text(_fenced(payload), "utf-8")

    provider = MockProvider(ws.fixtures_dir)
    schema = load_schema("default")
    stimuli = generate_stimuli(clips, schema, provider, ws)

    clip_ids = tuple(c.clip_id for c in clips)
    # instantiating the stores persists studies/<id>/config.json for `serve`;
    # the rating study uses three representative clips, the ranking study all ten
    StudyStore(default_study1(clip_ids, seed), ws.study_dir("study1"))
    StudyStore(default_study2(clip_ids[:3], seed), ws.study_dir("study2"))
    return DemoResult(workspace=ws, clip_ids=clip_ids, stimuli=stimuli)
