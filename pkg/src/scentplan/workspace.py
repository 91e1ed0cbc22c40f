"""Workspace directory layout shared by the CLI, planners, and harness."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path


@dataclass(frozen=True)
class Workspace:
    root: Path

    @classmethod
    def at(cls, root: str | Path) -> "Workspace":
        return cls(root=Path(root))

    def ensure(self) -> "Workspace":
        for d in (
            self.clips_dir,
            self.frames_dir,
            self.timelines_dir,
            self.plans_dir,
            self.transcripts_dir,
            self.fixtures_dir,
            self.studies_dir,
            self.exports_dir,
            self.reports_dir,
        ):
            d.mkdir(parents=True, exist_ok=True)
        return self

    @property
    def clips_dir(self) -> Path:
        return self.root / "clips"

    @property
    def clip_manifest_path(self) -> Path:
        return self.clips_dir / "manifest.jsonl"

    @property
    def frames_dir(self) -> Path:
        return self.root / "frames"

    @property
    def timelines_dir(self) -> Path:
        return self.root / "timelines"

    @property
    def plans_dir(self) -> Path:
        return self.root / "plans"

    @property
    def transcripts_dir(self) -> Path:
        return self.root / "transcripts"

    @property
    def fixtures_dir(self) -> Path:
        return self.root / "fixtures"

    @property
    def studies_dir(self) -> Path:
        return self.root / "studies"

    @property
    def exports_dir(self) -> Path:
        return self.root / "exports"

    @property
    def reports_dir(self) -> Path:
        return self.root / "reports"

    @property
    def media_config_path(self) -> Path:
        return self.root / "media_tool.json"

    def timeline_path(self, clip_id: str) -> Path:
        return self.timelines_dir / f"{clip_id}.timeline.json"

    def plan_path(self, clip_id: str, strategy: str) -> Path:
        return self.plans_dir / f"{clip_id}.{strategy}.plan.json"

    def transcript_path(self, clip_id: str, stage: str) -> Path:
        return self.transcripts_dir / f"{clip_id}.{stage}.transcript.json"

    def study_dir(self, study_id: str) -> Path:
        return self.studies_dir / study_id

    def failures_path(self) -> Path:
        return self.plans_dir / "failures.json"
