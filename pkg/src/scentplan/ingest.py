"""Clip registration and uniform frame sampling.

All codec work is delegated to an external media tool invoked as a
subprocess behind a two-command contract:

* probe command: given the clip path, prints the stream duration in seconds
  on stdout (non-zero exit for unreadable files);
* extract command: given the clip path, a timestamp in seconds, and an output
  path, writes one image file.

The default contract targets ffprobe/ffmpeg; tests and the offline demo
substitute ``python -m scentplan.fakemedia``, which reads a ``.meta.json``
sidecar instead of decoding anything.
"""

from __future__ import annotations

import json
import subprocess
import sys
from dataclasses import dataclass, field, replace
from pathlib import Path


class IngestError(RuntimeError):
    pass


@dataclass(frozen=True)
class FrameStamp:
    index: int
    at_ms: int


def frame_stamps(duration_ms: int, fps: float) -> list[FrameStamp]:
    """Uniform timestamps at 0, 1/fps, 2/fps, ... strictly inside the clip."""
    if fps <= 0:
        raise ValueError(f"fps must be positive, got {fps}")
    stamps = []
    i = 0
    while True:
        at_ms = round(i / fps * 1000)
        if at_ms >= duration_ms:
            break
        stamps.append(FrameStamp(index=i, at_ms=at_ms))
        i += 1
    return stamps


@dataclass(frozen=True)
class MediaToolConfig:
    """Command templates for the external media tool.

    Placeholders: ``{input}`` clip path, ``{ts}`` timestamp in seconds,
    ``{output}`` frame image path.  ``{python}`` expands to the current
    interpreter, so the stub tool works regardless of environment.
    """

    probe: tuple[str, ...] = (
        "ffprobe", "-v", "error", "-show_entries", "format=duration",
        "-of", "csv=p=0", "{input}",
    )
    extract: tuple[str, ...] = (
        "ffmpeg", "-v", "error", "-ss", "{ts}", "-i", "{input}",
        "-frames:v", "1", "-y", "{output}",
    )
    frame_ext: str = ".jpg"

    @classmethod
    def stub(cls) -> "MediaToolConfig":
        return cls(
            probe=("{python}", "-m", "scentplan.fakemedia", "probe", "{input}"),
            extract=("{python}", "-m", "scentplan.fakemedia", "extract",
                     "{input}", "{ts}", "{output}"),
            frame_ext=".png",
        )

    @classmethod
    def from_file(cls, path: str | Path) -> "MediaToolConfig":
        doc = json.loads(Path(path).read_text("utf-8"))
        return cls(
            probe=tuple(doc["probe"]),
            extract=tuple(doc["extract"]),
            frame_ext=doc.get("frame_ext", ".jpg"),
        )

    def _render(self, template: tuple[str, ...], **subs: str) -> list[str]:
        subs = {"python": sys.executable, **subs}
        return [arg.format(**subs) for arg in template]

    def probe_duration_ms(self, path: Path) -> int:
        cmd = self._render(self.probe, input=str(path))
        try:
            out = subprocess.run(cmd, capture_output=True, text=True, check=True, timeout=60)
        except (subprocess.CalledProcessError, subprocess.TimeoutExpired, OSError) as exc:
            raise IngestError(f"unreadable file: {path} (probe failed: {exc})") from exc
        try:
            seconds = float(out.stdout.strip().splitlines()[0])
        except (ValueError, IndexError) as exc:
            raise IngestError(f"probe output not a duration: {out.stdout!r}") from exc
        return round(seconds * 1000)

    def extract_frame(self, path: Path, at_ms: int, output: Path) -> None:
        cmd = self._render(
            self.extract, input=str(path), ts=f"{at_ms / 1000:.3f}", output=str(output)
        )
        try:
            subprocess.run(cmd, capture_output=True, text=True, check=True, timeout=120)
        except (subprocess.CalledProcessError, subprocess.TimeoutExpired, OSError) as exc:
            raise IngestError(f"decoder failure at {at_ms}ms for {path}: {exc}") from exc


@dataclass(frozen=True)
class ClipRecord:
    clip_id: str
    path: str
    duration_ms: int
    fps_sampled: float | None = None
    frame_paths: tuple[str, ...] = ()

    @property
    def sampled(self) -> bool:
        return bool(self.frame_paths)


def clip_to_dict(clip: ClipRecord) -> dict:
    return {
        "clip_id": clip.clip_id,
        "path": clip.path,
        "duration_ms": clip.duration_ms,
        "fps_sampled": clip.fps_sampled,
        "frame_paths": list(clip.frame_paths),
    }


def clip_from_dict(doc: dict) -> ClipRecord:
    return ClipRecord(
        clip_id=doc["clip_id"],
        path=doc["path"],
        duration_ms=int(doc["duration_ms"]),
        fps_sampled=doc.get("fps_sampled"),
        frame_paths=tuple(doc.get("frame_paths", [])),
    )


@dataclass
class ClipManifest:
    """One JSON record per line; rewritten whole under single-writer discipline."""

    path: Path
    clips: dict[str, ClipRecord] = field(default_factory=dict)

    @classmethod
    def load(cls, path: str | Path) -> "ClipManifest":
        path = Path(path)
        manifest = cls(path=path)
        if path.exists():
            for line in path.read_text("utf-8").splitlines():
                if line.strip():
                    clip = clip_from_dict(json.loads(line))
                    manifest.clips[clip.clip_id] = clip
        return manifest

    def save(self) -> None:
        self.path.parent.mkdir(parents=True, exist_ok=True)
        lines = [json.dumps(clip_to_dict(c), ensure_ascii=False) for c in self.clips.values()]
        self.path.write_text("\n".join(lines) + ("\n" if lines else ""), "utf-8")

    def put(self, clip: ClipRecord) -> None:
        self.clips[clip.clip_id] = clip
        self.save()


def register_clip(
    path: str | Path,
    clip_id: str,
    media: MediaToolConfig,
    manifest: ClipManifest,
) -> ClipRecord:
    """Probe a video file and persist its record to the clip manifest."""
    path = Path(path)
    if clip_id in manifest.clips:
        raise IngestError(f"id '{clip_id}' already registered")
    if not path.is_file():
        raise IngestError(f"unreadable file: {path}")
    duration_ms = media.probe_duration_ms(path)
    if duration_ms <= 0:
        raise IngestError(f"zero-duration stream: {path}")
    clip = ClipRecord(clip_id=clip_id, path=str(path), duration_ms=duration_ms)
    manifest.put(clip)
    return clip


def sample_frames(
    clip: ClipRecord,
    fps: float,
    media: MediaToolConfig,
    frames_root: str | Path,
    manifest: ClipManifest | None = None,
) -> ClipRecord:
    """Extract uniformly spaced frames; idempotent for a given fps.

    Frames land in ``frames_root/<clip_id>/<index>.<ext>`` named by their
    sample index, so re-sampling at the same rate reproduces the same file
    set.
    """
    stamps = frame_stamps(clip.duration_ms, fps)
    if len(stamps) < 2:
        raise IngestError(
            f"clip '{clip.clip_id}': fewer than 2 frames at {fps} fps "
            f"({clip.duration_ms}ms)"
        )
    out_dir = Path(frames_root) / clip.clip_id
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    for stamp in stamps:
        out_path = out_dir / f"{stamp.index:06d}{media.frame_ext}"
        media.extract_frame(Path(clip.path), stamp.at_ms, out_path)
        paths.append(str(out_path))
    sampled = replace(clip, fps_sampled=fps, frame_paths=tuple(paths))
    if manifest is not None:
        manifest.put(sampled)
    return sampled
