import json

import pytest

from scentplan.ingest import (
    ClipManifest,
    IngestError,
    MediaToolConfig,
    frame_stamps,
    register_clip,
    sample_frames,
)


@pytest.fixture()
def stub_media():
    return MediaToolConfig.stub()


def _write_clip(directory, name="clip", duration_s=10):
    path = directory / f"{name}.mp4"
    path.write_bytes(b"fake video bytes")
    (directory / f"{name}.mp4.meta.json").write_text(
        json.dumps({"duration_s": duration_s}), "utf-8"
    )
    return path


# ------------------------------------------------------------ frame stamps


def test_stamps_exclude_clip_end():
    stamps = frame_stamps(10_000, 1.0)
    assert [s.at_ms for s in stamps] == [0, 1000, 2000, 3000, 4000, 5000, 6000, 7000, 8000, 9000]


def test_stamps_fractional_fps_rounding():
    stamps = frame_stamps(2_000, 2.5)
    assert [s.at_ms for s in stamps] == [0, 400, 800, 1200, 1600]


def test_stamps_high_fps_count():
    assert len(frame_stamps(1_000, 30.0)) == 30


def test_stamps_reject_bad_fps():
    with pytest.raises(ValueError, match="fps"):
        frame_stamps(1000, 0)
    with pytest.raises(ValueError, match="fps"):
        frame_stamps(1000, -1.0)


# ------------------------------------------------------------ registration


def test_register_probes_duration(tmp_path, stub_media):
    clip_path = _write_clip(tmp_path, duration_s=18)
    manifest = ClipManifest(path=tmp_path / "clips.jsonl")
    clip = register_clip(clip_path, "c1", stub_media, manifest)
    assert clip.duration_ms == 18_000
    assert not clip.sampled
    # persisted and reloadable
    again = ClipManifest.load(manifest.path)
    assert again.clips["c1"].duration_ms == 18_000


def test_register_rejects_duplicate_id(tmp_path, stub_media):
    clip_path = _write_clip(tmp_path)
    manifest = ClipManifest(path=tmp_path / "clips.jsonl")
    register_clip(clip_path, "c1", stub_media, manifest)
    with pytest.raises(IngestError, match="already registered"):
        register_clip(clip_path, "c1", stub_media, manifest)


def test_register_rejects_missing_file(tmp_path, stub_media):
    manifest = ClipManifest(path=tmp_path / "clips.jsonl")
    with pytest.raises(IngestError, match="unreadable"):
        register_clip(tmp_path / "nope.mp4", "c1", stub_media, manifest)


def test_register_rejects_unprobeable_file(tmp_path, stub_media):
    path = tmp_path / "broken.mp4"
    path.write_bytes(b"x")  # no duration sidecar
    manifest = ClipManifest(path=tmp_path / "clips.jsonl")
    with pytest.raises(IngestError, match="broken.mp4"):
        register_clip(path, "c1", stub_media, manifest)


# ----------------------------------------------------------------- sampling


def test_sample_frames_writes_indexed_files(tmp_path, stub_media):
    clip_path = _write_clip(tmp_path, duration_s=5)
    manifest = ClipManifest(path=tmp_path / "clips.jsonl")
    clip = register_clip(clip_path, "c1", stub_media, manifest)
    sampled = sample_frames(clip, 1.0, stub_media, tmp_path / "frames", manifest)
    assert len(sampled.frame_paths) == 5
    names = [p.rsplit("/", 1)[-1] for p in sampled.frame_paths]
    assert names == ["000000.png", "000001.png", "000002.png", "000003.png", "000004.png"]
    assert ClipManifest.load(manifest.path).clips["c1"].fps_sampled == 1.0


def test_sample_frames_idempotent(tmp_path, stub_media):
    clip_path = _write_clip(tmp_path, duration_s=4)
    manifest = ClipManifest(path=tmp_path / "clips.jsonl")
    clip = register_clip(clip_path, "c1", stub_media, manifest)
    first = sample_frames(clip, 1.0, stub_media, tmp_path / "frames", manifest)
    second = sample_frames(clip, 1.0, stub_media, tmp_path / "frames", manifest)
    assert first.frame_paths == second.frame_paths
    frames_dir = tmp_path / "frames" / "c1"
    assert sorted(p.name for p in frames_dir.iterdir()) == [
        "000000.png",
        "000001.png",
        "000002.png",
        "000003.png",
    ]


def test_sample_frames_rejects_too_few(tmp_path, stub_media):
    clip_path = _write_clip(tmp_path, duration_s=1)
    manifest = ClipManifest(path=tmp_path / "clips.jsonl")
    clip = register_clip(clip_path, "c1", stub_media, manifest)
    with pytest.raises(IngestError, match="fewer than 2 frames"):
        sample_frames(clip, 0.5, stub_media, tmp_path / "frames", manifest)
