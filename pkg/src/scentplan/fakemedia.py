"""Stub media tool satisfying the ingest subprocess contract without codecs.

``probe`` reads a ``<clip>.meta.json`` sidecar and prints the duration in
seconds; ``extract`` writes a fixed 1x1 PNG.  Used by the offline demo and
the test suite in place of ffprobe/ffmpeg.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

# Smallest valid 1x1 grey PNG.
_PNG_1PX = bytes.fromhex(
    "89504e470d0a1a0a0000000d49484452000000010000000108000000003a7e9b55"
    "0000000a49444154789c636000000002000148afa4710000000049454e44ae426082"
)


def _probe(clip_path: str) -> int:
    sidecar = Path(clip_path + ".meta.json")
    if not Path(clip_path).is_file() or not sidecar.is_file():
        print(f"no media metadata for {clip_path}", file=sys.stderr)
        return 1
    meta = json.loads(sidecar.read_text("utf-8"))
    print(meta["duration_s"])
    return 0


def _extract(clip_path: str, ts: str, output: str) -> int:
    if not Path(clip_path).is_file():
        print(f"no such clip {clip_path}", file=sys.stderr)
        return 1
    float(ts)  # timestamp must at least parse
    Path(output).write_bytes(_PNG_1PX)
    return 0


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    if len(argv) >= 2 and argv[0] == "probe":
        return _probe(argv[1])
    if len(argv) >= 4 and argv[0] == "extract":
        return _extract(argv[1], argv[2], argv[3])
    print("usage: fakemedia probe <clip> | extract <clip> <ts> <output>", file=sys.stderr)
    return 2


if __name__ == "__main__":
    raise SystemExit(main())
