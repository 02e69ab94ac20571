"""Content-addressed blob store for raw time series.

Payloads live under ``blobs/<hh>/<sha256>`` exactly once; the key tree
``keys/<sim>/<entity>/<channel>`` holds one small file per channel whose
content is the payload's digest. Writing the same series twice is a no-op.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path


def _safe_segment(segment: str) -> str:
    if not segment or "/" in segment or "\\" in segment or segment in (".", ".."):
        raise ValueError(f"invalid key segment {segment!r}")
    return segment


class BlobStore:
    def __init__(self, root: Path):
        self.root = Path(root)
        (self.root / "blobs").mkdir(parents=True, exist_ok=True)
        (self.root / "keys").mkdir(parents=True, exist_ok=True)

    def _key_path(self, sim_id: str, entity: str, channel: str) -> Path:
        return (
            self.root
            / "keys"
            / _safe_segment(sim_id)
            / _safe_segment(entity)
            / _safe_segment(channel)
        )

    def put(self, sim_id: str, entity: str, channel: str, payload: bytes) -> str:
        digest = hashlib.sha256(payload).hexdigest()
        blob = self.root / "blobs" / digest[:2] / digest
        if not blob.exists():
            blob.parent.mkdir(parents=True, exist_ok=True)
            blob.write_bytes(payload)
        key = self._key_path(sim_id, entity, channel)
        key.parent.mkdir(parents=True, exist_ok=True)
        key.write_text(digest, encoding="ascii")
        return digest

    def get(self, sim_id: str, entity: str, channel: str) -> bytes:
        digest = self._key_path(sim_id, entity, channel).read_text(encoding="ascii").strip()
        return (self.root / "blobs" / digest[:2] / digest).read_bytes()

    def put_series(self, sim_id: str, entity: str, channel: str, t: list[float], v: list[float]) -> str:
        payload = json.dumps({"t": t, "v": v}).encode("utf-8")
        return self.put(sim_id, entity, channel, payload)

    def get_series(self, sim_id: str, entity: str, channel: str) -> tuple[list[float], list[float]]:
        raw = json.loads(self.get(sim_id, entity, channel))
        return raw["t"], raw["v"]

    def channels(self, sim_id: str) -> list[tuple[str, str]]:
        """All (entity, channel) pairs stored for a simulation."""
        base = self.root / "keys" / _safe_segment(sim_id)
        if not base.is_dir():
            return []
        out = [
            (entity.name, channel.name)
            for entity in base.iterdir()
            for channel in entity.iterdir()
        ]
        return sorted(out)

    def has(self, sim_id: str, entity: str, channel: str) -> bool:
        return self._key_path(sim_id, entity, channel).exists()
