"""Append-only public broadcast log with ordering checks."""
from __future__ import annotations

import json
from dataclasses import dataclass, field

__all__ = ["Transcript", "TranscriptOrderError", "Announcement"]


class TranscriptOrderError(RuntimeError):
    """An announcement was made before the event it must follow."""


@dataclass(frozen=True)
class Announcement:
    """One broadcast.  ``data`` is a plain-Python snapshot of the payload;
    ``payload`` is its canonical JSON encoding (or the raw bytes posted)."""

    sender: str
    round: int
    tag: str
    data: object

    @property
    def payload(self) -> bytes:
        if isinstance(self.data, bytes):
            return self.data
        return json.dumps(self.data, sort_keys=True).encode("utf-8")


@dataclass
class Transcript:
    entries: list = field(default_factory=list)

    def has(self, tag: str, round: int = 0) -> bool:
        return any(e.tag == tag and e.round == round for e in self.entries)

    def post(self, sender: str, tag: str, payload=b"", round: int = 0, after: str | None = None):
        """Append an announcement; ``after`` names a tag that must already be present."""
        if after is not None and not self.has(after, round):
            raise TranscriptOrderError(f"{tag!r} announced before {after!r} in round {round}")
        self.entries.append(Announcement(sender, int(round), tag, _snapshot(payload)))
        return self.entries[-1]

    def payloads(self, tag: str, round: int = 0) -> list:
        return [json.loads(e.payload) for e in self.entries if e.tag == tag and e.round == round]

    def to_json(self) -> str:
        """Canonical encoding of the whole log."""
        return json.dumps([[e.sender, e.round, e.tag, e.payload.decode("utf-8", "replace")] for e in self.entries])

    def __len__(self) -> int:
        return len(self.entries)


_SCALARS = (bool, int, float, str, type(None))


def _snapshot(obj):
    """Copy a payload into plain Python values (arrays via tolist)."""
    if isinstance(obj, bytes):
        return obj
    if hasattr(obj, "tolist"):
        return obj.tolist()
    if isinstance(obj, dict):
        return {str(k): _snapshot(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        if all(type(v) in _SCALARS for v in obj):
            return list(obj)
        return [_snapshot(v) for v in obj]
    if isinstance(obj, (bool, int, float, str)) or obj is None:
        return obj
    raise TypeError(f"cannot broadcast a {type(obj).__name__}")
