"""Append-only annotation store with last-write-wins per frame.

Each append writes one complete line record and flushes it, so a killed
process never clobbers previously committed records; at worst the file ends
in one unterminated fragment, which the loader ignores. The current state of
a frame is the record with the newest ``updated_at`` (file order breaks
ties). ``compact()`` rewrites the log down to one record per frame via an
atomic rename.
"""

from __future__ import annotations

import logging
import os
import threading
from pathlib import Path
from typing import Iterator

from .labels import AnnotationFormatError, FrameAnnotation, deserialize, serialize

log = logging.getLogger(__name__)


class StoreError(Exception):
    """The store file is unreadable or contains a corrupt committed record."""


class AnnotationStore:
    """Line-record annotation log at a filesystem path.

    Appends are serialized through an internal lock: the store is the single
    writer funnel for the whole toolkit. Reads take a point-in-time snapshot.
    """

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self._write_lock = threading.Lock()

    def exists(self) -> bool:
        return self.path.exists()

    def append(self, annotation: FrameAnnotation) -> None:
        line = serialize(annotation) + "\n"
        with self._write_lock:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            with open(self.path, "a", encoding="utf-8") as fh:
                fh.write(line)
                fh.flush()

    def append_many(self, annotations: Iterator[FrameAnnotation] | list[FrameAnnotation]) -> None:
        lines = [serialize(a) + "\n" for a in annotations]
        with self._write_lock:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            with open(self.path, "a", encoding="utf-8") as fh:
                fh.writelines(lines)
                fh.flush()

    def records(self) -> Iterator[FrameAnnotation]:
        """All committed records in log order (duplicates per frame included)."""
        if not self.path.exists():
            return
        with open(self.path, "r", encoding="utf-8", newline="") as fh:
            content = fh.read()
        if not content:
            return
        lines = content.split("\n")
        tail = lines.pop()  # "" when the file is newline-terminated
        if tail:
            # Crash artifact: an append that never completed. Committed
            # records are unaffected, so skip it rather than fail the load.
            log.warning("%s: ignoring unterminated trailing record", self.path)
        for lineno, line in enumerate(lines, start=1):
            if not line.strip():
                continue
            try:
                yield deserialize(line)
            except AnnotationFormatError as exc:
                raise StoreError(f"{self.path}:{lineno}: {exc}") from exc

    def load(self) -> dict[str, FrameAnnotation]:
        """Latest record per frame_id, keyed by updated_at (file order on ties)."""
        current: dict[str, FrameAnnotation] = {}
        for record in self.records():
            existing = current.get(record.frame_id)
            if existing is None or record.updated_at >= existing.updated_at:
                current[record.frame_id] = record
        return current

    def compact(self) -> int:
        """Drop superseded records; returns the number of records kept.

        Writes the surviving records (sorted by frame_id for stable output)
        to a temp file and atomically renames it over the log.
        """
        with self._write_lock:
            current = self.load()
            tmp = self.path.with_suffix(self.path.suffix + ".compact")
            with open(tmp, "w", encoding="utf-8") as fh:
                for frame_id in sorted(current):
                    fh.write(serialize(current[frame_id]) + "\n")
                fh.flush()
                os.fsync(fh.fileno())
            os.replace(tmp, self.path)
        return len(current)
