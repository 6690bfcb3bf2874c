"""Semi-automated labeling pipeline: suggest, merge, batch, and tally.

The LiDAR side only ever proposes a precipitation *intensity* (the clutter
count carries no rain-vs-snow signal); every other category, and the kind,
comes from humans. When both sides touch the same category the human value
wins, and a human kind of None drops any intensity to keep the hierarchy
constraint intact.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

from .labels import (
    CATEGORIES,
    FrameAnnotation,
    Intensity,
    Mode,
    PrecipitationKind,
    Provenance,
    utc_now,
    validate,
)
from .pointcloud import (
    LidarSpec,
    PointCloud,
    PointCloudFormatError,
    classify_clutter,
    load_point_cloud_file,
    precipitation_intensity,
)
from .store import AnnotationStore

log = logging.getLogger(__name__)


class ManifestError(ValueError):
    """The dataset manifest is malformed."""


@dataclass(frozen=True)
class ManifestEntry:
    frame_id: str
    image_path: str
    cloud_path: str


@dataclass
class DatasetManifest:
    root: Path
    entries: list[ManifestEntry]

    def __iter__(self):
        return iter(self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    def entry(self, frame_id: str) -> ManifestEntry | None:
        for e in self.entries:
            if e.frame_id == frame_id:
                return e
        return None

    def cloud_file(self, entry: ManifestEntry) -> Path:
        return self.root / entry.cloud_path

    def image_file(self, entry: ManifestEntry) -> Path:
        return self.root / entry.image_path


def load_manifest(path: str | Path, root: str | Path | None = None) -> DatasetManifest:
    """Parse the tab-separated manifest: frame_id, image path, cloud path.

    ``root`` defaults to the manifest's directory. Duplicate frame ids are
    rejected; file existence is checked per frame at processing time so one
    missing cloud cannot block the rest of a batch.
    """
    path = Path(path)
    entries: list[ManifestEntry] = []
    seen: set[str] = set()
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise ManifestError(f"{path}:{lineno}: expected 3 tab-separated fields")
            frame_id, image_path, cloud_path = parts
            if not frame_id:
                raise ManifestError(f"{path}:{lineno}: empty frame_id")
            if frame_id in seen:
                raise ManifestError(f"{path}:{lineno}: duplicate frame_id {frame_id!r}")
            seen.add(frame_id)
            entries.append(ManifestEntry(frame_id, image_path, cloud_path))
    return DatasetManifest(root=Path(root) if root is not None else path.parent, entries=entries)


@dataclass(frozen=True)
class AutoSuggestion:
    """LiDAR-derived precipitation-intensity proposal for one frame."""

    frame_id: str
    intensity: Intensity
    clutter_fraction: float
    diagnostics: tuple[str, ...] = ()


def suggest_precipitation(cloud: PointCloud, spec: LidarSpec = LidarSpec()) -> AutoSuggestion:
    """Clutter fraction of the cloud mapped to an intensity suggestion.

    An empty cloud degrades to a Light suggestion with a diagnostic instead
    of failing, so image-only frames stay labelable.
    """
    result = classify_clutter(cloud, spec)
    intensity = precipitation_intensity(result, spec)
    diagnostics: tuple[str, ...] = ()
    if result.n_points == 0:
        diagnostics = ("empty point cloud: defaulting suggestion to Light",)
        log.warning("frame %s: %s", cloud.frame_id, diagnostics[0])
    return AutoSuggestion(
        frame_id=cloud.frame_id,
        intensity=intensity,
        clutter_fraction=result.fraction,
        diagnostics=diagnostics,
    )


def human_part(annotation: FrameAnnotation) -> FrameAnnotation:
    """Strip an annotation down to its human-provided categories."""
    out = FrameAnnotation(frame_id=annotation.frame_id, updated_at=annotation.updated_at)
    for category in CATEGORIES:
        if annotation.provenance.get(category) is not Provenance.HUMAN:
            continue
        out.provenance = out.provenance.with_value(category, Provenance.HUMAN)
        if category == "precipitation":
            out.precipitation_kind = annotation.precipitation_kind
            out.precipitation_intensity = annotation.precipitation_intensity
        else:
            setattr(out, category, getattr(annotation, category))
    return out


def merge(auto: AutoSuggestion | None, human: FrameAnnotation | None) -> FrameAnnotation:
    """Combine an auto suggestion with a (partial) human annotation.

    Human values win wherever both exist; the auto intensity only fills a
    precipitation category the human has not touched. Setting kind=None
    drops any intensity (constraint repair). The result is Draft-valid.
    """
    if auto is None and human is None:
        raise ValueError("nothing to merge")
    if auto is not None and human is not None and auto.frame_id != human.frame_id:
        raise ValueError(f"frame_id mismatch: {auto.frame_id!r} vs {human.frame_id!r}")
    frame_id = human.frame_id if human is not None else auto.frame_id  # type: ignore[union-attr]

    merged = FrameAnnotation(frame_id=frame_id, updated_at=utc_now())
    if human is not None:
        violations = validate(human, Mode.DRAFT)
        if violations:
            raise ValueError(
                "human annotation fails draft validation: "
                + "; ".join(str(v) for v in violations)
            )
        for category in CATEGORIES:
            if human.provenance.get(category) is not Provenance.HUMAN:
                continue
            merged.provenance = merged.provenance.with_value(category, Provenance.HUMAN)
            if category == "precipitation":
                merged.precipitation_kind = human.precipitation_kind
                merged.precipitation_intensity = human.precipitation_intensity
            else:
                setattr(merged, category, getattr(human, category))
        merged.clutter_fraction = human.clutter_fraction

    if auto is not None:
        if merged.provenance.precipitation is Provenance.UNSET:
            merged.precipitation_intensity = auto.intensity
            merged.provenance = merged.provenance.with_value("precipitation", Provenance.AUTO)
        if merged.clutter_fraction is None:
            merged.clutter_fraction = auto.clutter_fraction

    # Constraint repair: an explicit "no precipitation" never carries an intensity.
    if merged.precipitation_kind is PrecipitationKind.NONE:
        merged.precipitation_intensity = None
    return merged


@dataclass(frozen=True)
class BatchEntry:
    frame_id: str
    status: str  # processed | failed | skipped
    message: str = ""

    def to_line(self) -> str:
        # Same one-JSON-object-per-line shape as the annotation store.
        return json.dumps(
            {"frame_id": self.frame_id, "status": self.status, "message": self.message},
            separators=(",", ":"),
        )


@dataclass
class BatchReport:
    entries: list[BatchEntry] = field(default_factory=list)

    @property
    def processed(self) -> int:
        return sum(1 for e in self.entries if e.status == "processed")

    @property
    def failed(self) -> int:
        return sum(1 for e in self.entries if e.status == "failed")

    @property
    def skipped(self) -> int:
        return sum(1 for e in self.entries if e.status == "skipped")

    def to_lines(self) -> list[str]:
        return [e.to_line() for e in self.entries]

    def summary(self) -> str:
        return f"processed={self.processed} failed={self.failed} skipped={self.skipped}"


def run_batch(
    manifest: DatasetManifest,
    spec: LidarSpec,
    store: AnnotationStore,
    *,
    dry_run: bool = False,
) -> BatchReport:
    """Auto-label every manifest frame and merge with stored human labels.

    Per-frame failures (missing or malformed clouds) are recorded in the
    report and never abort the batch. Frames whose precipitation is already
    human-decided are skipped: a fresh suggestion could not change them.
    Given the same inputs the written annotation values are identical
    (timestamps excepted).
    """
    existing = store.load() if store.exists() else {}
    report = BatchReport()
    for entry in manifest:
        stored = existing.get(entry.frame_id)
        if stored is not None and stored.provenance.precipitation is Provenance.HUMAN:
            report.entries.append(
                BatchEntry(entry.frame_id, "skipped", "precipitation already human-labeled")
            )
            continue
        cloud_file = manifest.cloud_file(entry)
        try:
            cloud = load_point_cloud_file(cloud_file, entry.frame_id)
            suggestion = suggest_precipitation(cloud, spec)
        except FileNotFoundError:
            report.entries.append(BatchEntry(entry.frame_id, "failed", f"missing cloud file {cloud_file}"))
            continue
        except PointCloudFormatError as exc:
            report.entries.append(BatchEntry(entry.frame_id, "failed", str(exc)))
            continue
        human = human_part(stored) if stored is not None else None
        annotation = merge(suggestion, human)
        if not dry_run:
            store.append(annotation)
        message = "; ".join(suggestion.diagnostics)
        report.entries.append(BatchEntry(entry.frame_id, "processed", message))
    return report


#: Histogram keys: the six categories plus the intensity sub-axis.
HISTOGRAM_KEYS = CATEGORIES + ("precipitation_intensity",)


@dataclass
class LabelHistogram:
    """Per-category value counts over finally-labeled frames."""

    counts: dict[str, dict[str, int]]
    n_final: int

    def to_dict(self) -> dict:
        return {"n_final": self.n_final, "counts": self.counts}


def stats(store: AnnotationStore) -> LabelHistogram:
    """Count category values across all Final-valid annotations in the store."""
    counts: dict[str, dict[str, int]] = {key: {} for key in HISTOGRAM_KEYS}
    n_final = 0
    for annotation in store.load().values():
        if not annotation.is_final():
            continue
        n_final += 1
        for category in CATEGORIES:
            if category == "precipitation":
                value = annotation.precipitation_kind.value
            else:
                value = getattr(annotation, category).value
            counts[category][value] = counts[category].get(value, 0) + 1
        if annotation.precipitation_intensity is not None:
            value = annotation.precipitation_intensity.value
            counts["precipitation_intensity"][value] = (
                counts["precipitation_intensity"].get(value, 0) + 1
            )
    return LabelHistogram(counts=counts, n_final=n_final)


def render_histogram(histogram: LabelHistogram) -> str:
    """Plain-text table of the distribution, one block per category."""
    lines = [f"final-labeled frames: {histogram.n_final}"]
    for key in HISTOGRAM_KEYS:
        values = histogram.counts.get(key, {})
        lines.append(f"{key}:")
        if not values:
            lines.append("  (none)")
            continue
        width = max(len(v) for v in values)
        for value in sorted(values, key=lambda v: (-values[v], v)):
            lines.append(f"  {value:<{width}}  {values[value]}")
    return "\n".join(lines)
