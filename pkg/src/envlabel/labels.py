"""Six-axis environment-condition taxonomy and per-frame annotation records.

A frame is described along six independent categories: daytime, precipitation,
fog, road condition, roadside condition, and infrastructure. Precipitation
carries an optional intensity that must be present exactly when the kind is
not ``None``; fog and precipitation may co-occur freely. Annotations track,
per category, whether the value came from the automated pipeline, a human,
or is still unset.

On disk an annotation is one JSON object per line (see :func:`serialize` /
:func:`deserialize`); the field set is closed and unknown keys are rejected.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, fields
from datetime import datetime, timezone
from enum import Enum
from typing import Any


class Daytime(Enum):
    DAY = "Day"
    NIGHT = "Night"
    TWILIGHT = "Twilight"


class PrecipitationKind(Enum):
    NONE = "None"
    RAIN = "Rain"
    SNOW = "Snow"


class Intensity(Enum):
    LIGHT = "Light"
    HEAVY = "Heavy"


class Fog(Enum):
    NONE = "None"
    LIGHT_FOG = "LightFog"
    DENSE_FOG = "DenseFog"


class SurfaceCondition(Enum):
    DRY = "Dry"
    WET = "Wet"
    PARTIAL_SNOW = "PartialSnow"
    FULL_SNOW = "FullSnow"


class Infrastructure(Enum):
    # Scene-setting split; extend here if a relabeling pass needs more values.
    # Stored records carry the string value, so additions are non-breaking.
    URBAN = "Urban"
    SUBURBAN = "Suburban"
    HIGHWAY = "Highway"
    RURAL = "Rural"


class Provenance(Enum):
    AUTO = "Auto"
    HUMAN = "Human"
    UNSET = "Unset"


class Mode(Enum):
    DRAFT = "Draft"
    FINAL = "Final"


#: Category keys, in canonical order (also the head order of the toy model).
CATEGORIES = ("daytime", "precipitation", "fog", "road", "roadside", "infrastructure")

#: Canonical class value order per category, shared by metrics and the trainer.
#: Precipitation is evaluated on its kind; intensity is not a model target.
CATEGORY_CLASSES: dict[str, tuple[str, ...]] = {
    "daytime": tuple(m.value for m in Daytime),
    "precipitation": tuple(m.value for m in PrecipitationKind),
    "fog": tuple(m.value for m in Fog),
    "road": tuple(m.value for m in SurfaceCondition),
    "roadside": tuple(m.value for m in SurfaceCondition),
    "infrastructure": tuple(m.value for m in Infrastructure),
}

_CATEGORY_ENUMS: dict[str, type[Enum]] = {
    "daytime": Daytime,
    "precipitation": PrecipitationKind,
    "fog": Fog,
    "road": SurfaceCondition,
    "roadside": SurfaceCondition,
    "infrastructure": Infrastructure,
}


class AnnotationError(ValueError):
    """An annotation failed validation where a valid one is required."""


class AnnotationFormatError(ValueError):
    """A serialized annotation record could not be parsed."""


@dataclass(frozen=True)
class Violation:
    """One broken constraint; data, not an exception."""

    category: str
    message: str

    def __str__(self) -> str:
        return f"{self.category}: {self.message}"


@dataclass(frozen=True)
class Precipitation:
    """Complete precipitation value: intensity present iff kind is not None."""

    kind: PrecipitationKind
    intensity: Intensity | None = None

    def __post_init__(self) -> None:
        if self.kind is PrecipitationKind.NONE and self.intensity is not None:
            raise AnnotationError("intensity without precipitation kind")
        if self.kind is not PrecipitationKind.NONE and self.intensity is None:
            raise AnnotationError(f"precipitation kind {self.kind.value} requires an intensity")


@dataclass(frozen=True)
class EnvironmentLabel:
    """A frame's final assignment across all six categories."""

    daytime: Daytime
    precipitation: Precipitation
    fog: Fog
    road: SurfaceCondition
    roadside: SurfaceCondition
    infrastructure: Infrastructure


@dataclass(frozen=True)
class ProvenanceMap:
    """Per-category source of the current value."""

    daytime: Provenance = Provenance.UNSET
    precipitation: Provenance = Provenance.UNSET
    fog: Provenance = Provenance.UNSET
    road: Provenance = Provenance.UNSET
    roadside: Provenance = Provenance.UNSET
    infrastructure: Provenance = Provenance.UNSET

    def get(self, category: str) -> Provenance:
        return getattr(self, category)

    def with_value(self, category: str, source: Provenance) -> "ProvenanceMap":
        if category not in CATEGORIES:
            raise KeyError(category)
        values = {f.name: getattr(self, f.name) for f in fields(self)}
        values[category] = source
        return ProvenanceMap(**values)


def utc_now() -> datetime:
    return datetime.now(timezone.utc)


@dataclass
class FrameAnnotation:
    """One frame's annotation, possibly a partial draft.

    Category values are None while unset. Precipitation is split into kind
    and intensity so the automated pipeline can suggest an intensity before
    a human has decided the kind (kind=None means "no precipitation", which
    is different from kind still being unset).
    """

    frame_id: str
    daytime: Daytime | None = None
    precipitation_kind: PrecipitationKind | None = None
    precipitation_intensity: Intensity | None = None
    fog: Fog | None = None
    road: SurfaceCondition | None = None
    roadside: SurfaceCondition | None = None
    infrastructure: Infrastructure | None = None
    provenance: ProvenanceMap = field(default_factory=ProvenanceMap)
    clutter_fraction: float | None = None
    updated_at: datetime = field(default_factory=utc_now)

    def category_is_set(self, category: str) -> bool:
        if category == "precipitation":
            return self.precipitation_kind is not None or self.precipitation_intensity is not None
        return getattr(self, category) is not None

    def label(self) -> EnvironmentLabel:
        """The complete six-category label; raises if the annotation is not final."""
        violations = validate(self, Mode.FINAL)
        if violations:
            raise AnnotationError("; ".join(str(v) for v in violations))
        assert self.precipitation_kind is not None
        return EnvironmentLabel(
            daytime=self.daytime,  # type: ignore[arg-type]
            precipitation=Precipitation(self.precipitation_kind, self.precipitation_intensity),
            fog=self.fog,  # type: ignore[arg-type]
            road=self.road,  # type: ignore[arg-type]
            roadside=self.roadside,  # type: ignore[arg-type]
            infrastructure=self.infrastructure,  # type: ignore[arg-type]
        )

    def is_final(self) -> bool:
        return not validate(self, Mode.FINAL)


def validate(annotation: FrameAnnotation, mode: Mode = Mode.DRAFT) -> list[Violation]:
    """Check an annotation against the hierarchy constraints.

    Returns one :class:`Violation` per broken constraint (empty list means
    valid). Draft mode permits unset categories and a pending precipitation
    (kind or intensity missing); Final mode additionally requires all six
    categories to be set and complete.
    """
    out: list[Violation] = []
    if not annotation.frame_id:
        out.append(Violation("frame_id", "frame_id must be a non-empty string"))

    kind = annotation.precipitation_kind
    intensity = annotation.precipitation_intensity
    if kind is PrecipitationKind.NONE and intensity is not None:
        out.append(Violation("precipitation", "intensity without precipitation kind"))

    for category in CATEGORIES:
        source = annotation.provenance.get(category)
        has_value = annotation.category_is_set(category)
        if source is Provenance.UNSET and has_value:
            out.append(Violation(category, "value present but provenance is Unset"))
        if source is not Provenance.UNSET and not has_value:
            out.append(Violation(category, f"provenance {source.value} but no value"))

    if annotation.provenance.precipitation is Provenance.AUTO and annotation.clutter_fraction is None:
        out.append(Violation("clutter_fraction", "required when precipitation provenance is Auto"))
    cf = annotation.clutter_fraction
    if cf is not None:
        ok = isinstance(cf, (int, float)) and not isinstance(cf, bool) and 0.0 <= cf <= 1.0
        if not ok:
            out.append(Violation("clutter_fraction", f"must be a fraction in [0, 1], got {cf!r}"))

    if not isinstance(annotation.updated_at, datetime) or annotation.updated_at.tzinfo is None:
        out.append(Violation("updated_at", "timestamp must be timezone-aware UTC"))

    if mode is Mode.FINAL:
        for category in CATEGORIES:
            if not annotation.category_is_set(category):
                out.append(Violation(category, "unset category in a final label"))
        if kind is not None and kind is not PrecipitationKind.NONE and intensity is None:
            out.append(Violation("precipitation", f"kind {kind.value} without an intensity"))
        if kind is None and intensity is not None:
            out.append(Violation("precipitation", "intensity set but kind undecided"))
    return out


def _enum_to_json(value: Enum | None) -> str | None:
    return None if value is None else value.value


def _format_timestamp(ts: datetime) -> str:
    ts = ts.astimezone(timezone.utc)
    return ts.isoformat().replace("+00:00", "Z")


def _parse_timestamp(raw: str) -> datetime:
    if raw.endswith("Z"):
        raw = raw[:-1] + "+00:00"
    ts = datetime.fromisoformat(raw)
    if ts.tzinfo is None:
        raise ValueError("missing timezone offset")
    return ts.astimezone(timezone.utc)


def serialize(annotation: FrameAnnotation) -> str:
    """Render one annotation as its one-line JSON record.

    The annotation must pass Draft validation; the record is self-delimiting
    (no embedded newlines) and round-trips exactly through :func:`deserialize`.
    """
    violations = validate(annotation, Mode.DRAFT)
    if violations:
        raise AnnotationError(
            "cannot serialize invalid annotation: " + "; ".join(str(v) for v in violations)
        )
    record = {
        "frame_id": annotation.frame_id,
        "daytime": _enum_to_json(annotation.daytime),
        "precipitation_kind": _enum_to_json(annotation.precipitation_kind),
        "precipitation_intensity": _enum_to_json(annotation.precipitation_intensity),
        "fog": _enum_to_json(annotation.fog),
        "road": _enum_to_json(annotation.road),
        "roadside": _enum_to_json(annotation.roadside),
        "infrastructure": _enum_to_json(annotation.infrastructure),
        "provenance": {c: annotation.provenance.get(c).value for c in CATEGORIES},
        "clutter_fraction": annotation.clutter_fraction,
        "updated_at": _format_timestamp(annotation.updated_at),
    }
    return json.dumps(record, separators=(",", ":"), allow_nan=False)


_RECORD_FIELDS = (
    "frame_id",
    "daytime",
    "precipitation_kind",
    "precipitation_intensity",
    "fog",
    "road",
    "roadside",
    "infrastructure",
    "provenance",
    "clutter_fraction",
    "updated_at",
)


def _reject_duplicates(pairs: list[tuple[str, Any]]) -> dict[str, Any]:
    obj: dict[str, Any] = {}
    for key, value in pairs:
        if key in obj:
            raise AnnotationFormatError(f"duplicate field {key!r}")
        obj[key] = value
    return obj


def _parse_enum(raw: Any, enum_cls: type[Enum], field_name: str, *, optional: bool) -> Enum | None:
    if raw is None:
        if optional:
            return None
        raise AnnotationFormatError(f"field {field_name!r} must not be null")
    if not isinstance(raw, str):
        raise AnnotationFormatError(f"field {field_name!r} must be a string, got {type(raw).__name__}")
    try:
        return enum_cls(raw)
    except ValueError:
        allowed = ", ".join(m.value for m in enum_cls)
        raise AnnotationFormatError(
            f"unknown value {raw!r} for field {field_name!r} (expected one of: {allowed})"
        ) from None


def deserialize(line: str) -> FrameAnnotation:
    """Parse one line record back into a :class:`FrameAnnotation`.

    Rejects malformed JSON, duplicate or unknown fields, missing fields and
    values outside the declared enum sets; the error message names the field.
    """
    try:
        raw = json.loads(
            line,
            object_pairs_hook=_reject_duplicates,
            parse_constant=lambda c: (_ for _ in ()).throw(
                AnnotationFormatError(f"non-finite number {c!r} not allowed")
            ),
        )
    except AnnotationFormatError:
        raise
    except json.JSONDecodeError as exc:
        raise AnnotationFormatError(f"malformed record: {exc}") from exc
    if not isinstance(raw, dict):
        raise AnnotationFormatError("record must be a JSON object")

    unknown = set(raw) - set(_RECORD_FIELDS)
    if unknown:
        raise AnnotationFormatError(f"unknown field(s): {', '.join(sorted(unknown))}")
    missing = set(_RECORD_FIELDS) - set(raw)
    if missing:
        raise AnnotationFormatError(f"missing field(s): {', '.join(sorted(missing))}")

    frame_id = raw["frame_id"]
    if not isinstance(frame_id, str) or not frame_id:
        raise AnnotationFormatError("field 'frame_id' must be a non-empty string")

    prov_raw = raw["provenance"]
    if not isinstance(prov_raw, dict):
        raise AnnotationFormatError("field 'provenance' must be an object")
    if set(prov_raw) != set(CATEGORIES):
        raise AnnotationFormatError(
            "field 'provenance' must map exactly the six categories: " + ", ".join(CATEGORIES)
        )
    provenance = ProvenanceMap(
        **{
            c: _parse_enum(prov_raw[c], Provenance, f"provenance.{c}", optional=False)
            for c in CATEGORIES
        }
    )

    cf = raw["clutter_fraction"]
    if cf is not None:
        if isinstance(cf, bool) or not isinstance(cf, (int, float)):
            raise AnnotationFormatError("field 'clutter_fraction' must be a number or null")
        cf = float(cf)
        if not math.isfinite(cf) or not 0.0 <= cf <= 1.0:
            raise AnnotationFormatError("field 'clutter_fraction' must lie in [0, 1]")

    ts_raw = raw["updated_at"]
    if not isinstance(ts_raw, str):
        raise AnnotationFormatError("field 'updated_at' must be an RFC-3339 string")
    try:
        updated_at = _parse_timestamp(ts_raw)
    except ValueError as exc:
        raise AnnotationFormatError(f"field 'updated_at' is not RFC-3339: {exc}") from exc

    return FrameAnnotation(
        frame_id=frame_id,
        daytime=_parse_enum(raw["daytime"], Daytime, "daytime", optional=True),
        precipitation_kind=_parse_enum(
            raw["precipitation_kind"], PrecipitationKind, "precipitation_kind", optional=True
        ),
        precipitation_intensity=_parse_enum(
            raw["precipitation_intensity"], Intensity, "precipitation_intensity", optional=True
        ),
        fog=_parse_enum(raw["fog"], Fog, "fog", optional=True),
        road=_parse_enum(raw["road"], SurfaceCondition, "road", optional=True),
        roadside=_parse_enum(raw["roadside"], SurfaceCondition, "roadside", optional=True),
        infrastructure=_parse_enum(
            raw["infrastructure"], Infrastructure, "infrastructure", optional=True
        ),
        provenance=provenance,
        clutter_fraction=cf,
        updated_at=updated_at,
    )
