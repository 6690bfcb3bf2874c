"""HTTP annotation service backing the review UI.

JSON API over the annotation store and dataset manifest:

    GET  /api/frames?offset&limit      paged frame list with completion status
    GET  /api/frames/{id}              annotation + auto suggestion + image URL
    PUT  /api/frames/{id}/annotation   store human categories, return merged record
    GET  /api/stats                    label histogram
    GET  /api/export                   current store as line records
    GET  /healthz                      liveness
    GET  /images/{path}                static image files from the dataset root

Malformed bodies get 400 with field diagnostics; hierarchy-constraint
violations get 422 with the violation list. All writes go through the
store's single-writer append path; concurrent updates resolve by
last-write-wins on the record timestamp.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass, field
from pathlib import Path

from fastapi import FastAPI, Request, Response
from fastapi.responses import FileResponse, JSONResponse, PlainTextResponse

from .autolabel import DatasetManifest, load_manifest, stats, suggest_precipitation
from .labels import (
    CATEGORIES,
    Daytime,
    Fog,
    FrameAnnotation,
    Infrastructure,
    Intensity,
    Mode,
    PrecipitationKind,
    Provenance,
    SurfaceCondition,
    serialize,
    utc_now,
    validate,
)
from .pointcloud import LidarSpec, PointCloudFormatError, load_point_cloud_file
from .store import AnnotationStore

_UPDATE_FIELDS = {
    "daytime": Daytime,
    "precipitation_kind": PrecipitationKind,
    "precipitation_intensity": Intensity,
    "fog": Fog,
    "road": SurfaceCondition,
    "roadside": SurfaceCondition,
    "infrastructure": Infrastructure,
}


@dataclass
class ServiceConfig:
    manifest_path: Path
    store_path: Path
    dataset_root: Path | None = None
    lidar: LidarSpec = field(default_factory=LidarSpec)
    read_only: bool = False
    ui_dir: Path | None = None
    host: str = "127.0.0.1"
    port: int = 8080


class _FieldError(ValueError):
    """Maps to a 400 response naming the offending field."""


def _parse_update(payload: object, frame_id: str) -> dict[str, object]:
    """Validate a PUT body into {record field: enum value | None}.

    Present fields are applied as human decisions (null clears a category);
    absent fields leave the stored annotation untouched.
    """
    if not isinstance(payload, dict):
        raise _FieldError("body must be a JSON object")
    updates: dict[str, object] = {}
    for key, raw in payload.items():
        if key == "frame_id":
            if raw != frame_id:
                raise _FieldError(f"frame_id {raw!r} does not match the URL")
            continue
        enum_cls = _UPDATE_FIELDS.get(key)
        if enum_cls is None:
            raise _FieldError(f"unknown or read-only field {key!r}")
        if raw is None:
            updates[key] = None
            continue
        if not isinstance(raw, str):
            raise _FieldError(f"field {key!r} must be a string or null")
        try:
            updates[key] = enum_cls(raw)
        except ValueError:
            allowed = ", ".join(m.value for m in enum_cls)
            raise _FieldError(f"unknown value {raw!r} for field {key!r} (expected: {allowed})")
    return updates


def apply_human_update(
    existing: FrameAnnotation | None, frame_id: str, updates: dict[str, object]
) -> FrameAnnotation:
    """New annotation state after a human edit, preserving untouched categories."""
    base = existing or FrameAnnotation(frame_id=frame_id)
    out = FrameAnnotation(
        frame_id=frame_id,
        daytime=base.daytime,
        precipitation_kind=base.precipitation_kind,
        precipitation_intensity=base.precipitation_intensity,
        fog=base.fog,
        road=base.road,
        roadside=base.roadside,
        infrastructure=base.infrastructure,
        provenance=base.provenance,
        clutter_fraction=base.clutter_fraction,
        updated_at=utc_now(),
    )
    touched_precipitation = False
    for key, value in updates.items():
        if key in ("precipitation_kind", "precipitation_intensity"):
            touched_precipitation = True
        setattr(out, key, value)
    if out.precipitation_kind is PrecipitationKind.NONE:
        # Repair an inherited (auto) intensity; an intensity sent in this
        # very update is a contradiction the caller must see as a 422.
        if updates.get("precipitation_intensity") is None:
            out.precipitation_intensity = None

    for category in CATEGORIES:
        if category == "precipitation":
            if touched_precipitation:
                source = (
                    Provenance.HUMAN if out.category_is_set("precipitation") else Provenance.UNSET
                )
                out.provenance = out.provenance.with_value("precipitation", source)
        elif category in updates:
            source = Provenance.HUMAN if updates[category] is not None else Provenance.UNSET
            out.provenance = out.provenance.with_value(category, source)
    return out


def annotation_to_json(annotation: FrameAnnotation) -> dict:
    return json.loads(serialize(annotation))


def _check_store_writable(path: Path) -> None:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "a", encoding="utf-8"):
            pass
    except OSError as exc:
        raise RuntimeError(f"store path {path} is not writable: {exc}") from exc


def create_app(config: ServiceConfig) -> FastAPI:
    manifest: DatasetManifest = load_manifest(config.manifest_path, config.dataset_root)
    if not config.read_only:
        _check_store_writable(Path(config.store_path))
    store = AnnotationStore(config.store_path)
    app = FastAPI(title="envlabel annotation service")
    update_lock = threading.Lock()
    suggestion_cache: dict[str, tuple[float, dict | None]] = {}

    def frame_status(annotation: FrameAnnotation | None) -> str:
        if annotation is None:
            return "unlabeled"
        return "complete" if annotation.is_final() else "draft"

    def auto_suggestion_for(frame_id: str) -> dict | None:
        entry = manifest.entry(frame_id)
        if entry is None:
            return None
        cloud_file = manifest.cloud_file(entry)
        try:
            mtime = cloud_file.stat().st_mtime
        except OSError:
            return None
        cached = suggestion_cache.get(frame_id)
        if cached is not None and cached[0] == mtime:
            return cached[1]
        try:
            cloud = load_point_cloud_file(cloud_file, frame_id)
            suggestion = suggest_precipitation(cloud, config.lidar)
            payload = {
                "intensity": suggestion.intensity.value,
                "clutter_fraction": suggestion.clutter_fraction,
                "diagnostics": list(suggestion.diagnostics),
            }
        except (PointCloudFormatError, OSError):
            payload = None
        suggestion_cache[frame_id] = (mtime, payload)
        return payload

    @app.get("/healthz")
    def healthz() -> dict:
        return {"status": "ok"}

    @app.get("/api/frames")
    def list_frames(offset: int = 0, limit: int = 50) -> dict:
        offset = max(offset, 0)
        limit = max(min(limit, 500), 0)
        current = store.load() if store.exists() else {}
        window = manifest.entries[offset : offset + limit]
        frames = [
            {
                "frame_id": e.frame_id,
                "image_url": f"/images/{e.image_path}",
                "status": frame_status(current.get(e.frame_id)),
            }
            for e in window
        ]
        return {"total": len(manifest), "offset": offset, "limit": limit, "frames": frames}

    @app.get("/api/frames/{frame_id}")
    def get_frame(frame_id: str) -> JSONResponse:
        entry = manifest.entry(frame_id)
        if entry is None:
            return JSONResponse({"error": f"unknown frame {frame_id!r}"}, status_code=404)
        current = store.load() if store.exists() else {}
        annotation = current.get(frame_id)
        return JSONResponse(
            {
                "frame_id": frame_id,
                "image_url": f"/images/{entry.image_path}",
                "annotation": annotation_to_json(annotation) if annotation else None,
                "auto_suggestion": auto_suggestion_for(frame_id),
                "status": frame_status(annotation),
            }
        )

    @app.put("/api/frames/{frame_id}/annotation")
    async def put_annotation(frame_id: str, request: Request) -> JSONResponse:
        if config.read_only:
            return JSONResponse({"error": "service is read-only"}, status_code=403)
        if manifest.entry(frame_id) is None:
            return JSONResponse({"error": f"unknown frame {frame_id!r}"}, status_code=404)
        try:
            payload = await request.json()
        except json.JSONDecodeError as exc:
            return JSONResponse({"error": f"body is not valid JSON: {exc}"}, status_code=400)
        try:
            updates = _parse_update(payload, frame_id)
        except _FieldError as exc:
            return JSONResponse({"error": str(exc)}, status_code=400)

        with update_lock:
            existing = store.load().get(frame_id) if store.exists() else None
            merged = apply_human_update(existing, frame_id, updates)
            violations = validate(merged, Mode.DRAFT)
            if violations:
                return JSONResponse(
                    {
                        "error": "annotation violates the label hierarchy",
                        "violations": [
                            {"category": v.category, "message": v.message} for v in violations
                        ],
                    },
                    status_code=422,
                )
            store.append(merged)
        return JSONResponse(annotation_to_json(merged))

    @app.get("/api/stats")
    def get_stats() -> dict:
        return stats(store).to_dict()

    @app.get("/api/export")
    def export() -> PlainTextResponse:
        current = store.load() if store.exists() else {}
        lines = [serialize(current[fid]) for fid in sorted(current)]
        return PlainTextResponse("\n".join(lines) + ("\n" if lines else ""))

    @app.get("/images/{image_path:path}")
    def image(image_path: str) -> Response:
        root = (config.dataset_root or Path(config.manifest_path).parent).resolve()
        target = (root / image_path).resolve()
        if not target.is_relative_to(root):
            return JSONResponse({"error": "path escapes the dataset root"}, status_code=400)
        if not target.is_file():
            return JSONResponse({"error": "no such image"}, status_code=404)
        return FileResponse(target)

    if config.ui_dir is not None and Path(config.ui_dir).is_dir():
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=config.ui_dir, html=True), name="ui")

    return app


def run_server(config: ServiceConfig) -> None:
    import uvicorn

    uvicorn.run(create_app(config), host=config.host, port=config.port, log_level="info")
