"""Semi-automated environment-condition labeling toolkit.

Modules:
    labels      six-category taxonomy, annotation records, line format
    store       append-only annotation store, last-write-wins per frame
    pointcloud  binary cloud loading and range-adaptive clutter filtering
    synthetic   scenes with known ground-truth clutter, dataset fixtures
    autolabel   suggestion + human-merge pipeline, batch runs, statistics
    metrics     accuracy / precision / recall / F1 / AUPRC per category
    focal       multi-class focal loss and its gradient
    trainer     shared-trunk six-head toy classifier, mini-batch descent
    service     HTTP annotation API backing the review UI
    cli         command-line entry points
"""

from .labels import (
    CATEGORIES,
    CATEGORY_CLASSES,
    Daytime,
    EnvironmentLabel,
    Fog,
    FrameAnnotation,
    Infrastructure,
    Intensity,
    Mode,
    Precipitation,
    PrecipitationKind,
    Provenance,
    ProvenanceMap,
    SurfaceCondition,
    Violation,
    deserialize,
    serialize,
    validate,
)
from .pointcloud import (
    ClutterResult,
    LidarSpec,
    Point3,
    PointCloud,
    classify_clutter,
    count_neighbors,
    load_point_cloud,
    precipitation_intensity,
    remove_clutter,
    search_radius,
)
from .store import AnnotationStore

__version__ = "0.1.0"

__all__ = [
    "AnnotationStore",
    "CATEGORIES",
    "CATEGORY_CLASSES",
    "ClutterResult",
    "Daytime",
    "EnvironmentLabel",
    "Fog",
    "FrameAnnotation",
    "Infrastructure",
    "Intensity",
    "LidarSpec",
    "Mode",
    "Point3",
    "PointCloud",
    "Precipitation",
    "PrecipitationKind",
    "Provenance",
    "ProvenanceMap",
    "SurfaceCondition",
    "Violation",
    "classify_clutter",
    "count_neighbors",
    "deserialize",
    "load_point_cloud",
    "precipitation_intensity",
    "remove_clutter",
    "search_radius",
    "serialize",
    "validate",
    "__version__",
]
