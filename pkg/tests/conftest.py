"""Shared strategies and independent oracles for the test suite.

The oracles here deliberately re-derive results by the most direct method
available (full pairwise scans, explicit threshold enumeration, central
finite differences) and never call into the code paths they check.
"""

from __future__ import annotations

import math
from datetime import datetime, timezone

import numpy as np
from hypothesis import strategies as st

from envlabel.labels import (
    Daytime,
    Fog,
    FrameAnnotation,
    Infrastructure,
    Intensity,
    PrecipitationKind,
    Provenance,
    ProvenanceMap,
    SurfaceCondition,
)
from envlabel.pointcloud import LidarSpec


# ---------------------------------------------------------------------------
# annotation strategies


_frame_ids = st.text(
    alphabet=st.characters(whitelist_categories=("Lu", "Ll", "Nd"), whitelist_characters="_-."),
    min_size=1,
    max_size=16,
)

_timestamps = st.datetimes(
    min_value=datetime(2000, 1, 1),
    max_value=datetime(2099, 12, 31),
    timezones=st.just(timezone.utc),
)

_fractions = st.floats(min_value=0.0, max_value=1.0, allow_nan=False)


@st.composite
def valid_annotations(draw, final_only: bool = False) -> FrameAnnotation:
    """Draft-valid annotations; with final_only=True, Final-valid ones."""
    provenance = {}
    values: dict = {}

    def pick_source(category: str) -> Provenance:
        if final_only:
            return draw(st.sampled_from([Provenance.AUTO, Provenance.HUMAN]))
        return draw(st.sampled_from(list(Provenance)))

    for category, enum_cls in (
        ("daytime", Daytime),
        ("fog", Fog),
        ("road", SurfaceCondition),
        ("roadside", SurfaceCondition),
        ("infrastructure", Infrastructure),
    ):
        source = pick_source(category)
        provenance[category] = source
        values[category] = (
            draw(st.sampled_from(list(enum_cls))) if source is not Provenance.UNSET else None
        )

    source = pick_source("precipitation")
    provenance["precipitation"] = source
    kind = None
    intensity = None
    if source is not Provenance.UNSET:
        if final_only:
            kind = draw(st.sampled_from(list(PrecipitationKind)))
            if kind is not PrecipitationKind.NONE:
                intensity = draw(st.sampled_from(list(Intensity)))
        else:
            shape = draw(st.sampled_from(["kind_none", "complete", "kind_only", "intensity_only"]))
            if shape == "kind_none":
                kind = PrecipitationKind.NONE
            elif shape == "complete":
                kind = draw(st.sampled_from([PrecipitationKind.RAIN, PrecipitationKind.SNOW]))
                intensity = draw(st.sampled_from(list(Intensity)))
            elif shape == "kind_only":
                kind = draw(st.sampled_from([PrecipitationKind.RAIN, PrecipitationKind.SNOW]))
            else:
                intensity = draw(st.sampled_from(list(Intensity)))

    clutter_fraction = draw(st.none() | _fractions)
    if provenance["precipitation"] is Provenance.AUTO:
        clutter_fraction = draw(_fractions)

    return FrameAnnotation(
        frame_id=draw(_frame_ids),
        daytime=values["daytime"],
        precipitation_kind=kind,
        precipitation_intensity=intensity,
        fog=values["fog"],
        road=values["road"],
        roadside=values["roadside"],
        infrastructure=values["infrastructure"],
        provenance=ProvenanceMap(**provenance),
        clutter_fraction=clutter_fraction,
        updated_at=draw(_timestamps),
    )


# ---------------------------------------------------------------------------
# pointcloud oracles


def naive_clutter_flags(xyz: np.ndarray, spec: LidarSpec) -> np.ndarray:
    """All-pairs O(n^2) clutter flags: the reference the index must match.

    Full pairwise distance matrix, no spatial structure, no early exit.
    """
    xyz = np.asarray(xyz, dtype=np.float64).reshape(-1, 3)
    n = len(xyz)
    if n == 0:
        return np.zeros(0, dtype=bool)
    r_p = np.sqrt((xyz**2).sum(axis=1))
    r_s = np.maximum(spec.min_radius, spec.alpha * spec.beta * np.pi * r_p / 180.0)
    flags = np.empty(n, dtype=bool)
    for i in range(n):
        d2 = ((xyz - xyz[i]) ** 2).sum(axis=1)
        within = d2 <= r_s[i] * r_s[i]
        flags[i] = (int(within.sum()) - 1) < spec.min_neighbors
    return flags


def pure_python_clutter_flags(points: list[tuple[float, float, float]], spec: LidarSpec) -> list[bool]:
    """Pure-Python double loop; cross-checks the numpy oracle on tiny clouds."""
    flags = []
    for i, (xi, yi, zi) in enumerate(points):
        r_p = math.sqrt(xi * xi + yi * yi + zi * zi)
        r_s = max(spec.min_radius, spec.alpha * spec.beta * math.pi * r_p / 180.0)
        count = 0
        for j, (xj, yj, zj) in enumerate(points):
            if i == j:
                continue
            d2 = (xi - xj) ** 2 + (yi - yj) ** 2 + (zi - zj) ** 2
            if d2 <= r_s * r_s:
                count += 1
        flags.append(count < spec.min_neighbors)
    return flags


def random_cloud(rng: np.random.Generator, n: int, box: float = 50.0) -> np.ndarray:
    return rng.uniform(-box / 2.0, box / 2.0, size=(n, 3))


# ---------------------------------------------------------------------------
# metrics oracle


def brute_force_auprc(labels: list[bool], scores: list[float]) -> float | None:
    """Enumerate precision/recall at every distinct threshold, integrate steps."""
    n_pos = sum(labels)
    if n_pos == 0:
        return None
    area = 0.0
    prev_recall = 0.0
    for threshold in sorted(set(scores), reverse=True):
        selected = [i for i in range(len(scores)) if scores[i] >= threshold]
        tp = sum(1 for i in selected if labels[i])
        precision = tp / len(selected)
        recall = tp / n_pos
        area += (recall - prev_recall) * precision
        prev_recall = recall
    return area


# ---------------------------------------------------------------------------
# gradient oracle


def finite_difference_gradients(loss_fn, arrays: list[np.ndarray], h: float = 1e-5) -> list[np.ndarray]:
    """Central differences of ``loss_fn()`` w.r.t. every entry of ``arrays``.

    The arrays are mutated in place while probing and restored afterwards.
    """
    grads = []
    for array in arrays:
        grad = np.zeros_like(array)
        flat = array.reshape(-1)
        grad_flat = grad.reshape(-1)
        for k in range(flat.size):
            original = flat[k]
            flat[k] = original + h
            up = loss_fn()
            flat[k] = original - h
            down = loss_fn()
            flat[k] = original
            grad_flat[k] = (up - down) / (2.0 * h)
        grads.append(grad)
    return grads
