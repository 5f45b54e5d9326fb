# Copyright (c) 2026 Pointmatic
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Hourly profiles and their reduction to weighted load-wind scenarios."""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np
import pandas as pd
from scipy.spatial.distance import cdist
from sklearn.cluster import kmeans_plusplus

from tepps._exceptions import ProfileError, ScenarioReductionError
from tepps._model import Scenario

if TYPE_CHECKING:
    from collections.abc import Sequence
    from typing import TextIO

    from numpy.typing import NDArray

_log = logging.getLogger("tepps")

MAX_KMEANS_ITERATIONS = 300

# Ten operating points of the 24-bus study: (load level, wind capacity factor, hours).
REFERENCE_SCENARIO_TABLE: tuple[tuple[float, float, float], ...] = (
    (0.8307, 0.4287, 355),
    (0.5456, 0.7280, 742),
    (0.5220, 0.0946, 1323),
    (0.6999, 0.7739, 553),
    (0.7301, 0.1523, 927),
    (0.5224, 0.5454, 780),
    (0.6496, 0.3616, 1057),
    (0.4999, 0.3577, 900),
    (0.5556, 0.2185, 1328),
    (0.6713, 0.5659, 795),
)


class ProfileKind(enum.Enum):
    LOAD = "load"
    CAPACITY_FACTOR = "cf"


@dataclass(frozen=True, eq=False)
class HourlySeries:
    """Per-hour dimensionless levels: peak-normalised load or a capacity factor."""

    values: NDArray[np.float64]
    kind: ProfileKind = ProfileKind.LOAD

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", values)
        if values.ndim != 1 or values.size == 0:
            raise ValueError(f"values must be a non-empty 1-D series, got shape {values.shape}")
        if not np.all(np.isfinite(values)):
            raise ValueError("values must be finite")
        if self.kind is ProfileKind.CAPACITY_FACTOR and (values.min() < 0 or values.max() > 1):
            raise ValueError("capacity factors must be in [0, 1]")

    @property
    def hours(self) -> int:
        return int(self.values.size)


def ingest_profile(
    stream: str | TextIO,
    column: str = "value",
    kind: ProfileKind = ProfileKind.LOAD,
) -> HourlySeries:
    """Read one hourly column from a CSV profile.

    Load profiles are divided by their maximum.

    Raises:
        ProfileError: the file is empty, the column is missing, a cell is not
            numeric, or the values are out of range.
    """
    try:
        frame = pd.read_csv(stream)
    except pd.errors.EmptyDataError:
        raise ProfileError("profile CSV is empty") from None
    except pd.errors.ParserError as exc:
        raise ProfileError(f"profile CSV is malformed: {exc}") from exc
    frame.columns = [str(name).strip() for name in frame.columns]
    if column not in frame.columns:
        raise ProfileError(f"profile CSV has no column {column!r}")
    if frame.empty:
        raise ProfileError("profile CSV has no rows")

    raw = frame[column]
    values = pd.to_numeric(raw, errors="coerce")
    bad = values.isna()
    if bad.any():
        row = int(bad.to_numpy().argmax())
        raise ProfileError(
            f"non-numeric value {raw.iloc[row]!r} in column {column!r} at data row {row + 1}"
        )
    array = values.to_numpy(dtype=float)

    if kind is ProfileKind.LOAD:
        peak = array.max()
        if peak <= 0:
            raise ProfileError("load profile must have a positive maximum")
        array = array / peak
    elif array.min() < 0 or array.max() > 1:
        raise ProfileError(f"capacity factors in column {column!r} must lie in [0, 1]")
    _log.debug("Ingested %d hours from column %s", array.size, column)
    return HourlySeries(values=array, kind=kind)


def _wcss(
    points: NDArray[np.float64], labels: NDArray[np.intp], centers: NDArray[np.float64]
) -> float:
    return float(((points - centers[labels]) ** 2).sum())


def _assign(points: NDArray[np.float64], centers: NDArray[np.float64]) -> NDArray[np.intp]:
    # argmin keeps the lowest cluster index on ties.
    return np.argmin(cdist(points, centers, "sqeuclidean"), axis=1)


def _update(
    points: NDArray[np.float64], labels: NDArray[np.intp], k: int
) -> tuple[NDArray[np.intp], NDArray[np.float64]]:
    """Recompute centroids, moving far points into empty clusters first."""
    labels = labels.copy()
    while True:
        counts = np.bincount(labels, minlength=k)
        empty = np.flatnonzero(counts == 0)
        centers = np.zeros((k, points.shape[1]))
        np.add.at(centers, labels, points)
        occupied = counts > 0
        centers[occupied] /= counts[occupied, None]
        if empty.size == 0:
            return labels, centers
        distance = ((points - centers[labels]) ** 2).sum(axis=1)
        # Only take points from clusters that keep at least one member.
        distance[counts[labels] <= 1] = -1.0
        labels[int(np.argmax(distance))] = int(empty[0])


def kmeans_reduce(
    load: HourlySeries, wind: HourlySeries, k: int, seed: int = 0
) -> tuple[Scenario, ...]:
    """Cluster joint (load level, capacity factor) hours into ``k`` scenarios.

    Centroids are seeded with k-means++ from ``seed``; Lloyd iterations stop
    when no assignment changes or after :data:`MAX_KMEANS_ITERATIONS`.
    Scenarios are returned in cluster order with 1-based indices and
    ``hours`` equal to the cluster sizes.

    Raises:
        ScenarioReductionError: series lengths differ or ``k`` is out of range.
    """
    if load.hours != wind.hours:
        raise ScenarioReductionError(
            f"load has {load.hours} hours but wind has {wind.hours}"
        )
    if k < 1 or k > load.hours:
        raise ScenarioReductionError(f"k must be in [1, {load.hours}], got {k}")
    points = np.column_stack([load.values, wind.values])
    distinct = np.unique(points, axis=0).shape[0]
    if k > distinct:
        raise ScenarioReductionError(f"k={k} exceeds the {distinct} distinct operating points")

    centers, _ = kmeans_plusplus(points, n_clusters=k, random_state=seed)
    labels = _assign(points, centers)
    labels, centers = _update(points, labels, k)
    wcss = _wcss(points, labels, centers)
    iteration = 0
    for iteration in range(1, MAX_KMEANS_ITERATIONS + 1):
        new_labels = _assign(points, centers)
        if np.array_equal(new_labels, labels):
            break
        new_labels, centers = _update(points, new_labels, k)
        new_wcss = _wcss(points, new_labels, centers)
        if new_wcss > wcss + 1e-9 * (1.0 + wcss):
            raise ScenarioReductionError(
                f"k-means objective increased at iteration {iteration}: {wcss} -> {new_wcss}"
            )
        labels, wcss = new_labels, new_wcss
    _log.info("k-means: %d clusters after %d iteration(s), WCSS %.6g", k, iteration, wcss)

    counts = np.bincount(labels, minlength=k)
    return tuple(
        Scenario(
            index=i + 1,
            load_level=float(centers[i, 0]),
            wind_cf=(float(centers[i, 1]),),
            hours=float(counts[i]),
        )
        for i in range(k)
    )


def scenarios_from_table(rows: Sequence[tuple[float, float, float]]) -> tuple[Scenario, ...]:
    """Scenarios exactly as listed, bypassing reduction.

    Raises:
        ScenarioReductionError: a row has non-positive hours.
    """
    scenarios = []
    for i, (load_level, cf, hours) in enumerate(rows, start=1):
        if hours <= 0:
            raise ScenarioReductionError(f"scenario {i} must have hours > 0, got {hours}")
        scenarios.append(
            Scenario(
                index=i, load_level=float(load_level), wind_cf=(float(cf),), hours=float(hours)
            )
        )
    return tuple(scenarios)
