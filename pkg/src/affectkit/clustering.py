"""Seeded k-means over EPA space and the elbow diagnostic.

Used to partition each lexical category into affective regions so that
splits and synthetic event sampling cover the whole sentiment space rather
than one dense corner of it.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .epa import SentimentLexicon
from .errors import ConfigurationError

MAX_ITERATIONS = 300
SHIFT_TOLERANCE = 1e-9

DEFAULT_CLUSTERS = 5


@dataclass
class ClusterModel:
    """K-means result for one category's entries."""

    k: int
    centroids: np.ndarray
    labels: np.ndarray
    inertia: float
    assignment: dict[tuple[str, str], int] = field(default_factory=dict)

    def cluster_of(self, term: str, category: str) -> int:
        return self.assignment[(term, category)]

    def members(self, cluster_id: int) -> list[tuple[str, str]]:
        return sorted(key for key, cid in self.assignment.items() if cid == cluster_id)


def _kmeans_plus_plus_init(points: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = len(points)
    centroids = np.empty((k, points.shape[1]))
    centroids[0] = points[rng.integers(n)]
    closest = ((points - centroids[0]) ** 2).sum(axis=1)
    for i in range(1, k):
        total = closest.sum()
        if total <= 0.0:
            # All remaining mass sits on existing centroids; duplicate one.
            centroids[i:] = centroids[0]
            break
        probs = closest / total
        centroids[i] = points[rng.choice(n, p=probs)]
        closest = np.minimum(closest, ((points - centroids[i]) ** 2).sum(axis=1))
    return centroids


def kmeans(points, k: int, seed: int) -> tuple[np.ndarray, np.ndarray, float]:
    """Lloyd's algorithm with k-means++ style initialization.

    Returns (centroids, labels, inertia); deterministic under the seed.
    """
    points = np.asarray(points, dtype=float)
    if points.ndim != 2:
        raise ConfigurationError("kmeans expects a 2-d point array")
    n = len(points)
    if k < 1:
        raise ConfigurationError(f"cluster count must be >= 1, got {k}")
    if k > n:
        raise ConfigurationError(f"cluster count {k} exceeds {n} points")

    rng = np.random.default_rng(seed)
    centroids = _kmeans_plus_plus_init(points, k, rng)
    labels = np.zeros(n, dtype=int)
    for _ in range(MAX_ITERATIONS):
        distances = ((points[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
        labels = distances.argmin(axis=1)
        new_centroids = centroids.copy()
        for cluster in range(k):
            mask = labels == cluster
            if mask.any():
                new_centroids[cluster] = points[mask].mean(axis=0)
            else:
                # Re-seat an empty cluster on the point farthest from its
                # assigned centroid (deterministic repair).
                worst = distances[np.arange(n), labels].argmax()
                new_centroids[cluster] = points[worst]
        shift = np.sqrt(((new_centroids - centroids) ** 2).sum(axis=1)).max()
        centroids = new_centroids
        if shift < SHIFT_TOLERANCE:
            break
    distances = ((points[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
    labels = distances.argmin(axis=1)
    inertia = float(distances[np.arange(n), labels].sum())
    return centroids, labels, inertia


def cluster_category(
    lexicon: SentimentLexicon, category: str, k: int = DEFAULT_CLUSTERS, seed: int = 0
) -> ClusterModel:
    """Cluster one category's fundamental sentiments."""
    entries = lexicon.entries(category)
    if not entries:
        raise ConfigurationError(f"lexicon has no {category} entries to cluster")
    points = np.array([entry.epa.as_array() for entry in entries])
    centroids, labels, inertia = kmeans(points, k, seed)
    assignment = {entry.key: int(label) for entry, label in zip(entries, labels)}
    return ClusterModel(k=k, centroids=centroids, labels=labels, inertia=inertia, assignment=assignment)


def cluster_lexicon(
    lexicon: SentimentLexicon, k: int = DEFAULT_CLUSTERS, seed: int = 0
) -> dict[str, ClusterModel]:
    """Cluster every category present in the lexicon with per-category seeds."""
    models = {}
    for offset, category in enumerate(("identity", "behavior", "modifier")):
        if lexicon.entries(category):
            models[category] = cluster_category(lexicon, category, k=k, seed=seed + offset)
    return models


@dataclass
class ElbowDiagnostic:
    """Inertia curve over k together with the knee suggestion."""

    k_values: list[int]
    inertias: list[float]
    suggested_k: int


def elbow_diagnostic(points, k_max: int, seed: int = 0) -> ElbowDiagnostic:
    """Inertia for k = 1..k_max with the knee at the largest second difference.

    The pipeline default cluster count is DEFAULT_CLUSTERS regardless; this
    is a report for choosing overrides.
    """
    if k_max < 2:
        raise ConfigurationError(f"k_max must be >= 2, got {k_max}")
    points = np.asarray(points, dtype=float)
    k_values = list(range(1, min(k_max, len(points)) + 1))
    inertias = [kmeans(points, k, seed)[2] for k in k_values]
    if len(inertias) < 3:
        suggested = k_values[-1]
    else:
        second_diff = [
            inertias[i - 1] - 2.0 * inertias[i] + inertias[i + 1]
            for i in range(1, len(inertias) - 1)
        ]
        suggested = k_values[1 + int(np.argmax(second_diff))]
    return ElbowDiagnostic(k_values=k_values, inertias=inertias, suggested_k=suggested)
