"""Estimating sentiments for concepts missing from the lexicon.

A concept is pinned into its role slot (identities act, modifiers take the
first modifier slot, behaviors the behavior slot) across many generated
events; the head model predicts each event's 15-dim profile and the pinned
slot's three dimensions are aggregated into a distribution whose mean is
the point estimate.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Mapping, Sequence

import numpy as np

from .corpus import CorpusRecord, MabmoEvent, MabmoSampler
from .epa import EpaVector, LexiconEntry, SentimentLexicon
from .errors import ConflictError, DependencyError, InvalidInputError
from .head import HeadModel, forward

# Slot positions of each category's pinned role in the 15-dim output,
# following the modifier/actor/behavior/modifier/object slot order.
ROLE_SLICES = {
    "modifier": slice(0, 3),
    "identity": slice(3, 6),
    "behavior": slice(6, 9),
}
OBJECT_SLICE = slice(12, 15)

DEFAULT_EVENTS_PER_CONCEPT = 300

EXPANDED_COLUMNS = (
    "term",
    "category",
    "E",
    "P",
    "A",
    "n_events",
    "sd_E",
    "sd_P",
    "sd_A",
    "model_id",
)

EmbeddingProvider = Callable[[Sequence[MabmoEvent]], np.ndarray]


class PrecomputedEmbeddings:
    """Embedding provider backed by an id-keyed vector store.

    Missing events raise a dependency error that names their sentences so
    the caller knows exactly what still needs embedding.
    """

    def __init__(self, dim: int, vectors: Mapping[int | str, np.ndarray]):
        self.dim = dim
        self.vectors = dict(vectors)

    def __call__(self, events: Sequence[MabmoEvent], ids: Sequence[int | str] | None = None) -> np.ndarray:
        if ids is None:
            ids = range(len(events))
        missing = [event.sentence for event_id, event in zip(ids, events) if event_id not in self.vectors]
        if missing:
            shown = "; ".join(repr(s) for s in missing[:5])
            more = f" (and {len(missing) - 5} more)" if len(missing) > 5 else ""
            raise DependencyError(f"no embeddings for {len(missing)} sentences: {shown}{more}")
        return np.array([self.vectors[event_id] for event_id in ids])


@dataclass
class EstimateDistribution:
    """Per-dimension samples and summaries for one estimated concept."""

    term: str
    category: str
    samples: np.ndarray  # (n, 3)
    model_id: str = ""

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=float)
        if self.samples.ndim != 2 or self.samples.shape[1] != 3 or len(self.samples) < 1:
            raise InvalidInputError(
                f"estimate distribution needs an (n, 3) sample array with n >= 1, "
                f"got {self.samples.shape}"
            )

    @property
    def n_events(self) -> int:
        return len(self.samples)

    @property
    def mean(self) -> np.ndarray:
        return self.samples.mean(axis=0)

    @property
    def sd(self) -> np.ndarray:
        return self.samples.std(axis=0)

    @property
    def minimum(self) -> np.ndarray:
        return self.samples.min(axis=0)

    @property
    def maximum(self) -> np.ndarray:
        return self.samples.max(axis=0)

    def trimmed_mean(self, trim: float) -> np.ndarray:
        """Mean after dropping a fraction of extremes per dimension (0 = plain mean)."""
        n = len(self.samples)
        drop = int(n * trim)
        if drop == 0:
            return self.mean
        ordered = np.sort(self.samples, axis=0)
        return ordered[drop : n - drop].mean(axis=0)

    def summary_rows(self) -> list[tuple[str, float, float, float]]:
        return [
            ("Mean", *self.mean),
            ("Standard deviation", *self.sd),
            ("Minimum", *self.minimum),
            ("Maximum", *self.maximum),
        ]


def aggregate(samples, term: str = "", category: str = "identity") -> EstimateDistribution:
    """Wrap raw per-event estimates into a distribution."""
    samples = np.asarray(samples, dtype=float)
    if samples.size == 0:
        raise InvalidInputError("aggregate needs at least one sample")
    return EstimateDistribution(term=term, category=category, samples=samples)


def pin_and_estimate(
    term: str,
    category: str,
    sampler: MabmoSampler,
    model: HeadModel,
    provider: EmbeddingProvider,
    n_events: int = DEFAULT_EVENTS_PER_CONCEPT,
    seed: int = 0,
    object_slot: bool = False,
) -> EstimateDistribution:
    """Estimate one concept by pinning it into generated events.

    object_slot estimates an identity from the object position instead of
    the actor position (off by default; actor-slot estimation is the
    documented behavior).
    """
    events = sampler.sample_pinned(term, category, n_events, seed=seed)
    embeddings = provider(events)
    predictions = np.atleast_2d(forward(model, embeddings))
    role = OBJECT_SLICE if (object_slot and category == "identity") else ROLE_SLICES[category]
    samples = predictions[:, role]
    return EstimateDistribution(
        term=term, category=category, samples=samples, model_id=model.model_id()
    )


def estimate_from_predictions(
    term: str,
    category: str,
    records: Sequence[CorpusRecord],
    predictions: Mapping[int | str, np.ndarray],
    model_id: str = "",
) -> EstimateDistribution:
    """Aggregate a concept from its role-slot co-occurrences in a corpus.

    Uses events where the concept already occupies its role slot (actor for
    identities, first modifier for modifiers, behavior for behaviors) and
    the per-event 15-dim predictions keyed by record id.
    """
    slot_index = {"modifier": 0, "identity": 1, "behavior": 2}[category]
    samples = []
    for record in records:
        if record.slots[slot_index][0] != term:
            continue
        if record.id not in predictions:
            raise DependencyError(f"no prediction for corpus id {record.id}")
        vector = np.asarray(predictions[record.id], dtype=float)
        samples.append(vector[ROLE_SLICES[category]])
    if not samples:
        raise InvalidInputError(
            f"no events with {term!r} in the {category} role slot"
        )
    return EstimateDistribution(
        term=term, category=category, samples=np.array(samples), model_id=model_id
    )


def emit_entries(
    distributions: Sequence[EstimateDistribution],
    target: SentimentLexicon | None = None,
    clamp: bool = False,
    overwrite: bool = False,
) -> SentimentLexicon:
    """Turn distributions into a lexicon delta of point estimates.

    Raises on conflict with the target lexicon unless overwrite is set;
    clamp clips means into the lexicon range instead of failing on
    out-of-range estimates.
    """
    if not distributions:
        raise InvalidInputError("no distributions to emit")
    delta = SentimentLexicon(name="expanded")
    for dist in distributions:
        if target is not None and (dist.term, dist.category) in target and not overwrite:
            raise ConflictError(
                f"{dist.term!r} ({dist.category}) already exists in the target lexicon"
            )
        epa = EpaVector.from_array(dist.mean)
        if clamp:
            epa = epa.clamped()
        note = f"estimated from {dist.n_events} events; model {dist.model_id or 'unknown'}"
        delta.add(LexiconEntry(dist.term, dist.category, epa, note=note))
    return delta


def write_expanded_csv(
    distributions: Sequence[EstimateDistribution],
    path: str | Path,
    clamp: bool = False,
) -> None:
    """Expanded-lexicon CSV: core columns plus spread and provenance."""
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(EXPANDED_COLUMNS)
        for dist in sorted(distributions, key=lambda d: (d.term, d.category)):
            epa = EpaVector.from_array(dist.mean)
            if clamp:
                epa = epa.clamped()
            sd = dist.sd
            writer.writerow(
                [
                    dist.term,
                    dist.category,
                    repr(epa.e),
                    repr(epa.p),
                    repr(epa.a),
                    dist.n_events,
                    repr(float(sd[0])),
                    repr(float(sd[1])),
                    repr(float(sd[2])),
                    dist.model_id or "unknown",
                ]
            )
