"""Synthetic MABMO corpus generation.

The pipeline clusters each lexical category, splits the lexicon by cluster
strata, codes every actor-behavior-object combination by the 9-bit sign
pattern of impression minus fundamental, and then samples five-slot
modifier/actor/behavior/modifier/object events stratified over those codes
and over modifier clusters.  Every stage is deterministic under its seed.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .clustering import ClusterModel, DEFAULT_CLUSTERS, cluster_lexicon
from .epa import EpaVector, LexiconEntry, SentimentLexicon
from .equations import CoefficientSet, EventProfile, impression_batch
from .errors import ConfigurationError

SPLIT_NAMES = ("train", "test", "validation")

CODE_BITS = 9
CODE_WEIGHTS = np.array([1 << (CODE_BITS - 1 - i) for i in range(CODE_BITS)])

DEFAULT_ENUMERATION_BUDGET = 10_000_000


@dataclass(frozen=True)
class SplitSpec:
    """Train/test/validation fractions plus the split seed."""

    train: float = 0.80
    test: float = 0.08
    validation: float = 0.12
    seed: int = 0

    def __post_init__(self):
        fractions = (self.train, self.test, self.validation)
        for name, f in zip(SPLIT_NAMES, fractions):
            if not 0.0 < f < 1.0:
                raise ConfigurationError(
                    f"{name} fraction must lie strictly in (0, 1), got {f}"
                )
        if abs(sum(fractions) - 1.0) > 1e-9:
            raise ConfigurationError(
                f"split fractions must sum to 1, got {sum(fractions)!r}"
            )

    @property
    def fractions(self) -> tuple[float, float, float]:
        return (self.train, self.test, self.validation)


def allocate_counts(n: int, fractions: Sequence[float]) -> list[int]:
    """Largest-remainder apportionment: each count within 1 of n*fraction."""
    quotas = [n * f for f in fractions]
    counts = [math.floor(q) for q in quotas]
    order = sorted(
        range(len(fractions)), key=lambda i: (-(quotas[i] - counts[i]), i)
    )
    for i in order[: n - sum(counts)]:
        counts[i] += 1
    return counts


@dataclass
class LexiconSplits:
    train: SentimentLexicon
    test: SentimentLexicon
    validation: SentimentLexicon

    def __getitem__(self, name: str) -> SentimentLexicon:
        if name not in SPLIT_NAMES:
            raise KeyError(name)
        return getattr(self, name)

    def items(self):
        return [(name, getattr(self, name)) for name in SPLIT_NAMES]


def stratified_split(
    lexicon: SentimentLexicon,
    clusters: dict[str, ClusterModel],
    spec: SplitSpec,
) -> LexiconSplits:
    """Partition a lexicon by (category, cluster) strata.

    Strata are processed in sorted order and shuffled with one seeded
    generator, so membership is reproducible.  Every entry must carry a
    cluster assignment.
    """
    strata: dict[tuple[str, int], list[LexiconEntry]] = {}
    for entry in lexicon:
        model = clusters.get(entry.category)
        if model is None or entry.key not in model.assignment:
            raise ConfigurationError(
                f"no cluster assignment for {entry.term!r} ({entry.category})"
            )
        strata.setdefault((entry.category, model.assignment[entry.key]), []).append(entry)

    rng = np.random.default_rng(spec.seed)
    buckets: dict[str, list[LexiconEntry]] = {name: [] for name in SPLIT_NAMES}
    for key in sorted(strata):
        members = strata[key]
        members = [members[i] for i in rng.permutation(len(members))]
        counts = allocate_counts(len(members), spec.fractions)
        start = 0
        for name, count in zip(SPLIT_NAMES, counts):
            buckets[name].extend(members[start : start + count])
            start += count

    return LexiconSplits(
        *(
            SentimentLexicon.from_entries(buckets[name], name=f"{lexicon.name}:{name}")
            for name in SPLIT_NAMES
        )
    )


def abo_code(profile: EventProfile, coeffs: CoefficientSet) -> int:
    """9-bit sign pattern of impression vs fundamental, Ae first (MSB).

    A dimension whose transient exceeds its fundamental sets its bit; exact
    ties count as a decrease.
    """
    fundamentals = profile.flatten()
    transients = impression_batch(fundamentals[None, :], coeffs)[0]
    return int((transients > fundamentals) @ CODE_WEIGHTS)


@dataclass
class CodeHistogram:
    """Histogram of event-type codes over a lexicon's ABO combinations."""

    counts: dict[int, int]
    total: int
    exhaustive: bool
    codes: np.ndarray | None = None

    @property
    def distinct(self) -> int:
        return len(self.counts)


def _combo_profiles(identities: np.ndarray, behaviors: np.ndarray, flat: np.ndarray) -> np.ndarray:
    """Decode flat combo indices into (n, 9) ABO profiles."""
    n_i, n_b = len(identities), len(behaviors)
    actor = flat // (n_b * n_i)
    behavior = (flat // n_i) % n_b
    obj = flat % n_i
    return np.hstack([identities[actor], behaviors[behavior], identities[obj]])


def enumerate_codes(
    lexicon: SentimentLexicon,
    coeffs: CoefficientSet,
    budget: int = DEFAULT_ENUMERATION_BUDGET,
    seed: int = 0,
    keep_codes: bool = False,
    chunk: int = 16_384,
) -> CodeHistogram:
    """Code histogram over all |identities|^2 x |behaviors| ABO combinations.

    Falls back to seeded uniform sampling of `budget` combinations when the
    full space is larger than the budget (the histogram is then marked
    non-exhaustive and carries no per-combination code table).
    """
    identities = np.array([e.epa.as_array() for e in lexicon.entries("identity")])
    behaviors = np.array([e.epa.as_array() for e in lexicon.entries("behavior")])
    if len(identities) == 0 or len(behaviors) == 0:
        return CodeHistogram(counts={}, total=0, exhaustive=True)

    total = len(identities) * len(behaviors) * len(identities)
    exhaustive = total <= budget
    if exhaustive:
        flat_indices = np.arange(total)
    else:
        rng = np.random.default_rng(seed)
        flat_indices = rng.integers(0, total, size=budget)

    all_codes = np.empty(len(flat_indices), dtype=np.uint16) if keep_codes and exhaustive else None
    counts: dict[int, int] = {}
    for start in range(0, len(flat_indices), chunk):
        flat = flat_indices[start : start + chunk]
        profiles = _combo_profiles(identities, behaviors, flat)
        transients = impression_batch(profiles, coeffs)
        codes = (transients > profiles) @ CODE_WEIGHTS
        if all_codes is not None:
            all_codes[start : start + len(flat)] = codes
        values, value_counts = np.unique(codes, return_counts=True)
        for value, count in zip(values, value_counts):
            counts[int(value)] = counts.get(int(value), 0) + int(count)

    return CodeHistogram(
        counts=counts,
        total=len(flat_indices),
        exhaustive=exhaustive,
        codes=all_codes,
    )


@dataclass(frozen=True)
class MabmoEvent:
    """One modifier/actor/behavior/modifier/object event."""

    modifier1: LexiconEntry
    actor: LexiconEntry
    behavior: LexiconEntry
    modifier2: LexiconEntry
    object: LexiconEntry
    abo_code: int

    def __post_init__(self):
        expected = ("modifier", "identity", "behavior", "modifier", "identity")
        slots = (self.modifier1, self.actor, self.behavior, self.modifier2, self.object)
        for entry, category in zip(slots, expected):
            if entry.category != category:
                raise ConfigurationError(
                    f"slot for {category} got {entry.term!r} ({entry.category})"
                )
        if not 0 <= self.abo_code < (1 << CODE_BITS):
            raise ConfigurationError(f"event code out of range: {self.abo_code}")

    @property
    def slots(self) -> tuple[LexiconEntry, ...]:
        return (self.modifier1, self.actor, self.behavior, self.modifier2, self.object)

    @property
    def sentence(self) -> str:
        return render_sentence(self)

    def targets(self) -> np.ndarray:
        return np.concatenate([entry.epa.as_array() for entry in self.slots])


def render_sentence(event: MabmoEvent) -> str:
    """Join the five slot terms with single spaces and capitalize the start.

    Terms stay verbatim otherwise: no articles, no inflection, multiword
    terms untouched.
    """
    text = " ".join(entry.term for entry in event.slots)
    return text[0].upper() + text[1:]


def _stratified_cluster_draw(
    entries_by_cluster: dict[int, list[LexiconEntry]],
    n: int,
    rng: np.random.Generator,
) -> list[LexiconEntry]:
    """Draw n entries with per-cluster quotas as equal as possible."""
    cluster_ids = sorted(entries_by_cluster)
    if not cluster_ids:
        raise ConfigurationError("no populated clusters to sample from")
    quotas = allocate_counts(n, [1.0 / len(cluster_ids)] * len(cluster_ids))
    drawn: list[LexiconEntry] = []
    for cluster_id, quota in zip(cluster_ids, quotas):
        members = entries_by_cluster[cluster_id]
        picks = rng.integers(0, len(members), size=quota)
        drawn.extend(members[i] for i in picks)
    order = rng.permutation(len(drawn))
    return [drawn[i] for i in order]


def _entries_by_cluster(
    entries: Sequence[LexiconEntry], model: ClusterModel | None
) -> dict[int, list[LexiconEntry]]:
    if model is None:
        return {0: list(entries)}
    grouped: dict[int, list[LexiconEntry]] = {}
    for entry in entries:
        grouped.setdefault(model.assignment[entry.key], []).append(entry)
    return grouped


class MabmoSampler:
    """Seeded event sampler over one lexicon split.

    Actor-behavior-object triples are stratified over the observed code
    histogram (when it is exhaustive and carries the per-combination code
    table); the two modifiers are stratified over modifier clusters.
    """

    def __init__(
        self,
        lexicon: SentimentLexicon,
        clusters: dict[str, ClusterModel],
        coeffs: CoefficientSet,
        histogram: CodeHistogram | None = None,
        budget: int = DEFAULT_ENUMERATION_BUDGET,
        seed: int = 0,
    ):
        self.lexicon = lexicon
        self.clusters = clusters
        self.coeffs = coeffs
        self.identities = lexicon.entries("identity")
        self.behaviors = lexicon.entries("behavior")
        self.modifiers = lexicon.entries("modifier")
        for category, entries in (
            ("identity", self.identities),
            ("behavior", self.behaviors),
            ("modifier", self.modifiers),
        ):
            if not entries:
                raise ConfigurationError(f"cannot sample events: no {category} entries")
        if histogram is None:
            histogram = enumerate_codes(
                lexicon, coeffs, budget=budget, seed=seed, keep_codes=True
            )
        self.histogram = histogram
        self._by_code: dict[int, np.ndarray] | None = None
        if histogram.exhaustive and histogram.codes is not None:
            order = np.argsort(histogram.codes, kind="stable")
            sorted_codes = histogram.codes[order]
            boundaries = np.flatnonzero(np.diff(sorted_codes)) + 1
            groups = np.split(order, boundaries)
            self._by_code = {int(histogram.codes[g[0]]): g for g in groups}

    def _draw_triples(self, n: int, rng: np.random.Generator) -> list[tuple[int, int, int, int]]:
        """Return (actor, behavior, object, code) index tuples."""
        n_i, n_b = len(self.identities), len(self.behaviors)
        triples: list[tuple[int, int, int, int]] = []
        if self._by_code:
            codes = sorted(self._by_code)
            quotas = allocate_counts(n, [1.0 / len(codes)] * len(codes))
            for code, quota in zip(codes, quotas):
                pool = self._by_code[code]
                picks = pool[rng.integers(0, len(pool), size=quota)]
                for flat in picks:
                    actor = int(flat // (n_b * n_i))
                    behavior = int((flat // n_i) % n_b)
                    obj = int(flat % n_i)
                    triples.append((actor, behavior, obj, code))
        else:
            flats = rng.integers(0, n_i * n_b * n_i, size=n)
            profiles = _combo_profiles(
                np.array([e.epa.as_array() for e in self.identities]),
                np.array([e.epa.as_array() for e in self.behaviors]),
                flats,
            )
            transients = impression_batch(profiles, self.coeffs)
            codes = (transients > profiles) @ CODE_WEIGHTS
            for flat, code in zip(flats, codes):
                actor = int(flat // (n_b * n_i))
                behavior = int((flat // n_i) % n_b)
                obj = int(flat % n_i)
                triples.append((actor, behavior, obj, int(code)))
        order = rng.permutation(len(triples))
        return [triples[i] for i in order]

    def sample(self, n: int, seed: int) -> list[MabmoEvent]:
        rng = np.random.default_rng(seed)
        triples = self._draw_triples(n, rng)
        modifier_pool = _entries_by_cluster(self.modifiers, self.clusters.get("modifier"))
        modifier_draws = _stratified_cluster_draw(modifier_pool, 2 * n, rng)
        events = []
        for i, (actor, behavior, obj, code) in enumerate(triples):
            events.append(
                MabmoEvent(
                    modifier1=modifier_draws[2 * i],
                    actor=self.identities[actor],
                    behavior=self.behaviors[behavior],
                    modifier2=modifier_draws[2 * i + 1],
                    object=self.identities[obj],
                    abo_code=code,
                )
            )
        return events

    def sample_pinned(self, term: str, category: str, n: int, seed: int) -> list[MabmoEvent]:
        """Events with one concept pinned into its role slot.

        Identities pin the actor slot, modifiers the first modifier slot,
        behaviors the behavior slot.  Unknown concepts get a placeholder
        zero EPA; the remaining slots are stratified over their category
        clusters.
        """
        if category not in ("identity", "behavior", "modifier"):
            raise ConfigurationError(f"cannot pin category {category!r}")
        if (term, category) in self.lexicon:
            pinned = self.lexicon.get(term, category)
        else:
            pinned = LexiconEntry(term, category, EpaVector(0.0, 0.0, 0.0), note="pinned")

        rng = np.random.default_rng(seed)
        pools = {
            "identity": _entries_by_cluster(self.identities, self.clusters.get("identity")),
            "behavior": _entries_by_cluster(self.behaviors, self.clusters.get("behavior")),
            "modifier": _entries_by_cluster(self.modifiers, self.clusters.get("modifier")),
        }
        actors = (
            [pinned] * n
            if category == "identity"
            else _stratified_cluster_draw(pools["identity"], n, rng)
        )
        behaviors = (
            [pinned] * n
            if category == "behavior"
            else _stratified_cluster_draw(pools["behavior"], n, rng)
        )
        objects = _stratified_cluster_draw(pools["identity"], n, rng)
        modifier1 = (
            [pinned] * n
            if category == "modifier"
            else _stratified_cluster_draw(pools["modifier"], n, rng)
        )
        modifier2 = _stratified_cluster_draw(pools["modifier"], n, rng)

        profiles = np.array(
            [
                np.concatenate([a.epa.as_array(), b.epa.as_array(), o.epa.as_array()])
                for a, b, o in zip(actors, behaviors, objects)
            ]
        )
        transients = impression_batch(profiles, self.coeffs)
        codes = (transients > profiles) @ CODE_WEIGHTS
        return [
            MabmoEvent(
                modifier1=modifier1[i],
                actor=actors[i],
                behavior=behaviors[i],
                modifier2=modifier2[i],
                object=objects[i],
                abo_code=int(codes[i]),
            )
            for i in range(n)
        ]


@dataclass(frozen=True)
class CorpusRecord:
    """One serialized corpus line."""

    id: int
    sentence: str
    slots: tuple[tuple[str, str], ...]
    targets: tuple[float, ...]
    abo_code: int
    split: str


def record_from_event(event: MabmoEvent, event_id: int, split: str) -> CorpusRecord:
    return CorpusRecord(
        id=event_id,
        sentence=event.sentence,
        slots=tuple((e.term, e.category) for e in event.slots),
        targets=tuple(float(v) for v in event.targets()),
        abo_code=event.abo_code,
        split=split,
    )


def write_corpus_jsonl(records: Iterable[CorpusRecord], path: str | Path) -> None:
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        for record in records:
            fh.write(
                json.dumps(
                    {
                        "id": record.id,
                        "sentence": record.sentence,
                        "slots": [
                            {"term": term, "category": category}
                            for term, category in record.slots
                        ],
                        "targets": list(record.targets),
                        "abo_code": record.abo_code,
                        "split": record.split,
                    },
                    separators=(",", ":"),
                )
                + "\n"
            )


def read_corpus_jsonl(path: str | Path) -> list[CorpusRecord]:
    records = []
    with Path(path).open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                raw = json.loads(line)
                records.append(
                    CorpusRecord(
                        id=int(raw["id"]),
                        sentence=raw["sentence"],
                        slots=tuple((s["term"], s["category"]) for s in raw["slots"]),
                        targets=tuple(float(v) for v in raw["targets"]),
                        abo_code=int(raw["abo_code"]),
                        split=raw["split"],
                    )
                )
            except (KeyError, ValueError, TypeError) as exc:
                raise ConfigurationError(f"{path}:{lineno}: bad corpus line ({exc})") from None
    return records


def write_cluster_report(clusters: dict[str, ClusterModel], path: str | Path) -> None:
    """CSV of cluster assignments: term,category,cluster."""
    import csv

    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["term", "category", "cluster"])
        rows = []
        for model in clusters.values():
            rows.extend(
                (term, category, cluster)
                for (term, category), cluster in model.assignment.items()
            )
        for row in sorted(rows):
            writer.writerow(row)


def write_elbow_csv(k_values: Sequence[int], inertias: Sequence[float], path: str | Path) -> None:
    import csv

    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["k", "inertia"])
        for k, inertia in zip(k_values, inertias):
            writer.writerow([k, repr(float(inertia))])


@dataclass
class CorpusBuild:
    """Everything produced by one corpus generation run."""

    records: list[CorpusRecord]
    splits: LexiconSplits
    clusters: dict[str, ClusterModel]
    histograms: dict[str, CodeHistogram]


def generate_corpus(
    lexicon: SentimentLexicon,
    coeffs: CoefficientSet,
    n_events: int,
    seed: int,
    k_clusters: int = DEFAULT_CLUSTERS,
    split_spec: SplitSpec | None = None,
    budget: int = DEFAULT_ENUMERATION_BUDGET,
) -> CorpusBuild:
    """Run the full pipeline: cluster, split, code, and sample all splits.

    Event counts per split follow the split fractions; ids are sequential
    across train, then test, then validation.
    """
    split_spec = split_spec if split_spec is not None else SplitSpec(seed=seed)
    seeds = np.random.SeedSequence(seed).generate_state(8)
    clusters = cluster_lexicon(lexicon, k=k_clusters, seed=int(seeds[0]))
    splits = stratified_split(lexicon, clusters, split_spec)

    counts = allocate_counts(n_events, split_spec.fractions)
    records: list[CorpusRecord] = []
    histograms: dict[str, CodeHistogram] = {}
    next_id = 0
    for offset, ((name, split_lexicon), count) in enumerate(zip(splits.items(), counts)):
        if count == 0:
            continue
        try:
            sampler = MabmoSampler(
                split_lexicon,
                clusters,
                coeffs,
                budget=budget,
                seed=int(seeds[1 + offset]),
            )
        except ConfigurationError as exc:
            raise ConfigurationError(
                f"{name} split: {exc} (lexicon too small for these fractions; "
                "lower the cluster count or adjust the split fractions)"
            ) from None
        histograms[name] = sampler.histogram
        for event in sampler.sample(count, seed=int(seeds[4 + offset])):
            records.append(record_from_event(event, next_id, name))
            next_id += 1
    return CorpusBuild(records=records, splits=splits, clusters=clusters, histograms=histograms)
