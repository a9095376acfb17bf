"""Event profiles, the impression-change polynomial, amalgamation, deflection.

An event profile stacks the actor, behavior, and object sentiments in the
fixed order [Ae, Ap, Aa, Be, Bp, Ba, Oe, Op, Oa].  Impression change is a
linear model over a 64-term basis: the constant, the 9 profile components,
the 27 cross-character two-way products, and the 27 three-way products.
Within-character products (e.g. Ae*Ap) are not part of the basis.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .epa import EpaVector
from .errors import ConfigurationError, InvalidInputError

DIMS = ("e", "p", "a")

PROFILE_LABELS = ("Ae", "Ap", "Aa", "Be", "Bp", "Ba", "Oe", "Op", "Oa")
OUTPUT_COLUMNS = tuple(label + "'" for label in PROFILE_LABELS)


def _build_basis() -> tuple[tuple[str, ...], tuple[tuple[int, ...], ...]]:
    labels: list[str] = ["1"]
    factors: list[tuple[int, ...]] = [()]
    index = {lab: i for i, lab in enumerate(PROFILE_LABELS)}
    for lab in PROFILE_LABELS:
        labels.append(lab)
        factors.append((index[lab],))
    for left, right in (("A", "B"), ("A", "O"), ("B", "O")):
        for d1 in DIMS:
            for d2 in DIMS:
                labels.append(f"{left}{d1}{right}{d2}")
                factors.append((index[f"{left}{d1}"], index[f"{right}{d2}"]))
    for d1 in DIMS:
        for d2 in DIMS:
            for d3 in DIMS:
                labels.append(f"A{d1}B{d2}O{d3}")
                factors.append((index[f"A{d1}"], index[f"B{d2}"], index[f"O{d3}"]))
    return tuple(labels), tuple(factors)


BASIS_LABELS, BASIS_FACTORS = _build_basis()
BASIS_SIZE = len(BASIS_LABELS)  # 64
_LABEL_TO_ROW = {label: i for i, label in enumerate(BASIS_LABELS)}


@dataclass(frozen=True)
class EventProfile:
    """Actor, behavior, and object sentiments for one event."""

    actor: EpaVector
    behavior: EpaVector
    object: EpaVector

    def flatten(self) -> np.ndarray:
        return np.concatenate(
            [self.actor.as_array(), self.behavior.as_array(), self.object.as_array()]
        )

    @staticmethod
    def unflatten(values) -> "EventProfile":
        values = np.asarray(values, dtype=float)
        if values.shape != (9,):
            raise InvalidInputError(f"expected 9 components, got shape {values.shape}")
        return EventProfile(
            EpaVector.from_array(values[0:3]),
            EpaVector.from_array(values[3:6]),
            EpaVector.from_array(values[6:9]),
        )


def basis_expand(profile: EventProfile | np.ndarray) -> np.ndarray:
    """Expand a 9-component profile into the canonical 64-term basis vector."""
    x = profile.flatten() if isinstance(profile, EventProfile) else np.asarray(profile, dtype=float)
    out = np.empty(BASIS_SIZE, dtype=float)
    out[0] = 1.0
    out[1:10] = x
    for i in range(10, BASIS_SIZE):
        value = 1.0
        for j in BASIS_FACTORS[i]:
            value *= x[j]
        out[i] = value
    return out


_TWO_WAY_LEFT = np.array([f[0] for f in BASIS_FACTORS[10:37]])
_TWO_WAY_RIGHT = np.array([f[1] for f in BASIS_FACTORS[10:37]])
_THREE_WAY = tuple(
    np.array([f[i] for f in BASIS_FACTORS[37:]]) for i in range(3)
)


def basis_expand_batch(profiles: np.ndarray) -> np.ndarray:
    """Vectorized basis expansion for an (n, 9) array of profiles."""
    x = np.asarray(profiles, dtype=float)
    n = x.shape[0]
    out = np.empty((n, BASIS_SIZE), dtype=float)
    out[:, 0] = 1.0
    out[:, 1:10] = x
    np.multiply(x[:, _TWO_WAY_LEFT], x[:, _TWO_WAY_RIGHT], out=out[:, 10:37])
    np.multiply(x[:, _THREE_WAY[0]], x[:, _THREE_WAY[1]], out=out[:, 37:64])
    out[:, 37:64] *= x[:, _THREE_WAY[2]]
    return out


@dataclass
class CoefficientSet:
    """A 64x9 impression-change coefficient matrix over the canonical basis."""

    matrix: np.ndarray
    name: str = ""

    def __post_init__(self):
        self.matrix = np.asarray(self.matrix, dtype=float)
        if self.matrix.shape != (BASIS_SIZE, 9):
            raise ConfigurationError(
                f"coefficient matrix must be {BASIS_SIZE}x9, got {self.matrix.shape}"
            )
        if not np.all(np.isfinite(self.matrix)):
            raise ConfigurationError("coefficient matrix contains non-finite values")

    @staticmethod
    def identity(name: str = "identity") -> "CoefficientSet":
        matrix = np.zeros((BASIS_SIZE, 9))
        matrix[1:10, :] = np.eye(9)
        return CoefficientSet(matrix, name=name)

    def row(self, label: str) -> np.ndarray:
        try:
            return self.matrix[_LABEL_TO_ROW[label]]
        except KeyError:
            raise ConfigurationError(f"unknown basis label {label!r}") from None


def impression(profile: EventProfile, coeffs: CoefficientSet) -> EventProfile:
    """Apply the impression-change equations to one event profile."""
    transients = basis_expand(profile) @ coeffs.matrix
    return EventProfile.unflatten(transients)


def impression_batch(profiles: np.ndarray, coeffs: CoefficientSet) -> np.ndarray:
    """Apply the impression-change equations to an (n, 9) profile array."""
    return basis_expand_batch(profiles) @ coeffs.matrix


def deflection(fundamentals: EventProfile, transients: EventProfile) -> float:
    """Squared Euclidean distance between two profiles over all 9 dimensions."""
    diff = fundamentals.flatten() - transients.flatten()
    return float(diff @ diff)


@dataclass
class AmalgamationCoefficients:
    """Intercept and weights combining a modifier sentiment with an identity."""

    intercept: np.ndarray = field(
        default_factory=lambda: np.array([-0.17, -0.18, 0.0])
    )
    modifier_weights: np.ndarray = field(
        default_factory=lambda: np.array(
            [[0.62, -0.14, -0.18], [-0.11, 0.63, 0.0], [0.0, 0.0, 0.61]]
        )
    )
    identity_weights: np.ndarray = field(
        default_factory=lambda: np.array(
            [[0.50, 0.0, 0.0], [0.0, 0.56, 0.07], [0.0, -0.05, 0.60]]
        )
    )

    def __post_init__(self):
        self.intercept = np.asarray(self.intercept, dtype=float)
        self.modifier_weights = np.asarray(self.modifier_weights, dtype=float)
        self.identity_weights = np.asarray(self.identity_weights, dtype=float)
        if self.intercept.shape != (3,):
            raise ConfigurationError("amalgamation intercept must have 3 components")
        for mat in (self.modifier_weights, self.identity_weights):
            if mat.shape != (3, 3):
                raise ConfigurationError("amalgamation weight matrices must be 3x3")


def amalgamate(
    modifier: EpaVector,
    identity: EpaVector,
    coeffs: AmalgamationCoefficients | None = None,
) -> EpaVector:
    """Combine a modifier with an identity into one composite sentiment.

    Returns intercept + modifier_weights @ M + identity_weights @ I without
    clamping; composites may leave the lexicon range.
    """
    coeffs = coeffs if coeffs is not None else AmalgamationCoefficients()
    combined = (
        coeffs.intercept
        + coeffs.modifier_weights @ modifier.as_array()
        + coeffs.identity_weights @ identity.as_array()
    )
    return EpaVector.from_array(combined)


def read_coefficients_tsv(path: str | Path) -> CoefficientSet:
    """Load a coefficient set from a tab-separated file.

    The first column holds a basis label from the canonical list; the nine
    value columns are named Ae',Ap',Aa',Be',Bp',Ba',Oe',Op',Oa'.  Rows absent
    from the file read as zero; labels outside the canonical list are
    rejected.
    """
    path = Path(path)
    matrix = np.zeros((BASIS_SIZE, 9))
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh, delimiter="\t")
        try:
            header = next(reader)
        except StopIteration:
            raise ConfigurationError(f"{path}: empty coefficient file") from None
        if len(header) != 10 or tuple(h.strip() for h in header[1:]) != OUTPUT_COLUMNS:
            raise ConfigurationError(
                f"{path}: expected header <label>\\t{chr(9).join(OUTPUT_COLUMNS)}"
            )
        seen: set[str] = set()
        for lineno, row in enumerate(reader, start=2):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            label = row[0].strip()
            if label not in _LABEL_TO_ROW:
                raise ConfigurationError(f"{path}:{lineno}: unknown basis label {label!r}")
            if label in seen:
                raise ConfigurationError(f"{path}:{lineno}: duplicate basis label {label!r}")
            seen.add(label)
            if len(row) != 10:
                raise ConfigurationError(f"{path}:{lineno}: expected 10 columns, got {len(row)}")
            try:
                matrix[_LABEL_TO_ROW[label]] = [float(v) for v in row[1:]]
            except ValueError as exc:
                raise ConfigurationError(f"{path}:{lineno}: bad value ({exc})") from None
    return CoefficientSet(matrix, name=path.stem)


def write_coefficients_tsv(coeffs: CoefficientSet, path: str | Path) -> None:
    """Write a coefficient set, omitting all-zero rows."""
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, delimiter="\t")
        writer.writerow(("term",) + OUTPUT_COLUMNS)
        for i, label in enumerate(BASIS_LABELS):
            row = coeffs.matrix[i]
            if not np.any(row):
                continue
            writer.writerow([label] + [repr(float(v)) for v in row])
