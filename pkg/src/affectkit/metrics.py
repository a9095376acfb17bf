"""Comparison statistics between lexicons, model estimates, and surveys.

Two report families share the same arithmetic: dictionary-vs-dictionary
comparisons (mean absolute distance / root mean square distance) and
model-vs-target evaluations (MAE / RMSE), both with per-dimension Pearson
correlations and two-sided significance stars.  Cross-dimension 3x3
correlation matrices cover the estimated-vs-survey analyses.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy import stats

from .epa import CATEGORIES, SentimentLexicon
from .errors import AlignmentError, InvalidInputError

DIM_LABELS = ("E", "P", "A")

STAR_THRESHOLDS = ((0.001, "***"), (0.01, "**"), (0.05, "*"))


def pearson(x, y) -> tuple[float, str, str]:
    """Pearson r with significance stars and a note for degenerate inputs.

    Stars come from the two-sided t-test with n-2 degrees of freedom at the
    0.05 / 0.01 / 0.001 levels.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n = len(x)
    if n < 2:
        return math.nan, "", "fewer than 2 pairs"
    a = x - x.mean()
    b = y - y.mean()
    saa = float(a @ a)
    sbb = float(b @ b)
    if saa == 0.0 or sbb == 0.0:
        return math.nan, "", "zero variance"
    # sqrt(s*s) rounds back to s, so identical inputs give exactly 1.0.
    r = float(a @ b) / math.sqrt(saa * sbb)
    r = max(-1.0, min(1.0, r))
    if n == 2:
        return r, "", "low n (r is degenerate with 2 pairs)"
    if abs(r) == 1.0:
        p = 0.0
    else:
        t = r * math.sqrt((n - 2) / (1.0 - r * r))
        p = 2.0 * float(stats.t.sf(abs(t), df=n - 2))
    stars = ""
    for threshold, symbol in STAR_THRESHOLDS:
        if p < threshold:
            stars = symbol
            break
    return r, stars, ""


@dataclass
class CategoryMetrics:
    """One category's row block in a comparison report."""

    category: str
    count: int
    abs_error: tuple[float, float, float]
    rms_error: tuple[float, float, float]
    correlations: tuple[float, float, float]
    stars: tuple[str, str, str]
    notes: tuple[str, str, str] = ("", "", "")


@dataclass
class ComparisonReport:
    """Per-category error and correlation table.

    metric_labels distinguishes dictionary comparisons (MAD/RMSD) from
    model evaluations (MAE/RMSE); the arithmetic is identical.
    """

    metric_labels: tuple[str, str]
    rows: list[CategoryMetrics] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)


def _category_metrics(category, a, b) -> CategoryMetrics:
    diff = a - b
    abs_error = tuple(float(v) for v in np.abs(diff).mean(axis=0))
    rms_error = tuple(float(v) for v in np.sqrt((diff**2).mean(axis=0)))
    for mad, rmsd in zip(abs_error, rms_error):
        # Power-mean inequality; a violation would mean broken arithmetic.
        assert rmsd >= mad - 1e-12, f"RMSD {rmsd} < MAD {mad}"
    correlations, stars, notes = [], [], []
    for dim in range(3):
        r, star, note = pearson(a[:, dim], b[:, dim])
        correlations.append(r)
        stars.append(star)
        notes.append(note)
    return CategoryMetrics(
        category=category,
        count=len(a),
        abs_error=abs_error,
        rms_error=rms_error,
        correlations=tuple(correlations),
        stars=tuple(stars),
        notes=tuple(notes),
    )


def compare_lexicons(lex_a: SentimentLexicon, lex_b: SentimentLexicon) -> ComparisonReport:
    """MAD/RMSD/correlation over the shared (term, category) keys."""
    report = ComparisonReport(metric_labels=("MAD", "RMSD"))
    for category in CATEGORIES:
        keys = sorted(
            {e.key for e in lex_a.entries(category)} & {e.key for e in lex_b.entries(category)}
        )
        if not keys:
            continue
        a = np.array([lex_a.get(*key).epa.as_array() for key in keys])
        b = np.array([lex_b.get(*key).epa.as_array() for key in keys])
        if len(keys) < 2:
            report.warnings.append(
                f"{category}: only {len(keys)} shared key(s); correlation omitted"
            )
        report.rows.append(_category_metrics(category, a, b))
    return report


@dataclass(frozen=True)
class EpaRecord:
    """An id-keyed 3-dimension record used for model evaluation."""

    id: int | str
    category: str
    values: tuple[float, float, float]


def model_eval(
    predictions: Sequence[EpaRecord], targets: Sequence[EpaRecord]
) -> ComparisonReport:
    """MAE/RMSE/correlation per category over id-aligned records."""
    pred_by_id = {}
    for record in predictions:
        if record.id in pred_by_id:
            raise AlignmentError(f"duplicate prediction id {record.id!r}", [record.id])
        pred_by_id[record.id] = record
    target_by_id = {}
    for record in targets:
        if record.id in target_by_id:
            raise AlignmentError(f"duplicate target id {record.id!r}", [record.id])
        target_by_id[record.id] = record

    missing = sorted(set(target_by_id) - set(pred_by_id), key=str)
    extra = sorted(set(pred_by_id) - set(target_by_id), key=str)
    if missing or extra:
        raise AlignmentError(
            f"prediction/target ids differ (missing {len(missing)}, unexpected {len(extra)}): "
            f"{(missing + extra)[:10]}",
            missing + extra,
        )

    report = ComparisonReport(metric_labels=("MAE", "RMSE"))
    for category in CATEGORIES:
        ids = sorted(
            (i for i, t in target_by_id.items() if t.category == category), key=str
        )
        if not ids:
            continue
        mismatched = [i for i in ids if pred_by_id[i].category != category]
        if mismatched:
            raise AlignmentError(
                f"category mismatch for ids {mismatched[:10]}", mismatched
            )
        a = np.array([pred_by_id[i].values for i in ids], dtype=float)
        b = np.array([target_by_id[i].values for i in ids], dtype=float)
        report.rows.append(_category_metrics(category, a, b))
    return report


@dataclass
class CorrelationMatrix:
    """3x3 Pearson matrix between two labeled dimension triples."""

    row_labels: tuple[str, str, str]
    col_labels: tuple[str, str, str]
    values: np.ndarray
    stars: list[list[str]]
    n: int
    note: str = ""

    def is_empty(self) -> bool:
        return self.n == 0


def correlation_matrix(
    rows: np.ndarray,
    cols: np.ndarray,
    row_labels=("E", "P", "A"),
    col_labels=("E", "P", "A"),
) -> CorrelationMatrix:
    rows = np.asarray(rows, dtype=float)
    cols = np.asarray(cols, dtype=float)
    if len(rows) != len(cols):
        raise AlignmentError(f"row/column sets differ in length: {len(rows)} vs {len(cols)}")
    if len(rows) == 0:
        return CorrelationMatrix(
            tuple(row_labels), tuple(col_labels),
            np.full((3, 3), math.nan), [[""] * 3 for _ in range(3)], 0, "no shared items",
        )
    values = np.empty((3, 3))
    stars = [[""] * 3 for _ in range(3)]
    for i in range(3):
        for j in range(3):
            r, star, _ = pearson(rows[:, i], cols[:, j])
            values[i, j] = r
            stars[i][j] = star
    return CorrelationMatrix(tuple(row_labels), tuple(col_labels), values, stars, len(rows))


def cross_matrices(
    estimates: np.ndarray, surveys: np.ndarray
) -> dict[str, CorrelationMatrix]:
    """The three matrices of an estimated-vs-survey analysis.

    (a) estimate rows vs survey columns, (b) survey vs survey,
    (c) estimate vs estimate.
    """
    estimates = np.asarray(estimates, dtype=float)
    surveys = np.asarray(surveys, dtype=float)
    if estimates.shape != surveys.shape or estimates.ndim != 2 or estimates.shape[1] != 3:
        raise AlignmentError(
            f"estimates and surveys must both be (n, 3), got {estimates.shape} and {surveys.shape}"
        )
    if len(estimates) < 2:
        raise InvalidInputError("need at least 2 aligned items for correlations")
    estimate_labels = ("EE", "EP", "EA")
    return {
        "estimate_vs_survey": correlation_matrix(
            estimates, surveys, row_labels=estimate_labels
        ),
        "survey_vs_survey": correlation_matrix(surveys, surveys),
        "estimate_vs_estimate": correlation_matrix(
            estimates, estimates, row_labels=estimate_labels, col_labels=estimate_labels
        ),
    }


def category_pair_correlations(
    lexicon: SentimentLexicon, category_a: str, category_b: str
) -> CorrelationMatrix:
    """Cross-category 3x3 correlations over terms shared by both categories."""
    terms = sorted(
        {e.term for e in lexicon.entries(category_a)}
        & {e.term for e in lexicon.entries(category_b)}
    )
    a = np.array([lexicon.get(t, category_a).epa.as_array() for t in terms]).reshape(-1, 3)
    b = np.array([lexicon.get(t, category_b).epa.as_array() for t in terms]).reshape(-1, 3)
    matrix = correlation_matrix(a, b)
    if terms and len(terms) == 2:
        matrix.note = "low n (2 shared terms)"
    return matrix


# ---------------------------------------------------------------------------
# Rendering and CSV round-trips


def comparison_to_csv(report: ComparisonReport) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer)
    abs_label, rms_label = report.metric_labels
    header = ["category", "count"]
    header += [f"{abs_label}_{d}" for d in DIM_LABELS]
    header += [f"{rms_label}_{d}" for d in DIM_LABELS]
    header += [f"r_{d}" for d in DIM_LABELS]
    header += [f"stars_{d}" for d in DIM_LABELS]
    writer.writerow(header)
    for row in report.rows:
        writer.writerow(
            [row.category, row.count]
            + [repr(v) for v in row.abs_error]
            + [repr(v) for v in row.rms_error]
            + [repr(v) for v in row.correlations]
            + list(row.stars)
        )
    return buffer.getvalue()


def comparison_from_csv(text: str) -> ComparisonReport:
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    abs_label = header[2].rsplit("_", 1)[0]
    rms_label = header[5].rsplit("_", 1)[0]
    report = ComparisonReport(metric_labels=(abs_label, rms_label))
    for row in reader:
        if not row:
            continue
        report.rows.append(
            CategoryMetrics(
                category=row[0],
                count=int(row[1]),
                abs_error=tuple(float(v) for v in row[2:5]),
                rms_error=tuple(float(v) for v in row[5:8]),
                correlations=tuple(float(v) for v in row[8:11]),
                stars=tuple(row[11:14]),
            )
        )
    return report


def render_comparison(report: ComparisonReport, title: str = "") -> str:
    abs_label, rms_label = report.metric_labels
    lines = []
    if title:
        lines.append(title)
    header = (
        f"{'category':<10} {'n':>5} "
        + " ".join(f"{abs_label}_{d:<2}".ljust(8) for d in DIM_LABELS)
        + " "
        + " ".join(f"{rms_label}_{d:<2}".ljust(8) for d in DIM_LABELS)
        + " "
        + " ".join(f"r_{d:<2}".ljust(10) for d in DIM_LABELS)
    )
    lines.append(header)
    for row in report.rows:
        correlation_cells = []
        for r, star in zip(row.correlations, row.stars):
            cell = "nan" if math.isnan(r) else f"{r:.2f}{star}"
            correlation_cells.append(cell.ljust(10))
        lines.append(
            f"{row.category:<10} {row.count:>5} "
            + " ".join(f"{v:.2f}".ljust(8) for v in row.abs_error)
            + " "
            + " ".join(f"{v:.2f}".ljust(8) for v in row.rms_error)
            + " "
            + " ".join(correlation_cells)
        )
    for warning in report.warnings:
        lines.append(f"note: {warning}")
    return "\n".join(lines) + "\n"


def matrix_to_csv(matrix: CorrelationMatrix) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer)
    writer.writerow(["label"] + list(matrix.col_labels) + [f"stars_{c}" for c in matrix.col_labels])
    for i, label in enumerate(matrix.row_labels):
        writer.writerow(
            [label]
            + [repr(float(v)) for v in matrix.values[i]]
            + [matrix.stars[i][j] for j in range(3)]
        )
    writer.writerow(["n", matrix.n, "", "", "", "", ""])
    return buffer.getvalue()


def matrix_from_csv(text: str) -> CorrelationMatrix:
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    col_labels = tuple(header[1:4])
    rows = list(reader)
    n = int(rows[-1][1])
    body = rows[:-1]
    row_labels = tuple(r[0] for r in body)
    values = np.array([[float(v) for v in r[1:4]] for r in body])
    stars = [list(r[4:7]) for r in body]
    return CorrelationMatrix(row_labels, col_labels, values, stars, n)


def render_matrix(matrix: CorrelationMatrix, title: str = "") -> str:
    lines = []
    if title:
        lines.append(title)
    if matrix.is_empty():
        lines.append(f"(empty: {matrix.note})")
        return "\n".join(lines) + "\n"
    lines.append("     " + " ".join(f"{c:>9}" for c in matrix.col_labels))
    for i, label in enumerate(matrix.row_labels):
        cells = []
        for j in range(3):
            value = matrix.values[i, j]
            cell = "nan" if math.isnan(value) else f"{value:.2f}{matrix.stars[i][j]}"
            cells.append(f"{cell:>9}")
        lines.append(f"{label:<4} " + " ".join(cells))
    lines.append(f"n = {matrix.n}" + (f" ({matrix.note})" if matrix.note else ""))
    return "\n".join(lines) + "\n"


def write_scatter_csv(
    lexicons: Iterable[tuple[SentimentLexicon, str]], path: str | Path
) -> None:
    """Term-level EPA export for external plotting: term,category,E,P,A,source."""
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["term", "category", "E", "P", "A", "source"])
        for lexicon, source in lexicons:
            for entry in lexicon:
                writer.writerow(
                    [
                        entry.term,
                        entry.category,
                        repr(entry.epa.e),
                        repr(entry.epa.p),
                        repr(entry.epa.a),
                        source,
                    ]
                )
