"""The engine's JSONL file formats, reimplemented over the wire contract.

Corpus lines carry at least {"id", "sentence"} (training lines also carry
"targets" and "split").  Vector files start with a {"dim": d} header line
followed by {"id", "vector"} rows.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence


class FormatError(Exception):
    """A corpus or vector file does not match the shared wire format."""


@dataclass(frozen=True)
class CorpusLine:
    id: int | str
    sentence: str
    targets: tuple[float, ...] | None = None
    split: str | None = None


def read_corpus(path: str | Path) -> list[CorpusLine]:
    lines: list[CorpusLine] = []
    seen: set = set()
    with Path(path).open(encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            raw = raw.strip()
            if not raw:
                continue
            try:
                record = json.loads(raw)
                line = CorpusLine(
                    id=record["id"],
                    sentence=record["sentence"],
                    targets=tuple(float(v) for v in record["targets"])
                    if "targets" in record
                    else None,
                    split=record.get("split"),
                )
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise FormatError(f"{path}:{lineno}: bad corpus line ({exc})") from None
            if line.id in seen:
                raise FormatError(f"{path}:{lineno}: duplicate corpus id {line.id!r}")
            seen.add(line.id)
            lines.append(line)
    return lines


def write_vectors(path: str | Path, dim: int, rows: Iterable[tuple[int | str, Sequence[float]]]) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        fh.write(json.dumps({"dim": dim}, separators=(",", ":")) + "\n")
        for row_id, vector in rows:
            values = [float(v) for v in vector]
            if len(values) != dim:
                raise FormatError(
                    f"vector for id {row_id!r} has {len(values)} components, header says {dim}"
                )
            fh.write(
                json.dumps({"id": row_id, "vector": values}, separators=(",", ":")) + "\n"
            )
