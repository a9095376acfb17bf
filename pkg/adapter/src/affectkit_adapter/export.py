"""Deterministic sentence-vector export from a pretrained encoder."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import torch

from .io import CorpusLine, read_corpus, write_vectors

DEFAULT_MODEL = "bert-large-uncased"  # 24 layers, hidden size 1024


class AdapterError(Exception):
    pass


@dataclass(frozen=True)
class AdapterConfig:
    model: str = DEFAULT_MODEL
    pooling: str = "cls"  # "cls": first-position hidden state; "mean": token average
    batch_size: int = 32
    device: str = "cpu"
    deterministic: bool = True
    max_length: int = 64

    def __post_init__(self):
        if self.pooling not in ("cls", "mean"):
            raise AdapterError(f"pooling must be 'cls' or 'mean', got {self.pooling!r}")
        if self.batch_size < 1:
            raise AdapterError("batch size must be >= 1")


def load_encoder(config: AdapterConfig):
    from transformers import AutoModel, AutoTokenizer

    try:
        tokenizer = AutoTokenizer.from_pretrained(config.model)
        model = AutoModel.from_pretrained(config.model)
    except (OSError, EnvironmentError, ValueError) as exc:
        raise AdapterError(
            f"cannot load encoder {config.model!r}: {exc}. "
            "Pass a local model directory, or pre-download the model with "
            f"`huggingface-cli download {config.model}` on a machine with network access."
        ) from None
    model.to(config.device)
    model.eval()
    return tokenizer, model


def _pool(outputs, attention_mask, pooling: str) -> torch.Tensor:
    hidden = outputs.last_hidden_state
    if pooling == "cls":
        return hidden[:, 0, :]
    mask = attention_mask.unsqueeze(-1).to(hidden.dtype)
    return (hidden * mask).sum(dim=1) / mask.sum(dim=1).clamp(min=1.0)


def encode_sentences(sentences, tokenizer, model, config: AdapterConfig) -> torch.Tensor:
    """Batched eval-mode encoding; no dropout, no gradient state."""
    if config.deterministic:
        torch.manual_seed(0)
        torch.use_deterministic_algorithms(True, warn_only=True)
    vectors = []
    with torch.no_grad():
        for start in range(0, len(sentences), config.batch_size):
            batch = list(sentences[start : start + config.batch_size])
            encoded = tokenizer(
                batch,
                return_tensors="pt",
                padding=True,
                truncation=True,
                max_length=config.max_length,
            ).to(config.device)
            outputs = model(**encoded)
            vectors.append(_pool(outputs, encoded["attention_mask"], config.pooling).cpu())
    if not vectors:
        return torch.empty((0, model.config.hidden_size))
    return torch.cat(vectors, dim=0)


def export_embeddings(
    corpus_path: str | Path,
    out_path: str | Path,
    config: AdapterConfig | None = None,
) -> int:
    """Write one vector per corpus sentence id; returns the row count.

    The output dimension always equals the encoder hidden size and is
    declared in the JSONL header; an empty corpus produces a header-only
    file.
    """
    config = config or AdapterConfig()
    lines = read_corpus(corpus_path)
    tokenizer, model = load_encoder(config)
    dim = int(model.config.hidden_size)
    vectors = encode_sentences([line.sentence for line in lines], tokenizer, model, config)
    if len(lines) and vectors.shape[1] != dim:
        raise AdapterError(
            f"encoder produced dimension {vectors.shape[1]}, config declares {dim}"
        )
    rows = [
        (line.id, vectors[i].double().tolist()) for i, line in enumerate(lines)
    ]
    write_vectors(out_path, dim, rows)
    return len(rows)
