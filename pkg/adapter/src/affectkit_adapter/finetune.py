"""Optional joint encoder+head fine-tuning, offline alternative path.

Trains the encoder and a dense/ReLU/dense head together with L2 loss and
decoupled-weight-decay Adam, early-stopping on the corpus test split, then
exports per-event 15-dim predictions in the engine's prediction JSONL
format.  The frozen-vector head pipeline remains the primary path; this
exists for full-scale replication runs.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import torch
from torch import nn

from .export import AdapterConfig, AdapterError, load_encoder
from .io import read_corpus, write_vectors

TARGET_DIM = 15


@dataclass(frozen=True)
class FinetuneConfig:
    adapter: AdapterConfig = field(default_factory=AdapterConfig)
    head_hidden: int = 256
    learning_rate: float = 2e-5
    batch_size: int = 64
    weight_decay: float = 0.01
    max_steps: int = 500
    eval_interval: int = 25
    patience: int = 5
    seed: int = 0


class EncoderWithHead(nn.Module):
    def __init__(self, encoder, hidden_size: int, head_hidden: int):
        super().__init__()
        self.encoder = encoder
        self.head = nn.Sequential(
            nn.Linear(hidden_size, head_hidden),
            nn.ReLU(),
            nn.Linear(head_hidden, TARGET_DIM),
        )

    def forward(self, input_ids, attention_mask, **kwargs):
        outputs = self.encoder(
            input_ids=input_ids, attention_mask=attention_mask, **kwargs
        )
        return self.head(outputs.last_hidden_state[:, 0, :])


@dataclass
class FinetuneResult:
    steps_run: int
    epoch_train_losses: list[float]
    best_test_loss: float
    predictions_path: str


def _batched_predict(model, tokenizer, sentences, config: FinetuneConfig) -> torch.Tensor:
    model.eval()
    chunks = []
    with torch.no_grad():
        for start in range(0, len(sentences), config.batch_size):
            encoded = tokenizer(
                sentences[start : start + config.batch_size],
                return_tensors="pt",
                padding=True,
                truncation=True,
                max_length=config.adapter.max_length,
            ).to(config.adapter.device)
            chunks.append(model(**encoded).cpu())
    if not chunks:
        return torch.empty((0, TARGET_DIM))
    return torch.cat(chunks, dim=0)


def _full_loss(model, tokenizer, sentences, targets, config) -> float:
    predictions = _batched_predict(model, tokenizer, sentences, config)
    return float(((predictions - targets) ** 2).sum(dim=1).mean())


def joint_finetune(
    corpus_path: str | Path,
    predictions_path: str | Path,
    config: FinetuneConfig | None = None,
) -> FinetuneResult:
    """Fine-tune encoder+head on the train split and export predictions.

    With max_steps=0 the export equals the untrained head's forward pass on
    frozen encoder vectors.  Raises an actionable error on CUDA/CPU
    out-of-memory failures.
    """
    config = config or FinetuneConfig()
    lines = read_corpus(corpus_path)
    for line in lines:
        if line.targets is None or len(line.targets) != TARGET_DIM:
            raise AdapterError(
                f"corpus line {line.id!r} lacks a {TARGET_DIM}-dim target; "
                "fine-tuning needs a training corpus"
            )
    train_lines = [l for l in lines if l.split == "train"]
    test_lines = [l for l in lines if l.split == "test"]
    if config.max_steps > 0 and (not train_lines or not test_lines):
        raise AdapterError("fine-tuning needs non-empty train and test splits")

    torch.manual_seed(config.seed)
    tokenizer, encoder = load_encoder(config.adapter)
    model = EncoderWithHead(encoder, int(encoder.config.hidden_size), config.head_hidden)
    model.to(config.adapter.device)

    train_sentences = [l.sentence for l in train_lines]
    train_targets = torch.tensor([l.targets for l in train_lines], dtype=torch.float32)
    test_sentences = [l.sentence for l in test_lines]
    test_targets = torch.tensor([l.targets for l in test_lines], dtype=torch.float32)

    epoch_losses: list[float] = []
    best_test = float("inf")
    best_state = {k: v.detach().clone() for k, v in model.state_dict().items()}
    steps_run = 0

    if config.max_steps > 0:
        optimizer = torch.optim.AdamW(
            model.parameters(), lr=config.learning_rate, weight_decay=config.weight_decay
        )
        generator = torch.Generator().manual_seed(config.seed)
        evals_without_improvement = 0
        n = len(train_lines)
        steps_per_epoch = max(1, (n + config.batch_size - 1) // config.batch_size)
        epoch_losses.append(
            _full_loss(model, tokenizer, train_sentences, train_targets, config)
        )
        try:
            done = False
            while not done:
                order = torch.randperm(n, generator=generator).tolist()
                for start in range(0, n, config.batch_size):
                    batch_ids = order[start : start + config.batch_size]
                    model.train()
                    encoded = tokenizer(
                        [train_sentences[i] for i in batch_ids],
                        return_tensors="pt",
                        padding=True,
                        truncation=True,
                        max_length=config.adapter.max_length,
                    ).to(config.adapter.device)
                    predictions = model(**encoded)
                    loss = ((predictions - train_targets[batch_ids]) ** 2).sum(dim=1).mean()
                    optimizer.zero_grad()
                    loss.backward()
                    optimizer.step()
                    steps_run += 1

                    if steps_run % config.eval_interval == 0 or steps_run >= config.max_steps:
                        test_loss = _full_loss(
                            model, tokenizer, test_sentences, test_targets, config
                        )
                        if test_loss < best_test:
                            best_test = test_loss
                            best_state = {
                                k: v.detach().clone() for k, v in model.state_dict().items()
                            }
                            evals_without_improvement = 0
                        else:
                            evals_without_improvement += 1
                    if (
                        steps_run >= config.max_steps
                        or evals_without_improvement >= config.patience
                    ):
                        done = True
                        break
                epoch_losses.append(
                    _full_loss(model, tokenizer, train_sentences, train_targets, config)
                )
        except (RuntimeError, torch.cuda.OutOfMemoryError) as exc:
            if "out of memory" in str(exc).lower():
                raise AdapterError(
                    f"out of memory at batch size {config.batch_size}; "
                    "retry with a smaller --batch-size"
                ) from None
            raise
        model.load_state_dict(best_state)

    predictions = _batched_predict(model, tokenizer, [l.sentence for l in lines], config)
    write_vectors(
        predictions_path,
        TARGET_DIM,
        [(line.id, predictions[i].double().tolist()) for i, line in enumerate(lines)],
    )
    return FinetuneResult(
        steps_run=steps_run,
        epoch_train_losses=epoch_losses,
        best_test_loss=best_test,
        predictions_path=str(predictions_path),
    )
