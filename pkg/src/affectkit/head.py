"""The sentence-vector to sentiment-profile regression head.

A two-layer dense network with one ReLU maps a sentence embedding to the
15 concatenated slot sentiments of a five-slot event.  Training uses
mini-batch decoupled-weight-decay Adam with L2 loss, periodic test-set
evaluation, early stopping, and best-checkpoint restoration.  Everything
is implemented directly over numpy so the backward pass can be verified
against finite differences and runs are bit-reproducible under a seed.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .errors import ConfigurationError, DependencyError, ShapeError

OUTPUT_DIM = 15
DEFAULT_INPUT_DIM = 1024
DEFAULT_HIDDEN_DIM = 256

MODEL_FORMAT = "affectkit-head"
MODEL_VERSION = 1


@dataclass
class HeadModel:
    """Dense -> ReLU -> dense regression head."""

    w1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray
    b2: np.ndarray
    seed: int = 0

    def __post_init__(self):
        self.w1 = np.asarray(self.w1, dtype=float)
        self.b1 = np.asarray(self.b1, dtype=float)
        self.w2 = np.asarray(self.w2, dtype=float)
        self.b2 = np.asarray(self.b2, dtype=float)
        h, d = self.w1.shape
        if self.b1.shape != (h,) or self.w2.shape != (OUTPUT_DIM, h) or self.b2.shape != (OUTPUT_DIM,):
            raise ShapeError(
                f"inconsistent head dimensions: w1 {self.w1.shape}, b1 {self.b1.shape}, "
                f"w2 {self.w2.shape}, b2 {self.b2.shape}"
            )
        for name, param in self.params().items():
            if not np.all(np.isfinite(param)):
                raise ShapeError(f"non-finite values in parameter {name}")

    @property
    def input_dim(self) -> int:
        return self.w1.shape[1]

    @property
    def hidden_dim(self) -> int:
        return self.w1.shape[0]

    def params(self) -> dict[str, np.ndarray]:
        return {"w1": self.w1, "b1": self.b1, "w2": self.w2, "b2": self.b2}

    def copy(self) -> "HeadModel":
        return HeadModel(
            self.w1.copy(), self.b1.copy(), self.w2.copy(), self.b2.copy(), seed=self.seed
        )

    def model_id(self) -> str:
        digest = hashlib.sha256()
        digest.update(f"{self.input_dim},{self.hidden_dim},{self.seed}".encode())
        for param in self.params().values():
            digest.update(np.ascontiguousarray(param).tobytes())
        return digest.hexdigest()[:12]

    @staticmethod
    def initialize(
        input_dim: int = DEFAULT_INPUT_DIM,
        hidden_dim: int = DEFAULT_HIDDEN_DIM,
        seed: int = 0,
    ) -> "HeadModel":
        """Seeded uniform init in +-sqrt(6 / (fan_in + fan_out)) per layer."""
        rng = np.random.default_rng(seed)
        limit1 = math.sqrt(6.0 / (input_dim + hidden_dim))
        limit2 = math.sqrt(6.0 / (hidden_dim + OUTPUT_DIM))
        return HeadModel(
            w1=rng.uniform(-limit1, limit1, size=(hidden_dim, input_dim)),
            b1=np.zeros(hidden_dim),
            w2=rng.uniform(-limit2, limit2, size=(OUTPUT_DIM, hidden_dim)),
            b2=np.zeros(OUTPUT_DIM),
            seed=seed,
        )


def forward(model: HeadModel, embeddings: np.ndarray) -> np.ndarray:
    """Evaluate the head on one embedding or a batch of them."""
    x = np.asarray(embeddings, dtype=float)
    single = x.ndim == 1
    if single:
        x = x[None, :]
    if x.shape[1] != model.input_dim:
        raise ShapeError(
            f"embedding dimension {x.shape[1]} does not match model input {model.input_dim}"
        )
    hidden = np.maximum(x @ model.w1.T + model.b1, 0.0)
    out = hidden @ model.w2.T + model.b2
    return out[0] if single else out


def loss(model: HeadModel, embeddings: np.ndarray, targets: np.ndarray) -> float:
    """Mean over the batch of the squared error summed across all outputs."""
    embeddings = np.atleast_2d(np.asarray(embeddings, dtype=float))
    targets = np.atleast_2d(np.asarray(targets, dtype=float))
    if len(embeddings) == 0:
        raise ConfigurationError("loss needs a non-empty batch")
    if targets.shape != (len(embeddings), OUTPUT_DIM):
        raise ShapeError(f"targets must be (n, {OUTPUT_DIM}), got {targets.shape}")
    diff = forward(model, embeddings) - targets
    return float((diff**2).sum() / len(embeddings))


def loss_and_gradients(
    model: HeadModel, embeddings: np.ndarray, targets: np.ndarray
) -> tuple[float, dict[str, np.ndarray]]:
    """Analytic gradients of the batch loss for every parameter."""
    x = np.atleast_2d(np.asarray(embeddings, dtype=float))
    y = np.atleast_2d(np.asarray(targets, dtype=float))
    n = len(x)
    z1 = x @ model.w1.T + model.b1
    hidden = np.maximum(z1, 0.0)
    predictions = hidden @ model.w2.T + model.b2
    diff = predictions - y
    value = float((diff**2).sum() / n)

    d_pred = 2.0 * diff / n
    grad_w2 = d_pred.T @ hidden
    grad_b2 = d_pred.sum(axis=0)
    d_hidden = d_pred @ model.w2
    d_z1 = d_hidden * (z1 > 0.0)
    grad_w1 = d_z1.T @ x
    grad_b1 = d_z1.sum(axis=0)
    return value, {"w1": grad_w1, "b1": grad_b1, "w2": grad_w2, "b2": grad_b2}


@dataclass(frozen=True)
class TrainingConfig:
    learning_rate: float = 2e-5
    batch_size: int = 64
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    weight_decay: float = 0.01
    max_steps: int = 2000
    eval_interval: int = 50
    patience: int = 5
    eval_reduction: str = "mean"
    seed: int = 0

    def __post_init__(self):
        if self.learning_rate < 0:
            raise ConfigurationError("learning rate must be non-negative")
        if self.batch_size < 1:
            raise ConfigurationError("batch size must be >= 1")
        for name in ("beta1", "beta2"):
            value = getattr(self, name)
            if not 0.0 <= value < 1.0:
                raise ConfigurationError(f"{name} must lie in [0, 1), got {value}")
        if self.epsilon <= 0:
            raise ConfigurationError("epsilon must be positive")
        if self.eval_reduction not in ("mean", "sum"):
            raise ConfigurationError("eval_reduction must be 'mean' or 'sum'")


@dataclass(frozen=True)
class TrainingExample:
    id: int | str
    embedding: np.ndarray
    target: np.ndarray


def _stack(examples: Sequence[TrainingExample], input_dim: int) -> tuple[np.ndarray, np.ndarray]:
    x = np.array([np.asarray(e.embedding, dtype=float) for e in examples])
    y = np.array([np.asarray(e.target, dtype=float) for e in examples])
    if x.shape[1] != input_dim:
        raise ShapeError(f"examples have dimension {x.shape[1]}, model wants {input_dim}")
    if y.shape[1] != OUTPUT_DIM:
        raise ShapeError(f"targets must have {OUTPUT_DIM} dimensions, got {y.shape[1]}")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise ConfigurationError("training data contains non-finite values")
    return x, y


class AdamW:
    """Decoupled-weight-decay Adam over a dict of named parameters.

    The decay multiplies weight matrices by (1 - lr * decay) outside the
    adaptive update; bias vectors are not decayed.
    """

    DECAYED = ("w1", "w2")

    def __init__(self, config: TrainingConfig):
        self.config = config
        self.step_count = 0
        self.m: dict[str, np.ndarray] = {}
        self.v: dict[str, np.ndarray] = {}

    def step(self, params: dict[str, np.ndarray], grads: dict[str, np.ndarray]) -> None:
        cfg = self.config
        self.step_count += 1
        correction1 = 1.0 - cfg.beta1**self.step_count
        correction2 = 1.0 - cfg.beta2**self.step_count
        for name, param in params.items():
            grad = grads[name]
            if name not in self.m:
                self.m[name] = np.zeros_like(param)
                self.v[name] = np.zeros_like(param)
            m = self.m[name]
            v = self.v[name]
            m *= cfg.beta1
            m += (1.0 - cfg.beta1) * grad
            v *= cfg.beta2
            v += (1.0 - cfg.beta2) * grad**2
            if name in self.DECAYED and cfg.weight_decay:
                param *= 1.0 - cfg.learning_rate * cfg.weight_decay
            denom = np.sqrt(v / correction2) + cfg.epsilon
            param -= cfg.learning_rate * (m / correction1) / denom


@dataclass
class TrainingHistory:
    steps: list[int] = field(default_factory=list)
    train_losses: list[float] = field(default_factory=list)
    eval_steps: list[int] = field(default_factory=list)
    eval_losses: list[float] = field(default_factory=list)
    best_step: int = 0
    best_eval_loss: float = math.inf
    stopped_early: bool = False


def _eval_loss(model, x, y, reduction) -> float:
    diff = forward(model, x) - y
    total = float((diff**2).sum())
    return total / len(x) if reduction == "mean" else total


def train(
    model: HeadModel,
    train_examples: Sequence[TrainingExample],
    test_examples: Sequence[TrainingExample],
    config: TrainingConfig,
    on_eval: Callable[[int, float], None] | None = None,
) -> tuple[HeadModel, TrainingHistory]:
    """Train with seeded shuffling, periodic evaluation, and early stopping.

    Returns the parameters of the best evaluated checkpoint, never a later
    one that scored worse.  Fully deterministic under config.seed.
    """
    if not train_examples or not test_examples:
        raise ConfigurationError("train and test sets must both be non-empty")
    overlap = {e.id for e in train_examples} & {e.id for e in test_examples}
    if overlap:
        raise ConfigurationError(f"train/test ids overlap: {sorted(overlap)[:5]}")

    x_train, y_train = _stack(train_examples, model.input_dim)
    x_test, y_test = _stack(test_examples, model.input_dim)

    work = model.copy()
    params = work.params()
    optimizer = AdamW(config)
    rng = np.random.default_rng(config.seed)
    history = TrainingHistory()

    best = work.copy()
    evals_without_improvement = 0
    order = np.array([], dtype=int)
    cursor = 0

    for step in range(1, config.max_steps + 1):
        if cursor + config.batch_size > len(order):
            order = rng.permutation(len(x_train))
            cursor = 0
        batch = order[cursor : cursor + min(config.batch_size, len(order))]
        cursor += len(batch)

        value, grads = loss_and_gradients(work, x_train[batch], y_train[batch])
        optimizer.step(params, grads)
        history.steps.append(step)
        history.train_losses.append(value)

        if step % config.eval_interval == 0 or step == config.max_steps:
            eval_value = _eval_loss(work, x_test, y_test, config.eval_reduction)
            history.eval_steps.append(step)
            history.eval_losses.append(eval_value)
            if on_eval is not None:
                on_eval(step, eval_value)
            if eval_value < history.best_eval_loss:
                history.best_eval_loss = eval_value
                history.best_step = step
                best = work.copy()
                evals_without_improvement = 0
            else:
                evals_without_improvement += 1
                if evals_without_improvement >= config.patience:
                    history.stopped_early = True
                    break

    return best, history


def gradient_check(
    model: HeadModel,
    embedding: np.ndarray,
    target: np.ndarray,
    epsilon: float = 1e-5,
) -> tuple[float, list[tuple[str, int]]]:
    """Central finite differences on every parameter vs analytic gradients.

    Returns (max relative error, excluded coordinates).  A coordinate is
    excluded when its +-epsilon probes straddle a ReLU kink, where the loss
    is not differentiable and the comparison is meaningless.
    """
    x = np.atleast_2d(np.asarray(embedding, dtype=float))
    y = np.atleast_2d(np.asarray(target, dtype=float))
    _, analytic = loss_and_gradients(model, x, y)

    work = model.copy()
    params = work.params()
    max_error = 0.0
    excluded: list[tuple[str, int]] = []
    for name, param in params.items():
        flat = param.reshape(-1)
        grad_flat = analytic[name].reshape(-1)
        for i in range(flat.size):
            original = flat[i]
            flat[i] = original + epsilon
            z_plus = x @ params["w1"].T + params["b1"]
            loss_plus = loss(work, x, y)
            flat[i] = original - epsilon
            z_minus = x @ params["w1"].T + params["b1"]
            loss_minus = loss(work, x, y)
            flat[i] = original
            if np.any(np.sign(z_plus) != np.sign(z_minus)):
                excluded.append((name, i))
                continue
            fd = (loss_plus - loss_minus) / (2.0 * epsilon)
            error = abs(fd - grad_flat[i]) / max(abs(grad_flat[i]), 1e-8)
            max_error = max(max_error, error)
    return max_error, excluded


def save_model(model: HeadModel, path: str | Path) -> None:
    """Write the model as a JSON container; floats round-trip exactly."""
    payload = {
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "input_dim": model.input_dim,
        "hidden_dim": model.hidden_dim,
        "output_dim": OUTPUT_DIM,
        "seed": model.seed,
        "model_id": model.model_id(),
        "params": {name: param.tolist() for name, param in model.params().items()},
    }
    Path(path).write_text(json.dumps(payload), encoding="utf-8")


def load_model(path: str | Path) -> HeadModel:
    path = Path(path)
    try:
        payload = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise DependencyError(f"cannot read model file {path}: {exc}") from None
    if payload.get("format") != MODEL_FORMAT:
        raise DependencyError(f"{path} is not a {MODEL_FORMAT} file")
    if payload.get("version") != MODEL_VERSION:
        raise DependencyError(f"unsupported model version {payload.get('version')!r}")
    params = payload["params"]
    model = HeadModel(
        w1=np.array(params["w1"], dtype=float),
        b1=np.array(params["b1"], dtype=float),
        w2=np.array(params["w2"], dtype=float),
        b2=np.array(params["b2"], dtype=float),
        seed=int(payload.get("seed", 0)),
    )
    if model.input_dim != payload["input_dim"] or model.hidden_dim != payload["hidden_dim"]:
        raise DependencyError(f"{path}: declared dimensions do not match parameters")
    return model


def write_embeddings_jsonl(
    path: str | Path, dim: int, rows: Sequence[tuple[int | str, np.ndarray]]
) -> None:
    """Embedding file: a {"dim": d} header line then one {id, vector} per row."""
    with Path(path).open("w", encoding="utf-8") as fh:
        fh.write(json.dumps({"dim": dim}, separators=(",", ":")) + "\n")
        for row_id, vector in rows:
            vector = np.asarray(vector, dtype=float)
            if vector.shape != (dim,):
                raise ShapeError(f"vector for id {row_id!r} has shape {vector.shape}, want ({dim},)")
            fh.write(
                json.dumps({"id": row_id, "vector": vector.tolist()}, separators=(",", ":"))
                + "\n"
            )


def read_embeddings_jsonl(path: str | Path) -> tuple[int, dict[int | str, np.ndarray]]:
    path = Path(path)
    vectors: dict[int | str, np.ndarray] = {}
    with path.open(encoding="utf-8") as fh:
        header_line = fh.readline()
        try:
            header = json.loads(header_line)
            dim = int(header["dim"])
        except (json.JSONDecodeError, KeyError, TypeError, ValueError):
            raise ConfigurationError(
                f"{path}: first line must be a {{\"dim\": d}} header"
            ) from None
        for lineno, line in enumerate(fh, start=2):
            line = line.strip()
            if not line:
                continue
            try:
                raw = json.loads(line)
                row_id = raw["id"]
                vector = np.asarray(raw["vector"], dtype=float)
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise ConfigurationError(f"{path}:{lineno}: bad embedding row ({exc})") from None
            if vector.shape != (dim,):
                raise ConfigurationError(
                    f"{path}:{lineno}: vector has {vector.shape[0]} components, header says {dim}"
                )
            if row_id in vectors:
                raise ConfigurationError(f"{path}:{lineno}: duplicate id {row_id!r}")
            vectors[row_id] = vector
    return dim, vectors
