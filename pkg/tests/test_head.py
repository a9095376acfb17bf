import numpy as np
import pytest

from affectkit.errors import ConfigurationError, DependencyError, ShapeError
from affectkit.head import (
    OUTPUT_DIM,
    AdamW,
    HeadModel,
    TrainingConfig,
    TrainingExample,
    forward,
    gradient_check,
    load_model,
    loss,
    loss_and_gradients,
    read_embeddings_jsonl,
    save_model,
    train,
    write_embeddings_jsonl,
)


def tiny_model(seed=0, d=12, h=8):
    return HeadModel.initialize(input_dim=d, hidden_dim=h, seed=seed)


def forward_reference(model, x):
    """Straight-line scalar re-implementation of the forward pass."""
    hidden = []
    for i in range(model.hidden_dim):
        acc = model.b1[i]
        for j in range(model.input_dim):
            acc += model.w1[i, j] * x[j]
        hidden.append(max(acc, 0.0))
    out = []
    for k in range(OUTPUT_DIM):
        acc = model.b2[k]
        for i in range(model.hidden_dim):
            acc += model.w2[k, i] * hidden[i]
        out.append(acc)
    return np.array(out)


class TestForward:
    def test_zero_model_maps_everything_to_zero(self, rng):
        model = HeadModel(
            w1=np.zeros((8, 12)), b1=np.zeros(8), w2=np.zeros((OUTPUT_DIM, 8)), b2=np.zeros(OUTPUT_DIM)
        )
        np.testing.assert_array_equal(forward(model, rng.uniform(-1, 1, 12)), np.zeros(OUTPUT_DIM))

    def test_hand_computed_selection(self):
        # W1 embeds the input in the first d hidden units, b1 keeps every
        # pre-activation positive, W2 picks single hidden coordinates.
        d, h = 4, 6
        w1 = np.zeros((h, d))
        w1[:d, :] = np.eye(d)
        b1 = np.full(h, 10.0)
        w2 = np.zeros((OUTPUT_DIM, h))
        w2[0, 0] = 1.0
        w2[1, 3] = 2.0
        b2 = np.zeros(OUTPUT_DIM)
        b2[2] = -1.5
        model = HeadModel(w1=w1, b1=b1, w2=w2, b2=b2)
        out = forward(model, np.array([0.5, -1.0, 2.0, 0.25]))
        assert out[0] == pytest.approx(10.5)  # x0 + 10
        assert out[1] == pytest.approx(2 * 10.25)  # 2 * (x3 + 10)
        assert out[2] == pytest.approx(-1.5)
        np.testing.assert_array_equal(out[3:], np.zeros(OUTPUT_DIM - 3))

    def test_matches_straight_line_reference(self, rng):
        model = tiny_model(seed=5)
        for _ in range(10):
            x = rng.uniform(-2, 2, model.input_dim)
            np.testing.assert_allclose(forward(model, x), forward_reference(model, x), atol=1e-12)

    def test_dimension_mismatch(self, rng):
        with pytest.raises(ShapeError):
            forward(tiny_model(), rng.uniform(size=5))

    def test_positive_homogeneity_in_output_layer(self, rng):
        # t = 2 keeps the scaling exact in floating point.
        model = tiny_model(seed=9)
        scaled = HeadModel(w1=model.w1, b1=model.b1, w2=2.0 * model.w2, b2=2.0 * model.b2)
        x = rng.uniform(-1, 1, model.input_dim)
        np.testing.assert_array_equal(forward(scaled, x), 2.0 * forward(model, x))


class TestLoss:
    def test_zero_when_predictions_match(self, rng):
        model = tiny_model()
        x = rng.uniform(-1, 1, (4, model.input_dim))
        assert loss(model, x, forward(model, x)) == 0.0

    def test_single_unit_error(self):
        model = HeadModel(
            w1=np.zeros((3, 2)), b1=np.zeros(3), w2=np.zeros((OUTPUT_DIM, 3)), b2=np.zeros(OUTPUT_DIM)
        )
        target = np.zeros(OUTPUT_DIM)
        target[7] = 1.0
        assert loss(model, np.zeros(2), target) == 1.0

    def test_matches_brute_force_accumulation(self, rng):
        model = tiny_model(seed=2)
        x = rng.uniform(-2, 2, (9, model.input_dim))
        y = rng.uniform(-3, 3, (9, OUTPUT_DIM))
        total = 0.0
        for xi, yi in zip(x, y):
            prediction = forward_reference(model, xi)
            for k in range(OUTPUT_DIM):
                total += (prediction[k] - yi[k]) ** 2
        assert loss(model, x, y) == pytest.approx(total / 9, rel=1e-12)

    def test_empty_batch_rejected(self):
        with pytest.raises(ConfigurationError):
            loss(tiny_model(), np.empty((0, 12)), np.empty((0, OUTPUT_DIM)))


class TestGradients:
    def test_zero_model_b2_gradient(self):
        model = HeadModel(
            w1=np.zeros((4, 3)), b1=np.zeros(4), w2=np.zeros((OUTPUT_DIM, 4)), b2=np.zeros(OUTPUT_DIM)
        )
        target = np.linspace(-1, 1, OUTPUT_DIM)
        _, grads = loss_and_gradients(model, np.zeros(3), target)
        np.testing.assert_allclose(grads["b2"], -2.0 * target, atol=1e-15)

    def test_gradient_check_on_random_points(self, rng):
        worst = 0.0
        for trial in range(20):
            model = tiny_model(seed=100 + trial, d=7, h=5)
            x = rng.uniform(-2, 2, 7)
            y = rng.uniform(-3, 3, OUTPUT_DIM)
            error, excluded = gradient_check(model, x, y)
            worst = max(worst, error)
        assert worst < 1e-4

    def test_kink_probe_is_excluded_not_failed(self):
        # Force one hidden pre-activation to sit exactly on the ReLU kink.
        d, h = 3, 4
        model = HeadModel(
            w1=np.zeros((h, d)),
            b1=np.array([0.0, 1.0, 1.0, 1.0]),
            w2=np.ones((OUTPUT_DIM, h)),
            b2=np.zeros(OUTPUT_DIM),
        )
        error, excluded = gradient_check(model, np.zeros(d), np.ones(OUTPUT_DIM))
        assert ("b1", 0) in excluded
        assert error < 1e-4


class TestAdamW:
    def test_decoupled_decay_shrinks_weights_exactly(self):
        # Zero gradients: b1 = 0 with x = 0 makes every gradient vanish while
        # the weight matrices stay non-zero.
        rng = np.random.default_rng(3)
        model = HeadModel(
            w1=rng.normal(size=(4, 3)),
            b1=np.zeros(4),
            w2=rng.normal(size=(OUTPUT_DIM, 4)),
            b2=rng.normal(size=OUTPUT_DIM),
        )
        config = TrainingConfig(learning_rate=0.1, weight_decay=0.5)
        x = np.zeros((1, 3))
        y = model.b2[None, :].copy()
        value, grads = loss_and_gradients(model, x, y)
        assert value == 0.0
        assert all(not np.any(g) for g in grads.values())

        w1_before, w2_before = model.w1.copy(), model.w2.copy()
        b2_before = model.b2.copy()
        optimizer = AdamW(config)
        optimizer.step(model.params(), grads)
        factor = 1.0 - config.learning_rate * config.weight_decay
        np.testing.assert_array_equal(model.w1, w1_before * factor)
        np.testing.assert_array_equal(model.w2, w2_before * factor)
        np.testing.assert_array_equal(model.b2, b2_before)

    def test_zero_learning_rate_is_exact_noop(self, rng):
        model = tiny_model(seed=4)
        before = {k: v.copy() for k, v in model.params().items()}
        examples = [
            TrainingExample(i, rng.uniform(-1, 1, model.input_dim), rng.uniform(-1, 1, OUTPUT_DIM))
            for i in range(8)
        ]
        config = TrainingConfig(learning_rate=0.0, batch_size=4, max_steps=25, eval_interval=5)
        trained, _ = train(model, examples[:6], examples[6:], config)
        for name, param in trained.params().items():
            np.testing.assert_array_equal(param, before[name])


class TestTrain:
    def make_examples(self, rng, n, d, id_offset=0):
        return [
            TrainingExample(
                id_offset + i, rng.uniform(-1, 1, d), rng.uniform(-2, 2, OUTPUT_DIM)
            )
            for i in range(n)
        ]

    def test_overfits_small_random_set(self, rng):
        d = 32
        examples = self.make_examples(rng, 64, d)
        model = HeadModel.initialize(input_dim=d, hidden_dim=64, seed=1)
        config = TrainingConfig(
            learning_rate=3e-3,
            batch_size=64,
            weight_decay=0.0,
            max_steps=2000,
            eval_interval=100,
            patience=10**9,
            seed=1,
        )
        _, history = train(model, examples, self.make_examples(rng, 4, d, 1000), config)
        # Memorization capacity: training loss must collapse.
        assert min(history.train_losses) < 1e-3

    def test_bit_reproducible_under_seed(self, rng):
        d = 10
        train_set = self.make_examples(rng, 30, d)
        test_set = self.make_examples(rng, 10, d, 1000)
        config = TrainingConfig(learning_rate=1e-3, batch_size=8, max_steps=120, eval_interval=20, seed=7)
        first, _ = train(HeadModel.initialize(d, 16, seed=2), train_set, test_set, config)
        second, _ = train(HeadModel.initialize(d, 16, seed=2), train_set, test_set, config)
        for name in ("w1", "b1", "w2", "b2"):
            np.testing.assert_array_equal(first.params()[name], second.params()[name])

    def test_returns_best_checkpoint(self, rng):
        d = 6
        train_set = self.make_examples(rng, 40, d)
        test_set = self.make_examples(rng, 12, d, 1000)
        config = TrainingConfig(
            learning_rate=2e-2, batch_size=8, max_steps=400, eval_interval=20, patience=3, seed=3
        )
        trained, history = train(HeadModel.initialize(d, 12, seed=5), train_set, test_set, config)
        x = np.array([e.embedding for e in test_set])
        y = np.array([e.target for e in test_set])
        final_eval = float(((forward(trained, x) - y) ** 2).sum() / len(x))
        assert final_eval == pytest.approx(history.best_eval_loss, rel=1e-12)
        assert min(history.eval_losses) == history.best_eval_loss

    def test_overlapping_ids_rejected(self, rng):
        examples = self.make_examples(rng, 10, 4)
        config = TrainingConfig(max_steps=5, eval_interval=5)
        model = HeadModel.initialize(4, 4, seed=0)
        with pytest.raises(ConfigurationError):
            train(model, examples, examples[:2], config)

    def test_empty_sets_rejected(self):
        config = TrainingConfig()
        model = HeadModel.initialize(4, 4, seed=0)
        with pytest.raises(ConfigurationError):
            train(model, [], [], config)

    @pytest.mark.slow
    def test_linear_task_approaches_least_squares_oracle(self, rng):
        # Targets are a fixed linear map of the embeddings plus noise; the
        # exact least-squares fit is the achievable optimum.
        d, n_train, n_val = 16, 1000, 200
        linear_map = rng.normal(size=(d, OUTPUT_DIM)) * 0.5

        def make(n, offset):
            examples = []
            for i in range(n):
                emb = rng.uniform(-1, 1, d)
                target = emb @ linear_map + rng.normal(0, 0.1, OUTPUT_DIM)
                examples.append(TrainingExample(offset + i, emb, target))
            return examples

        train_set = make(n_train, 0)
        test_set = make(200, 100_000)
        val_set = make(n_val, 200_000)

        config = TrainingConfig(
            learning_rate=3e-3, batch_size=64, weight_decay=0.0,
            max_steps=8000, eval_interval=400, patience=20, seed=11,
        )
        model = HeadModel.initialize(d, 128, seed=11)
        trained, _ = train(model, train_set, test_set, config)

        x_train = np.array([e.embedding for e in train_set])
        y_train = np.array([e.target for e in train_set])
        x_val = np.array([e.embedding for e in val_set])
        y_val = np.array([e.target for e in val_set])

        design = np.hstack([x_train, np.ones((n_train, 1))])
        weights, *_ = np.linalg.lstsq(design, y_train, rcond=None)
        oracle_pred = np.hstack([x_val, np.ones((n_val, 1))]) @ weights
        oracle_mae = np.abs(oracle_pred - y_val).mean(axis=0)

        model_mae = np.abs(forward(trained, x_val) - y_val).mean(axis=0)
        assert np.all(model_mae - oracle_mae < 0.05)


class TestModelFile:
    def test_round_trip_is_lossless(self, tmp_path):
        model = tiny_model(seed=13)
        path = tmp_path / "model.json"
        save_model(model, path)
        loaded = load_model(path)
        for name in ("w1", "b1", "w2", "b2"):
            np.testing.assert_array_equal(loaded.params()[name], model.params()[name])
        assert loaded.seed == model.seed
        assert loaded.model_id() == model.model_id()

    def test_rejects_foreign_files(self, tmp_path):
        path = tmp_path / "other.json"
        path.write_text('{"format": "something-else"}')
        with pytest.raises(DependencyError):
            load_model(path)


class TestEmbeddingsJsonl:
    def test_round_trip(self, rng, tmp_path):
        rows = [(i, rng.uniform(-1, 1, 6)) for i in range(5)]
        path = tmp_path / "emb.jsonl"
        write_embeddings_jsonl(path, 6, rows)
        dim, loaded = read_embeddings_jsonl(path)
        assert dim == 6
        assert set(loaded) == {0, 1, 2, 3, 4}
        for i, vector in rows:
            np.testing.assert_array_equal(loaded[i], vector)

    def test_header_and_dimension_enforced(self, rng, tmp_path):
        path = tmp_path / "emb.jsonl"
        path.write_text('{"id": 0, "vector": [1.0]}\n')
        with pytest.raises(ConfigurationError):
            read_embeddings_jsonl(path)
        path.write_text('{"dim": 3}\n{"id": 0, "vector": [1.0, 2.0]}\n')
        with pytest.raises(ConfigurationError):
            read_embeddings_jsonl(path)
        with pytest.raises(ShapeError):
            write_embeddings_jsonl(path, 3, [(0, np.ones(2))])
