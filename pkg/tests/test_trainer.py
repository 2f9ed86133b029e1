"""Tests for the loss, the optimizer and the staged training loop."""

import numpy as np
import pytest

from rdmnet.autograd import Tensor
from rdmnet.errors import NumericDivergenceError, ShapeError
from rdmnet.model import build_model, set_frozen
from rdmnet.schemas import CyclicSchedule, Stage, TrainConfig
from rdmnet.training import SGD, euclidean_loss, sgd_step, train

from tests.conftest import tiny_spec


def config(**updates) -> TrainConfig:
    values = {"lr": 0.01, "batch_size": 8, "epochs_frozen": 0, "epochs_unfrozen": 0, "seed": 0}
    values.update(updates)
    return TrainConfig(**values)


def snapshot(model) -> dict[str, np.ndarray]:
    return model.state_dict()


def changed(before, after, prefix) -> list[bool]:
    return [not np.array_equal(before[k], after[k]) for k in before if k.startswith(prefix)]


class TestEuclideanLoss:
    """Tests for the batch-mean squared error."""

    def test_equal_is_zero(self):
        """pred == target gives 0."""
        values = Tensor([0.3, 0.7])
        assert euclidean_loss(values, Tensor([0.3, 0.7])).item() == 0.0

    def test_single(self):
        """(2 - 0)^2 = 4."""
        assert euclidean_loss(Tensor([2.0]), Tensor([0.0])).item() == 4.0

    def test_mean_over_batch(self):
        """(1 + 9) / 2 = 5."""
        assert euclidean_loss(Tensor([1.0, 3.0]), Tensor([0.0, 0.0])).item() == 5.0

    def test_non_negative(self, rng):
        """Random batches never give a negative loss."""
        for _ in range(20):
            pred = Tensor(rng.normal(size=7))
            target = Tensor(rng.normal(size=7))
            assert euclidean_loss(pred, target).item() >= 0.0

    def test_shape_mismatch(self):
        """Lengths must agree."""
        with pytest.raises(ShapeError):
            euclidean_loss(Tensor([1.0, 2.0]), Tensor([1.0]))


class TestSgdStep:
    """Tests for the momentum update rule."""

    def test_plain_step(self):
        """w=1, g=0.5, lr=0.1, no momentum -> 0.95."""
        w = Tensor([1.0], dtype=np.float64)
        sgd_step({"w": w}, {"w": np.array([0.5])}, lr=0.1, momentum=0.0, velocity={})
        assert w.item() == pytest.approx(0.95)

    def test_momentum_recurrence(self):
        """g=1 twice with momentum 0.9: w=-0.1, then v=1.9 and w=-0.29."""
        w = Tensor([0.0], dtype=np.float64)
        velocity: dict[str, np.ndarray] = {}
        grads = {"w": np.array([1.0])}
        sgd_step({"w": w}, grads, lr=0.1, momentum=0.9, velocity=velocity)
        assert w.item() == pytest.approx(-0.1)
        sgd_step({"w": w}, grads, lr=0.1, momentum=0.9, velocity=velocity)
        assert velocity["w"].item() == pytest.approx(1.9)
        assert w.item() == pytest.approx(-0.29)

    def test_frozen_skipped(self):
        """Frozen parameters and their velocity are untouched."""
        w = Tensor([1.0], dtype=np.float64)
        velocity = {"w": np.array([3.0])}
        sgd_step({"w": w}, {"w": np.array([5.0])}, lr=0.1, momentum=0.9, velocity=velocity, frozen={"w"})
        assert w.item() == 1.0
        assert velocity["w"].item() == 3.0

    def test_zero_lr(self, rng):
        """lr = 0 leaves every parameter as it was."""
        w = Tensor(rng.normal(size=4), dtype=np.float64)
        before = w.data.copy()
        sgd_step({"w": w}, {"w": rng.normal(size=4)}, lr=0.0, momentum=0.0, velocity={})
        assert np.array_equal(w.data, before)

    def test_half_lr_half_distance(self, rng):
        """Without momentum, halving lr halves the move."""
        start = rng.normal(size=5)
        grad = rng.normal(size=5)
        full = Tensor(start.copy())
        half = Tensor(start.copy())
        sgd_step({"w": full}, {"w": grad}, lr=0.2, momentum=0.0, velocity={})
        sgd_step({"w": half}, {"w": grad}, lr=0.1, momentum=0.0, velocity={})
        np.testing.assert_allclose(half.data - start, 0.5 * (full.data - start), rtol=1e-12)

    def test_grad_shape_mismatch(self):
        """A gradient of the wrong shape is rejected."""
        w = Tensor([1.0, 2.0])
        with pytest.raises(ShapeError):
            sgd_step({"w": w}, {"w": np.zeros(3)}, lr=0.1, momentum=0.0, velocity={})

    def test_optimizer_honors_model_freeze(self, small_model):
        """SGD.step skips the model's frozen layers."""
        set_frozen(small_model, ["head.linear"], True)
        weight = small_model.params["head.linear"].weight
        before = weight.data.copy()
        SGD(small_model, momentum=0.0).step({weight: np.ones_like(before)}, lr=1.0)
        assert np.array_equal(weight.data, before)


class TestTrain:
    """Tests for the two-stage loop."""

    def test_no_epochs(self, small_model, small_dataset):
        """0 + 0 epochs: empty history, weights unchanged."""
        before = snapshot(small_model)
        history = train(small_model, small_dataset, config())
        assert len(history) == 0
        after = snapshot(small_model)
        assert not any(changed(before, after, ""))

    def test_frozen_stage_keeps_body(self, small_model, small_dataset):
        """Stage 1 alone changes the head and leaves the body bitwise intact."""
        before = snapshot(small_model)
        history = train(small_model, small_dataset, config(epochs_frozen=2))
        after = snapshot(small_model)
        assert not any(changed(before, after, "body."))
        assert all(changed(before, after, "head.linear"))
        assert [r.stage for r in history.records] == [Stage.FROZEN, Stage.FROZEN]

    def test_unfrozen_stage_moves_body(self, small_model, small_dataset):
        """Stage 2 updates the body."""
        before = snapshot(small_model)
        train(small_model, small_dataset, config(epochs_unfrozen=1))
        assert any(changed(before, snapshot(small_model), "body."))

    def test_model_left_unfrozen(self, small_model, small_dataset):
        """After training every layer is trainable again."""
        train(small_model, small_dataset, config(epochs_frozen=1))
        assert small_model.frozen == set()
        assert all(t.requires_grad for _, t in small_model.named_parameters())

    def test_history_records(self, small_model, small_dataset):
        """One record per epoch, numbered across stages."""
        seen = []
        history = train(small_model, small_dataset, config(epochs_frozen=1, epochs_unfrozen=2), on_epoch=seen.append)
        assert [r.epoch for r in history.records] == [0, 1, 2]
        assert [r.stage for r in history.records] == [Stage.FROZEN, Stage.UNFROZEN, Stage.UNFROZEN]
        assert seen == history.records
        assert all(r.lr == pytest.approx(0.01) for r in history.records)
        assert all(r.mean_loss >= 0 and r.seconds >= 0 for r in history.records)

    def test_cyclic_schedule_lr(self, small_model, small_dataset):
        """The recorded lr is the mean of the per-batch schedule values."""
        schedule = CyclicSchedule(base_lr=0.001, max_lr=0.003, step_size=2)
        history = train(small_model, small_dataset, config(epochs_unfrozen=1, schedule=schedule))
        # 20 pairs in batches of 8: iterations 0, 1, 2 -> 0.001, 0.002, 0.003
        assert history.records[0].lr == pytest.approx(0.002)

    def test_deterministic(self, small_spec, small_dataset):
        """Same seed, data and config: bitwise-identical weights and losses."""
        runs = []
        for _ in range(2):
            model = build_model(small_spec, seed=0)
            history = train(model, small_dataset, config(epochs_frozen=1, epochs_unfrozen=2))
            runs.append((snapshot(model), history.losses))
        (w1, l1), (w2, l2) = runs
        assert l1 == l2
        assert not any(changed(w1, w2, ""))

    def test_shuffle_seed_matters(self, small_spec, small_dataset):
        """A different shuffle seed gives a different trajectory."""
        a = build_model(small_spec, seed=0)
        b = build_model(small_spec, seed=0)
        train(a, small_dataset, config(epochs_unfrozen=1, seed=0))
        train(b, small_dataset, config(epochs_unfrozen=1, seed=1))
        assert any(changed(snapshot(a), snapshot(b), ""))

    def test_freeze_then_unfreeze_is_never_frozen(self, small_spec, small_dataset):
        """Toggling the freeze beforehand does not change training."""
        plain = build_model(small_spec, seed=0)
        toggled = build_model(small_spec, seed=0)
        set_frozen(toggled, toggled.body_layer_ids, True)
        set_frozen(toggled, toggled.body_layer_ids, False)
        train(plain, small_dataset, config(epochs_unfrozen=1))
        train(toggled, small_dataset, config(epochs_unfrozen=1))
        assert not any(changed(snapshot(plain), snapshot(toggled), ""))

    def test_loss_decreases(self, small_model, small_dataset):
        """A few epochs on the tiny problem lower the loss."""
        history = train(small_model, small_dataset, config(epochs_frozen=2, epochs_unfrozen=18))
        assert history.losses[-1] < history.losses[0]

    def test_divergence_names_epoch_and_batch(self, small_model, small_dataset):
        """An overflowing loss aborts with the position."""
        small_model.params["head.linear"].weight.data[...] = 1e30
        small_model.params["head.linear"].bias.data[...] = 1e30
        with pytest.raises(NumericDivergenceError) as exc_info:
            train(small_model, small_dataset, config(epochs_frozen=1))
        assert exc_info.value.epoch == 0
        assert exc_info.value.batch == 0

    def test_image_shape_mismatch(self, small_dataset):
        """The dataset's images must fit the model."""
        model = build_model(tiny_spec(input_shape=(3, 9, 9)), seed=0)
        with pytest.raises(ShapeError):
            train(model, small_dataset, config(epochs_frozen=1))
