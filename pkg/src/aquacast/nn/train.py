"""Mini-batch MSE training with per-epoch shuffling and early stopping."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import NumericalError
from .optim import AdamState, adam_step

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class TrainConfig:
    """Training settings.

    ``lr_halving_epochs`` turns the constant learning rate into a step
    schedule that halves it every that many epochs.
    """

    learning_rate: float = 0.002
    lr_halving_epochs: int | None = None
    batch_size: int = 100
    max_epochs: int = 40
    early_stop_patience: int = 2
    shuffle_seed: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    loss: str = "mse"

    def __post_init__(self):
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.early_stop_patience < 1:
            raise ValueError("early_stop_patience must be >= 1")
        if self.max_epochs < 1:
            raise ValueError("max_epochs must be >= 1")
        if self.loss != "mse":
            raise ValueError("only the mse loss is supported")

    def lr_at(self, epoch: int) -> float:
        """Learning rate for 1-based ``epoch``."""
        if not self.lr_halving_epochs:
            return self.learning_rate
        return self.learning_rate * 0.5 ** ((epoch - 1) // self.lr_halving_epochs)


@dataclass
class TrainHistory:
    train_loss: list = field(default_factory=list)
    val_loss: list = field(default_factory=list)
    stopped_epoch: int = 0
    best_epoch: int = 0
    early_stopped: bool = False

    def to_rows(self):
        return [(i + 1, tr, va) for i, (tr, va) in enumerate(zip(self.train_loss, self.val_loss))]


class WindowSet:
    """Lazily gathered training windows over a feature matrix.

    Sample ``k`` is ``features[targets[k] + offsets]`` with target value
    ``values[targets[k]]``. ``offsets`` may have any shape; when
    ``drop_feature_axis`` is set the single feature column is squeezed away.
    """

    def __init__(self, features, values, targets, offsets, drop_feature_axis: bool = False):
        self.features = np.asarray(features, dtype=np.float64)
        if self.features.ndim == 1:
            self.features = self.features[:, None]
        self.values = np.asarray(values, dtype=np.float64)
        self.targets = np.asarray(targets, dtype=np.int64)
        self.offsets = np.asarray(offsets, dtype=np.int64)
        self.drop_feature_axis = drop_feature_axis
        if self.targets.size and (self.targets.min() + self.offsets.min() < 0
                                  or self.targets.max() >= self.values.size):
            raise ValueError("window offsets reach outside the series")

    def __len__(self):
        return int(self.targets.size)

    @property
    def input_shape(self):
        shape = self.offsets.shape
        if self.drop_feature_axis:
            return shape
        return shape + (self.features.shape[1],)

    def inputs(self, idx=None) -> np.ndarray:
        t = self.targets if idx is None else self.targets[idx]
        X = self.features[t.reshape((-1,) + (1,) * self.offsets.ndim) + self.offsets]
        if self.drop_feature_axis:
            X = X[..., 0]
        return X

    def outputs(self, idx=None) -> np.ndarray:
        t = self.targets if idx is None else self.targets[idx]
        return self.values[t][:, None]

    def batch(self, idx):
        return self.inputs(idx), self.outputs(idx)


class ArrayDataset:
    """In-memory (inputs, targets) pairs with the same interface as WindowSet."""

    def __init__(self, inputs, targets):
        self.X = np.asarray(inputs, dtype=np.float64)
        self.y = np.asarray(targets, dtype=np.float64)
        if self.y.ndim == 1:
            self.y = self.y[:, None]
        if self.X.shape[0] != self.y.shape[0]:
            raise ValueError("inputs and targets differ in length")

    def __len__(self):
        return int(self.X.shape[0])

    @property
    def input_shape(self):
        return self.X.shape[1:]

    def batch(self, idx):
        return self.X[idx], self.y[idx]


class EarlyStopping:
    """Stop once validation loss has risen in ``patience`` consecutive epochs.

    A rise is a validation loss above the previous epoch's while the training
    loss (when given) is still falling; any other epoch resets the count. The
    best epoch seen so far is tracked for restoring.
    """

    def __init__(self, patience: int):
        self.patience = patience
        self.best = math.inf
        self.best_epoch = 0
        self.previous = math.inf
        self.previous_train = math.inf
        self.rises = 0

    def update(self, epoch: int, val_loss: float, train_loss: float | None = None) -> bool:
        """Record one epoch; returns True when training should stop."""
        if val_loss < self.best:
            self.best = val_loss
            self.best_epoch = epoch
        rising = val_loss > self.previous
        if train_loss is not None:
            rising = rising and train_loss < self.previous_train
            self.previous_train = train_loss
        self.rises = self.rises + 1 if rising else 0
        self.previous = val_loss
        return self.rises >= self.patience


def mse(pred, target) -> float:
    return float(np.mean((pred - target) ** 2))


def evaluate_loss(network, data, batch_size: int = 2048) -> float:
    """Mean squared error over every target element of ``data``."""
    total = 0.0
    count = 0
    for i in range(0, len(data), batch_size):
        idx = np.arange(i, min(i + batch_size, len(data)))
        X, y = data.batch(idx)
        total += float(np.sum((network.forward(X) - y) ** 2))
        count += y.size
    return total / count


def train(network, train_set, val_set, config: TrainConfig):
    """Fit ``network`` in place; returns ``(network, history)``.

    Every epoch visits a fresh permutation of the training windows drawn
    from a generator seeded with ``config.shuffle_seed``. On early stop the
    parameters of the best validation epoch are restored.
    """
    if len(train_set) == 0 or len(val_set) == 0:
        raise ValueError("training and validation sets must be non-empty")
    rng = np.random.default_rng(config.shuffle_seed)
    state = AdamState(beta1=config.beta1, beta2=config.beta2)
    stopper = EarlyStopping(config.early_stop_patience)
    history = TrainHistory()
    best_params = network.get_flat()
    n = len(train_set)
    for epoch in range(1, config.max_epochs + 1):
        lr = config.lr_at(epoch)
        order = rng.permutation(n)
        running = 0.0
        for start in range(0, n, config.batch_size):
            idx = order[start : start + config.batch_size]
            X, y = train_set.batch(idx)
            pred = network.forward(X, train=True)
            err = pred - y
            batch_loss = float(np.mean(err**2))
            if not math.isfinite(batch_loss):
                raise NumericalError(f"loss became non-finite in epoch {epoch}")
            network.backward(2.0 * err / err.size)
            adam_step(network.params, network.grads, state, lr)
            running += batch_loss * idx.size
        train_loss = running / n
        val_loss = evaluate_loss(network, val_set)
        if not math.isfinite(val_loss):
            raise NumericalError(f"validation loss became non-finite in epoch {epoch}")
        history.train_loss.append(train_loss)
        history.val_loss.append(val_loss)
        history.stopped_epoch = epoch
        log.info("epoch %d lr %.6g train %.6g val %.6g", epoch, lr, train_loss, val_loss)
        stop = stopper.update(epoch, val_loss, train_loss)
        if stopper.best_epoch == epoch:
            best_params = network.get_flat()
        if stop:
            history.early_stopped = True
            break
    history.best_epoch = stopper.best_epoch
    network.set_flat(best_params)
    return network, history
