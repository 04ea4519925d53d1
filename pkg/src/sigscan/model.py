"""Dense -> signature -> dense regression model with an SGD training loop.

The model maps ``X`` of shape ``(B, L, 20)`` to ``(B, 10)``::

    Z = phi(X @ W1 + b1)      # per time step, (B, L, d)
    S = signature(Z, depth)   # (B, D)
    Y = S @ W2 + b2           # (B, 10)

Targets for training come from a frozen, randomly initialised copy of the
same architecture, so the loss can actually go down.
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from sigscan.autodiff import signature_vjp
from sigscan.errors import DomainError, TrainingError
from sigscan.kernels import KernelKind, signature
from sigscan.tensor_algebra import sig_dim

log = logging.getLogger(__name__)

INPUT_FEATURES = 20
OUTPUT_FEATURES = 10
ACTIVATIONS = ("tanh", "identity")


@dataclass
class ModelParams:
    W1: np.ndarray
    b1: np.ndarray
    W2: np.ndarray
    b2: np.ndarray
    depth: int
    activation: str = "tanh"
    kernel: KernelKind = KernelKind.SEQUENTIAL

    def __post_init__(self):
        if self.activation not in ACTIVATIONS:
            raise DomainError(f"activation must be one of {ACTIVATIONS}, got {self.activation!r}")
        self.kernel = KernelKind.parse(self.kernel)
        d = self.W1.shape[1]
        width = sig_dim(d, self.depth)
        shapes = {
            "W1": (self.W1.shape, (INPUT_FEATURES, d)),
            "b1": (self.b1.shape, (d,)),
            "W2": (self.W2.shape, (width, OUTPUT_FEATURES)),
            "b2": (self.b2.shape, (OUTPUT_FEATURES,)),
        }
        for name, (got, want) in shapes.items():
            if got != want:
                raise DomainError(f"{name} has shape {got}, expected {want}")

    @property
    def sig_input_size(self) -> int:
        return self.W1.shape[1]

    def copy(self) -> ModelParams:
        return replace(self, W1=self.W1.copy(), b1=self.b1.copy(), W2=self.W2.copy(), b2=self.b2.copy())


def init_params(d, depth, rng, activation="tanh", kernel=KernelKind.SEQUENTIAL) -> ModelParams:
    """Uniform ``[-1/sqrt(fan_in), 1/sqrt(fan_in)]`` initialisation."""
    width = sig_dim(d, depth)
    lim1 = 1.0 / math.sqrt(INPUT_FEATURES)
    lim2 = 1.0 / math.sqrt(width)
    return ModelParams(
        W1=rng.uniform(-lim1, lim1, size=(INPUT_FEATURES, d)),
        b1=rng.uniform(-lim1, lim1, size=d),
        W2=rng.uniform(-lim2, lim2, size=(width, OUTPUT_FEATURES)),
        b2=rng.uniform(-lim2, lim2, size=OUTPUT_FEATURES),
        depth=depth,
        activation=activation,
        kernel=kernel,
    )


def _activate(pre, activation):
    return np.tanh(pre) if activation == "tanh" else pre


def _forward_cache(params: ModelParams, X):
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 3 or X.shape[2] != INPUT_FEATURES:
        raise DomainError(f"X must have shape (B, L, {INPUT_FEATURES}), got {X.shape}")
    Z = _activate(X @ params.W1 + params.b1, params.activation)
    S = signature(Z, params.depth, params.kernel)
    return Z, S, S @ params.W2 + params.b2


def forward(params: ModelParams, X) -> np.ndarray:
    """Model output, shape ``(B, 10)``."""
    return _forward_cache(params, X)[2]


def loss_and_grads(params: ModelParams, X, Y):
    """Mean-squared error over all outputs and its gradients.

    Returns ``(loss, grads)`` with ``grads`` keyed like the parameter arrays.
    """
    Z, S, out = _forward_cache(params, X)
    resid = out - Y
    loss = float(np.mean(resid**2))
    g_out = 2.0 * resid / resid.size
    g_W2 = S.T @ g_out
    g_b2 = g_out.sum(axis=0)
    g_S = g_out @ params.W2.T
    g_Z = signature_vjp(Z, params.depth, g_S, params.kernel)
    g_pre = g_Z * (1.0 - Z**2) if params.activation == "tanh" else g_Z
    g_W1 = np.einsum("blf,bld->fd", X, g_pre)
    g_b1 = g_pre.sum(axis=(0, 1))
    return loss, {"W1": g_W1, "b1": g_b1, "W2": g_W2, "b2": g_b2}


def sgd_step(params: ModelParams, grads, lr: float) -> None:
    for name, g in grads.items():
        getattr(params, name)[...] -= lr * g


@dataclass
class TrainConfig:
    n_samples: int = 1024
    seq_len: int = 100
    sig_input_size: int = 4
    depth: int = 3
    batch_size: int = 128
    epochs: int = 10
    learning_rate: float = 0.05
    seed: int = 0
    kernel: str = "sequential"
    activation: str = "tanh"

    def __post_init__(self):
        if not 1 <= self.sig_input_size:
            raise DomainError(f"sig_input_size must be >= 1, got {self.sig_input_size}")
        for name in ("n_samples", "seq_len", "depth", "batch_size", "epochs"):
            if getattr(self, name) < 1:
                raise DomainError(f"{name} must be >= 1, got {getattr(self, name)}")
        if self.learning_rate < 0:
            raise DomainError("learning_rate must be >= 0")
        KernelKind.parse(self.kernel)


@dataclass
class TrainReport:
    config: TrainConfig
    epoch_losses: list[float] = field(default_factory=list)
    epoch_seconds: list[float] = field(default_factory=list)
    total_seconds: float = 0.0
    params: ModelParams | None = None

    def to_dict(self) -> dict:
        return {
            "config": asdict(self.config),
            "epoch_losses": self.epoch_losses,
            "epoch_seconds": self.epoch_seconds,
            "total_seconds": self.total_seconds,
        }


def batch_slices(n_samples: int, batch_size: int) -> list[slice]:
    """Consecutive batches; the last one is short when sizes don't divide."""
    return [slice(i, min(i + batch_size, n_samples)) for i in range(0, n_samples, batch_size)]


def _rngs(seed):
    data, teacher, student = np.random.SeedSequence(seed).spawn(3)
    return np.random.default_rng(data), np.random.default_rng(teacher), np.random.default_rng(student)


def synth_data(config: TrainConfig):
    """Standard-normal inputs and teacher-model targets.

    Returns ``(X, Y)`` of shapes ``(n, L, 20)`` and ``(n, 10)``.
    """
    data_rng, teacher_rng, _ = _rngs(config.seed)
    X = data_rng.standard_normal((config.n_samples, config.seq_len, INPUT_FEATURES))
    teacher = init_params(
        config.sig_input_size, config.depth, teacher_rng, config.activation, config.kernel
    )
    Y = np.concatenate([forward(teacher, X[s]) for s in batch_slices(config.n_samples, 512)])
    return X, Y


def initial_params(config: TrainConfig) -> ModelParams:
    """Seeded starting point of the trained model (distinct from the teacher)."""
    _, _, student_rng = _rngs(config.seed)
    return init_params(config.sig_input_size, config.depth, student_rng, config.activation, config.kernel)


def train(config: TrainConfig, data=None, step_callback=None) -> TrainReport:
    """Mini-batch SGD on MSE; timing covers the training loop only.

    Args:
        config: Run configuration.
        data: Optional precomputed ``(X, Y)``; defaults to :func:`synth_data`.
        step_callback: Called as ``callback(epoch, step, params)`` after each update.
    """
    X, Y = data if data is not None else synth_data(config)
    params = initial_params(config)
    report = TrainReport(config)
    slices = batch_slices(len(X), config.batch_size)
    t_start = time.perf_counter()
    for epoch in range(config.epochs):
        t_epoch = time.perf_counter()
        total = 0.0
        for step, sl in enumerate(slices):
            loss, grads = loss_and_grads(params, X[sl], Y[sl])
            if not np.isfinite(loss):
                raise TrainingError(f"loss became non-finite in epoch {epoch + 1}", epoch + 1)
            total += loss * (sl.stop - sl.start)
            sgd_step(params, grads, config.learning_rate)
            if not all(np.all(np.isfinite(getattr(params, n))) for n in grads):
                raise TrainingError(f"parameters became non-finite in epoch {epoch + 1}", epoch + 1)
            if step_callback is not None:
                step_callback(epoch, step, params)
        epoch_loss = total / len(X)
        seconds = time.perf_counter() - t_epoch
        report.epoch_losses.append(epoch_loss)
        report.epoch_seconds.append(seconds)
        log.info("epoch %d loss %.6g seconds %.3f", epoch + 1, epoch_loss, seconds)
    report.total_seconds = time.perf_counter() - t_start
    report.params = params
    return report
