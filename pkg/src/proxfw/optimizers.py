"""Training-step rules: the proximal Frank-Wolfe optimizer and baselines.

The main step (``dfw_step``) performs one dual Frank-Wolfe pass per
mini-batch: a forward pass for scores, one direction pick per sample on
the label simplex, a single backward pass for the direction-weighted
gradient, and a closed-form step size. With step size 1 it reduces
exactly to SGD with Nesterov momentum on the hinge objective, which the
baseline ``sgd_nesterov_step`` implements directly; ``adaptive_baseline_step``
covers adagrad, adam and amsgrad with their usual defaults.

All step functions are functional: they return a new state and never
mutate their inputs.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .losses import one_hot, softmax_batch
from .models import batch_arrays, batch_scores, weight_mask
from .proximal import _direction_terms, single_step_size

__all__ = [
    "DFWState",
    "BaselineState",
    "StepDiagnostics",
    "dfw_step",
    "sgd_nesterov_step",
    "adaptive_baseline_step",
    "effective_lr",
    "default_lr_schedule",
    "BASELINE_KINDS",
]

BASELINE_KINDS = ("sgd", "adagrad", "adam", "amsgrad")

ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8
ADAGRAD_EPS = 1e-10


@dataclass
class DFWState:
    """Iterate of the proximal Frank-Wolfe optimizer."""

    w: np.ndarray
    eta: float
    momentum: float = 0.9
    l2: float = 1e-4
    mode: str = "smoothed"
    velocity: np.ndarray | None = None
    step_count: int = 0

    def __post_init__(self):
        self.w = np.asarray(self.w, dtype=float)
        if self.eta <= 0:
            raise ValueError("eta must be positive")
        if not 0.0 <= self.momentum < 1.0:
            raise ValueError("momentum must lie in [0, 1)")
        if self.l2 < 0:
            raise ValueError("l2 must be nonnegative")
        if self.velocity is None:
            self.velocity = np.zeros_like(self.w)
        else:
            self.velocity = np.asarray(self.velocity, dtype=float)


@dataclass
class StepDiagnostics:
    step_size: float
    mean_loss: float
    switched: int
    batch_size: int


def dfw_step(state: DFWState, batch, model):
    """One proximal Frank-Wolfe training step on a mini-batch.

    Returns ``(new_state, diagnostics)``. The diagnostics carry the
    closed-form step size, the mean hinge loss of the batch, and how
    many samples fell back from the smoothed direction to the
    conditional-gradient vertex.
    """
    r, delta, loss_term, mean_hinge, switched, n = _direction_terms(
        state.w, batch, model, state.l2, state.mode
    )
    gamma = single_step_size(r, delta, loss_term, state.eta)
    full_dir = r + delta
    velocity = state.momentum * state.velocity - (state.eta * gamma) * full_dir
    w = state.w - state.eta * (r + gamma * delta) + state.momentum * velocity
    new_state = replace(
        state, w=w, velocity=velocity, step_count=state.step_count + 1
    )
    return new_state, StepDiagnostics(
        step_size=gamma, mean_loss=mean_hinge, switched=switched, batch_size=n
    )


@dataclass
class BaselineState:
    """Iterate of one of the baseline optimizers.

    ``schedule`` is a tuple of ``(epoch, multiplier)`` pairs; every pair
    whose epoch has been reached multiplies the base learning rate. The
    harness advances ``epoch``.
    """

    kind: str
    w: np.ndarray
    lr: float
    momentum: float = 0.9
    l2: float = 1e-4
    schedule: tuple = ()
    epoch: int = 0
    step_count: int = 0
    velocity: np.ndarray | None = None
    accum: np.ndarray | None = None
    m1: np.ndarray | None = None
    m2: np.ndarray | None = None
    m2_max: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in BASELINE_KINDS:
            raise ValueError(f"kind must be one of {BASELINE_KINDS}, got {self.kind!r}")
        self.w = np.asarray(self.w, dtype=float)
        if self.lr <= 0:
            raise ValueError("lr must be positive")
        self.schedule = tuple((int(e), float(m)) for e, m in self.schedule)
        if self.velocity is None:
            self.velocity = np.zeros_like(self.w)
        if self.kind == "adagrad" and self.accum is None:
            self.accum = np.zeros_like(self.w)
        if self.kind in ("adam", "amsgrad"):
            if self.m1 is None:
                self.m1 = np.zeros_like(self.w)
            if self.m2 is None:
                self.m2 = np.zeros_like(self.w)
            if self.kind == "amsgrad" and self.m2_max is None:
                self.m2_max = np.zeros_like(self.w)


def effective_lr(state: BaselineState) -> float:
    """Base rate times every schedule multiplier already reached."""
    lr = state.lr
    for epoch, mult in state.schedule:
        if state.epoch >= epoch:
            lr *= mult
    return lr


def default_lr_schedule(epochs: int) -> tuple:
    """Divide the rate by 5 at 30%, 60% and 90% of the epoch budget."""
    marks = sorted({int(epochs * f) for f in (0.3, 0.6, 0.9)})
    return tuple((m, 0.2) for m in marks if 0 < m < epochs)


def _objective_gradient(w, batch, model, l2: float, loss: str):
    """Gradient of regularizer + mean loss; one backward pass."""
    if loss == "svm":
        r, delta, _, mean_hinge, _, _ = _direction_terms(w, batch, model, l2, "conditional")
        return r + delta, mean_hinge
    if loss == "ce":
        X, y = batch_arrays(batch)
        n = X.shape[0]
        F, ref = batch_scores(model, w, X)
        P = softmax_batch(F)
        seed = (P - one_hot(y, F.shape[1])) / n
        g_loss = ref.tape.backward(seed=seed, at=ref)
        r = l2 * np.asarray(w, dtype=float) * weight_mask(model)
        m = F.max(axis=1)
        ce = m + np.log(np.exp(F - m[:, None]).sum(axis=1)) - F[np.arange(n), y]
        return r + g_loss, float(ce.mean())
    raise ValueError(f"loss must be 'svm' or 'ce', got {loss!r}")


def sgd_nesterov_step(state: BaselineState, batch, model, loss: str = "svm"):
    """SGD with Nesterov momentum and a stepwise learning-rate schedule."""
    if state.kind != "sgd":
        raise ValueError(f"sgd_nesterov_step on state of kind {state.kind!r}")
    g, _ = _objective_gradient(state.w, batch, model, state.l2, loss)
    lr = effective_lr(state)
    velocity = state.momentum * state.velocity - lr * g
    w = state.w - lr * g + state.momentum * velocity
    return replace(state, w=w, velocity=velocity, step_count=state.step_count + 1)


def adaptive_baseline_step(state: BaselineState, batch, model, loss: str = "svm"):
    """One adagrad / adam / amsgrad step on regularizer + mean loss."""
    g, _ = _objective_gradient(state.w, batch, model, state.l2, loss)
    lr = effective_lr(state)
    t = state.step_count + 1
    if state.kind == "adagrad":
        accum = state.accum + g * g
        w = state.w - lr * g / np.sqrt(accum + ADAGRAD_EPS)
        return replace(state, w=w, accum=accum, step_count=t)
    if state.kind == "adam":
        m1 = ADAM_BETA1 * state.m1 + (1.0 - ADAM_BETA1) * g
        m2 = ADAM_BETA2 * state.m2 + (1.0 - ADAM_BETA2) * (g * g)
        m1_hat = m1 / (1.0 - ADAM_BETA1**t)
        m2_hat = m2 / (1.0 - ADAM_BETA2**t)
        w = state.w - lr * m1_hat / (np.sqrt(m2_hat) + ADAM_EPS)
        return replace(state, w=w, m1=m1, m2=m2, step_count=t)
    if state.kind == "amsgrad":
        # keeps the largest second moment seen, no bias correction
        m1 = ADAM_BETA1 * state.m1 + (1.0 - ADAM_BETA1) * g
        m2 = ADAM_BETA2 * state.m2 + (1.0 - ADAM_BETA2) * (g * g)
        m2_max = np.maximum(state.m2_max, m2)
        w = state.w - lr * m1 / (np.sqrt(m2_max) + ADAM_EPS)
        return replace(state, w=w, m1=m1, m2=m2, m2_max=m2_max, step_count=t)
    raise ValueError(f"adaptive_baseline_step on state of kind {state.kind!r}")
