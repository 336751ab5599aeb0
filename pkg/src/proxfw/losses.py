"""Losses, margin-augmented scores, and dual search directions.

The hinge loss used throughout is the multiclass margin-rescaled form
with a 0/1 task error: hinge(s, y) = max_j (s_j - s_y + task_loss(j, y)),
whose maximand is exactly the augmented score vector, zero at the true
label. Search directions live on the label simplex: either the hinge
argmax vertex (conditional gradient) or the softmax point, with a switch
that falls back to the vertex whenever the softmax point is not an
ascent direction for the dual.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "MODES",
    "task_loss",
    "augmented_scores",
    "hinge_loss",
    "cross_entropy",
    "softmax_direction",
    "conditional_gradient_direction",
    "dual_direction",
    "default_direction_mode",
    "augmented_scores_batch",
    "hinge_loss_batch",
    "cross_entropy_batch",
    "softmax_batch",
    "conditional_vertex_batch",
    "dual_direction_batch",
    "one_hot",
]

MODES = ("smoothed", "conditional")


def _check_label(k: int, y: int):
    if k < 2:
        raise ValueError("need at least two classes")
    if not 0 <= y < k:
        raise ValueError(f"label {y} outside [0, {k})")


def _check_mode(mode: str):
    if mode not in MODES:
        raise ValueError(f"direction mode must be one of {MODES}, got {mode!r}")


def task_loss(ybar: int, y: int) -> float:
    """0/1 task error."""
    return 0.0 if ybar == y else 1.0


def augmented_scores(s, y: int) -> np.ndarray:
    """Margin-augmented scores: s_j - s_y + task_loss(j, y); zero at ``y``."""
    s = np.asarray(s, dtype=float)
    _check_label(s.shape[-1], y)
    out = s - s[y] + 1.0
    out[y] = 0.0
    return out


def hinge_loss(s, y: int) -> float:
    """Multiclass margin-rescaled hinge; nonnegative by construction."""
    return float(np.max(augmented_scores(s, y)))


def cross_entropy(s, y: int) -> float:
    """Softmax cross-entropy with max-shift for overflow safety."""
    s = np.asarray(s, dtype=float)
    _check_label(s.shape[-1], y)
    m = np.max(s)
    return float(m + np.log(np.sum(np.exp(s - m))) - s[y])


def softmax_direction(s) -> np.ndarray:
    """Softmax of the raw scores; a point in the simplex interior."""
    s = np.asarray(s, dtype=float)
    e = np.exp(s - np.max(s))
    return e / e.sum()


def conditional_gradient_direction(aug) -> np.ndarray:
    """One-hot vertex at the augmented-score argmax (lowest index on ties)."""
    aug = np.asarray(aug, dtype=float)
    out = np.zeros_like(aug)
    out[int(np.argmax(aug))] = 1.0
    return out


def dual_direction(aug, scores, mode: str) -> np.ndarray:
    """Search direction on the label simplex for one sample.

    In "conditional" mode this is always the augmented-score argmax
    vertex. In "smoothed" mode the softmax of the raw scores is used
    when it has positive inner product with the augmented scores (an
    approximate ascent check), otherwise the vertex.
    """
    _check_mode(mode)
    aug = np.asarray(aug, dtype=float)
    if mode == "smoothed":
        s_ce = softmax_direction(scores)
        if float(s_ce @ aug) > 0.0:
            return s_ce
    return conditional_gradient_direction(aug)


def default_direction_mode(num_classes: int) -> str:
    """"conditional" for up to 3 classes, "smoothed" beyond."""
    return "conditional" if num_classes <= 3 else "smoothed"


# ----------------------------------------------------------------------
# batch forms (row-per-sample); same conventions as the scalar versions


def one_hot(y, k: int) -> np.ndarray:
    y = np.asarray(y, dtype=int)
    out = np.zeros((y.shape[0], k))
    out[np.arange(y.shape[0]), y] = 1.0
    return out


def augmented_scores_batch(F, y) -> np.ndarray:
    F = np.asarray(F, dtype=float)
    y = np.asarray(y, dtype=int)
    rows = np.arange(F.shape[0])
    out = F - F[rows, y][:, None] + 1.0
    out[rows, y] = 0.0
    return out


def hinge_loss_batch(F, y) -> np.ndarray:
    return augmented_scores_batch(F, y).max(axis=1)


def cross_entropy_batch(F, y) -> np.ndarray:
    F = np.asarray(F, dtype=float)
    y = np.asarray(y, dtype=int)
    m = F.max(axis=1)
    lse = m + np.log(np.exp(F - m[:, None]).sum(axis=1))
    return lse - F[np.arange(F.shape[0]), y]


def softmax_batch(F) -> np.ndarray:
    F = np.asarray(F, dtype=float)
    e = np.exp(F - F.max(axis=1, keepdims=True))
    return e / e.sum(axis=1, keepdims=True)


def conditional_vertex_batch(augF) -> np.ndarray:
    augF = np.asarray(augF, dtype=float)
    out = np.zeros_like(augF)
    out[np.arange(augF.shape[0]), np.argmax(augF, axis=1)] = 1.0
    return out


def dual_direction_batch(augF, F, mode: str):
    """Vectorized :func:`dual_direction`. Returns ``(S, switched)``.

    ``switched`` counts samples where smoothed mode fell back to the
    conditional-gradient vertex; it is 0 in conditional mode.
    """
    _check_mode(mode)
    vertices = conditional_vertex_batch(augF)
    if mode == "conditional":
        return vertices, 0
    P = softmax_batch(np.asarray(F, dtype=float))
    keep = (P * augF).sum(axis=1) > 0.0
    S = np.where(keep[:, None], P, vertices)
    return S, int((~keep).sum())
