"""Shared tape-building helpers for the test suite.

These build scalar objective heads on top of a model's scores tape so
reverse-mode gradients can be checked against finite differences and
against the optimizer's seeded backward passes.
"""

import numpy as np

from proxfw.autodiff import Ref, Tape


def margin_delta(k: int, y: int) -> np.ndarray:
    d = np.ones(k)
    d[y] = 0.0
    return d


def augmented_ref(scores_ref: Ref, y: int, k: int) -> Ref:
    tape = scores_ref.tape
    return scores_ref - scores_ref.select(y) + tape.constant(margin_delta(k, y))


def l2_head_ref(tape: Tape, mask: np.ndarray, l2: float) -> Ref:
    wv = tape.param(0, (mask.shape[0],))
    masked = wv * tape.constant(mask.astype(float))
    return (masked * wv).total() * (l2 / 2.0)


def hinge_objective_ref(model, x, y: int, l2: float = 0.0) -> Ref:
    """Scalar head: hinge(scores(w, x), y) + (l2/2) |weights|^2."""
    _, sref = model.scores(np.zeros(model.param_count), x)
    head = augmented_ref(sref, y, model.num_classes).max()
    if l2:
        head = head + l2_head_ref(sref.tape, model.weight_mask(), l2)
    return head


def ce_objective_ref(model, x, y: int) -> Ref:
    """Scalar head: max-shifted cross-entropy of the scores."""
    _, sref = model.scores(np.zeros(model.param_count), x)
    m = sref.max()
    lse = m + (sref - m).exp().total().log()
    return lse - sref.select(y)


def weighted_aug_ref(model, x, y: int, weights) -> Ref:
    """Scalar head: fixed-weights inner product with the augmented scores."""
    _, sref = model.scores(np.zeros(model.param_count), x)
    aug = augmented_ref(sref, y, model.num_classes)
    return (sref.tape.constant(np.asarray(weights, dtype=float)) * aug).total()


def head_value(head: Ref, w) -> float:
    return float(head.tape.forward(w))
