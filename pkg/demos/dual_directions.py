"""Search directions on the label simplex and the smoothing switch.

For one score vector: the margin-augmented scores, the hinge loss as
their maximum, the sparse argmax vertex, and the softmax alternative
that is kept only while it is an ascent direction.
"""

import numpy as np

from proxfw.losses import (
    augmented_scores,
    conditional_gradient_direction,
    dual_direction,
    hinge_loss,
    softmax_direction,
)

y = 0
for scores in ([0.5, 1.5, -1.0], [1.2, 0.4, -0.3], [5.0, 0.0, 0.0]):
    s = np.array(scores)
    aug = augmented_scores(s, y)
    vertex = conditional_gradient_direction(aug)
    soft = softmax_direction(s)
    picked = dual_direction(aug, s, "smoothed")
    kind = "softmax" if np.array_equal(picked, soft) else "vertex"
    print(f"scores {s}")
    print(f"  augmented        {aug}")
    print(f"  hinge            {hinge_loss(s, y):.4f}")
    print(f"  vertex direction {vertex}")
    print(f"  softmax ascent   {soft @ aug:+.4f} -> keeps {kind}")
