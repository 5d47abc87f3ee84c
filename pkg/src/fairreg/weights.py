"""Label-similarity weights for cross-group pairs.

A pair of observations, one from each group, is weighted by how close
their target values are. Three weightings are supported:

* ``gaussian``  -- exp(-(y_i - y_j)^2), in (0, 1], for real-valued targets
* ``indicator`` -- 1 if y_i == y_j else 0, for binary targets
* ``constant``  -- a fixed c >= 0 for every pair (c > 0 recovers an
  equal-means style penalty under the group notion)
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError

__all__ = ["DistanceWeight", "GAUSSIAN", "INDICATOR", "pair_weight"]

_KINDS = ("gaussian", "indicator", "constant")


@dataclass(frozen=True)
class DistanceWeight:
    """A weighting rule d(y_i, y_j) applied to every cross pair.

    ``constant`` is only consulted for the "constant" kind.
    """

    kind: str
    constant: float = 1.0

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValidationError(f"unknown weight kind {self.kind!r}; expected one of {_KINDS}")
        if not np.isfinite(self.constant) or self.constant < 0:
            raise ValidationError("constant weight must be finite and >= 0")

    def __call__(self, y_i, y_j):
        return pair_weight(self, y_i, y_j)

    @property
    def max_value(self) -> float:
        """Upper bound on the weights this rule can produce."""
        return self.constant if self.kind == "constant" else 1.0


GAUSSIAN = DistanceWeight("gaussian")
INDICATOR = DistanceWeight("indicator")


def pair_weight(kind: DistanceWeight, y_i, y_j):
    """Evaluate d(y_i, y_j) elementwise; scalars in give a scalar out."""
    y_i = np.asarray(y_i, dtype=float)
    y_j = np.asarray(y_j, dtype=float)
    if not (np.all(np.isfinite(y_i)) and np.all(np.isfinite(y_j))):
        raise ValidationError("pair weights need finite labels")
    if kind.kind == "gaussian":
        out = np.exp(-((y_i - y_j) ** 2))
    elif kind.kind == "indicator":
        out = (y_i == y_j).astype(float)
    else:
        out = np.full(np.broadcast(y_i, y_j).shape, kind.constant)
    return float(out) if out.ndim == 0 else out
